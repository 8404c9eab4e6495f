//! Finite-dimensional complex normed spaces.
//!
//! Points are dense coordinate vectors over `C^n` equipped with an `l_p` norm,
//! `1 <= p <= inf`. Linear functionals are represented by a coefficient vector
//! `w` acting as `u -> sum_i u_i * conj(w_i)`, so that for `p = 2` the
//! functional attached to `h` is literally `u -> <u, h>`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Default absolute tolerance for floating comparisons.
pub const DEFAULT_TOL: f64 = 1e-12;

/// A dense complex coordinate vector with at least one finite entry.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Vector(Vec<Complex64>);

impl Vector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidVector("vector must have dim >= 1".into()));
        }
        if let Some(i) = entries.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidVector(format!("entry {i} is not finite")));
        }
        Ok(Self(entries))
    }

    /// Real coordinates embedded in `C^n`.
    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&r| Complex64::new(r, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "vector must have dim >= 1");
        Self(vec![Complex64::new(0.0, 0.0); dim])
    }

    /// The `i`-th standard basis vector.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn add(&self, other: &Vector) -> Vector {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: Complex64) -> Vector {
        Vector(self.0.iter().map(|&a| a * c).collect())
    }

    pub fn scale_real(&self, c: f64) -> Vector {
        Vector(self.0.iter().map(|&a| a * c).collect())
    }

    /// `self - c * other`.
    pub fn sub_scaled(&self, c: Complex64, other: &Vector) -> Vector {
        self.zip_with(other, |a, b| a - c * b)
    }

    pub fn neg(&self) -> Vector {
        Vector(self.0.iter().map(|&a| -a).collect())
    }

    pub fn conj(&self) -> Vector {
        Vector(self.0.iter().map(|a| a.conj()).collect())
    }

    /// Unconjugated bilinear pairing `sum_i u_i * w_i`.
    pub fn bilinear(&self, other: &Vector) -> Complex64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    fn zip_with(&self, other: &Vector, op: impl Fn(Complex64, Complex64) -> Complex64) -> Vector {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        Vector(self.0.iter().zip(&other.0).map(|(&a, &b)| op(a, b)).collect())
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl<'de> Deserialize<'de> for Vector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let entries = Vec::<Complex64>::deserialize(d)?;
        Vector::new(entries).map_err(serde::de::Error::custom)
    }
}

/// The exponent of an `l_p` norm. `p = inf` is its own tag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormSpec {
    P(f64),
    Infinity,
}

impl NormSpec {
    pub const L1: NormSpec = NormSpec::P(1.0);
    pub const L2: NormSpec = NormSpec::P(2.0);
    pub const LINF: NormSpec = NormSpec::Infinity;

    /// Builds a norm from a raw exponent; `f64::INFINITY` maps to the infinity tag.
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(NormSpec::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(NormSpec::P(p))
        } else {
            Err(Error::InvalidExponent(p))
        }
    }

    pub fn exponent(self) -> f64 {
        match self {
            NormSpec::P(p) => p,
            NormSpec::Infinity => f64::INFINITY,
        }
    }

    pub fn is_hilbert(self) -> bool {
        self == NormSpec::L2
    }

    pub fn dual(self) -> NormSpec {
        dual_exponent(self)
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpec::P(p) => write!(f, "{p}"),
            NormSpec::Infinity => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for NormSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(NormSpec::Infinity),
            other => {
                let p: f64 = other.parse().map_err(|_| Error::InvalidExponentText(s.to_string()))?;
                NormSpec::new(p)
            }
        }
    }
}

impl Serialize for NormSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NormSpec::P(p) => s.serialize_f64(*p),
            NormSpec::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for NormSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Tag(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(p) => NormSpec::new(p).map_err(serde::de::Error::custom),
            Repr::Tag(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// `(sum |v_i|^p)^(1/p)`, or `max |v_i|` for `p = inf`.
pub fn norm(v: &Vector, spec: NormSpec) -> f64 {
    let moduli = v.entries().iter().map(|z| z.norm());
    match spec {
        NormSpec::Infinity => moduli.fold(0.0, f64::max),
        NormSpec::P(1.0) => moduli.sum(),
        NormSpec::P(p) => {
            // rescale by the largest modulus so the powers cannot overflow
            let m = v.entries().iter().map(|z| z.norm()).fold(0.0, f64::max);
            if m == 0.0 {
                return 0.0;
            }
            let s: f64 = if p == 2.0 {
                moduli.map(|a| (a / m) * (a / m)).sum()
            } else {
                moduli.map(|a| (a / m).powf(p)).sum()
            };
            m * s.powf(1.0 / p)
        }
    }
}

/// Hölder conjugate `q` with `1/p + 1/q = 1`.
pub fn dual_exponent(spec: NormSpec) -> NormSpec {
    match spec {
        NormSpec::Infinity => NormSpec::P(1.0),
        NormSpec::P(1.0) => NormSpec::Infinity,
        NormSpec::P(p) => NormSpec::P(p / (p - 1.0)),
    }
}

/// `<u, v> = sum_i u_i * conj(v_i)`; linear in `u`, conjugate-linear in `v`.
pub fn inner(u: &Vector, v: &Vector) -> Result<Complex64> {
    check_dims(u.dim(), v.dim())?;
    Ok(u.entries().iter().zip(v.entries()).map(|(a, b)| a * b.conj()).sum())
}

/// Norm of the functional `u -> sum_i u_i * conj(w_i)` on `(C^n, l_p)`, i.e. `||w||_q`.
pub fn dual_norm(w: &Vector, spec: NormSpec) -> f64 {
    norm(w, dual_exponent(spec))
}

pub(crate) fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1);
        Self { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidMatrix("matrix must be at least 1x1".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidMatrix(format!("row {i} has {} entries, expected {dim}", row.len())));
            }
            data.extend(row);
        }
        if data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidMatrix("matrix has non-finite entries".into()));
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect())
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = d;
        }
        m
    }

    /// The Pauli matrices `sigma_x`, `sigma_y`, `sigma_z`.
    pub fn pauli_x() -> Self {
        Self::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    pub fn pauli_y() -> Self {
        let i = Complex64::i();
        let z = Complex64::new(0.0, 0.0);
        Self::from_rows(vec![vec![z, -i], vec![i, z]]).unwrap()
    }

    pub fn pauli_z() -> Self {
        Self::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, z: Complex64) {
        self.data[i * self.dim + j] = z;
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks(self.dim)
    }

    pub fn apply(&self, v: &Vector) -> Result<Vector> {
        check_dims(self.dim, v.dim())?;
        Ok(Vector(
            self.rows()
                .map(|row| row.iter().zip(v.entries()).map(|(a, b)| a * b).sum())
                .collect(),
        ))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Matrix {
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        Matrix { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        Matrix { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, c: Complex64) -> Matrix {
        Matrix { dim: self.dim, data: self.data.iter().map(|a| a * c).collect() }
    }

    /// Largest entrywise deviation from the conjugate transpose.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[Complex64]> = self.rows().collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<Complex64>>::deserialize(d)?;
        Matrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}
