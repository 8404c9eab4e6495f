//! Lipschitz norms `sup_{u != v} |g(u) - g(v)| / ||u - v||`.
//!
//! Linear maps and functionals get closed forms. Everything else gets the
//! exact supremum over a finite cloud, optionally pushed upward by a seeded
//! hill climb inside the domain ball. Sampled values are lower bounds of the
//! norm over the ball and are never reported as exact.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{gaussian_vector, DomainSpec, FunctionalSpec, MapSpec};
use crate::space::{dual_norm, norm, Matrix, NormSpec, Vector};
use crate::{Error, Result};

/// Pairs closer than this are skipped.
pub const PAIR_EPS: f64 = 1e-12;

/// Refinement probes closer than this fraction of the domain radius are
/// rejected; below it cancellation in `g(u) - g(v)` dominates the quotient.
pub const REFINE_MIN_GAP: f64 = 1e-5;

pub const POWER_MAX_ITERS: usize = 10_000;
pub const POWER_REL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LipMethod {
    DualFormula,
    OperatorFormula,
    PowerIteration,
    PairwiseSample,
    Refined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipEstimate {
    pub lower: f64,
    pub exact: Option<f64>,
    pub witness: Option<(Vector, Vector)>,
    pub method: LipMethod,
}

impl LipEstimate {
    pub fn exact(value: f64, method: LipMethod) -> Self {
        Self { lower: value, exact: Some(value), witness: None, method }
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Exact value when known, otherwise the lower bound.
    pub fn value(&self) -> f64 {
        self.exact.unwrap_or(self.lower)
    }
}

/// Value of a map whose Lipschitz norm is being measured.
#[derive(Clone, Debug, PartialEq)]
pub enum Image {
    Scalar(Complex64),
    Point(Vector),
}

impl Image {
    /// Modulus for scalars, `spec`-norm for points.
    pub fn distance(&self, other: &Image, spec: NormSpec) -> f64 {
        match (self, other) {
            (Image::Scalar(a), Image::Scalar(b)) => (a - b).norm(),
            (Image::Point(a), Image::Point(b)) => norm(&a.sub(b), spec),
            _ => panic!("mixed scalar and vector images"),
        }
    }
}

/// Operator norm of `matrix` on `(C^n, l_p)` for `p` in `{1, 2, inf}`.
pub fn lip_exact_linear_map(matrix: &Matrix, spec: NormSpec) -> Result<LipEstimate> {
    match spec {
        NormSpec::P(1.0) => {
            let n = matrix.dim();
            let col_max = (0..n)
                .map(|j| (0..n).map(|i| matrix.get(i, j).norm()).sum::<f64>())
                .fold(0.0, f64::max);
            Ok(LipEstimate::exact(col_max, LipMethod::OperatorFormula))
        }
        NormSpec::Infinity => {
            let row_max = matrix.rows().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
            Ok(LipEstimate::exact(row_max, LipMethod::OperatorFormula))
        }
        NormSpec::P(2.0) => Ok(LipEstimate::exact(spectral_norm(matrix), LipMethod::PowerIteration)),
        other => Err(Error::UnsupportedExponent(other)),
    }
}

/// Largest singular value by power iteration on `A^dagger A`.
pub fn spectral_norm(matrix: &Matrix) -> f64 {
    let n = matrix.dim();
    let gram = matrix.adjoint().mul(matrix);
    // fixed, generic start vector
    let start: Vec<Complex64> =
        (0..n).map(|k| Complex64::new(1.0 + 0.37 * k as f64, 0.11 * (k as f64 + 1.0).sqrt())).collect();
    let mut v = Vector::new(start).expect("finite start");
    v = v.scale_real(1.0 / norm(&v, NormSpec::L2));
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITERS {
        let w = gram.apply(&v).expect("square");
        let rayleigh = crate::space::inner(&w, &v).expect("same dim").re;
        let wn = norm(&w, NormSpec::L2);
        if wn == 0.0 {
            return 0.0;
        }
        let residual = norm(&w.sub_scaled(Complex64::new(rayleigh, 0.0), &v), NormSpec::L2);
        let settled = (rayleigh - lambda).abs() <= POWER_REL_TOL * rayleigh && residual <= 1e-10 * rayleigh;
        lambda = rayleigh;
        v = w.scale_real(1.0 / wn);
        if settled {
            break;
        }
    }
    lambda.max(0.0).sqrt()
}

/// Supremum of the difference quotient over distinct pairs of `cloud`.
///
/// Pairs are scanned in index order `(i, j)`, `i < j`; the first maximal pair
/// becomes the witness.
pub fn lip_sampled<G>(g: G, cloud: &[Vector], spec: NormSpec) -> Result<LipEstimate>
where
    G: Fn(&Vector) -> Image,
{
    let images: Vec<Image> = cloud.iter().map(&g).collect();
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..cloud.len() {
        for j in (i + 1)..cloud.len() {
            let gap = norm(&cloud[i].sub(&cloud[j]), spec);
            if gap < PAIR_EPS {
                continue;
            }
            let q = images[i].distance(&images[j], spec) / gap;
            if best.is_none_or(|(b, _, _)| q > b) {
                best = Some((q, i, j));
            }
        }
    }
    let (lower, i, j) = best.ok_or(Error::EmptySample)?;
    Ok(LipEstimate {
        lower,
        exact: None,
        witness: Some((cloud[i].clone(), cloud[j].clone())),
        method: LipMethod::PairwiseSample,
    })
}

/// Seeded hill climb of the difference quotient starting at `start`'s witness.
///
/// Each probe perturbs one or both endpoints, projects back into the domain
/// ball and keeps the pair if the quotient grew. The step size follows a
/// one-fifth success rule. The result never falls below `start.lower`.
pub fn lip_refine<G>(g: G, start: &LipEstimate, spec: NormSpec, domain: &DomainSpec, budget: usize, seed: u64) -> LipEstimate
where
    G: Fn(&Vector) -> Image,
{
    let Some((u0, v0)) = start.witness.clone() else {
        return start.clone();
    };
    if budget == 0 {
        return start.clone();
    }
    let dim = u0.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut u, mut v) = (u0, v0);
    let (mut gu, mut gv) = (g(&u), g(&v));
    let mut best = start.lower;
    let base_step = 0.1 * domain.radius;
    let min_step = 1e-9 * domain.radius;
    let min_gap = (REFINE_MIN_GAP * domain.radius).max(PAIR_EPS);
    let mut step = base_step;
    let grow = (1.0f64 / 3.0).exp();
    let shrink = (-1.0f64 / 12.0).exp();
    let noise_scale = 1.0 / (dim as f64).sqrt();

    for _ in 0..budget {
        let which = rng.gen_range(0..3u8);
        let perturb = |p: &Vector, rng: &mut ChaCha8Rng| {
            let dir = gaussian_vector(rng, dim);
            domain.project(&p.add(&dir.scale_real(step * noise_scale)), spec)
        };
        let nu = if which != 1 { perturb(&u, &mut rng) } else { u.clone() };
        let nv = if which != 0 { perturb(&v, &mut rng) } else { v.clone() };
        let gap = norm(&nu.sub(&nv), spec);
        if gap < min_gap {
            step = (step * shrink).max(min_step);
            continue;
        }
        let gnu = if which != 1 { g(&nu) } else { gu.clone() };
        let gnv = if which != 0 { g(&nv) } else { gv.clone() };
        let q = gnu.distance(&gnv, spec) / gap;
        if q > best {
            best = q;
            u = nu;
            v = nv;
            gu = gnu;
            gv = gnv;
            step = (step * grow).min(domain.radius);
        } else {
            step *= shrink;
            if step < min_step {
                step = base_step;
            }
        }
    }
    if best > start.lower {
        LipEstimate { lower: best, exact: start.exact, witness: Some((u, v)), method: LipMethod::Refined }
    } else {
        LipEstimate { method: LipMethod::Refined, ..start.clone() }
    }
}

/// Coefficient vector of the linear functional `u -> f(Au) - c f(u)`: `A^dagger w - conj(c) w`.
pub fn composite_coefficients(w: &Vector, a: &Matrix, c: Complex64) -> Result<Vector> {
    Ok(a.adjoint().apply(w)?.sub_scaled(c.conj(), w))
}

/// Exact `||f∘A - c f||_Lip0` for linear `f` and `A`, via the dual norm.
pub fn lip_linear_composite_exact(f: &FunctionalSpec, a: &MapSpec, c: Complex64, spec: NormSpec) -> Result<LipEstimate> {
    let w = f.as_linear().ok_or(Error::NotLinear("composite dual formula (functional)"))?;
    let m = a.as_linear().ok_or(Error::NotLinear("composite dual formula (map)"))?;
    let coeffs = composite_coefficients(w, m, c)?;
    Ok(LipEstimate::exact(dual_norm(&coeffs, spec), LipMethod::DualFormula))
}

/// Exact `||f||_Lip0` for a linear functional.
pub fn lip_linear_functional(f: &FunctionalSpec, spec: NormSpec) -> Result<LipEstimate> {
    let w = f.as_linear().ok_or(Error::NotLinear("functional dual formula"))?;
    Ok(LipEstimate::exact(dual_norm(w, spec), LipMethod::DualFormula))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{eval_functional, sample_in_ball};

    fn quotient<G: Fn(&Vector) -> Image>(g: &G, pair: &(Vector, Vector), spec: NormSpec) -> f64 {
        g(&pair.0).distance(&g(&pair.1), spec) / norm(&pair.0.sub(&pair.1), spec)
    }

    #[test]
    fn operator_norm_examples() {
        let swap = Matrix::pauli_x();
        assert!((lip_exact_linear_map(&swap, NormSpec::L2).unwrap().lower - 1.0).abs() < 1e-12);
        let d = Matrix::diagonal(&[Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)]);
        assert!((lip_exact_linear_map(&d, NormSpec::L2).unwrap().lower - 2.0).abs() < 1e-12);
        let shear = Matrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let est = lip_exact_linear_map(&shear, NormSpec::L1).unwrap();
        assert_eq!(est.exact, Some(2.0));
        assert_eq!(lip_exact_linear_map(&shear, NormSpec::LINF).unwrap().exact, Some(2.0));
        assert!(matches!(lip_exact_linear_map(&shear, NormSpec::P(3.0)), Err(Error::UnsupportedExponent(_))));
        assert_eq!(spectral_norm(&Matrix::zeros(3)), 0.0);
    }

    #[test]
    fn shear_l1_norm_bounded_below_by_sampling() {
        let shear = Matrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut cloud = vec![Vector::zeros(2)];
        cloud.extend((0..100).map(|_| sample_in_ball(&mut rng, 2, NormSpec::L1, 1.0)));
        let g = |u: &Vector| Image::Point(shear.apply(u).unwrap());
        let est = lip_sampled(g, &cloud, NormSpec::L1).unwrap();
        assert!(est.lower <= 2.0 + 1e-12);
        assert!(est.lower > 1.5);
    }

    #[test]
    fn sampled_square_on_three_points() {
        let cloud: Vec<Vector> = [-1.0, 0.0, 1.0].iter().map(|&t| Vector::from_real(&[t]).unwrap()).collect();
        let g = |u: &Vector| Image::Scalar(u[0] * u[0]);
        let est = lip_sampled(g, &cloud, NormSpec::L2).unwrap();
        // pairs in order: (-1,0) -> 1, (-1,1) -> 0, (0,1) -> 1
        assert_eq!(est.lower, 1.0);
        assert_eq!(est.witness, Some((cloud[0].clone(), cloud[1].clone())));
    }

    #[test]
    fn sampled_linear_functional_hits_dual_norm() {
        let w = Vector::from_real(&[3.0, 4.0]).unwrap();
        let f = FunctionalSpec::linear(w);
        let a = Vector::from_real(&[0.6, 0.8]).unwrap();
        let cloud = vec![Vector::zeros(2), a.clone(), a.neg(), Vector::from_real(&[0.1, -0.2]).unwrap()];
        let g = |u: &Vector| Image::Scalar(eval_functional(&f, u).unwrap());
        let est = lip_sampled(g, &cloud, NormSpec::L2).unwrap();
        assert!((est.lower - 5.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_zero_map_and_degenerate_cloud() {
        let cloud = vec![Vector::zeros(2), Vector::basis(2, 0)];
        let est = lip_sampled(|_: &Vector| Image::Scalar(Complex64::new(0.0, 0.0)), &cloud, NormSpec::L2).unwrap();
        assert_eq!(est.lower, 0.0);
        let same = vec![Vector::zeros(2), Vector::zeros(2)];
        assert!(matches!(lip_sampled(|_: &Vector| Image::Scalar(Complex64::new(0.0, 0.0)), &same, NormSpec::L2), Err(Error::EmptySample)));
    }

    #[test]
    fn refine_square_approaches_two() {
        let cloud: Vec<Vector> = [-1.0, 0.0, 1.0].iter().map(|&t| Vector::from_real(&[t]).unwrap()).collect();
        let g = |u: &Vector| Image::Scalar(u[0] * u[0]);
        let start = lip_sampled(g, &cloud, NormSpec::L2).unwrap();
        let domain = DomainSpec { radius: 1.0, cloud: cloud.clone() };
        let refined = lip_refine(g, &start, NormSpec::L2, &domain, 10_000, 9);
        assert!(refined.lower >= 1.9, "refined {}", refined.lower);
        assert!(refined.lower <= 2.0 + 1e-9, "{refined:?}");
        let w = refined.witness.clone().unwrap();
        assert!((quotient(&g, &w, NormSpec::L2) - refined.lower).abs() <= 1e-9 * refined.lower);
        assert_eq!(lip_refine(g, &start, NormSpec::L2, &domain, 0, 9), start);
    }

    #[test]
    fn composite_examples() {
        let e1 = Vector::basis(2, 0);
        let f = FunctionalSpec::linear(e1.clone());
        let id = MapSpec::identity(2);
        assert_eq!(lip_linear_composite_exact(&f, &id, Complex64::new(1.0, 0.0), NormSpec::L2).unwrap().lower, 0.0);
        let sx = MapSpec::linear(Matrix::pauli_x());
        let est = lip_linear_composite_exact(&f, &sx, Complex64::new(0.0, 0.0), NormSpec::L2).unwrap();
        assert_eq!(est.exact, Some(1.0));
        assert_eq!(est.method, LipMethod::DualFormula);
        let nonlinear = MapSpec::radial(crate::model::ScalarProfile::tanh(), 2);
        assert!(lip_linear_composite_exact(&f, &nonlinear, Complex64::new(0.0, 0.0), NormSpec::L2).is_err());
    }
}
