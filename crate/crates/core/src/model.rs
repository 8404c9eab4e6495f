//! Lipschitz maps pinned at zero, functionals in `Lip_0`, sampled domains and
//! seeded random instances.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::space::{check_dims, dual_norm, norm, Matrix, NormSpec, Vector, DEFAULT_TOL};
use crate::{Error, Result};

/// Smallest `|f(x)|` accepted by [`normalize_functional`].
pub const NORMALIZE_EPS: f64 = 1e-9;

/// Generated functionals must satisfy `|f(x)| >= GEN_CONDITIONING * ||w||_q * ||x||_p`
/// before normalization, otherwise the draw is rejected.
pub const GEN_CONDITIONING: f64 = 0.05;

/// Maximum number of derived sub-seeds tried by [`generate_instance`].
pub const MAX_GEN_ATTEMPTS: u64 = 32;

/// Golden-ratio increment of the splitmix64 sequence used for every derived seed.
pub const SEED_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// `splitmix64(seed + (index + 1) * SEED_GAMMA)`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(SEED_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Real scalar profile `psi` with `psi(0) = 0`.
///
/// On complex arguments the profile acts on real and imaginary parts
/// separately, which keeps its Lipschitz constant unchanged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarProfile {
    /// `c * tanh(a * t)`
    ScaledTanh { a: f64, c: f64 },
    /// `sum_k coeffs[k] * t^(k + 1)`; the constant term is absent by construction.
    Polynomial { coeffs: Vec<f64> },
}

impl ScalarProfile {
    pub fn tanh() -> Self {
        ScalarProfile::ScaledTanh { a: 1.0, c: 1.0 }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ScalarProfile::ScaledTanh { a, c } => c * (a * t).tanh(),
            ScalarProfile::Polynomial { coeffs } => {
                // Horner on t * (c0 + c1 t + ...)
                t * coeffs.iter().rev().fold(0.0, |acc, &ck| acc * t + ck)
            }
        }
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        Complex64::new(self.eval(z.re), self.eval(z.im))
    }

    /// Lipschitz constant of the profile on `[-r, r]`.
    pub fn lipschitz_bound(&self, r: f64) -> f64 {
        match self {
            ScalarProfile::ScaledTanh { a, c } => (a * c).abs(),
            ScalarProfile::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .map(|(k, ck)| (k as f64 + 1.0) * ck.abs() * r.powi(k as i32))
                .sum(),
        }
    }
}

/// A Lipschitz map `C^n -> C^n` with `A(0) = 0` by construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapSpec {
    Linear { matrix: Matrix },
    /// `u -> psi(mix * u)` applied entrywise.
    ComponentwiseOdd { profile: ScalarProfile, mix: Matrix },
    /// `u -> psi(||u||) / ||u|| * mix * u`, and `0 -> 0`.
    Radial { profile: ScalarProfile, mix: Matrix },
}

impl MapSpec {
    pub fn linear(matrix: Matrix) -> Self {
        MapSpec::Linear { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        MapSpec::Linear { matrix: Matrix::identity(dim) }
    }

    pub fn zero(dim: usize) -> Self {
        MapSpec::Linear { matrix: Matrix::zeros(dim) }
    }

    pub fn componentwise(profile: ScalarProfile, dim: usize) -> Self {
        MapSpec::ComponentwiseOdd { profile, mix: Matrix::identity(dim) }
    }

    pub fn radial(profile: ScalarProfile, dim: usize) -> Self {
        MapSpec::Radial { profile, mix: Matrix::identity(dim) }
    }

    pub fn dim(&self) -> usize {
        match self {
            MapSpec::Linear { matrix } => matrix.dim(),
            MapSpec::ComponentwiseOdd { mix, .. } | MapSpec::Radial { mix, .. } => mix.dim(),
        }
    }

    pub fn as_linear(&self) -> Option<&Matrix> {
        match self {
            MapSpec::Linear { matrix } => Some(matrix),
            _ => None,
        }
    }

    pub fn is_linear(&self) -> bool {
        self.as_linear().is_some()
    }
}

/// `A(u)`. The radial family measures `||u||` in `spec`.
pub fn eval_map(map: &MapSpec, u: &Vector, spec: NormSpec) -> Result<Vector> {
    check_dims(map.dim(), u.dim())?;
    match map {
        MapSpec::Linear { matrix } => matrix.apply(u),
        MapSpec::ComponentwiseOdd { profile, mix } => {
            let mixed = mix.apply(u)?;
            Vector::new(mixed.entries().iter().map(|&z| profile.apply(z)).collect())
        }
        MapSpec::Radial { profile, mix } => {
            let r = norm(u, spec);
            if r == 0.0 {
                return Ok(Vector::zeros(u.dim()));
            }
            Ok(mix.apply(u)?.scale_real(profile.eval(r) / r))
        }
    }
}

/// A functional `f : C^n -> C` with `f(0) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionalSpec {
    /// `u -> sum_i u_i * conj(w_i)`
    Linear { w: Vector },
    /// `u -> scale * psi(sum_i u_i * conj(w_i))`
    PostComposed { w: Vector, profile: ScalarProfile, scale: Complex64 },
}

impl FunctionalSpec {
    pub fn linear(w: Vector) -> Self {
        FunctionalSpec::Linear { w }
    }

    pub fn post_composed(w: Vector, profile: ScalarProfile) -> Self {
        FunctionalSpec::PostComposed { w, profile, scale: Complex64::new(1.0, 0.0) }
    }

    pub fn dim(&self) -> usize {
        match self {
            FunctionalSpec::Linear { w } | FunctionalSpec::PostComposed { w, .. } => w.dim(),
        }
    }

    pub fn coefficients(&self) -> &Vector {
        match self {
            FunctionalSpec::Linear { w } | FunctionalSpec::PostComposed { w, .. } => w,
        }
    }

    pub fn as_linear(&self) -> Option<&Vector> {
        match self {
            FunctionalSpec::Linear { w } => Some(w),
            _ => None,
        }
    }

    pub fn is_linear(&self) -> bool {
        self.as_linear().is_some()
    }

    /// The functional `c * f`.
    pub fn scaled(&self, c: Complex64) -> FunctionalSpec {
        match self {
            FunctionalSpec::Linear { w } => FunctionalSpec::Linear { w: w.scale(c.conj()) },
            FunctionalSpec::PostComposed { w, profile, scale } => {
                FunctionalSpec::PostComposed { w: w.clone(), profile: profile.clone(), scale: scale * c }
            }
        }
    }

    /// Upper bound on the Lipschitz constant over the `spec`-ball of radius `radius`.
    pub fn lipschitz_bound(&self, radius: f64, spec: NormSpec) -> f64 {
        match self {
            FunctionalSpec::Linear { w } => dual_norm(w, spec),
            FunctionalSpec::PostComposed { w, profile, scale } => {
                let wq = dual_norm(w, spec);
                scale.norm() * profile.lipschitz_bound(wq * radius) * wq
            }
        }
    }
}

pub fn eval_functional(f: &FunctionalSpec, u: &Vector) -> Result<Complex64> {
    check_dims(f.dim(), u.dim())?;
    let pairing = |w: &Vector| -> Complex64 { u.entries().iter().zip(w.entries()).map(|(a, b)| a * b.conj()).sum() };
    Ok(match f {
        FunctionalSpec::Linear { w } => pairing(w),
        FunctionalSpec::PostComposed { w, profile, scale } => scale * profile.apply(pairing(w)),
    })
}

/// Rescales `f` so that `f(x) = 1`.
pub fn normalize_functional(f: &FunctionalSpec, x: &Vector) -> Result<FunctionalSpec> {
    let value = eval_functional(f, x)?;
    if value.norm() <= NORMALIZE_EPS {
        return Err(Error::NotNormalizable { value: value.norm() });
    }
    Ok(f.scaled(value.inv()))
}

/// A norm ball with a finite sample cloud standing in for the domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub radius: f64,
    pub cloud: Vec<Vector>,
}

impl DomainSpec {
    pub fn ball_tol(&self) -> f64 {
        DEFAULT_TOL * self.radius.max(1.0)
    }

    pub fn contains(&self, v: &Vector, spec: NormSpec) -> bool {
        norm(v, spec) <= self.radius + self.ball_tol()
    }

    /// Radial projection onto the ball.
    pub fn project(&self, v: &Vector, spec: NormSpec) -> Vector {
        let r = norm(v, spec);
        if r > self.radius {
            v.scale_real(self.radius / r)
        } else {
            v.clone()
        }
    }

    pub fn validate(&self, dim: usize, spec: NormSpec) -> Result<()> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::InvalidInstance(format!("domain radius {} must be positive", self.radius)));
        }
        if !self.cloud.iter().any(Vector::is_zero) {
            return Err(Error::InvalidInstance("domain cloud must contain the zero vector".into()));
        }
        for (i, c) in self.cloud.iter().enumerate() {
            check_dims(dim, c.dim())?;
            if !self.contains(c, spec) {
                return Err(Error::InvalidInstance(format!("cloud point {i} lies outside the domain ball")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Hermitian matrices on l2 with `f = <., h>`.
    Hilbert,
    /// Random complex matrices and linear functionals on l_p.
    BanachLinear,
    /// Catalog nonlinear maps and functionals on l_p.
    BanachNonlinear,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Hilbert => "hilbert",
            Mode::BanachLinear => "banach-linear",
            Mode::BanachNonlinear => "banach-nonlinear",
        })
    }
}

/// One hypothesis set `(X, M, N, A, B, x, f)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub mode: Mode,
    pub dim: usize,
    pub norm: NormSpec,
    pub m: DomainSpec,
    pub n: DomainSpec,
    pub a: MapSpec,
    pub b: MapSpec,
    pub x: Vector,
    pub f: FunctionalSpec,
}

impl Instance {
    pub fn validate(&self) -> Result<()> {
        let dim = self.dim;
        for d in [self.a.dim(), self.b.dim(), self.x.dim(), self.f.dim()] {
            check_dims(dim, d)?;
        }
        self.m.validate(dim, self.norm)?;
        self.n.validate(dim, self.norm)?;
        if !(self.m.contains(&self.x, self.norm) && self.n.contains(&self.x, self.norm)) {
            return Err(Error::InvalidInstance("x must lie in both domains".into()));
        }
        let fx = eval_functional(&self.f, &self.x)?;
        if (fx - 1.0).norm() > DEFAULT_TOL {
            return Err(Error::InvalidInstance(format!("f(x) = {fx} is not 1")));
        }
        let zero = Vector::zeros(dim);
        for (name, map) in [("A", &self.a), ("B", &self.b)] {
            if !eval_map(map, &zero, self.norm)?.is_zero() {
                return Err(Error::InvalidInstance(format!("{name}(0) != 0")));
            }
        }
        if self.mode == Mode::Hilbert {
            if !self.norm.is_hilbert() {
                return Err(Error::InvalidInstance("hilbert instances use p = 2".into()));
            }
            for map in [&self.a, &self.b] {
                let m = map.as_linear().ok_or_else(|| Error::InvalidInstance("hilbert maps must be linear".into()))?;
                if m.hermitian_defect() > DEFAULT_TOL * m.max_abs().max(1.0) {
                    return Err(Error::NotHermitian(m.hermitian_defect()));
                }
            }
        }
        Ok(())
    }

    pub fn is_linear(&self) -> bool {
        self.a.is_linear() && self.b.is_linear() && self.f.is_linear()
    }
}

/// Parameters for [`generate_instance`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub mode: Mode,
    pub dim: usize,
    pub p: NormSpec,
    pub cloud_size: usize,
}

impl GenConfig {
    pub fn new(mode: Mode, dim: usize, p: NormSpec) -> Self {
        Self { mode, dim, p, cloud_size: 64 }
    }
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    Vector::new((0..dim).map(|_| complex_gaussian(rng)).collect()).expect("gaussian draws are finite")
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, dim: usize) -> Matrix {
    Matrix::from_rows((0..dim).map(|_| (0..dim).map(|_| complex_gaussian(rng)).collect()).collect())
        .expect("gaussian draws are finite")
}

/// `(G + G^dagger) / 2` for a complex Gaussian `G`.
pub fn gaussian_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> Matrix {
    let g = gaussian_matrix(rng, dim);
    g.add(&g.adjoint()).scale(Complex64::new(0.5, 0.0))
}

/// Gaussian direction rescaled to `||v||_p = r`.
fn point_with_norm(rng: &mut ChaCha8Rng, dim: usize, spec: NormSpec, r: f64) -> Vector {
    loop {
        let g = gaussian_vector(rng, dim);
        let n = norm(&g, spec);
        if n > 1e-12 {
            return g.scale_real(r / n);
        }
    }
}

/// Point in the ball with radial law `R * U^(1/(2 dim))`.
pub fn sample_in_ball(rng: &mut ChaCha8Rng, dim: usize, spec: NormSpec, radius: f64) -> Vector {
    let u: f64 = rng.gen();
    let r = radius * u.powf(1.0 / (2.0 * dim as f64));
    point_with_norm(rng, dim, spec, r)
}

fn sample_cloud(rng: &mut ChaCha8Rng, dim: usize, spec: NormSpec, radius: f64, x: &Vector, size: usize) -> DomainSpec {
    let mut cloud = vec![Vector::zeros(dim), x.clone()];
    while cloud.len() < size {
        cloud.push(sample_in_ball(rng, dim, spec, radius));
    }
    DomainSpec { radius, cloud }
}

fn random_profile(rng: &mut ChaCha8Rng) -> ScalarProfile {
    if rng.gen_bool(0.5) {
        let a = rng.gen_range(0.5..2.0);
        let c = rng.gen_range(0.5..1.5) / a;
        ScalarProfile::ScaledTanh { a, c }
    } else {
        let c1 = rng.gen_range(0.5..1.5);
        let c2: f64 = StandardNormal.sample(rng);
        let c3: f64 = StandardNormal.sample(rng);
        ScalarProfile::Polynomial { coeffs: vec![c1, 0.3 * c2, 0.2 * c3] }
    }
}

fn random_nonlinear_map(rng: &mut ChaCha8Rng, dim: usize) -> MapSpec {
    let profile = random_profile(rng);
    let mix = gaussian_matrix(rng, dim).scale(Complex64::new(1.0 / (dim as f64).sqrt(), 0.0));
    if rng.gen_bool(0.5) {
        MapSpec::ComponentwiseOdd { profile, mix }
    } else {
        MapSpec::Radial { profile, mix }
    }
}

fn try_generate(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Result<Instance> {
    let dim = cfg.dim;
    match cfg.mode {
        Mode::Hilbert => {
            let spec = NormSpec::L2;
            let a = gaussian_hermitian(rng, dim);
            let b = gaussian_hermitian(rng, dim);
            let x = point_with_norm(rng, dim, spec, 1.0);
            let m = sample_cloud(rng, dim, spec, 1.0, &x, cfg.cloud_size);
            let n = sample_cloud(rng, dim, spec, 1.0, &x, cfg.cloud_size);
            Ok(Instance {
                mode: cfg.mode,
                dim,
                norm: spec,
                m,
                n,
                a: MapSpec::linear(a),
                b: MapSpec::linear(b),
                f: FunctionalSpec::linear(x.clone()),
                x,
            })
        }
        Mode::BanachLinear | Mode::BanachNonlinear => {
            let spec = cfg.p;
            let linear = cfg.mode == Mode::BanachLinear;
            let radius = if linear { 1.0 } else { 1.5 };
            let (a, b) = if linear {
                let s = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
                (MapSpec::linear(gaussian_matrix(rng, dim).scale(s)), MapSpec::linear(gaussian_matrix(rng, dim).scale(s)))
            } else {
                (random_nonlinear_map(rng, dim), random_nonlinear_map(rng, dim))
            };
            let x = point_with_norm(rng, dim, spec, 0.5);
            let w = gaussian_vector(rng, dim);
            let raw = if linear || rng.gen_bool(0.5) {
                FunctionalSpec::linear(w.clone())
            } else {
                FunctionalSpec::post_composed(w.clone(), random_profile(rng))
            };
            // conditioning of the pairing itself, before any profile
            let pairing = crate::space::inner(&x, &w)?;
            if pairing.norm() < GEN_CONDITIONING * dual_norm(&w, spec) * norm(&x, spec) {
                return Err(Error::NotNormalizable { value: pairing.norm() });
            }
            let f = normalize_functional(&raw, &x)?;
            let m = sample_cloud(rng, dim, spec, radius, &x, cfg.cloud_size);
            let n = sample_cloud(rng, dim, spec, radius, &x, cfg.cloud_size);
            Ok(Instance { mode: cfg.mode, dim, norm: spec, m, n, a, b, x, f })
        }
    }
}

/// Deterministic instance for `(seed, cfg)`; degenerate normalizations are redrawn from derived sub-seeds.
pub fn generate_instance(seed: u64, cfg: &GenConfig) -> Result<Instance> {
    if cfg.dim < 2 {
        return Err(Error::InvalidConfig(format!("dim must be >= 2, got {}", cfg.dim)));
    }
    if cfg.cloud_size < 2 {
        return Err(Error::InvalidConfig(format!("cloud_size must be >= 2, got {}", cfg.cloud_size)));
    }
    for attempt in 0..MAX_GEN_ATTEMPTS {
        let sub = if attempt == 0 { seed } else { derive_seed(seed, u64::MAX - attempt) };
        let mut rng = ChaCha8Rng::seed_from_u64(sub);
        match try_generate(&mut rng, cfg) {
            Ok(inst) => match inst.validate() {
                Ok(()) => return Ok(inst),
                Err(Error::InvalidInstance(_)) => continue,
                Err(e) => return Err(e),
            },
            Err(Error::NotNormalizable { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::GenerationFailed { attempts: MAX_GEN_ATTEMPTS })
}
