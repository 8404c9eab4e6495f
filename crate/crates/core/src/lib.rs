//! Uncertainty quantities for Lipschitz maps on finite-dimensional complex
//! `l_p` spaces.
//!
//! For a Lipschitz map `A` with `A(0) = 0`, a point `x` and a Lipschitz
//! functional `f` with `f(0) = 0` and `f(x) = 1`, the crate computes
//!
//! - `delta(A, x, f) = ||Ax - f(Ax) x||`
//! - `nabla(f, A, x) = ||f∘A - f(Ax) f||_Lip0`
//!
//! and checks the inequality chain
//!
//! ```text
//! (nabla^2 + delta^2) / 2 >= (nabla + delta)^2 / 4 >= nabla * delta >= |f(ABx) - f(Ax) f(Bx)|
//! ```
//!
//! together with its commutator and anticommutator corollaries, the classical
//! Robertson and Schrödinger chains for Hermitian matrices, and the identity
//! `nabla(<., h>, A, h) = ||Ah - <Ah, h> h||` on Hilbert space.
//!
//! Modules:
//!
//! - [`space`]: vectors, `l_p` norms, Hölder duals, the `p = 2` inner product.
//! - [`model`]: catalog maps, functionals, sampled domains, seeded instances.
//! - [`lipnorm`]: exact and sampled Lipschitz norms.
//! - [`uncertainty`]: the uncertainty quantities and every inequality chain.
//! - [`harness`]: seeded campaigns, counterexample search, report files.
//! - [`cli`]: the `lipuncert` command line.

pub mod cli;
pub mod harness;
pub mod lipnorm;
pub mod model;
pub mod space;
pub mod uncertainty;

pub use lipnorm::{LipEstimate, LipMethod};
pub use model::{DomainSpec, FunctionalSpec, GenConfig, Instance, MapSpec, Mode, ScalarProfile};
pub use space::{Matrix, NormSpec, Vector};
pub use uncertainty::{ChainReport, Tolerance};

pub use num_complex::Complex64;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid vector: {0}")]
    InvalidVector(String),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("norm exponent must lie in [1, inf], got {0}")]
    InvalidExponent(f64),
    #[error("cannot parse norm exponent {0:?}")]
    InvalidExponentText(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("functional is not normalizable at x: |f(x)| = {value:e}")]
    NotNormalizable { value: f64 },
    #[error("instance generation failed after {attempts} attempts")]
    GenerationFailed { attempts: u64 },
    #[error("no closed-form operator norm for p = {0}")]
    UnsupportedExponent(NormSpec),
    #[error("every sample pair is degenerate")]
    EmptySample,
    #[error("{point} leaves the domain ball (norm {norm:e} > radius {radius:e})")]
    DomainEscape { point: String, norm: f64, radius: f64 },
    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("state is not a unit vector (norm {0})")]
    NotUnit(f64),
    #[error("expectation has imaginary part {0:e}")]
    ExpectationNotReal(f64),
    #[error("{0} requires a linear argument")]
    NotLinear(&'static str),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("malformed report: {0}")]
    MalformedReport(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
