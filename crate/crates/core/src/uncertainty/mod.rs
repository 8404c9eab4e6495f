//! The two uncertainties of a map, the commutator forms and every inequality
//! chain built from them.
//!
//! For `A` on a domain `M`, `x` and `f` with `f(x) = 1`:
//!
//! - `delta(A, x, f) = ||Ax - f(Ax) x||`
//! - `nabla(f, A, x) = ||g||_Lip0` with `g(u) = f(Au) - f(Ax) f(u)`
//!
//! `nabla` is exact (dual norm of `A^dagger w - conj(f(Ax)) w`) when `f` and
//! `A` are both linear. Otherwise it is the supremum of the difference
//! quotient over the cloud of `M`, which is a lower bound of the supremum over
//! the ball, and every chain that uses it is marked empirical.

mod chain;
mod hilbert;
mod nhrs;

pub use chain::{ChainReport, Slack, Status, Term, Tolerance};
pub use hilbert::{
    delta_hilbert, delta_hilbert_sqrt, expectation, hilbert_reduction_check, reduction_chain, robertson_chain,
    schrodinger_bound, schrodinger_chains, HilbertReduction, SchrodingerForms,
};
pub use nhrs::{chain_nhrs, corollary_anticommutator, corollary_commutator, nhrs_family};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::lipnorm::{lip_linear_composite_exact, lip_refine, lip_sampled, Image, LipEstimate};
use crate::model::{eval_functional, eval_map, DomainSpec, FunctionalSpec, MapSpec};
use crate::space::{norm, NormSpec, Vector};
use crate::{Error, Result};

/// Sampling effort for estimated Lipschitz norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainOptions {
    pub tol: Tolerance,
    pub refine_budget: usize,
    pub seed: u64,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self { tol: Tolerance::CHAIN, refine_budget: 2000, seed: 0 }
    }
}

/// Domains of `A` (`m`) and `B` (`n`). Linear maps are defined everywhere and
/// are never checked against them.
#[derive(Clone, Copy, Debug)]
pub struct Domains<'a> {
    pub m: &'a DomainSpec,
    pub n: &'a DomainSpec,
}

fn ensure_in(domain: Option<&DomainSpec>, map: &MapSpec, point: &Vector, what: &str, spec: NormSpec) -> Result<()> {
    match domain {
        Some(d) if !map.is_linear() && !d.contains(point, spec) => {
            Err(Error::DomainEscape { point: what.to_string(), norm: norm(point, spec), radius: d.radius })
        }
        _ => Ok(()),
    }
}

/// `Bx - f(Bx) x`.
pub fn deviation(b: &MapSpec, x: &Vector, f: &FunctionalSpec, spec: NormSpec) -> Result<Vector> {
    let bx = eval_map(b, x, spec)?;
    let fbx = eval_functional(f, &bx)?;
    Ok(bx.sub_scaled(fbx, x))
}

/// `||Bx - f(Bx) x||`.
pub fn delta(b: &MapSpec, x: &Vector, f: &FunctionalSpec, spec: NormSpec) -> Result<f64> {
    Ok(norm(&deviation(b, x, f, spec)?, spec))
}

/// `g(u) = f(Au) - c f(u)` with `c = f(Ax)`.
fn composite<'a>(f: &'a FunctionalSpec, a: &'a MapSpec, c: Complex64, spec: NormSpec) -> impl Fn(&Vector) -> Image + 'a {
    move |u: &Vector| {
        let au = eval_map(a, u, spec).expect("cloud points share the map's dimension");
        let fau = eval_functional(f, &au).expect("same dimension");
        let fu = eval_functional(f, u).expect("same dimension");
        Image::Scalar(fau - c * fu)
    }
}

/// `||f∘A - f(Ax) f||_Lip0` over `M`.
///
/// Non-linear cases scan `M`'s cloud augmented with `0`, `x` and `extra`,
/// then refine inside `M`'s ball.
pub fn nabla(
    f: &FunctionalSpec,
    a: &MapSpec,
    x: &Vector,
    m: &DomainSpec,
    spec: NormSpec,
    extra: &[Vector],
    opts: &ChainOptions,
) -> Result<LipEstimate> {
    let c = eval_functional(f, &eval_map(a, x, spec)?)?;
    if f.is_linear() && a.is_linear() {
        return lip_linear_composite_exact(f, a, c, spec);
    }
    let mut cloud = Vec::with_capacity(m.cloud.len() + 2 + extra.len());
    cloud.push(Vector::zeros(x.dim()));
    cloud.push(x.clone());
    cloud.extend(extra.iter().cloned());
    cloud.extend(m.cloud.iter().cloned());
    let g = composite(f, a, c, spec);
    let start = lip_sampled(&g, &cloud, spec)?;
    Ok(lip_refine(&g, &start, spec, m, opts.refine_budget, opts.seed))
}

/// `||f∘B||_Lip0` over `N`: exact for linear `f` and `B`, sampled otherwise.
pub fn lip_functional_after_map(
    f: &FunctionalSpec,
    b: &MapSpec,
    n: &DomainSpec,
    spec: NormSpec,
    opts: &ChainOptions,
) -> Result<LipEstimate> {
    let zero = Complex64::new(0.0, 0.0);
    if f.is_linear() && b.is_linear() {
        return lip_linear_composite_exact(f, b, zero, spec);
    }
    let mut cloud = vec![Vector::zeros(b.dim())];
    cloud.extend(n.cloud.iter().cloned());
    let g = composite(f, b, zero, spec);
    let start = lip_sampled(&g, &cloud, spec)?;
    Ok(lip_refine(&g, &start, spec, n, opts.refine_budget, opts.seed ^ 0x5DEE_CE66))
}

/// `(A(Bx), B(Ax))`, checking that `Bx` stays in `M` and `Ax` in `N`.
pub fn cross_products(a: &MapSpec, b: &MapSpec, x: &Vector, spec: NormSpec, domains: Option<Domains>) -> Result<(Vector, Vector)> {
    let bx = eval_map(b, x, spec)?;
    let ax = eval_map(a, x, spec)?;
    ensure_in(domains.map(|d| d.m), a, &bx, "Bx", spec)?;
    ensure_in(domains.map(|d| d.n), b, &ax, "Ax", spec)?;
    Ok((eval_map(a, &bx, spec)?, eval_map(b, &ax, spec)?))
}

/// `[A, B] x = A(Bx) - B(Ax)`.
pub fn commutator_apply(a: &MapSpec, b: &MapSpec, x: &Vector, spec: NormSpec, domains: Option<Domains>) -> Result<Vector> {
    let (abx, bax) = cross_products(a, b, x, spec, domains)?;
    Ok(abx.sub(&bax))
}

/// `{A, B} x = A(Bx) + B(Ax)`.
pub fn anticommutator_apply(a: &MapSpec, b: &MapSpec, x: &Vector, spec: NormSpec, domains: Option<Domains>) -> Result<Vector> {
    let (abx, bax) = cross_products(a, b, x, spec, domains)?;
    Ok(abx.add(&bax))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MiddleForm {
    /// `|g(y)|`
    pub value: f64,
    /// `y = Bx - f(Bx) x`
    pub y: Vector,
    pub g_y: Complex64,
}

/// `g = f∘A - f(Ax) f` evaluated at `y = Bx - f(Bx) x`.
pub fn middle_form(
    f: &FunctionalSpec,
    a: &MapSpec,
    x: &Vector,
    b: &MapSpec,
    spec: NormSpec,
    m: Option<&DomainSpec>,
) -> Result<MiddleForm> {
    let y = deviation(b, x, f, spec)?;
    ensure_in(m, a, &y, "y = Bx - f(Bx)x", spec)?;
    let c = eval_functional(f, &eval_map(a, x, spec)?)?;
    let Image::Scalar(g_y) = composite(f, a, c, spec)(&y) else { unreachable!() };
    Ok(MiddleForm { value: g_y.norm(), y, g_y })
}
