use num_complex::Complex64;

use super::chain::{mean_terms, ChainBuilder, ChainReport};
use super::{
    anticommutator_apply, commutator_apply, delta, lip_functional_after_map, middle_form, nabla, ChainOptions, Domains,
    MiddleForm,
};
use crate::lipnorm::LipEstimate;
use crate::model::{eval_functional, eval_map, Instance};
use crate::space::norm;
use crate::{Error, Result};

fn estimate_note(name: &str, est: &LipEstimate) -> Option<String> {
    (!est.is_exact()).then(|| {
        format!("{name} is a sampled lower bound over the domain cloud and ball ({:?})", est.method)
    })
}

fn final_bound(inst: &Instance) -> Result<f64> {
    let spec = inst.norm;
    let ax = eval_map(&inst.a, &inst.x, spec)?;
    let bx = eval_map(&inst.b, &inst.x, spec)?;
    if !inst.a.is_linear() && !inst.m.contains(&bx, spec) {
        return Err(Error::DomainEscape { point: "Bx".into(), norm: norm(&bx, spec), radius: inst.m.radius });
    }
    let abx = eval_map(&inst.a, &bx, spec)?;
    let f = |v| eval_functional(&inst.f, v);
    Ok((f(&abx)? - f(&ax)? * f(&bx)?).norm())
}

/// Quantities shared by the chain and both corollaries.
struct Shared {
    mid: MiddleForm,
    delta_b: f64,
    nabla: LipEstimate,
}

impl Shared {
    fn compute(inst: &Instance, opts: &ChainOptions) -> Result<Self> {
        let spec = inst.norm;
        let mid = middle_form(&inst.f, &inst.a, &inst.x, &inst.b, spec, Some(&inst.m))?;
        let delta_b = norm(&mid.y, spec);
        let nabla = nabla(&inst.f, &inst.a, &inst.x, &inst.m, spec, std::slice::from_ref(&mid.y), opts)?;
        Ok(Self { mid, delta_b, nabla })
    }
}

/// `(nabla^2 + delta^2)/2 >= (nabla + delta)^2/4 >= nabla delta >= |f(ABx) - f(Ax) f(Bx)|`
/// with `nabla = nabla(f, A, x)` and `delta = delta(B, x, f)`.
///
/// The evaluation `|g(y)|`, `y = Bx - f(Bx) x`, is reported as `middle_form`;
/// `y` is always part of the sampling cloud, so `product >= middle_form` holds
/// for estimated `nabla` too. The step from `g(y)` to `f(ABx) - f(Ax) f(Bx)`
/// needs `f` and `A` linear; otherwise the last link is empirical.
pub fn chain_nhrs(inst: &Instance, opts: &ChainOptions) -> Result<ChainReport> {
    nhrs_from(inst, opts, &Shared::compute(inst, opts)?)
}

/// `nabla(f,A,x) delta(B,x,f) + ||f B||_Lip0 delta(A,x,f) >= |f([A,B] x)|`.
pub fn corollary_commutator(inst: &Instance, opts: &ChainOptions) -> Result<ChainReport> {
    let shared = Shared::compute(inst, opts)?;
    let lip_fb = lip_functional_after_map(&inst.f, &inst.b, &inst.n, inst.norm, opts)?;
    corollary(inst, opts, &shared, &lip_fb, false)
}

/// `nabla(f,A,x) delta(B,x,f) + ||f B||_Lip0 delta(A,x,-f) >= |f({A,B} x)|`,
/// where `delta(A,x,-f) = ||Ax + f(Ax) x||`.
pub fn corollary_anticommutator(inst: &Instance, opts: &ChainOptions) -> Result<ChainReport> {
    let shared = Shared::compute(inst, opts)?;
    let lip_fb = lip_functional_after_map(&inst.f, &inst.b, &inst.n, inst.norm, opts)?;
    corollary(inst, opts, &shared, &lip_fb, true)
}

/// The chain and both corollaries, estimating each Lipschitz norm once.
/// Identical to calling the three functions separately.
pub fn nhrs_family(inst: &Instance, opts: &ChainOptions) -> Result<[ChainReport; 3]> {
    let shared = Shared::compute(inst, opts)?;
    let lip_fb = lip_functional_after_map(&inst.f, &inst.b, &inst.n, inst.norm, opts)?;
    Ok([
        nhrs_from(inst, opts, &shared)?,
        corollary(inst, opts, &shared, &lip_fb, false)?,
        corollary(inst, opts, &shared, &lip_fb, true)?,
    ])
}

fn nhrs_from(inst: &Instance, opts: &ChainOptions, shared: &Shared) -> Result<ChainReport> {
    let fin = final_bound(inst)?;
    let closed_form = inst.f.is_linear() && inst.a.is_linear();
    let nab = &shared.nabla;

    let mut c = ChainBuilder::new("nhrs");
    c.term("nabla", nab.value()).term("delta", shared.delta_b);
    mean_terms(&mut c, nab.value(), shared.delta_b);
    c.term("middle_form", shared.mid.value)
        .term("final_bound", fin)
        .link("product", "middle_form", true)
        .link("product", "final_bound", closed_form);
    if let Some(n) = estimate_note("nabla", nab) {
        c.note(n);
    }
    if !closed_form {
        c.note("final_bound equals middle_form only for linear f and A; last link is empirical");
    }
    Ok(c.finish(opts.tol))
}

fn corollary(inst: &Instance, opts: &ChainOptions, shared: &Shared, lip_fb: &LipEstimate, anti: bool) -> Result<ChainReport> {
    let spec = inst.norm;
    let doms = Domains { m: &inst.m, n: &inst.n };
    let nab = &shared.nabla;
    let delta_b = shared.delta_b;
    let exact = inst.is_linear();

    let mut c = ChainBuilder::new(if anti { "anticommutator" } else { "commutator" });
    c.term("nabla", nab.value()).term("delta_b", delta_b).term("lip_fb", lip_fb.value());
    let (delta_a, rhs) = if anti {
        let minus_f = inst.f.scaled(Complex64::new(-1.0, 0.0));
        let delta_a = delta(&inst.a, &inst.x, &minus_f, spec)?;
        let delta_neg_x = delta(&inst.a, &inst.x.neg(), &inst.f, spec)?;
        c.term("delta_a_neg_f", delta_a)
            .term("delta_a_neg_x", delta_neg_x)
            .term("sign_symmetry_gap", (delta_a - delta_neg_x).abs());
        let v = anticommutator_apply(&inst.a, &inst.b, &inst.x, spec, Some(doms))?;
        (delta_a, eval_functional(&inst.f, &v)?.norm())
    } else {
        let delta_a = delta(&inst.a, &inst.x, &inst.f, spec)?;
        c.term("delta_a", delta_a);
        let v = commutator_apply(&inst.a, &inst.b, &inst.x, spec, Some(doms))?;
        (delta_a, eval_functional(&inst.f, &v)?.norm())
    };
    c.term("lhs", nab.value() * delta_b + lip_fb.value() * delta_a)
        .term("rhs", rhs)
        .link("lhs", "rhs", exact);
    for (name, est) in [("nabla", nab), ("lip_fb", lip_fb)] {
        if let Some(n) = estimate_note(name, est) {
            c.note(n);
        }
    }
    if !exact {
        c.note("corollary uses linearity of f, A and B; slack is empirical");
    }
    Ok(c.finish(opts.tol))
}
