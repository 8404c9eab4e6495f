//! Hermitian matrices on `(C^n, l_2)`: `delta_h(A) = ||Ah - <Ah,h> h||`, the
//! Robertson and Schrödinger chains, and the identity
//! `nabla(<., h>, A, h) = delta_h(A)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::chain::{mean_terms, ChainBuilder, ChainReport, Tolerance};
use crate::lipnorm::lip_linear_composite_exact;
use crate::model::{FunctionalSpec, MapSpec};
use crate::space::{check_dims, inner, norm, Matrix, NormSpec, Vector, DEFAULT_TOL};
use crate::{Error, Result};

fn check_hermitian(a: &Matrix) -> Result<()> {
    let defect = a.hermitian_defect();
    if defect > DEFAULT_TOL * a.max_abs().max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

fn check_unit(h: &Vector) -> Result<()> {
    let n = norm(h, NormSpec::L2);
    if (n - 1.0).abs() > DEFAULT_TOL {
        return Err(Error::NotUnit(n));
    }
    Ok(())
}

fn check_state(a: &Matrix, h: &Vector) -> Result<()> {
    check_dims(a.dim(), h.dim())?;
    check_hermitian(a)?;
    check_unit(h)
}

/// `<Ah, h>` for Hermitian `A`. Imaginary parts up to `1e-12` are dropped;
/// larger ones mean `A` was not Hermitian.
pub fn expectation(a: &Matrix, h: &Vector) -> Result<f64> {
    let e = inner(&a.apply(h)?, h)?;
    if e.im.abs() > DEFAULT_TOL {
        return Err(Error::ExpectationNotReal(e.im));
    }
    Ok(e.re)
}

/// `||Ah - <Ah,h> h||_2`.
pub fn delta_hilbert(a: &Matrix, h: &Vector) -> Result<f64> {
    check_state(a, h)?;
    let ah = a.apply(h)?;
    let e = inner(&ah, h)?;
    Ok(norm(&ah.sub_scaled(e, h), NormSpec::L2))
}

/// `sqrt(||Ah||^2 - <Ah,h>^2)`, the variance form.
pub fn delta_hilbert_sqrt(a: &Matrix, h: &Vector) -> Result<f64> {
    check_state(a, h)?;
    let e = expectation(a, h)?;
    let ah = norm(&a.apply(h)?, NormSpec::L2);
    Ok((ah * ah - e * e).max(0.0).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HilbertReduction {
    pub nabla: f64,
    pub delta: f64,
    pub discrepancy: f64,
}

/// `nabla(f, A, h)` for `f = <., h>`, computed as the dual norm of
/// `u -> <Au, h> - <Ah, h><u, h>`, against `delta_h(A)`.
pub fn hilbert_reduction_check(a: &Matrix, h: &Vector) -> Result<HilbertReduction> {
    check_state(a, h)?;
    let f = FunctionalSpec::linear(h.clone());
    let c = inner(&a.apply(h)?, h)?;
    let nabla = lip_linear_composite_exact(&f, &MapSpec::linear(a.clone()), c, NormSpec::L2)?.lower;
    let delta = delta_hilbert(a, h)?;
    Ok(HilbertReduction { nabla, delta, discrepancy: (nabla - delta).abs() })
}

/// Two-sided comparison of `nabla` and `delta_h` at identity tolerance.
pub fn reduction_chain(a: &Matrix, h: &Vector, tol: Tolerance) -> Result<ChainReport> {
    let r = hilbert_reduction_check(a, h)?;
    let mut b = ChainBuilder::new("hilbert_reduction");
    b.term("nabla", r.nabla)
        .term("delta_h", r.delta)
        .link("nabla", "delta_h", true)
        .link("delta_h", "nabla", true);
    Ok(b.finish(tol))
}

/// `(D_A^2 + D_B^2)/2 >= (D_A + D_B)^2/4 >= D_A D_B >= |<[A,B]h, h>| / 2`.
pub fn robertson_chain(a: &Matrix, b: &Matrix, h: &Vector, tol: Tolerance) -> Result<ChainReport> {
    check_state(b, h)?;
    let da = delta_hilbert(a, h)?;
    let db = delta_hilbert(b, h)?;
    let comm = a.mul(b).sub(&b.mul(a));
    let bound = 0.5 * inner(&comm.apply(h)?, h)?.norm();
    let mut c = ChainBuilder::new("robertson");
    c.term("delta_a", da).term("delta_b", db);
    mean_terms(&mut c, da, db);
    c.term("robertson_bound", bound).link("product", "robertson_bound", true);
    Ok(c.finish(tol))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchrodingerForms {
    /// `|<Ah, Bh> - <Ah,h><Bh,h>|`
    pub covariance_form: f64,
    /// `sqrt(|<[A,B]h,h>|^2 + |<{A,B}h,h> - 2<Ah,h><Bh,h>|^2) / 2`
    pub identity_form: f64,
    /// `delta_h(A) delta_h(B)`
    pub product: f64,
}

pub fn schrodinger_bound(a: &Matrix, b: &Matrix, h: &Vector) -> Result<SchrodingerForms> {
    check_state(b, h)?;
    let ea = expectation(a, h)?;
    let eb = expectation(b, h)?;
    let ah = a.apply(h)?;
    let bh = b.apply(h)?;
    let covariance_form = (inner(&ah, &bh)? - Complex64::new(ea * eb, 0.0)).norm();
    let ab = a.mul(b);
    let ba = b.mul(a);
    let comm = inner(&ab.sub(&ba).apply(h)?, h)?.norm();
    let anti = (inner(&ab.add(&ba).apply(h)?, h)? - Complex64::new(2.0 * ea * eb, 0.0)).norm();
    let identity_form = 0.5 * comm.hypot(anti);
    let product = delta_hilbert(a, h)? * delta_hilbert(b, h)?;
    Ok(SchrodingerForms { covariance_form, identity_form, product })
}

/// The inequality `D_A D_B >= covariance form` (chain tolerance) and the
/// identity between the two right-hand forms (identity tolerance).
pub fn schrodinger_chains(a: &Matrix, b: &Matrix, h: &Vector, tol: Tolerance, identity_tol: Tolerance) -> Result<(ChainReport, ChainReport)> {
    let s = schrodinger_bound(a, b, h)?;
    let mut ineq = ChainBuilder::new("schrodinger");
    ineq.term("product", s.product)
        .term("covariance_form", s.covariance_form)
        .term("identity_form", s.identity_form)
        .link("product", "covariance_form", true)
        .link("product", "identity_form", true);
    let mut ident = ChainBuilder::new("schrodinger_identity");
    ident
        .term("covariance_form", s.covariance_form)
        .term("identity_form", s.identity_form)
        .link("covariance_form", "identity_form", true)
        .link("identity_form", "covariance_form", true);
    Ok((ineq.finish(tol), ident.finish(identity_tol)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uncertainty::Status;

    fn plus() -> Vector {
        Vector::from_real(&[std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2]).unwrap()
    }

    #[test]
    fn delta_hilbert_examples() {
        let e1 = Vector::basis(2, 0);
        assert_eq!(delta_hilbert(&Matrix::identity(2), &e1).unwrap(), 0.0);
        assert_eq!(delta_hilbert(&Matrix::pauli_x(), &e1).unwrap(), 1.0);
        let d = delta_hilbert(&Matrix::pauli_z(), &plus()).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
        assert!((delta_hilbert_sqrt(&Matrix::pauli_z(), &plus()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let e1 = Vector::basis(2, 0);
        let shear = Matrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(delta_hilbert(&shear, &e1), Err(Error::NotHermitian(_))));
        assert!(matches!(delta_hilbert(&Matrix::pauli_x(), &e1.scale_real(2.0)), Err(Error::NotUnit(_))));
        assert!(matches!(hilbert_reduction_check(&shear, &e1), Err(Error::NotHermitian(_))));
        assert!(delta_hilbert(&Matrix::pauli_x(), &Vector::basis(3, 0)).is_err());
    }

    #[test]
    fn reduction_examples() {
        let e1 = Vector::basis(2, 0);
        let r = hilbert_reduction_check(&Matrix::identity(2), &e1).unwrap();
        assert_eq!((r.nabla, r.delta, r.discrepancy), (0.0, 0.0, 0.0));
        let r = hilbert_reduction_check(&Matrix::pauli_x(), &e1).unwrap();
        assert_eq!((r.nabla, r.delta, r.discrepancy), (1.0, 1.0, 0.0));
    }

    #[test]
    fn robertson_pauli_equality_and_self_pair() {
        let e1 = Vector::basis(2, 0);
        let r = robertson_chain(&Matrix::pauli_x(), &Matrix::pauli_y(), &e1, Tolerance::CHAIN).unwrap();
        for t in &r.terms {
            assert!((t.value - 1.0).abs() < 1e-12, "{} = {}", t.name, t.value);
        }
        assert_eq!(r.status(), Status::Passed);

        let a = Matrix::from_real_rows(&[&[1.0, 0.5], &[0.5, -2.0]]).unwrap();
        let h = plus();
        let r = robertson_chain(&a, &a, &h, Tolerance::CHAIN).unwrap();
        assert_eq!(r.term("robertson_bound"), Some(0.0));
        let d = delta_hilbert(&a, &h).unwrap();
        assert!((r.slack("product>=robertson_bound").unwrap().value - d * d).abs() < 1e-15);
    }

    #[test]
    fn schrodinger_examples() {
        let e1 = Vector::basis(2, 0);
        let s = schrodinger_bound(&Matrix::pauli_x(), &Matrix::pauli_y(), &e1).unwrap();
        assert_eq!((s.covariance_form, s.identity_form, s.product), (1.0, 1.0, 1.0));

        let a = Matrix::from_real_rows(&[&[1.0, 0.5], &[0.5, -2.0]]).unwrap();
        let h = plus();
        let s = schrodinger_bound(&a, &a, &h).unwrap();
        let d = delta_hilbert(&a, &h).unwrap();
        assert!((s.covariance_form - d * d).abs() < 1e-14);
        assert!((s.product - d * d).abs() < 1e-14);
    }
}
