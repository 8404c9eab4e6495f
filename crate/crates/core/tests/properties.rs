use lipuncert::model::{eval_functional, FunctionalSpec, MapSpec};
use lipuncert::space::{dual_exponent, dual_norm, inner, norm, Matrix, NormSpec, Vector};
use lipuncert::uncertainty::{delta, deviation};
use lipuncert::Complex64;
use proptest::prelude::*;

const DIM: usize = 3;

fn complex() -> impl Strategy<Value = Complex64> {
    (-10.0f64..10.0, -10.0f64..10.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn vector() -> impl Strategy<Value = Vector> {
    prop::collection::vec(complex(), DIM).prop_map(|v| Vector::new(v).unwrap())
}

fn matrix() -> impl Strategy<Value = Matrix> {
    prop::collection::vec(prop::collection::vec(complex(), DIM), DIM).prop_map(|rows| Matrix::from_rows(rows).unwrap())
}

fn exponent() -> impl Strategy<Value = NormSpec> {
    prop_oneof![
        Just(NormSpec::L1),
        Just(NormSpec::L2),
        Just(NormSpec::LINF),
        (1.0f64..8.0).prop_map(|p| NormSpec::new(p).unwrap()),
    ]
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

/// A functional with `f(x) = 1`, when `x` admits one.
fn normalizer(x: &Vector) -> Option<FunctionalSpec> {
    let nx = inner(x, x).unwrap().re;
    (nx > 1e-6).then(|| FunctionalSpec::linear(x.scale_real(1.0 / nx)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn norm_axioms(u in vector(), v in vector(), c in complex(), spec in exponent()) {
        let nu = norm(&u, spec);
        prop_assert!(nu >= 0.0);
        prop_assert_eq!(nu == 0.0, u.is_zero());
        prop_assert!(norm(&u.add(&v), spec) <= nu + norm(&v, spec) + 1e-12 * (1.0 + nu));
        prop_assert!(close(norm(&u.scale(c), spec), c.norm() * nu, 1e-12));
    }

    #[test]
    fn holder_inequality(u in vector(), w in vector(), spec in exponent()) {
        let pairing = inner(&u, &w).unwrap().norm();
        let bound = norm(&u, spec) * norm(&w, dual_exponent(spec));
        prop_assert!(pairing <= bound * (1.0 + 1e-12) + 1e-12);
        prop_assert_eq!(dual_norm(&w, spec), norm(&w, spec.dual()));
    }

    #[test]
    fn p2_norm_matches_inner_product(u in vector()) {
        let n = norm(&u, NormSpec::L2);
        prop_assert!(close(n * n, inner(&u, &u).unwrap().re, 1e-12));
    }

    #[test]
    fn norms_decrease_in_p(u in vector(), p in 1.0f64..6.0, dp in 0.0f64..4.0) {
        let small = norm(&u, NormSpec::new(p + dp).unwrap());
        prop_assert!(small <= norm(&u, NormSpec::new(p).unwrap()) * (1.0 + 1e-12));
        prop_assert!(norm(&u, NormSpec::LINF) <= small * (1.0 + 1e-12));
    }

    #[test]
    fn mean_inequalities(a in 0.0f64..1e3, b in 0.0f64..1e3) {
        let half_sum_squares = 0.5 * (a * a + b * b);
        let quarter_square_sum = 0.25 * (a + b) * (a + b);
        let tol = 1e-12 * half_sum_squares;
        prop_assert!(half_sum_squares >= quarter_square_sum - tol);
        prop_assert!(quarter_square_sum >= a * b - tol);
    }

    #[test]
    fn deviation_is_annihilated_by_f(x in vector(), b in matrix(), spec in exponent()) {
        let Some(f) = normalizer(&x) else { return Ok(()) };
        let y = deviation(&MapSpec::linear(b.clone()), &x, &f, spec).unwrap();
        let scale = 1.0 + b.max_abs() * norm(&x, NormSpec::L1) * norm(&x, NormSpec::LINF);
        prop_assert!(eval_functional(&f, &y).unwrap().norm() <= 1e-10 * scale);
    }

    #[test]
    fn delta_is_shift_invariant(x in vector(), b in matrix(), s in complex(), spec in exponent()) {
        // B + sI changes Bx by s x and f(Bx) by s, leaving the deviation unchanged
        let Some(f) = normalizer(&x) else { return Ok(()) };
        let shifted = b.add(&Matrix::identity(DIM).scale(s));
        let d0 = delta(&MapSpec::linear(b), &x, &f, spec).unwrap();
        let d1 = delta(&MapSpec::linear(shifted), &x, &f, spec).unwrap();
        prop_assert!((d0 - d1).abs() <= 1e-9 * (1.0 + s.norm() * norm(&x, spec) + d0));
    }

    #[test]
    fn delta_is_homogeneous_in_the_map(x in vector(), b in matrix(), t in -5.0f64..5.0, spec in exponent()) {
        let Some(f) = normalizer(&x) else { return Ok(()) };
        let d = delta(&MapSpec::linear(b.clone()), &x, &f, spec).unwrap();
        let dt = delta(&MapSpec::linear(b.scale(Complex64::new(t, 0.0))), &x, &f, spec).unwrap();
        prop_assert!(close(dt, t.abs() * d, 1e-10));
    }

    #[test]
    fn sign_symmetry(x in vector(), a in matrix(), spec in exponent()) {
        // ||Ax + f(Ax)x|| computed both as delta(A, x, -f) and delta(A, -x, f)
        let Some(f) = normalizer(&x) else { return Ok(()) };
        let a = MapSpec::linear(a);
        let minus_f = f.scaled(Complex64::new(-1.0, 0.0));
        let d_neg_f = delta(&a, &x, &minus_f, spec).unwrap();
        let d_neg_x = delta(&a, &x.neg(), &f, spec).unwrap();
        prop_assert!(close(d_neg_f, d_neg_x, 1e-12));
    }
}
