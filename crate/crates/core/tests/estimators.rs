use lipuncert::lipnorm::{lip_exact_linear_map, lip_refine, lip_sampled, spectral_norm, Image, LipMethod};
use lipuncert::model::{
    eval_functional, eval_map, gaussian_matrix, gaussian_vector, generate_instance, sample_in_ball, DomainSpec,
    FunctionalSpec, GenConfig, Mode, ScalarProfile,
};
use lipuncert::space::{dual_norm, norm, Matrix, NormSpec, Vector};
use lipuncert::uncertainty::{lip_functional_after_map, nabla, ChainOptions};
use lipuncert::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Largest singular value of a 2x2 matrix from the characteristic polynomial of `M^dagger M`.
fn spectral_norm_2x2(m: &Matrix) -> f64 {
    let g = m.adjoint().mul(m);
    let (a, d, b) = (g.get(0, 0).re, g.get(1, 1).re, g.get(0, 1));
    let lambda = 0.5 * (a + d) + (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    lambda.sqrt()
}

fn cloud(rng: &mut ChaCha8Rng, dim: usize, spec: NormSpec, size: usize) -> DomainSpec {
    let mut cloud = vec![Vector::zeros(dim)];
    cloud.extend((1..size).map(|_| sample_in_ball(rng, dim, spec, 1.0)));
    DomainSpec { radius: 1.0, cloud }
}

#[test]
fn power_iteration_matches_closed_form_in_dim_2() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..500 {
        let m = gaussian_matrix(&mut rng, 2);
        let oracle = spectral_norm_2x2(&m);
        let got = spectral_norm(&m);
        assert!((got - oracle).abs() <= 1e-10 * (1.0 + oracle), "{got} vs {oracle}");
    }
    // repeated singular values: the closed form is exact, iteration must not stall
    let rot = Matrix::from_real_rows(&[&[0.6, -0.8], &[0.8, 0.6]]).unwrap();
    assert!((spectral_norm(&rot) - 1.0).abs() < 1e-12);
    assert_eq!(spectral_norm(&Matrix::zeros(2)), 0.0);
}

#[test]
fn exact_operator_norms_dominate_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for spec in [NormSpec::L1, NormSpec::L2, NormSpec::LINF] {
        for _ in 0..50 {
            let m = gaussian_matrix(&mut rng, 3);
            let exact = lip_exact_linear_map(&m, spec).unwrap();
            assert!(exact.is_exact());
            let dom = cloud(&mut rng, 3, spec, 48);
            let g = |u: &Vector| Image::Point(m.apply(u).unwrap());
            let sampled = lip_sampled(g, &dom.cloud, spec).unwrap();
            assert!(sampled.lower <= exact.value() * (1.0 + 1e-12), "{spec}: {} > {}", sampled.lower, exact.value());
            assert_eq!(sampled.method, LipMethod::PairwiseSample);
        }
    }
    assert!(lip_exact_linear_map(&Matrix::identity(2), NormSpec::P(3.0)).is_err());
}

#[test]
fn sampled_functionals_stay_below_dual_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for spec in [NormSpec::L1, NormSpec::P(1.5), NormSpec::L2, NormSpec::P(4.0), NormSpec::LINF] {
        for i in 0..40 {
            let w = gaussian_vector(&mut rng, 3);
            let f = FunctionalSpec::linear(w.clone());
            let dom = cloud(&mut rng, 3, spec, 32);
            let g = |u: &Vector| Image::Scalar(eval_functional(&f, u).unwrap());
            let dual = dual_norm(&w, spec);
            let start = lip_sampled(g, &dom.cloud, spec).unwrap();
            let refined = lip_refine(g, &start, spec, &dom, 500, i);
            assert!(start.lower <= refined.lower);
            assert!(refined.lower <= dual * (1.0 + 1e-9), "{spec}: {} > {dual}", refined.lower);
            let (u, v) = refined.witness.clone().unwrap();
            assert!(dom.contains(&u, spec) && dom.contains(&v, spec));
        }
    }
}

#[test]
fn refinement_is_seeded() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let w = gaussian_vector(&mut rng, 3);
    let f = FunctionalSpec::post_composed(w, ScalarProfile::Polynomial { coeffs: vec![1.0, 0.5] });
    let dom = cloud(&mut rng, 3, NormSpec::L2, 16);
    let g = |u: &Vector| Image::Scalar(eval_functional(&f, u).unwrap());
    let start = lip_sampled(g, &dom.cloud, NormSpec::L2).unwrap();
    let a = lip_refine(g, &start, NormSpec::L2, &dom, 300, 17);
    let b = lip_refine(g, &start, NormSpec::L2, &dom, 300, 17);
    assert_eq!(a, b);
}

#[test]
fn profiles_respect_their_lipschitz_bounds() {
    let profiles = [
        ScalarProfile::tanh(),
        ScalarProfile::ScaledTanh { a: 2.0, c: 0.4 },
        ScalarProfile::Polynomial { coeffs: vec![1.0, -0.3, 0.2] },
        ScalarProfile::Polynomial { coeffs: vec![0.5] },
    ];
    for p in &profiles {
        assert_eq!(p.eval(0.0), 0.0);
        let r = 1.5;
        let bound = p.lipschitz_bound(r);
        let grid: Vec<f64> = (0..=300).map(|k| -r + 2.0 * r * k as f64 / 300.0).collect();
        for w in grid.windows(2) {
            let q = (p.eval(w[1]) - p.eval(w[0])).abs() / (w[1] - w[0]);
            assert!(q <= bound * (1.0 + 1e-12), "{p:?}: {q} > {bound}");
        }
        let z = Complex64::new(0.3, -0.7);
        assert_eq!(p.apply(z), Complex64::new(p.eval(0.3), p.eval(-0.7)));
    }
}

#[test]
fn catalog_functionals_respect_their_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for spec in [NormSpec::L1, NormSpec::L2, NormSpec::LINF] {
        for _ in 0..20 {
            let w = gaussian_vector(&mut rng, 3);
            let f = FunctionalSpec::post_composed(w, ScalarProfile::Polynomial { coeffs: vec![1.0, 0.4, -0.2] });
            let dom = cloud(&mut rng, 3, spec, 40);
            let g = |u: &Vector| Image::Scalar(eval_functional(&f, u).unwrap());
            let est = lip_sampled(g, &dom.cloud, spec).unwrap();
            assert!(est.lower <= f.lipschitz_bound(1.0, spec) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn generated_maps_fix_the_origin_and_are_lipschitz_on_the_cloud() {
    for seed in 0..50 {
        let cfg = GenConfig::new(Mode::BanachNonlinear, 3, NormSpec::P(1.5));
        let inst = generate_instance(seed, &cfg).unwrap();
        for map in [&inst.a, &inst.b] {
            assert!(eval_map(map, &Vector::zeros(3), inst.norm).unwrap().is_zero());
            let g = |u: &Vector| Image::Point(eval_map(map, u, inst.norm).unwrap());
            let est = lip_sampled(g, &inst.m.cloud, inst.norm).unwrap();
            assert!(est.lower.is_finite() && est.lower < 1e3);
        }
    }
}

#[test]
fn nabla_estimate_is_below_exact_for_linear_instances() {
    for seed in 0..30 {
        let cfg = GenConfig::new(Mode::BanachLinear, 3, NormSpec::P(3.0));
        let inst = generate_instance(seed, &cfg).unwrap();
        let opts = ChainOptions { refine_budget: 300, ..ChainOptions::default() };
        let exact = nabla(&inst.f, &inst.a, &inst.x, &inst.m, inst.norm, &[], &opts).unwrap();
        assert_eq!(exact.method, LipMethod::DualFormula);
        // the same functional behind an identity profile forces the sampling path
        let w = inst.f.coefficients().clone();
        let sampled_f = FunctionalSpec::PostComposed {
            w,
            profile: ScalarProfile::Polynomial { coeffs: vec![1.0] },
            scale: Complex64::new(1.0, 0.0),
        };
        assert!((eval_functional(&sampled_f, &inst.x).unwrap() - 1.0).norm() < 1e-12);
        let est = nabla(&sampled_f, &inst.a, &inst.x, &inst.m, inst.norm, &[], &opts).unwrap();
        assert!(!est.is_exact());
        assert!(est.lower <= exact.value() * (1.0 + 1e-9) + 1e-12, "{} > {}", est.lower, exact.value());

        let fb = lip_functional_after_map(&inst.f, &inst.b, &inst.n, inst.norm, &opts).unwrap();
        assert!(fb.is_exact());
        let coeffs = inst.b.as_linear().unwrap().adjoint().apply(inst.f.coefficients()).unwrap();
        assert!((fb.value() - dual_norm(&coeffs, inst.norm)).abs() <= 1e-12 * (1.0 + fb.value()));
        assert!(norm(&coeffs, inst.norm.dual()) == dual_norm(&coeffs, inst.norm));
    }
}
