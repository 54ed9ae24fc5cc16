mod oracle;

use fplap_core::kernel::{assemble_kernel, KernelParams};
use fplap_core::manifold::{build_flat_torus, build_sphere, select_domain, DirichletDomain, DomainSpec, ManifoldMesh};
use fplap_core::nonlinearity::*;
use fplap_core::rng::trial_rng;
use fplap_core::{DiscreteField, EnergyFunctional, KernelMatrix, Nonlinearity};
use oracle::{naive_energy, raw_measure, raw_weights, rel};
use proptest::prelude::*;

fn problem(mesh: ManifoldMesh, radius: f64, s: f64, p: f64) -> (ManifoldMesh, KernelMatrix, DirichletDomain) {
    let k = assemble_kernel(&mesh, KernelParams::new(s, p)).unwrap();
    let d = select_domain(&mesh, &DomainSpec::Cap { center: 0, radius }).unwrap();
    (mesh, k, d)
}

#[test]
fn energy_matches_from_scratch_recomputation() {
    let (m, k, d) = problem(build_flat_torus(4).unwrap(), 0.45, 0.5, 3.0);
    let nl = Nonlinearity::power(1.0, 3.0).unwrap();
    let e = EnergyFunctional::new(&k, &d, &nl).unwrap();
    let w = raw_weights(&m, 0.5, 3.0, 0.5);
    let mu = raw_measure(&m);
    for trial in 0..20 {
        let u = DiscreteField::random_uniform(&d, -1.0, 1.0, &mut trial_rng(3, trial));
        let expect = naive_energy(&w, &mu, d.interior(), &u, 3.0, |_, t| t.abs().powi(3) / 3.0);
        assert!(rel(e.psi(&u).unwrap(), expect) < 1e-12);
    }
}

#[test]
fn decomposition_is_exact_and_zero_reaction_energy_is_positive() {
    let (_, k, d) = problem(build_sphere(1).unwrap(), 1.2, 0.5, 2.0);
    let zero = Nonlinearity::zero();
    let e = EnergyFunctional::new(&k, &d, &zero).unwrap();
    for trial in 0..10 {
        let u = DiscreteField::random_uniform(&d, -1.0, 1.0, &mut trial_rng(4, trial));
        let b = e.eval_energy(&u).unwrap();
        assert_eq!(b.psi, b.i1 + b.i2 - b.k);
        assert!(b.psi > 0.0);
        assert!(e.residual_norm(&u).unwrap() > 0.0);
    }
}

#[test]
fn gradient_vanishes_at_zero_for_superlinear_power() {
    let (_, k, d) = problem(build_flat_torus(5).unwrap(), 0.3, 0.5, 2.0);
    let nl = Nonlinearity::power(1.0, 3.0).unwrap();
    let e = EnergyFunctional::new(&k, &d, &nl).unwrap();
    let z = DiscreteField::zeros(&d);
    assert!(e.eval_gradient(&z).unwrap().iter().all(|g| *g == 0.0));
    assert_eq!(e.residual_norm(&z).unwrap(), 0.0);
}

#[test]
fn pairing_identity_for_zero_reaction() {
    let (_, k, d) = problem(build_flat_torus(6).unwrap(), 0.35, 0.25, 3.0);
    let zero = Nonlinearity::zero();
    let e = EnergyFunctional::new(&k, &d, &zero).unwrap();
    let bump = DiscreteField::from_interior(&d, |i| 1.0 + 0.1 * i as f64);
    let g = e.eval_gradient(&bump).unwrap();
    let mu = k.measure();
    let lp: f64 = d.interior().iter().map(|&i| bump[i].abs().powi(3) * mu[i]).sum();
    let expect = k.gagliardo_seminorm_p(&bump).unwrap() + lp;
    assert!(rel(e.mu_dot(&g, &bump), expect) < 1e-13);
}

/// Central differences against `⟨g, v⟩_μ`, scaled by `Σ|g_i v_i| μ_i`.
fn fd_mismatch(e: &EnergyFunctional<'_>, u: &[f64], v: &[f64], h: f64) -> f64 {
    let up: Vec<f64> = u.iter().zip(v).map(|(a, b)| a + h * b).collect();
    let um: Vec<f64> = u.iter().zip(v).map(|(a, b)| a - h * b).collect();
    let fd = (e.psi(&up).unwrap() - e.psi(&um).unwrap()) / (2.0 * h);
    let g = e.eval_gradient(u).unwrap();
    let mu = e.kernel().measure();
    let exact = e.mu_dot(&g, v);
    let scale: f64 = (0..u.len()).map(|i| (g[i] * v[i] * mu[i]).abs()).sum();
    (fd - exact).abs() / scale.max(fd.abs()).max(exact.abs()).max(1e-300)
}

#[test]
fn gradient_matches_central_differences_on_each_built_in() {
    let meshes = [(build_flat_torus(8).unwrap(), 0.3), (build_sphere(2).unwrap(), 1.0)];
    for (mesh, radius) in meshes {
        let (_, k, d) = problem(mesh, radius, 0.5, 2.5);
        let nl = Nonlinearity::power(0.7, 3.0).unwrap();
        let e = EnergyFunctional::new(&k, &d, &nl).unwrap();
        for trial in 0..100 {
            let mut rng = trial_rng(9, trial);
            let u = DiscreteField::random_uniform(&d, -1.0, 1.0, &mut rng);
            let v = DiscreteField::random_uniform(&d, -1.0, 1.0, &mut rng);
            for h in [1e-4, 1e-5] {
                let err = fd_mismatch(&e, &u, &v, h);
                assert!(err <= 1e-6, "trial {trial}, h {h}: {err}");
            }
        }
    }
}

#[test]
fn coercive_along_random_rays_for_sublinear_growth() {
    let (_, k, d) = problem(build_flat_torus(6).unwrap(), 0.35, 0.5, 2.0);
    let nl = Nonlinearity::power(1.0, 1.5).unwrap();
    let e = EnergyFunctional::new(&k, &d, &nl).unwrap();
    for trial in 0..20 {
        let w = DiscreteField::random_uniform(&d, -1.0, 1.0, &mut trial_rng(12, trial));
        let mut t = 1.0;
        let mut prev = e.psi(&w).unwrap();
        let mut increasing_from = None;
        while prev <= 1e6 {
            t *= 2.0;
            let cur = e.psi(&w.scaled(t)).unwrap();
            if cur > prev && increasing_from.is_none() {
                increasing_from = Some(t);
            } else if cur <= prev {
                increasing_from = None;
            }
            prev = cur;
            assert!(t < 1e12, "ray {trial} does not blow up");
        }
        assert!(increasing_from.is_some());
    }
}

#[test]
fn validator_examples() {
    let growth = default_growth_samples(1e3);
    let pos = default_positive_samples();
    // example reaction term: f(x,1) = e^{-1}
    let ex = Nonlinearity::damped_power(1.0, 2.0).unwrap();
    assert!((ex.eval_f(0, 1.0).unwrap() - 0.3679).abs() < 5e-5);
    // with q − 1 = p the growth bound holds for t ≥ 0 (truncated to t > 0)
    let ex_trunc = ex.clone().with_positive_part(true).with_certificate(1.0, 3.0);
    assert!(check_growth_f1(&ex_trunc, &growth).passed);
    // h(t) = t e^{-t} is increasing on (0, 1)
    let r = check_monotone_f5(&ex, 2.0, &[0.1, 0.5]);
    assert!(!r.passed && r.witness_t == Some(0.5));
    let r = check_ar_f4(&ex, 3.0, 2.0, &[50.0, 100.0]);
    assert!(!r.passed);
    // power family
    let sup = Nonlinearity::power(1.0, 3.0).unwrap();
    assert!(check_ar_f4(&sup, 3.0, 2.0, &pos).passed);
    assert!(!check_ar_f4(&sup, 3.5, 2.0, &pos).passed);
    assert!(!check_growth_f1(&sup.clone().with_certificate(1.0, 2.5), &growth).passed);
    let lin = Nonlinearity::power(2.0, 2.0).unwrap();
    let (_, f3) = check_limits_f2_f3(&lin, 2.0, &LimitConfig::default());
    assert!(!f3.passed);
    assert!(!check_monotone_f5(&lin, 2.0, &pos).passed);
}

#[test]
fn primitive_is_zero_at_zero_for_every_form() {
    let forms = [
        Nonlinearity::power(1.3, 2.5).unwrap(),
        Nonlinearity::damped_power(2.0, 1.5).unwrap(),
        Nonlinearity::table(vec![-1.0, 0.5, 2.0], vec![-2.0, 0.3, 1.0]).unwrap(),
    ];
    for nl in &forms {
        assert_eq!(nl.eval_F(0, 0.0).unwrap(), 0.0);
    }
}

#[test]
fn table_primitive_matches_quadrature() {
    let ts: Vec<f64> = (0..=40).map(|k| -2.0 + 0.1 * k as f64).collect();
    let fs: Vec<f64> = ts.iter().map(|t| t.sin()).collect();
    let nl = Nonlinearity::table(ts, fs).unwrap();
    for &t in &[-1.95, -0.33, 0.77, 1.5, 2.0] {
        // fine midpoint rule of the interpolant
        let n = 200_000;
        let h = t / n as f64;
        let q: f64 = (0..n).map(|k| nl.eval_f(0, (k as f64 + 0.5) * h).unwrap()).sum::<f64>() * h;
        assert!(rel(nl.eval_F(0, t).unwrap(), q) < 1e-9, "t = {t}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn convex_part_is_convex(seed in 0u64..10_000, t in 0.0f64..1.0, p in 1.2f64..3.5) {
        let (_, k, d) = problem(build_flat_torus(5).unwrap(), 0.35, 0.4, p);
        let zero = Nonlinearity::zero();
        let e = EnergyFunctional::new(&k, &d, &zero).unwrap();
        let mut rng = trial_rng(seed, 0);
        let u = DiscreteField::random_uniform(&d, -2.0, 2.0, &mut rng);
        let v = DiscreteField::random_uniform(&d, -2.0, 2.0, &mut rng);
        let mix: Vec<f64> = u.iter().zip(v.iter()).map(|(a, b)| t * a + (1.0 - t) * b).collect();
        let lhs = e.convex_part(&mix).unwrap();
        let rhs = t * e.convex_part(&u).unwrap() + (1.0 - t) * e.convex_part(&v).unwrap();
        prop_assert!(lhs <= rhs + 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn growth_bound_holds_for_declared_exponents_at_or_above_r(r in 1.1f64..4.0, extra in 0.0f64..1.0, lambda in 0.1f64..3.0) {
        let nl = Nonlinearity::power(lambda, r).unwrap().with_certificate(lambda.max(1.0), r + extra);
        prop_assert!(check_growth_f1(&nl, &default_growth_samples(1e3)).passed);
    }

    #[test]
    fn pure_powers_satisfy_ar_exactly_at_mu_equal_r(r in 2.1f64..5.0) {
        let nl = Nonlinearity::power(1.0, r).unwrap();
        prop_assert!(check_ar_f4(&nl, r, 2.0, &default_positive_samples()).passed);
    }
}
