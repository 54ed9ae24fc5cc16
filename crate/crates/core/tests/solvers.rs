use fplap_core::kernel::{assemble_kernel, KernelParams};
use fplap_core::manifold::{build_flat_torus, build_sphere, select_domain, DirichletDomain, DomainSpec, ManifoldMesh};
use fplap_core::rng::trial_rng;
use fplap_core::solver::*;
use fplap_core::{DenseMatrix, DiscreteField, EnergyFunctional, Error, KernelMatrix, Nonlinearity};

fn torus_cap() -> (KernelMatrix, DirichletDomain) {
    let m = build_flat_torus(8).unwrap();
    let k = assemble_kernel(&m, KernelParams::new(0.5, 2.0)).unwrap();
    let d = select_domain(&m, &DomainSpec::Cap { center: 0, radius: 0.3 }).unwrap();
    (k, d)
}

fn sublinear() -> Nonlinearity {
    Nonlinearity::power(1.0, 1.5).unwrap().with_positive_part(true)
}

fn assert_descent(report: &SolverReport) {
    for row in report.trace.iter().skip(1) {
        if row.step > 0.0 {
            assert!(row.delta_psi < 0.0, "iteration {} did not decrease psi", row.iter);
        }
    }
    for w in report.trace.windows(2) {
        if w[1].step > 0.0 {
            assert!(w[1].psi <= w[0].psi + 1e-15 * w[0].psi.abs());
        }
    }
}

#[test]
fn zero_reaction_converges_to_the_trivial_solution() {
    let (k, d) = torus_cap();
    let zero = Nonlinearity::zero();
    let e = EnergyFunctional::new(&k, &d, &zero).unwrap();
    let u0 = DiscreteField::random_uniform(&d, -1.0, 1.0, &mut trial_rng(1, 0));
    let r = minimize_direct(&e, &u0, &SolverOptions::default()).unwrap();
    assert_eq!(r.status, SolverStatus::DegenerateTrivial);
    assert!(r.energy.psi.abs() < 1e-15);
    assert!(r.solution.sup_norm() < 1e-6);
    assert!(r.message.contains("trivial"));
    assert_descent(&r);
}

#[test]
fn sublinear_problem_has_negative_energy_solution_on_both_meshes() {
    let cases: [(ManifoldMesh, f64); 2] = [(build_flat_torus(8).unwrap(), 0.3), (build_sphere(2).unwrap(), 1.0)];
    for (mesh, radius) in cases {
        let k = assemble_kernel(&mesh, KernelParams::new(0.5, 2.0)).unwrap();
        let d = select_domain(&mesh, &DomainSpec::Cap { center: 0, radius }).unwrap();
        let nl = sublinear();
        let e = EnergyFunctional::new(&k, &d, &nl).unwrap();
        let r = minimize_direct(&e, &vec![0.0; mesh.len()], &SolverOptions::default()).unwrap();
        assert_eq!(r.status, SolverStatus::Converged, "{}", r.message);
        assert!(r.energy.psi < 0.0);
        assert!(e.residual_norm(&r.solution).unwrap() <= 1e-8);
        assert!(r.w_norm > 1e-6);
        let probe = r.probe.expect("trivial start triggers the probe");
        assert!(probe.psi < 0.0);
        assert_descent(&r);
        assert!(d.interior().iter().all(|&i| r.solution[i] > 0.0));
    }
}

#[test]
fn random_starts_agree() {
    let (k, d) = torus_cap();
    let nl = sublinear();
    let e = EnergyFunctional::new(&k, &d, &nl).unwrap();
    let reports: Vec<SolverReport> = (0..5)
        .map(|s| {
            let u0 = DiscreteField::random_uniform(&d, 0.0, 1.0, &mut trial_rng(42, s));
            minimize_direct(&e, &u0, &SolverOptions::default()).unwrap()
        })
        .collect();
    for r in &reports {
        assert!(r.converged());
        assert!((r.energy.psi - reports[0].energy.psi).abs() <= 1e-8);
        assert!(r.solution.sup_distance(&reports[0].solution) <= 1e-6);
    }
    let u = uniqueness_check(&e, &reports).unwrap();
    assert!(u.passed, "{}", u.note);
    assert_eq!(u.pairs.len(), 10);
    for pair in &u.pairs {
        assert!(pair.s_term <= 1e-8 * pair.s_scale);
        assert!(pair.picone_side >= -1e-8 * pair.s_scale);
    }
}

#[test]
fn uncertified_growth_is_a_precondition_error() {
    let (k, d) = torus_cap();
    let nl = Nonlinearity::power(1.0, 3.0).unwrap();
    let e = EnergyFunctional::new(&k, &d, &nl).unwrap();
    let err = minimize_direct(&e, &vec![0.0; 64], &SolverOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)));
}

/// Two vertices, one interior: `ψ(t) = t² − t⁴` for `u = (t, 0)`.
fn scalar_surrogate() -> (KernelMatrix, DirichletDomain) {
    let mesh = ManifoldMesh::from_raw_parts(
        vec![[0.0; 3], [1.0, 0.0, 0.0]],
        2,
        vec![1.0, 1.0],
        DenseMatrix::symmetric_from_fn(2, |_, _| 1.0),
        vec![],
    )
    .unwrap();
    let w = DenseMatrix::symmetric_from_fn(2, |_, _| 0.5);
    let k = KernelMatrix::from_weights(w, vec![1.0, 1.0], 2, KernelParams::new(0.5, 2.0)).unwrap();
    let d = select_domain(&mesh, &DomainSpec::Indices(vec![0])).unwrap();
    (k, d)
}

#[test]
fn endpoint_search_examples() {
    let (k, d) = scalar_surrogate();
    let nl = Nonlinearity::power(4.0, 4.0).unwrap();
    let e = EnergyFunctional::new(&k, &d, &nl).unwrap();
    let psi15 = e.psi(&[1.5, 0.0]).unwrap();
    assert!((psi15 - (1.5f64.powi(2) - 1.5f64.powi(4))).abs() < 1e-12);
    let ep = find_negative_endpoint(&e, &[1.0, 0.0], 1e3).unwrap();
    assert_eq!(ep.t0, 2.0);
    assert_eq!(ep.trace.len(), 2);

    let (k, d) = torus_cap();
    let zero = Nonlinearity::zero();
    let e0 = EnergyFunctional::new(&k, &d, &zero).unwrap();
    let v = DiscreteField::indicator(&d);
    assert!(matches!(find_negative_endpoint(&e0, &v, 1e6), Err(Error::EndpointNotFound { .. })));
    let r4 = Nonlinearity::power(1.0, 4.0).unwrap();
    let e4 = EnergyFunctional::new(&k, &d, &r4).unwrap();
    let ep = find_negative_endpoint(&e4, &v, 1e6).unwrap();
    assert!(ep.psi < 0.0);
    assert!(ep.trace.iter().rev().skip(1).all(|(_, psi)| *psi >= 0.0));
}

#[test]
fn geometry_certificate_examples() {
    let (k, d) = torus_cap();
    let zero = Nonlinearity::zero();
    let e0 = EnergyFunctional::new(&k, &d, &zero).unwrap();
    for b in [0.01, 0.1, 1.0] {
        let g = verify_mountain_pass_geometry(&e0, b, 50, 3).unwrap();
        assert!(g.passed);
        assert!((g.a_estimate - b * b / 2.0).abs() <= 1e-12 * b * b);
    }
    let r4 = Nonlinearity::power(1.0, 4.0).unwrap();
    let e4 = EnergyFunctional::new(&k, &d, &r4).unwrap();
    let sweep = geometry_sweep(&e4, &[0.01, 0.1, 1.0], 100, 3).unwrap();
    assert!(sweep[0].passed && sweep[1].passed);
    // rescaling to the sphere is exact up to round-off
    let u = DiscreteField::random_uniform(&d, -1.0, 1.0, &mut trial_rng(5, 5));
    let b = 0.37;
    let scaled = u.scaled(b / e4.w_norm(&u).unwrap());
    assert!((e4.w_norm(&scaled).unwrap() - b).abs() <= 1e-12);
}

fn superlinear() -> Nonlinearity {
    Nonlinearity::power(1.0, 3.5).unwrap()
}

fn run_mountain_pass(e: &EnergyFunctional<'_>, nodes: usize) -> SolverReport {
    let v = DiscreteField::indicator(e.domain());
    let ep = find_negative_endpoint(e, &v, 1e6).unwrap();
    let geo = verify_mountain_pass_geometry(e, 0.1, 200, 7).unwrap();
    let opts = SolverOptions { tol: 1e-6, path_nodes: nodes, ..Default::default() };
    mountain_pass(e, &v, &ep, &geo, &opts).unwrap()
}

#[test]
fn mountain_pass_finds_a_positive_level_critical_point() {
    let (k, d) = torus_cap();
    let nl = superlinear();
    let e = EnergyFunctional::new(&k, &d, &nl).unwrap();
    let r = run_mountain_pass(&e, 41);
    assert_eq!(r.status, SolverStatus::Converged, "{}", r.message);
    assert!(e.residual_norm(&r.solution).unwrap() <= 1e-6);
    assert!(r.energy.psi > 0.0);
    assert_eq!(r.level_check, Some(true));
    assert!(r.w_norm > 1e-6);

    // between redistributions the path maximum never increases
    let phase_a: Vec<&TraceRow> = r.trace.iter().take_while(|row| row.step > 0.0).collect();
    for w in phase_a.windows(2) {
        if w[0].iter % 10 != 0 {
            assert!(w[1].psi <= w[0].psi + 1e-12 * w[0].psi.abs());
        }
    }

    let fine = run_mountain_pass(&e, 81);
    assert!(fine.converged());
    assert!((fine.energy.psi - r.energy.psi).abs() / r.energy.psi < 1e-4);

    // restarting a descent from the critical point stays put
    let opts = SolverOptions { tol: 1e-6, enforce_certificates: false, ..Default::default() };
    let again = minimize_direct(&e, &r.solution, &opts).unwrap();
    assert_eq!(again.iterations, 0);
    assert_eq!(again.solution, r.solution);

    // the monotone condition fails for superlinear powers, so uniqueness is not claimed
    let u = uniqueness_check(&e, &[r.clone(), fine]).unwrap();
    assert!(!u.passed);
    assert!(!u.monotone_certificate.passed);
    assert!(u.note.contains("not claimed"));
}

#[test]
fn mountain_pass_needs_an_endpoint() {
    let (k, d) = torus_cap();
    let zero = Nonlinearity::zero();
    let e = EnergyFunctional::new(&k, &d, &zero).unwrap();
    assert!(find_negative_endpoint(&e, &DiscreteField::indicator(&d), 1e6).is_err());
}

#[test]
fn uniqueness_preconditions() {
    let (k, d) = torus_cap();
    let nl = sublinear();
    let e = EnergyFunctional::new(&k, &d, &nl).unwrap();
    let r = minimize_direct(&e, &vec![0.0; 64], &SolverOptions::default()).unwrap();
    let same = uniqueness_check(&e, &[r.clone(), r.clone()]).unwrap();
    assert_eq!(same.max_distance, 0.0);
    assert_eq!(same.pairs[0].s_term, 0.0);
    assert!(matches!(uniqueness_check(&e, &[r.clone()]), Err(Error::Precondition(_))));
    let mut bad = r.clone();
    let mut vals = bad.solution.clone().into_values();
    vals[d.interior()[0]] = -1e-3;
    bad.solution = DiscreteField::new(vals, &d).unwrap();
    assert!(matches!(uniqueness_check(&e, &[r, bad]), Err(Error::Precondition(_))));
}

#[test]
fn identical_inputs_give_identical_reports() {
    let (k, d) = torus_cap();
    let nl = sublinear();
    let e = EnergyFunctional::new(&k, &d, &nl).unwrap();
    let u0 = DiscreteField::random_uniform(&d, 0.0, 1.0, &mut trial_rng(8, 0));
    let a = minimize_direct(&e, &u0, &SolverOptions::default()).unwrap();
    let b = minimize_direct(&e, &u0, &SolverOptions::default()).unwrap();
    assert_eq!(a, b);
    let sup = superlinear();
    let e = EnergyFunctional::new(&k, &d, &sup).unwrap();
    assert_eq!(run_mountain_pass(&e, 41), run_mountain_pass(&e, 41));
}
