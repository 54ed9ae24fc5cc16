use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fplap_core::manifold::{select_domain, validate_mesh, MeshOrigin};
use fplap_core::nonlinearity::{
    check_ar_f4, check_growth_f1, check_limits_f2_f3, check_monotone_f5, default_growth_samples,
    default_positive_samples, LimitConfig,
};
use fplap_core::rng::trial_rng;
use fplap_core::solver::{
    find_negative_endpoint, geometry_sweep, minimize_direct, mountain_pass, uniqueness_check, SolverReport,
};
use fplap_core::verification::{
    convergence_study, embedding_constant_estimate, lipschitz_composition_check, norm_equivalence_check,
    picone_sweep, Assembler, Clock, InequalityReport, ManifoldFamily, StudySpec,
};
use fplap_core::{
    CertificateReport, DirichletDomain, DiscreteField, EnergyFunctional, Error, KernelMatrix, KernelParams,
    ManifoldMesh, MeshValidationReport, Nonlinearity, SolverOptions, SolverStatus,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::assembly::assemble_parallel;
use crate::config::{Builtin, Check, LoadedConfig, Regime, RegimeChoice, Start, StudyKind};
use crate::error::{FplapError, Result};
use crate::io::write_field;
use crate::output::{kernel_dump_csv, num, write_csv, write_file, write_json, Provenance};

/// Exit status plus the summary lines a command prints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub lines: Vec<String>,
}

/// A loaded configuration with the effective seed and output directory.
#[derive(Debug)]
pub struct Context {
    pub loaded: LoadedConfig,
    pub seed: u64,
    pub out: PathBuf,
    pub provenance: Provenance,
}

const DEFAULT_OUT: &str = "fplap-out";

struct StdClock(Instant);

impl Clock for StdClock {
    fn now(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

#[derive(Serialize)]
struct MeshSummary {
    origin: MeshOrigin,
    vertices: usize,
    triangles: usize,
    dim: usize,
    total_measure: f64,
}

impl MeshSummary {
    fn of(mesh: &ManifoldMesh) -> Self {
        Self {
            origin: mesh.origin(),
            vertices: mesh.len(),
            triangles: mesh.triangles().len(),
            dim: mesh.dim(),
            total_measure: mesh.total_measure(),
        }
    }
}

#[derive(Serialize)]
struct ProblemSummary<'a> {
    mesh: MeshSummary,
    interior: usize,
    operator: KernelParams,
    critical_exponent: f64,
    nonlinearity: &'a Nonlinearity,
}

struct Problem {
    mesh: ManifoldMesh,
    domain: DirichletDomain,
    kernel: KernelMatrix,
    assembly_seconds: f64,
}

impl Context {
    /// `seed` and `out` override the `[run]` section; the output directory is created.
    pub fn new(mut loaded: LoadedConfig, seed: Option<u64>, out: Option<PathBuf>) -> Result<Self> {
        let seed = seed.unwrap_or(loaded.config.run.seed);
        loaded.config.run.seed = seed;
        let out = out.or_else(|| loaded.config.run.out.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        fs::create_dir_all(&out).map_err(|e| FplapError::io(&out, e))?;
        let provenance = Provenance::new(&loaded.bytes, seed);
        Ok(Self { loaded, seed, out, provenance })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn options(&self) -> SolverOptions {
        self.loaded.config.solver_options()
    }

    fn problem(&self) -> Result<Problem> {
        let mesh = self.loaded.build_mesh()?;
        let domain = select_domain(&mesh, &self.loaded.config.domain_spec())?;
        let t0 = Instant::now();
        let kernel = assemble_parallel(&mesh, self.loaded.config.kernel_params())?;
        let assembly_seconds = t0.elapsed().as_secs_f64();
        Ok(Problem { mesh, domain, kernel, assembly_seconds })
    }

    fn summary<'a>(&'a self, pb: &Problem) -> ProblemSummary<'a> {
        ProblemSummary {
            mesh: MeshSummary::of(&pb.mesh),
            interior: pb.domain.interior().len(),
            operator: pb.kernel.params(),
            critical_exponent: pb.kernel.critical_exponent(),
            nonlinearity: &self.loaded.nonlinearity,
        }
    }

    fn timing(&self, name: &str, rows: &[Vec<String>], header: &[&str]) -> Result<()> {
        write_csv(&self.path(name), &self.provenance, header, rows)
    }
}

fn wrote(lines: &mut Vec<String>, path: &Path) {
    lines.push(format!("wrote {}", path.display()));
}

fn trace_rows(report: &SolverReport) -> Vec<Vec<String>> {
    report
        .trace
        .iter()
        .map(|r| vec![r.iter.to_string(), num(r.psi), num(r.residual), num(r.step), num(r.delta_psi)])
        .collect()
}

#[derive(Serialize)]
struct SolveDocument<'a> {
    command: &'static str,
    regime: Regime,
    regime_source: &'static str,
    problem: ProblemSummary<'a>,
    options: SolverOptions,
    report: &'a SolverReport,
}

/// Solves the configured problem with the regime chosen from the growth exponent.
///
/// Writes `report.json`, `solution.txt`, `trace.csv` and `solve_timing.csv`.
/// Exit `0` iff the solver converged to a nontrivial solution (or to the trivial
/// one with `solver.allow_trivial`).
pub fn cmd_solve(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.loaded.config;
    let nl = &ctx.loaded.nonlinearity;
    let regime = cfg.regime(nl)?;
    let regime_source = if cfg.solver.regime == RegimeChoice::Auto { "auto" } else { "override" };
    let pb = ctx.problem()?;
    let e = EnergyFunctional::new(&pb.kernel, &pb.domain, nl)?;
    let opts = ctx.options();
    let start = match cfg.solver.start {
        Start::Zero => DiscreteField::zeros(&pb.domain),
        Start::Indicator => DiscreteField::indicator(&pb.domain),
        Start::Random => DiscreteField::random_uniform(&pb.domain, 0.0, 1.0, &mut trial_rng(ctx.seed, 0)),
    };
    let t0 = Instant::now();
    let report = match regime {
        Regime::Direct => minimize_direct(&e, &start, &opts)?,
        Regime::MountainPass => {
            let dir = if start.sup_norm() > 0.0 { start } else { DiscreteField::indicator(&pb.domain) };
            let endpoint = find_negative_endpoint(&e, &dir, opts.endpoint_t_max)?;
            let end_norm = e.w_norm(&dir.scaled(endpoint.t0))?;
            let radii: Vec<f64> = cfg.solver.geometry_radii.iter().copied().filter(|b| *b < end_norm).collect();
            let sweep = geometry_sweep(&e, &radii, cfg.solver.geometry_samples, ctx.seed)?;
            let best = sweep
                .iter()
                .filter(|g| g.passed)
                .max_by(|a, b| a.a_estimate.total_cmp(&b.a_estimate))
                .ok_or_else(|| {
                    Error::Precondition(format!(
                        "no geometry certificate passed at radii {radii:?} below the endpoint norm {end_norm:e}"
                    ))
                })?;
            mountain_pass(&e, &dir, &endpoint, best, &opts)?
        }
    };
    let solve_seconds = t0.elapsed().as_secs_f64();

    let doc = SolveDocument {
        command: "solve",
        regime,
        regime_source,
        problem: ctx.summary(&pb),
        options: opts,
        report: &report,
    };
    let mut lines = vec![format!(
        "solve [{}]: status {} psi {:e} residual {:e} ||u|| {:e} after {} iterations",
        regime.label(),
        report.status.label(),
        report.energy.psi,
        report.residual,
        report.w_norm,
        report.iterations
    )];
    if !report.message.is_empty() {
        lines.push(report.message.clone());
    }
    let report_path = ctx.path("report.json");
    write_json(&report_path, &ctx.provenance, &doc)?;
    wrote(&mut lines, &report_path);
    let sol_path = ctx.path("solution.txt");
    write_field(&sol_path, &report.solution, &ctx.provenance)?;
    wrote(&mut lines, &sol_path);
    let trace_path = ctx.path("trace.csv");
    write_csv(&trace_path, &ctx.provenance, &["iter", "psi", "residual", "step", "delta_psi"], &trace_rows(&report))?;
    wrote(&mut lines, &trace_path);
    ctx.timing(
        "solve_timing.csv",
        &[vec![num(pb.assembly_seconds), num(solve_seconds)]],
        &["assembly_seconds", "solve_seconds"],
    )?;

    let nontrivial = report.w_norm >= opts.nontrivial_threshold;
    let ok = match report.status {
        SolverStatus::Converged => nontrivial,
        SolverStatus::DegenerateTrivial => cfg.solver.allow_trivial,
        _ => false,
    };
    Ok(Outcome { code: if ok { 0 } else { 1 }, lines })
}

#[derive(Serialize)]
#[serde(untagged)]
enum CheckResult {
    Inequality(InequalityReport),
    Certificate(CertificateReport),
}

#[derive(Serialize)]
struct CheckEntry {
    check: &'static str,
    passed: bool,
    result: CheckResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

#[derive(Serialize)]
struct VerifyDocument<'a> {
    command: &'static str,
    trials: usize,
    problem: Option<ProblemSummary<'a>>,
    checks: Vec<CheckEntry>,
}

/// Runs the selected inequality checks and condition certificates.
///
/// `checks` overrides `verify.checks` when non-empty. Writes `verify.json` and,
/// for each violated inequality, its counterexample fields. Exit `0` iff every
/// check passed.
pub fn cmd_verify(ctx: &Context, checks: &[Check]) -> Result<Outcome> {
    let cfg = &ctx.loaded.config;
    let v = &cfg.verify;
    let checks: Vec<Check> = if checks.is_empty() { v.checks.clone() } else { checks.to_vec() };
    let nl = &ctx.loaded.nonlinearity;
    let p = cfg.operator.p;
    if checks.contains(&Check::Lipschitz) && v.lipschitz.eval(0.0) != 0.0 {
        return Err(Error::Precondition(format!(
            "lipschitz test function {:?} has g(0) = {} but the check needs g(0) = 0",
            v.lipschitz,
            v.lipschitz.eval(0.0)
        ))
        .into());
    }
    let needs_mesh = checks
        .iter()
        .any(|c| matches!(c, Check::Picone | Check::Embedding | Check::NormEquivalence | Check::Lipschitz));
    let pb = if needs_mesh { Some(ctx.problem()?) } else { None };
    let mut extra_fields: Vec<(String, DiscreteField)> = Vec::new();

    let run = |check: Check| -> Result<(CheckEntry, Option<DiscreteField>)> {
        let ineq = |r: InequalityReport| (r.passed, CheckResult::Inequality(r));
        let cert = |r: CertificateReport| (r.passed, CheckResult::Certificate(r));
        let mut note = None;
        let mut field = None;
        let (passed, result) = match check {
            Check::F1 => cert(check_growth_f1(nl, &default_growth_samples(v.growth_t_max))),
            Check::F2 => cert(check_limits_f2_f3(nl, p, &LimitConfig::default()).0),
            Check::F3 => cert(check_limits_f2_f3(nl, p, &LimitConfig::default()).1),
            Check::F4 => {
                let mu = match (nl.mu_ar, v.mu_ar) {
                    (Some(m), _) | (None, Some(m)) => m,
                    (None, None) => {
                        note = Some(format!("no AR exponent declared; using the growth exponent {}", nl.q_growth));
                        nl.q_growth
                    }
                };
                cert(check_ar_f4(nl, mu, p, &default_positive_samples()))
            }
            Check::F5 => cert(check_monotone_f5(nl, p, &default_positive_samples())),
            Check::Picone | Check::Embedding | Check::NormEquivalence | Check::Lipschitz => {
                let pb = pb.as_ref().expect("mesh built for mesh checks");
                let (k, d) = (&pb.kernel, &pb.domain);
                match check {
                    Check::Picone => ineq(picone_sweep(k, d, v.trials, ctx.seed)?),
                    Check::Embedding => {
                        let est = embedding_constant_estimate(k, d, v.q.unwrap_or(p), v.trials, ctx.seed)?;
                        field = Some(est.maximizer);
                        ineq(est.report)
                    }
                    Check::NormEquivalence => ineq(norm_equivalence_check(k, d, v.trials, ctx.seed)?),
                    _ => {
                        let g = v.lipschitz;
                        let l = v.lipschitz_constant.unwrap_or(g.constant());
                        ineq(lipschitz_composition_check(k, d, &|t| g.eval(t), l, v.trials, ctx.seed)?)
                    }
                }
            }
        };
        Ok((CheckEntry { check: check.name(), passed, result, note }, field))
    };
    let results: Vec<(CheckEntry, Option<DiscreteField>)> =
        checks.par_iter().map(|&c| run(c)).collect::<Result<_>>()?;

    let mut lines = Vec::new();
    let mut entries = Vec::new();
    let mut all_passed = true;
    for (entry, field) in results {
        all_passed &= entry.passed;
        let verdict = if entry.passed { "PASS" } else { "FAIL" };
        let detail = match &entry.result {
            CheckResult::Inequality(r) => {
                let est = r.estimate.map(|e| format!(" estimate {e:e}")).unwrap_or_default();
                format!("{} trials, {} violations{est}", r.trials, r.violations)
            }
            CheckResult::Certificate(r) => r.detail.clone(),
        };
        lines.push(format!("{verdict} {}: {detail}", entry.check));
        if let Some(f) = field {
            extra_fields.push((format!("{}_maximizer", entry.check), f));
        }
        if let CheckResult::Inequality(InequalityReport { counterexample: Some(cx), .. }) = &entry.result {
            for (name, f) in &cx.fields {
                extra_fields.push((format!("counterexample_{}_{name}", entry.check), f.clone()));
            }
        }
        entries.push(entry);
    }
    let doc = VerifyDocument {
        command: "verify",
        trials: v.trials,
        problem: pb.as_ref().map(|pb| ctx.summary(pb)),
        checks: entries,
    };
    let path = ctx.path("verify.json");
    write_json(&path, &ctx.provenance, &doc)?;
    wrote(&mut lines, &path);
    for (name, f) in &extra_fields {
        let fp = ctx.path(&format!("{name}.txt"));
        write_field(&fp, f, &ctx.provenance)?;
        wrote(&mut lines, &fp);
    }
    Ok(Outcome { code: if all_passed { 0 } else { 1 }, lines })
}

/// Convergence ladder or multi-start uniqueness study, per `study.kind`.
///
/// Exit `0` iff every solve converged (trivially or not).
pub fn cmd_study(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.loaded.config;
    if cfg.regime(&ctx.loaded.nonlinearity)? != Regime::Direct {
        return Err(FplapError::Config("studies use direct minimization and need the direct regime".into()));
    }
    match cfg.study.kind {
        StudyKind::Convergence => study_convergence(ctx),
        StudyKind::Uniqueness => study_uniqueness(ctx),
    }
}

#[derive(Serialize)]
struct StudyDocument<'a> {
    command: &'static str,
    kind: StudyKind,
    complete: bool,
    cauchy: bool,
    note: &'a str,
}

fn study_convergence(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.loaded.config;
    let st = &cfg.study;
    if st.resolutions.len() < 3 {
        return Err(FplapError::Config(format!(
            "a convergence study needs at least 3 resolutions in study.resolutions (got {})",
            st.resolutions.len()
        )));
    }
    if cfg.domain.center.unwrap_or(0) != 0 {
        return Err(FplapError::Config("a convergence study centres the cap at vertex 0".into()));
    }
    let family = match cfg.manifold.builtin {
        Some(Builtin::Sphere) => ManifoldFamily::Sphere,
        Some(Builtin::Torus) => ManifoldFamily::Torus,
        None => return Err(FplapError::Config("a convergence study needs a builtin manifold".into())),
    };
    let spec = StudySpec {
        family,
        cap_radius: cfg.domain.radius.expect("validated at load"),
        params: cfg.kernel_params(),
        nonlinearity: ctx.loaded.nonlinearity.clone(),
        options: ctx.options(),
    };
    let assembler: Assembler<'_> = Box::new(assemble_parallel);
    let table = convergence_study(&spec, &st.resolutions, &assembler, &StdClock(Instant::now()))?;

    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.resolution.to_string(),
                r.n.to_string(),
                r.interior.to_string(),
                num(r.psi),
                num(r.residual),
                num(r.w_norm),
                r.iterations.to_string(),
                r.status.label().to_string(),
            ]
        })
        .collect();
    let mut lines = vec![format!(
        "convergence study: {} of {} resolutions, complete {}, cauchy {}",
        table.rows.len(),
        st.resolutions.len(),
        table.complete,
        table.cauchy
    )];
    lines.push(table.note.clone());
    let path = ctx.path("study.csv");
    write_csv(
        &path,
        &ctx.provenance,
        &["resolution", "n", "interior", "psi", "residual", "w_norm", "iterations", "status"],
        &rows,
    )?;
    wrote(&mut lines, &path);
    let timing: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| vec![r.resolution.to_string(), r.n.to_string(), num(r.assembly_seconds), num(r.solve_seconds)])
        .collect();
    ctx.timing("study_timing.csv", &timing, &["resolution", "n", "assembly_seconds", "solve_seconds"])?;
    let doc = StudyDocument {
        command: "study",
        kind: StudyKind::Convergence,
        complete: table.complete,
        cauchy: table.cauchy,
        note: &table.note,
    };
    let jpath = ctx.path("study.json");
    write_json(&jpath, &ctx.provenance, &doc)?;
    wrote(&mut lines, &jpath);
    Ok(Outcome { code: if table.complete { 0 } else { 1 }, lines })
}

fn study_uniqueness(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.loaded.config;
    let pb = ctx.problem()?;
    let nl = &ctx.loaded.nonlinearity;
    let e = EnergyFunctional::new(&pb.kernel, &pb.domain, nl)?;
    let opts = ctx.options();
    let reports: Vec<SolverReport> = (0..cfg.study.starts)
        .into_par_iter()
        .map(|k| {
            let u0 = DiscreteField::random_uniform(&pb.domain, 0.0, 1.0, &mut trial_rng(ctx.seed, k as u64));
            minimize_direct(&e, &u0, &opts)
        })
        .collect::<fplap_core::Result<_>>()?;

    let start_rows: Vec<Vec<String>> = reports
        .iter()
        .enumerate()
        .map(|(k, r)| {
            vec![
                k.to_string(),
                r.status.label().to_string(),
                num(r.energy.psi),
                num(r.residual),
                num(r.w_norm),
                r.iterations.to_string(),
            ]
        })
        .collect();
    let mut lines = Vec::new();
    let spath = ctx.path("uniqueness_starts.csv");
    write_csv(&spath, &ctx.provenance, &["start", "status", "psi", "residual", "w_norm", "iterations"], &start_rows)?;
    let complete = reports.iter().all(SolverReport::converged);
    if !complete {
        lines.push(format!(
            "uniqueness study incomplete: {} of {} starts converged",
            reports.iter().filter(|r| r.converged()).count(),
            reports.len()
        ));
        wrote(&mut lines, &spath);
        return Ok(Outcome { code: 1, lines });
    }
    let u = uniqueness_check(&e, &reports)?;
    lines.push(format!(
        "uniqueness study: {} starts, max sup distance {:e}, max |S|/scale {:e}, unique {}",
        reports.len(),
        u.max_distance,
        u.max_relative_s,
        u.passed
    ));
    lines.push(u.note.clone());
    wrote(&mut lines, &spath);
    let pair_rows: Vec<Vec<String>> = u
        .pairs
        .iter()
        .map(|c| {
            vec![
                c.i.to_string(),
                c.j.to_string(),
                num(c.sup_distance),
                num(c.s_term),
                num(c.s_scale),
                num(c.picone_side),
            ]
        })
        .collect();
    let ppath = ctx.path("uniqueness_pairs.csv");
    write_csv(&ppath, &ctx.provenance, &["i", "j", "sup_distance", "s_term", "s_scale", "picone_side"], &pair_rows)?;
    wrote(&mut lines, &ppath);
    let jpath = ctx.path("uniqueness.json");
    write_json(&jpath, &ctx.provenance, &u)?;
    wrote(&mut lines, &jpath);
    Ok(Outcome { code: 0, lines })
}

#[derive(Serialize)]
struct MeshInfoDocument {
    command: &'static str,
    mesh: MeshSummary,
    edges: usize,
    interior: usize,
    exterior: usize,
    validation: MeshValidationReport,
}

/// Mesh statistics and structural validation; optionally the kernel dump.
pub fn cmd_mesh_info(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.loaded.config;
    let mesh = ctx.loaded.build_mesh()?;
    let domain = select_domain(&mesh, &cfg.domain_spec())?;
    let validation = validate_mesh(&mesh, 100_000, ctx.seed);
    let valid = validation.is_valid();
    let doc = MeshInfoDocument {
        command: "mesh-info",
        mesh: MeshSummary::of(&mesh),
        edges: mesh.edges().len(),
        interior: domain.interior().len(),
        exterior: domain.exterior().len(),
        validation,
    };
    let mut lines = vec![format!(
        "mesh {:?}: {} vertices, {} triangles, {} edges, total measure {:e}, interior {}, valid {valid}",
        mesh.origin(),
        mesh.len(),
        mesh.triangles().len(),
        mesh.edges().len(),
        mesh.total_measure(),
        domain.interior().len()
    )];
    let path = ctx.path("mesh_info.json");
    write_json(&path, &ctx.provenance, &doc)?;
    wrote(&mut lines, &path);
    if cfg.run.kernel_dump {
        let kernel = assemble_parallel(&mesh, cfg.kernel_params())?;
        let kpath = ctx.path("kernel.csv");
        write_file(&kpath, kernel_dump_csv(&kernel, &ctx.provenance).as_bytes())?;
        wrote(&mut lines, &kpath);
    }
    Ok(Outcome { code: if valid { 0 } else { 1 }, lines })
}
