//! Randomized certificates for the functional inequalities and the
//! discretization study.
//!
//! Existence constants cannot be verified from samples, only estimated; every
//! estimate here is reported together with the stability surrogate it was
//! judged by (trial budget or mesh refinement). Trials draw from per-trial
//! streams derived from a root seed, so any reported trial can be replayed.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::error::{invalid, Error, Result};
use crate::field::DiscreteField;
use crate::kernel::{KernelMatrix, KernelParams};
use crate::manifold::{
    build_flat_torus, build_sphere_with_cap, select_domain, DirichletDomain, DomainSpec, ManifoldMesh,
    DEFAULT_MAX_SPHERE_LEVEL,
};
use crate::nonlinearity::Nonlinearity;
use crate::numeric::{abs_pow, csum, powf, rel_diff, signed_pow};
use crate::problem::EnergyFunctional;
use crate::rng::trial_rng;
use crate::solver::{minimize_direct, SolverOptions, SolverStatus};

/// Fields attached to a violating trial so it can be replayed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Counterexample {
    pub trial: usize,
    pub root_seed: u64,
    pub fields: Vec<(String, DiscreteField)>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct InequalityReport {
    pub name: String,
    pub passed: bool,
    pub trials: usize,
    pub violations: usize,
    /// Smallest signed margin (negative = violation), relative to the trial scale.
    pub worst_margin: f64,
    pub worst_trial: Option<usize>,
    pub tolerance: f64,
    /// Constant estimate, for the estimation checks.
    pub estimate: Option<f64>,
    pub counterexample: Option<Counterexample>,
    pub note: String,
}

impl InequalityReport {
    fn new(name: &str, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: true,
            trials: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            worst_trial: None,
            tolerance,
            estimate: None,
            counterexample: None,
            note: String::new(),
        }
    }

    /// Records one trial; `fields` is only invoked for the first violation.
    fn record(&mut self, trial: usize, margin: f64, root_seed: u64, fields: impl FnOnce() -> Vec<(String, DiscreteField)>) {
        self.trials += 1;
        if margin < self.worst_margin {
            self.worst_margin = margin;
            self.worst_trial = Some(trial);
        }
        if margin < -self.tolerance {
            self.violations += 1;
            self.passed = false;
            if self.counterexample.is_none() {
                self.counterexample = Some(Counterexample { trial, root_seed, fields: fields() });
            }
        }
    }
}

fn require_positive_interior(u: &[f64], domain: &DirichletDomain) -> Result<()> {
    if let Some(&i) = domain.interior().iter().find(|&&i| !(u[i] > 0.0)) {
        return Err(Error::Precondition(format!("u must be positive on the interior (u[{i}] = {})", u[i])));
    }
    Ok(())
}

/// `(Σ_Ω (|v_i|^p / u_i^{p−1}) ((−Δ)^s_p u)_i μ_i, [v]^p)`.
pub fn picone_sides(u: &[f64], v: &[f64], kernel: &KernelMatrix, domain: &DirichletDomain) -> Result<(f64, f64)> {
    require_positive_interior(u, domain)?;
    let p = kernel.p();
    let lm = kernel.operator_times_measure(u)?;
    let lhs = csum(domain.interior().iter().map(|&i| abs_pow(v[i], p) / powf(u[i], p - 1.0) * lm[i]));
    Ok((lhs, kernel.gagliardo_seminorm_p(v)?))
}

pub const PICONE_TOL: f64 = 1e-10;

/// Single-pair Picone check: `LHS ≤ [v]^p + 1e-10·max(|LHS|, |RHS|, 1)`.
pub fn picone_check(u: &DiscreteField, v: &DiscreteField, kernel: &KernelMatrix, domain: &DirichletDomain) -> Result<InequalityReport> {
    let mut rep = InequalityReport::new("picone", PICONE_TOL);
    let (lhs, rhs) = picone_sides(u, v, kernel, domain)?;
    let margin = (rhs - lhs) / lhs.abs().max(rhs.abs()).max(1.0);
    rep.record(0, margin, 0, || vec![("u".into(), u.clone()), ("v".into(), v.clone())]);
    rep.note = format!("LHS = {lhs:.12e}, [v]^p = {rhs:.12e}");
    Ok(rep)
}

/// Positive `u` with log-uniform interior values in `[0.01, 1]`.
fn random_positive(domain: &DirichletDomain, rng: &mut crate::rng::Rng) -> DiscreteField {
    DiscreteField::from_interior(domain, |_| powf(10.0, rng.gen_range(-2.0..0.0)))
}

/// Randomized Picone sweep; trial `k` draws a positive `u` and a `v` that is
/// nonnegative for odd `k` and signed for even `k`.
pub fn picone_sweep(kernel: &KernelMatrix, domain: &DirichletDomain, trials: usize, seed: u64) -> Result<InequalityReport> {
    let mut rep = InequalityReport::new("picone", PICONE_TOL);
    for k in 0..trials {
        let mut rng = trial_rng(seed, k as u64);
        let u = random_positive(domain, &mut rng);
        let v = if k % 2 == 1 {
            DiscreteField::random_uniform(domain, 0.0, 1.0, &mut rng)
        } else {
            DiscreteField::random_uniform(domain, -1.0, 1.0, &mut rng)
        };
        let (lhs, rhs) = picone_sides(&u, &v, kernel, domain)?;
        let margin = (rhs - lhs) / lhs.abs().max(rhs.abs()).max(1.0);
        rep.record(k, margin, seed, || vec![("u".into(), u.clone()), ("v".into(), v.clone())]);
    }
    rep.note = "RHS is the seminorm [v]^p, which is at most the full norm".into();
    Ok(rep)
}

/// Relative gap `|LHS − [u]^p| / max(|LHS|, |[u]^p|, 1)` of the equality case `v = u`.
pub fn picone_equality_gap(u: &[f64], kernel: &KernelMatrix, domain: &DirichletDomain) -> Result<f64> {
    let (lhs, rhs) = picone_sides(u, u, kernel, domain)?;
    Ok((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1.0))
}

/// `R(u) = (Σ_Ω |u_i|^q μ_i)^{p/q} / [u]^p`; `None` when `[u]^p = 0`.
pub fn embedding_ratio(u: &[f64], kernel: &KernelMatrix, domain: &DirichletDomain, q: f64) -> Result<Option<f64>> {
    let p = kernel.p();
    let mu = kernel.measure();
    let semi = kernel.gagliardo_seminorm_p(u)?;
    if !(semi > 0.0) {
        return Ok(None);
    }
    let mass = csum(domain.interior().iter().map(|&i| abs_pow(u[i], q) * mu[i]));
    Ok(Some(powf(mass, p / q) / semi))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EmbeddingEstimate {
    pub c1: f64,
    pub q: f64,
    pub maximizer: DiscreteField,
    pub report: InequalityReport,
}

/// Number of best random starts refined by ascent.
const ASCENT_STARTS: usize = 4;
const ASCENT_ITERS: usize = 300;

/// Estimates the embedding constant `C₁` as the best `R(u)` over random starts,
/// the best few refined by normalized gradient ascent on `ln R`.
pub fn embedding_constant_estimate(
    kernel: &KernelMatrix,
    domain: &DirichletDomain,
    q: f64,
    trials: usize,
    seed: u64,
) -> Result<EmbeddingEstimate> {
    let p = kernel.p();
    let pstar = kernel.critical_exponent();
    if !(q >= p && q <= pstar) {
        return Err(invalid(format!("q = {q} must lie in [p, p*_s] = [{p}, {pstar}]")));
    }
    if trials == 0 {
        return Err(invalid("embedding estimate needs at least one trial"));
    }
    let mut top: Vec<(f64, usize, DiscreteField)> = Vec::new();
    for k in 0..trials {
        let u = trial_field(domain, seed, k);
        let Some(r) = embedding_ratio(&u, kernel, domain, q)? else { continue };
        top.push((r, k, u));
        top.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        top.truncate(ASCENT_STARTS);
    }
    if top.is_empty() {
        return Err(Error::Degenerate("every trial field had zero seminorm".into()));
    }
    let mut best: Option<(f64, usize, DiscreteField)> = None;
    for (r0, k, u0) in top {
        let (r, u) = ascend_ratio(kernel, domain, q, u0, r0)?;
        if best.as_ref().is_none_or(|b| r > b.0) {
            best = Some((r, k, u));
        }
    }
    let (c1, k, maximizer) = best.expect("nonempty");
    let mut report = InequalityReport::new("embedding", 0.0);
    report.trials = trials;
    report.worst_margin = 0.0;
    report.worst_trial = Some(k);
    report.estimate = Some(c1);
    report.note = format!(
        "C1 is an estimate (best of {trials} random starts, top {ASCENT_STARTS} refined by ascent); \
         judge it by stability under trial budget and mesh refinement"
    );
    Ok(EmbeddingEstimate { c1, q, maximizer, report })
}

/// Trial 0 is the interior indicator; odd trials draw `U(0,1)`, even `U(−1,1)`.
fn trial_field(domain: &DirichletDomain, seed: u64, k: usize) -> DiscreteField {
    if k == 0 {
        return DiscreteField::indicator(domain);
    }
    let mut rng = trial_rng(seed, k as u64);
    if k % 2 == 1 {
        DiscreteField::random_uniform(domain, 0.0, 1.0, &mut rng)
    } else {
        DiscreteField::random_uniform(domain, -1.0, 1.0, &mut rng)
    }
}

/// `μ`-preconditioned normalized ascent on `ln R`, fields kept at unit sup norm.
fn ascend_ratio(
    kernel: &KernelMatrix,
    domain: &DirichletDomain,
    q: f64,
    u0: DiscreteField,
    r0: f64,
) -> Result<(f64, DiscreteField)> {
    let p = kernel.p();
    let mu = kernel.measure();
    let interior = domain.interior();
    let mut u = u0.into_values();
    let mut r = r0;
    let mut step = 0.5;
    for _ in 0..ASCENT_ITERS {
        let semi = kernel.gagliardo_seminorm_p(&u)?;
        let mass = csum(interior.iter().map(|&i| abs_pow(u[i], q) * mu[i]));
        let lm = kernel.operator_times_measure(&u)?;
        let mut d = vec![0.0; u.len()];
        for &i in interior {
            d[i] = p * signed_pow(u[i], q) / mass - p * lm[i] / (mu[i] * semi);
        }
        let dn = libm::sqrt(csum(interior.iter().map(|&i| d[i] * d[i] * mu[i])));
        let un = libm::sqrt(csum(interior.iter().map(|&i| u[i] * u[i] * mu[i])));
        if !(dn > 0.0) {
            break;
        }
        let mut improved = false;
        while step > 1e-10 {
            let scale = step * un / dn;
            let mut cand: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + scale * b).collect();
            let sup = cand.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if sup > 0.0 {
                cand.iter_mut().for_each(|v| *v /= sup);
            }
            match embedding_ratio(&cand, kernel, domain, q)? {
                Some(rc) if rc > r => {
                    u = cand;
                    r = rc;
                    step = (step * 1.5).min(1.0);
                    improved = true;
                    break;
                }
                _ => step *= 0.5,
            }
        }
        if !improved {
            break;
        }
    }
    Ok((r, DiscreteField::from_raw(u)))
}

/// Estimates `C̃` in `‖u‖^p ≤ C̃ [u]^p` on fields vanishing off `Ω`.
///
/// The left inequality `[u]^p ≤ ‖u‖^p` is asserted exactly on every trial. The
/// estimate `C̃ = 1 + max R(u)` (with `q = p`) is computed at budgets `trials`
/// and `10·trials`; the check passes when the two agree within 10%.
pub fn norm_equivalence_check(kernel: &KernelMatrix, domain: &DirichletDomain, trials: usize, seed: u64) -> Result<InequalityReport> {
    if domain.exterior().is_empty() {
        return Err(Error::InvalidDomain("norm equivalence needs a nonempty exterior".into()));
    }
    let p = kernel.p();
    let mu = kernel.measure();
    let mut rep = InequalityReport::new("norm_equivalence", 0.0);
    for k in 0..trials {
        let u = trial_field(domain, seed, k);
        let semi = kernel.gagliardo_seminorm_p(&u)?;
        let full = semi + csum(domain.interior().iter().map(|&i| abs_pow(u[i], p) * mu[i]));
        let margin = if full >= semi { 0.0 } else { -1.0 };
        rep.record(k, margin, seed, || vec![("u".into(), u.clone())]);
    }
    let small = 1.0 + embedding_constant_estimate(kernel, domain, p, trials, seed)?.c1;
    let large = 1.0 + embedding_constant_estimate(kernel, domain, p, 10 * trials, seed)?.c1;
    let drift = rel_diff(small, large, f64::MIN_POSITIVE);
    rep.estimate = Some(large);
    let stable = small.is_finite() && large.is_finite() && drift < 0.1;
    rep.passed = rep.passed && stable;
    rep.note = format!(
        "C~ = {large:.6e} at {} trials, {small:.6e} at {trials} trials (drift {:.2}%); the left inequality holds exactly",
        10 * trials,
        100.0 * drift
    );
    Ok(rep)
}

/// Checks `[g∘v]^p ≤ l^p [v]^p` over random `v` with interior values in `U(−2, 2)`.
pub fn lipschitz_composition_check(
    kernel: &KernelMatrix,
    domain: &DirichletDomain,
    g: &dyn Fn(f64) -> f64,
    l: f64,
    trials: usize,
    seed: u64,
) -> Result<InequalityReport> {
    let g0 = g(0.0);
    if g0 != 0.0 {
        return Err(Error::Precondition(format!("g(0) = {g0}, but composition needs g(0) = 0")));
    }
    if !(l > 0.0) {
        return Err(invalid("Lipschitz constant must be positive"));
    }
    let p = kernel.p();
    let mut rep = InequalityReport::new("lipschitz_composition", 1e-12);
    for k in 0..trials {
        let mut rng = trial_rng(seed, k as u64);
        let v = DiscreteField::random_uniform(domain, -2.0, 2.0, &mut rng);
        let gv = DiscreteField::from_interior(domain, |i| g(v[i]));
        let lhs = kernel.gagliardo_seminorm_p(&gv)?;
        let rhs = powf(l, p) * kernel.gagliardo_seminorm_p(&v)?;
        let margin = (rhs - lhs) / rhs.max(f64::MIN_POSITIVE);
        rep.record(k, margin, seed, || vec![("v".into(), v.clone()), ("g_of_v".into(), gv.clone())]);
    }
    rep.note = format!("seminorm form with l = {l}");
    Ok(rep)
}

/// Source of wall-clock readings in seconds.
pub trait Clock {
    fn now(&self) -> f64;
}

/// Clock that always reads zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ManifoldFamily {
    /// Resolution is the subdivision level.
    Sphere,
    /// Resolution is the grid side.
    Torus,
}

/// Problem solved at every resolution of a study. The domain is the cap of
/// `cap_radius` around vertex 0, which is the same point at every resolution.
#[derive(Debug, Clone)]
pub struct StudySpec {
    pub family: ManifoldFamily,
    pub cap_radius: f64,
    pub params: KernelParams,
    pub nonlinearity: Nonlinearity,
    pub options: SolverOptions,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StudyRow {
    pub resolution: usize,
    pub n: usize,
    pub interior: usize,
    pub psi: f64,
    pub residual: f64,
    pub w_norm: f64,
    pub iterations: usize,
    pub status: SolverStatus,
    pub assembly_seconds: f64,
    pub solve_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StudyTable {
    pub rows: Vec<StudyRow>,
    /// Every solve converged (the trivial solution counts when it is the answer).
    pub complete: bool,
    /// Consecutive `ψ*` gaps are non-increasing.
    pub cauchy: bool,
    pub note: String,
}

/// Kernel assembly routine, so callers can substitute a parallel one.
pub type Assembler<'a> = Box<dyn Fn(&ManifoldMesh, KernelParams) -> Result<KernelMatrix> + 'a>;

/// Solves one problem on a resolution ladder with direct minimization from
/// `u₀ = 0` and tabulates `(n, ψ*, residual, ‖u*‖)` plus timings.
pub fn convergence_study(
    spec: &StudySpec,
    resolutions: &[usize],
    assemble: &Assembler<'_>,
    clock: &dyn Clock,
) -> Result<StudyTable> {
    if resolutions.len() < 3 {
        return Err(invalid(format!("a convergence study needs at least 3 resolutions (got {})", resolutions.len())));
    }
    if spec.nonlinearity.weight.is_some() {
        return Err(invalid("a spatial weight is tied to one mesh and cannot be used in a study"));
    }
    let mut rows = Vec::new();
    let mut complete = true;
    for &res in resolutions {
        let mesh = match spec.family {
            ManifoldFamily::Sphere => build_sphere_with_cap(res as u32, DEFAULT_MAX_SPHERE_LEVEL)?,
            ManifoldFamily::Torus => build_flat_torus(res)?,
        };
        let domain = select_domain(&mesh, &DomainSpec::Cap { center: 0, radius: spec.cap_radius })?;
        let t0 = clock.now();
        let kernel = assemble(&mesh, spec.params)?;
        let t1 = clock.now();
        let e = EnergyFunctional::new(&kernel, &domain, &spec.nonlinearity)?;
        let report = minimize_direct(&e, &vec![0.0; mesh.len()], &spec.options)?;
        let t2 = clock.now();
        let ok = matches!(report.status, SolverStatus::Converged | SolverStatus::DegenerateTrivial);
        rows.push(StudyRow {
            resolution: res,
            n: mesh.len(),
            interior: domain.interior().len(),
            psi: report.energy.psi,
            residual: report.residual,
            w_norm: report.w_norm,
            iterations: report.iterations,
            status: report.status,
            assembly_seconds: t1 - t0,
            solve_seconds: t2 - t1,
        });
        if !ok {
            complete = false;
            break;
        }
    }
    let gaps: Vec<f64> = rows.windows(2).map(|w| (w[1].psi - w[0].psi).abs()).collect();
    let cauchy = complete && gaps.windows(2).all(|w| w[1] <= w[0]);
    let note = if !complete {
        format!("study incomplete: solve at resolution {} did not converge", rows.last().map_or(0, |r| r.resolution))
    } else if !cauchy {
        format!("psi* gaps are not decreasing: {gaps:?}")
    } else {
        format!("psi* gaps: {gaps:?}")
    };
    Ok(StudyTable { rows, complete, cauchy, note })
}
