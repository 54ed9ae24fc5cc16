use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::line_search::{armijo, bb_step, cap_step};
use super::{Method, SolverOptions, SolverReport, SolverStatus, TraceRow};
use crate::error::{Error, Result};
use crate::field::DiscreteField;
use crate::nonlinearity::{check_growth_f1, default_growth_samples, CertificateReport};
use crate::problem::EnergyFunctional;

/// Best point of the ray scan `t ↦ ψ(t·v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RayProbe {
    pub t: f64,
    pub psi: f64,
}

/// Minimum of `ψ(t·v)` over `t = 2^k`, `k = −40, …, 20`.
pub fn ray_probe(e: &EnergyFunctional<'_>, v: &[f64]) -> Result<RayProbe> {
    e.check_field(v)?;
    let mut best = RayProbe { t: 0.0, psi: 0.0 };
    for k in -40..=20 {
        let t = libm::ldexp(1.0, k);
        let u: Vec<f64> = v.iter().map(|x| t * x).collect();
        let psi = e.psi(&u)?;
        if psi < best.psi {
            best = RayProbe { t, psi };
        }
    }
    Ok(best)
}

fn direct_certificates(e: &EnergyFunctional<'_>) -> Result<Vec<CertificateReport>> {
    let nl = e.nonlinearity();
    let p = e.p();
    let f1 = check_growth_f1(nl, &default_growth_samples(1e3));
    if !f1.passed {
        return Err(Error::Precondition(format!("growth certificate failed: {}", f1.detail)));
    }
    if !nl.is_zero() && !(nl.q_growth < p) {
        return Err(Error::Precondition(format!(
            "direct minimization needs a declared growth exponent q < p (q = {}, p = {p})",
            nl.q_growth
        )));
    }
    Ok(vec![f1])
}

struct Descent {
    u: Vec<f64>,
    status: SolverStatus,
    message: String,
    iterations: usize,
}

/// Armijo gradient descent from `u`; iteration numbers continue from `offset`.
fn descend(
    e: &EnergyFunctional<'_>,
    mut u: Vec<f64>,
    opts: &SolverOptions,
    offset: usize,
    trace: &mut Vec<TraceRow>,
) -> Result<Descent> {
    let params = opts.armijo;
    let mut g = e.eval_gradient(&u)?.into_values();
    let mut res = e.dual_norm(&g);
    let mut psi = e.psi(&u)?;
    trace.push(TraceRow { iter: offset, psi, residual: res, step: 0.0, delta_psi: 0.0 });
    let mut alpha_next = params.initial_step;
    let mut it = offset;
    let mut status = SolverStatus::MaxIter;
    let mut message = String::new();
    while it < opts.max_iter {
        if res <= opts.tol {
            status = SolverStatus::Converged;
            break;
        }
        let gg = e.mu_dot(&g, &g);
        let alpha0 = cap_step(alpha_next, &g, &u, opts.step_cap, opts.nontrivial_threshold);
        let accepted = armijo(&params, alpha0, gg, |a| {
            let cand: Vec<f64> = u.iter().zip(&g).map(|(x, d)| x - a * d).collect();
            let delta = e.psi_difference(&u, &cand)?;
            Ok((cand, delta))
        })?;
        let Some(acc) = accepted else {
            status = SolverStatus::Degenerate;
            message = format!(
                "line search found no decrease after {} backtracks (residual {res:.3e})",
                params.max_backtracks
            );
            break;
        };
        let g_new = e.eval_gradient(&acc.field)?.into_values();
        let s: Vec<f64> = acc.field.iter().zip(&u).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        alpha_next = bb_step(e.mu_dot(&s, &s), e.mu_dot(&s, &y), params.initial_step);
        u = acc.field;
        g = g_new;
        res = e.dual_norm(&g);
        psi = e.psi(&u)?;
        it += 1;
        trace.push(TraceRow { iter: it, psi, residual: res, step: acc.alpha, delta_psi: acc.delta });
    }
    if status == SolverStatus::MaxIter {
        message = format!("iteration limit {} reached (residual {res:.3e})", opts.max_iter);
    }
    Ok(Descent { u, status, message, iterations: it })
}

/// Direct minimization of `ψ` for sublinear growth.
///
/// Starts from `u0`, or from the best point of the ray probe along the interior
/// indicator when `u0` is trivial. A run that converges to `u = 0` is restarted
/// once from the probe point if that point has negative energy.
pub fn minimize_direct(e: &EnergyFunctional<'_>, u0: &[f64], opts: &SolverOptions) -> Result<SolverReport> {
    opts.validate()?;
    e.check_field(u0)?;
    let certificates = if opts.enforce_certificates { direct_certificates(e)? } else { Vec::new() };
    let thr = opts.nontrivial_threshold;
    let indicator = DiscreteField::indicator(e.domain());
    let mut notes: Vec<String> = Vec::new();
    let mut probe = None;
    let mut start = u0.to_vec();
    if e.w_norm(&start)? < thr {
        let pr = ray_probe(e, &indicator)?;
        if pr.psi < 0.0 {
            start = indicator.scaled(pr.t).into_values();
            notes.push(format!("initial field is trivial; started from the ray probe at t = {:e}", pr.t));
        }
        probe = Some(pr);
    }
    let mut trace = Vec::new();
    let mut run = descend(e, start, opts, 0, &mut trace)?;
    if run.status == SolverStatus::Converged && e.w_norm(&run.u)? < thr && probe.is_none() {
        let pr = ray_probe(e, &indicator)?;
        probe = Some(pr);
        if pr.psi < 0.0 {
            notes.push(format!("converged to u = 0; restarted from the ray probe at t = {:e}", pr.t));
            run = descend(e, indicator.scaled(pr.t).into_values(), opts, run.iterations, &mut trace)?;
        }
    }
    let energy = e.eval_energy(&run.u)?;
    let residual = e.residual_norm(&run.u)?;
    let w_norm = e.w_norm(&run.u)?;
    let mut status = run.status;
    if status == SolverStatus::Converged && w_norm < thr {
        status = SolverStatus::DegenerateTrivial;
        notes.push("converged to the trivial solution u = 0 and the ray probe found no negative energy".into());
    }
    if !run.message.is_empty() {
        notes.push(run.message);
    }
    Ok(SolverReport {
        method: Method::Direct,
        status,
        message: notes.join("; "),
        solution: DiscreteField::from_raw(run.u),
        energy,
        residual,
        w_norm,
        iterations: run.iterations,
        wall_time: None,
        probe,
        geometry: None,
        endpoint: None,
        level_check: None,
        certificates,
        trace,
    })
}
