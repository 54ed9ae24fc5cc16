use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::line_search::{armijo, bb_step, cap_step};
use super::{Method, SolverOptions, SolverReport, SolverStatus, TraceRow};
use crate::error::{invalid, Error, Result};
use crate::field::DiscreteField;
use crate::nonlinearity::{
    check_ar_f4, check_growth_f1, check_limits_f2_f3, default_growth_samples, default_positive_samples,
    CertificateReport, LimitConfig,
};
use crate::problem::EnergyFunctional;
use crate::rng::trial_rng;

/// Result of the doubling search along a ray.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EndpointReport {
    pub t0: f64,
    pub psi: f64,
    /// Every `(t, ψ(t·v))` evaluated.
    pub trace: Vec<(f64, f64)>,
}

/// Smallest `t = 2^k ≥ 1` with `ψ(t·v) < 0`.
pub fn find_negative_endpoint(e: &EnergyFunctional<'_>, v: &[f64], t_max: f64) -> Result<EndpointReport> {
    e.check_field(v)?;
    if v.iter().all(|x| *x == 0.0) {
        return Err(invalid("endpoint search needs a nonzero direction"));
    }
    let mut trace = Vec::new();
    let mut t = 1.0;
    while t <= t_max {
        let u: Vec<f64> = v.iter().map(|x| t * x).collect();
        let psi = e.psi(&u)?;
        trace.push((t, psi));
        if psi < 0.0 {
            return Ok(EndpointReport { t0: t, psi, trace });
        }
        t *= 2.0;
    }
    Err(Error::EndpointNotFound { t_max })
}

/// Sampled lower bound of `ψ` on the sphere `‖u‖ = b`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GeometryCertificate {
    pub b: f64,
    /// Minimum sampled `ψ`.
    pub a_estimate: f64,
    pub samples: usize,
    pub argmin_sample: usize,
    pub passed: bool,
}

/// Sample 0 is the interior indicator; odd samples draw interior values from
/// `U(0,1)`, even ones from `U(−1,1)`; every sample is rescaled to W-norm `b`.
pub fn verify_mountain_pass_geometry(
    e: &EnergyFunctional<'_>,
    b: f64,
    n_samples: usize,
    seed: u64,
) -> Result<GeometryCertificate> {
    if !(b > 0.0 && b.is_finite()) || n_samples == 0 {
        return Err(invalid("geometry check needs b > 0 and at least one sample"));
    }
    let mut best = (f64::INFINITY, 0usize);
    for k in 0..n_samples {
        let u = geometry_sample(e, k, seed);
        let norm = e.w_norm(&u)?;
        if norm == 0.0 {
            continue;
        }
        let psi = e.psi(&u.scaled(b / norm))?;
        if psi < best.0 {
            best = (psi, k);
        }
    }
    Ok(GeometryCertificate { b, a_estimate: best.0, samples: n_samples, argmin_sample: best.1, passed: best.0 > 0.0 })
}

pub(crate) fn geometry_sample(e: &EnergyFunctional<'_>, k: usize, seed: u64) -> DiscreteField {
    let d = e.domain();
    if k == 0 {
        return DiscreteField::indicator(d);
    }
    let mut rng = trial_rng(seed, k as u64);
    if k % 2 == 1 {
        DiscreteField::random_uniform(d, 0.0, 1.0, &mut rng)
    } else {
        DiscreteField::random_uniform(d, -1.0, 1.0, &mut rng)
    }
}

/// Geometry certificates for each radius in `bs`.
pub fn geometry_sweep(
    e: &EnergyFunctional<'_>,
    bs: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<GeometryCertificate>> {
    bs.iter().map(|&b| verify_mountain_pass_geometry(e, b, n_samples, seed)).collect()
}

fn mountain_pass_certificates(e: &EnergyFunctional<'_>) -> Result<Vec<CertificateReport>> {
    let nl = e.nonlinearity();
    let p = e.p();
    let pstar = e.kernel().critical_exponent();
    let q = nl.q_growth;
    if !(p < q && q < pstar) {
        return Err(Error::Precondition(format!(
            "mountain pass needs p < q < p*_s (p = {p}, q = {q}, p*_s = {pstar})"
        )));
    }
    let f1 = check_growth_f1(nl, &default_growth_samples(1e3));
    let (_, f3) = check_limits_f2_f3(nl, p, &LimitConfig::default());
    let mu = nl
        .mu_ar
        .ok_or_else(|| Error::Precondition("mountain pass needs a declared AR exponent".into()))?;
    let f4 = check_ar_f4(nl, mu, p, &default_positive_samples());
    for r in [&f1, &f3, &f4] {
        if !r.passed {
            return Err(Error::Precondition(format!("{} certificate failed: {}", r.condition.label(), r.detail)));
        }
    }
    Ok(vec![f1, f3, f4])
}

/// Window (in iterations) over which a stalled path descent is detected.
const STALL_WINDOW: usize = 100;

/// Mountain-pass solve between `0` and `t0·direction`.
///
/// Phase A deforms a piecewise-linear path: the node of largest `ψ` (smallest
/// index on ties) takes an Armijo step along `−g` with its component along the
/// local path tangent removed, and every `redistribute_every` iterations nodes
/// are re-spaced by `μ`-weighted arc length. Between redistributions the path
/// maximum never increases. Once the maximum stalls, phase B refines the top
/// node by descent on `z ↦ max_t ψ(t z)`, whose critical points are critical
/// points of `ψ`.
pub fn mountain_pass(
    e: &EnergyFunctional<'_>,
    direction: &[f64],
    endpoint: &EndpointReport,
    geometry: &GeometryCertificate,
    opts: &SolverOptions,
) -> Result<SolverReport> {
    opts.validate()?;
    e.check_field(direction)?;
    let certificates = if opts.enforce_certificates { mountain_pass_certificates(e)? } else { Vec::new() };
    if !geometry.passed {
        return Err(Error::Precondition(format!(
            "geometry certificate at b = {} has a = {} <= 0",
            geometry.b, geometry.a_estimate
        )));
    }
    let end: Vec<f64> = direction.iter().map(|x| endpoint.t0 * x).collect();
    if !(e.psi(&end)? < 0.0) {
        return Err(Error::Precondition("mountain-pass endpoint must have negative energy".into()));
    }
    let thr = opts.nontrivial_threshold;
    let params = opts.armijo;
    let m = opts.path_nodes;
    let mut nodes: Vec<Vec<f64>> =
        (0..m).map(|k| end.iter().map(|x| x * (k as f64 / (m - 1) as f64)).collect()).collect();
    let mut vals = nodes.iter().map(|z| e.psi(z)).collect::<Result<Vec<f64>>>()?;
    let mut trace = Vec::new();
    let mut history: Vec<f64> = Vec::new();
    let mut alpha = params.initial_step;
    let mut it = 0usize;
    let phase_a_limit = opts.max_iter / 2;
    let mut notes: Vec<String> = Vec::new();

    let finish = |u: Vec<f64>,
                  status: SolverStatus,
                  message: String,
                  iterations: usize,
                  trace: Vec<TraceRow>,
                  certificates: Vec<CertificateReport>|
     -> Result<SolverReport> {
        let energy = e.eval_energy(&u)?;
        let level_check = Some(energy.psi >= geometry.a_estimate - opts.tol);
        Ok(SolverReport {
            method: Method::MountainPass,
            status,
            message,
            residual: e.residual_norm(&u)?,
            w_norm: e.w_norm(&u)?,
            solution: DiscreteField::from_raw(u),
            energy,
            iterations,
            wall_time: None,
            probe: None,
            geometry: Some(*geometry),
            endpoint: Some(endpoint.clone()),
            level_check,
            certificates,
            trace,
        })
    };

    // Phase A: max-node path deformation.
    let mut top;
    loop {
        top = argmax_interior(&vals);
        let z = &nodes[top];
        let diff: Vec<f64> = z.iter().zip(&end).map(|(a, b)| a - b).collect();
        if e.w_norm(z)? < thr || e.w_norm(&diff)? < thr {
            let msg = format!("path collapse: max node {top} is within {thr:e} of an endpoint");
            return finish(nodes[top].clone(), SolverStatus::Degenerate, msg, it, trace, certificates);
        }
        let g = e.eval_gradient(z)?.into_values();
        let res = e.dual_norm(&g);
        if res <= opts.tol {
            trace.push(TraceRow { iter: it, psi: vals[top], residual: res, step: 0.0, delta_psi: 0.0 });
            notes.push(format!("path descent converged after {it} iterations"));
            return finish(nodes[top].clone(), SolverStatus::Converged, notes.join("; "), it, trace, certificates);
        }
        let stalled = history.len() > STALL_WINDOW && {
            let old = history[history.len() - 1 - STALL_WINDOW];
            old - vals[top] <= 1e-9 * vals[top].abs().max(f64::MIN_POSITIVE)
        };
        if it >= phase_a_limit || stalled {
            break;
        }
        let tangent: Vec<f64> = nodes[top + 1].iter().zip(&nodes[top - 1]).map(|(a, b)| a - b).collect();
        let tt = e.mu_dot(&tangent, &tangent);
        let ratio = if tt > 0.0 { e.mu_dot(&g, &tangent) / tt } else { 0.0 };
        let dir: Vec<f64> = g.iter().zip(&tangent).map(|(gi, ti)| gi - ratio * ti).collect();
        let slope = e.mu_dot(&g, &dir);
        if !(slope > 0.0) {
            break;
        }
        let alpha0 = cap_step(alpha, &dir, z, opts.step_cap, thr);
        let accepted = armijo(&params, alpha0, slope, |a| {
            let cand: Vec<f64> = z.iter().zip(&dir).map(|(x, d)| x - a * d).collect();
            let delta = e.psi_difference(z, &cand)?;
            Ok((cand, delta))
        })?;
        let Some(acc) = accepted else { break };
        it += 1;
        trace.push(TraceRow { iter: it, psi: vals[top], residual: res, step: acc.alpha, delta_psi: acc.delta });
        nodes[top] = acc.field;
        vals[top] = e.psi(&nodes[top])?;
        alpha = 2.0 * acc.alpha;
        if it % opts.redistribute_every == 0 {
            redistribute(e, &mut nodes, &mut vals)?;
        }
        history.push(vals[argmax_interior(&vals)]);
    }
    notes.push(format!("path descent stalled after {it} iterations at node {top}; refining along rays"));

    // Phase B: descent on the ray-maximum functional.
    let z = nodes[top].clone();
    let Some(t) = ray_max(e, &z)? else {
        let msg = format!("no interior maximum of ψ along the ray through node {top}");
        return finish(z, SolverStatus::Degenerate, msg, it, trace, certificates);
    };
    let mut u: Vec<f64> = z.iter().map(|x| t * x).collect();
    let mut g = e.eval_gradient(&u)?.into_values();
    let mut res = e.dual_norm(&g);
    let mut psi = e.psi(&u)?;
    trace.push(TraceRow { iter: it, psi, residual: res, step: 0.0, delta_psi: 0.0 });
    let mut alpha = params.initial_step;
    let mut status = SolverStatus::MaxIter;
    while it < opts.max_iter {
        if res <= opts.tol {
            status = SolverStatus::Converged;
            break;
        }
        if e.w_norm(&u)? < thr {
            status = SolverStatus::Degenerate;
            notes.push("ray refinement collapsed to u = 0".into());
            break;
        }
        let ratio = e.mu_dot(&g, &u) / e.mu_dot(&u, &u);
        let gp: Vec<f64> = g.iter().zip(&u).map(|(gi, ui)| gi - ratio * ui).collect();
        let slope = e.mu_dot(&g, &gp);
        let alpha0 = cap_step(alpha, &gp, &u, opts.step_cap, thr);
        let accepted = armijo(&params, alpha0, slope, |a| {
            let cand: Vec<f64> = u.iter().zip(&gp).map(|(x, d)| x - a * d).collect();
            match ray_max(e, &cand)? {
                Some(t) => {
                    let next: Vec<f64> = cand.iter().map(|x| t * x).collect();
                    let delta = e.psi_difference(&u, &next)?;
                    Ok((next, delta))
                }
                None => Ok((cand, f64::INFINITY)),
            }
        })?;
        let Some(acc) = accepted else {
            status = SolverStatus::Degenerate;
            notes.push(format!("ray refinement line search failed (residual {res:.3e})"));
            break;
        };
        let g_new = e.eval_gradient(&acc.field)?.into_values();
        let s: Vec<f64> = acc.field.iter().zip(&u).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        alpha = bb_step(e.mu_dot(&s, &s), e.mu_dot(&s, &y), params.initial_step);
        u = acc.field;
        g = g_new;
        res = e.dual_norm(&g);
        psi = e.psi(&u)?;
        it += 1;
        trace.push(TraceRow { iter: it, psi, residual: res, step: acc.alpha, delta_psi: acc.delta });
    }
    if status == SolverStatus::MaxIter {
        notes.push(format!("iteration limit {} reached (residual {res:.3e})", opts.max_iter));
    }
    let report = finish(u, status, String::new(), it, trace, certificates)?;
    if report.level_check == Some(false) {
        notes.push(format!(
            "critical value {} is below the geometry level a = {}",
            report.energy.psi, geometry.a_estimate
        ));
    }
    Ok(SolverReport { message: notes.join("; "), ..report })
}

/// Interior node with the largest value; ties go to the smallest index.
fn argmax_interior(vals: &[f64]) -> usize {
    let mut k = 1;
    for j in 2..vals.len() - 1 {
        if vals[j] > vals[k] {
            k = j;
        }
    }
    k
}

/// Re-spaces interior nodes uniformly in `μ`-weighted arc length.
fn redistribute(e: &EnergyFunctional<'_>, nodes: &mut [Vec<f64>], vals: &mut [f64]) -> Result<()> {
    let m = nodes.len();
    let mut cum = vec![0.0; m];
    for k in 1..m {
        let d: Vec<f64> = nodes[k].iter().zip(&nodes[k - 1]).map(|(a, b)| a - b).collect();
        cum[k] = cum[k - 1] + libm::sqrt(e.mu_dot(&d, &d));
    }
    let total = cum[m - 1];
    if !(total > 0.0) {
        return Ok(());
    }
    let mut fresh: Vec<Vec<f64>> = Vec::with_capacity(m);
    fresh.push(nodes[0].clone());
    let mut seg = 0;
    for j in 1..m - 1 {
        let target = total * j as f64 / (m - 1) as f64;
        while seg + 1 < m - 1 && cum[seg + 1] < target {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let w = if len > 0.0 { ((target - cum[seg]) / len).clamp(0.0, 1.0) } else { 0.0 };
        fresh.push(nodes[seg].iter().zip(&nodes[seg + 1]).map(|(a, b)| a + w * (b - a)).collect());
    }
    fresh.push(nodes[m - 1].clone());
    let fresh_vals = fresh.iter().map(|z| e.psi(z)).collect::<Result<Vec<f64>>>()?;
    nodes.clone_from_slice(&fresh);
    vals.copy_from_slice(&fresh_vals);
    Ok(())
}

/// Maximizer of `t ↦ ψ(t z)` near `t = 1`: the root of `⟨g(tz), z⟩_μ`, found by
/// geometric bracketing and the Illinois variant of regula falsi.
fn ray_max(e: &EnergyFunctional<'_>, z: &[f64]) -> Result<Option<f64>> {
    let phi = |t: f64| -> Result<f64> {
        let u: Vec<f64> = z.iter().map(|x| t * x).collect();
        Ok(e.mu_dot(&e.eval_gradient(&u)?, z))
    };
    let f1 = phi(1.0)?;
    if f1 == 0.0 {
        return Ok(Some(1.0));
    }
    let (mut lo, mut flo, mut hi, mut fhi);
    if f1 > 0.0 {
        (lo, flo) = (1.0, f1);
        hi = 1.25;
        fhi = phi(hi)?;
        while fhi > 0.0 {
            (lo, flo) = (hi, fhi);
            hi *= 1.25;
            if hi > 1e12 {
                return Ok(None);
            }
            fhi = phi(hi)?;
        }
    } else {
        (hi, fhi) = (1.0, f1);
        lo = 0.8;
        flo = phi(lo)?;
        while flo <= 0.0 {
            (hi, fhi) = (lo, flo);
            lo *= 0.8;
            if lo < 1e-12 {
                return Ok(None);
            }
            flo = phi(lo)?;
        }
    }
    let mut side = 0i8;
    let mut t = 0.5 * (lo + hi);
    for _ in 0..200 {
        t = (lo * fhi - hi * flo) / (fhi - flo);
        if !(t > lo && t < hi) {
            t = 0.5 * (lo + hi);
        }
        let ft = phi(t)?;
        if ft == 0.0 {
            return Ok(Some(t));
        }
        if ft > 0.0 {
            (lo, flo) = (t, ft);
            if side == 1 {
                fhi *= 0.5;
            }
            side = 1;
        } else {
            (hi, fhi) = (t, ft);
            if side == -1 {
                flo *= 0.5;
            }
            side = -1;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    Ok(Some(t))
}
