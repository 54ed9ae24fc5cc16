use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::SolverReport;
use crate::error::{Error, Result};
use crate::nonlinearity::{check_monotone_f5, default_positive_samples, CertificateReport};
use crate::numeric::{powf, CompensatedSum};
use crate::problem::EnergyFunctional;

/// Comparison of two solutions `u = reports[i]`, `v = reports[j]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PairComparison {
    pub i: usize,
    pub j: usize,
    pub sup_distance: f64,
    /// `S = Σ_Ω (u^p − v^p)(f(u)/u^{p−1} − f(v)/v^{p−1}) μ`; `≤ 0` under the monotone condition.
    pub s_term: f64,
    /// `Σ_Ω (u^p + v^p)(|f(u)/u^{p−1}| + |f(v)/v^{p−1}|) μ`.
    pub s_scale: f64,
    /// `[u]^p − Σ (v^p/u^{p−1}) L(u) μ + [v]^p − Σ (u^p/v^{p−1}) L(v) μ`; `≥ 0` by Picone.
    pub picone_side: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct UniquenessReport {
    pub passed: bool,
    pub monotone_certificate: CertificateReport,
    pub pairs: Vec<PairComparison>,
    pub max_distance: f64,
    /// Largest `|S| / scale`.
    pub max_relative_s: f64,
    pub distance_tol: f64,
    pub s_tol: f64,
    pub note: String,
}

pub const UNIQUENESS_DISTANCE_TOL: f64 = 1e-6;
pub const UNIQUENESS_S_TOL: f64 = 1e-8;

/// Pairwise comparison of converged positive solutions.
pub fn uniqueness_check(e: &EnergyFunctional<'_>, reports: &[SolverReport]) -> Result<UniquenessReport> {
    if reports.len() < 2 {
        return Err(Error::Precondition("uniqueness check needs at least two reports".into()));
    }
    for (k, r) in reports.iter().enumerate() {
        if !r.converged() {
            return Err(Error::Precondition(format!("report {k} has status {}", r.status.label())));
        }
        e.check_field(&r.solution)?;
        if let Some(&i) = e.domain().interior().iter().find(|&&i| !(r.solution[i] > 0.0)) {
            return Err(Error::Precondition(format!(
                "report {k} has non-positive value {} at interior vertex {i}; the Picone argument needs u > 0",
                r.solution[i]
            )));
        }
    }
    let p = e.p();
    let monotone_certificate = check_monotone_f5(e.nonlinearity(), p, &default_positive_samples());
    let mut pairs = Vec::new();
    let mut max_distance = 0.0f64;
    let mut max_relative_s = 0.0f64;
    for i in 0..reports.len() {
        for j in (i + 1)..reports.len() {
            let c = compare(e, &reports[i].solution, &reports[j].solution, i, j)?;
            max_distance = max_distance.max(c.sup_distance);
            let rel = if c.s_scale > 0.0 { c.s_term.abs() / c.s_scale } else { c.s_term.abs() };
            max_relative_s = max_relative_s.max(rel);
            pairs.push(c);
        }
    }
    let close = max_distance <= UNIQUENESS_DISTANCE_TOL && max_relative_s <= UNIQUENESS_S_TOL;
    let passed = monotone_certificate.passed && close;
    let note = if !monotone_certificate.passed {
        format!("monotone certificate failed ({}); uniqueness is not claimed", monotone_certificate.detail)
    } else if close {
        "all solutions coincide within tolerance".into()
    } else {
        format!("solutions differ: max sup distance {max_distance:.3e}, max |S|/scale {max_relative_s:.3e}")
    };
    Ok(UniquenessReport {
        passed,
        monotone_certificate,
        pairs,
        max_distance,
        max_relative_s,
        distance_tol: UNIQUENESS_DISTANCE_TOL,
        s_tol: UNIQUENESS_S_TOL,
        note,
    })
}

fn compare(e: &EnergyFunctional<'_>, u: &[f64], v: &[f64], i: usize, j: usize) -> Result<PairComparison> {
    let p = e.p();
    let nl = e.nonlinearity();
    let mu = e.kernel().measure();
    let lu = e.kernel().operator_times_measure(u)?;
    let lv = e.kernel().operator_times_measure(v)?;
    let (mut s, mut scale, mut cross_u, mut cross_v) =
        (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
    let mut sup = 0.0f64;
    for &k in e.domain().interior() {
        let (a, b) = (u[k], v[k]);
        sup = sup.max((a - b).abs());
        let (ap, bp) = (powf(a, p), powf(b, p));
        let ha = nl.eval_f(k, a)? / powf(a, p - 1.0);
        let hb = nl.eval_f(k, b)? / powf(b, p - 1.0);
        s.add((ap - bp) * (ha - hb) * mu[k]);
        scale.add((ap + bp) * (ha.abs() + hb.abs()) * mu[k]);
        cross_u.add(bp / powf(a, p - 1.0) * lu[k]);
        cross_v.add(ap / powf(b, p - 1.0) * lv[k]);
    }
    let k = e.kernel();
    let picone_side =
        k.gagliardo_seminorm_p(u)? - cross_u.value() + k.gagliardo_seminorm_p(v)? - cross_v.value();
    Ok(PairComparison {
        i,
        j,
        sup_distance: sup,
        s_term: s.value(),
        s_scale: scale.value(),
        picone_side,
    })
}
