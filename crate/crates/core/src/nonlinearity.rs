//! Reaction terms `f(x, t)`, their primitives `F(x, t) = ∫_0^t f(x, s) ds`, and
//! sampled certificates for the structural conditions:
//!
//! * growth: `|f(x,t)| ≤ β(1 + |t|^{q−1})`
//! * limits: `f(x,t)/|t|^{q−1} → 0` as `|t| → ∞`, `f(x,ζ)/|ζ|^{p−1} → 0` as `ζ → 0`
//! * Ambrosetti–Rabinowitz: `0 < μ F(x,t) ≤ t f(x,t)` for `t > 0`, with `μ > p`
//! * monotonicity: `f(x,t)/t^{p−1}` strictly decreasing on `(0, ∞)`
//!
//! Certificates are evaluated on documented sample grids; they are surrogates
//! for the analytic statements, not proofs.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::numeric::{abs_pow, abs_pow_diff, logspace, powf, signed_pow};
use crate::special::{adaptive_simpson, lower_incomplete_gamma};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "form", rename_all = "snake_case"))]
pub enum NonlinearityForm {
    /// `f = λ|t|^{r−2} t`, `F = λ|t|^r / r`.
    Power { lambda: f64, r: f64 },
    /// `f = c|t|^e exp(−t)`.
    DampedPower { c: f64, exponent: f64 },
    /// Linear interpolation of `(t_k, f_k)`; `F` is integrated exactly.
    Table {
        t: Vec<f64>,
        f: Vec<f64>,
        #[cfg_attr(feature = "serde", serde(skip))]
        cumulative: Vec<f64>,
        #[cfg_attr(feature = "serde", serde(skip))]
        offset: f64,
    },
}

/// Reaction term with its declared certificate parameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Nonlinearity {
    pub form: NonlinearityForm,
    /// Extend by `f(x,t) = 0` for `t ≤ 0`.
    pub positive_part: bool,
    /// Optional spatial amplitude `a(x)` multiplying `f`.
    pub weight: Option<Vec<f64>>,
    /// Growth constant `β`.
    pub beta: f64,
    /// Growth exponent `q`.
    pub q_growth: f64,
    /// Ambrosetti–Rabinowitz exponent `μ`.
    pub mu_ar: Option<f64>,
}

impl Nonlinearity {
    fn with_form(form: NonlinearityForm, beta: f64, q_growth: f64) -> Self {
        Self { form, positive_part: false, weight: None, beta, q_growth, mu_ar: None }
    }

    /// Power law `λ|t|^{r−2} t`, declared with `β = max(|λ|, 1)`, `q = r` and,
    /// when `r > 1`, `μ_AR = r`.
    pub fn power(lambda: f64, r: f64) -> Result<Self> {
        if !(r > 1.0 && r.is_finite() && lambda.is_finite()) {
            return Err(invalid(format!("power nonlinearity needs finite lambda and r > 1 (got r = {r})")));
        }
        let mut nl = Self::with_form(NonlinearityForm::Power { lambda, r }, lambda.abs().max(1.0), r);
        nl.mu_ar = Some(r);
        Ok(nl)
    }

    /// `f ≡ 0` (a power law with `λ = 0`).
    pub fn zero() -> Self {
        Self::with_form(NonlinearityForm::Power { lambda: 0.0, r: 2.0 }, 1.0, 2.0)
    }

    /// `c|t|^e exp(−t)`, declared with `β = c`, `q = e + 1`.
    pub fn damped_power(c: f64, exponent: f64) -> Result<Self> {
        if !(c > 0.0 && exponent > 0.0 && exponent.is_finite()) {
            return Err(invalid("example nonlinearity needs c > 0 and a positive exponent"));
        }
        Ok(Self::with_form(NonlinearityForm::DampedPower { c, exponent }, c, exponent + 1.0))
    }

    /// Tabulated `f` with linear interpolation; the table must bracket `t = 0`.
    pub fn table(t: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if t.len() != f.len() || t.len() < 2 {
            return Err(invalid("table needs at least two (t, f) rows of equal length"));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("table t values must be strictly increasing"));
        }
        if t.iter().chain(&f).any(|v| !v.is_finite()) {
            return Err(invalid("table values must be finite"));
        }
        if !(t[0] <= 0.0 && *t.last().unwrap() >= 0.0) {
            return Err(invalid("table range must contain t = 0 so that F(t) = ∫_0^t f is defined"));
        }
        let mut cumulative = vec![0.0; t.len()];
        for k in 1..t.len() {
            cumulative[k] = cumulative[k - 1] + 0.5 * (t[k] - t[k - 1]) * (f[k] + f[k - 1]);
        }
        let offset = table_integral(&t, &f, &cumulative, 0.0)?;
        let beta = f.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
        Ok(Self::with_form(NonlinearityForm::Table { t, f, cumulative, offset }, beta, 2.0))
    }

    pub fn with_certificate(mut self, beta: f64, q_growth: f64) -> Self {
        self.beta = beta;
        self.q_growth = q_growth;
        self
    }

    pub fn with_ar_exponent(mut self, mu: Option<f64>) -> Self {
        self.mu_ar = mu;
        self
    }

    pub fn with_positive_part(mut self, on: bool) -> Self {
        self.positive_part = on;
        self
    }

    pub fn with_weight(mut self, weight: Option<Vec<f64>>) -> Self {
        self.weight = weight;
        self
    }

    /// `true` when `f ≡ 0` identically.
    pub fn is_zero(&self) -> bool {
        let form_zero = match &self.form {
            NonlinearityForm::Power { lambda, .. } => *lambda == 0.0,
            NonlinearityForm::DampedPower { .. } => false,
            NonlinearityForm::Table { f, .. } => f.iter().all(|v| *v == 0.0),
        };
        form_zero || self.weight.as_ref().is_some_and(|w| w.iter().all(|a| *a == 0.0))
    }

    #[inline]
    fn amplitude(&self, x: usize) -> f64 {
        self.weight.as_ref().map_or(1.0, |w| w[x])
    }

    /// Vertices whose amplitudes are distinct enough to matter for certificates.
    fn sample_vertices(&self) -> Vec<usize> {
        match &self.weight {
            None => vec![0],
            Some(w) => (0..w.len()).collect(),
        }
    }

    /// `f(x, t)`.
    pub fn eval_f(&self, x: usize, t: f64) -> Result<f64> {
        if self.positive_part && t <= 0.0 {
            return Ok(0.0);
        }
        let a = self.amplitude(x);
        let base = match &self.form {
            NonlinearityForm::Power { lambda, r } => lambda * signed_pow(t, *r),
            NonlinearityForm::DampedPower { c, exponent } => c * abs_pow(t, *exponent) * libm::exp(-t),
            NonlinearityForm::Table { t: ts, f, .. } => table_value(ts, f, t)?,
        };
        Ok(a * base)
    }

    /// `F(x, t) = ∫_0^t f(x, s) ds`.
    #[allow(non_snake_case)]
    pub fn eval_F(&self, x: usize, t: f64) -> Result<f64> {
        if self.positive_part && t <= 0.0 {
            return Ok(0.0);
        }
        let a = self.amplitude(x);
        let base = match &self.form {
            NonlinearityForm::Power { lambda, r } => lambda * abs_pow(t, *r) / r,
            NonlinearityForm::DampedPower { c, exponent } => c * damped_power_primitive(*exponent, t),
            NonlinearityForm::Table { t: ts, f, cumulative, offset } => {
                table_integral(ts, f, cumulative, t)? - offset
            }
        };
        Ok(a * base)
    }

    /// `F(x, b) − F(x, a)`, free of cancellation for power laws.
    pub fn primitive_difference(&self, x: usize, a: f64, b: f64) -> Result<f64> {
        if let NonlinearityForm::Power { lambda, r } = self.form {
            let (a, b) = if self.positive_part { (a.max(0.0), b.max(0.0)) } else { (a, b) };
            return Ok(self.amplitude(x) * lambda * abs_pow_diff(a, b, r) / r);
        }
        Ok(self.eval_F(x, b)? - self.eval_F(x, a)?)
    }
}

fn table_value(ts: &[f64], f: &[f64], t: f64) -> Result<f64> {
    let (lo, hi) = (ts[0], ts[ts.len() - 1]);
    if !(t >= lo && t <= hi) {
        return Err(Error::Domain { t, lo, hi });
    }
    let k = segment(ts, t);
    let w = (t - ts[k]) / (ts[k + 1] - ts[k]);
    Ok(f[k] + w * (f[k + 1] - f[k]))
}

/// `∫_{t_0}^t` of the interpolant.
fn table_integral(ts: &[f64], f: &[f64], cumulative: &[f64], t: f64) -> Result<f64> {
    let ft = table_value(ts, f, t)?;
    let k = segment(ts, t);
    Ok(cumulative[k] + 0.5 * (t - ts[k]) * (f[k] + ft))
}

fn segment(ts: &[f64], t: f64) -> usize {
    // index k with ts[k] <= t <= ts[k+1]
    match ts.binary_search_by(|v| v.total_cmp(&t)) {
        Ok(k) => k.min(ts.len() - 2),
        Err(k) => (k - 1).min(ts.len() - 2),
    }
}

/// `∫_0^t |s|^e e^{−s} ds`.
fn damped_power_primitive(e: f64, t: f64) -> f64 {
    if t >= 0.0 {
        lower_incomplete_gamma(e + 1.0, t)
    } else {
        let w = -t;
        let scale = powf(w, e + 1.0) * libm::exp(w);
        -adaptive_simpson(&|s| powf(s, e) * libm::exp(s), 0.0, w, 1e-13 * scale.max(1e-300))
    }
}

/// Which structural condition a certificate addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Condition {
    /// Growth bound.
    F1,
    /// Subcritical limit at infinity.
    F2,
    /// Limit at zero.
    F3,
    /// Ambrosetti–Rabinowitz.
    F4,
    /// Monotone quotient.
    F5,
}

impl Condition {
    pub fn label(&self) -> &'static str {
        match self {
            Condition::F1 => "f1",
            Condition::F2 => "f2",
            Condition::F3 => "f3",
            Condition::F4 => "f4",
            Condition::F5 => "f5",
        }
    }
}

/// Outcome of a sampled condition check.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CertificateReport {
    pub condition: Condition,
    pub passed: bool,
    pub samples: usize,
    /// Smallest relative margin seen (negative means violated).
    pub worst_margin: f64,
    /// First failing sample `t`, if any.
    pub witness_t: Option<f64>,
    pub witness_vertex: Option<usize>,
    pub detail: String,
}

impl CertificateReport {
    fn new(condition: Condition) -> Self {
        Self {
            condition,
            passed: true,
            samples: 0,
            worst_margin: f64::INFINITY,
            witness_t: None,
            witness_vertex: None,
            detail: String::new(),
        }
    }

    fn record(&mut self, margin: f64, t: f64, x: usize) {
        self.samples += 1;
        if margin < self.worst_margin {
            self.worst_margin = margin;
        }
        if margin < 0.0 && self.passed {
            self.passed = false;
            self.witness_t = Some(t);
            self.witness_vertex = Some(x);
        }
    }

    fn fail(&mut self, t: f64, x: usize, detail: String) {
        if self.passed {
            self.passed = false;
            self.witness_t = Some(t);
            self.witness_vertex = Some(x);
            self.detail = detail;
        }
        self.worst_margin = f64::NEG_INFINITY;
    }
}

/// Grid `{0} ∪ logspace(1e-6, t_max, 200)` used for the growth certificate.
pub fn default_growth_samples(t_max: f64) -> Vec<f64> {
    let mut v = vec![0.0];
    v.extend(logspace(1e-6, t_max, 200));
    v
}

/// Grid `logspace(1e-3, 1e3, 121)` used for the AR and monotonicity certificates.
pub fn default_positive_samples() -> Vec<f64> {
    logspace(1e-3, 1e3, 121)
}

const REL_TOL: f64 = 1e-12;

/// Growth bound `|f(x,t)| ≤ β(1 + |t|^{q−1})` at `±t` for every sample `t`.
pub fn check_growth_f1(nl: &Nonlinearity, t_samples: &[f64]) -> CertificateReport {
    let mut rep = CertificateReport::new(Condition::F1);
    if !(nl.beta > 0.0 && nl.q_growth > 1.0) {
        rep.fail(0.0, 0, format!("declared β = {} and q = {} must satisfy β > 0, q > 1", nl.beta, nl.q_growth));
        return rep;
    }
    for x in nl.sample_vertices() {
        for &t in t_samples {
            for tt in [t, -t] {
                let bound = nl.beta * (1.0 + powf(tt.abs(), nl.q_growth - 1.0));
                match nl.eval_f(x, tt) {
                    Ok(f) => rep.record((bound - f.abs()) / bound + REL_TOL, tt, x),
                    Err(e) => rep.fail(tt, x, format!("{e}")),
                }
            }
        }
    }
    if rep.passed {
        rep.detail = format!("|f| <= {}(1 + |t|^{}) on the sample grid", nl.beta, nl.q_growth - 1.0);
    } else if rep.detail.is_empty() {
        rep.detail = format!("growth bound violated at t = {}", rep.witness_t.unwrap_or(f64::NAN));
    }
    rep
}

/// Thresholds for the limit certificates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitConfig {
    pub t_max: f64,
    pub zeta_min: f64,
    pub threshold: f64,
}

impl Default for LimitConfig {
    fn default() -> Self {
        Self { t_max: 1e6, zeta_min: 1e-6, threshold: 1e-3 }
    }
}

/// Limit checks at infinity (`f/|t|^{q−1}`) and at zero (`f/|ζ|^{p−1}`).
///
/// Each ratio is sampled on decades toward the limit (both signs, every vertex);
/// a check passes when the last sample is below `threshold` and not larger than
/// the one before it.
pub fn check_limits_f2_f3(nl: &Nonlinearity, p: f64, cfg: &LimitConfig) -> (CertificateReport, CertificateReport) {
    let decades = |from: f64, to: f64| -> Vec<f64> {
        let k = libm::round(libm::log10(to / from).abs()) as usize;
        logspace(from.min(to), from.max(to), k.max(1) + 1)
    };
    let grow = decades(1.0, cfg.t_max);
    let mut shrink = decades(cfg.zeta_min, 1.0);
    shrink.reverse();
    let f2 = limit_report(nl, Condition::F2, &grow, nl.q_growth - 1.0, cfg.threshold);
    let f3 = limit_report(nl, Condition::F3, &shrink, p - 1.0, cfg.threshold);
    (f2, f3)
}

fn limit_report(nl: &Nonlinearity, cond: Condition, grid: &[f64], power: f64, threshold: f64) -> CertificateReport {
    let mut rep = CertificateReport::new(cond);
    let mut ratios = Vec::with_capacity(grid.len());
    for &t in grid {
        let mut worst = 0.0f64;
        for x in nl.sample_vertices() {
            for tt in [t, -t] {
                match nl.eval_f(x, tt) {
                    Ok(f) => worst = worst.max(f.abs() / powf(t, power)),
                    Err(e) => {
                        rep.fail(tt, x, format!("{e}"));
                        return rep;
                    }
                }
            }
        }
        ratios.push(worst);
        rep.samples += 1;
    }
    let last = *ratios.last().unwrap();
    let prev = ratios[ratios.len().saturating_sub(2)];
    let t_last = *grid.last().unwrap();
    rep.worst_margin = (threshold - last) / threshold;
    if last <= threshold && last <= prev {
        rep.detail = format!("ratio {last:.3e} at t = {t_last:e} (threshold {threshold:e})");
    } else {
        rep.passed = false;
        rep.witness_t = Some(t_last);
        rep.detail = format!(
            "ratio did not decay below {threshold:e}: {last:.3e} at t = {t_last:e} (previous {prev:.3e})"
        );
    }
    rep
}

/// AR check `0 < μ F(x,t) ≤ t f(x,t)` on positive samples; `μ > p` is required.
pub fn check_ar_f4(nl: &Nonlinearity, mu: f64, p: f64, t_samples: &[f64]) -> CertificateReport {
    let mut rep = CertificateReport::new(Condition::F4);
    if !(mu > p) {
        rep.fail(0.0, 0, format!("AR exponent μ = {mu} must exceed p = {p}"));
        return rep;
    }
    for x in nl.sample_vertices() {
        for &t in t_samples.iter().filter(|t| **t > 0.0) {
            let (big_f, f) = match (nl.eval_F(x, t), nl.eval_f(x, t)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(e), _) | (_, Err(e)) => {
                    rep.fail(t, x, format!("{e}"));
                    continue;
                }
            };
            let lhs = mu * big_f;
            let rhs = t * f;
            if !(lhs > 0.0) {
                rep.record(-1.0, t, x);
                continue;
            }
            rep.record((rhs - lhs) / lhs.abs().max(rhs.abs()) + REL_TOL, t, x);
        }
    }
    rep.detail = if rep.passed {
        format!("0 < {mu}·F <= t·f on the sample grid")
    } else if rep.detail.is_empty() {
        let t = rep.witness_t.unwrap_or(f64::NAN);
        let x = rep.witness_vertex.unwrap_or(0);
        let (bf, f) = (nl.eval_F(x, t).unwrap_or(f64::NAN), nl.eval_f(x, t).unwrap_or(f64::NAN));
        format!("violated at t = {t}: μF = {:.6e}, t·f = {:.6e}", mu * bf, t * f)
    } else {
        rep.detail.clone()
    };
    rep
}

/// `h(t) = f(x,t)/t^{p−1}` strictly decreasing across consecutive positive samples.
pub fn check_monotone_f5(nl: &Nonlinearity, p: f64, t_samples: &[f64]) -> CertificateReport {
    let mut rep = CertificateReport::new(Condition::F5);
    let ts: Vec<f64> = t_samples.iter().copied().filter(|t| *t > 0.0).collect();
    if ts.windows(2).any(|w| !(w[1] > w[0])) {
        rep.fail(0.0, 0, "samples must be strictly increasing".into());
        return rep;
    }
    'outer: for x in nl.sample_vertices() {
        let mut prev: Option<(f64, f64)> = None;
        for &t in &ts {
            let h = match nl.eval_f(x, t) {
                Ok(f) => f / powf(t, p - 1.0),
                Err(e) => {
                    rep.fail(t, x, format!("{e}"));
                    continue 'outer;
                }
            };
            if let Some((t0, h0)) = prev {
                let margin = (h0 - h) / h0.abs().max(h.abs()).max(1e-300);
                let was_passing = rep.passed;
                rep.record(if h < h0 { margin } else { margin.min(-0.0).min(-f64::MIN_POSITIVE) }, t, x);
                if was_passing && !rep.passed {
                    rep.detail = format!("h({t0}) = {h0:.6e} <= h({t}) = {h:.6e}: not strictly decreasing");
                }
            }
            prev = Some((t, h));
        }
    }
    if rep.passed {
        rep.detail = "f(t)/t^(p-1) strictly decreasing on the sample grid".into();
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rel_diff;

    #[test]
    fn power_closed_forms() {
        let nl = Nonlinearity::power(1.0, 3.0).unwrap();
        assert_eq!(nl.eval_f(0, 2.0).unwrap(), 4.0);
        assert!(rel_diff(nl.eval_F(0, 2.0).unwrap(), 8.0 / 3.0, 1.0) < 1e-15);
        assert_eq!(nl.eval_f(0, -2.0).unwrap(), -4.0);
        assert_eq!(nl.eval_F(0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn damped_power_value_at_one() {
        let nl = Nonlinearity::damped_power(1.0, 2.0).unwrap();
        assert!((nl.eval_f(0, 1.0).unwrap() - libm::exp(-1.0)).abs() < 1e-15);
        assert!((nl.eval_f(0, 1.0).unwrap() - 0.3679).abs() < 1e-4);
        assert_eq!(nl.eval_F(0, 0.0).unwrap(), 0.0);
        // F(2) = 2 − e^{−2}(4 + 4 + 2)
        let exact = 2.0 - 10.0 * libm::exp(-2.0);
        assert!(rel_diff(nl.eval_F(0, 2.0).unwrap(), exact, 1e-300) < 1e-13);
    }

    #[test]
    fn damped_power_primitive_negative_side() {
        let nl = Nonlinearity::damped_power(1.0, 2.0).unwrap();
        // ∫_0^{-1} s² e^{−s} ds = −(e − 2)
        let exact = -(core::f64::consts::E - 2.0);
        assert!(rel_diff(nl.eval_F(0, -1.0).unwrap(), exact, 1e-300) < 1e-10);
    }

    #[test]
    fn table_interpolates_and_integrates_exactly() {
        let nl = Nonlinearity::table(vec![-1.0, 0.0, 2.0], vec![-1.0, 0.0, 4.0]).unwrap();
        assert_eq!(nl.eval_f(0, 1.0).unwrap(), 2.0);
        // f(t) = 2t on [0,2]: F(1) = 1
        assert!((nl.eval_F(0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        // f(t) = t on [-1,0]: F(-1) = ∫_0^{-1} t dt = 1/2
        assert!((nl.eval_F(0, -1.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(nl.eval_F(0, 0.0).unwrap(), 0.0);
        assert!(matches!(nl.eval_f(0, 3.0), Err(Error::Domain { .. })));
        assert!(Nonlinearity::table(vec![1.0, 2.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn positive_part_truncates() {
        let nl = Nonlinearity::power(1.0, 1.5).unwrap().with_positive_part(true);
        assert_eq!(nl.eval_f(0, -4.0).unwrap(), 0.0);
        assert_eq!(nl.eval_F(0, -4.0).unwrap(), 0.0);
        assert_eq!(nl.eval_f(0, 4.0).unwrap(), 2.0);
        let d = nl.primitive_difference(0, -1.0, 1.0).unwrap();
        assert!((d - 1.0 / 1.5).abs() < 1e-15);
    }

    #[test]
    fn primitive_difference_matches_plain_difference() {
        let nl = Nonlinearity::power(2.0, 2.5).unwrap();
        for &(a, b) in &[(0.3, 0.7), (-1.0, 2.0), (0.0, 1.0), (1.5, -0.2)] {
            let plain = nl.eval_F(0, b).unwrap() - nl.eval_F(0, a).unwrap();
            assert!(rel_diff(nl.primitive_difference(0, a, b).unwrap(), plain, 1e-300) < 1e-13);
        }
    }

    #[test]
    fn weight_scales_f_and_f_primitive() {
        let nl = Nonlinearity::power(1.0, 3.0).unwrap().with_weight(Some(vec![1.0, 2.0]));
        assert_eq!(nl.eval_f(1, 2.0).unwrap(), 8.0);
        assert_eq!(nl.eval_f(0, 2.0).unwrap(), 4.0);
    }

    #[test]
    fn growth_certificate_cases() {
        let samples = default_growth_samples(1e3);
        let exact = Nonlinearity::power(1.0, 3.0).unwrap().with_certificate(1.0, 3.0);
        let r = check_growth_f1(&exact, &samples);
        assert!(r.passed, "{r:?}");
        assert!(r.worst_margin < 1e-5);

        let too_small_q = Nonlinearity::power(1.0, 3.0).unwrap().with_certificate(1.0, 2.5);
        let r = check_growth_f1(&too_small_q, &samples);
        assert!(!r.passed);
        assert!(r.witness_t.unwrap().abs() > 1.0);

        let ex = Nonlinearity::damped_power(1.0, 2.0).unwrap().with_positive_part(true);
        assert!(check_growth_f1(&ex, &samples).passed);
        // without truncation the example grows like |t|^p e^{|t|} for t < 0
        let raw = Nonlinearity::damped_power(1.0, 2.0).unwrap();
        let r = check_growth_f1(&raw, &samples);
        assert!(!r.passed && r.witness_t.unwrap() < 0.0);
    }

    #[test]
    fn limit_certificate_cases() {
        let cfg = LimitConfig::default();
        let sub = Nonlinearity::power(1.0, 2.0).unwrap().with_certificate(1.0, 3.0);
        assert!(check_limits_f2_f3(&sub, 2.0, &cfg).0.passed);
        let sup = Nonlinearity::power(1.0, 3.0).unwrap().with_certificate(1.0, 4.0);
        let (f2, f3) = check_limits_f2_f3(&sup, 2.0, &cfg);
        assert!(f2.passed && f3.passed);
        let lin = Nonlinearity::power(0.5, 2.0).unwrap();
        let (_, f3) = check_limits_f2_f3(&lin, 2.0, &cfg);
        assert!(!f3.passed);
        assert!(f3.detail.contains("5.000e-1"), "{}", f3.detail);
    }

    #[test]
    fn ar_certificate_cases() {
        let samples = default_positive_samples();
        let nl = Nonlinearity::power(1.0, 3.0).unwrap();
        assert!(check_ar_f4(&nl, 3.0, 2.0, &samples).passed);
        assert!(!check_ar_f4(&nl, 3.5, 2.0, &samples).passed);
        assert!(!check_ar_f4(&nl, 1.5, 2.0, &samples).passed);
        let ex = Nonlinearity::damped_power(1.0, 2.0).unwrap();
        let r = check_ar_f4(&ex, 3.0, 2.0, &[50.0, 100.0]);
        assert!(!r.passed);
        assert_eq!(r.witness_t, Some(50.0));
    }

    #[test]
    fn monotone_certificate_cases() {
        let samples = default_positive_samples();
        let sub = Nonlinearity::power(1.0, 1.5).unwrap();
        assert!(check_monotone_f5(&sub, 2.0, &samples).passed);
        let flat = Nonlinearity::power(1.0, 2.0).unwrap();
        assert!(!check_monotone_f5(&flat, 2.0, &samples).passed);
        let ex = Nonlinearity::damped_power(1.0, 2.0).unwrap();
        let r = check_monotone_f5(&ex, 2.0, &[0.1, 0.5, 2.0]);
        assert!(!r.passed);
        assert_eq!(r.witness_t, Some(0.5));
    }
}
