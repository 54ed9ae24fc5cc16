use alloc::vec::Vec;

use super::ArmijoParams;
use crate::error::Result;

pub(super) struct Accepted {
    pub alpha: f64,
    pub field: Vec<f64>,
    pub delta: f64,
}

/// Backtracking from `alpha0` until `Δψ ≤ −c₁ α · slope` and `Δψ < 0`.
///
/// `trial(α)` returns the candidate field and its energy change.
pub(super) fn armijo<F>(params: &ArmijoParams, alpha0: f64, slope: f64, mut trial: F) -> Result<Option<Accepted>>
where
    F: FnMut(f64) -> Result<(Vec<f64>, f64)>,
{
    let mut alpha = alpha0;
    for _ in 0..params.max_backtracks {
        let (field, delta) = trial(alpha)?;
        if delta < 0.0 && delta <= -params.c1 * alpha * slope {
            return Ok(Some(Accepted { alpha, field, delta }));
        }
        alpha *= params.backtrack;
    }
    Ok(None)
}

/// Shrinks `alpha` so that `alpha · ‖dir‖_∞ ≤ cap · max(‖u‖_∞, floor)`.
pub(super) fn cap_step(alpha: f64, dir: &[f64], u: &[f64], cap: f64, floor: f64) -> f64 {
    let dmax = dir.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let umax = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let limit = cap * umax.max(floor);
    if dmax * alpha > limit {
        limit / dmax
    } else {
        alpha
    }
}

/// Barzilai–Borwein step `⟨s,s⟩/⟨s,y⟩`, or `fallback` when the curvature is not positive.
pub(super) fn bb_step(ss: f64, sy: f64, fallback: f64) -> f64 {
    if sy > 0.0 && ss > 0.0 && (ss / sy).is_finite() {
        ss / sy
    } else {
        fallback
    }
}
