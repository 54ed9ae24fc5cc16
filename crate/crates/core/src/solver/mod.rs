//! Solvers producing nontrivial discrete weak solutions.
//!
//! * [`minimize_direct`]: Armijo gradient descent on `ψ` for sublinear growth
//!   (`q < p`), with a ray probe that escapes the trivial critical point.
//! * [`mountain_pass`]: max-node path deformation between `0` and a
//!   negative-energy endpoint for superlinear growth (`p < q < p*_s`), finished by
//!   a local min-max refinement along rays.
//! * [`uniqueness_check`]: pairwise comparison of positive solutions.
//!
//! Convergence is always judged by the dual-norm residual recomputed from the
//! returned field.

mod direct;
mod line_search;
mod mountain_pass;
mod uniqueness;

use alloc::string::String;
use alloc::vec::Vec;

pub use direct::{minimize_direct, ray_probe, RayProbe};
pub use mountain_pass::{
    find_negative_endpoint, geometry_sweep, mountain_pass, verify_mountain_pass_geometry, EndpointReport,
    GeometryCertificate,
};
pub use uniqueness::{uniqueness_check, PairComparison, UniquenessReport};

use crate::error::{invalid, Result};
use crate::field::DiscreteField;
use crate::nonlinearity::CertificateReport;
use crate::problem::EnergyBreakdown;

/// Backtracking line-search parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ArmijoParams {
    pub c1: f64,
    pub backtrack: f64,
    pub initial_step: f64,
    pub max_backtracks: u32,
}

impl Default for ArmijoParams {
    fn default() -> Self {
        Self { c1: 1e-4, backtrack: 0.5, initial_step: 1.0, max_backtracks: 60 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SolverOptions {
    /// Residual tolerance in the dual norm.
    pub tol: f64,
    pub max_iter: usize,
    pub armijo: ArmijoParams,
    /// Mountain-pass path nodes, endpoints included.
    pub path_nodes: usize,
    /// Arc-length redistribution period of the path.
    pub redistribute_every: usize,
    /// No trial step moves a component by more than `step_cap · max(‖u‖_∞, threshold)`.
    pub step_cap: f64,
    pub seed: u64,
    /// W-norm below which a field counts as trivial.
    pub nontrivial_threshold: f64,
    /// Refuse to run when the sampled condition certificates fail.
    pub enforce_certificates: bool,
    /// Largest ray parameter tried by the endpoint search.
    pub endpoint_t_max: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 10_000,
            armijo: ArmijoParams::default(),
            path_nodes: 41,
            redistribute_every: 10,
            step_cap: 0.5,
            seed: 0,
            nontrivial_threshold: 1e-6,
            enforce_certificates: true,
            endpoint_t_max: 1e6,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let a = &self.armijo;
        let positive = [
            ("tol", self.tol),
            ("armijo c1", a.c1),
            ("armijo backtrack", a.backtrack),
            ("armijo initial_step", a.initial_step),
            ("step_cap", self.step_cap),
            ("nontrivial_threshold", self.nontrivial_threshold),
            ("endpoint_t_max", self.endpoint_t_max),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            return Err(invalid(alloc::format!("solver option {name} must be positive and finite (got {v})")));
        }
        if self.tol >= 1.0 {
            return Err(invalid("solver tolerance must be below 1"));
        }
        if a.c1 >= 1.0 || a.backtrack >= 1.0 {
            return Err(invalid("armijo c1 and backtrack factor must lie in (0, 1)"));
        }
        if self.max_iter == 0 || a.max_backtracks == 0 || self.redistribute_every == 0 {
            return Err(invalid("iteration counts must be positive"));
        }
        if self.path_nodes < 3 {
            return Err(invalid("a mountain-pass path needs at least 3 nodes"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Method {
    Direct,
    MountainPass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SolverStatus {
    Converged,
    MaxIter,
    /// Converged to `u ≈ 0`.
    DegenerateTrivial,
    /// Line-search failure or path collapse; see the report message.
    Degenerate,
}

impl SolverStatus {
    pub fn label(&self) -> &'static str {
        match self {
            SolverStatus::Converged => "converged",
            SolverStatus::MaxIter => "max-iter",
            SolverStatus::DegenerateTrivial => "degenerate-trivial",
            SolverStatus::Degenerate => "degenerate",
        }
    }
}

/// One accepted iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TraceRow {
    pub iter: usize,
    pub psi: f64,
    pub residual: f64,
    /// Accepted step length (0 for the initial row).
    pub step: f64,
    /// `ψ` change of the accepted step, summed termwise.
    pub delta_psi: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SolverReport {
    pub method: Method,
    pub status: SolverStatus,
    pub message: String,
    pub solution: DiscreteField,
    pub energy: EnergyBreakdown,
    pub residual: f64,
    pub w_norm: f64,
    pub iterations: usize,
    /// Seconds; filled in by callers that own a clock.
    pub wall_time: Option<f64>,
    pub probe: Option<RayProbe>,
    pub geometry: Option<GeometryCertificate>,
    pub endpoint: Option<EndpointReport>,
    /// `ψ(u*) ≥ a − tol` for mountain-pass runs.
    pub level_check: Option<bool>,
    pub certificates: Vec<CertificateReport>,
    pub trace: Vec<TraceRow>,
}

impl SolverReport {
    pub fn converged(&self) -> bool {
        self.status == SolverStatus::Converged
    }
}
