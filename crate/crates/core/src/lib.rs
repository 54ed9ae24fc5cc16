//! Discrete fractional p-Laplacian on sampled compact Riemannian manifolds.
//!
//! The crate is `no_std` (with `alloc`). It covers the whole numerical
//! pipeline: manifold sampling with geodesic distances and lumped measures,
//! the singular nonlocal kernel, the energy functional and its gradient,
//! direct-minimization and mountain-pass solvers, and randomized certificates
//! for the functional inequalities the variational theory relies on.
//!
//! File formats, configuration and the command-line harness live in the
//! `fplap` companion crate.
//!
//! Conventions used throughout:
//!
//! * `[u]^p` is the *full ordered* double sum `Σ_{i≠j} |u_i − u_j|^p W_ij`.
//! * Gradients are represented in the `μ`-weighted inner product
//!   `⟨g, v⟩_μ = Σ_i g_i v_i μ_i`.
//! * Fields vanish on the exterior of the Dirichlet domain.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod error;
pub mod field;
pub mod kernel;
pub mod manifold;
pub mod matrix;
pub mod nonlinearity;
pub mod numeric;
pub mod problem;
pub mod rng;
pub mod solver;
pub mod special;
pub mod verification;

pub use error::{Error, Result};
pub use field::DiscreteField;
pub use kernel::{KernelMatrix, KernelParams, SingularityPolicy};
pub use manifold::{DirichletDomain, DomainSpec, ManifoldMesh, MeshValidationReport};
pub use matrix::DenseMatrix;
pub use nonlinearity::{CertificateReport, Nonlinearity, NonlinearityForm};
pub use problem::{EnergyBreakdown, EnergyFunctional};
pub use solver::{SolverOptions, SolverReport, SolverStatus};
