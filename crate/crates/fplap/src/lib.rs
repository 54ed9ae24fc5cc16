//! Files, configuration and command-line harness for `fplap-core`.
//!
//! Every command reads one TOML run configuration, writes its artifacts into
//! an output directory and returns a process exit status: `0` on success, `1`
//! when the computation ran but did not succeed, `2` for invalid input.
//! Output files start with a provenance header (tool version, SHA-256 of the
//! configuration file, root seed). Wall-clock timings only appear in
//! `*timing.csv` files, so all other outputs are byte-identical across
//! repeated runs with the same configuration and seed.

pub mod assembly;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod output;

pub use commands::{Context, Outcome};
pub use config::{Check, LoadedConfig, RunConfig};
pub use error::{FplapError, Result};
pub use output::Provenance;
