//! Sweep front-end for the driven-chain steady-state library: run
//! configurations, deterministic parameter scans over drive amplitude,
//! dispersion, dephasing and seeds, CSV datasets, SVG figures, and a built-in
//! invariant suite.

pub mod check;
pub mod config;
pub mod plot;
pub mod svg;
pub mod sweep;
pub mod table;

pub use config::{Picture, SweepConfig};
pub use sweep::{run_sweep, RunSummary};
