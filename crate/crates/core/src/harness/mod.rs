//! Sweeps, diagnostics, reports and the acceptance suite.

pub mod acceptance;
pub mod checks;
pub mod config;
pub mod report;
pub mod solve;
pub mod sweep;

pub use config::{Config, Format, RawConfig, SweepCase};
pub use report::{emit_all, emit_report};
pub use sweep::{run_sweep, SweepRecord, SweepReport};
