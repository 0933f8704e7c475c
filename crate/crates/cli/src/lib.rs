//! Configuration-driven runner that checks families of rates against
//! scenarios and sequences and writes CSV/JSON reports.

pub mod config;
pub mod eval;
pub mod runner;

pub use config::{ConfigError, ExperimentConfig, RateSpec};
pub use runner::{run, write_reports, Overrides, RunReport, CSV_HEADER};
