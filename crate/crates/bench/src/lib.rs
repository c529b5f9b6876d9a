//! Case runner for `nanovib-core`: TOML case files, concurrent parameter
//! sweeps, mesh-convergence studies and reproduction of the reference tables.

pub mod config;
pub mod report;
pub mod run;
pub mod tables;

pub use config::CaseConfig;
pub use report::{ReportRow, Summary};
