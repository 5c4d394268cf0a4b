//! Configuration files, run directories, checkpoint/resume and the
//! subcommands of the `soler` binary.

mod checks;
pub mod commands;
mod config;
mod run;

pub use checks::{algebra_suite, rows_to_csv, CheckRow, ALGEBRA_TOLERANCE};
pub use config::{
    parse_config, DataSection, DiagnosticsSection, GridSection, ModelKind, ModelSection, OutputSection, ResolvedConfig,
    RunConfig, TimeSection,
};
pub use run::{
    resume, run, snapshot_name, RunManifest, RunOptions, RunStatus, AUDIT_FILE, CONFIG_FILE, MANIFEST_FILE,
    SCATTER_FILE, SERIES_FILE, SNAPSHOT_DIR,
};
