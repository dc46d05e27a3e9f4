//! Orchestration behind the `heartnet` binary: configuration resolution,
//! the experiment commands, run manifests and replay, reports and plots.
//!
//! Every command computes its outputs in memory first and writes them in
//! one pass at the end, so a failing run leaves no partial files.

mod commands;
mod config;
mod plot;
mod report;

pub use commands::{
    build, fold_plan, replay, run, sha256_hex, Command, FileDigest, Manifest, OutputBundle,
    RunOutcome, MANIFEST_FILE, MANIFEST_FORMAT,
};
pub use config::{
    default_grids, load_grid_file, ConfigFile, ExperimentConfig, Format, Overrides,
    DEFAULT_LATENT_SIZES, OUT_DIR_ENV,
};
pub use plot::{bar_chart, line_chart, Bar, Series};
pub use report::{
    best_per_method, comparison_csv, comparison_inputs, comparison_markdown, comparison_table,
    load_results, merge_results, parse_results_csv, reference_table, results_csv, ComparisonRow,
    ReferenceRow, ReferenceTable,
};

use crate::error::{Error, ErrorKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_NUMERIC: i32 = 5;

pub fn exit_code(e: &Error) -> i32 {
    match e.kind() {
        ErrorKind::Validation => EXIT_VALIDATION,
        ErrorKind::Io => EXIT_IO,
        ErrorKind::Numeric => EXIT_NUMERIC,
    }
}
