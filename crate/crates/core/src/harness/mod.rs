//! Config-driven experiment runner.
//!
//! # Config grammar
//!
//! ```text
//! # comment (a `#` anywhere starts a comment)
//! seed = 7                     # top-level keys come before any section
//! [grid]                       # keys below are prefixed with `grid.`
//! d = 2
//! L = 3
//! [scaling]
//! lambda = 0.5, 0.35, 0.25
//! ```
//!
//! A dotted key written before any section is the same as the sectioned
//! form: `grid.d = 2` at the top equals `d = 2` under `[grid]`.
//!
//! One `key = value` per line. Lists are comma separated; a value may be
//! wrapped in double quotes. Every key is listed in [`KEYS`] with its
//! default; unknown keys, duplicates, type mismatches and missing required
//! keys are errors carrying the offending line number.
//!
//! # Outputs
//!
//! Each command writes CSV files (a `# schema=<id>` line, a header, rows
//! with 17 significant digits) into the output directory, then
//! `manifest.txt` last, via an atomic rename. The manifest lists every file
//! with its schema, the config hash, `git describe`, wall time, and the full
//! resolved config. CSV bodies depend only on the config text, so reruns
//! are byte-identical.

mod config;
mod manifest;
mod run;

pub use config::{parse_config, parse_str, ExperimentConfig, InitialState, KeySpec, KEYS};
pub use manifest::{git_describe, Manifest, MANIFEST_NAME, MANIFEST_SCHEMA};
pub use run::{
    run, Command, ResultTable, AUDIT_SCHEMA, KINETIC_LOG_SCHEMA, KINETIC_SCHEMA, PROFILE_SCHEMA, SWEEP_SCHEMA,
    TRAJECTORY_SCHEMA,
};
