//! Experiment driver: versioned configs, deterministic artifacts and a manifest.

mod config;
mod paper_map;
mod run;

pub use config::{ExperimentConfig, ExperimentKind, FamilySource, ModulusConfig, SCHEMA_VERSION};
pub use paper_map::{paper_map_report, Entry, ENTRIES, OUT_OF_SCOPE};
pub use run::{run, sha256_hex, verify_manifest, RunOutput, MANIFEST};
