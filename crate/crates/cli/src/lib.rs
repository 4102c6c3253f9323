//! Config parsing, run manifests and CSV/JSON artifacts for batch runs.

pub mod artifact;
pub mod config;
pub mod manifest;

pub use config::{config_to_text, parse_config, parse_config_lenient};
pub use manifest::{execute, read_manifest, Check, Command, RunManifest, Summary};
