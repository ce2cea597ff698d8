//! Synthetic problem sequences, benchmark grid runner and reports.

mod bench;
mod config;
pub mod generator;
mod problem;
pub mod report;
mod verify;

pub use bench::{hierarchy_summary, run_benchmark, RunReport, RunRow, SCHEMA_VERSION};
pub use config::BenchConfig;
pub use generator::{generate_blackoil_like_sequence, GeneratedSystem, GeneratorParams};
pub use problem::{Manifest, ManifestEntry, ProblemSequence, Provenance};
pub use verify::{verify_matrix, PropertyCheck, VerifyReport};
