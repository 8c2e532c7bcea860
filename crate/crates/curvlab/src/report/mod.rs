//! Manifest ingestion, pipeline orchestration and report emission: the
//! file-in, report-out surface everything else plugs into.

pub mod emit;
pub mod manifest;
pub mod pipeline;

pub use emit::{emit_report, ReportFormat, REPORT_SCHEMA_TAG};
pub use manifest::{
    bundled_manifest, bundled_manifest_names, load_manifest, parse_manifest, ManifestError,
    ManifoldManifest, ResolvedManifest, SCHEMA_TAG,
};
pub use pipeline::{run_pipeline, Analysis, AnalysisReport};
