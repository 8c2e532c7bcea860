//! Drive the full pipeline from a manifest, exactly like the CLI does:
//! parse, resolve, run the analyses in dependency order, emit the report.

use curvlab::report::{
    bundled_manifest, emit_report, parse_manifest, run_pipeline, Analysis, ReportFormat,
};

fn main() {
    let manifest = parse_manifest(bundled_manifest("msqe_example").unwrap()).unwrap();
    let resolved = manifest.resolve().unwrap();

    // a subset in human form
    let report = run_pipeline(&resolved, &[Analysis::Curvature, Analysis::Soliton]);
    print!("{}", emit_report(&report, ReportFormat::Human));

    // the aggregate structured report is byte-stable for a fixed
    // (manifest, seed, version); hash it if you want change detection
    let full = run_pipeline(&resolved, &Analysis::ALL);
    let bytes = emit_report(&full, ReportFormat::Structured);
    println!("\nstructured report: {} bytes over {} sections", bytes.len(), full.sections.len());
}
