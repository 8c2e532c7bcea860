//! Thin command-line front end: find a manifest, run the requested
//! analyses, print the report. All logic lives in the library.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use curvlab::report::manifest::{
    bundled_manifest, bundled_manifest_names, parse_manifest, ConventionChoice, ManifestError,
    ModeChoice,
};
use curvlab::report::{emit_report, run_pipeline, Analysis, ReportFormat};

const MANIFEST_DIR_VAR: &str = "CURVLAB_MANIFEST_DIR";

#[derive(Parser)]
#[command(
    name = "curvlab",
    version,
    about = "Symbolic-numeric curvature laboratory for chart-defined metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Christoffel symbols, curvature tensors and scalar curvature.
    Curvature(RunArgs),
    /// Frame audit, structure coefficient fits and recurrence class.
    Classify(RunArgs),
    /// Ricci-Bourguignon flow equation analysis.
    Soliton(RunArgs),
    /// Energy-momentum and space-matter tensors with their divergences.
    Physics(RunArgs),
    /// Structural identity suite.
    Identities(RunArgs),
    /// Aggregate report over every analysis.
    Report(RunArgs),
}

impl Command {
    fn args(&self) -> &RunArgs {
        match self {
            Command::Curvature(a)
            | Command::Classify(a)
            | Command::Soliton(a)
            | Command::Physics(a)
            | Command::Identities(a)
            | Command::Report(a) => a,
        }
    }

    fn default_analyses(&self) -> Vec<Analysis> {
        match self {
            Command::Curvature(_) => vec![Analysis::Curvature],
            Command::Classify(_) => vec![
                Analysis::FrameAudit,
                Analysis::MsqeFit,
                Analysis::RecurrenceFit,
                Analysis::VectorFields,
                Analysis::Pseudosymmetry,
            ],
            Command::Soliton(_) => vec![Analysis::Soliton],
            Command::Physics(_) => vec![Analysis::Physics],
            Command::Identities(_) => vec![Analysis::Identities],
            Command::Report(_) => Analysis::ALL.to_vec(),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Manifest file path, or the bare name of a manifest in
    /// $CURVLAB_MANIFEST_DIR or bundled with the tool.
    #[arg(long)]
    manifest: String,
    /// Comma-separated analysis ids replacing the subcommand's default set.
    #[arg(long, value_delimiter = ',')]
    analyses: Vec<String>,
    #[arg(long, value_enum, default_value_t = FormatArg::Human)]
    format: FormatArg,
    /// Override the manifest's evaluation mode.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Override the manifest's sample seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the manifest's curvature sign convention.
    #[arg(long, value_enum)]
    convention: Option<ConventionArg>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Human,
    Structured,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Rational,
    Float,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConventionArg {
    Negative,
    Positive,
}

enum AppError {
    Manifest(ManifestError),
    Usage(String),
    Internal(String),
}

impl From<ManifestError> for AppError {
    fn from(e: ManifestError) -> Self {
        AppError::Manifest(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(output) => {
            print!("{output}");
            ExitCode::SUCCESS
        }
        Err(AppError::Manifest(e)) => {
            eprintln!("manifest error: {e}");
            ExitCode::from(1)
        }
        Err(AppError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(AppError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<String, AppError> {
    let args = cli.command.args();
    let text = find_manifest(&args.manifest)?;
    let mut manifest = parse_manifest(&text)?;

    if let Some(mode) = args.mode {
        manifest.options.mode = match mode {
            ModeArg::Rational => ModeChoice::Rational,
            ModeArg::Float => ModeChoice::Float,
        };
    }
    if let Some(seed) = args.seed {
        manifest.options.seed = seed;
    }
    if let Some(conv) = args.convention {
        manifest.options.convention = match conv {
            ConventionArg::Negative => ConventionChoice::Negative,
            ConventionArg::Positive => ConventionChoice::Positive,
        };
    }

    let analyses = if args.analyses.is_empty() {
        cli.command.default_analyses()
    } else {
        args.analyses
            .iter()
            .map(|id| {
                Analysis::from_id(id).ok_or_else(|| {
                    let known: Vec<&str> = Analysis::ALL.iter().map(|a| a.id()).collect();
                    AppError::Usage(format!(
                        "unknown analysis \"{id}\"; known ids: {}",
                        known.join(", ")
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?
    };

    let resolved = manifest.resolve()?;
    let format = match args.format {
        FormatArg::Human => ReportFormat::Human,
        FormatArg::Structured => ReportFormat::Structured,
    };
    catch_unwind(AssertUnwindSafe(|| {
        let report = run_pipeline(&resolved, &analyses);
        emit_report(&report, format)
    }))
    .map_err(|panic| {
        let msg = panic
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| panic.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "analysis panicked".to_string());
        AppError::Internal(msg)
    })
}

/// Resolve a manifest argument: an existing path wins, then a file in
/// $CURVLAB_MANIFEST_DIR, then a bundled manifest by name.
fn find_manifest(arg: &str) -> Result<String, ManifestError> {
    let read = |p: &Path| {
        std::fs::read_to_string(p).map_err(|source| ManifestError::Io {
            path: p.display().to_string(),
            source,
        })
    };
    let path = Path::new(arg);
    if path.exists() {
        return read(path);
    }
    if let Ok(dir) = std::env::var(MANIFEST_DIR_VAR) {
        for candidate in [
            PathBuf::from(&dir).join(arg),
            PathBuf::from(&dir).join(format!("{arg}.json")),
        ] {
            if candidate.exists() {
                return read(&candidate);
            }
        }
    }
    if let Some(text) = bundled_manifest(arg) {
        return Ok(text.to_string());
    }
    Err(ManifestError::Io {
        path: arg.to_string(),
        source: std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!(
                "not a file, not in ${MANIFEST_DIR_VAR}, and not one of the bundled manifests ({})",
                bundled_manifest_names().join(", ")
            ),
        ),
    })
}
