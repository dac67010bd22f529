//! `tide` — information-leakage detection and targeted obfuscation.
//!
//! Exit codes: 0 success, 2 usage or invalid flags, 3 numeric failure
//! (training divergence, calibration non-convergence), 4 I/O or parse
//! failure, 5 model/data shape mismatch.

mod commands;
mod manifest;
mod rundir;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "tide", version, about = "Information-leakage detection and targeted Gaussian obfuscation", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate correlated Gaussian attribute/feature pairs as CSV
    GenSynthetic(commands::GenSyntheticArgs),
    /// Generate the procedural face corpus (PGM images + labels)
    GenFaces(commands::GenFacesArgs),
    /// Generate the planted-term document corpus (label TAB text)
    GenDocs(commands::GenDocsArgs),
    /// Train a trimmed information density estimator
    Train(commands::TrainArgs),
    /// Run the synthetic WMAE benchmark over (d, rho) cells
    BenchSynthetic(commands::BenchArgs),
    /// Calibrate the Gaussian noise scale for a target per-feature budget
    Calibrate(commands::CalibrateArgs),
    /// Identify leaking patches in an image and obfuscate them
    ObfuscateImage(commands::ObfuscateImageArgs),
    /// Rank vocabulary terms by estimated conditional information density
    ScoreTerms(commands::ScoreTermsArgs),
    /// Run the divergence and mechanism property suites
    Verify(commands::VerifyArgs),
}

/// Exit codes fixed for scripting.
pub mod exit_code {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const NUMERIC: i32 = 3;
    pub const IO: i32 = 4;
    pub const SHAPE: i32 = 5;
}

/// Error type carrying the process exit code.
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: exit_code::USAGE, message: message.into() }
    }
    pub fn numeric(message: impl Into<String>) -> Self {
        CliError { code: exit_code::NUMERIC, message: message.into() }
    }
    pub fn io(message: impl Into<String>) -> Self {
        CliError { code: exit_code::IO, message: message.into() }
    }
    pub fn shape(message: impl Into<String>) -> Self {
        CliError { code: exit_code::SHAPE, message: message.into() }
    }
}

impl From<tide_core::pipelines::PipelineError> for CliError {
    fn from(e: tide_core::pipelines::PipelineError) -> Self {
        use tide_core::pipelines::PipelineError as P;
        match &e {
            P::Io(_) | P::Parse { .. } | P::InvalidImage(_) => CliError::io(e.to_string()),
            P::PatchMismatch(_) => CliError::shape(e.to_string()),
            P::EmptyVocabulary | P::InvalidSpec(_) => CliError::usage(e.to_string()),
            P::RepeatAborted(_) => CliError::numeric(e.to_string()),
            P::Estimator(inner) => estimator_code(inner, e.to_string()),
            P::Mechanism(_) | P::Divergence(_) => CliError::numeric(e.to_string()),
        }
    }
}

fn estimator_code(e: &tide_core::estimators::EstimatorError, message: String) -> CliError {
    use tide_core::estimators::EstimatorError as E;
    match e {
        E::TrainingDiverged { .. } => CliError::numeric(message),
        E::DimensionMismatch { .. } | E::PrefixOutOfRange { .. } | E::PrefixUnsupported => {
            CliError::shape(message)
        }
        E::Io(_) | E::Json(_) => CliError::io(message),
        _ => CliError::usage(message),
    }
}

impl From<tide_core::estimators::EstimatorError> for CliError {
    fn from(e: tide_core::estimators::EstimatorError) -> Self {
        let msg = e.to_string();
        estimator_code(&e, msg)
    }
}

impl From<tide_core::mechanism::MechanismError> for CliError {
    fn from(e: tide_core::mechanism::MechanismError) -> Self {
        use tide_core::mechanism::MechanismError as M;
        match &e {
            M::NumericFailure(_) => CliError::numeric(e.to_string()),
            M::ReportMismatch(_) => CliError::shape(e.to_string()),
            _ => CliError::usage(e.to_string()),
        }
    }
}

impl From<tide_core::divergence::DivergenceError> for CliError {
    fn from(e: tide_core::divergence::DivergenceError) -> Self {
        CliError::numeric(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::io(e.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenSynthetic(args) => commands::gen_synthetic(args),
        Command::GenFaces(args) => commands::gen_faces(args),
        Command::GenDocs(args) => commands::gen_docs(args),
        Command::Train(args) => commands::train(args),
        Command::BenchSynthetic(args) => commands::bench_synthetic(args),
        Command::Calibrate(args) => commands::calibrate(args),
        Command::ObfuscateImage(args) => commands::obfuscate_image(args),
        Command::ScoreTerms(args) => commands::score_terms(args),
        Command::Verify(args) => commands::verify(args),
    };
    match result {
        Ok(()) => std::process::exit(exit_code::OK),
        Err(e) => {
            eprintln!("error: {}", e.message);
            std::process::exit(e.code);
        }
    }
}
