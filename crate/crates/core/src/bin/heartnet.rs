use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use heartnet::experiment::{
    self, exit_code, Command, ConfigFile, ExperimentConfig, Format, Overrides, EXIT_USAGE,
    OUT_DIR_ENV,
};
use heartnet::models::ClassifierKind;

/// Heart-disease risk prediction experiments: classical baselines and
/// multitask sparse-autoencoder networks under k-fold cross-validation.
#[derive(Parser)]
#[command(name = "heartnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Encode the raw CSV into the 24-column feature matrix.
    Preprocess(Common),
    /// Grid-search and cross-validate the classical methods and the vanilla MLP.
    RunBaselines(Common),
    /// Cross-validate one multitask model and fit it on all rows.
    RunMultitask(Common),
    /// Cross-validate a multitask model across latent sizes.
    SweepLatent(Common),
    /// Compare group I and group II accuracies from results files.
    Stats(WithResults),
    /// Render the comparison table against the published reference rows.
    Report(WithResults),
    /// Re-run a command from its manifest and verify identical outputs.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassifierArg {
    Mlp,
    Cnn,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Svg,
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output directory (also settable through HEARTNET_OUT_DIR).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Number of folds [default: 10].
    #[arg(long)]
    folds: Option<usize>,
    /// Use class-stratified folds.
    #[arg(long)]
    stratified: bool,
    /// TOML file with per-method grid tables.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long, value_enum)]
    classifier: Option<ClassifierArg>,
    /// Output formats to emit (repeatable) [default: all].
    #[arg(long, value_enum)]
    format: Vec<FormatArg>,
}

#[derive(Args)]
struct WithResults {
    /// Results CSV files from earlier runs.
    results: Vec<PathBuf>,
    #[command(flatten)]
    common: Common,
}

fn resolve(c: Common, results: Option<Vec<PathBuf>>) -> heartnet::Result<ExperimentConfig> {
    let file = c.config.as_deref().map(ConfigFile::load).transpose()?;
    let env_out = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    let flags = Overrides {
        data: c.data,
        out: c.out,
        seed: c.seed,
        folds: c.folds,
        stratified: c.stratified.then_some(true),
        classifier: c.classifier.map(|k| match k {
            ClassifierArg::Mlp => ClassifierKind::Mlp,
            ClassifierArg::Cnn => ClassifierKind::Cnn,
        }),
        formats: (!c.format.is_empty()).then(|| {
            c.format
                .iter()
                .map(|f| match f {
                    FormatArg::Csv => Format::Csv,
                    FormatArg::Json => Format::Json,
                    FormatArg::Svg => Format::Svg,
                })
                .collect()
        }),
        grid_file: c.grid,
        results: results.filter(|r| !r.is_empty()),
    };
    ExperimentConfig::resolve(file, env_out, flags)
}

fn dispatch(cmd: Cmd) -> heartnet::Result<experiment::RunOutcome> {
    match cmd {
        Cmd::Replay { manifest, out } => experiment::replay(&manifest, out),
        Cmd::Stats(w) => experiment::run(Command::Stats, &resolve(w.common, Some(w.results))?),
        Cmd::Report(w) => experiment::run(Command::Report, &resolve(w.common, Some(w.results))?),
        Cmd::Preprocess(c) => experiment::run(Command::Preprocess, &resolve(c, None)?),
        Cmd::RunBaselines(c) => experiment::run(Command::RunBaselines, &resolve(c, None)?),
        Cmd::RunMultitask(c) => experiment::run(Command::RunMultitask, &resolve(c, None)?),
        Cmd::SweepLatent(c) => experiment::run(Command::SweepLatent, &resolve(c, None)?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(outcome) => {
            println!(
                "{}: wrote {} files to {}",
                outcome.command.name(),
                outcome.bundle.names().len(),
                outcome.out_dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
