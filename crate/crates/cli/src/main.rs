use std::path::PathBuf;
use std::process::ExitCode;

use bislant_cli::commands::{self, CliError, GridArgs, SampleArgs, SpecSource};
use bislant_cli::report::{Outcome, Report};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bislant", version, about = "Verify bi-slant immersions in locally product manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Sampling {
    /// Number of sample points.
    #[arg(long, default_value_t = 32)]
    samples: usize,
    /// Seed for the sample shift.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Args)]
struct Output {
    /// Write the JSON report here.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Print the JSON report instead of the summary.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the distributions and check the bi-slant axioms and slant claims.
    Classify {
        spec: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        output: Output,
    },
    /// Run one identity suite, or `all`.
    Verify {
        spec: PathBuf,
        #[arg(long, default_value = "all")]
        suite: String,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        output: Output,
    },
    /// Detect a warped product and recover the warping function.
    Warped {
        spec: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        output: Output,
    },
    /// Write the slant angle of a distribution on a grid as CSV.
    ExportSlant {
        spec: PathBuf,
        #[arg(long)]
        dist: String,
        /// Points per axis.
        #[arg(long, default_value_t = 20)]
        grid: usize,
        /// Hold a coordinate fixed: name=value.
        #[arg(long, value_parser = commands::parse_fix)]
        fix: Vec<(String, f64)>,
        /// Override a coordinate range: name=lo,hi.
        #[arg(long, value_parser = commands::parse_range)]
        range: Vec<(String, f64, f64)>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Bundled example specs.
    Examples {
        #[command(subcommand)]
        action: ExampleAction,
    },
}

#[derive(Subcommand)]
enum ExampleAction {
    List,
    /// classify + verify all + warped on one example.
    Run {
        name: String,
        #[command(flatten)]
        sampling: Sampling,
        #[command(flatten)]
        output: Output,
    },
}

fn configure_threads() {
    if let Some(n) = std::env::var("BISLANT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn emit(report: Report, output: &Output) -> Result<Outcome, CliError> {
    let json = report.to_json();
    if let Some(path) = &output.output {
        commands::write_file(path, &json)?;
    }
    if output.json {
        print!("{json}");
    } else {
        print!("{}", report.summary());
    }
    Ok(report.outcome)
}

fn args(s: &Sampling) -> SampleArgs {
    SampleArgs { samples: s.samples, seed: s.seed }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Classify { spec, sampling, output } => emit(commands::classify(&SpecSource::path(spec), args(&sampling))?, &output),
        Command::Verify { spec, suite, sampling, output } => {
            emit(commands::verify(&SpecSource::path(spec), &suite, args(&sampling))?, &output)
        }
        Command::Warped { spec, sampling, output } => emit(commands::warped(&SpecSource::path(spec), args(&sampling))?, &output),
        Command::ExportSlant { spec, dist, grid, fix, range, output } => {
            let csv = commands::export_slant(&SpecSource::path(spec), &dist, &GridArgs { grid, fix, range })?;
            match output {
                Some(p) => commands::write_file(&p, &csv)?,
                None => print!("{csv}"),
            }
            Ok(Outcome::Ok)
        }
        Command::Examples { action: ExampleAction::List } => {
            print!("{}", commands::list_examples());
            Ok(Outcome::Ok)
        }
        Command::Examples { action: ExampleAction::Run { name, sampling, output } } => {
            emit(commands::run_example(&name, args(&sampling))?, &output)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // --help and --version are not errors
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    configure_threads();
    match run(cli) {
        Ok(outcome) => ExitCode::from(outcome.code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Outcome::InputError.code() as u8)
        }
    }
}
