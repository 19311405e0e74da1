use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bellactiv_cli::commands::{construct, search, show, verify};
use bellactiv_cli::config::FileConfig;
use bellactiv_cli::Failure;

/// Search for, verify, and construct instances of Bell non-locality
/// activation: CHSH-local state pairs whose tensor product violates CHSH.
#[derive(Parser)]
#[command(name = "bellactiv", version, about)]
struct Cli {
    /// TOML config file (default: ./bellactiv.toml when present).
    /// Precedence: flags > config file > built-in defaults.
    #[arg(long, value_name = "PATH", global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Multi-restart see-saw search over extendible states and measurements
    Search(SearchArgs),
    /// Re-derive every invariant an artifact claims; exit 0 iff all pass
    Verify(VerifyArgs),
    /// Compile a flag-based construction from an activation pair
    Construct(ConstructArgs),
    /// Dump dims, spectra, purity, values, and certificates
    Show(ShowArgs),
}

#[derive(Args)]
struct SearchArgs {
    /// chsh-asym | chsh-sym-mix | chsh-meas-only | cglmp3-asym
    #[arg(long)]
    scenario: Option<String>,

    /// Local dimension d; searched states live on C^d (x) C^d
    #[arg(long)]
    dims: Option<usize>,

    /// Independent random restarts (default 500 for d <= 2, else 2000)
    #[arg(long)]
    restarts: Option<usize>,

    /// Master seed; restart seeds derive from it deterministically
    #[arg(long)]
    seed: Option<u64>,

    /// See-saw cycle cap per restart
    #[arg(long)]
    max_cycles: Option<usize>,

    /// Convergence threshold on the per-cycle improvement
    #[arg(long)]
    epsilon: Option<f64>,

    /// Fixed-state artifact for the chsh-meas-only scenario
    #[arg(long, value_name = "PATH")]
    state: Option<PathBuf>,

    /// Output artifact path
    #[arg(long, value_name = "PATH", default_value = "search_result.json")]
    out: PathBuf,

    /// Also write the best pair as an activation_pair artifact
    #[arg(long, value_name = "PATH")]
    pair_out: Option<PathBuf>,

    /// Suppress the line-per-restart progress log
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Artifact to verify
    path: PathBuf,

    /// Tolerance for |stored - recomputed| on stored values
    #[arg(long)]
    value_tolerance: Option<f64>,
}

#[derive(Args)]
struct ConstructArgs {
    /// symmetric-embed | self-activation | combined
    #[arg(long)]
    construction: String,

    /// Input activation_pair artifact
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,

    /// Output artifact path
    #[arg(long, value_name = "PATH", default_value = "construction.json")]
    out: PathBuf,
}

#[derive(Args)]
struct ShowArgs {
    /// Artifact to dump
    path: PathBuf,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Search(args) => {
            let flags = search::SearchFlags {
                scenario: args.scenario,
                dims: args.dims,
                restarts: args.restarts,
                seed: args.seed,
                max_cycles: args.max_cycles,
                epsilon: args.epsilon,
                state: args.state,
                out: args.out,
                pair_out: args.pair_out,
                quiet: args.quiet,
            };
            search::run(&flags, &config.search)
        }
        Command::Verify(args) => verify::run(&args.path, args.value_tolerance, &config.verify),
        Command::Construct(args) => construct::run(&args.construction, &args.input, &args.out),
        Command::Show(args) => show::run(&args.path),
    }
}

fn main() -> ExitCode {
    // clap exits with code 2 on its own for bad flags.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
