use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use collective_knapsack::cli::{self, PlotOptions, RunManifest, RunSpec, PAPER_SCALE_SAMPLES};
use collective_knapsack::Result;

#[derive(Parser)]
#[command(name = "ck", version, about = "Collective knapsack simulations, quadrature and plots")]
struct Cli {
    /// Worker threads for replica evaluation; CK_THREADS takes precedence.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    config: PathBuf,
    /// Overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV; a `.manifest.json` sidecar is written next to it. Stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo performance estimates for every cell of a config.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Overrides `samples` from the config.
        #[arg(long)]
        samples: Option<usize>,
        /// 500000 samples per cell.
        #[arg(long, conflicts_with = "samples")]
        paper_scale: bool,
    },
    /// Two-project performance by quadrature.
    Analytic {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Solve one knapsack given on the command line.
    Solve {
        /// Comma-separated item values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        /// Comma-separated costs; fractions like 9/10 are exact.
        #[arg(long)]
        costs: String,
        #[arg(long)]
        budget: String,
        /// Enumerate all subsets instead of the DP.
        #[arg(long)]
        brute_force: bool,
    },
    /// Draw a result CSV as an SVG line chart.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Vertical axis as LO,HI; curves entirely outside are dropped.
        #[arg(long, value_parser = cli::parse_y_range, allow_hyphen_values = true)]
        y_range: Option<(f64, f64)>,
    },
}

fn configure_threads(flag: Option<usize>) -> Result<(), String> {
    let threads = match std::env::var("CK_THREADS") {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| format!("CK_THREADS: `{v}` is not a thread count"))?),
        Err(_) => flag,
    };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn load(run: &RunArgs) -> Result<RunSpec> {
    let mut spec = cli::parse_config(&run.config)?;
    if let Some(seed) = run.seed {
        spec.seed = seed;
    }
    Ok(spec)
}

fn emit(run: &RunArgs, spec: &RunSpec, rows: &[cli::ResultRow]) -> Result<()> {
    let manifest = RunManifest::for_spec(spec);
    match &run.out {
        Some(path) => {
            cli::write_outputs(path, &manifest, rows)?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => cli::write_csv(std::io::stdout().lock(), &manifest, rows)?,
    }
    Ok(())
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Simulate { run, samples, paper_scale } => {
            let mut spec = load(&run)?;
            if paper_scale {
                spec.samples = PAPER_SCALE_SAMPLES;
            } else if let Some(n) = samples {
                if n == 0 {
                    return Err(collective_knapsack::Error::Config("`samples`: must be >= 1".into()));
                }
                spec.samples = n;
            }
            let rows = cli::simulate(&spec)?;
            emit(&run, &spec, &rows)
        }
        Command::Analytic { run } => {
            let spec = load(&run)?;
            let rows = cli::analytic(&spec)?;
            emit(&run, &spec, &rows)
        }
        Command::Solve { values, costs, budget, brute_force } => {
            let (_, selection) = cli::solve_explicit(&values, &costs, &budget, brute_force)?;
            print!("{}", cli::describe_selection(&selection));
            Ok(())
        }
        Command::Plot { csv, out, y_range } => {
            let chart = cli::plot_file(&csv, &out, &PlotOptions { y_range })?;
            let n = chart.visible.len();
            eprintln!("wrote {n} curve{} to {}", if n == 1 { "" } else { "s" }, out.display());
            if !chart.hidden.is_empty() {
                eprintln!("outside the vertical range: {}", chart.hidden.join("; "));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let args = Cli::parse();
    if let Err(e) = configure_threads(args.threads) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match execute(args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
