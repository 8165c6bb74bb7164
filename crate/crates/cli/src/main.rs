use std::path::PathBuf;
use std::process::ExitCode;

use chimera_cli::{execute, CliError, Command, Overrides, RunConfig, SweepRun};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chimera", version, about = "Two-population Kuramoto networks with coevolving coupling")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long = "t-final")]
    t_final: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate the finite-N network.
    SimulateNetwork(Common),
    /// Integrate the mean-field system.
    SimulateMeanfield(Common),
    /// Classify the critical manifold on a grid.
    Manifold(Common),
    /// Network and mean field side by side.
    Compare(Common),
    /// Repeat a run over values of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Parameter name (k1, mu, epsilon, ...) or dotted config path.
        #[arg(long)]
        axis: String,
        /// Comma-separated values; may be empty.
        #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
        values: Vec<String>,
        #[arg(long, value_enum, default_value = "meanfield")]
        run: SweepRun,
    },
}

fn parse_values(raw: &[String]) -> Result<Vec<f64>, CliError> {
    raw.iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| CliError::Config(format!("bad sweep value '{s}'"))))
        .collect()
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, command) = match cli.command {
        Cmd::SimulateNetwork(c) => (c, Command::SimulateNetwork),
        Cmd::SimulateMeanfield(c) => (c, Command::SimulateMeanfield),
        Cmd::Manifold(c) => (c, Command::Manifold),
        Cmd::Compare(c) => (c, Command::Compare),
        Cmd::Sweep { common, axis, values, run } => {
            let values = parse_values(&values)?;
            (common, Command::Sweep { axis, values, run })
        }
    };
    let overrides = Overrides {
        out: common.out,
        seed: common.seed,
        dt: common.dt,
        t_final: common.t_final,
        threads: common.threads,
    };
    let cfg = RunConfig::load(&common.config)?.apply(&overrides)?;
    execute(&command, &cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = serde_json::json!({ "error": e.record() });
            eprintln!("{record}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
