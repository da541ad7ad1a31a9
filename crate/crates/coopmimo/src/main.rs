use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use coopmimo::sim::{
    emit_results, render_csv, run_point, run_sweep, OutputFormat, ScenarioConfig, Strategy,
    SweepSpec, SweepVariable,
};
use coopmimo::stbc::SchemeKind;
use coopmimo::{Result, SimError};

#[derive(Parser)]
#[command(
    name = "coopmimo",
    about = "Monte-Carlo BER simulator for two-hop amplify-and-forward cooperative MIMO-OFDM",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure a single BER point.
    Run(RunArgs),
    /// Measure a series over relay count or transmit power.
    Sweep(SweepArgs),
    /// Run the built-in invariant suite.
    Validate,
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file (flat `key = value` lines); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; every draw of a run derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Space-time scheme: alamouti | golden | dlst.
    #[arg(long)]
    scheme: Option<String>,
    /// Relay selection: pi | random.
    #[arg(long)]
    strategy: Option<String>,
    /// Candidate relays in the cell.
    #[arg(long = "n-relays")]
    n_relays: Option<usize>,
    /// Source transmit power in dB.
    #[arg(long = "ps-db")]
    ps_db: Option<f64>,
    /// Codeword frames per measurement point.
    #[arg(long)]
    frames: Option<usize>,
    /// Receiver iterations (1..=8).
    #[arg(long)]
    iterations: Option<usize>,
    /// Noise variance per complex dimension.
    #[arg(long)]
    sigma2: Option<f64>,
}

impl CommonArgs {
    fn build_config(&self) -> Result<ScenarioConfig> {
        let mut config = match &self.config {
            Some(path) => ScenarioConfig::from_file(path)?,
            None => ScenarioConfig::default(),
        };
        if let Some(name) = &self.scheme {
            config.apply_scheme(SchemeKind::parse(name)?);
        }
        if let Some(name) = &self.strategy {
            config.strategy = Strategy::parse(name)?;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(n) = self.n_relays {
            config.n_relays = n;
        }
        if let Some(ps) = self.ps_db {
            config.ps_db = ps;
        }
        if let Some(frames) = self.frames {
            config.frames = frames;
        }
        if let Some(iters) = self.iterations {
            config.n_iterations = iters;
        }
        if let Some(s2) = self.sigma2 {
            config.sigma2 = s2;
        }
        Ok(config)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Output file; written in the chosen format.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv | svg.
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Sweep variable: n-relays | ps-db.
    #[arg(long, default_value = "n-relays")]
    variable: String,
    /// Comma-separated sweep values, e.g. `10,20,50,100,150,200`.
    #[arg(long)]
    values: String,
    /// Output file; written in the chosen format.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv | svg.
    #[arg(long, default_value = "csv")]
    format: String,
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let config = args.common.build_config()?;
    let record = run_point(&config)?;
    print!("{}", render_csv(std::slice::from_ref(&record)));
    if let Some(path) = &args.out {
        let format = OutputFormat::parse(&args.format)?;
        emit_results(
            std::slice::from_ref(&record),
            format,
            SweepVariable::NRelays,
            path,
        )?;
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let base = args.common.build_config()?;
    let variable = SweepVariable::parse(&args.variable)?;
    let values = args
        .values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| SimError::Config(format!("bad sweep value '{v}'")))
        })
        .collect::<Result<Vec<f64>>>()?;
    // A scheme or strategy given explicitly narrows the grid; otherwise the
    // sweep covers all schemes and both selection strategies.
    let schemes = match &args.common.scheme {
        Some(name) => vec![SchemeKind::parse(name)?],
        None => vec![SchemeKind::Alamouti, SchemeKind::Golden, SchemeKind::Dlst],
    };
    let strategies = match &args.common.strategy {
        Some(name) => vec![Strategy::parse(name)?],
        None => vec![Strategy::Pi, Strategy::Random],
    };
    let spec = SweepSpec {
        variable,
        values,
        base,
        schemes,
        strategies,
    };
    let records = run_sweep(&spec)?;
    print!("{}", render_csv(&records));
    if let Some(path) = &args.out {
        let format = OutputFormat::parse(&args.format)?;
        emit_results(&records, format, variable, path)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Validate => {
            return match coopmimo::sim::validate::run_all(std::io::stdout()) {
                Ok(0) => ExitCode::SUCCESS,
                Ok(n) => {
                    eprintln!("{n} invariant check(s) failed");
                    ExitCode::from(3)
                }
                Err(e) => {
                    eprintln!("i/o error: {e}");
                    ExitCode::from(2)
                }
            };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
