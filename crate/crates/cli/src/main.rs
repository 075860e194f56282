use std::path::PathBuf;
use std::process::ExitCode;

use bgvar_cli::{run, CliError, RunConfig, Stage};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bgvar", version, about = "Bayesian global VAR analysis pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read, select and transform the panel.
    Ingest(Opts),
    /// ADF and PP unit-root grids.
    Stationarity(Opts),
    /// Rolling-window regression grid.
    Rollreg(Opts),
    /// Country VAR lag selection, fit and residual checks.
    Var(Opts),
    /// Pairwise Granger causality grid.
    Granger(Opts),
    /// Pairwise Johansen trace grid.
    Johansen(Opts),
    /// Classical global VAR and the normalized weight table.
    Gvar(Opts),
    /// Posterior sampling, diagnostics and the model summary.
    Bgvar(Opts),
    /// Fan charts from an existing draw file.
    Forecast(Opts),
    /// Generalized impulse responses from an existing draw file.
    Girf(Opts),
    /// Every stage in workflow order.
    Report(Opts),
}

#[derive(Args)]
struct Opts {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Long-format panel CSV.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Bilateral flow table CSV.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long)]
    n_draws: Option<usize>,
    #[arg(long)]
    n_burn: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    n_ahead: Option<usize>,
    /// Worker threads (outputs do not depend on this).
    #[arg(long)]
    threads: Option<usize>,
}

impl Opts {
    fn config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(p) = &self.output_dir {
            cfg.output_dir = p.clone();
        }
        // Paths given on the command line are relative to the working directory.
        if let Some(p) = &self.data {
            cfg.data.panel = std::path::absolute(p)?;
        }
        if let Some(p) = &self.weights {
            cfg.data.weights = std::path::absolute(p)?;
        }
        if let Some(n) = self.n_draws {
            cfg.bgvar.schedule.n_draws = n;
        }
        if let Some(n) = self.n_burn {
            cfg.bgvar.schedule.n_burn = n;
        }
        if let Some(n) = self.thin {
            cfg.bgvar.schedule.thin = n;
        }
        if let Some(n) = self.n_ahead {
            cfg.forecast.n_ahead = n;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (opts, stages): (&Opts, Vec<Stage>) = match &cli.command {
        Command::Ingest(o) => (o, vec![Stage::Ingest]),
        Command::Stationarity(o) => (o, vec![Stage::Stationarity]),
        Command::Rollreg(o) => (o, vec![Stage::Rollreg]),
        Command::Var(o) => (o, vec![Stage::Var]),
        Command::Granger(o) => (o, vec![Stage::Granger]),
        Command::Johansen(o) => (o, vec![Stage::Johansen]),
        Command::Gvar(o) => (o, vec![Stage::Gvar]),
        Command::Bgvar(o) => (o, vec![Stage::Bgvar]),
        Command::Forecast(o) => (o, vec![Stage::Forecast]),
        Command::Girf(o) => (o, vec![Stage::Girf]),
        Command::Report(o) => (o, Stage::ALL.to_vec()),
    };
    let cfg = opts.config()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| run(&cfg, &stages))?;
    eprintln!("wrote {}", cfg.output_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
