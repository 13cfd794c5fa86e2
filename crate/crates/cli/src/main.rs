use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vhetnet_cli::{
    cmd_association_sweep, cmd_coverage_sweep, cmd_min_coverage, cmd_validate, load_params, CheckStatus, CliError,
    CliResult, Grid, Method, MinCoverageSpec, SweepSpec, ValidateSpec, Variable,
};

/// Coverage sweeps and validation for UAV-assisted cellular networks.
///
/// The worker count is read from VHETNET_WORKERS (default: all cores).
#[derive(Parser, Debug)]
#[command(name = "vhetnet", version)]
struct Cli {
    /// Flat `key = value` parameter file.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Parameter override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, default_value_t = 1, global = true)]
    seed: u64,
    #[arg(long = "mc-n", default_value_t = 10_000, global = true)]
    mc_n: u64,
    #[arg(long, value_enum, default_value_t = Method::AnalyticApprox, global = true)]
    method: Method,
    /// Step-1 grids instead of the coarse defaults.
    #[arg(long, global = true)]
    fine: bool,
    /// Whitespace-separated output with a `#` header instead of CSV.
    #[arg(long, global = true)]
    gnuplot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coverage probability along a one-dimensional grid.
    CoverageSweep(SweepArgs),
    /// Association probabilities along the grid, per exclusion radius.
    AssociationSweep {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Exclusion radii (km): `start:stop:step` or a comma list.
        #[arg(long = "r-e-list", default_value = "0,4,8,12,16,20")]
        r_e_list: String,
    },
    /// Minimum coverage over r_u for each (lambda_A, r_e).
    MinCoverage {
        #[arg(long = "r-e-grid")]
        r_e_grid: Option<String>,
        #[arg(long = "lambda-grid")]
        lambda_grid: Option<String>,
        #[arg(long = "r-u-grid")]
        r_u_grid: Option<String>,
    },
    /// Analytic results against Monte Carlo; exits 1 if any check fails.
    Validate {
        #[arg(long)]
        grid: Option<String>,
    },
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, value_enum, default_value_t = Variable::RU)]
    vary: Variable,
    /// `start:stop:step` or a comma list; defaults follow `--vary`.
    #[arg(long)]
    grid: Option<String>,
    /// User distance (km) when sweeping something else.
    #[arg(long = "r-u", default_value_t = 8.0)]
    r_u: f64,
}

fn output(path: &Option<String>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| CliError::Io {
            path: p.clone(),
            source,
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn grid_or(text: &Option<String>, default: Grid) -> CliResult<Grid> {
    text.as_deref().map_or(Ok(default), str::parse)
}

fn sweep_spec(cli: &Cli, args: &SweepArgs) -> CliResult<SweepSpec> {
    let default = match args.vary {
        Variable::RU => Grid::default_r_u(cli.fine),
        Variable::RE => Grid::default_r_e(cli.fine),
        Variable::LambdaA => Grid::default_lambda_a(),
    };
    Ok(SweepSpec {
        variable: args.vary,
        grid: grid_or(&args.grid, default)?,
        params: load_params(cli.config.as_deref(), &cli.set)?,
        r_u: args.r_u,
        method: cli.method,
        mc_n: cli.mc_n,
        seed: cli.seed,
    })
}

fn io_err(e: io::Error) -> CliError {
    CliError::Io {
        path: "output".into(),
        source: e,
    }
}

fn run(cli: &Cli) -> CliResult<bool> {
    match &cli.command {
        Command::CoverageSweep(args) => {
            let result = cmd_coverage_sweep(&sweep_spec(cli, args)?)?;
            let out = output(&cli.out)?;
            if cli.gnuplot {
                result.write_gnuplot(out).map_err(io_err)?;
            } else {
                result.write_csv(out)?;
            }
        }
        Command::AssociationSweep { sweep, r_e_list } => {
            let result = cmd_association_sweep(&sweep_spec(cli, sweep)?, &r_e_list.parse()?)?;
            let out = output(&cli.out)?;
            if cli.gnuplot {
                result.write_gnuplot(out).map_err(io_err)?;
            } else {
                result.write_csv(out)?;
            }
        }
        Command::MinCoverage {
            r_e_grid,
            lambda_grid,
            r_u_grid,
        } => {
            let lambda_a = grid_or(lambda_grid, Grid::default_lambda_a())?;
            log::info!("lambda_A grid: {:?}", lambda_a.values());
            let spec = MinCoverageSpec {
                params: load_params(cli.config.as_deref(), &cli.set)?,
                r_e: grid_or(r_e_grid, Grid::default_r_e(cli.fine))?,
                lambda_a,
                r_u: grid_or(r_u_grid, Grid::default_r_u(cli.fine))?,
                method: cli.method,
                mc_n: cli.mc_n,
                seed: cli.seed,
            };
            let result = cmd_min_coverage(&spec)?;
            let out = output(&cli.out)?;
            if cli.gnuplot {
                result.write_gnuplot(out).map_err(io_err)?;
            } else {
                result.write_csv(out)?;
            }
        }
        Command::Validate { grid } => {
            let spec = ValidateSpec {
                params: load_params(cli.config.as_deref(), &cli.set)?,
                r_u: grid_or(grid, Grid::default_r_u(cli.fine))?,
                mc_n: cli.mc_n,
                seed: cli.seed,
            };
            let report = cmd_validate(&spec)?;
            report.write_csv(output(&cli.out)?)?;
            eprintln!(
                "{} pass, {} fail, {} inconclusive, {} warning",
                report.count(CheckStatus::Pass),
                report.count(CheckStatus::Fail),
                report.count(CheckStatus::Inconclusive),
                report.count(CheckStatus::Warning)
            );
            return Ok(report.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Ok(w) = std::env::var("VHETNET_WORKERS") {
        match w.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    log::warn!("could not size the worker pool: {e}");
                }
            }
            _ => {
                eprintln!("error: VHETNET_WORKERS must be a positive integer, got `{w}`");
                return ExitCode::from(2);
            }
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
