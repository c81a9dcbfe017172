use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qubit_curvature::config::{parse_tolerance, ConfigOverrides, RunConfig};
use qubit_curvature::series::{self, Format};
use qubit_curvature::validate::{run_validation, Fault};
use qubit_curvature::Error;

const EXIT_VALIDATION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Curvature, speed and efficiency of a qubit driven by a time-dependent
/// magnetic field.
#[derive(Parser)]
#[command(name = "qubit-curvature", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the scenario and write one row per grid node.
    Simulate(RunArgs),
    /// Run the invariant battery and report each check.
    Validate(RunArgs),
    /// Extrema summary and geodesic efficiency for several nu0 values.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated nu0 values.
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        nu0_list: Vec<f64>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    omega0: Option<f64>,
    #[arg(long)]
    nu0: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    /// Override a named tolerance, e.g. `route_agreement=1e-8`.
    #[arg(long = "tol", value_parser = parse_tol)]
    tol: Vec<(String, f64)>,
    /// key=value file with the same settings; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, hide = true, value_parser = parse_fault, default_value = "none")]
    fault: Fault,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    parse_tolerance(s).map_err(|e| e.to_string())
}

fn parse_fault(s: &str) -> Result<Fault, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, Error> {
        let file = match &self.config {
            Some(path) => ConfigOverrides::from_file(path)?,
            None => ConfigOverrides::default(),
        };
        let flags = ConfigOverrides {
            omega0: self.omega0,
            nu0: self.nu0,
            t_max: self.t_max,
            steps: self.steps,
            output: self.out.clone(),
            format: self.format,
            tolerances: self.tol.clone(),
        };
        file.merged_with(flags).build()
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::InvalidArgument(_) | Error::ContractViolation(_) => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

/// Renders into memory first so that a failed run leaves no partial file.
fn emit(config: &RunConfig, render: impl FnOnce(&mut Vec<u8>) -> Result<(), Error>) -> Result<(), Error> {
    let mut buf = Vec::new();
    render(&mut buf)?;
    match &config.output {
        Some(path) => {
            let file = File::create(path).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?;
            let mut out = BufWriter::new(file);
            out.write_all(&buf)?;
            out.flush()?;
            log::info!("wrote {}", path.display());
        }
        None => io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}

fn simulate(args: &RunArgs) -> Result<u8, Error> {
    let config = args.resolve()?;
    let spec = args.fault.field_spec(&config.params);
    let (traj, records) = series::simulate_series(&config.params, &spec, &config.grid)?;
    log::info!("{} nodes, max norm drift {:.2e}", records.len(), traj.max_norm_drift);
    emit(&config, |buf| series::write_series(buf, &records, config.format))?;
    Ok(0)
}

fn validate(args: &RunArgs) -> Result<u8, Error> {
    let config = args.resolve()?;
    let report = run_validation(&config, args.fault);
    println!("{report}");
    Ok(if report.passed() { 0 } else { EXIT_VALIDATION })
}

fn sweep(args: &RunArgs, nu0_list: &[f64]) -> Result<u8, Error> {
    let config = args.resolve()?;
    let rows = series::sweep(config.params.omega0(), nu0_list)?;
    emit(&config, |buf| series::write_summary(buf, &rows, config.format))?;
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Validate(args) => validate(args),
        Command::Sweep { run, nu0_list } => sweep(run, nu0_list),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
