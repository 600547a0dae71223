use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use ccme::experiments::{run_experiment, ExperimentName, ExperimentSpec, ModeSelection};
use ccme::params::Config;
use ccme::validation::{run_all_validations, Fault, ValidationOptions};
use ccme::Error;

/// Vibronic two-level emitter experiments.
#[derive(Parser, Debug)]
#[command(
    name = "simulate",
    version,
    about,
    override_usage = "simulate <EXPERIMENT> [OPTIONS]\n       simulate validate [OPTIONS]",
    after_help = "Experiments: decay-dynamics, rate-sweep, steady-sweep-alpha, steady-sweep-temperature, ibm-validate, golden-rule-table.\nRun `simulate <EXPERIMENT> --help` for experiment options."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML configuration file; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set t_em_k=60000`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every structural check and print a pass/fail table.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Number of random Hermitian inputs per mode.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 20170817)]
        seed: u64,
        /// Skip the exact-solution comparison.
        #[arg(long)]
        skip_ibm: bool,
        /// Inject the odd-extension frequency convention.
        #[arg(long)]
        fault_frequency_sign: bool,
        /// Start the truncation check at this Fock cut-off.
        #[arg(long, value_name = "M")]
        fault_fock_dim: Option<usize>,
    },
    /// Run a named experiment (decay-dynamics, rate-sweep, steady-sweep-alpha,
    /// steady-sweep-temperature, ibm-validate, golden-rule-table).
    #[command(external_subcommand)]
    Experiment(Vec<String>),
}

#[derive(Parser, Debug)]
#[command(name = "simulate <experiment>")]
struct ExperimentArgs {
    experiment: String,
    #[command(flatten)]
    common: Common,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Also write an SVG plot.
    #[arg(long)]
    svg: bool,
    /// Worker threads for parameter sweeps.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Electromagnetic dissipator(s) to evaluate.
    #[arg(long, default_value = "both", value_parser = ["additive", "nonadditive", "both"])]
    mode: String,
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Validate { common, trials, seed, skip_ibm, fault_frequency_sign, fault_fock_dim } => {
            let config = Config::load_with_overrides(common.config.as_deref(), &common.overrides)?;
            let fault = match (fault_frequency_sign, fault_fock_dim) {
                (true, _) => Some(Fault::CorruptFrequencySign),
                (false, Some(m)) => Some(Fault::ForceFockDim(m)),
                _ => None,
            };
            let opts = ValidationOptions { trials, seed, fault, include_ibm: !skip_ibm };
            let report = run_all_validations(&config, &opts)?;
            print!("{}", report.render());
            Ok(if report.all_passed() { ExitCode::SUCCESS } else { ExitCode::from(4) })
        }
        Command::Experiment(raw) => {
            let args = match ExperimentArgs::try_parse_from(std::iter::once("simulate".to_string()).chain(raw)) {
                Ok(a) => a,
                Err(e) => {
                    let _ = e.print();
                    return Ok(ExitCode::from(if e.use_stderr() { 2 } else { 0 }));
                }
            };
            let name: ExperimentName = args.experiment.parse()?;
            let config = Config::load_with_overrides(args.common.config.as_deref(), &args.common.overrides)?;
            let spec = ExperimentSpec {
                name,
                config,
                mode: args.mode.parse::<ModeSelection>()?,
                out_dir: args.out,
                svg: args.svg,
                workers: args.workers,
            };
            let summary = run_experiment(&spec)?;
            for f in &summary.files {
                println!("{}", f.display());
            }
            if !summary.passed {
                error!("{} failed its tolerance check", spec.name);
                return Ok(ExitCode::from(4));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            let e = anyhow::Error::from(e);
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<Error>().map_or(1, Error::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
