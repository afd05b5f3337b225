use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mpm_sdem::harness::{self, beverloo_fit, RunOptions, TimeSeries};

#[derive(Parser)]
#[command(version, about = "Coupled MPM / spheropolygon DEM simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file, or a built-in scenario with --scenario.
    Run {
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// End time, overriding the schedule.
        #[arg(long)]
        until: Option<f64>,
        /// Steps between snapshots (0 disables).
        #[arg(long)]
        dump_every: Option<usize>,
        #[arg(long)]
        scenario: Option<String>,
    },
    /// List the built-in scenarios.
    ListScenarios,
    /// Fit the power law to a CSV of `d0,q` rows (header required).
    FitBeverloo {
        csv: PathBuf,
        /// Characteristic grain size.
        #[arg(long, default_value_t = 1.0)]
        grain: f64,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), Box<dyn std::error::Error>> {
    match cmd {
        Command::Run {
            config,
            out,
            until,
            dump_every,
            scenario,
        } => {
            let cfg = match (config, scenario) {
                (Some(path), None) => harness::load_scenario(&path)?.0,
                (None, Some(name)) => harness::scenario(&name).ok_or_else(|| format!("unknown scenario '{name}'"))?.config,
                _ => return Err("give exactly one of a config file and --scenario".into()),
            };
            let resolved = harness::validate(&cfg)?;
            let out_dir = out.unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
            let opts = RunOptions {
                out_dir: Some(out_dir.clone()),
                until,
                snapshot_every: dump_every,
            };
            let (sim, series) = harness::run(&cfg, &resolved, &opts)?;
            println!(
                "{}: {} steps of {:e} s, {} records written to {}",
                cfg.name,
                sim.world.step,
                sim.dt,
                series.rows.len(),
                out_dir.display()
            );
        }
        Command::ListScenarios => {
            for s in harness::builtin_scenarios() {
                println!("{:<22} {}", s.name, s.config.description);
            }
        }
        Command::FitBeverloo { csv, grain } => {
            let ts = TimeSeries::load_csv(&csv)?;
            let (d0, q) = match (ts.column("d0"), ts.column("q")) {
                (Some(d0), Some(q)) => (d0, q),
                _ => return Err("CSV needs 'd0' and 'q' columns".into()),
            };
            let data: Vec<(f64, f64)> = d0.into_iter().zip(q).collect();
            let fit = beverloo_fit(&data, grain)?;
            println!("C = {:.6}", fit.prefactor);
            println!("k_c = {:.6}", fit.k_c);
            println!("exponent = {:.6}", fit.exponent);
            println!("residual = {:.6e}", fit.residual);
        }
    }
    Ok(())
}
