use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use hamgap::check::{run_checks, CheckOptions};
use hamgap::runner::{run_parallel, sweep_configs};
use hamgap::{exit, list_scenarios, parse_with_overrides, polar};

#[derive(Parser)]
#[command(
    name = "hamgap",
    version,
    about = "Dissipative Hamiltonian dynamics through gap vectors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario and write trajectory and balance CSVs.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override a value, as section.key=value.
        #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
        set: Vec<String>,
        /// Run once per value, in parallel, as section.key=v1,v2,...
        #[arg(long, value_name = "SECTION.KEY=V1,V2")]
        sweep: Option<String>,
    },
    /// List the registered scenarios.
    List,
    /// Run the invariant suite and print a pass/fail matrix.
    Check {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Add a model with I = 0, which must fail temperedness.
        #[arg(long)]
        inject_faulty: bool,
    },
    /// Tabulate a right polar by the grid oracle.
    Polar {
        /// zero_indicator, zero, quadratic[:a] or abs[:mu].
        #[arg(long)]
        potential: String,
        /// Supremum grid, RADIUS:COUNT per axis.
        #[arg(long)]
        grid: String,
        /// Evaluation points, RADIUS:COUNT per axis.
        #[arg(long, default_value = "1:11")]
        at: String,
        /// Degrees of freedom.
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run_command(config: PathBuf, set: Vec<String>, sweep: Option<String>) -> Result<i32> {
    let text =
        fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
    let configs = match sweep {
        None => vec![parse_with_overrides(&text, &set)?],
        Some(spec) => {
            let (key, values) = spec
                .split_once('=')
                .context("--sweep must look like section.key=v1,v2")?;
            let mut table: toml::Table =
                toml::from_str(&text).map_err(|e| anyhow::anyhow!("{}", e.message().trim()))?;
            for item in &set {
                hamgap::config::apply_override(&mut table, item)?;
            }
            let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
            sweep_configs(&table, key.trim(), &values)?
        }
    };
    let mut code = exit::PASS;
    for outcome in run_parallel(&configs) {
        match outcome {
            Ok(o) => {
                print!("{}", o.summary);
                if !o.passed && code == exit::PASS {
                    code = exit::CHECK_FAILED;
                }
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                code = exit::ERROR;
            }
        }
    }
    Ok(code)
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run { config, set, sweep } => run_command(config, set, sweep),
        Command::List => {
            print!("{}", list_scenarios());
            Ok(exit::PASS)
        }
        Command::Check {
            samples,
            seed,
            inject_faulty,
        } => {
            let report = run_checks(&CheckOptions {
                samples,
                seed,
                inject_faulty,
            })?;
            print!("{}", report.render());
            Ok(if report.passed() {
                exit::PASS
            } else {
                exit::CHECK_FAILED
            })
        }
        Command::Polar {
            potential,
            grid,
            at,
            n,
            out,
        } => {
            let f = polar::parse_potential(&potential)?;
            let grid = polar::parse_cube(&grid, n)?;
            let at = polar::parse_cube(&at, n)?;
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            let rows = polar::tabulate(BufWriter::new(file), f.as_ref(), &grid, &at)?;
            println!("wrote {rows} rows to {}", out.display());
            Ok(exit::PASS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = dispatch(cli).unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        exit::ERROR
    });
    ExitCode::from(code as u8)
}
