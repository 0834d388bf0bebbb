use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use decotrace::commands::{self, KernelMode, OutputFormat};
use decotrace::error::CliError;
use decotrace::scenario_file::parse_scenario_file;

/// Decoherence thresholds, kernels, and entanglement diagnostics for
/// momentum-entangled biphotons traversing dissipative media.
#[derive(Parser)]
#[command(name = "decotrace", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArg {
    /// Scenario file (flat key = value text)
    #[arg(short = 's', long = "scenario")]
    scenario: PathBuf,
}

#[derive(Args)]
struct OutputArg {
    /// Output file; stdout when omitted
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the survival threshold N·σ_q² < σ_p² − σ_c².
    ///
    /// Exit code 0 when entanglement survives, 2 when it does not.
    Threshold {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[command(flatten)]
        output: OutputArg,
        /// Report format
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Threshold verdicts along one parameter axis.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Axis to vary: pressure, length, energy, or sigma_p
        #[arg(long)]
        axis: String,
        /// Comma-separated, strictly increasing values
        #[arg(long)]
        values: String,
        /// Unit of the values (pa/torr, m, ev/j, per_m)
        #[arg(long)]
        unit: Option<String>,
        #[command(flatten)]
        output: OutputArg,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Negativity and purity across a list of interaction numbers.
    Evolve {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Comma-separated event numbers N
        #[arg(long = "n-list")]
        n_list: String,
        /// Grid points per momentum axis
        #[arg(long, default_value_t = 32)]
        grid: usize,
        /// Grid half-width in units of max(σ_p, σ_c)
        #[arg(long, default_value_t = 5.0)]
        extent: f64,
        #[command(flatten)]
        output: OutputArg,
        /// Also dump the final state's diagonal to this file
        #[arg(long = "dump-diagonal")]
        dump_diagonal: Option<PathBuf>,
    },
    /// Schmidt spectrum and Schmidt number of the pure scenario state.
    Schmidt {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Grid points per momentum axis
        #[arg(long, default_value_t = 128)]
        grid: usize,
        /// Grid half-width in units of max(σ_p, σ_c)
        #[arg(long, default_value_t = 5.0)]
        extent: f64,
        #[command(flatten)]
        output: OutputArg,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Decoherence kernel matrix on the idler grid.
    Kernel {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// quadrature (single-event microscopic) or gaussian (multi-event)
        #[arg(long)]
        mode: String,
        /// Grid points per momentum axis
        #[arg(long, default_value_t = 64)]
        grid: usize,
        /// Grid half-width in units of max(σ_p, σ_c)
        #[arg(long, default_value_t = 5.0)]
        extent: f64,
        /// Trapezoid nodes for quadrature mode
        #[arg(long, default_value_t = 1024)]
        nodes: usize,
        /// Write the closed-form diagonal comparison here (quadrature mode)
        #[arg(long)]
        compare: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArg,
    },
}

fn write_report(target: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match target {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(raw) = std::env::var("DECOTRACE_THREADS") {
        let n: usize = raw
            .parse()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "DECOTRACE_THREADS must be a positive integer, got \"{raw}\""
                ))
            })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure {n} worker threads: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    configure_threads()?;
    match cli.command {
        Command::Threshold {
            scenario,
            output,
            format,
        } => {
            let s = parse_scenario_file(&scenario.scenario)?;
            let format: OutputFormat = format.parse()?;
            let (text, survives) = commands::run_threshold(&s, format)?;
            write_report(&output.output, &text)?;
            Ok(if survives {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Sweep {
            scenario,
            axis,
            values,
            unit,
            output,
            format,
        } => {
            let s = parse_scenario_file(&scenario.scenario)?;
            let format: OutputFormat = format.parse()?;
            let text = commands::run_sweep(&s, &axis, &values, unit.as_deref(), format)?;
            write_report(&output.output, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Evolve {
            scenario,
            n_list,
            grid,
            extent,
            output,
            dump_diagonal,
        } => {
            let s = parse_scenario_file(&scenario.scenario)?;
            let result = commands::run_evolve(&s, &n_list, grid, extent, dump_diagonal.is_some())?;
            write_report(&output.output, &result.table)?;
            if let (Some(path), Some(diag)) = (dump_diagonal, result.diagonal) {
                std::fs::write(path, diag)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Schmidt {
            scenario,
            grid,
            extent,
            output,
            format,
        } => {
            let s = parse_scenario_file(&scenario.scenario)?;
            let format: OutputFormat = format.parse()?;
            let text = commands::run_schmidt(&s, grid, extent, format)?;
            write_report(&output.output, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Kernel {
            scenario,
            mode,
            grid,
            extent,
            nodes,
            compare,
            output,
        } => {
            let s = parse_scenario_file(&scenario.scenario)?;
            let mode: KernelMode = mode.parse()?;
            let result = commands::run_kernel(&s, mode, grid, extent, nodes, compare.is_some())?;
            write_report(&output.output, &result.matrix)?;
            if let (Some(path), Some(cmp)) = (compare, result.comparison) {
                std::fs::write(path, cmp)?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("decotrace: {e}");
            ExitCode::FAILURE
        }
    }
}
