use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vpp_cli::experiment::{run_experiment, run_sweep};
use vpp_cli::{load_config, CliError, LoadedConfig, Result};
use vpp_core::verification::{criterion, CRITERIA};

/// Vector penalty-projection solver for incompressible flow around a moving obstacle.
#[derive(Debug, Parser)]
#[command(name = "vpp", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (run and sweep default to `out`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Suppress progress and the defaults echo.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one configuration.
    Run,
    /// Run every value of the config's [sweep] section and fit exponents.
    Sweep,
    /// Run the acceptance criteria (all, or the ids given).
    Verify { ids: Vec<String> },
    /// Print the resolved configuration with defaults marked.
    PrintConfig,
}

fn load(path: Option<&Path>) -> Result<LoadedConfig> {
    let path = path.ok_or_else(|| CliError::invalid("--config", "required for this command"))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut loaded = load_config(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    loaded.config.resolve_paths(base);
    Ok(loaded)
}

fn echo_defaults(loaded: &LoadedConfig, quiet: bool) {
    if quiet || loaded.defaulted.is_empty() {
        return;
    }
    eprintln!("defaults applied:");
    for line in loaded.defaults_block().lines() {
        eprintln!("  {line}");
    }
}

fn write_echo(loaded: &LoadedConfig, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let path = out.join("config.toml");
    std::fs::write(&path, loaded.echo()).map_err(|e| CliError::io(path, e))
}

fn execute(cli: &Cli) -> Result<()> {
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    match &cli.command {
        Command::PrintConfig => {
            print!("{}", load(cli.config.as_deref())?.echo());
        }
        Command::Run => {
            let loaded = load(cli.config.as_deref())?;
            if loaded.config.sweep.is_some() {
                return Err(CliError::invalid(
                    "sweep",
                    "config has a [sweep] section; use the sweep verb",
                ));
            }
            echo_defaults(&loaded, cli.quiet);
            write_echo(&loaded, &out)?;
            let m = run_experiment(&loaded.config, &out)?;
            if !cli.quiet {
                println!(
                    "{} steps, final kinetic energy {:e}, final div {:e}, div L2(0,T) {:e}",
                    m.steps, m.final_kinetic_energy, m.final_div_norm, m.div_l2t
                );
                if let Some(e) = m.velocity_error {
                    println!("velocity error against the exact vortex {e:e}");
                }
            }
        }
        Command::Sweep => {
            let loaded = load(cli.config.as_deref())?;
            echo_defaults(&loaded, cli.quiet);
            write_echo(&loaded, &out)?;
            let s = run_sweep(&loaded.config, &out)?;
            if !cli.quiet {
                println!("{} runs over {}", s.runs.len(), s.parameter.name());
                for f in &s.fits {
                    if let (Some(a), Some(r)) = (f.exponent, f.residual) {
                        println!("{} exponent {a:.4} (fit residual {r:.2e})", f.metric);
                    }
                }
            }
        }
        Command::Verify { ids } => {
            let selected: Vec<_> = if ids.is_empty() {
                CRITERIA.iter().collect()
            } else {
                ids.iter()
                    .map(|id| {
                        criterion(id).ok_or_else(|| {
                            CliError::invalid("verify", format!("unknown criterion `{id}`"))
                        })
                    })
                    .collect::<Result<_>>()?
            };
            let mut lines = Vec::new();
            let mut failed = 0;
            for c in &selected {
                let report = c.evaluate();
                println!("{}", report.line());
                failed += usize::from(!report.passed);
                lines.push(report.line());
            }
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
                let path = dir.join("verification.txt");
                std::fs::write(&path, lines.join("\n") + "\n")
                    .map_err(|e| CliError::io(path, e))?;
            }
            if failed > 0 {
                return Err(CliError::Verification {
                    failed,
                    total: selected.len(),
                });
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
