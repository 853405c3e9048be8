//! Command-line entry point: reproducible, config-driven runs of the
//! design sweeps, excitation spectra, blockade demos and the verification
//! suite.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver failure,
//! 4 verification failure.

use clap::{Parser, Subcommand};
use sqem::experiments::config::{defaults_table, resolve_config, Experiment, ExperimentConfig};
use sqem::experiments::manifest::RunManifest;
use sqem::experiments::runs;
use sqem::SqemError;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "sqem",
    version,
    about = "Squeezed-bath electromechanics: design curves, excitation spectra, photon blockade and frame verifications",
    after_long_help = concat!(
        "CONFIG:\n",
        "  JSON file merged over the defaults (print them with --print-defaults);\n",
        "  --set key.path=value applies dotted-path overrides after the file.\n",
        "  Unknown keys are hard errors. A run manifest can be passed back as\n",
        "  --config to reproduce a dataset.\n",
    )
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config file (or a previous run manifest) merged over the defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (default: the config's `output`, normally `out`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Dotted-path config override, e.g. --set g2.delta0=-0.5 (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Print the full defaults table and exit.
    #[arg(long, global = true)]
    print_defaults: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Coupling and frequency design sweeps plus the balanced operating point.
    Design,
    /// Steady-state excitation spectra of the driven blockade model.
    Spectrum,
    /// Photon-blockade demo: g2(0) trajectory, steady solve, control, oracle.
    G2,
    /// Verification suite: dissipator identity, frame equivalence, RWA validity.
    Verify,
    /// Everything above, in order.
    All,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, SqemError> {
    let contents = match &cli.config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|e| {
            SqemError::Config(format!("cannot read {}: {e}", path.display()))
        })?),
        None => None,
    };
    resolve_config(contents.as_deref(), &cli.set)
}

fn report(manifest: &RunManifest, outdir: &Path) {
    for check in &manifest.checks {
        let tag = if check.passed { "ok  " } else { "FAIL" };
        eprintln!("  [{tag}] {}: {}", check.name, check.detail);
    }
    for output in &manifest.outputs {
        println!("wrote {}", outdir.join(output).display());
    }
    println!(
        "{}: {} checks, {:.2} s",
        manifest.experiment,
        manifest.checks.len(),
        manifest.duration_seconds
    );
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.print_defaults {
        println!("{}", defaults_table());
        return ExitCode::SUCCESS;
    }

    let cfg = match load_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    let threads = cli.threads.unwrap_or(cfg.threads);
    if threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("warning: thread pool already initialized: {e}");
        }
    }

    let outdir = cli.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output));
    if let Err(e) = std::fs::create_dir_all(&outdir) {
        eprintln!("error: cannot create output directory {}: {e}", outdir.display());
        return ExitCode::from(2);
    }

    let experiments: Vec<&str> = match cli.command {
        Command::Design => vec!["design"],
        Command::Spectrum => vec!["spectrum"],
        Command::G2 => vec!["g2"],
        Command::Verify => vec!["verify"],
        Command::All => vec!["design", "spectrum", "g2", "verify"],
    };

    let mut verification_failed = false;
    for exp in experiments {
        let result = match exp {
            "design" => runs::run_design(&cfg, &outdir),
            "spectrum" => runs::run_spectrum(&cfg, &outdir),
            "g2" => runs::run_g2(&cfg, &outdir),
            "verify" => {
                let only = match cfg.experiment {
                    Some(
                        e @ (Experiment::VerifyFrames
                        | Experiment::VerifyDissipator
                        | Experiment::VerifyRwa),
                    ) => Some(e),
                    _ => None,
                };
                runs::run_verifications(&cfg, &outdir, only)
            }
            _ => unreachable!(),
        };
        match result {
            Ok(manifest) => {
                report(&manifest, &outdir);
                if !manifest.all_passed() {
                    verification_failed = true;
                }
            }
            Err(e @ SqemError::Config(_)) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(3);
            }
        }
    }

    if verification_failed {
        eprintln!("one or more embedded checks failed");
        return ExitCode::from(4);
    }
    ExitCode::SUCCESS
}
