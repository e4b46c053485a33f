use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use boundseek::distance::{metric_by_name, MetricSettings};
use boundseek::pipeline::{self, PresetAnalysis, MANIFEST_FILE};
use boundseek::{RunConfig, METRIC_NAMES, ORACLE_NAMES};
use clap::{Parser, Subcommand};

/// Exit status when a run finished but some boundary verdict does not hold.
const EXIT_VERDICT_FAILED: u8 = 2;

#[derive(Parser)]
#[command(
    name = "boundseek",
    version,
    about = "Find the valid/invalid boundary of a string parser"
)]
struct Cli {
    /// Worker threads for the parallel stages (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Print nothing but errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate, mutate and analyse as described by a config file.
    Run {
        config: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Run directory; overrides the config's `output_dir`.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Root for run directories when neither --output nor `output_dir` is given.
        #[arg(long, env = "BOUNDSEEK_OUTPUT_ROOT", default_value = "runs")]
        output_root: PathBuf,
        /// Reuse a directory that already holds a run.
        #[arg(long)]
        force: bool,
    },
    /// Re-analyse a finished run without regenerating any set.
    Analyze {
        run_dir: PathBuf,
        /// Comma-separated analysis metrics (default: the run's own).
        #[arg(long, value_delimiter = ',')]
        metrics: Option<Vec<String>>,
        /// Where to write the analysis files (default: the run directory).
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// List the built-in validity oracles.
    Oracles {
        #[command(subcommand)]
        action: ListAction,
    },
    /// List the distance metrics.
    Metrics {
        #[command(subcommand)]
        action: ListAction,
    },
}

#[derive(Subcommand)]
enum ListAction {
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VERDICT_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Returns whether every verdict held.
fn dispatch(cli: Cli) -> Result<bool> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring the worker pool")?;
    }
    match cli.command {
        Command::Run {
            config,
            seed,
            output,
            output_root,
            force,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let run_dir = output
                .or_else(|| cfg.output_dir.clone())
                .unwrap_or_else(|| output_root.join(default_run_name(&config, cfg.seed)));
            if !force && run_dir.join(MANIFEST_FILE).exists() {
                bail!(
                    "{} already holds a run; pass --force to overwrite it",
                    run_dir.display()
                );
            }
            let outcome = pipeline::run_pipeline(&cfg, &run_dir)?;
            if !cli.quiet {
                println!("run directory: {}", run_dir.display());
                print_verdicts(&outcome.analyses);
                for preset in &outcome.manifest.counts.presets {
                    for note in &preset.notes {
                        println!(
                            "note: preset {} seed {} stopped early ({}, {} switches)",
                            preset.preset, note.seed_index, note.outcome, note.switches
                        );
                    }
                }
            }
            Ok(outcome.manifest.all_hold())
        }
        Command::Analyze {
            run_dir,
            metrics,
            output,
        } => {
            let (analyses, summaries) =
                pipeline::reanalyze(&run_dir, metrics.as_deref(), output.as_deref())?;
            if !cli.quiet {
                print_verdicts(&analyses);
            }
            Ok(summaries.iter().all(|s| s.holds))
        }
        Command::Oracles {
            action: ListAction::List,
        } => {
            if !cli.quiet {
                for name in ORACLE_NAMES {
                    println!("{name:<10} {}", oracle_description(name));
                }
            }
            Ok(true)
        }
        Command::Metrics {
            action: ListAction::List,
        } => {
            if !cli.quiet {
                let settings = MetricSettings::default();
                for name in METRIC_NAMES {
                    let metric = metric_by_name(name, &settings).expect("registered metric");
                    println!("{name:<12} {:?}", metric.kind());
                }
            }
            Ok(true)
        }
    }
}

fn default_run_name(config: &Path, seed: u64) -> String {
    let stem = config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".to_owned());
    format!("{stem}-seed{seed}")
}

fn oracle_description(name: &str) -> &'static str {
    match name {
        "date" => "calendar dates in the configured formats",
        "json" => "strict JSON text (RFC 8259)",
        "xml" => "well-formed XML 1.0 documents",
        "regex" => "patterns accepted by the regex crate",
        "command" => "an external program; exit status 0 means valid",
        _ => "",
    }
}

fn print_verdicts(analyses: &[PresetAnalysis]) {
    for a in analyses {
        for (report, v) in a.reports.iter().zip(&a.verdicts) {
            let medians: Vec<String> = v
                .medians
                .iter()
                .map(|(c, m)| format!("{}={m:.4}", c.as_str().trim_start_matches("mvs_vs_")))
                .collect();
            println!(
                "{:<14} {:<12} {:<5} margin={:.4}  {}",
                a.preset,
                report.metric,
                if v.holds { "holds" } else { "FAILS" },
                v.margin,
                medians.join(" ")
            );
        }
    }
}
