use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Parser, Subcommand};

use spikebox::harness::{self, analysis, snapshot};
use spikebox::ExperimentConfig;

#[derive(Parser)]
#[command(name = "spikebox", version, about = "Spiking-network experiment runner")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment config across its whole seed list.
    ///
    /// SPIKEBOX_OUTPUT_DIR overrides the config's output directory.
    Run { config: PathBuf },
    /// Aggregate a JSONL episode log into summary statistics.
    Summarize { log: PathBuf },
    /// Estimate which input drives a neuron, by noise screening.
    Stimulus {
        /// Network snapshot (network.json from a run directory).
        network: PathBuf,
        #[arg(long)]
        neuron: usize,
        /// Noise frames screened per round.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Rounds averaged into the final images.
        #[arg(long, default_value_t = 5)]
        rounds: usize,
        /// Network steps per frame before reading the neuron's drive.
        #[arg(long, default_value_t = 1)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Export connection strengths (and plasticity alongside) as CSV.
    Heatmap { network: PathBuf, out: PathBuf },
}

fn main() -> anyhow::Result<()> {
    match run() {
        // Reader hung up (`spikebox summarize … | head`); not our error.
        Err(e)
            if e.downcast_ref::<std::io::Error>()
                .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) =>
        {
            Ok(())
        }
        other => other,
    }
}

fn run() -> anyhow::Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match Cli::parse().cmd {
        Cmd::Run { config } => {
            let mut cfg = ExperimentConfig::from_path(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            if let Ok(dir) = std::env::var("SPIKEBOX_OUTPUT_DIR") {
                cfg.output_dir = dir.into();
            }
            let outcome = harness::run_experiment(&cfg)?;
            for run in &outcome.runs {
                let train = analysis::aggregate(&run.records);
                write!(
                    out,
                    "seed {}: {} episodes, {} goals, mean steps {:.1}",
                    run.seed, train.episodes, train.goals, train.mean_steps
                )?;
                if let Some(best) = train.best_goal_steps {
                    write!(out, ", best goal in {best} steps")?;
                }
                if !run.eval_records.is_empty() {
                    let eval = analysis::aggregate(&run.eval_records);
                    write!(out, ", eval mean reward/step {:.3}", eval.mean_reward_per_step)?;
                }
                writeln!(out)?;
            }
            writeln!(out, "artifacts written to {}", cfg.output_dir.display())?;
        }
        Cmd::Summarize { log } => {
            let report = analysis::summarize(&log)?;
            writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        }
        Cmd::Stimulus {
            network,
            neuron,
            samples,
            rounds,
            steps,
            seed,
        } => {
            let net = snapshot::load(&network)
                .with_context(|| format!("loading {}", network.display()))?;
            let (stimulating, inhibitory) =
                analysis::preferred_stimulus(&net, neuron, samples, rounds, steps, seed)?;
            #[derive(serde::Serialize)]
            struct Images {
                neuron: usize,
                stimulating: Vec<f64>,
                inhibitory: Vec<f64>,
            }
            writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&Images {
                    neuron,
                    stimulating,
                    inhibitory
                })?
            )?;
        }
        Cmd::Heatmap { network, out: path } => {
            let net = snapshot::load(&network)
                .with_context(|| format!("loading {}", network.display()))?;
            analysis::export_heatmap(&net, &path)?;
            writeln!(
                out,
                "wrote {} and {}",
                path.display(),
                path.with_extension("plasticity.csv").display()
            )?;
        }
    }
    Ok(())
}
