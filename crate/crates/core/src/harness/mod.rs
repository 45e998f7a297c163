//! Experiment runner: binds a network, a learning rule, and an environment
//! into the per-step loop, sweeps seeds, and persists logs next to a config
//! echo so every run is auditable and exactly repeatable.
//!
//! Per environment step: encode the observation, let the network settle for
//! `steps_per_decision` micro-steps, read the action off the output slice,
//! advance the environment, then learn. The learning block injects the reward
//! signal into the reward neuron (when the signal precedes the update), runs
//! one STDP update over the final micro-step transition, and applies the
//! direct-reward strategy. Firing novelty is measured after the STDP update
//! it describes and feeds the same step's direct-reward pass.

pub mod analysis;
pub mod snapshot;

use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, MemoryMode, RewardSource, StdpMode};
use crate::encode;
use crate::env::{self, Action, ActionSpace, Environment};
use crate::error::Error;
use crate::learning::{novelty_firing, novelty_frames};
use crate::network::{FiringState, Network};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub steps: u32,
    pub total_reward: f64,
    pub mean_reward: f64,
    /// Sum of the intrinsic novelty measure over the episode (0 when the
    /// reward source is the environment itself).
    pub novelty: f64,
    pub goal: bool,
    /// Wall-clock time is kept in memory for operators but never serialized,
    /// so logs from identical (config, seed) runs are byte-identical.
    #[serde(skip)]
    pub wall_ms: u64,
}

/// Per-neuron firing rates conditioned on the stimulus stage of a stream
/// environment.
#[derive(Clone, Debug)]
pub struct StageRates {
    fired: [Vec<u64>; 2],
    samples: [u64; 2],
}

impl StageRates {
    fn new(n: usize) -> Self {
        StageRates {
            fired: [vec![0; n], vec![0; n]],
            samples: [0, 0],
        }
    }

    fn record(&mut self, stage: u8, firings: &FiringState) {
        let s = usize::from(stage != 0);
        self.samples[s] += 1;
        for i in 0..firings.len() {
            if firings.get(i) {
                self.fired[s][i] += 1;
            }
        }
    }

    pub fn samples(&self, stage: usize) -> u64 {
        self.samples[stage]
    }

    pub fn rate(&self, stage: usize, neuron: usize) -> f64 {
        if self.samples[stage] == 0 {
            return 0.0;
        }
        self.fired[stage][neuron] as f64 / self.samples[stage] as f64
    }

    /// Absolute between-stage firing-rate difference for one neuron.
    pub fn separation(&self, neuron: usize) -> f64 {
        (self.rate(0, neuron) - self.rate(1, neuron)).abs()
    }
}

pub struct SeedRun {
    pub seed: u64,
    pub records: Vec<EpisodeRecord>,
    pub eval_records: Vec<EpisodeRecord>,
    /// Stage-conditioned rates, collected over the second half of training
    /// and all eval episodes of stream environments.
    pub stage_rates: Option<StageRates>,
    pub network: Network,
}

pub struct ExperimentOutcome {
    pub runs: Vec<SeedRun>,
}

/// Stable per-purpose sub-seeds so the network and environment never share
/// an RNG stream (splitmix64 finalizer).
pub(crate) fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const NET_STREAM: u64 = 1;
const ENV_STREAM: u64 = 2;

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, Error> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output_dir).map_err(Error::io(&cfg.output_dir))?;
    let echo_path = cfg.output_dir.join("config.toml");
    let echo = toml::to_string_pretty(cfg)
        .map_err(|e| Error::InvalidConfig(format!("config is not serializable: {e}")))?;
    fs::write(&echo_path, echo).map_err(Error::io(&echo_path))?;

    let mut runs = Vec::with_capacity(cfg.seeds.len());
    for &seed in &cfg.seeds {
        let run = run_seed(cfg, seed)?;
        persist_run(cfg, &run)?;
        runs.push(run);
    }
    write_summary(cfg, &runs)?;
    Ok(ExperimentOutcome { runs })
}

pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<SeedRun, Error> {
    let mut env = env::build(&cfg.environment, mix_seed(seed, ENV_STREAM));
    run_seed_in(cfg, seed, env.as_mut())
}

/// Run one seed against a caller-supplied environment. This is the seam used
/// to wrap or instrument environments without touching the loop.
pub fn run_seed_in(
    cfg: &ExperimentConfig,
    seed: u64,
    env: &mut dyn Environment,
) -> Result<SeedRun, Error> {
    cfg.validate()?;
    let mut net_cfg = cfg.network.clone();
    net_cfg.seed = mix_seed(seed, NET_STREAM);
    let mut net = Network::build(&net_cfg)?;

    let mut rates = None;
    let rates_from = cfg.episodes / 2;
    let mut records = Vec::with_capacity(cfg.episodes);
    for ep in 0..cfg.episodes {
        let track = ep >= rates_from;
        records.push(run_episode(&mut net, env, cfg, ep, true, track, &mut rates)?);
        if cfg.network.memory_mode != MemoryMode::Off
            && cfg.consolidate_every > 0
            && (ep + 1) % cfg.consolidate_every == 0
        {
            net.consolidate();
        }
    }
    let mut eval_records = Vec::with_capacity(cfg.eval_episodes);
    for ep in 0..cfg.eval_episodes {
        eval_records.push(run_episode(&mut net, env, cfg, ep, false, true, &mut rates)?);
    }
    Ok(SeedRun {
        seed,
        records,
        eval_records,
        stage_rates: rates,
        network: net,
    })
}

fn run_episode(
    net: &mut Network,
    env: &mut dyn Environment,
    cfg: &ExperimentConfig,
    episode: usize,
    train: bool,
    track_rates: bool,
    rates: &mut Option<StageRates>,
) -> Result<EpisodeRecord, Error> {
    let started = Instant::now();
    let encoding = cfg.encoding_effective();
    let gamma = cfg.network.gamma;
    let has_reward_neuron = net.reward_index().is_some();

    let mut obs = env.reset();
    let mut stage = env.stage();
    if cfg.reset_firings {
        net.clear_firings();
    }

    let mut buf = Vec::new();
    let mut steps = 0;
    let mut total_reward = 0.0;
    let mut novelty_total = 0.0;
    let mut goal = false;

    for _ in 0..cfg.max_steps {
        encode::encode(encoding, &obs, &mut buf);
        for _ in 0..cfg.steps_per_decision {
            net.step(&buf)?;
        }
        if track_rates {
            if let Some(s) = stage {
                rates
                    .get_or_insert_with(|| StageRates::new(net.n()))
                    .record(s, &net.current_firings);
            }
        }
        let action = match env.action_space() {
            ActionSpace::Discrete(n) => Action::Discrete(net.action_discrete(n)),
            ActionSpace::Continuous { lo, hi } => Action::Continuous(net.action_continuous(lo, hi)),
        };
        let res = env.step(action)?;
        steps = res.steps;
        total_reward += res.reward;
        goal |= res.goal;

        if train {
            let mut signal = match cfg.reward_source {
                RewardSource::EnvReward => res.reward,
                RewardSource::NoveltyFrames => {
                    let nov = novelty_frames(&obs.values, &res.observation.values)?;
                    novelty_total += nov;
                    cfg.novelty_scale * nov
                }
                // Not known yet; measured from the update below.
                RewardSource::NoveltyFiring => 0.0,
            };
            if cfg.reward_source != RewardSource::NoveltyFiring && has_reward_neuron {
                net.inject_reward(signal)?;
            }
            match cfg.stdp_mode {
                StdpMode::Off => {}
                StdpMode::Plain => {
                    net.stdp_update(gamma, 1.0);
                }
                StdpMode::Modulated => {
                    net.stdp_update(gamma, signal);
                }
            }
            if cfg.reward_source == RewardSource::NoveltyFiring {
                let nov = novelty_firing(net, &net.last_firings, &net.current_firings);
                novelty_total += nov;
                signal = cfg.novelty_scale * nov;
                if has_reward_neuron {
                    net.inject_reward(signal)?;
                }
            }
            if cfg.direct_reward && signal != 0.0 {
                net.direct_reward(cfg.network.reward_strategy, signal, gamma);
            }
        }

        stage = env.stage();
        obs = res.observation;
        if res.done {
            break;
        }
    }

    let steps_f = f64::from(steps.max(1));
    Ok(EpisodeRecord {
        episode,
        steps,
        total_reward,
        mean_reward: total_reward / steps_f,
        novelty: novelty_total,
        goal,
        wall_ms: started.elapsed().as_millis() as u64,
    })
}

fn write_jsonl(path: &Path, records: &[EpisodeRecord]) -> Result<(), Error> {
    let mut out = Vec::new();
    for rec in records {
        let line = serde_json::to_string(rec)
            .map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        out.push(line);
    }
    let mut text = out.join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    fs::write(path, text).map_err(Error::io(path))
}

fn persist_run(cfg: &ExperimentConfig, run: &SeedRun) -> Result<(), Error> {
    let dir = cfg.output_dir.join(format!("seed_{}", run.seed));
    fs::create_dir_all(&dir).map_err(Error::io(&dir))?;

    write_jsonl(&dir.join("episodes.jsonl"), &run.records)?;
    if !run.eval_records.is_empty() {
        write_jsonl(&dir.join("eval.jsonl"), &run.eval_records)?;
    }

    let curve_path = dir.join("curve.csv");
    let mut curve = String::from("episode,steps,reward,novelty\n");
    for rec in &run.records {
        curve.push_str(&format!(
            "{},{},{},{}\n",
            rec.episode, rec.steps, rec.total_reward, rec.novelty
        ));
    }
    let mut f = fs::File::create(&curve_path).map_err(Error::io(&curve_path))?;
    f.write_all(curve.as_bytes()).map_err(Error::io(&curve_path))?;

    if let Some(rates) = &run.stage_rates {
        let path = dir.join("stage_rates.csv");
        let mut text = String::from("neuron,role,stage0_rate,stage1_rate,separation\n");
        for (i, role) in run.network.roles().iter().enumerate() {
            text.push_str(&format!(
                "{},{:?},{},{},{}\n",
                i,
                role,
                rates.rate(0, i),
                rates.rate(1, i),
                rates.separation(i)
            ));
        }
        fs::write(&path, text).map_err(Error::io(&path))?;
    }

    snapshot::save(&run.network, &dir.join("network.json"))
}

#[derive(Serialize)]
struct SeedSummary {
    seed: u64,
    train: analysis::AggregateStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    eval: Option<analysis::AggregateStats>,
}

fn write_summary(cfg: &ExperimentConfig, runs: &[SeedRun]) -> Result<(), Error> {
    #[derive(Serialize)]
    struct Summary<'a> {
        environment: &'a crate::config::EnvSpec,
        seeds: Vec<SeedSummary>,
    }
    let summary = Summary {
        environment: &cfg.environment,
        seeds: runs
            .iter()
            .map(|r| SeedSummary {
                seed: r.seed,
                train: analysis::aggregate(&r.records),
                eval: (!r.eval_records.is_empty()).then(|| analysis::aggregate(&r.eval_records)),
            })
            .collect(),
    };
    let path = cfg.output_dir.join("summary.json");
    let text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Parse {
        path: path.clone(),
        message: e.to_string(),
    })?;
    fs::write(&path, text).map_err(Error::io(&path))
}
