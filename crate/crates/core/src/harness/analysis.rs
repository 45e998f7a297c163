//! Post-hoc analysis: receptive-field estimation by noise screening,
//! connection-matrix export, and learning-curve aggregation.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::EpisodeRecord;
use crate::error::Error;
use crate::matrix::Matrix;
use crate::network::Network;

/// Estimate what drives a neuron: screen `samples` uniform-noise input frames
/// per round, keep the one that pushes the neuron's pre-threshold drive
/// highest (and the one pushing it lowest), and average the winners across
/// `rounds`. Returns (stimulating image, inhibitory image), both sized like
/// the input layer. Probing runs on a noise-silenced copy; the caller's
/// network is untouched.
pub fn preferred_stimulus(
    net: &Network,
    neuron: usize,
    samples: usize,
    rounds: usize,
    probe_steps: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>), Error> {
    if neuron >= net.n() {
        return Err(Error::InvalidConfig(format!(
            "neuron {neuron} out of range for a {}-neuron network",
            net.n()
        )));
    }
    if samples == 0 || rounds == 0 || probe_steps == 0 {
        return Err(Error::InvalidConfig(
            "samples, rounds, and probe steps must all be at least 1".into(),
        ));
    }
    let mut probe_cfg = net.config().clone();
    probe_cfg.noise_rate = 0.0;
    probe_cfg.seed = seed;
    let mut probe = Network::from_parts(
        probe_cfg,
        net.roles().to_vec(),
        net.positions().to_vec(),
        net.connections.clone(),
        net.plasticity.clone(),
        net.accumulated.clone(),
        net.exists_raw().to_vec(),
    )?;
    let n_input = probe.config().n_input;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut stim_sum = vec![0.0; n_input];
    let mut anti_sum = vec![0.0; n_input];
    let mut frame = vec![0.0; n_input];
    for _ in 0..rounds {
        let mut best: Option<(f64, Vec<f64>)> = None;
        let mut worst: Option<(f64, Vec<f64>)> = None;
        for _ in 0..samples {
            for v in &mut frame {
                *v = rng.gen_range(0.0..1.0);
            }
            probe.clear_firings();
            for _ in 0..probe_steps {
                probe.step(&frame)?;
            }
            let drive = probe.weighted_input(neuron, &probe.current_firings);
            if best.as_ref().map_or(true, |(b, _)| drive > *b) {
                best = Some((drive, frame.clone()));
            }
            if worst.as_ref().map_or(true, |(w, _)| drive < *w) {
                worst = Some((drive, frame.clone()));
            }
        }
        for (acc, v) in stim_sum.iter_mut().zip(&best.unwrap().1) {
            *acc += v;
        }
        for (acc, v) in anti_sum.iter_mut().zip(&worst.unwrap().1) {
            *acc += v;
        }
    }
    let scale = 1.0 / rounds as f64;
    for v in &mut stim_sum {
        *v *= scale;
    }
    for v in &mut anti_sum {
        *v *= scale;
    }
    Ok((stim_sum, anti_sum))
}

fn write_matrix_csv(m: &Matrix, path: &Path) -> Result<(), Error> {
    let mut text = String::new();
    for i in 0..m.n() {
        let row: Vec<String> = m.row(i).iter().map(|v| v.to_string()).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text).map_err(Error::io(path))
}

/// Export the connection matrix as a dense CSV (row = presynaptic neuron,
/// column = postsynaptic) and the plasticity matrix alongside it, so frozen
/// connections (plasticity 0) stay identifiable. For `out.csv` the companion
/// is `out.plasticity.csv`.
pub fn export_heatmap(net: &Network, path: &Path) -> Result<(), Error> {
    write_matrix_csv(&net.connections, path)?;
    write_matrix_csv(&net.plasticity, &path.with_extension("plasticity.csv"))
}

pub fn load_matrix_csv(path: &Path) -> Result<Matrix, Error> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    let rows: Vec<&str> = text.lines().collect();
    let n = rows.len();
    let mut m = Matrix::zeros(n);
    for (i, line) in rows.iter().enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != n {
            return Err(Error::parse(
                path,
                format!("row {i} has {} cells, expected {n}", cells.len()),
            ));
        }
        for (j, cell) in cells.iter().enumerate() {
            m[(i, j)] = cell
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::parse(path, format!("row {i}, col {j}: {e}")))?;
        }
    }
    Ok(m)
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        (xs[mid - 1] + xs[mid]) / 2.0
    }
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Mean over a trailing window at each point, for smoothed learning curves.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    values
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let lo = (i + 1).saturating_sub(w);
            mean(&values[lo..=i])
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct AggregateStats {
    pub episodes: usize,
    pub goals: usize,
    /// Fewest steps over goal-reaching episodes, if any reached it.
    pub best_goal_steps: Option<u32>,
    pub mean_steps: f64,
    pub mean_reward_per_step: f64,
    pub mean_total_reward: f64,
    pub mean_novelty: f64,
    pub first_quartile_median_steps: f64,
    pub last_quartile_median_steps: f64,
    pub first_quartile_mean_reward_per_step: f64,
    pub last_quartile_mean_reward_per_step: f64,
}

pub fn aggregate(records: &[EpisodeRecord]) -> AggregateStats {
    let steps: Vec<f64> = records.iter().map(|r| f64::from(r.steps)).collect();
    let rps: Vec<f64> = records.iter().map(|r| r.mean_reward).collect();
    let q = (records.len() / 4).max(1).min(records.len().max(1));
    let (first, last) = if records.is_empty() {
        (0..0, 0..0)
    } else {
        (0..q, records.len() - q..records.len())
    };
    AggregateStats {
        episodes: records.len(),
        goals: records.iter().filter(|r| r.goal).count(),
        best_goal_steps: records
            .iter()
            .filter(|r| r.goal)
            .map(|r| r.steps)
            .min(),
        mean_steps: mean(&steps),
        mean_reward_per_step: mean(&rps),
        mean_total_reward: mean(&records.iter().map(|r| r.total_reward).collect::<Vec<_>>()),
        mean_novelty: mean(&records.iter().map(|r| r.novelty).collect::<Vec<_>>()),
        first_quartile_median_steps: median(steps[first.clone()].to_vec()),
        last_quartile_median_steps: median(steps[last.clone()].to_vec()),
        first_quartile_mean_reward_per_step: mean(&rps[first]),
        last_quartile_mean_reward_per_step: mean(&rps[last]),
    }
}

pub fn load_records(path: &Path) -> Result<Vec<EpisodeRecord>, Error> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| Error::parse(path, format!("line {}: {e}", i + 1)))
        })
        .collect()
}

#[derive(Serialize)]
pub struct SummaryReport {
    pub stats: AggregateStats,
    pub moving_avg_steps: Vec<f64>,
    pub moving_avg_reward_per_step: Vec<f64>,
}

/// Aggregate a JSONL episode log into a report (moving averages use a
/// 10-episode trailing window).
pub fn summarize(path: &Path) -> Result<SummaryReport, Error> {
    let records = load_records(path)?;
    let steps: Vec<f64> = records.iter().map(|r| f64::from(r.steps)).collect();
    let rps: Vec<f64> = records.iter().map(|r| r.mean_reward).collect();
    Ok(SummaryReport {
        stats: aggregate(&records),
        moving_avg_steps: moving_average(&steps, 10),
        moving_avg_reward_per_step: moving_average(&rps, 10),
    })
}
