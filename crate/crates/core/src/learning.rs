//! Plasticity over paired firing snapshots, reward application, the summing
//! reward neuron, novelty measures, and memory consolidation.
//!
//! Every rule here reads two consecutive snapshots: α (the earlier firing)
//! and β (the later one). The update direction for connection i→j factors
//! into a predictivity term
//!
//! ```text
//! f0[i][j] = β_j − (1 − α_i)
//! ```
//!
//! which is +1 when i fired and j followed and −1 when j stayed silent after
//! i's silence, and a symmetric co-occurrence gate
//!
//! ```text
//! f1[i][j] = (β_i ∧ α_j) ∨ (α_i ∧ β_j)
//! ```
//!
//! which keeps only pairs that actually took part in the window. The applied
//! change is `modulation · γ · P ∘ (f0 ∘ f1)` with the diagonal left alone,
//! clipped to ±c_max; its absolute value accrues in A. Negative modulation
//! unlearns the same pattern it would otherwise learn.

use crate::config::{MemoryMode, RewardStrategy};
use crate::error::Error;
use crate::network::{FiringState, Network, NeuronRole};

/// Direction matrix Δ of one update; entries in {-1, 0, +1}, zero diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StdpUpdate {
    n: usize,
    delta: Vec<i8>,
}

impl StdpUpdate {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self, i: usize, j: usize) -> i8 {
        self.delta[i * self.n + j]
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, i8)> + '_ {
        let n = self.n;
        self.delta
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != 0)
            .map(move |(idx, &d)| (idx / n, idx % n, d))
    }
}

/// Full predictivity matrix f0, row-major, including the diagonal.
pub fn predictivity(alpha: &FiringState, beta: &FiringState) -> Vec<i8> {
    let n = alpha.len();
    assert_eq!(n, beta.len(), "snapshot sizes differ");
    let mut out = vec![0i8; n * n];
    for i in 0..n {
        let a = i8::from(alpha.get(i));
        for j in 0..n {
            out[i * n + j] = i8::from(beta.get(j)) - (1 - a);
        }
    }
    out
}

/// Full co-occurrence mask f1, row-major, 0/1, symmetric.
pub fn cooccurrence(alpha: &FiringState, beta: &FiringState) -> Vec<u8> {
    let n = alpha.len();
    assert_eq!(n, beta.len(), "snapshot sizes differ");
    let mut out = vec![0u8; n * n];
    for i in 0..n {
        let (ai, bi) = (alpha.get(i), beta.get(i));
        if !ai && !bi {
            continue;
        }
        for j in 0..n {
            out[i * n + j] = u8::from((bi && alpha.get(j)) || (ai && beta.get(j)));
        }
    }
    out
}

/// Δ = f0 ∘ f1 with the diagonal forced to zero. Only neurons that fired in
/// either snapshot can contribute, so the sweep is restricted to those.
pub fn update_direction(alpha: &FiringState, beta: &FiringState) -> StdpUpdate {
    let n = alpha.len();
    assert_eq!(n, beta.len(), "snapshot sizes differ");
    let involved: Vec<usize> = (0..n).filter(|&k| alpha.get(k) || beta.get(k)).collect();
    let mut delta = vec![0i8; n * n];
    for &i in &involved {
        let (ai, bi) = (alpha.get(i), beta.get(i));
        for &j in &involved {
            if i == j {
                continue;
            }
            let gate = (bi && alpha.get(j)) || (ai && beta.get(j));
            if gate {
                delta[i * n + j] = i8::from(beta.get(j)) - (1 - i8::from(ai));
            }
        }
    }
    StdpUpdate { n, delta }
}

impl Network {
    /// Apply one paired-snapshot update to the stored (α, β) = (last,
    /// current) firings and return its direction matrix. The weight change
    /// on i→j is `modulation · γ · P[i][j] · Δ[i][j]`, clipped to ±c_max;
    /// the pre-clip magnitude accrues in A. Entries with zero plasticity are
    /// untouched down to the bit pattern.
    pub fn stdp_update(&mut self, gamma: f64, modulation: f64) -> StdpUpdate {
        let dir = update_direction(&self.last_firings, &self.current_firings);
        let c_max = self.cfg.c_max;
        for (i, j, d) in dir.nonzero() {
            let base = gamma * self.plasticity[(i, j)] * f64::from(d);
            let change = modulation * base;
            if change != 0.0 {
                self.connections[(i, j)] =
                    (self.connections[(i, j)] + change).clamp(-c_max, c_max);
                self.accumulated[(i, j)] += change.abs();
            }
        }
        dir
    }

    /// Nudge a strategy-selected subset of connections by `reward · γ`,
    /// gated by plasticity and clipped like any other update. Negative
    /// reward pushes the subset the other way.
    pub fn direct_reward(&mut self, strategy: RewardStrategy, reward: f64, gamma: f64) {
        if reward == 0.0 {
            return;
        }
        let n = self.n();
        let c_max = self.cfg.c_max;

        // Field-disjoint closure over the weight matrices.
        macro_rules! nudge {
            ($i:expr, $j:expr) => {{
                let (i, j) = ($i, $j);
                let change = reward * gamma * self.plasticity[(i, j)];
                if change != 0.0 {
                    self.connections[(i, j)] =
                        (self.connections[(i, j)] + change).clamp(-c_max, c_max);
                    self.accumulated[(i, j)] += change.abs();
                }
            }};
        }

        match strategy {
            RewardStrategy::AllConnections => {
                for i in 0..n {
                    for j in 0..n {
                        if self.exists[i * n + j] {
                            nudge!(i, j);
                        }
                    }
                }
            }
            RewardStrategy::OutputsOfFired => {
                for i in 0..n {
                    if !self.current_firings.get(i) {
                        continue;
                    }
                    for j in 0..n {
                        if self.exists[i * n + j] {
                            nudge!(i, j);
                        }
                    }
                }
            }
            RewardStrategy::UsedConnections => {
                for i in 0..n {
                    if !self.last_firings.get(i) {
                        continue;
                    }
                    for j in 0..n {
                        if !self.exists[i * n + j] {
                            continue;
                        }
                        let c = self.connections[(i, j)];
                        let used = if self.current_firings.get(j) {
                            c > 0.0
                        } else {
                            c < 0.0
                        };
                        if used {
                            nudge!(i, j);
                        }
                    }
                }
            }
            RewardStrategy::ActionInputs => {
                for j in 0..n {
                    if self.roles[j] != NeuronRole::Output {
                        continue;
                    }
                    for i in 0..n {
                        if self.exists[i * n + j] {
                            nudge!(i, j);
                        }
                    }
                }
            }
            RewardStrategy::ActionInputsBothFired => {
                for j in 0..n {
                    if self.roles[j] != NeuronRole::Output || !self.current_firings.get(j) {
                        continue;
                    }
                    for i in 0..n {
                        if self.exists[i * n + j] && self.last_firings.get(i) {
                            nudge!(i, j);
                        }
                    }
                }
            }
        }
    }

    /// Drive the reward neuron: it fires when the external reward plus its
    /// weighted input from the current snapshot reaches threshold, so firing
    /// can also be triggered by connections that learned to predict reward.
    /// Returns whether it fired.
    pub fn inject_reward(&mut self, reward: f64) -> Result<bool, Error> {
        let r = self
            .reward_index()
            .ok_or_else(|| Error::InvalidConfig("network has no reward neuron".into()))?;
        let sum = reward + self.weighted_input(r, &self.current_firings);
        let fired = sum >= self.cfg.threshold;
        self.current_firings.set(r, fired);
        Ok(fired)
    }

    /// Consolidate memories per the configured mode. Plasticity never
    /// increases; an entry once at zero stays at zero.
    pub fn consolidate(&mut self) {
        let n = self.n();
        match self.cfg.memory_mode {
            MemoryMode::Off => {}
            MemoryMode::UniformAging => {
                let rate = self.cfg.aging_rate;
                for i in 0..n {
                    for j in 0..n {
                        if self.exists[i * n + j] {
                            let p = &mut self.plasticity[(i, j)];
                            *p = (*p - rate).max(0.0);
                        }
                    }
                }
            }
            MemoryMode::DecayAccumulation => {
                // Strength statistics over existing connections.
                let mut count = 0usize;
                let mut mean = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        if self.exists[i * n + j] {
                            count += 1;
                            mean += self.connections[(i, j)].abs();
                        }
                    }
                }
                if count == 0 {
                    return;
                }
                mean /= count as f64;
                let mut var = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        if self.exists[i * n + j] {
                            let d = self.connections[(i, j)].abs() - mean;
                            var += d * d;
                        }
                    }
                }
                let std = (var / count as f64).sqrt();
                let cutoff = mean + self.cfg.sigma_k * std;
                let tau = self.cfg.tau_accum_effective();
                for i in 0..n {
                    for j in 0..n {
                        if self.exists[i * n + j]
                            && self.accumulated[(i, j)] >= tau
                            && self.connections[(i, j)].abs() > cutoff
                        {
                            self.plasticity[(i, j)] = 0.0;
                        }
                    }
                }
            }
        }
    }
}

/// Intrinsic novelty of a firing transition: mean |Δ ∘ C ∘ P| over all n²
/// entries. High when a lot of still-plastic, strongly-weighted structure
/// took part; zero once everything involved is consolidated.
pub fn novelty_firing(net: &Network, alpha: &FiringState, beta: &FiringState) -> f64 {
    assert_eq!(alpha.len(), net.n());
    assert_eq!(beta.len(), net.n());
    let dir = update_direction(alpha, beta);
    let mut sum = 0.0;
    for (i, j, d) in dir.nonzero() {
        sum += (f64::from(d) * net.connections[(i, j)] * net.plasticity[(i, j)]).abs();
    }
    sum / (net.n() * net.n()) as f64
}

/// Intrinsic novelty of a frame transition: mean absolute pixel change.
pub fn novelty_frames(a: &[f64], b: &[f64]) -> Result<f64, Error> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "frame novelty needs equal non-empty frames, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
    Ok(sum / a.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::NetworkConfig;

    fn fs(bits: &[u8]) -> FiringState {
        FiringState::from_bits(bits.iter().map(|&b| b != 0).collect())
    }

    /// Fully-wired hidden-only network with all strengths zero.
    fn dense_net(n: usize) -> Network {
        let mut cfg = NetworkConfig::bare(0, n, 0);
        cfg.lambda = f64::INFINITY;
        cfg.init_scale = 0.0;
        Network::build(&cfg).unwrap()
    }

    #[test]
    fn update_strengthens_fire_then_fire_and_weakens_the_reverse() {
        let mut net = dense_net(2);
        // 0 fired, then 1 fired: 0→1 strengthens, 1→0 weakens.
        net.set_firings(fs(&[1, 0]), fs(&[0, 1]));
        net.stdp_update(0.25, 1.0);
        assert_eq!(net.connections[(0, 1)], 0.25);
        assert_eq!(net.connections[(1, 0)], -0.25);
    }

    #[test]
    fn negative_modulation_unlearns() {
        let mut a = dense_net(2);
        let mut b = a.clone();
        a.set_firings(fs(&[1, 0]), fs(&[0, 1]));
        b.set_firings(fs(&[1, 0]), fs(&[0, 1]));
        a.stdp_update(0.25, 1.0);
        b.stdp_update(0.25, -1.0);
        assert_eq!(b.connections[(0, 1)], -a.connections[(0, 1)]);
        assert_eq!(b.connections[(1, 0)], -a.connections[(1, 0)]);
    }

    #[test]
    fn modulation_scales_the_delta_exactly() {
        let gamma = 0.013;
        let mut unit = dense_net(3);
        let mut scaled = unit.clone();
        for net in [&mut unit, &mut scaled] {
            net.plasticity[(0, 1)] = 0.37; // partially aged gate
            net.set_firings(fs(&[1, 0, 1]), fs(&[0, 1, 1]));
        }
        unit.stdp_update(gamma, 1.0);
        scaled.stdp_update(gamma, 3.0);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(
                    scaled.connections[(i, j)],
                    3.0 * unit.connections[(i, j)],
                    "entry [{i}][{j}] does not scale linearly"
                );
            }
        }
    }

    #[test]
    fn weights_clip_at_c_max_but_accumulation_keeps_counting() {
        let mut net = dense_net(2);
        net.connections[(0, 1)] = net.cfg.c_max - 0.1;
        net.set_firings(fs(&[1, 0]), fs(&[0, 1]));
        net.stdp_update(0.5, 1.0);
        assert_eq!(net.connections[(0, 1)], net.cfg.c_max);
        assert_eq!(net.accumulated[(0, 1)], 0.5);
        net.set_firings(fs(&[1, 0]), fs(&[0, 1]));
        net.stdp_update(0.5, 1.0);
        assert_eq!(net.connections[(0, 1)], net.cfg.c_max);
        assert_eq!(net.accumulated[(0, 1)], 1.0);
    }

    #[test]
    fn zero_plasticity_freezes_entries_bit_for_bit() {
        let mut net = dense_net(3);
        net.connections[(0, 1)] = 0.5;
        net.plasticity[(0, 1)] = 0.0;
        let before = net.connections.clone();
        for _ in 0..100 {
            net.set_firings(fs(&[1, 0, 1]), fs(&[0, 1, 1]));
            net.stdp_update(0.1, 1.0);
            net.direct_reward(RewardStrategy::AllConnections, 1.0, 0.1);
        }
        assert_eq!(net.connections[(0, 1)], 0.5);
        assert_eq!(
            net.connections[(0, 1)].to_bits(),
            before.data()[1].to_bits()
        );
    }

    #[test]
    fn direct_reward_all_connections_nudges_everything_existing() {
        let mut net = dense_net(3);
        net.connections[(0, 1)] = -0.2; // inhibitory connections move too
        net.direct_reward(RewardStrategy::AllConnections, 1.0, 0.1);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let base = if (i, j) == (0, 1) { -0.2 } else { 0.0 };
                    assert_eq!(net.connections[(i, j)], base + 0.1);
                } else {
                    assert_eq!(net.connections[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn direct_reward_outputs_of_fired_touches_rows_of_beta() {
        let mut net = dense_net(3);
        net.set_firings(fs(&[0, 1, 0]), fs(&[1, 0, 0]));
        net.direct_reward(RewardStrategy::OutputsOfFired, 1.0, 0.1);
        assert_eq!(net.connections[(0, 1)], 0.1);
        assert_eq!(net.connections[(0, 2)], 0.1);
        assert_eq!(net.connections[(1, 0)], 0.0);
        assert_eq!(net.connections[(2, 1)], 0.0);
    }

    #[test]
    fn direct_reward_used_connections_respects_sign_agreement() {
        let mut net = dense_net(3);
        // Neuron 0 fired at α; neuron 1 fired at β, neuron 2 stayed silent.
        net.connections[(0, 1)] = 0.4; // positive into fired → used
        net.connections[(0, 2)] = -0.4; // negative into silent → used
        net.connections[(1, 2)] = 0.4; // presynaptic end silent at α → not used
        net.set_firings(fs(&[1, 0, 0]), fs(&[0, 1, 0]));
        net.direct_reward(RewardStrategy::UsedConnections, 1.0, 0.1);
        assert_eq!(net.connections[(0, 1)], 0.5);
        assert_eq!(net.connections[(0, 2)], -0.4 + 0.1);
        assert_eq!(net.connections[(1, 2)], 0.4);
        // Positive into a silent neuron is not "used".
        assert_eq!(net.connections[(2, 1)], 0.0);
    }

    fn io_net() -> Network {
        // 1 input, 2 hidden, 1 output, fully wired, zero strengths.
        let mut cfg = NetworkConfig::bare(1, 2, 1);
        cfg.lambda = f64::INFINITY;
        cfg.init_scale = 0.0;
        cfg.noise_rate = 0.0;
        Network::build(&cfg).unwrap()
    }

    #[test]
    fn direct_reward_action_inputs_strategies_target_the_output_column() {
        // Output is index 3; neuron 1 fired at α, output fired at β.
        let mut net = io_net();
        net.set_firings(fs(&[0, 1, 0, 0]), fs(&[0, 0, 0, 1]));
        let mut both = net.clone();

        net.direct_reward(RewardStrategy::ActionInputs, 1.0, 0.1);
        for i in 0..3 {
            assert_eq!(net.connections[(i, 3)], 0.1, "into-output from {i}");
        }
        assert_eq!(net.connections[(3, 1)], 0.0, "outgoing from output untouched");

        both.direct_reward(RewardStrategy::ActionInputsBothFired, 1.0, 0.1);
        assert_eq!(both.connections[(1, 3)], 0.1, "α-fired presynaptic end");
        assert_eq!(both.connections[(0, 3)], 0.0);
        assert_eq!(both.connections[(2, 3)], 0.0);
    }

    #[test]
    fn action_inputs_both_fired_needs_the_output_to_fire() {
        let mut net = io_net();
        net.set_firings(fs(&[0, 1, 0, 0]), fs(&[0, 0, 0, 0]));
        net.direct_reward(RewardStrategy::ActionInputsBothFired, 1.0, 0.1);
        assert!(net.connections.data().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn reward_neuron_sums_external_reward_with_predictive_input() {
        let mut cfg = NetworkConfig::bare(0, 1, 0);
        cfg.reward_neuron = true;
        cfg.lambda = f64::INFINITY;
        cfg.init_scale = 0.0;
        let mut net = Network::build(&cfg).unwrap();
        let r = net.reward_index().unwrap();
        net.add_connection(0, r, 0.6);

        // Predictive input 0.6 plus external 0.4 reaches θ = 1 exactly.
        net.current_firings.set(0, true);
        assert!(net.inject_reward(0.4).unwrap());
        assert!(net.current_firings.get(r));

        net.current_firings.set(0, true);
        assert!(!net.inject_reward(0.39).unwrap());
        assert!(!net.current_firings.get(r));

        // Strong external reward alone is enough.
        net.current_firings.set(0, false);
        assert!(net.inject_reward(1.0).unwrap());
    }

    #[test]
    fn inject_reward_without_reward_neuron_is_an_error() {
        let mut net = dense_net(2);
        assert!(net.inject_reward(1.0).is_err());
    }

    #[test]
    fn novelty_of_the_worked_three_neuron_case_is_ca_over_nine() {
        let mut net = dense_net(3);
        let c_a = -0.7;
        net.connections[(2, 0)] = c_a;
        let n = novelty_firing(&net, &fs(&[0, 0, 1]), &fs(&[1, 0, 1]));
        assert!((n - c_a.abs() / 9.0).abs() < 1e-15);
    }

    #[test]
    fn novelty_is_zero_when_everything_is_consolidated() {
        let mut net = dense_net(3);
        for i in 0..3 {
            for j in 0..3 {
                net.connections[(i, j)] = if i == j { 0.0 } else { 1.5 };
                net.plasticity[(i, j)] = 0.0;
            }
        }
        let n = novelty_firing(&net, &fs(&[1, 1, 1]), &fs(&[1, 1, 1]));
        assert_eq!(n, 0.0);
    }

    #[test]
    fn frame_novelty_is_mean_absolute_change() {
        let a = [0.0, 0.5, 1.0, 0.25];
        let b = [0.0, 0.75, 0.0, 0.25];
        let n = novelty_frames(&a, &b).unwrap();
        assert!((n - (0.25 + 1.0) / 4.0).abs() < 1e-15);
        assert_eq!(novelty_frames(&a, &a).unwrap(), 0.0);
        assert!(novelty_frames(&a, &b[..3]).is_err());
        assert!(novelty_frames(&[], &[]).is_err());
    }

    #[test]
    fn decay_accumulation_freezes_strong_well_worn_connections() {
        // Four connections with |C| = 0.2, 0.4, 0.6, 2.0:
        // mean = 0.8, population std = sqrt(0.5) ≈ 0.7071.
        // Cutoff at k = 1 is ≈ 1.5071, so only |C| = 2.0 qualifies — and only
        // if its accumulated change reached τ.
        let mut cfg = NetworkConfig::bare(0, 4, 0);
        cfg.lambda = 1e-6;
        cfg.memory_mode = MemoryMode::DecayAccumulation;
        cfg.tau_accum = Some(0.5);
        cfg.sigma_k = 1.0;
        let mut net = Network::build(&cfg).unwrap();
        for (i, j, c) in [(0, 1, 0.2), (1, 2, -0.4), (2, 3, 0.6), (3, 0, 2.0)] {
            net.add_connection(i, j, c);
        }
        net.accumulated[(3, 0)] = 0.5; // exactly τ: inclusive
        net.accumulated[(2, 3)] = 10.0; // worn but not strong enough
        net.consolidate();
        assert_eq!(net.plasticity[(3, 0)], 0.0, "strong + worn must freeze");
        assert_eq!(net.plasticity[(2, 3)], 1.0);
        assert_eq!(net.plasticity[(0, 1)], 1.0);
        assert_eq!(net.plasticity[(1, 2)], 1.0);

        // Under-threshold accumulation never freezes, however strong.
        net.accumulated[(3, 0)] = 0.0;
        net.plasticity[(3, 0)] = 1.0;
        net.consolidate();
        assert_eq!(net.plasticity[(3, 0)], 1.0);
    }

    #[test]
    fn uniform_aging_drains_plasticity_to_zero_and_stops() {
        let mut cfg = NetworkConfig::bare(0, 2, 0);
        cfg.lambda = f64::INFINITY;
        cfg.init_scale = 0.0;
        cfg.memory_mode = MemoryMode::UniformAging;
        cfg.aging_rate = 0.4;
        let mut net = Network::build(&cfg).unwrap();
        net.consolidate();
        assert!((net.plasticity[(0, 1)] - 0.6).abs() < 1e-15);
        net.consolidate();
        assert!((net.plasticity[(0, 1)] - 0.2).abs() < 1e-15);
        net.consolidate();
        assert_eq!(net.plasticity[(0, 1)], 0.0);
        net.consolidate();
        assert_eq!(net.plasticity[(0, 1)], 0.0);
    }

    #[test]
    fn consolidation_off_is_a_no_op() {
        let mut net = dense_net(2);
        net.accumulated[(0, 1)] = 100.0;
        net.connections[(0, 1)] = 3.9;
        let p = net.plasticity.clone();
        net.consolidate();
        assert!(net.plasticity.bit_identical(&p));
    }
}
