//! Cross-cutting invariants that must survive arbitrary operation order:
//! clipping, plasticity monotonicity, sparsity freezing, label symmetry,
//! novelty bounds, and reward-source isolation in the experiment loop.

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spikebox::env::{self, Action, ActionSpace, Environment, Observation, StepResult};
use spikebox::harness;
use spikebox::learning::{novelty_firing, novelty_frames};
use spikebox::{
    EnvSpec, Error, ExperimentConfig, FiringState, Matrix, MemoryMode, Network, NetworkConfig,
    NeuronRole, RewardSource, RewardStrategy, StdpMode,
};

const STRATEGIES: [RewardStrategy; 5] = [
    RewardStrategy::AllConnections,
    RewardStrategy::OutputsOfFired,
    RewardStrategy::UsedConnections,
    RewardStrategy::ActionInputs,
    RewardStrategy::ActionInputsBothFired,
];

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> FiringState {
    FiringState::from_bits((0..n).map(|_| rng.gen_bool(0.5)).collect())
}

/// Dense, noisy net with a deliberately low clip so every rule keeps
/// running into it.
fn chaos_cfg(memory_mode: MemoryMode, seed: u64) -> NetworkConfig {
    let mut cfg = NetworkConfig::bare(4, 10, 2);
    cfg.n_noise = 3;
    cfg.reward_neuron = true;
    cfg.noise_rate = 0.3;
    cfg.threshold = 0.5;
    cfg.lambda = 1.0;
    cfg.c_max = 0.6;
    cfg.init_scale = 0.5;
    cfg.gamma = 0.15;
    cfg.memory_mode = memory_mode;
    cfg.aging_rate = 0.05;
    cfg.seed = seed;
    cfg
}

/// Hammer one network with a random mix of every mutating operation and
/// check the standing invariants after each one.
fn run_chaos(memory_mode: MemoryMode, seed: u64) {
    let cfg = chaos_cfg(memory_mode, seed);
    let mut net = Network::build(&cfg).unwrap();
    let n = net.n();
    let absent: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !net.connection_exists(i, j))
        .collect();
    assert!(!absent.is_empty(), "wiring left nothing absent to watch");

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xDECAF);
    let mut prev_plasticity = net.plasticity().data().to_vec();
    let mut prev_accumulated = net.accumulated().data().to_vec();
    for round in 0..400 {
        match rng.gen_range(0..6) {
            0 => {
                let input: Vec<f64> = (0..4).map(|_| f64::from(rng.gen_bool(0.5))).collect();
                net.step(&input).unwrap();
            }
            1 => {
                net.stdp_update(cfg.gamma, rng.gen_range(-3.0..3.0));
            }
            2 => {
                let strategy = STRATEGIES[rng.gen_range(0..STRATEGIES.len())];
                net.direct_reward(strategy, rng.gen_range(-2.0..2.0), cfg.gamma);
            }
            3 => {
                net.inject_reward(rng.gen_range(-1.0..1.5)).unwrap();
            }
            4 => net.consolidate(),
            _ => {
                net.stdp_update(cfg.gamma, 1.0);
            }
        }

        for &c in net.connections().data() {
            assert!(c.abs() <= cfg.c_max, "round {round}: |{c}| escaped the clip");
        }
        let plasticity = net.plasticity().data();
        for (k, (&p, &q)) in plasticity.iter().zip(&prev_plasticity).enumerate() {
            assert!((0.0..=1.0).contains(&p), "round {round}: P[{k}] = {p}");
            assert!(p <= q, "round {round}: P[{k}] rose from {q} to {p}");
        }
        let accumulated = net.accumulated().data();
        for (k, (&a, &b)) in accumulated.iter().zip(&prev_accumulated).enumerate() {
            assert!(a >= b, "round {round}: A[{k}] fell from {b} to {a}");
        }
        prev_plasticity = plasticity.to_vec();
        prev_accumulated = accumulated.to_vec();

        for &(i, j) in &absent {
            assert_eq!(net.connections()[(i, j)].to_bits(), 0.0f64.to_bits());
            assert_eq!(net.plasticity()[(i, j)].to_bits(), 0.0f64.to_bits());
            assert_eq!(net.accumulated()[(i, j)].to_bits(), 0.0f64.to_bits());
        }
    }
}

#[test]
fn invariants_hold_under_chaotic_training() {
    for (k, mode) in [
        MemoryMode::Off,
        MemoryMode::UniformAging,
        MemoryMode::DecayAccumulation,
    ]
    .into_iter()
    .enumerate()
    {
        run_chaos(mode, 1000 + k as u64);
    }
}

#[test]
fn consolidation_never_touches_strengths() {
    for mode in [MemoryMode::UniformAging, MemoryMode::DecayAccumulation] {
        let mut cfg = chaos_cfg(mode, 77);
        cfg.tau_accum = Some(0.0);
        let mut net = Network::build(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        for _ in 0..30 {
            let input: Vec<f64> = (0..4).map(|_| f64::from(rng.gen_bool(0.5))).collect();
            net.step(&input).unwrap();
            net.stdp_update(cfg.gamma, 1.0);
        }
        let before: Vec<u64> = net.connections().data().iter().map(|c| c.to_bits()).collect();
        net.consolidate();
        let after: Vec<u64> = net.connections().data().iter().map(|c| c.to_bits()).collect();
        assert_eq!(before, after, "{mode:?} moved a strength");
    }
}

#[test]
fn fully_aged_plasticity_freezes_the_network() {
    let mut cfg = chaos_cfg(MemoryMode::UniformAging, 5);
    cfg.aging_rate = 0.25;
    let mut net = Network::build(&cfg).unwrap();
    for _ in 0..4 {
        net.consolidate();
    }
    assert!(net.plasticity().data().iter().all(|&p| p == 0.0));

    let before: Vec<u64> = net.connections().data().iter().map(|c| c.to_bits()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let input: Vec<f64> = (0..4).map(|_| f64::from(rng.gen_bool(0.5))).collect();
        net.step(&input).unwrap();
        net.stdp_update(cfg.gamma, rng.gen_range(-2.0..2.0));
        let strategy = STRATEGIES[rng.gen_range(0..STRATEGIES.len())];
        net.direct_reward(strategy, rng.gen_range(-2.0..2.0), cfg.gamma);
    }
    let after: Vec<u64> = net.connections().data().iter().map(|c| c.to_bits()).collect();
    assert_eq!(before, after);
}

/// All-hidden net wired densely by hand, so construction is independent of
/// positions and the build-time RNG.
fn hidden_net(n: usize, strengths: &[f64]) -> Network {
    let cfg = NetworkConfig::bare(0, n, 0);
    let mut connections = Matrix::zeros(n);
    let mut plasticity = Matrix::zeros(n);
    let mut exists = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                connections.data_mut()[i * n + j] = strengths[i * n + j];
                plasticity.data_mut()[i * n + j] = 1.0;
                exists[i * n + j] = true;
            }
        }
    }
    Network::from_parts(
        cfg,
        vec![NeuronRole::Hidden; n],
        vec![[0.0; 3]; n],
        connections,
        plasticity,
        Matrix::zeros(n),
        exists,
    )
    .unwrap()
}

proptest! {
    /// Learning depends only on firing patterns and stored weights, never on
    /// neuron numbering: relabel the neurons and every update relabels with
    /// them, bit for bit.
    #[test]
    fn relabeling_neurons_relabels_every_update(
        strengths in prop::collection::vec(-1.0f64..1.0, 36),
        alpha in prop::collection::vec(any::<bool>(), 6),
        beta in prop::collection::vec(any::<bool>(), 6),
        modulation in -2.0f64..2.0,
        reward in -1.0f64..1.0,
        perm_seed in any::<u64>(),
    ) {
        let n = 6;
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(perm_seed));

        let mut base = hidden_net(n, &strengths);
        let mut permuted_strengths = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    permuted_strengths[perm[i] * n + perm[j]] = strengths[i * n + j];
                }
            }
        }
        let mut relabeled = hidden_net(n, &permuted_strengths);

        let gamma = 0.05;
        base.set_firings(
            FiringState::from_bits(alpha.clone()),
            FiringState::from_bits(beta.clone()),
        );
        let mut alpha_p = vec![false; n];
        let mut beta_p = vec![false; n];
        for i in 0..n {
            alpha_p[perm[i]] = alpha[i];
            beta_p[perm[i]] = beta[i];
        }
        relabeled.set_firings(FiringState::from_bits(alpha_p), FiringState::from_bits(beta_p));

        let dir = base.stdp_update(gamma, modulation);
        let dir_p = relabeled.stdp_update(gamma, modulation);
        for strategy in [
            RewardStrategy::UsedConnections,
            RewardStrategy::AllConnections,
            RewardStrategy::OutputsOfFired,
        ] {
            base.direct_reward(strategy, reward, gamma);
            relabeled.direct_reward(strategy, reward, gamma);
        }

        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(dir.delta(i, j), dir_p.delta(perm[i], perm[j]));
                let (pi, pj) = (perm[i], perm[j]);
                prop_assert_eq!(
                    base.connections()[(i, j)].to_bits(),
                    relabeled.connections()[(pi, pj)].to_bits()
                );
                prop_assert_eq!(
                    base.accumulated()[(i, j)].to_bits(),
                    relabeled.accumulated()[(pi, pj)].to_bits()
                );
            }
        }
    }

    /// The per-pair novelty terms are each at most c_max, so the mean is too.
    #[test]
    fn firing_novelty_is_bounded_by_the_clip(
        seed in any::<u64>(),
        c_max in 0.5f64..4.0,
        state_seed in any::<u64>(),
    ) {
        let mut cfg = NetworkConfig::bare(3, 8, 1);
        cfg.lambda = 1.0;
        cfg.c_max = c_max;
        cfg.init_scale = c_max;
        cfg.seed = seed;
        let net = Network::build(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(state_seed);
        let alpha = random_state(net.n(), &mut rng);
        let beta = random_state(net.n(), &mut rng);
        let nov = novelty_firing(&net, &alpha, &beta);
        prop_assert!((0.0..=c_max).contains(&nov), "novelty {} for c_max {}", nov, c_max);
    }

    /// Frame novelty of unit-range frames is a mean absolute difference:
    /// inside [0, 1] and symmetric in its arguments.
    #[test]
    fn frame_novelty_is_a_unit_range_mean_difference(
        a in prop::collection::vec(0.0f64..=1.0, 1..40),
        bseed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(bseed);
        let b: Vec<f64> = (0..a.len()).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let ab = novelty_frames(&a, &b).unwrap();
        let ba = novelty_frames(&b, &a).unwrap();
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(ab.to_bits(), ba.to_bits());
        prop_assert_eq!(novelty_frames(&a, &a).unwrap(), 0.0);
    }
}

#[test]
fn frame_novelty_rejects_mismatched_lengths() {
    assert!(novelty_frames(&[0.0, 1.0], &[0.0]).is_err());
    let full = novelty_frames(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
    assert_eq!(full, 1.0);
}

/// Wraps an environment and replaces its reward channel, leaving dynamics
/// and observations untouched.
struct RewardTamper {
    inner: Box<dyn Environment>,
    garbage: Option<ChaCha8Rng>,
}

impl Environment for RewardTamper {
    fn reset(&mut self) -> Observation {
        self.inner.reset()
    }

    fn step(&mut self, action: Action) -> Result<StepResult, Error> {
        let mut res = self.inner.step(action)?;
        res.reward = match &mut self.garbage {
            Some(rng) => rng.gen_range(-100.0..100.0),
            None => 0.0,
        };
        Ok(res)
    }

    fn action_space(&self) -> ActionSpace {
        self.inner.action_space()
    }

    fn frame_shape(&self) -> Option<(usize, usize)> {
        self.inner.frame_shape()
    }

    fn stage(&self) -> Option<u8> {
        self.inner.stage()
    }
}

fn tamper_cfg(reward_source: RewardSource, strategy: RewardStrategy) -> ExperimentConfig {
    let mut network = NetworkConfig::bare(20, 15, 3);
    network.n_noise = 4;
    network.reward_neuron = true;
    network.noise_rate = 0.2;
    network.threshold = 0.6;
    network.lambda = 0.6;
    network.reward_strategy = strategy;
    ExperimentConfig {
        network,
        environment: EnvSpec::MountainCar,
        reward_source,
        stdp_mode: StdpMode::Plain,
        direct_reward: true,
        novelty_scale: 1.0,
        episodes: 3,
        max_steps: 120,
        steps_per_decision: 3,
        eval_episodes: 0,
        reset_firings: false,
        consolidate_every: 0,
        encoding: None,
        seeds: vec![7],
        output_dir: "unused".into(),
    }
}

fn tampered_run(cfg: &ExperimentConfig, garbage: bool) -> harness::SeedRun {
    let mut env = RewardTamper {
        inner: env::build(&EnvSpec::MountainCar, 123),
        garbage: garbage.then(|| ChaCha8Rng::seed_from_u64(99)),
    };
    harness::run_seed_in(cfg, 7, &mut env).unwrap()
}

#[test]
fn novelty_driven_learning_ignores_the_env_reward_channel() {
    let cfg = tamper_cfg(RewardSource::NoveltyFiring, RewardStrategy::UsedConnections);
    let garbage = tampered_run(&cfg, true);
    let zeroed = tampered_run(&cfg, false);

    // The tamper really engaged: the logged rewards differ wildly.
    assert_ne!(
        garbage.records[0].total_reward,
        zeroed.records[0].total_reward
    );
    // ...but learning never saw them.
    let (a, b) = (&garbage.network, &zeroed.network);
    assert!(a.connections().bit_identical(b.connections()));
    assert!(a.plasticity().bit_identical(b.plasticity()));
    assert!(a.accumulated().bit_identical(b.accumulated()));
}

#[test]
fn env_driven_learning_does_read_the_reward_channel() {
    let cfg = tamper_cfg(RewardSource::EnvReward, RewardStrategy::AllConnections);
    let garbage = tampered_run(&cfg, true);
    let zeroed = tampered_run(&cfg, false);
    assert!(!garbage.network.connections().bit_identical(zeroed.network.connections()));
}
