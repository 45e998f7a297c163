//! The network substrate: binary neurons placed in the unit cube, sparse
//! distance-dependent wiring, synchronous threshold stepping, and action
//! readout from the output slice.
//!
//! Connectivity is decided once at build time: connection i→j exists with
//! probability exp(-distance(i, j) / lambda), nothing ever connects *into*
//! input or noise neurons, and the diagonal stays empty. Absent connections
//! are encoded as strength 0 with plasticity 0 and stay that way for the
//! lifetime of the network.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::NetworkConfig;
use crate::error::Error;
use crate::matrix::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeuronRole {
    /// Driven by the encoded observation; fires when its input value > 0.5.
    Input,
    /// Fires spontaneously with probability `noise_rate` each step.
    Noise,
    Hidden,
    /// Read out to produce actions.
    Output,
    /// Fires when external reward plus its weighted input crosses threshold.
    Reward,
}

/// One synchronous snapshot of which neurons fired.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiringState {
    bits: Vec<bool>,
}

impl FiringState {
    pub fn silent(n: usize) -> Self {
        FiringState {
            bits: vec![false; n],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        FiringState { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, fired: bool) {
        self.bits[i] = fired;
    }

    pub fn count_fired(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn fired_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }
}

#[derive(Clone, Debug)]
pub struct Network {
    pub(crate) cfg: NetworkConfig,
    n: usize,
    /// Connection strengths C; `connections[(i, j)]` is i→j.
    pub connections: Matrix,
    /// Plasticity gates P in [0, 1]; 0 means the connection is fixed (or absent).
    pub plasticity: Matrix,
    /// Total absolute change accumulated per connection.
    pub accumulated: Matrix,
    pub(crate) exists: Vec<bool>,
    positions: Vec<[f64; 3]>,
    pub(crate) roles: Vec<NeuronRole>,
    pub last_firings: FiringState,
    pub current_firings: FiringState,
    rng: ChaCha8Rng,
}

impl Network {
    /// Sample a fresh network from the config. Deterministic per seed.
    pub fn build(cfg: &NetworkConfig) -> Result<Network, Error> {
        cfg.validate()?;
        let n = cfg.total_neurons();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

        let mut roles = Vec::with_capacity(n);
        roles.extend(std::iter::repeat(NeuronRole::Input).take(cfg.n_input));
        roles.extend(std::iter::repeat(NeuronRole::Noise).take(cfg.n_noise));
        roles.extend(std::iter::repeat(NeuronRole::Hidden).take(cfg.n_hidden));
        roles.extend(std::iter::repeat(NeuronRole::Output).take(cfg.n_output));
        if cfg.reward_neuron {
            roles.push(NeuronRole::Reward);
        }

        // Inputs tile the x = 0 face as a grid (the configured pixel shape,
        // or near-square); outputs sit on the plane x = output_plane; all
        // other neurons are uniform in the cube.
        let (grid_w, grid_h) = match cfg.input_shape {
            Some((w, h)) => (w, h),
            None => {
                let w = (cfg.n_input as f64).sqrt().ceil().max(1.0) as usize;
                let h = cfg.n_input.div_ceil(w).max(1);
                (w, h)
            }
        };
        let mut positions = Vec::with_capacity(n);
        for (idx, role) in roles.iter().enumerate() {
            let pos = match role {
                NeuronRole::Input => {
                    let row = idx / grid_w;
                    let col = idx % grid_w;
                    [
                        0.0,
                        1.0 - (row as f64 + 0.5) / grid_h as f64,
                        (col as f64 + 0.5) / grid_w as f64,
                    ]
                }
                NeuronRole::Output => [
                    cfg.output_plane,
                    rng.gen_range(0.0..1.0),
                    rng.gen_range(0.0..1.0),
                ],
                _ => [
                    rng.gen_range(0.0..1.0),
                    rng.gen_range(0.0..1.0),
                    rng.gen_range(0.0..1.0),
                ],
            };
            positions.push(pos);
        }

        let mut connections = Matrix::zeros(n);
        let mut plasticity = Matrix::zeros(n);
        let mut exists = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                if i == j || matches!(roles[j], NeuronRole::Input | NeuronRole::Noise) {
                    continue;
                }
                let d = dist(positions[i], positions[j]);
                let p = (-d / cfg.lambda).exp();
                if rng.gen::<f64>() < p {
                    exists[i * n + j] = true;
                    connections[(i, j)] = rng.gen_range(-cfg.init_scale..=cfg.init_scale);
                    plasticity[(i, j)] = 1.0;
                }
            }
        }

        Ok(Network {
            cfg: cfg.clone(),
            n,
            connections,
            plasticity,
            accumulated: Matrix::zeros(n),
            exists,
            positions,
            roles,
            last_firings: FiringState::silent(n),
            current_firings: FiringState::silent(n),
            rng,
        })
    }

    /// Reassemble a network from explicit parts (snapshot loading, bespoke
    /// wiring in probes). Firing state starts silent; the step RNG is
    /// reseeded from the config seed.
    pub fn from_parts(
        cfg: NetworkConfig,
        roles: Vec<NeuronRole>,
        positions: Vec<[f64; 3]>,
        connections: Matrix,
        plasticity: Matrix,
        accumulated: Matrix,
        exists: Vec<bool>,
    ) -> Result<Network, Error> {
        cfg.validate()?;
        let n = cfg.total_neurons();
        if roles.len() != n
            || positions.len() != n
            || connections.n() != n
            || plasticity.n() != n
            || accumulated.n() != n
            || exists.len() != n * n
        {
            return Err(Error::DimensionMismatch(format!(
                "network parts disagree with config: expected {n} neurons"
            )));
        }
        Ok(Network {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg,
            n,
            connections,
            plasticity,
            accumulated,
            exists,
            positions,
            roles,
            last_firings: FiringState::silent(n),
            current_firings: FiringState::silent(n),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.cfg
    }

    pub fn roles(&self) -> &[NeuronRole] {
        &self.roles
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    /// Strength matrix; entry (i, j) is the connection from i to j.
    pub fn connections(&self) -> &Matrix {
        &self.connections
    }

    pub fn plasticity(&self) -> &Matrix {
        &self.plasticity
    }

    /// Total absolute change each connection has seen, for consolidation.
    pub fn accumulated(&self) -> &Matrix {
        &self.accumulated
    }

    pub fn connection_exists(&self, i: usize, j: usize) -> bool {
        self.exists[i * self.n + j]
    }

    pub(crate) fn exists_raw(&self) -> &[bool] {
        &self.exists
    }

    /// Wire a connection by hand (probe setups, tests). Panics on the
    /// diagonal and on targets that never accept connections.
    pub fn add_connection(&mut self, i: usize, j: usize, strength: f64) {
        assert_ne!(i, j, "self-connections are not allowed");
        assert!(
            !matches!(self.roles[j], NeuronRole::Input | NeuronRole::Noise),
            "connections into input/noise neurons are not allowed"
        );
        self.exists[i * self.n + j] = true;
        self.connections[(i, j)] = strength;
        self.plasticity[(i, j)] = 1.0;
    }

    pub fn clear_firings(&mut self) {
        self.last_firings = FiringState::silent(self.n);
        self.current_firings = FiringState::silent(self.n);
    }

    /// Overwrite both firing snapshots (forced-firing protocols).
    pub fn set_firings(&mut self, last: FiringState, current: FiringState) {
        assert_eq!(last.len(), self.n);
        assert_eq!(current.len(), self.n);
        self.last_firings = last;
        self.current_firings = current;
    }

    /// Weighted input Σ_i C[i][j] · fired_i that neuron j sees under `state`.
    pub fn weighted_input(&self, j: usize, state: &FiringState) -> f64 {
        state
            .fired_indices()
            .map(|i| self.connections[(i, j)])
            .sum()
    }

    /// Advance one synchronous step: inputs fire on values > 0.5, noise
    /// neurons fire at their configured rate, hidden and output neurons fire
    /// when the weighted sum of the previous snapshot reaches threshold. A
    /// reward neuron is left silent here; `inject_reward` sets it.
    pub fn step(&mut self, external_input: &[f64]) -> Result<&FiringState, Error> {
        if external_input.len() != self.cfg.n_input {
            return Err(Error::DimensionMismatch(format!(
                "step got {} input values for {} input neurons",
                external_input.len(),
                self.cfg.n_input
            )));
        }
        debug_assert!(
            external_input.iter().all(|v| (0.0..=1.0).contains(v)),
            "input activations must lie in [0, 1]"
        );

        let n = self.n;
        let mut acc = vec![0.0; n];
        for i in self.current_firings.fired_indices() {
            let row = self.connections.row(i);
            for (j, w) in row.iter().enumerate() {
                acc[j] += w;
            }
        }

        let mut bits = vec![false; n];
        let mut input_cursor = 0;
        for j in 0..n {
            bits[j] = match self.roles[j] {
                NeuronRole::Input => {
                    let v = external_input[input_cursor];
                    input_cursor += 1;
                    v > 0.5
                }
                NeuronRole::Noise => self.rng.gen::<f64>() < self.cfg.noise_rate,
                NeuronRole::Hidden | NeuronRole::Output => acc[j] >= self.cfg.threshold,
                NeuronRole::Reward => false,
            };
        }

        self.last_firings =
            std::mem::replace(&mut self.current_firings, FiringState::from_bits(bits));
        Ok(&self.current_firings)
    }

    /// Fraction of output neurons that fired in the current snapshot.
    pub fn output_fraction(&self) -> f64 {
        let mut total = 0usize;
        let mut fired = 0usize;
        for (j, role) in self.roles.iter().enumerate() {
            if *role == NeuronRole::Output {
                total += 1;
                if self.current_firings.get(j) {
                    fired += 1;
                }
            }
        }
        assert!(total > 0, "action readout needs at least one output neuron");
        fired as f64 / total as f64
    }

    /// Map the fired-output fraction onto one of `n_actions` choices.
    pub fn action_discrete(&self, n_actions: usize) -> usize {
        assert!(n_actions >= 1);
        let p = self.output_fraction();
        ((p * n_actions as f64).floor() as usize).min(n_actions - 1)
    }

    /// Map the fired-output fraction onto [lo, hi].
    pub fn action_continuous(&self, lo: f64, hi: f64) -> f64 {
        assert!(lo <= hi);
        lo + self.output_fraction() * (hi - lo)
    }

    pub fn reward_index(&self) -> Option<usize> {
        self.roles.iter().position(|r| *r == NeuronRole::Reward)
    }
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}
