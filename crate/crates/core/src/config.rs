//! Configuration for networks and experiments, loadable from TOML.
//!
//! Every tunable that affects dynamics or learning lives here so that a run
//! is fully described by one config file plus a seed list.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Which connections a direct reward pulse is applied to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardStrategy {
    /// Every connection, inhibitory ones included.
    AllConnections,
    /// Outgoing connections of every neuron that fired in the newer snapshot.
    OutputsOfFired,
    /// Connections that carried signal: presynaptic end fired in the older
    /// snapshot and the connection sign matches the postsynaptic outcome
    /// (positive into neurons that fired, negative into neurons that stayed
    /// silent).
    UsedConnections,
    /// Incoming connections of the output slice.
    ActionInputs,
    /// Incoming connections of the output slice where both ends fired.
    ActionInputsBothFired,
}

/// Memory consolidation variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryMode {
    #[default]
    Off,
    /// Plasticity decays by a fixed amount per consolidation pass.
    UniformAging,
    /// Connections that accumulated enough total change and sit well above
    /// the mean strength are fixed permanently.
    DecayAccumulation,
}

/// Scalar that modulates learning each step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardSource {
    /// The environment's own reward.
    EnvReward,
    /// Intrinsic: magnitude of the plasticity update that just occurred.
    NoveltyFiring,
    /// Intrinsic: mean absolute pixel change between consecutive frames.
    NoveltyFrames,
}

/// How the paired-snapshot update is driven each step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StdpMode {
    Off,
    /// Unconditional update with modulation 1.
    Plain,
    /// Update multiplied by the step's reward scalar; negative rewards
    /// unlearn.
    Modulated,
}

/// How observations become input activations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Encoding {
    /// Observation values used directly (already in [0, 1]).
    Direct,
    /// One-hot bin per observation dimension, min–max normalized.
    Population { bins: usize },
    /// Frame pixels map one-to-one onto the input grid.
    Frame,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub n_input: usize,
    #[serde(default)]
    pub n_noise: usize,
    pub n_hidden: usize,
    pub n_output: usize,
    /// Append one reward neuron as the last index.
    #[serde(default)]
    pub reward_neuron: bool,
    /// Length scale of the connection probability exp(-distance / lambda).
    #[serde(default = "defaults::lambda")]
    pub lambda: f64,
    /// Firing threshold θ.
    #[serde(default = "defaults::threshold")]
    pub threshold: f64,
    /// Per-step firing probability of each noise neuron.
    #[serde(default = "defaults::noise_rate")]
    pub noise_rate: f64,
    /// Learning rate γ.
    #[serde(default = "defaults::gamma")]
    pub gamma: f64,
    /// Connection strengths are clipped to ±c_max.
    #[serde(default = "defaults::c_max")]
    pub c_max: f64,
    /// Initial strengths are uniform in ±init_scale.
    #[serde(default = "defaults::init_scale")]
    pub init_scale: f64,
    /// Output neurons sit on the plane x = output_plane.
    #[serde(default = "defaults::output_plane")]
    pub output_plane: f64,
    /// Width × height when the input layer is a pixel grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_shape: Option<(usize, usize)>,
    #[serde(default = "defaults::reward_strategy")]
    pub reward_strategy: RewardStrategy,
    #[serde(default)]
    pub memory_mode: MemoryMode,
    /// Accumulated-change threshold for consolidation; defaults to 50γ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_accum: Option<f64>,
    /// A connection consolidates when |strength| > mean + sigma_k · std.
    #[serde(default = "defaults::sigma_k")]
    pub sigma_k: f64,
    /// Plasticity lost per pass under uniform aging.
    #[serde(default = "defaults::aging_rate")]
    pub aging_rate: f64,
    #[serde(default)]
    pub seed: u64,
}

mod defaults {
    use super::RewardStrategy;

    pub fn lambda() -> f64 {
        0.25
    }
    pub fn threshold() -> f64 {
        1.0
    }
    pub fn noise_rate() -> f64 {
        0.05
    }
    pub fn gamma() -> f64 {
        0.01
    }
    pub fn c_max() -> f64 {
        4.0
    }
    pub fn init_scale() -> f64 {
        1.0
    }
    pub fn output_plane() -> f64 {
        0.8
    }
    pub fn reward_strategy() -> RewardStrategy {
        RewardStrategy::ActionInputsBothFired
    }
    pub fn sigma_k() -> f64 {
        1.0
    }
    pub fn aging_rate() -> f64 {
        1e-4
    }
    pub fn steps_per_decision() -> usize {
        5
    }
    pub fn max_steps() -> usize {
        1000
    }
    pub fn consolidate_every() -> usize {
        1
    }
    pub fn novelty_scale() -> f64 {
        1.0
    }
    pub fn direct_reward() -> bool {
        true
    }
    pub fn stdp_mode() -> super::StdpMode {
        super::StdpMode::Plain
    }
    pub fn reward_source() -> super::RewardSource {
        super::RewardSource::EnvReward
    }
    pub fn output_dir() -> std::path::PathBuf {
        "runs".into()
    }
}

impl NetworkConfig {
    /// A minimal valid config; tests adjust the fields they care about.
    pub fn bare(n_input: usize, n_hidden: usize, n_output: usize) -> Self {
        NetworkConfig {
            n_input,
            n_noise: 0,
            n_hidden,
            n_output,
            reward_neuron: false,
            lambda: defaults::lambda(),
            threshold: defaults::threshold(),
            noise_rate: 0.0,
            gamma: defaults::gamma(),
            c_max: defaults::c_max(),
            init_scale: defaults::init_scale(),
            output_plane: defaults::output_plane(),
            input_shape: None,
            reward_strategy: defaults::reward_strategy(),
            memory_mode: MemoryMode::Off,
            tau_accum: None,
            sigma_k: defaults::sigma_k(),
            aging_rate: defaults::aging_rate(),
            seed: 0,
        }
    }

    pub fn total_neurons(&self) -> usize {
        self.n_input + self.n_noise + self.n_hidden + self.n_output + usize::from(self.reward_neuron)
    }

    /// Consolidation threshold on accumulated change; 50γ unless overridden.
    pub fn tau_accum_effective(&self) -> f64 {
        self.tau_accum.unwrap_or(50.0 * self.gamma)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.total_neurons() == 0 {
            return fail("network has zero neurons".into());
        }
        if let Some((w, h)) = self.input_shape {
            if w * h != self.n_input {
                return fail(format!(
                    "input_shape {}x{} does not cover n_input = {}",
                    w, h, self.n_input
                ));
            }
        }
        if !(self.lambda > 0.0) {
            return fail(format!("lambda must be positive, got {}", self.lambda));
        }
        if !(self.threshold > 0.0) {
            return fail(format!("threshold must be positive, got {}", self.threshold));
        }
        if !(0.0..=1.0).contains(&self.noise_rate) {
            return fail(format!("noise_rate must lie in [0, 1], got {}", self.noise_rate));
        }
        if !(self.gamma > 0.0) {
            return fail(format!("gamma must be positive, got {}", self.gamma));
        }
        if !(self.c_max > 0.0) {
            return fail(format!("c_max must be positive, got {}", self.c_max));
        }
        if !(0.0..=self.c_max).contains(&self.init_scale) {
            return fail(format!(
                "init_scale must lie in [0, c_max], got {}",
                self.init_scale
            ));
        }
        if !(0.0..=1.0).contains(&self.output_plane) {
            return fail(format!(
                "output_plane must lie in [0, 1], got {}",
                self.output_plane
            ));
        }
        if let Some(tau) = self.tau_accum {
            if !(tau >= 0.0) {
                return fail(format!("tau_accum must be non-negative, got {tau}"));
            }
        }
        if self.sigma_k < 0.0 {
            return fail(format!("sigma_k must be non-negative, got {}", self.sigma_k));
        }
        if !(self.aging_rate >= 0.0) {
            return fail(format!("aging_rate must be non-negative, got {}", self.aging_rate));
        }
        Ok(())
    }
}

/// Environment selection plus environment-specific knobs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum EnvSpec {
    Xor,
    MountainCar,
    MountainCarContinuous,
    Pendulum,
    PatternStream {
        #[serde(default = "pattern_defaults::width")]
        width: usize,
        #[serde(default = "pattern_defaults::height")]
        height: usize,
        #[serde(default = "pattern_defaults::noise_amp")]
        noise_amp: f64,
        /// Glyph centre jitter in pixels, each axis.
        #[serde(default = "pattern_defaults::offset")]
        offset: usize,
        /// Stage duration is drawn uniformly from [dur_min, dur_max] frames.
        #[serde(default = "pattern_defaults::dur_min")]
        dur_min: u32,
        #[serde(default = "pattern_defaults::dur_max")]
        dur_max: u32,
        /// Control condition: both stages show the same glyph.
        #[serde(default)]
        control: bool,
    },
    Runner {
        #[serde(default = "runner_defaults::width")]
        width: usize,
        #[serde(default = "runner_defaults::height")]
        height: usize,
        /// Obstacle spacing is drawn uniformly from [gap_min, gap_max] cells.
        #[serde(default = "runner_defaults::gap_min")]
        gap_min: u32,
        #[serde(default = "runner_defaults::gap_max")]
        gap_max: u32,
        /// Steps spent airborne after a jump.
        #[serde(default = "runner_defaults::air_time")]
        air_time: u32,
    },
}

mod pattern_defaults {
    pub fn width() -> usize {
        10
    }
    pub fn height() -> usize {
        10
    }
    pub fn noise_amp() -> f64 {
        0.1
    }
    pub fn offset() -> usize {
        1
    }
    pub fn dur_min() -> u32 {
        20
    }
    pub fn dur_max() -> u32 {
        60
    }
}

mod runner_defaults {
    pub fn width() -> usize {
        10
    }
    pub fn height() -> usize {
        10
    }
    pub fn gap_min() -> u32 {
        8
    }
    pub fn gap_max() -> u32 {
        16
    }
    pub fn air_time() -> u32 {
        4
    }
}

impl EnvSpec {
    /// Encoding used when the experiment does not pick one explicitly.
    pub fn default_encoding(&self) -> Encoding {
        match self {
            EnvSpec::Xor => Encoding::Direct,
            EnvSpec::MountainCar | EnvSpec::MountainCarContinuous | EnvSpec::Pendulum => {
                Encoding::Population { bins: 10 }
            }
            EnvSpec::PatternStream { .. } | EnvSpec::Runner { .. } => Encoding::Frame,
        }
    }

    pub fn is_frame_env(&self) -> bool {
        matches!(self, EnvSpec::PatternStream { .. } | EnvSpec::Runner { .. })
    }

    pub fn observation_dims(&self) -> usize {
        match self {
            EnvSpec::Xor => 2,
            EnvSpec::MountainCar | EnvSpec::MountainCarContinuous | EnvSpec::Pendulum => 2,
            EnvSpec::PatternStream { width, height, .. } => width * height,
            EnvSpec::Runner { width, height, .. } => width * height,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub network: NetworkConfig,
    pub environment: EnvSpec,
    #[serde(default = "defaults::reward_source")]
    pub reward_source: RewardSource,
    #[serde(default = "defaults::stdp_mode")]
    pub stdp_mode: StdpMode,
    /// Apply the configured direct-reward strategy each step.
    #[serde(default = "defaults::direct_reward")]
    pub direct_reward: bool,
    /// Multiplier on intrinsic novelty before it is used as reward.
    #[serde(default = "defaults::novelty_scale")]
    pub novelty_scale: f64,
    pub episodes: usize,
    #[serde(default = "defaults::max_steps")]
    pub max_steps: usize,
    /// Network steps per action so activity can cross the cube.
    #[serde(default = "defaults::steps_per_decision")]
    pub steps_per_decision: usize,
    /// Extra episodes run after training with learning frozen.
    #[serde(default)]
    pub eval_episodes: usize,
    /// Clear all firing at the start of each episode.
    #[serde(default)]
    pub reset_firings: bool,
    /// Consolidate after every this many episodes (0 disables the schedule).
    #[serde(default = "defaults::consolidate_every")]
    pub consolidate_every: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoding: Option<Encoding>,
    pub seeds: Vec<u64>,
    #[serde(default = "defaults::output_dir")]
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| Error::parse(path, e.message()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn encoding_effective(&self) -> Encoding {
        self.encoding.unwrap_or_else(|| self.environment.default_encoding())
    }

    /// Input-layer width the chosen encoding produces.
    pub fn encoded_len(&self) -> usize {
        match self.encoding_effective() {
            Encoding::Direct | Encoding::Frame => self.environment.observation_dims(),
            Encoding::Population { bins } => self.environment.observation_dims() * bins,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        self.network.validate()?;
        if self.seeds.is_empty() {
            return fail("seeds list is empty".into());
        }
        if self.max_steps == 0 || self.steps_per_decision == 0 {
            return fail("max_steps and steps_per_decision must be at least 1".into());
        }
        if self.network.n_output == 0 {
            return fail("environments need at least one output neuron".into());
        }
        if !(self.novelty_scale >= 0.0) {
            return fail(format!(
                "novelty_scale must be non-negative, got {}",
                self.novelty_scale
            ));
        }
        let enc = self.encoding_effective();
        match enc {
            Encoding::Population { bins } if bins == 0 => {
                return fail("population encoding needs at least one bin".into());
            }
            Encoding::Frame if !self.environment.is_frame_env() => {
                return fail("frame encoding requires a frame environment".into());
            }
            _ => {}
        }
        if self.encoded_len() != self.network.n_input {
            return fail(format!(
                "encoding produces {} inputs but n_input = {}",
                self.encoded_len(),
                self.network.n_input
            ));
        }
        if self.reward_source == RewardSource::NoveltyFrames && !self.environment.is_frame_env() {
            return fail("novelty_frames reward needs a frame environment".into());
        }
        if self.reward_source == RewardSource::NoveltyFiring && self.stdp_mode == StdpMode::Modulated
        {
            return fail(
                "novelty_firing cannot modulate the update it is measured from; use plain stdp"
                    .into(),
            );
        }
        Ok(())
    }
}
