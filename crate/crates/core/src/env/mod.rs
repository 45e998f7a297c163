//! Built-in environments. All of them are deterministic given their seed and
//! the action sequence, and all communicate through flat observation vectors
//! with per-dimension bounds.

pub mod mountain_car;
pub mod pattern;
pub mod pendulum;
pub mod runner;
pub mod xor;

use crate::config::EnvSpec;
use crate::error::Error;

#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub values: Vec<f64>,
    /// (lo, hi) per dimension, used by population encoding.
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    /// Steps taken in the current episode, this one included.
    pub steps: u32,
    /// Whether this step reached the environment's success condition.
    pub goal: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Action {
    Discrete(usize),
    Continuous(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ActionSpace {
    Discrete(usize),
    Continuous { lo: f64, hi: f64 },
}

pub trait Environment {
    /// Start a new episode and return its first observation.
    fn reset(&mut self) -> Observation;

    /// Advance one step. Errors on a finished (or never-started) episode and
    /// on actions outside the declared space.
    fn step(&mut self, action: Action) -> Result<StepResult, Error>;

    fn action_space(&self) -> ActionSpace;

    /// Pixel dimensions when observations are frames.
    fn frame_shape(&self) -> Option<(usize, usize)> {
        None
    }

    /// Label of the current stimulus stage, for stream environments.
    fn stage(&self) -> Option<u8> {
        None
    }
}

pub fn build(spec: &EnvSpec, seed: u64) -> Box<dyn Environment> {
    match spec {
        EnvSpec::Xor => Box::new(xor::Xor::new(seed)),
        EnvSpec::MountainCar => Box::new(mountain_car::MountainCar::new(seed)),
        EnvSpec::MountainCarContinuous => {
            Box::new(mountain_car::MountainCarContinuous::new(seed))
        }
        EnvSpec::Pendulum => Box::new(pendulum::Pendulum::new(seed)),
        EnvSpec::PatternStream {
            width,
            height,
            noise_amp,
            offset,
            dur_min,
            dur_max,
            control,
        } => Box::new(pattern::PatternStream::new(
            *width, *height, *noise_amp, *offset, *dur_min, *dur_max, *control, seed,
        )),
        EnvSpec::Runner {
            width,
            height,
            gap_min,
            gap_max,
            air_time,
        } => Box::new(runner::Runner::new(
            *width, *height, *gap_min, *gap_max, *air_time, seed,
        )),
    }
}

pub(crate) fn not_running() -> Error {
    Error::Environment("step called without an active episode (reset first)".into())
}

pub(crate) fn want_discrete(action: Action, n: usize) -> Result<usize, Error> {
    match action {
        Action::Discrete(a) if a < n => Ok(a),
        Action::Discrete(a) => Err(Error::Environment(format!(
            "discrete action {a} out of range (< {n})"
        ))),
        Action::Continuous(_) => {
            Err(Error::Environment("expected a discrete action".into()))
        }
    }
}

pub(crate) fn want_continuous(action: Action) -> Result<f64, Error> {
    match action {
        Action::Continuous(v) => Ok(v),
        Action::Discrete(_) => Err(Error::Environment("expected a continuous action".into())),
    }
}
