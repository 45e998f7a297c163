//! The classic underpowered car in a valley, in a discrete-force and a
//! continuous-force variant. The engine alone cannot climb the right hill;
//! the car has to rock back and forth to build momentum.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    not_running, want_continuous, want_discrete, Action, ActionSpace, Environment, Observation,
    StepResult,
};
use crate::error::Error;

pub const X_MIN: f64 = -1.2;
pub const X_MAX: f64 = 0.6;
pub const V_MAX: f64 = 0.07;
pub const STEP_LIMIT: u32 = 1000;

const FORCE: f64 = 0.001;
const GRAVITY: f64 = 0.0025;
const GOAL_DISCRETE: f64 = 0.5;

const FORCE_CONTINUOUS: f64 = 0.0015;
const GOAL_CONTINUOUS: f64 = 0.45;

fn bounds() -> Vec<(f64, f64)> {
    vec![(X_MIN, X_MAX), (-V_MAX, V_MAX)]
}

/// Shared integration step: apply a signed engine force, then gravity along
/// the cos(3x) slope, clamp velocity, move, and pin the car at the walls.
fn advance(x: &mut f64, v: &mut f64, engine: f64) {
    *v = (*v + engine - GRAVITY * (3.0 * *x).cos()).clamp(-V_MAX, V_MAX);
    *x = (*x + *v).clamp(X_MIN, X_MAX);
    if *x <= X_MIN && *v < 0.0 {
        *v = 0.0;
    }
}

pub struct MountainCar {
    pub x: f64,
    pub v: f64,
    steps: u32,
    rng: ChaCha8Rng,
    active: bool,
}

impl MountainCar {
    pub fn new(seed: u64) -> Self {
        MountainCar {
            x: 0.0,
            v: 0.0,
            steps: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            active: false,
        }
    }

    fn observation(&self) -> Observation {
        Observation {
            values: vec![self.x, self.v],
            bounds: bounds(),
        }
    }
}

impl Environment for MountainCar {
    fn reset(&mut self) -> Observation {
        self.x = self.rng.gen_range(-0.6..-0.4);
        self.v = 0.0;
        self.steps = 0;
        self.active = true;
        self.observation()
    }

    fn step(&mut self, action: Action) -> Result<StepResult, Error> {
        if !self.active {
            return Err(not_running());
        }
        let a = want_discrete(action, 3)?; // 0 push left, 1 coast, 2 push right
        advance(&mut self.x, &mut self.v, (a as f64 - 1.0) * FORCE);
        self.steps += 1;
        let goal = self.x >= GOAL_DISCRETE;
        let done = goal || self.steps >= STEP_LIMIT;
        if done {
            self.active = false;
        }
        Ok(StepResult {
            observation: self.observation(),
            reward: -1.0,
            done,
            steps: self.steps,
            goal,
        })
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Discrete(3)
    }
}

pub struct MountainCarContinuous {
    pub x: f64,
    pub v: f64,
    steps: u32,
    rng: ChaCha8Rng,
    active: bool,
}

impl MountainCarContinuous {
    pub fn new(seed: u64) -> Self {
        MountainCarContinuous {
            x: 0.0,
            v: 0.0,
            steps: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            active: false,
        }
    }

    fn observation(&self) -> Observation {
        Observation {
            values: vec![self.x, self.v],
            bounds: bounds(),
        }
    }
}

impl Environment for MountainCarContinuous {
    fn reset(&mut self) -> Observation {
        self.x = self.rng.gen_range(-0.6..-0.4);
        self.v = 0.0;
        self.steps = 0;
        self.active = true;
        self.observation()
    }

    fn step(&mut self, action: Action) -> Result<StepResult, Error> {
        if !self.active {
            return Err(not_running());
        }
        let a = want_continuous(action)?.clamp(-1.0, 1.0);
        advance(&mut self.x, &mut self.v, a * FORCE_CONTINUOUS);
        self.steps += 1;
        let goal = self.x >= GOAL_CONTINUOUS;
        let done = goal || self.steps >= STEP_LIMIT;
        if done {
            self.active = false;
        }
        Ok(StepResult {
            observation: self.observation(),
            reward: -1.0,
            done,
            steps: self.steps,
            goal,
        })
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Continuous { lo: -1.0, hi: 1.0 }
    }
}
