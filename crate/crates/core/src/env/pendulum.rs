//! Torque-limited inverted pendulum. The observation is (angle, angular
//! velocity) with the angle wrapped to (−π, π]; reward is the usual negative
//! quadratic cost of the state the torque was applied in, so the upright
//! fixed point scores 0 and every other state scores worse.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use super::{not_running, want_continuous, Action, ActionSpace, Environment, Observation, StepResult};
use crate::error::Error;

pub const THETA_DOT_MAX: f64 = 8.0;
pub const TORQUE_MAX: f64 = 2.0;
pub const STEP_LIMIT: u32 = 1000;

const DT: f64 = 0.05;
const GRAVITY_TERM: f64 = 15.0; // 3g/(2l) with g = 10, l = 1
const TORQUE_TERM: f64 = 3.0; // 3/(m l²) with m = l = 1

/// Map any angle into (−π, π].
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta % (2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    } else if t <= -PI {
        t += 2.0 * PI;
    }
    t
}

pub struct Pendulum {
    pub theta: f64,
    pub theta_dot: f64,
    steps: u32,
    rng: ChaCha8Rng,
    active: bool,
}

impl Pendulum {
    pub fn new(seed: u64) -> Self {
        Pendulum {
            theta: 0.0,
            theta_dot: 0.0,
            steps: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            active: false,
        }
    }

    fn observation(&self) -> Observation {
        Observation {
            values: vec![wrap_angle(self.theta), self.theta_dot],
            bounds: vec![(-PI, PI), (-THETA_DOT_MAX, THETA_DOT_MAX)],
        }
    }
}

impl Environment for Pendulum {
    fn reset(&mut self) -> Observation {
        self.theta = self.rng.gen_range(-PI..PI);
        self.theta_dot = self.rng.gen_range(-1.0..1.0);
        self.steps = 0;
        self.active = true;
        self.observation()
    }

    fn step(&mut self, action: Action) -> Result<StepResult, Error> {
        if !self.active {
            return Err(not_running());
        }
        let u = want_continuous(action)?.clamp(-TORQUE_MAX, TORQUE_MAX);
        // Cost of the state the torque acts on, not the one it produces.
        let a = wrap_angle(self.theta);
        let reward = -(a * a + 0.1 * self.theta_dot * self.theta_dot + 0.001 * u * u);
        // Semi-implicit Euler: the updated velocity moves the angle.
        self.theta_dot = (self.theta_dot
            + (GRAVITY_TERM * self.theta.sin() + TORQUE_TERM * u) * DT)
            .clamp(-THETA_DOT_MAX, THETA_DOT_MAX);
        self.theta += self.theta_dot * DT;
        self.steps += 1;
        let done = self.steps >= STEP_LIMIT;
        if done {
            self.active = false;
        }
        Ok(StepResult {
            observation: self.observation(),
            reward,
            done,
            steps: self.steps,
            goal: false,
        })
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Continuous {
            lo: -TORQUE_MAX,
            hi: TORQUE_MAX,
        }
    }
}
