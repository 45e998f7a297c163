//! One-shot XOR trials: observe two bits, answer their parity, get reward 1
//! for a correct answer and 0 otherwise.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{not_running, want_discrete, Action, ActionSpace, Environment, Observation, StepResult};
use crate::error::Error;

pub struct Xor {
    rng: ChaCha8Rng,
    bits: (bool, bool),
    active: bool,
}

impl Xor {
    pub fn new(seed: u64) -> Self {
        Xor {
            rng: ChaCha8Rng::seed_from_u64(seed),
            bits: (false, false),
            active: false,
        }
    }

    fn observation(&self) -> Observation {
        Observation {
            values: vec![f64::from(self.bits.0), f64::from(self.bits.1)],
            bounds: vec![(0.0, 1.0); 2],
        }
    }
}

impl Environment for Xor {
    fn reset(&mut self) -> Observation {
        self.bits = (self.rng.gen_bool(0.5), self.rng.gen_bool(0.5));
        self.active = true;
        self.observation()
    }

    fn step(&mut self, action: Action) -> Result<StepResult, Error> {
        if !self.active {
            return Err(not_running());
        }
        let answer = want_discrete(action, 2)?;
        self.active = false;
        let parity = usize::from(self.bits.0 ^ self.bits.1);
        let correct = answer == parity;
        Ok(StepResult {
            observation: self.observation(),
            reward: f64::from(correct),
            done: true,
            steps: 1,
            goal: correct,
        })
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Discrete(2)
    }
}
