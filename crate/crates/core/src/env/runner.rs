//! Minimal side-scrolling obstacle runner, observed as a binary pixel frame.
//! The runner sits in the leftmost column; obstacles slide in from the right
//! one cell per step with random spacing. A jump is a fixed-length ballistic
//! arc and can only be started from the ground. Hitting an obstacle while
//! grounded ends the run and emits a solid game-over frame.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{not_running, want_discrete, Action, ActionSpace, Environment, Observation, StepResult};
use crate::error::Error;

pub const ACT_NONE: usize = 0;
pub const ACT_JUMP: usize = 1;

pub struct Runner {
    width: usize,
    height: usize,
    gap_min: u32,
    gap_max: u32,
    air_time: u32,
    rng: ChaCha8Rng,
    /// Obstacle distances from the runner's column, in cells.
    obstacles: Vec<i64>,
    air: u32,
    until_spawn: u32,
    steps: u32,
    active: bool,
}

impl Runner {
    pub fn new(
        width: usize,
        height: usize,
        gap_min: u32,
        gap_max: u32,
        air_time: u32,
        seed: u64,
    ) -> Self {
        Runner {
            width,
            height,
            gap_min,
            gap_max,
            air_time,
            rng: ChaCha8Rng::seed_from_u64(seed),
            obstacles: Vec::new(),
            air: 0,
            until_spawn: 0,
            steps: 0,
            active: false,
        }
    }

    pub fn air(&self) -> u32 {
        self.air
    }

    /// Distance to the closest obstacle still ahead, if any is on screen.
    pub fn nearest_obstacle(&self) -> Option<i64> {
        self.obstacles.iter().copied().filter(|&d| d >= 0).min()
    }

    fn gap(&mut self) -> u32 {
        self.rng.gen_range(self.gap_min..=self.gap_max)
    }

    fn frame(&self) -> Observation {
        let mut values = vec![0.0; self.width * self.height];
        let ground = self.height - 1;
        for &d in &self.obstacles {
            if (0..self.width as i64).contains(&d) {
                values[ground * self.width + d as usize] = 1.0;
            }
        }
        // Crude arc: rise for the first half of the flight, fall for the rest.
        let arc = self.air.min(self.air_time - self.air) as usize;
        values[ground.saturating_sub(arc) * self.width] = 1.0;
        Observation {
            bounds: vec![(0.0, 1.0); values.len()],
            values,
        }
    }

    fn game_over_frame(&self) -> Observation {
        Observation {
            values: vec![1.0; self.width * self.height],
            bounds: vec![(0.0, 1.0); self.width * self.height],
        }
    }
}

impl Environment for Runner {
    fn reset(&mut self) -> Observation {
        self.obstacles = vec![self.width as i64 - 1];
        self.air = 0;
        self.until_spawn = self.gap();
        self.steps = 0;
        self.active = true;
        self.frame()
    }

    fn step(&mut self, action: Action) -> Result<StepResult, Error> {
        if !self.active {
            return Err(not_running());
        }
        let a = want_discrete(action, 2)?;
        if a == ACT_JUMP && self.air == 0 {
            self.air = self.air_time;
        }
        for d in &mut self.obstacles {
            *d -= 1;
        }
        self.until_spawn -= 1;
        if self.until_spawn == 0 {
            self.obstacles.push(self.width as i64 - 1);
            self.until_spawn = self.gap();
        }
        self.air = self.air.saturating_sub(1);
        let hit = self.air == 0 && self.obstacles.contains(&0);
        self.obstacles.retain(|&d| d >= 0);
        self.steps += 1;
        if hit {
            self.active = false;
            return Ok(StepResult {
                observation: self.game_over_frame(),
                reward: 0.0,
                done: true,
                steps: self.steps,
                goal: false,
            });
        }
        Ok(StepResult {
            observation: self.frame(),
            reward: 1.0,
            done: false,
            steps: self.steps,
            goal: false,
        })
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Discrete(2)
    }

    fn frame_shape(&self) -> Option<(usize, usize)> {
        Some((self.width, self.height))
    }
}
