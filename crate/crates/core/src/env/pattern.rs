//! Synthetic two-pattern visual stream. Two fixed glyphs — a filled disk and
//! the same disk with its 3×3 centre knocked out — alternate in stages of
//! random length, drawn at a jittered position with additive pixel noise.
//! A control variant keeps the glyph fixed and only relabels the stages.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{not_running, want_discrete, Action, ActionSpace, Environment, Observation, StepResult};
use crate::error::Error;

const RADIUS: f64 = 2.5;
const HOLE_RADIUS: f64 = 1.5;

#[derive(Clone, Copy, PartialEq)]
enum Glyph {
    Disk,
    Ring,
}

impl Glyph {
    fn lit(self, dx: i64, dy: i64) -> bool {
        let d = ((dx * dx + dy * dy) as f64).sqrt();
        match self {
            Glyph::Disk => d <= RADIUS,
            Glyph::Ring => d >= HOLE_RADIUS && d <= RADIUS,
        }
    }
}

pub struct PatternStream {
    width: usize,
    height: usize,
    noise_amp: f64,
    offset: usize,
    dur_min: u32,
    dur_max: u32,
    control: bool,
    rng: ChaCha8Rng,
    stage: u8,
    /// Frames left in the current stage, the upcoming one included.
    remaining: u32,
    steps: u32,
    active: bool,
}

impl PatternStream {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        width: usize,
        height: usize,
        noise_amp: f64,
        offset: usize,
        dur_min: u32,
        dur_max: u32,
        control: bool,
        seed: u64,
    ) -> Self {
        PatternStream {
            width,
            height,
            noise_amp,
            offset,
            dur_min,
            dur_max,
            control,
            rng: ChaCha8Rng::seed_from_u64(seed),
            stage: 0,
            remaining: 0,
            steps: 0,
            active: false,
        }
    }

    fn stage_duration(&mut self) -> u32 {
        self.rng.gen_range(self.dur_min..=self.dur_max)
    }

    fn frame(&mut self) -> Observation {
        if self.remaining == 0 {
            self.stage ^= 1;
            self.remaining = self.stage_duration();
        }
        self.remaining -= 1;

        let glyph = if self.control || self.stage == 0 {
            Glyph::Disk
        } else {
            Glyph::Ring
        };
        let off = self.offset as i64;
        let cx = (self.width / 2) as i64 + self.rng.gen_range(-off..=off);
        let cy = (self.height / 2) as i64 + self.rng.gen_range(-off..=off);

        let mut values = vec![0.0; self.width * self.height];
        for y in 0..self.height {
            for x in 0..self.width {
                let mut v = f64::from(glyph.lit(x as i64 - cx, y as i64 - cy));
                if self.noise_amp > 0.0 {
                    v = (v + self.rng.gen_range(0.0..self.noise_amp)).min(1.0);
                }
                values[y * self.width + x] = v;
            }
        }
        Observation {
            bounds: vec![(0.0, 1.0); values.len()],
            values,
        }
    }
}

impl Environment for PatternStream {
    fn reset(&mut self) -> Observation {
        self.stage = 0;
        self.remaining = self.stage_duration();
        self.steps = 0;
        self.active = true;
        self.frame()
    }

    /// The stream ignores what the watcher does; the single legal action is a
    /// placeholder so the generic loop has something to read out.
    fn step(&mut self, action: Action) -> Result<StepResult, Error> {
        if !self.active {
            return Err(not_running());
        }
        want_discrete(action, 1)?;
        self.steps += 1;
        Ok(StepResult {
            observation: self.frame(),
            reward: 0.0,
            done: false,
            steps: self.steps,
            goal: false,
        })
    }

    fn action_space(&self) -> ActionSpace {
        ActionSpace::Discrete(1)
    }

    fn frame_shape(&self) -> Option<(usize, usize)> {
        Some((self.width, self.height))
    }

    fn stage(&self) -> Option<u8> {
        Some(self.stage)
    }
}
