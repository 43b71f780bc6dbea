use rand::Rng;

use super::{EnvStep, MAX_EPISODE_STEPS};
use crate::error::{Error, Result};

const GRAVITY: f64 = 9.8;
const MASS_CART: f64 = 1.0;
const MASS_POLE: f64 = 0.1;
const TOTAL_MASS: f64 = MASS_CART + MASS_POLE;
/// Half the pole length.
const LENGTH: f64 = 0.5;
const POLE_MASS_LENGTH: f64 = MASS_POLE * LENGTH;
const FORCE_MAG: f64 = 10.0;
const TAU: f64 = 0.02;

pub(crate) const X_THRESHOLD: f64 = 2.4;
pub(crate) const THETA_THRESHOLD_RADIANS: f64 = 12.0 * 2.0 * std::f64::consts::PI / 360.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CartPoleState {
    pub x: f64,
    pub x_dot: f64,
    pub theta: f64,
    pub theta_dot: f64,
}

impl CartPoleState {
    pub fn to_vec(self) -> Vec<f64> {
        vec![self.x, self.x_dot, self.theta, self.theta_dot]
    }

    pub fn is_terminal(&self) -> bool {
        self.x.abs() > X_THRESHOLD || self.theta.abs() > THETA_THRESHOLD_RADIANS
    }

    /// One Euler step of the cart-pole equations under `force` (N).
    pub fn advance(self, force: f64) -> Self {
        let (sin, cos) = self.theta.sin_cos();
        let temp = (force + POLE_MASS_LENGTH * self.theta_dot * self.theta_dot * sin) / TOTAL_MASS;
        let theta_acc = (GRAVITY * sin - cos * temp)
            / (LENGTH * (4.0 / 3.0 - MASS_POLE * cos * cos / TOTAL_MASS));
        let x_acc = temp - POLE_MASS_LENGTH * theta_acc * cos / TOTAL_MASS;
        Self {
            x: self.x + TAU * self.x_dot,
            x_dot: self.x_dot + TAU * x_acc,
            theta: self.theta + TAU * self.theta_dot,
            theta_dot: self.theta_dot + TAU * theta_acc,
        }
    }
}

/// Pole balancing on a cart; action 0 pushes left, 1 pushes right.
#[derive(Debug, Clone, Default)]
pub struct CartPole {
    state: CartPoleState,
    steps: usize,
}

impl CartPole {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&self) -> CartPoleState {
        self.state
    }

    pub fn set_state(&mut self, state: CartPoleState) {
        self.state = state;
    }

    pub fn observation(&self) -> Vec<f64> {
        self.state.to_vec()
    }

    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<f64> {
        let mut u = || rng.gen_range(-0.05..0.05);
        self.state = CartPoleState {
            x: u(),
            x_dot: u(),
            theta: u(),
            theta_dot: u(),
        };
        self.steps = 0;
        self.observation()
    }

    pub fn step(&mut self, action: usize) -> Result<EnvStep> {
        let force = match action {
            0 => -FORCE_MAG,
            1 => FORCE_MAG,
            _ => return Err(Error::InvalidAction { action, n_actions: 2 }),
        };
        self.state = self.state.advance(force);
        self.steps += 1;
        let terminated = self.state.is_terminal();
        Ok(EnvStep {
            observation: self.observation(),
            reward: 1.0,
            terminated,
            truncated: !terminated && self.steps >= MAX_EPISODE_STEPS,
        })
    }
}
