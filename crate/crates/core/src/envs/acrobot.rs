use std::f64::consts::PI;

use rand::Rng;

use super::{EnvStep, MAX_EPISODE_STEPS};
use crate::error::{Error, Result};

const DT: f64 = 0.2;
const LINK_LENGTH_1: f64 = 1.0;
const LINK_MASS_1: f64 = 1.0;
const LINK_MASS_2: f64 = 1.0;
const LINK_COM_POS_1: f64 = 0.5;
const LINK_COM_POS_2: f64 = 0.5;
const LINK_MOI: f64 = 1.0;
const GRAVITY: f64 = 9.8;
pub(crate) const MAX_VEL_1: f64 = 4.0 * PI;
pub(crate) const MAX_VEL_2: f64 = 9.0 * PI;
const TORQUES: [f64; 3] = [-1.0, 0.0, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AcrobotState {
    pub theta1: f64,
    pub theta2: f64,
    pub theta1_dot: f64,
    pub theta2_dot: f64,
}

impl AcrobotState {
    fn as_array(self) -> [f64; 4] {
        [self.theta1, self.theta2, self.theta1_dot, self.theta2_dot]
    }

    fn from_array(a: [f64; 4]) -> Self {
        Self {
            theta1: a[0],
            theta2: a[1],
            theta1_dot: a[2],
            theta2_dot: a[3],
        }
    }

    /// `(cos t1, sin t1, cos t2, sin t2, t1_dot, t2_dot)`.
    pub fn observation(&self) -> Vec<f64> {
        vec![
            self.theta1.cos(),
            self.theta1.sin(),
            self.theta2.cos(),
            self.theta2.sin(),
            self.theta1_dot,
            self.theta2_dot,
        ]
    }

    /// Free end above one link length over the pivot.
    pub fn is_terminal(&self) -> bool {
        -self.theta1.cos() - (self.theta2 + self.theta1).cos() > 1.0
    }

    /// One RK4 step of length `DT` under `torque`, followed by angle wrapping
    /// and velocity clipping.
    pub fn advance(self, torque: f64) -> Self {
        let y0 = self.as_array();
        let f = |y: [f64; 4]| derivatives(y, torque);
        let add = |y: [f64; 4], k: [f64; 4], h: f64| {
            [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2], y[3] + h * k[3]]
        };
        let half = DT / 2.0;
        let k1 = f(y0);
        let k2 = f(add(y0, k1, half));
        let k3 = f(add(y0, k2, half));
        let k4 = f(add(y0, k3, DT));
        let mut y = [0.0; 4];
        for i in 0..4 {
            y[i] = y0[i] + DT / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        Self::from_array([
            wrap(y[0], -PI, PI),
            wrap(y[1], -PI, PI),
            y[2].clamp(-MAX_VEL_1, MAX_VEL_1),
            y[3].clamp(-MAX_VEL_2, MAX_VEL_2),
        ])
    }
}

/// Two-link equations of motion ("book" variant of the second-joint
/// acceleration).
fn derivatives(s: [f64; 4], torque: f64) -> [f64; 4] {
    let (m1, m2) = (LINK_MASS_1, LINK_MASS_2);
    let l1 = LINK_LENGTH_1;
    let (lc1, lc2) = (LINK_COM_POS_1, LINK_COM_POS_2);
    let (i1, i2) = (LINK_MOI, LINK_MOI);
    let g = GRAVITY;
    let [theta1, theta2, dtheta1, dtheta2] = s;
    let d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * theta2.cos()) + i1 + i2;
    let d2 = m2 * (lc2 * lc2 + l1 * lc2 * theta2.cos()) + i2;
    let phi2 = m2 * lc2 * g * (theta1 + theta2 - PI / 2.0).cos();
    let phi1 = -m2 * l1 * lc2 * dtheta2 * dtheta2 * theta2.sin()
        - 2.0 * m2 * l1 * lc2 * dtheta2 * dtheta1 * theta2.sin()
        + (m1 * lc1 + m2 * l1) * g * (theta1 - PI / 2.0).cos()
        + phi2;
    let ddtheta2 = (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1 * dtheta1 * theta2.sin() - phi2)
        / (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
    let ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
    [dtheta1, dtheta2, ddtheta1, ddtheta2]
}

fn wrap(mut x: f64, lo: f64, hi: f64) -> f64 {
    let span = hi - lo;
    while x > hi {
        x -= span;
    }
    while x < lo {
        x += span;
    }
    x
}

/// Swing-up of a two-link chain; actions 0/1/2 apply torque -1/0/+1.
#[derive(Debug, Clone, Default)]
pub struct Acrobot {
    state: AcrobotState,
    steps: usize,
}

impl Acrobot {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn state(&self) -> AcrobotState {
        self.state
    }

    pub fn set_state(&mut self, state: AcrobotState) {
        self.state = state;
    }

    pub fn observation(&self) -> Vec<f64> {
        self.state.observation()
    }

    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<f64> {
        let mut u = || rng.gen_range(-0.1..0.1);
        self.state = AcrobotState {
            theta1: u(),
            theta2: u(),
            theta1_dot: u(),
            theta2_dot: u(),
        };
        self.steps = 0;
        self.observation()
    }

    pub fn step(&mut self, action: usize) -> Result<EnvStep> {
        let torque = *TORQUES
            .get(action)
            .ok_or(Error::InvalidAction { action, n_actions: 3 })?;
        self.state = self.state.advance(torque);
        self.steps += 1;
        let terminated = self.state.is_terminal();
        Ok(EnvStep {
            observation: self.observation(),
            reward: if terminated { 0.0 } else { -1.0 },
            terminated,
            truncated: !terminated && self.steps >= MAX_EPISODE_STEPS,
        })
    }
}
