//! CartPole and Acrobot with the standard classic-control dynamics.
//!
//! Both environments truncate at [`MAX_EPISODE_STEPS`]. Truncation is reported
//! separately from termination so the learner can keep bootstrapping through
//! time limits.

mod acrobot;
mod cartpole;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use acrobot::{Acrobot, AcrobotState};
pub use cartpole::{CartPole, CartPoleState};

use crate::error::{Error, Result};
use crate::vqc::{Encoding, EncodingSpec};

pub const MAX_EPISODE_STEPS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    CartPole,
    Acrobot,
}

impl EnvKind {
    pub fn obs_dim(self) -> usize {
        match self {
            EnvKind::CartPole => 4,
            EnvKind::Acrobot => 6,
        }
    }

    pub fn n_actions(self) -> usize {
        match self {
            EnvKind::CartPole => 2,
            EnvKind::Acrobot => 3,
        }
    }

    pub fn make(self) -> Env {
        match self {
            EnvKind::CartPole => Env::CartPole(CartPole::new()),
            EnvKind::Acrobot => Env::Acrobot(Acrobot::new()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::CartPole => "cartpole",
            EnvKind::Acrobot => "acrobot",
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cartpole" => Ok(EnvKind::CartPole),
            "acrobot" => Ok(EnvKind::Acrobot),
            other => Err(Error::Config(format!("unsupported environment '{other}'"))),
        }
    }
}

/// How each observation dimension maps to a rotation angle when the
/// observation feeds a circuit directly.
pub fn encoding_spec(env: EnvKind) -> EncodingSpec {
    use std::f64::consts::PI;
    let kinds = match env {
        EnvKind::CartPole => vec![
            Encoding::Bounded(cartpole::X_THRESHOLD * 2.0),
            Encoding::Unbounded,
            Encoding::Bounded(cartpole::THETA_THRESHOLD_RADIANS * 2.0),
            Encoding::Unbounded,
        ],
        EnvKind::Acrobot => vec![
            Encoding::Bounded(1.0),
            Encoding::Bounded(1.0),
            Encoding::Bounded(1.0),
            Encoding::Bounded(1.0),
            Encoding::Bounded(4.0 * PI),
            Encoding::Bounded(9.0 * PI),
        ],
    };
    EncodingSpec::new(kinds).expect("bounds are positive")
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvStep {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub terminated: bool,
    pub truncated: bool,
}

impl EnvStep {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

#[derive(Debug, Clone)]
pub enum Env {
    CartPole(CartPole),
    Acrobot(Acrobot),
}

impl Env {
    pub fn kind(&self) -> EnvKind {
        match self {
            Env::CartPole(_) => EnvKind::CartPole,
            Env::Acrobot(_) => EnvKind::Acrobot,
        }
    }

    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<f64> {
        match self {
            Env::CartPole(e) => e.reset(rng),
            Env::Acrobot(e) => e.reset(rng),
        }
    }

    pub fn step(&mut self, action: usize) -> Result<EnvStep> {
        match self {
            Env::CartPole(e) => e.step(action),
            Env::Acrobot(e) => e.step(action),
        }
    }

    pub fn observation(&self) -> Vec<f64> {
        match self {
            Env::CartPole(e) => e.observation(),
            Env::Acrobot(e) => e.observation(),
        }
    }
}

/// Deterministic reset from an integer seed.
pub fn reset_seeded(env: &mut Env, seed: u64) -> Vec<f64> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    env.reset(&mut rng)
}
