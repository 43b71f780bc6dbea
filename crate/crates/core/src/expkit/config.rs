use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agent::{ArchOverrides, NetSpec, VariantSpec};
use crate::envs::EnvKind;
use crate::error::{Error, Result};
use crate::trainer::TrainConfig;

/// File name of the resolved configuration written into every run directory.
pub const RESOLVED_CONFIG: &str = "resolved.config";

/// Either an option-critic network variant or the uniform-random baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum AgentKind {
    OptionCritic(VariantSpec),
    Random,
}

impl AgentKind {
    pub fn variant(&self) -> Option<VariantSpec> {
        match self {
            AgentKind::OptionCritic(v) => Some(*v),
            AgentKind::Random => None,
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AgentKind::OptionCritic(v) => write!(f, "{v}"),
            AgentKind::Random => f.write_str("random"),
        }
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("random") {
            Ok(AgentKind::Random)
        } else {
            Ok(AgentKind::OptionCritic(s.parse()?))
        }
    }
}

impl TryFrom<String> for AgentKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<AgentKind> for String {
    fn from(a: AgentKind) -> String {
        a.to_string()
    }
}

/// One experiment: an agent on an environment over a list of seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub env: EnvKind,
    pub agent: AgentKind,
    pub overrides: ArchOverrides,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    /// Trailing window (in steps) for reward smoothing.
    pub smoothing_window: usize,
    /// Step spacing of the aggregate curve.
    pub curve_stride: usize,
    /// Write an intermediate checkpoint every this many steps.
    pub checkpoint_every: Option<usize>,
    pub train: TrainConfig,
}

impl RunConfig {
    pub fn new(env: EnvKind, agent: AgentKind) -> Self {
        Self {
            env,
            agent,
            overrides: ArchOverrides::default(),
            seeds: (0..10).collect(),
            out_dir: PathBuf::from("runs"),
            smoothing_window: 2000,
            curve_stride: 1,
            checkpoint_every: None,
            train: TrainConfig::default(),
        }
    }

    pub fn with_seeds(mut self, seeds: impl IntoIterator<Item = u64>) -> Self {
        self.seeds = seeds.into_iter().collect();
        self
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.train.total_steps = steps;
        self
    }

    pub fn with_options(mut self, n: usize) -> Self {
        self.train.n_options = n;
        self
    }

    pub fn with_overrides(mut self, o: ArchOverrides) -> Self {
        self.overrides = o;
        self
    }

    pub fn with_out_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.out_dir = dir.into();
        self
    }

    pub fn net_spec(&self) -> Option<NetSpec> {
        self.agent
            .variant()
            .map(|v| NetSpec::new(self.env, v, self.train.n_options).with_overrides(self.overrides))
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::Config("seed list is empty".into()));
        }
        if self.smoothing_window == 0 || self.curve_stride == 0 {
            return Err(Error::Config("smoothing window and curve stride must be positive".into()));
        }
        if matches!(self.checkpoint_every, Some(0)) {
            return Err(Error::Config("checkpoint interval must be positive".into()));
        }
        if let Some(spec) = self.net_spec() {
            // surfaces invalid variant/env combinations before any work starts
            let mut rng = crate::rng::stream(0, crate::rng::Stream::ParamInit);
            crate::agent::OptionCriticNet::build(spec, &mut rng)?;
        }
        Ok(())
    }

    /// Short label, e.g. `hybrid_f`, `classical_w16`, `hybrid_p_o3`,
    /// `hybrid_f_depth-2`, `hybrid_f_fixed_lambda`, `hybrid_f_no_cnot`.
    pub fn label(&self) -> String {
        let mut s = self.agent.to_string();
        let d = ArchOverrides::default();
        let o = &self.overrides;
        let quantum_fe = self.agent.variant().is_some_and(|v| v.quantum_f);
        if self.agent != AgentKind::Random {
            if o.fe_width != d.fe_width && !quantum_fe {
                s.push_str(&format!("_w{}", o.fe_width));
            }
            if self.train.n_options != 2 {
                s.push_str(&format!("_o{}", self.train.n_options));
            }
            if o.depth_delta != 0 && quantum_fe {
                s.push_str(&format!("_depth{:+}", o.depth_delta));
            }
            if !o.scaling {
                s.push_str("_fixed_lambda");
            }
            if !o.entangling {
                s.push_str("_no_cnot");
            }
        }
        s
    }

    /// The classical two-option baseline with default architecture.
    pub fn is_baseline(&self) -> bool {
        self.agent == AgentKind::OptionCritic(VariantSpec::CLASSICAL)
            && self.train.n_options == 2
            && self.overrides == ArchOverrides::default()
    }

    pub fn to_toml(&self) -> Result<String> {
        let mut resolved = self.clone();
        resolved.train = self.train.resolved();
        toml::to_string_pretty(&resolved).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }
}
