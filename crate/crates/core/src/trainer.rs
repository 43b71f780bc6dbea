//! DQN-style option-critic training.
//!
//! Every step computes the online actor losses (policy gradient with a
//! one-step TD advantage, termination gradient against the greedy option
//! value); every `n_critic` steps a replay mini-batch adds the critic's
//! squared TD error. All terms go into a single Adam step over the whole
//! network. TD targets use termination probabilities from the main network
//! and option values from the target network, and are treated as constants.

use std::collections::VecDeque;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{self, NetSpec, OptionCriticNet, PassGrads, StatePass, TargetNet};
use crate::diffnet::{self, Adam};
use crate::envs::Env;
use crate::error::{Error, Result};
use crate::rng::RunRngs;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub gamma: f64,
    pub lr: f64,
    pub n_critic: usize,
    pub n_target: usize,
    pub eps_start: f64,
    pub eps_min: f64,
    /// Per-step multiplicative decay; when absent, chosen so epsilon reaches
    /// `eps_min` halfway through `total_steps`.
    pub eps_decay_rate: Option<f64>,
    pub term_reg: f64,
    pub entropy_reg: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub total_steps: usize,
    pub n_options: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            lr: 0.0005,
            n_critic: 4,
            n_target: 200,
            eps_start: 1.0,
            eps_min: 0.05,
            eps_decay_rate: None,
            term_reg: 0.01,
            entropy_reg: 0.01,
            batch_size: 32,
            buffer_capacity: 10_000,
            total_steps: 100_000,
            n_options: 2,
        }
    }
}

impl TrainConfig {
    pub fn decay_rate(&self) -> f64 {
        self.eps_decay_rate.unwrap_or_else(|| {
            let half = (0.5 * self.total_steps as f64).max(1.0);
            ((self.eps_min / self.eps_start).ln() / half).exp()
        })
    }

    /// Copy with `eps_decay_rate` filled in.
    pub fn resolved(&self) -> Self {
        Self {
            eps_decay_rate: Some(self.decay_rate()),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma", self.gamma),
            ("lr", self.lr),
            ("eps_start", self.eps_start),
            ("eps_min", self.eps_min),
            ("term_reg", self.term_reg),
            ("entropy_reg", self.entropy_reg),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        let counts = [
            ("n_critic", self.n_critic),
            ("n_target", self.n_target),
            ("batch_size", self.batch_size),
            ("buffer_capacity", self.buffer_capacity),
            ("total_steps", self.total_steps),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.eps_min > self.eps_start || self.eps_start > 1.0 {
            return Err(Error::Config("need eps_min <= eps_start <= 1".into()));
        }
        if self.gamma > 1.0 {
            return Err(Error::Config("gamma must not exceed 1".into()));
        }
        if let Some(r) = self.eps_decay_rate {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::Config(format!("eps_decay_rate must be in (0, 1], got {r}")));
            }
        }
        if self.batch_size > self.buffer_capacity {
            return Err(Error::Config("batch_size exceeds buffer_capacity".into()));
        }
        if self.n_options < 2 {
            return Err(Error::Config("need at least two options".into()));
        }
        Ok(())
    }
}

/// `max(eps_min, eps_start * rate^t)`.
pub fn epsilon_at(t: usize, cfg: &TrainConfig) -> f64 {
    let decayed = cfg.eps_start * cfg.decay_rate().powf(t as f64);
    decayed.max(cfg.eps_min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub s: Vec<f64>,
    pub omega: usize,
    pub a: usize,
    pub r: f64,
    pub s_next: Vec<f64>,
    /// Environment termination; time-limit truncation stays `false`.
    pub terminated: bool,
}

/// Fixed-capacity FIFO of transitions.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            items: VecDeque::with_capacity(capacity.min(1 << 16)),
        }
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.items.iter()
    }

    /// Uniform sample without replacement; `None` when fewer than `n` are stored.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Option<Vec<&Transition>> {
        if self.items.len() < n {
            return None;
        }
        Some(
            index::sample(rng, self.items.len(), n)
                .into_iter()
                .map(|i| &self.items[i])
                .collect(),
        )
    }
}

/// `r + gamma * ((1 - beta) Q'(s', omega) + beta max Q'(s', .))`, or `r` on
/// termination.
pub fn td_target(r: f64, terminated: bool, gamma: f64, beta_next: f64, q_target_next: &[f64], omega: usize) -> f64 {
    if terminated {
        return r;
    }
    let max_q = q_target_next.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    r + gamma * ((1.0 - beta_next) * q_target_next[omega] + beta_next * max_q)
}

/// TD target for one transition, evaluating `beta` on the main network and
/// option values on the target network.
pub fn td_target_for(t: &Transition, net: &OptionCriticNet, target: &TargetNet, gamma: f64) -> Result<f64> {
    if t.terminated {
        return Ok(t.r);
    }
    let beta = net.termination_probs(&t.s_next)?;
    let q_next = target.net().option_values(&t.s_next)?;
    Ok(td_target(t.r, false, gamma, beta[t.omega], &q_next, t.omega))
}

/// Value and logit gradient of
/// `-ln pi(a) * advantage - entropy_reg * H(pi)` with the advantage held
/// constant.
pub fn policy_loss(probs: &[f64], action: usize, advantage: f64, entropy_reg: f64) -> (f64, Vec<f64>) {
    let log_p = probs[action].max(f64::MIN_POSITIVE).ln();
    let h = diffnet::entropy(probs);
    let loss = -log_p * advantage - entropy_reg * h;
    let h_grad = diffnet::entropy_grad_logits(probs);
    let grad = probs
        .iter()
        .zip(&h_grad)
        .enumerate()
        .map(|(i, (&p, &hg))| {
            let onehot = if i == action { 1.0 } else { 0.0 };
            advantage * (p - onehot) - entropy_reg * hg
        })
        .collect();
    (loss, grad)
}

/// Value and `d/d beta` of `beta * (Q(omega) - max Q + term_reg)`; the
/// bracket is a constant.
pub fn termination_loss(beta: f64, q: &[f64], omega: usize, term_reg: f64) -> (f64, f64) {
    let max_q = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let coeff = q[omega] - max_q + term_reg;
    (beta * coeff, coeff)
}

/// `(1 / 2B) sum_j (Q_j - y_j)^2` and its gradient with respect to each `Q_j`.
pub fn critic_loss(q_pred: &[f64], targets: &[f64]) -> (f64, Vec<f64>) {
    let b = q_pred.len() as f64;
    let loss = q_pred
        .iter()
        .zip(targets)
        .map(|(q, y)| (q - y) * (q - y))
        .sum::<f64>()
        / (2.0 * b);
    let grads = q_pred.iter().zip(targets).map(|(q, y)| (q - y) / b).collect();
    (loss, grads)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActorLosses {
    pub policy: f64,
    pub termination: f64,
    pub entropy: f64,
    pub td_target: f64,
}

impl ActorLosses {
    pub fn total(&self) -> f64 {
        self.policy + self.termination
    }
}

/// Accumulates the online actor gradients for `t` into `net`.
///
/// `pass` must be the main-network pass on `t.s` and `policy` the active
/// option's policy pass on `pass.h`, both taken with the current parameters.
pub fn accumulate_actor_grads(
    net: &mut OptionCriticNet,
    target: &TargetNet,
    pass: &StatePass,
    policy: &agent::PolicyPass,
    t: &Transition,
    cfg: &TrainConfig,
) -> Result<ActorLosses> {
    let y = td_target_for(t, net, target, cfg.gamma)?;
    let omega = t.omega;
    let advantage = y - pass.q[omega];
    let (l_pol, g_logits) = policy_loss(&policy.probs, t.a, advantage, cfg.entropy_reg);
    let (l_term, g_beta) = termination_loss(pass.beta[omega], &pass.q, omega, cfg.term_reg);

    let mut grads = PassGrads::zeros(net.n_options(), pass.h.len());
    net.backward_policy(policy, &g_logits, &mut grads)?;
    grads.beta[omega] = g_beta;
    net.backward_pass(pass, &grads)?;
    Ok(ActorLosses {
        policy: l_pol,
        termination: l_term,
        entropy: diffnet::entropy(&policy.probs),
        td_target: y,
    })
}

/// Accumulates the critic gradients for `batch` into `net`; returns the loss.
pub fn accumulate_critic_grads(
    net: &mut OptionCriticNet,
    target: &TargetNet,
    batch: &[&Transition],
    cfg: &TrainConfig,
) -> Result<f64> {
    let mut passes = Vec::with_capacity(batch.len());
    let mut preds = Vec::with_capacity(batch.len());
    let mut ys = Vec::with_capacity(batch.len());
    for t in batch {
        let p = net.q_pass(&t.s)?;
        preds.push(p.q[t.omega]);
        ys.push(td_target_for(t, net, target, cfg.gamma)?);
        passes.push(p);
    }
    let (loss, grads) = critic_loss(&preds, &ys);
    for ((t, p), g) in batch.iter().zip(&passes).zip(grads) {
        let mut gq = vec![0.0; net.n_options()];
        gq[t.omega] = g;
        net.backward_q_pass(p, &gq)?;
    }
    Ok(loss)
}

/// Bernoulli draw with success probability `beta`.
pub fn sample_termination<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> bool {
    rng.gen::<f64>() < beta
}

/// Everything recorded for one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMetrics {
    /// 1-based step index.
    pub step: usize,
    /// Return of the episode that ended on this step.
    pub episode_return: Option<f64>,
    pub entropy: f64,
    pub actor_loss: Option<f64>,
    pub critic_loss: Option<f64>,
    pub epsilon: f64,
    pub option: usize,
}

/// One option-critic training run.
pub struct Trainer {
    cfg: TrainConfig,
    env: Env,
    net: OptionCriticNet,
    target: TargetNet,
    opt: Adam,
    buffer: ReplayBuffer,
    rngs: RunRngs,
    t: usize,
    state: Vec<f64>,
    pass: StatePass,
    option: usize,
    episode_return: f64,
}

impl Trainer {
    pub fn new(net_spec: NetSpec, cfg: TrainConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        if net_spec.n_options != cfg.n_options {
            return Err(Error::Config("network and config disagree on option count".into()));
        }
        let mut rngs = RunRngs::new(seed);
        let net = OptionCriticNet::build(net_spec, &mut rngs.init)?;
        let target = TargetNet::new(&net);
        let mut env = net_spec.env.make();
        let state = env.reset(&mut rngs.env);
        let pass = net.pass(&state)?;
        let option = agent::choose_option(&pass.q, epsilon_at(0, &cfg), &mut rngs.option);
        Ok(Self {
            opt: Adam::new(cfg.lr),
            buffer: ReplayBuffer::new(cfg.buffer_capacity),
            cfg,
            env,
            net,
            target,
            rngs,
            t: 0,
            state,
            pass,
            option,
            episode_return: 0.0,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn net(&self) -> &OptionCriticNet {
        &self.net
    }

    pub fn target(&self) -> &TargetNet {
        &self.target
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn steps_done(&self) -> usize {
        self.t
    }

    pub fn active_option(&self) -> usize {
        self.option
    }

    /// One iteration of the training loop.
    pub fn train_step(&mut self) -> Result<StepMetrics> {
        let omega = self.option;
        let policy = self.net.policy(&self.pass.h, omega)?;
        let a = agent::act(&policy.probs, &mut self.rngs.action);
        let step = self.env.step(a)?;
        self.episode_return += step.reward;

        let transition = Transition {
            s: std::mem::take(&mut self.state),
            omega,
            a,
            r: step.reward,
            s_next: step.observation.clone(),
            terminated: step.terminated,
        };

        self.net.zero_grad();
        let actor = accumulate_actor_grads(
            &mut self.net,
            &self.target,
            &self.pass,
            &policy,
            &transition,
            &self.cfg,
        )?;
        self.buffer.push(transition);
        self.t += 1;

        let mut critic = None;
        if self.t.is_multiple_of(self.cfg.n_critic) {
            if let Some(batch) = self.buffer.sample(self.cfg.batch_size, &mut self.rngs.buffer) {
                critic = Some(accumulate_critic_grads(&mut self.net, &self.target, &batch, &self.cfg)?);
            }
        }
        self.opt.step(self.net.param_segments())?;

        let epsilon = epsilon_at(self.t, &self.cfg);
        let mut episode_return = None;
        if step.done() {
            episode_return = Some(self.episode_return);
            self.episode_return = 0.0;
            self.state = self.env.reset(&mut self.rngs.env);
            self.pass = self.net.pass(&self.state)?;
            self.option = agent::choose_option(&self.pass.q, epsilon, &mut self.rngs.option);
        } else {
            self.state = step.observation;
            self.pass = self.net.pass(&self.state)?;
            if sample_termination(self.pass.beta[omega], &mut self.rngs.termination) {
                self.option = agent::choose_option(&self.pass.q, epsilon, &mut self.rngs.option);
            }
        }

        if self.t.is_multiple_of(self.cfg.n_target) {
            self.target.sync(&self.net)?;
        }

        Ok(StepMetrics {
            step: self.t,
            episode_return,
            entropy: actor.entropy,
            actor_loss: Some(actor.total()),
            critic_loss: critic,
            epsilon,
            option: omega,
        })
    }

    /// Runs to `total_steps`, handing every step's metrics to `sink`.
    pub fn run<F>(&mut self, mut sink: F) -> Result<()>
    where
        F: FnMut(&StepMetrics, &Trainer) -> Result<()>,
    {
        while self.t < self.cfg.total_steps {
            let m = self.train_step()?;
            sink(&m, self)?;
        }
        Ok(())
    }
}

/// Uniform-random actions through the same episode loop; nothing is learned.
pub struct RandomAgent {
    env: Env,
    rngs: RunRngs,
    t: usize,
    episode_return: f64,
}

impl RandomAgent {
    pub fn new(env: crate::envs::EnvKind, seed: u64) -> Self {
        let mut rngs = RunRngs::new(seed);
        let mut env = env.make();
        env.reset(&mut rngs.env);
        Self {
            env,
            rngs,
            t: 0,
            episode_return: 0.0,
        }
    }

    pub fn step(&mut self) -> Result<StepMetrics> {
        let n = self.env.kind().n_actions();
        let a = self.rngs.action.gen_range(0..n);
        let step = self.env.step(a)?;
        self.t += 1;
        self.episode_return += step.reward;
        let mut episode_return = None;
        if step.done() {
            episode_return = Some(self.episode_return);
            self.episode_return = 0.0;
            self.env.reset(&mut self.rngs.env);
        }
        Ok(StepMetrics {
            step: self.t,
            episode_return,
            entropy: (n as f64).ln(),
            actor_loss: None,
            critic_loss: None,
            epsilon: 1.0,
            option: 0,
        })
    }

    /// Steps until `episodes` episodes have finished; returns their returns.
    pub fn episodes(&mut self, episodes: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(episodes);
        while out.len() < episodes {
            if let Some(r) = self.step()?.episode_return {
                out.push(r);
            }
        }
        Ok(out)
    }
}
