//! The option-critic network: a shared feature extractor feeding an
//! option-value head, a termination head and one policy head per option.
//! Each of the four components is either classical or a circuit.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diffnet::{self, Layer, Linear, Mlp, MlpTrace};
use crate::envs::{encoding_spec, EnvKind};
use crate::error::{Error, Result};
use crate::vqc::{EncodingSpec, QuantumLayer, QuantumTrace, VqcArchitecture, VqcParams};

/// Which components are circuits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct VariantSpec {
    pub quantum_f: bool,
    pub quantum_o: bool,
    pub quantum_t: bool,
    pub quantum_p: bool,
}

impl VariantSpec {
    pub const CLASSICAL: Self = Self::new(false, false, false, false);
    pub const HYBRID_F: Self = Self::new(true, false, false, false);
    pub const HYBRID_O: Self = Self::new(false, true, false, false);
    pub const HYBRID_T: Self = Self::new(false, false, true, false);
    pub const HYBRID_P: Self = Self::new(false, false, false, true);
    pub const HYBRID_FO: Self = Self::new(true, true, false, false);
    pub const HYBRID_FT: Self = Self::new(true, false, true, false);
    pub const HYBRID_FP: Self = Self::new(true, false, false, true);
    pub const HYBRID_FOTP: Self = Self::new(true, true, true, true);

    /// The eight hybrid variants in reporting order.
    pub const HYBRIDS: [Self; 8] = [
        Self::HYBRID_FOTP,
        Self::HYBRID_FO,
        Self::HYBRID_FT,
        Self::HYBRID_FP,
        Self::HYBRID_F,
        Self::HYBRID_O,
        Self::HYBRID_T,
        Self::HYBRID_P,
    ];

    pub const fn new(f: bool, o: bool, t: bool, p: bool) -> Self {
        Self {
            quantum_f: f,
            quantum_o: o,
            quantum_t: t,
            quantum_p: p,
        }
    }

    pub fn is_classical(&self) -> bool {
        *self == Self::CLASSICAL
    }

    /// `classical` or `hybrid_` followed by the quantum component letters.
    pub fn name(&self) -> String {
        if self.is_classical() {
            return "classical".into();
        }
        let mut s = String::from("hybrid_");
        for (on, c) in [
            (self.quantum_f, 'f'),
            (self.quantum_o, 'o'),
            (self.quantum_t, 't'),
            (self.quantum_p, 'p'),
        ] {
            if on {
                s.push(c);
            }
        }
        s
    }
}

impl fmt::Display for VariantSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for VariantSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        if s == "classical" {
            return Ok(Self::CLASSICAL);
        }
        let letters = s
            .strip_prefix("hybrid_")
            .filter(|l| !l.is_empty())
            .ok_or_else(|| Error::Config(format!("unknown variant '{s}'")))?;
        let mut v = Self::CLASSICAL;
        for c in letters.chars() {
            let flag = match c {
                'f' => &mut v.quantum_f,
                'o' => &mut v.quantum_o,
                't' => &mut v.quantum_t,
                'p' => &mut v.quantum_p,
                _ => return Err(Error::Config(format!("unknown variant '{s}'"))),
            };
            if *flag {
                return Err(Error::Config(format!("repeated component in '{s}'")));
            }
            *flag = true;
        }
        Ok(v)
    }
}

/// Architecture knobs used by the scaling and ablation experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchOverrides {
    /// Hidden width of a classical feature extractor.
    pub fe_width: usize,
    /// Added to the layer count of a quantum feature extractor.
    pub depth_delta: i32,
    /// Trainable input scaling on every circuit.
    pub scaling: bool,
    /// CNOT ring on every circuit.
    pub entangling: bool,
}

impl Default for ArchOverrides {
    fn default() -> Self {
        Self {
            fe_width: 8,
            depth_delta: 0,
            scaling: true,
            entangling: true,
        }
    }
}

/// `(suffix, shape, flat range)` of one checkpointed sub-array.
type Part = (&'static str, Vec<usize>, std::ops::Range<usize>);

/// Everything needed to rebuild a network's shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetSpec {
    pub env: EnvKind,
    pub variant: VariantSpec,
    pub n_options: usize,
    pub overrides: ArchOverrides,
}

impl NetSpec {
    pub fn new(env: EnvKind, variant: VariantSpec, n_options: usize) -> Self {
        Self {
            env,
            variant,
            n_options,
            overrides: ArchOverrides::default(),
        }
    }

    pub fn with_overrides(mut self, overrides: ArchOverrides) -> Self {
        self.overrides = overrides;
        self
    }

    fn fe_layers(&self) -> Result<usize> {
        let base: i32 = match self.env {
            EnvKind::CartPole => 4,
            EnvKind::Acrobot => 5,
        };
        let layers = base + self.overrides.depth_delta;
        if layers < 1 {
            return Err(Error::Config(format!(
                "depth delta {} leaves no circuit layers",
                self.overrides.depth_delta
            )));
        }
        Ok(layers as usize)
    }

    fn head_layers(&self) -> usize {
        match self.env {
            EnvKind::CartPole => 1,
            EnvKind::Acrobot => 2,
        }
    }

    fn circuit(&self, layers: usize, out_dim: usize) -> Result<VqcArchitecture> {
        Ok(VqcArchitecture::new(self.env.obs_dim(), layers, out_dim)?
            .with_entangling(self.overrides.entangling)
            .with_learnable_scaling(self.overrides.scaling))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Component {
    Linear(Linear),
    Mlp(Mlp),
    Quantum(QuantumLayer),
}

#[derive(Debug, Clone)]
pub enum ComponentTrace {
    Linear(Vec<f64>),
    Mlp(MlpTrace),
    Quantum(QuantumTrace),
}

impl Component {
    pub fn is_quantum(&self) -> bool {
        matches!(self, Component::Quantum(_))
    }

    pub fn n_params(&self) -> usize {
        self.params().len()
    }

    pub fn params(&self) -> &[f64] {
        match self {
            Component::Linear(l) => l.params(),
            Component::Mlp(m) => m.params(),
            Component::Quantum(q) => q.params(),
        }
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        match self {
            Component::Linear(l) => l.params_mut(),
            Component::Mlp(m) => m.params_mut(),
            Component::Quantum(q) => q.params_mut(),
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            Component::Linear(l) => l.out_dim(),
            Component::Mlp(m) => m.out_dim(),
            Component::Quantum(q) => q.out_dim(),
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, ComponentTrace)> {
        Ok(match self {
            Component::Linear(l) => {
                let (y, t) = l.forward(x)?;
                (y, ComponentTrace::Linear(t))
            }
            Component::Mlp(m) => {
                let (y, t) = m.forward(x)?;
                (y, ComponentTrace::Mlp(t))
            }
            Component::Quantum(q) => {
                let (y, t) = q.forward(x)?;
                (y, ComponentTrace::Quantum(t))
            }
        })
    }

    pub fn backward(&self, trace: &ComponentTrace, grad_out: &[f64], grad_params: &mut [f64]) -> Result<Vec<f64>> {
        match (self, trace) {
            (Component::Linear(l), ComponentTrace::Linear(t)) => l.backward(t, grad_out, grad_params),
            (Component::Mlp(m), ComponentTrace::Mlp(t)) => m.backward(t, grad_out, grad_params),
            (Component::Quantum(q), ComponentTrace::Quantum(t)) => q.backward(t, grad_out, grad_params),
            _ => Err(Error::Shape("trace does not belong to this component".into())),
        }
    }

    /// Named sub-arrays for checkpoints.
    fn parts(&self) -> Vec<Part> {
        fn linear_parts(
            prefix: [&'static str; 2],
            in_dim: usize,
            out_dim: usize,
            start: usize,
        ) -> Vec<Part> {
            let nw = in_dim * out_dim;
            vec![
                (prefix[0], vec![out_dim, in_dim], start..start + nw),
                (prefix[1], vec![out_dim], start + nw..start + nw + out_dim),
            ]
        }
        match self {
            Component::Linear(l) => linear_parts(["weight", "bias"], l.in_dim(), l.out_dim(), 0),
            Component::Mlp(m) => {
                let mut p = linear_parts(["hidden.weight", "hidden.bias"], m.in_dim(), m.hidden_dim(), 0);
                let off = Linear::param_count(m.in_dim(), m.hidden_dim());
                p.extend(linear_parts(
                    ["output.weight", "output.bias"],
                    m.hidden_dim(),
                    m.out_dim(),
                    off,
                ));
                p
            }
            Component::Quantum(q) => {
                let a = q.arch();
                let b = a.n_layers * a.n_qubits;
                let shape = vec![a.n_layers, a.n_qubits];
                let mut names = Vec::new();
                if a.learnable_scaling {
                    names.push("lambda");
                }
                names.push("theta_ry");
                names.push("theta_rz");
                names
                    .into_iter()
                    .enumerate()
                    .map(|(i, n)| (n, shape.clone(), i * b..(i + 1) * b))
                    .collect()
            }
        }
    }
}

/// A component with its accumulated gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub component: Component,
    pub grad: Vec<f64>,
}

impl Slot {
    fn new(component: Component) -> Self {
        let grad = vec![0.0; component.n_params()];
        Self { component, grad }
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, ComponentTrace)> {
        self.component.forward(x)
    }

    pub fn backward(&mut self, trace: &ComponentTrace, grad_out: &[f64]) -> Result<Vec<f64>> {
        self.component.backward(trace, grad_out, &mut self.grad)
    }
}

/// Per-component trainable parameter counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCounts {
    pub feature_extractor: usize,
    pub option_value: usize,
    pub termination: usize,
    pub policies: usize,
}

impl ComponentCounts {
    pub fn total(&self) -> usize {
        self.feature_extractor + self.option_value + self.termination + self.policies
    }

    pub fn as_tuple(&self) -> (usize, usize, usize, usize) {
        (self.feature_extractor, self.option_value, self.termination, self.policies)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptionCriticNet {
    spec: NetSpec,
    n_actions: usize,
    pub feature: Slot,
    pub q_head: Slot,
    pub term_head: Slot,
    pub policies: Vec<Slot>,
}

/// Main-network outputs on one state, with traces for backward.
#[derive(Debug, Clone)]
pub struct StatePass {
    pub h: Vec<f64>,
    pub q: Vec<f64>,
    pub beta: Vec<f64>,
    feature_trace: ComponentTrace,
    q_trace: ComponentTrace,
    term_trace: ComponentTrace,
}

#[derive(Debug, Clone)]
pub struct QPass {
    pub q: Vec<f64>,
    feature_trace: ComponentTrace,
    q_trace: ComponentTrace,
}

/// Gradients flowing back into one [`StatePass`].
#[derive(Debug, Clone)]
pub struct PassGrads {
    pub q: Vec<f64>,
    pub beta: Vec<f64>,
    pub h: Vec<f64>,
}

impl PassGrads {
    pub fn zeros(n_options: usize, h_dim: usize) -> Self {
        Self {
            q: vec![0.0; n_options],
            beta: vec![0.0; n_options],
            h: vec![0.0; h_dim],
        }
    }
}

/// Policy outputs of one option with the trace for backward.
#[derive(Debug, Clone)]
pub struct PolicyPass {
    pub option: usize,
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
    trace: ComponentTrace,
}

impl OptionCriticNet {
    pub fn build<R: Rng + ?Sized>(spec: NetSpec, rng: &mut R) -> Result<Self> {
        if spec.n_options < 2 {
            return Err(Error::Config(format!(
                "need at least two options, got {}",
                spec.n_options
            )));
        }
        let env = spec.env;
        let d = env.obs_dim();
        let n_actions = env.n_actions();
        if spec.n_options > d && (spec.variant.quantum_o || spec.variant.quantum_t) {
            return Err(Error::Config(format!(
                "{} options exceed the {d} qubits of a circuit head",
                spec.n_options
            )));
        }
        if spec.overrides.fe_width == 0 {
            return Err(Error::Config("feature extractor width must be positive".into()));
        }

        let feature = if spec.variant.quantum_f {
            let arch = spec.circuit(spec.fe_layers()?, d)?;
            Component::Quantum(QuantumLayer::new(encoding_spec(env), VqcParams::init(arch, rng))?)
        } else {
            Component::Mlp(Mlp::init(d, spec.overrides.fe_width, d, rng))
        };

        let mut head = |quantum: bool, out: usize| -> Result<Component> {
            if quantum {
                let arch = spec.circuit(spec.head_layers(), out)?;
                Ok(Component::Quantum(QuantumLayer::new(
                    EncodingSpec::latent(d),
                    VqcParams::init(arch, rng),
                )?))
            } else {
                Ok(match env {
                    EnvKind::CartPole => Component::Linear(Linear::init(d, out, rng)),
                    EnvKind::Acrobot => Component::Mlp(Mlp::init(d, 3, out, rng)),
                })
            }
        };
        let q_head = head(spec.variant.quantum_o, spec.n_options)?;
        let term_head = head(spec.variant.quantum_t, spec.n_options)?;
        let policies = (0..spec.n_options)
            .map(|_| head(spec.variant.quantum_p, n_actions).map(Slot::new))
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            spec,
            n_actions,
            feature: Slot::new(feature),
            q_head: Slot::new(q_head),
            term_head: Slot::new(term_head),
            policies,
        })
    }

    pub fn spec(&self) -> &NetSpec {
        &self.spec
    }

    pub fn n_options(&self) -> usize {
        self.spec.n_options
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn counts(&self) -> ComponentCounts {
        ComponentCounts {
            feature_extractor: self.feature.component.n_params(),
            option_value: self.q_head.component.n_params(),
            termination: self.term_head.component.n_params(),
            policies: self.policies.iter().map(|p| p.component.n_params()).sum(),
        }
    }

    pub fn n_params(&self) -> usize {
        self.counts().total()
    }

    fn slots(&self) -> impl Iterator<Item = &Slot> {
        [&self.feature, &self.q_head, &self.term_head]
            .into_iter()
            .chain(self.policies.iter())
    }

    fn slots_mut(&mut self) -> impl Iterator<Item = &mut Slot> {
        [&mut self.feature, &mut self.q_head, &mut self.term_head]
            .into_iter()
            .chain(self.policies.iter_mut())
    }

    /// `(name, slot)` pairs in canonical order.
    fn named_slots(&self) -> Vec<(String, &Slot)> {
        let mut v = vec![
            ("feature".to_string(), &self.feature),
            ("option_value".to_string(), &self.q_head),
            ("termination".to_string(), &self.term_head),
        ];
        for (i, p) in self.policies.iter().enumerate() {
            v.push((format!("policy{i}"), p));
        }
        v
    }

    pub fn features(&self, s: &[f64]) -> Result<(Vec<f64>, ComponentTrace)> {
        self.feature.forward(s)
    }

    pub fn q_values(&self, h: &[f64]) -> Result<(Vec<f64>, ComponentTrace)> {
        self.q_head.forward(h)
    }

    /// Termination probabilities, `sigmoid` of the head output.
    pub fn terminations(&self, h: &[f64]) -> Result<(Vec<f64>, ComponentTrace)> {
        let (logits, t) = self.term_head.forward(h)?;
        Ok((logits.into_iter().map(diffnet::sigmoid).collect(), t))
    }

    pub fn policy(&self, h: &[f64], option: usize) -> Result<PolicyPass> {
        let slot = self.policies.get(option).ok_or_else(|| {
            Error::Shape(format!("option {option} out of range for {} options", self.n_options()))
        })?;
        let (logits, trace) = slot.forward(h)?;
        let probs = diffnet::softmax(&logits);
        Ok(PolicyPass {
            option,
            logits,
            probs,
            trace,
        })
    }

    pub fn policy_probs(&self, h: &[f64], option: usize) -> Result<Vec<f64>> {
        Ok(self.policy(h, option)?.probs)
    }

    /// Features, option values and termination probabilities on `s`.
    pub fn pass(&self, s: &[f64]) -> Result<StatePass> {
        let (h, feature_trace) = self.features(s)?;
        let (q, q_trace) = self.q_values(&h)?;
        let (beta, term_trace) = self.terminations(&h)?;
        Ok(StatePass {
            h,
            q,
            beta,
            feature_trace,
            q_trace,
            term_trace,
        })
    }

    /// Features and option values with traces, skipping the termination head.
    pub fn q_pass(&self, s: &[f64]) -> Result<QPass> {
        let (h, feature_trace) = self.features(s)?;
        let (q, q_trace) = self.q_values(&h)?;
        Ok(QPass {
            q,
            feature_trace,
            q_trace,
        })
    }

    /// Backpropagates `grad_q` through the option-value head and the feature
    /// extractor.
    pub fn backward_q_pass(&mut self, pass: &QPass, grad_q: &[f64]) -> Result<()> {
        let gh = self.q_head.backward(&pass.q_trace, grad_q)?;
        self.feature.backward(&pass.feature_trace, &gh)?;
        Ok(())
    }

    /// Termination probabilities only.
    pub fn termination_probs(&self, s: &[f64]) -> Result<Vec<f64>> {
        let (h, _) = self.features(s)?;
        Ok(self.terminations(&h)?.0)
    }

    /// Option values only, for target evaluations.
    pub fn option_values(&self, s: &[f64]) -> Result<Vec<f64>> {
        let (h, _) = self.features(s)?;
        Ok(self.q_values(&h)?.0)
    }

    /// Backpropagates through the policy head into `grads.h`.
    pub fn backward_policy(&mut self, pass: &PolicyPass, grad_logits: &[f64], grads: &mut PassGrads) -> Result<()> {
        let gh = self.policies[pass.option].backward(&pass.trace, grad_logits)?;
        add_into(&mut grads.h, &gh);
        Ok(())
    }

    /// Backpropagates `grads.q`, `grads.beta` and `grads.h` through the heads
    /// and the feature extractor.
    pub fn backward_pass(&mut self, pass: &StatePass, grads: &PassGrads) -> Result<()> {
        let mut gh = grads.h.clone();
        if grads.q.iter().any(|&g| g != 0.0) {
            let g = self.q_head.backward(&pass.q_trace, &grads.q)?;
            add_into(&mut gh, &g);
        }
        if grads.beta.iter().any(|&g| g != 0.0) {
            let g_logits: Vec<f64> = grads
                .beta
                .iter()
                .zip(&pass.beta)
                .map(|(g, b)| g * b * (1.0 - b))
                .collect();
            let g = self.term_head.backward(&pass.term_trace, &g_logits)?;
            add_into(&mut gh, &g);
        }
        if gh.iter().any(|&g| g != 0.0) {
            self.feature.backward(&pass.feature_trace, &gh)?;
        }
        Ok(())
    }

    pub fn zero_grad(&mut self) {
        for s in self.slots_mut() {
            s.grad.iter_mut().for_each(|g| *g = 0.0);
        }
    }

    /// Parameter/gradient pairs in canonical order, for the optimizer.
    pub fn param_segments(&mut self) -> Vec<(&mut [f64], &[f64])> {
        self.slots_mut()
            .map(|s| (s.component.params_mut(), s.grad.as_slice()))
            .collect()
    }

    pub fn flat_params(&self) -> Vec<f64> {
        self.slots().flat_map(|s| s.component.params().iter().copied()).collect()
    }

    pub fn flat_grads(&self) -> Vec<f64> {
        self.slots().flat_map(|s| s.grad.iter().copied()).collect()
    }

    pub fn set_flat_params(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.n_params() {
            return Err(Error::Shape(format!(
                "expected {} parameters, got {}",
                self.n_params(),
                values.len()
            )));
        }
        let mut off = 0;
        for s in self.slots_mut() {
            let p = s.component.params_mut();
            p.copy_from_slice(&values[off..off + p.len()]);
            off += p.len();
        }
        Ok(())
    }

    /// Copies every parameter from `other`, which must share this shape.
    pub fn copy_params_from(&mut self, other: &OptionCriticNet) -> Result<()> {
        if other.spec != self.spec {
            return Err(Error::Shape("networks differ in architecture".into()));
        }
        for (dst, src) in self.slots_mut().zip(other.slots()) {
            dst.component.params_mut().copy_from_slice(src.component.params());
        }
        Ok(())
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let mut params = Vec::new();
        for (name, slot) in self.named_slots() {
            let values = slot.component.params();
            for (suffix, shape, range) in slot.component.parts() {
                params.push(NamedArray {
                    name: format!("{name}.{suffix}"),
                    shape,
                    values: values[range].to_vec(),
                });
            }
        }
        Checkpoint {
            version: Checkpoint::VERSION,
            spec: self.spec,
            params,
        }
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        if ck.version != Checkpoint::VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {}", ck.version)));
        }
        // build with a throwaway rng, then overwrite every value
        let mut rng = crate::rng::stream(0, crate::rng::Stream::ParamInit);
        let mut net = Self::build(ck.spec, &mut rng)?;
        let mut by_name: std::collections::HashMap<&str, &NamedArray> =
            ck.params.iter().map(|a| (a.name.as_str(), a)).collect();
        let layout: Vec<(String, Vec<Part>)> = net
            .named_slots()
            .into_iter()
            .map(|(n, s)| (n, s.component.parts()))
            .collect();
        for ((name, parts), slot) in layout.into_iter().zip(net.slots_mut()) {
            let dst = slot.component.params_mut();
            for (suffix, shape, range) in parts {
                let key = format!("{name}.{suffix}");
                let arr = by_name
                    .remove(key.as_str())
                    .ok_or_else(|| Error::Checkpoint(format!("missing array {key}")))?;
                if arr.shape != shape || arr.values.len() != range.len() {
                    return Err(Error::Checkpoint(format!(
                        "array {key} has shape {:?}, expected {:?}",
                        arr.shape, shape
                    )));
                }
                dst[range].copy_from_slice(&arr.values);
            }
        }
        if let Some(extra) = by_name.keys().next() {
            return Err(Error::Checkpoint(format!("unexpected array {extra}")));
        }
        Ok(net)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(&self.to_checkpoint())?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let ck: Checkpoint = serde_json::from_str(&text)?;
        Self::from_checkpoint(&ck)
    }
}

fn add_into(acc: &mut [f64], v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedArray {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

/// Serialized network: architecture plus named parameter arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub spec: NetSpec,
    pub params: Vec<NamedArray>,
}

impl Checkpoint {
    pub const VERSION: u32 = 1;
}

/// Slowly synchronized copy of the main network.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetNet(OptionCriticNet);

impl TargetNet {
    pub fn new(main: &OptionCriticNet) -> Self {
        let mut net = main.clone();
        net.zero_grad();
        Self(net)
    }

    pub fn sync(&mut self, main: &OptionCriticNet) -> Result<()> {
        self.0.copy_params_from(main)
    }

    pub fn net(&self) -> &OptionCriticNet {
        &self.0
    }
}

/// Greedy option with probability `1 - epsilon` (ties to the lowest index),
/// otherwise a uniformly random option.
pub fn choose_option<R: Rng + ?Sized>(q: &[f64], epsilon: f64, rng: &mut R) -> usize {
    let explore: f64 = rng.gen();
    if explore < epsilon {
        rng.gen_range(0..q.len())
    } else {
        argmax(q)
    }
}

pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Categorical sample from `probs`.
pub fn act<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut cum = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cum += p;
        if u < cum {
            return i;
        }
    }
    // rounding left u above the total; take the last action with mass
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};

    fn build(env: EnvKind, v: VariantSpec) -> OptionCriticNet {
        OptionCriticNet::build(NetSpec::new(env, v, 2), &mut stream(1, Stream::ParamInit)).unwrap()
    }

    #[test]
    fn variant_names_round_trip() {
        for v in VariantSpec::HYBRIDS.into_iter().chain([VariantSpec::CLASSICAL]) {
            assert_eq!(v.name().parse::<VariantSpec>().unwrap(), v);
        }
        assert_eq!("hybrid_fotp".parse::<VariantSpec>().unwrap(), VariantSpec::HYBRID_FOTP);
        assert!("hybrid_x".parse::<VariantSpec>().is_err());
        assert!("hybrid_ff".parse::<VariantSpec>().is_err());
        assert!("random".parse::<VariantSpec>().is_err());
    }

    #[test]
    fn table_counts() {
        assert_eq!(build(EnvKind::CartPole, VariantSpec::CLASSICAL).counts().as_tuple(), (76, 10, 10, 20));
        assert_eq!(build(EnvKind::Acrobot, VariantSpec::HYBRID_FOTP).counts().as_tuple(), (90, 36, 36, 72));
        assert_eq!(build(EnvKind::CartPole, VariantSpec::HYBRID_F).n_params(), 88);
    }

    #[test]
    fn rejects_single_option() {
        let r = OptionCriticNet::build(
            NetSpec::new(EnvKind::CartPole, VariantSpec::CLASSICAL, 1),
            &mut stream(0, Stream::ParamInit),
        );
        assert!(r.is_err());
    }

    #[test]
    fn zero_heads_give_uniform_outputs() {
        let mut net = build(EnvKind::Acrobot, VariantSpec::CLASSICAL);
        for p in net.term_head.component.params_mut() {
            *p = 0.0;
        }
        for p in net.policies[1].component.params_mut() {
            *p = 0.0;
        }
        let h = [0.3, -2.0, 1.0, 0.0, 5.0, 1.0];
        assert_eq!(net.terminations(&h).unwrap().0, vec![0.5, 0.5]);
        let p = net.policy_probs(&h, 1).unwrap();
        assert!(p.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn quantum_q_head_is_bounded() {
        let net = build(EnvKind::CartPole, VariantSpec::HYBRID_O);
        for s in [[100.0, -50.0, 3.0, 1e6], [0.0; 4], [-7.0, 7.0, -7.0, 7.0]] {
            let pass = net.pass(&s).unwrap();
            assert!(pass.q.iter().all(|q| (-1.0..=1.0).contains(q)));
        }
    }

    #[test]
    fn option_choice() {
        let mut rng = stream(3, Stream::OptionChoice);
        assert_eq!(choose_option(&[0.2, 0.7], 0.0, &mut rng), 1);
        assert_eq!(choose_option(&[0.5, 0.5], 0.0, &mut rng), 0);
    }

    #[test]
    fn action_sampling_edges() {
        let mut rng = stream(3, Stream::Action);
        for _ in 0..1000 {
            assert_eq!(act(&[1.0, 0.0], &mut rng), 0);
            assert_eq!(act(&[1.0], &mut rng), 0);
        }
    }

    #[test]
    fn target_sync_is_exact() {
        let mut main = build(EnvKind::CartPole, VariantSpec::HYBRID_FT);
        let mut target = TargetNet::new(&main);
        for p in main.q_head.component.params_mut() {
            *p += 0.1;
        }
        let s = [0.01, 0.2, -0.03, 0.4];
        assert_ne!(main.pass(&s).unwrap().q, target.net().pass(&s).unwrap().q);
        target.sync(&main).unwrap();
        let a = main.pass(&s).unwrap();
        let b = target.net().pass(&s).unwrap();
        assert_eq!(a.q, b.q);
        assert_eq!(a.beta, b.beta);
        assert_eq!(main.flat_params(), target.net().flat_params());
    }

    #[test]
    fn checkpoint_round_trip() {
        for v in [VariantSpec::CLASSICAL, VariantSpec::HYBRID_FOTP, VariantSpec::HYBRID_P] {
            let net = build(EnvKind::Acrobot, v);
            let ck = net.to_checkpoint();
            let json = serde_json::to_string(&ck).unwrap();
            let back = OptionCriticNet::from_checkpoint(&serde_json::from_str(&json).unwrap()).unwrap();
            assert_eq!(back.flat_params(), net.flat_params());
            let s = [0.9, 0.1, 0.8, -0.2, 1.0, -3.0];
            assert_eq!(back.pass(&s).unwrap().q, net.pass(&s).unwrap().q);
        }
    }

    #[test]
    fn checkpoint_rejects_bad_shapes() {
        let net = build(EnvKind::CartPole, VariantSpec::CLASSICAL);
        let mut ck = net.to_checkpoint();
        ck.params[0].shape = vec![1, 1];
        assert!(OptionCriticNet::from_checkpoint(&ck).is_err());
        let mut ck = net.to_checkpoint();
        ck.params.pop();
        assert!(OptionCriticNet::from_checkpoint(&ck).is_err());
        let mut ck = net.to_checkpoint();
        ck.version = 99;
        assert!(OptionCriticNet::from_checkpoint(&ck).is_err());
    }
}
