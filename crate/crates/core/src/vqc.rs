//! Data re-uploading variational circuit used as a differentiable layer.
//!
//! One layer applies `RX(lambda[l,i] * angle[i])` to every qubit, an optional
//! CNOT ring (`i -> i+1`, then the wrap `n-1 -> 0`), then `RY(theta_ry[l,i])`
//! and `RZ(theta_rz[l,i])` on every qubit. The readout is `<Z_k>` for the
//! first `out_dim` qubits, so outputs always lie in `[-1, 1]`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diffnet::Layer;
use crate::error::{Error, Result};
use crate::qsim::{Circuit, Gate, StateVector, MAX_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VqcArchitecture {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub entangling: bool,
    pub out_dim: usize,
    pub learnable_scaling: bool,
}

impl VqcArchitecture {
    pub fn new(n_qubits: usize, n_layers: usize, out_dim: usize) -> Result<Self> {
        let arch = Self {
            n_qubits,
            n_layers,
            entangling: true,
            out_dim,
            learnable_scaling: true,
        };
        arch.validate()?;
        Ok(arch)
    }

    pub fn with_entangling(mut self, on: bool) -> Self {
        self.entangling = on;
        self
    }

    pub fn with_learnable_scaling(mut self, on: bool) -> Self {
        self.learnable_scaling = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(Error::QubitCount(self.n_qubits));
        }
        if self.n_layers == 0 {
            return Err(Error::Config("a circuit needs at least one layer".into()));
        }
        if self.out_dim == 0 || self.out_dim > self.n_qubits {
            return Err(Error::Config(format!(
                "out_dim {} must be in 1..={}",
                self.out_dim, self.n_qubits
            )));
        }
        Ok(())
    }

    /// `n_layers * 3 * n_qubits` with trainable scaling, else `n_layers * 2 * n_qubits`.
    pub fn param_count(&self) -> usize {
        let blocks = if self.learnable_scaling { 3 } else { 2 };
        self.n_layers * blocks * self.n_qubits
    }

    fn block(&self) -> usize {
        self.n_layers * self.n_qubits
    }
}

pub fn param_count(arch: &VqcArchitecture) -> usize {
    arch.param_count()
}

/// Trainable angles of one circuit, stored flat as
/// `[lambda (if learnable) | theta_ry | theta_rz]`, each block row-major over
/// `(layer, qubit)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VqcParams {
    arch: VqcArchitecture,
    values: Vec<f64>,
}

impl VqcParams {
    /// `lambda = 1`, thetas i.i.d. uniform on `[-pi, pi]`.
    pub fn init<R: Rng + ?Sized>(arch: VqcArchitecture, rng: &mut R) -> Self {
        let block = arch.block();
        let mut values = Vec::with_capacity(arch.param_count());
        if arch.learnable_scaling {
            values.extend(std::iter::repeat_n(1.0, block));
        }
        values.extend((0..2 * block).map(|_| rng.gen_range(-PI..=PI)));
        Self { arch, values }
    }

    pub fn zeros(arch: VqcArchitecture) -> Self {
        Self {
            arch,
            values: vec![0.0; arch.param_count()],
        }
    }

    pub fn from_flat(arch: VqcArchitecture, values: Vec<f64>) -> Result<Self> {
        if values.len() != arch.param_count() {
            return Err(Error::Shape(format!(
                "expected {} circuit parameters, got {}",
                arch.param_count(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("non-finite circuit parameter".into()));
        }
        Ok(Self { arch, values })
    }

    pub fn arch(&self) -> &VqcArchitecture {
        &self.arch
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    fn offsets(&self) -> (Option<usize>, usize, usize) {
        let b = self.arch.block();
        if self.arch.learnable_scaling {
            (Some(0), b, 2 * b)
        } else {
            (None, 0, b)
        }
    }

    fn idx(&self, layer: usize, qubit: usize) -> usize {
        layer * self.arch.n_qubits + qubit
    }

    /// Input scaling; fixed at 1 when scaling is not learnable.
    pub fn lambda(&self, layer: usize, qubit: usize) -> f64 {
        match self.offsets().0 {
            Some(o) => self.values[o + self.idx(layer, qubit)],
            None => 1.0,
        }
    }

    pub fn theta_ry(&self, layer: usize, qubit: usize) -> f64 {
        self.values[self.offsets().1 + self.idx(layer, qubit)]
    }

    pub fn theta_rz(&self, layer: usize, qubit: usize) -> f64 {
        self.values[self.offsets().2 + self.idx(layer, qubit)]
    }

    pub fn set_lambda(&mut self, layer: usize, qubit: usize, v: f64) {
        if let Some(o) = self.offsets().0 {
            let i = o + self.idx(layer, qubit);
            self.values[i] = v;
        }
    }

    pub fn set_theta_ry(&mut self, layer: usize, qubit: usize, v: f64) {
        let i = self.offsets().1 + self.idx(layer, qubit);
        self.values[i] = v;
    }

    pub fn set_theta_rz(&mut self, layer: usize, qubit: usize, v: f64) {
        let i = self.offsets().2 + self.idx(layer, qubit);
        self.values[i] = v;
    }
}

/// How one raw input dimension is mapped to a rotation angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Encoding {
    /// `2 arctan(x)`.
    Unbounded,
    /// `(pi / c) x` after clamping to `[-c, c]`.
    Bounded(f64),
    /// Latent features from an upstream component; `2 arctan(h)`.
    Latent,
}

impl Encoding {
    pub fn angle(self, x: f64) -> f64 {
        match self {
            Encoding::Unbounded | Encoding::Latent => 2.0 * x.atan(),
            Encoding::Bounded(c) => (PI / c) * x.clamp(-c, c),
        }
    }

    /// Derivative of [`Encoding::angle`]; zero where clamping is active.
    pub fn angle_grad(self, x: f64) -> f64 {
        match self {
            Encoding::Unbounded | Encoding::Latent => 2.0 / (1.0 + x * x),
            Encoding::Bounded(c) => {
                if x.abs() > c {
                    0.0
                } else {
                    PI / c
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingSpec(Vec<Encoding>);

impl EncodingSpec {
    pub fn new(kinds: Vec<Encoding>) -> Result<Self> {
        for k in &kinds {
            if let Encoding::Bounded(c) = k {
                if !(*c > 0.0 && c.is_finite()) {
                    return Err(Error::Config(format!("bound must be positive, got {c}")));
                }
            }
        }
        Ok(Self(kinds))
    }

    pub fn latent(dim: usize) -> Self {
        Self(vec![Encoding::Latent; dim])
    }

    pub fn kinds(&self) -> &[Encoding] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Maps raw inputs to rotation angles in `[-pi, pi]`.
pub fn normalize_input(raw: &[f64], spec: &EncodingSpec) -> Result<Vec<f64>> {
    if raw.len() != spec.len() {
        return Err(Error::Shape(format!(
            "input has {} entries, encoding expects {}",
            raw.len(),
            spec.len()
        )));
    }
    Ok(raw.iter().zip(spec.kinds()).map(|(&x, k)| k.angle(x)).collect())
}

/// State kept by [`vqc_forward`] for the matching [`vqc_backward`].
#[derive(Debug, Clone)]
pub struct VqcTrace {
    arch: VqcArchitecture,
    angles: Vec<f64>,
    circuit: Circuit,
    state: StateVector,
}

impl VqcTrace {
    pub fn state(&self) -> &StateVector {
        &self.state
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqcGrads {
    /// Same flat layout as [`VqcParams`].
    pub params: Vec<f64>,
    pub inputs: Vec<f64>,
}

fn build_circuit(params: &VqcParams, angles: &[f64]) -> Circuit {
    let arch = params.arch;
    let n = arch.n_qubits;
    let mut gates = Vec::with_capacity(arch.n_layers * (4 * n));
    // Slot layout: per layer, n RX slots then n RY slots then n RZ slots.
    let mut slot = 0;
    for l in 0..arch.n_layers {
        for (i, &a) in angles.iter().enumerate() {
            gates.push(Gate::rx(i, params.lambda(l, i) * a).with_param(slot));
            slot += 1;
        }
        if arch.entangling && n > 1 {
            for i in 0..n - 1 {
                gates.push(Gate::cnot(i, i + 1));
            }
            if n > 2 {
                gates.push(Gate::cnot(n - 1, 0));
            }
        }
        for i in 0..n {
            gates.push(Gate::ry(i, params.theta_ry(l, i)).with_param(slot));
            slot += 1;
        }
        for i in 0..n {
            gates.push(Gate::rz(i, params.theta_rz(l, i)).with_param(slot));
            slot += 1;
        }
    }
    Circuit::with_gates(n, gates).expect("ansatz gates are valid by construction")
}

/// Evaluates the circuit on already-normalized `angles`.
pub fn vqc_forward(params: &VqcParams, angles: &[f64]) -> Result<(Vec<f64>, VqcTrace)> {
    let arch = params.arch;
    if angles.len() != arch.n_qubits {
        return Err(Error::Shape(format!(
            "circuit takes {} angles, got {}",
            arch.n_qubits,
            angles.len()
        )));
    }
    let circuit = build_circuit(params, angles);
    let state = circuit.run();
    let outputs = (0..arch.out_dim)
        .map(|k| state.expectation_z(k))
        .collect::<Result<Vec<_>>>()?;
    Ok((
        outputs,
        VqcTrace {
            arch,
            angles: angles.to_vec(),
            circuit,
            state,
        },
    ))
}

/// Gradients of `sum_k upstream[k] * outputs[k]` with respect to every
/// parameter and every input angle.
pub fn vqc_backward(params: &VqcParams, trace: &VqcTrace, upstream: &[f64]) -> Result<VqcGrads> {
    let arch = params.arch;
    if trace.arch != arch {
        return Err(Error::Shape("trace was produced by a different circuit".into()));
    }
    if upstream.len() != arch.out_dim {
        return Err(Error::Shape(format!(
            "upstream gradient has {} entries, circuit outputs {}",
            upstream.len(),
            arch.out_dim
        )));
    }
    let n = arch.n_qubits;
    let mut grads = VqcGrads {
        params: vec![0.0; arch.param_count()],
        inputs: vec![0.0; n],
    };
    if upstream.iter().all(|&g| g == 0.0) {
        return Ok(grads);
    }
    let weights: Vec<(usize, f64)> = upstream.iter().copied().enumerate().collect();
    let slot_grads = trace.circuit.adjoint_gradient_from(&trace.state, &weights)?;
    let (lam_off, ry_off, rz_off) = params.offsets();
    for l in 0..arch.n_layers {
        let base = 3 * n * l;
        for i in 0..n {
            let g_rx = slot_grads[base + i];
            let pi = params.idx(l, i);
            if let Some(o) = lam_off {
                grads.params[o + pi] += g_rx * trace.angles[i];
            }
            grads.inputs[i] += g_rx * params.lambda(l, i);
            grads.params[ry_off + pi] += slot_grads[base + n + i];
            grads.params[rz_off + pi] += slot_grads[base + 2 * n + i];
        }
    }
    Ok(grads)
}

/// A circuit with its input encoding, usable wherever a classical layer is.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumLayer {
    encoding: EncodingSpec,
    params: VqcParams,
}

#[derive(Debug, Clone)]
pub struct QuantumTrace {
    input: Vec<f64>,
    vqc: VqcTrace,
}

impl QuantumLayer {
    pub fn new(encoding: EncodingSpec, params: VqcParams) -> Result<Self> {
        if encoding.len() != params.arch.n_qubits {
            return Err(Error::Shape(format!(
                "encoding covers {} inputs, circuit has {} qubits",
                encoding.len(),
                params.arch.n_qubits
            )));
        }
        Ok(Self { encoding, params })
    }

    pub fn arch(&self) -> &VqcArchitecture {
        &self.params.arch
    }

    pub fn encoding(&self) -> &EncodingSpec {
        &self.encoding
    }

    pub fn vqc_params(&self) -> &VqcParams {
        &self.params
    }

    pub fn vqc_params_mut(&mut self) -> &mut VqcParams {
        &mut self.params
    }
}

impl Layer for QuantumLayer {
    type Trace = QuantumTrace;

    fn in_dim(&self) -> usize {
        self.params.arch.n_qubits
    }

    fn out_dim(&self) -> usize {
        self.params.arch.out_dim
    }

    fn params(&self) -> &[f64] {
        self.params.as_slice()
    }

    fn params_mut(&mut self) -> &mut [f64] {
        self.params.as_mut_slice()
    }

    fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, QuantumTrace)> {
        let angles = normalize_input(x, &self.encoding)?;
        let (out, vqc) = vqc_forward(&self.params, &angles)?;
        Ok((
            out,
            QuantumTrace {
                input: x.to_vec(),
                vqc,
            },
        ))
    }

    fn backward(&self, trace: &QuantumTrace, grad_out: &[f64], grad_params: &mut [f64]) -> Result<Vec<f64>> {
        let g = vqc_backward(&self.params, &trace.vqc, grad_out)?;
        for (acc, v) in grad_params.iter_mut().zip(&g.params) {
            *acc += v;
        }
        Ok(g
            .inputs
            .iter()
            .zip(&trace.input)
            .zip(self.encoding.kinds())
            .map(|((gi, &x), k)| gi * k.angle_grad(x))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn arch(n: usize, l: usize) -> VqcArchitecture {
        VqcArchitecture::new(n, l, n).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let unb = EncodingSpec::new(vec![Encoding::Unbounded; 2]).unwrap();
        assert_eq!(normalize_input(&[0.0, 1.0], &unb).unwrap(), vec![0.0, FRAC_PI_2]);
        let b = EncodingSpec::new(vec![Encoding::Bounded(4.8)]).unwrap();
        assert!((normalize_input(&[2.4], &b).unwrap()[0] - FRAC_PI_2).abs() < 1e-15);
        // clamped outside the bound
        assert_eq!(normalize_input(&[10.0], &b).unwrap()[0], PI);
        assert!(normalize_input(&[1.0, 2.0], &b).is_err());
        assert!(EncodingSpec::new(vec![Encoding::Bounded(0.0)]).is_err());
    }

    #[test]
    fn param_counts() {
        assert_eq!(arch(4, 4).param_count(), 48);
        assert_eq!(arch(6, 2).param_count(), 36);
        assert_eq!(arch(4, 1).param_count(), 12);
        assert_eq!(param_count(&arch(6, 5)), 90);
        assert_eq!(arch(4, 1).with_learnable_scaling(false).param_count(), 8);
    }

    #[test]
    fn arch_validation() {
        assert!(VqcArchitecture::new(4, 0, 2).is_err());
        assert!(VqcArchitecture::new(4, 1, 5).is_err());
        assert!(VqcArchitecture::new(13, 1, 1).is_err());
    }

    #[test]
    fn zero_params_give_all_plus_one() {
        let a = arch(4, 3);
        let mut p = VqcParams::zeros(a);
        for l in 0..3 {
            for i in 0..4 {
                p.set_lambda(l, i, 0.0);
            }
        }
        let (out, _) = vqc_forward(&p, &[0.3, -2.0, 1.0, 3.0]).unwrap();
        assert_eq!(out, vec![1.0; 4]);
    }

    #[test]
    fn single_qubit_input_gradient() {
        let a = VqcArchitecture::new(1, 1, 1).unwrap();
        let mut p = VqcParams::zeros(a);
        p.set_lambda(0, 0, 1.0);
        let (out, tr) = vqc_forward(&p, &[FRAC_PI_2]).unwrap();
        assert!(out[0].abs() < 1e-15);
        let g = vqc_backward(&p, &tr, &[1.0]).unwrap();
        assert!((g.inputs[0] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_upstream_zero_grads() {
        let a = arch(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = VqcParams::init(a, &mut rng);
        let (_, tr) = vqc_forward(&p, &[0.1, 0.2, 0.3]).unwrap();
        let g = vqc_backward(&p, &tr, &[0.0; 3]).unwrap();
        assert!(g.params.iter().chain(&g.inputs).all(|&v| v == 0.0));
    }

    #[test]
    fn backward_rejects_foreign_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = VqcParams::init(arch(3, 2), &mut rng);
        let q = VqcParams::init(arch(3, 1), &mut rng);
        let (_, tr) = vqc_forward(&p, &[0.1, 0.2, 0.3]).unwrap();
        assert!(vqc_backward(&q, &tr, &[1.0; 3]).is_err());
        assert!(vqc_backward(&p, &tr, &[1.0; 2]).is_err());
    }

    #[test]
    fn init_sets_unit_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = VqcParams::init(arch(4, 2), &mut rng);
        for l in 0..2 {
            for i in 0..4 {
                assert_eq!(p.lambda(l, i), 1.0);
                assert!(p.theta_ry(l, i).abs() <= PI);
            }
        }
    }

    #[test]
    fn ring_topology_matches_drawing() {
        let p = VqcParams::zeros(arch(4, 1));
        let c = build_circuit(&p, &[0.0; 4]);
        let cnots: Vec<(usize, usize)> = c
            .gates()
            .iter()
            .filter(|g| g.kind == crate::qsim::GateKind::Cnot)
            .map(|g| (g.control.unwrap(), g.target))
            .collect();
        assert_eq!(cnots, vec![(0, 1), (1, 2), (2, 3), (3, 0)]);
    }
}
