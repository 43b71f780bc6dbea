//! Exact statevector simulation of small rotation/CNOT circuits.
//!
//! Qubit 0 is the most significant bit of the basis index, so on two qubits
//! the amplitude order is `|00>, |01>, |10>, |11>` with the left bit being
//! qubit 0.
//!
//! Gradients of Pauli-Z expectation values are computed by adjoint
//! differentiation: one forward pass, then a reverse sweep that un-applies
//! each gate to both the state and the observable-weighted co-state. The
//! parameter-shift rule is also provided and is used as an independent check.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `n_qubits` qubits.
    pub fn ground(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::QubitCount(n_qubits));
        }
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps a caller-supplied amplitude vector. The length must be a power of
    /// two and the vector must be normalized.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Shape(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        if n_qubits > MAX_QUBITS {
            return Err(Error::QubitCount(n_qubits));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Shape(format!("state is not normalized (|psi|^2 = {norm})")));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_qubit(&self, index: usize) -> Result<()> {
        if index >= self.n_qubits {
            Err(Error::QubitIndex {
                index,
                n_qubits: self.n_qubits,
            })
        } else {
            Ok(())
        }
    }

    #[inline]
    fn stride(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate()?;
        self.check_qubit(gate.target)?;
        if let Some(c) = gate.control {
            self.check_qubit(c)?;
        }
        self.apply_unchecked(gate);
        Ok(())
    }

    fn apply_unchecked(&mut self, gate: &Gate) {
        match gate.kind {
            GateKind::Cnot => {
                let cmask = self.stride(gate.control.expect("validated"));
                let tmask = self.stride(gate.target);
                for i in 0..self.amplitudes.len() {
                    if i & cmask != 0 && i & tmask == 0 {
                        self.amplitudes.swap(i, i | tmask);
                    }
                }
            }
            kind => {
                let m = rotation_matrix(kind, gate.angle);
                self.apply_single(gate.target, m);
            }
        }
    }

    fn apply_single(&mut self, qubit: usize, m: [[Complex64; 2]; 2]) {
        let stride = self.stride(qubit);
        let len = self.amplitudes.len();
        let mut base = 0;
        while base < len {
            for i in base..base + stride {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i + stride];
                self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[i + stride] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += 2 * stride;
        }
    }

    /// Multiplies in place by the Pauli generator of a rotation gate.
    fn apply_generator(&mut self, kind: GateKind, qubit: usize) {
        let stride = self.stride(qubit);
        let len = self.amplitudes.len();
        let i_unit = Complex64::new(0.0, 1.0);
        let mut base = 0;
        while base < len {
            for i in base..base + stride {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i + stride];
                let (b0, b1) = match kind {
                    GateKind::Rx => (a1, a0),
                    GateKind::Ry => (-i_unit * a1, i_unit * a0),
                    GateKind::Rz => (a0, -a1),
                    GateKind::Cnot => unreachable!("CNOT has no generator"),
                };
                self.amplitudes[i] = b0;
                self.amplitudes[i + stride] = b1;
            }
            base += 2 * stride;
        }
    }

    /// `<Z_qubit>`, computed exactly from the amplitudes.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        Ok(self.expectation_z_unchecked(qubit))
    }

    fn expectation_z_unchecked(&self, qubit: usize) -> f64 {
        let mask = self.stride(qubit);
        let (mut plus, mut minus) = (0.0, 0.0);
        for (i, a) in self.amplitudes.iter().enumerate() {
            if i & mask == 0 {
                plus += a.norm_sqr();
            } else {
                minus += a.norm_sqr();
            }
        }
        // A ratio of non-negative sums keeps the result inside [-1, 1] even
        // when accumulated rounding leaves the norm slightly off one.
        let total = plus + minus;
        if total == 0.0 {
            0.0
        } else {
            (plus - minus) / total
        }
    }

    /// Multiplies by the diagonal operator `sum_k w_k Z_{q_k}`.
    fn weighted_z(&self, weights: &[(usize, f64)]) -> StateVector {
        let mut out = self.clone();
        for (i, a) in out.amplitudes.iter_mut().enumerate() {
            let mut d = 0.0;
            for &(q, w) in weights {
                if i & self.stride(q) == 0 {
                    d += w;
                } else {
                    d -= w;
                }
            }
            *a *= d;
        }
        out
    }

    fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Pure form of [`StateVector::ground`].
pub fn init_ground(n_qubits: usize) -> Result<StateVector> {
    StateVector::ground(n_qubits)
}

/// Pure form of [`StateVector::apply`]: returns the transformed state.
pub fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}

pub fn expectation_z(state: &StateVector, qubit: usize) -> Result<f64> {
    state.expectation_z(qubit)
}

fn rotation_matrix(kind: GateKind, angle: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = (angle / 2.0).sin_cos();
    let re = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);
    match kind {
        GateKind::Rx => [[re(c), im(-s)], [im(-s), re(c)]],
        GateKind::Ry => [[re(c), re(-s)], [re(s), re(c)]],
        GateKind::Rz => [[Complex64::new(c, -s), ZERO], [ZERO, Complex64::new(c, s)]],
        GateKind::Cnot => unreachable!("CNOT is not a rotation"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    Cnot,
}

impl GateKind {
    pub fn is_rotation(self) -> bool {
        !matches!(self, GateKind::Cnot)
    }
}

/// One gate of a circuit. Rotations are `exp(-i angle sigma / 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub control: Option<usize>,
    pub angle: f64,
    pub param_id: Option<usize>,
}

impl Gate {
    fn rotation(kind: GateKind, target: usize, angle: f64) -> Self {
        Self {
            kind,
            target,
            control: None,
            angle,
            param_id: None,
        }
    }

    pub fn rx(target: usize, angle: f64) -> Self {
        Self::rotation(GateKind::Rx, target, angle)
    }

    pub fn ry(target: usize, angle: f64) -> Self {
        Self::rotation(GateKind::Ry, target, angle)
    }

    pub fn rz(target: usize, angle: f64) -> Self {
        Self::rotation(GateKind::Rz, target, angle)
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Self {
            kind: GateKind::Cnot,
            target,
            control: Some(control),
            angle: 0.0,
            param_id: None,
        }
    }

    /// Marks the gate angle as trainable parameter `id`.
    pub fn with_param(mut self, id: usize) -> Self {
        self.param_id = Some(id);
        self
    }

    /// The inverse gate: negated angle, or the gate itself for CNOT.
    pub fn inverse(&self) -> Self {
        let mut g = *self;
        if self.kind.is_rotation() {
            g.angle = -self.angle;
        }
        g
    }

    fn validate(&self) -> Result<()> {
        match self.kind {
            GateKind::Cnot => {
                let c = self
                    .control
                    .ok_or_else(|| Error::InvalidGate("CNOT without control".into()))?;
                if c == self.target {
                    return Err(Error::InvalidGate(format!(
                        "CNOT control equals target ({c})"
                    )));
                }
                if self.param_id.is_some() {
                    return Err(Error::InvalidGate("CNOT cannot carry a parameter".into()));
                }
            }
            _ => {
                if self.control.is_some() {
                    return Err(Error::InvalidGate("rotation with a control qubit".into()));
                }
                if !self.angle.is_finite() {
                    return Err(Error::InvalidGate(format!("non-finite angle {}", self.angle)));
                }
            }
        }
        Ok(())
    }
}

/// Pauli-Z on a single qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observable {
    pub qubit: usize,
}

impl Observable {
    pub fn z(qubit: usize) -> Self {
        Self { qubit }
    }
}

/// An ordered gate list acting on `|0...0>`.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::QubitCount(n_qubits));
        }
        Ok(Self {
            n_qubits,
            gates: Vec::new(),
        })
    }

    pub fn with_gates(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(n_qubits)?;
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate()?;
        for q in std::iter::once(gate.target).chain(gate.control) {
            if q >= self.n_qubits {
                return Err(Error::QubitIndex {
                    index: q,
                    n_qubits: self.n_qubits,
                });
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gates_mut(&mut self) -> &mut [Gate] {
        &mut self.gates
    }

    /// Number of distinct trainable parameter slots (`max param_id + 1`).
    pub fn n_params(&self) -> usize {
        self.gates
            .iter()
            .filter_map(|g| g.param_id)
            .max()
            .map_or(0, |m| m + 1)
    }

    /// Runs the circuit on the ground state.
    pub fn run(&self) -> StateVector {
        let mut state = StateVector::ground(self.n_qubits).expect("qubit count checked in new");
        for g in &self.gates {
            state.apply_unchecked(g);
        }
        state
    }

    pub fn expectations(&self, observables: &[Observable]) -> Result<Vec<f64>> {
        let state = self.run();
        observables
            .iter()
            .map(|o| state.expectation_z(o.qubit))
            .collect()
    }

    fn check_params(&self) -> Result<()> {
        for g in &self.gates {
            if g.param_id.is_some() && !g.kind.is_rotation() {
                return Err(Error::InvalidGate(
                    "non-rotation gate carries a parameter".into(),
                ));
            }
        }
        Ok(())
    }

    fn check_observables(&self, observables: &[Observable]) -> Result<()> {
        for o in observables {
            if o.qubit >= self.n_qubits {
                return Err(Error::QubitIndex {
                    index: o.qubit,
                    n_qubits: self.n_qubits,
                });
            }
        }
        Ok(())
    }

    /// Gradient of `<psi| sum_k w_k Z_{q_k} |psi>` with respect to every
    /// parameter slot, by a single adjoint sweep starting from `final_state`
    /// (which must be the output of [`Circuit::run`]).
    pub fn adjoint_gradient_from(
        &self,
        final_state: &StateVector,
        weights: &[(usize, f64)],
    ) -> Result<Vec<f64>> {
        self.check_params()?;
        for &(q, _) in weights {
            self.check_observables(&[Observable::z(q)])?;
        }
        let mut grads = vec![0.0; self.n_params()];
        if grads.is_empty() || weights.iter().all(|&(_, w)| w == 0.0) {
            return Ok(grads);
        }
        let mut phi = final_state.clone();
        let mut lambda = final_state.weighted_z(weights);
        let mut scratch = phi.clone();
        for gate in self.gates.iter().rev() {
            if let Some(id) = gate.param_id {
                // d/dtheta <psi|M|psi> = Im <lambda| sigma |phi>
                scratch.amplitudes.copy_from_slice(&phi.amplitudes);
                scratch.apply_generator(gate.kind, gate.target);
                grads[id] += lambda.inner(&scratch).im;
            }
            let inv = gate.inverse();
            phi.apply_unchecked(&inv);
            lambda.apply_unchecked(&inv);
        }
        Ok(grads)
    }

    pub fn adjoint_gradient(&self, weights: &[(usize, f64)]) -> Result<Vec<f64>> {
        let state = self.run();
        self.adjoint_gradient_from(&state, weights)
    }
}

/// Jacobian `d<O_k>/d theta_j` by adjoint differentiation; row `k` belongs to
/// `observables[k]`, column `j` to parameter slot `j`.
pub fn grad_expectations(circuit: &Circuit, observables: &[Observable]) -> Result<Vec<Vec<f64>>> {
    circuit.check_params()?;
    circuit.check_observables(observables)?;
    let state = circuit.run();
    observables
        .iter()
        .map(|o| circuit.adjoint_gradient_from(&state, &[(o.qubit, 1.0)]))
        .collect()
}

/// Same Jacobian as [`grad_expectations`] via the two-term parameter-shift
/// rule, `(f(theta + pi/2) - f(theta - pi/2)) / 2`, applied per gate and
/// summed over gates sharing a parameter slot.
pub fn parameter_shift_gradients(
    circuit: &Circuit,
    observables: &[Observable],
) -> Result<Vec<Vec<f64>>> {
    circuit.check_params()?;
    circuit.check_observables(observables)?;
    let n_params = circuit.n_params();
    let mut jac = vec![vec![0.0; n_params]; observables.len()];
    let shift = std::f64::consts::FRAC_PI_2;
    for (gi, gate) in circuit.gates.iter().enumerate() {
        let Some(id) = gate.param_id else { continue };
        let mut shifted = circuit.clone();
        shifted.gates[gi].angle = gate.angle + shift;
        let plus = shifted.expectations(observables)?;
        shifted.gates[gi].angle = gate.angle - shift;
        let minus = shifted.expectations(observables)?;
        for k in 0..observables.len() {
            jac[k][id] += 0.5 * (plus[k] - minus[k]);
        }
    }
    Ok(jac)
}
