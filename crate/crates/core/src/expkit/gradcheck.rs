//! Finite-difference gradient suites behind the `gradcheck` command.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::diffnet::{Layer, Mlp};
use crate::error::Result;
use crate::qsim::{grad_expectations, parameter_shift_gradients, Circuit, Gate, Observable};
use crate::rng::{stream, Stream};
use crate::vqc::{vqc_backward, vqc_forward, EncodingSpec, QuantumLayer, VqcArchitecture, VqcParams};

pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub instances: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.max_error < self.tolerance
    }
}

/// Error of `analytic` against `numeric`, relative to the largest numeric
/// component (so near-zero entries do not blow up the ratio).
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let scale = numeric.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-8);
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs())
        .fold(0.0, f64::max)
        / scale
}

/// Central differences of a scalar function.
pub fn central_diff(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> Result<f64>) -> Result<Vec<f64>> {
    let mut x = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = x[i];
        x[i] = orig + h;
        let fp = f(&x)?;
        x[i] = orig - h;
        let fm = f(&x)?;
        x[i] = orig;
        g.push((fp - fm) / (2.0 * h));
    }
    Ok(g)
}

fn random_arch(rng: &mut ChaCha8Rng) -> Result<VqcArchitecture> {
    let n = rng.gen_range(1..=6);
    let l = rng.gen_range(1..=5);
    let out = rng.gen_range(1..=n);
    Ok(VqcArchitecture::new(n, l, out)?
        .with_entangling(rng.gen_bool(0.8))
        .with_learnable_scaling(rng.gen_bool(0.8)))
}

fn weighted(out: &[f64], w: &[f64]) -> f64 {
    out.iter().zip(w).map(|(a, b)| a * b).sum()
}

/// Adjoint VQC gradients (parameters and input angles) against central
/// differences on random circuits of up to 6 qubits and 5 layers.
pub fn vqc_vs_finite_difference(instances: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = stream(seed, Stream::ParamInit);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let arch = random_arch(&mut rng)?;
        let params = VqcParams::init(arch, &mut rng);
        let angles: Vec<f64> = (0..arch.n_qubits).map(|_| rng.gen_range(-PI..PI)).collect();
        let w: Vec<f64> = (0..arch.out_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (_, trace) = vqc_forward(&params, &angles)?;
        let g = vqc_backward(&params, &trace, &w)?;

        let fd_p = central_diff(params.as_slice(), FD_STEP, |p| {
            let pp = VqcParams::from_flat(arch, p.to_vec())?;
            Ok(weighted(&vqc_forward(&pp, &angles)?.0, &w))
        })?;
        let fd_x = central_diff(&angles, FD_STEP, |a| Ok(weighted(&vqc_forward(&params, a)?.0, &w)))?;
        worst = worst
            .max(relative_error(&g.params, &fd_p))
            .max(relative_error(&g.inputs, &fd_x));
    }
    Ok(CheckReport {
        name: "vqc adjoint vs finite differences",
        instances,
        max_error: worst,
        tolerance: 1e-4,
    })
}

/// Random gate sequences: adjoint Jacobian against the parameter-shift rule,
/// maximum absolute difference.
pub fn adjoint_vs_parameter_shift(instances: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = stream(seed, Stream::ParamInit);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let n = rng.gen_range(1..=6);
        let n_gates = rng.gen_range(1..=40);
        let mut c = Circuit::new(n)?;
        let mut slot = 0;
        for _ in 0..n_gates {
            let q = rng.gen_range(0..n);
            let theta = rng.gen_range(-PI..PI);
            let g = match rng.gen_range(0..4) {
                0 => Gate::rx(q, theta),
                1 => Gate::ry(q, theta),
                2 => Gate::rz(q, theta),
                _ if n > 1 => {
                    let t = (q + rng.gen_range(1..n)) % n;
                    c.push(Gate::cnot(q, t))?;
                    continue;
                }
                _ => Gate::rx(q, theta),
            };
            c.push(g.with_param(slot))?;
            slot += 1;
        }
        let obs: Vec<Observable> = (0..n).map(Observable::z).collect();
        let a = grad_expectations(&c, &obs)?;
        let s = parameter_shift_gradients(&c, &obs)?;
        for (ra, rs) in a.iter().zip(&s) {
            for (x, y) in ra.iter().zip(rs) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    Ok(CheckReport {
        name: "adjoint vs parameter shift",
        instances,
        max_error: worst,
        tolerance: 1e-10,
    })
}

/// Classical feature extractor, arctan encoding, quantum head and a weighted
/// readout loss, differentiated end to end against central differences.
pub fn composed_vs_finite_difference(instances: usize, seed: u64) -> Result<CheckReport> {
    let mut rng = stream(seed, Stream::ParamInit);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let d = rng.gen_range(2..=6);
        let hidden = rng.gen_range(2..=8);
        let mlp = Mlp::init(d, hidden, d, &mut rng);
        let arch = VqcArchitecture::new(d, rng.gen_range(1..=3), rng.gen_range(1..=d))?;
        let head = QuantumLayer::new(EncodingSpec::latent(d), VqcParams::init(arch, &mut rng))?;
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let w: Vec<f64> = (0..arch.out_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let n_fe = mlp.n_params();
        let loss = |p: &[f64]| -> Result<f64> {
            let mut m = mlp.clone();
            let mut q = head.clone();
            m.params_mut().copy_from_slice(&p[..n_fe]);
            q.params_mut().copy_from_slice(&p[n_fe..]);
            let (h, _) = m.forward(&x)?;
            Ok(weighted(&q.forward(&h)?.0, &w))
        };

        let (h, t_fe) = mlp.forward(&x)?;
        let (_, t_q) = head.forward(&h)?;
        let mut g_q = vec![0.0; head.n_params()];
        let dh = head.backward(&t_q, &w, &mut g_q)?;
        let mut g_fe = vec![0.0; n_fe];
        mlp.backward(&t_fe, &dh, &mut g_fe)?;
        let analytic: Vec<f64> = g_fe.into_iter().chain(g_q).collect();

        let flat: Vec<f64> = mlp.params().iter().chain(head.params()).copied().collect();
        let numeric = central_diff(&flat, FD_STEP, loss)?;
        worst = worst.max(relative_error(&analytic, &numeric));
    }
    Ok(CheckReport {
        name: "composed model vs finite differences",
        instances,
        max_error: worst,
        tolerance: 1e-4,
    })
}

/// All three suites at their standard sizes.
pub fn run_all(seed: u64) -> Result<Vec<CheckReport>> {
    Ok(vec![
        vqc_vs_finite_difference(100, seed)?,
        adjoint_vs_parameter_shift(100, seed)?,
        composed_vs_finite_difference(20, seed)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        assert!(vqc_vs_finite_difference(5, 1).unwrap().passed());
        assert!(adjoint_vs_parameter_shift(5, 1).unwrap().passed());
        assert!(composed_vs_finite_difference(3, 1).unwrap().passed());
    }
}
