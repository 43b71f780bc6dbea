//! Small reverse-mode layer library for the classical components.
//!
//! Every layer follows the same contract as the quantum layer: `forward`
//! returns the output plus a trace, and `backward` consumes the trace and an
//! upstream gradient, accumulates parameter gradients into a caller-owned
//! buffer and returns the gradient with respect to the layer input.

use rand::Rng;

use crate::error::{Error, Result};

pub trait Layer {
    type Trace;

    fn in_dim(&self) -> usize;
    fn out_dim(&self) -> usize;
    fn params(&self) -> &[f64];
    fn params_mut(&mut self) -> &mut [f64];

    fn n_params(&self) -> usize {
        self.params().len()
    }

    fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, Self::Trace)>;

    /// Accumulates `d(grad_out . y)/d params` into `grad_params` and returns
    /// `d(grad_out . y)/dx`.
    fn backward(&self, trace: &Self::Trace, grad_out: &[f64], grad_params: &mut [f64]) -> Result<Vec<f64>>;
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        Err(Error::Shape(format!("{what}: expected {want}, got {got}")))
    } else {
        Ok(())
    }
}

/// `y = W x + b`, parameters stored as `[W row-major | b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    in_dim: usize,
    out_dim: usize,
    params: Vec<f64>,
}

impl Linear {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            params: vec![0.0; in_dim * out_dim + out_dim],
        }
    }

    /// Weights uniform in `[-1/sqrt(in), 1/sqrt(in)]`, zero bias.
    pub fn init<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        let mut l = Self::zeros(in_dim, out_dim);
        let bound = 1.0 / (in_dim as f64).sqrt();
        for w in &mut l.params[..in_dim * out_dim] {
            *w = rng.gen_range(-bound..=bound);
        }
        l
    }

    pub fn from_parts(in_dim: usize, out_dim: usize, weights: &[f64], bias: &[f64]) -> Result<Self> {
        check_len("weights", weights.len(), in_dim * out_dim)?;
        check_len("bias", bias.len(), out_dim)?;
        let mut params = weights.to_vec();
        params.extend_from_slice(bias);
        Ok(Self {
            in_dim,
            out_dim,
            params,
        })
    }

    pub fn param_count(in_dim: usize, out_dim: usize) -> usize {
        in_dim * out_dim + out_dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.params[..self.in_dim * self.out_dim]
    }

    pub fn bias(&self) -> &[f64] {
        &self.params[self.in_dim * self.out_dim..]
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        affine(&self.params, self.in_dim, x)
    }

    fn apply_backward(&self, x: &[f64], grad_out: &[f64], grad_params: &mut [f64]) -> Vec<f64> {
        affine_backward(&self.params, self.in_dim, x, grad_out, grad_params)
    }
}

/// `W x + b` over a flat `[W row-major | b]` block.
fn affine(params: &[f64], in_dim: usize, x: &[f64]) -> Vec<f64> {
    let out_dim = params.len() / (in_dim + 1);
    let (w, b) = params.split_at(in_dim * out_dim);
    w.chunks_exact(in_dim)
        .zip(b)
        .map(|(row, bi)| row.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + bi)
        .collect()
}

fn affine_backward(
    params: &[f64],
    in_dim: usize,
    x: &[f64],
    grad_out: &[f64],
    grad_params: &mut [f64],
) -> Vec<f64> {
    let nw = in_dim * grad_out.len();
    let (gw, gb) = grad_params.split_at_mut(nw);
    let w = &params[..nw];
    let mut gx = vec![0.0; in_dim];
    for (o, &go) in grad_out.iter().enumerate() {
        if go == 0.0 {
            continue;
        }
        gb[o] += go;
        let row = o * in_dim;
        for i in 0..in_dim {
            gw[row + i] += go * x[i];
            gx[i] += go * w[row + i];
        }
    }
    gx
}

impl Layer for Linear {
    /// The layer input.
    type Trace = Vec<f64>;

    fn in_dim(&self) -> usize {
        self.in_dim
    }

    fn out_dim(&self) -> usize {
        self.out_dim
    }

    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        check_len("linear input", x.len(), self.in_dim)?;
        Ok((self.apply(x), x.to_vec()))
    }

    fn backward(&self, x: &Vec<f64>, grad_out: &[f64], grad_params: &mut [f64]) -> Result<Vec<f64>> {
        check_len("linear upstream gradient", grad_out.len(), self.out_dim)?;
        check_len("linear gradient buffer", grad_params.len(), self.params.len())?;
        Ok(self.apply_backward(x, grad_out, grad_params))
    }
}

/// Single-hidden-layer perceptron: `Linear -> ReLU -> Linear`, parameters
/// stored as `[hidden layer | output layer]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    in_dim: usize,
    hidden_dim: usize,
    out_dim: usize,
    params: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MlpTrace {
    input: Vec<f64>,
    pre_activation: Vec<f64>,
    hidden: Vec<f64>,
}

impl Mlp {
    pub fn init<R: Rng + ?Sized>(in_dim: usize, hidden_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        Self::from_layers(
            Linear::init(in_dim, hidden_dim, rng),
            Linear::init(hidden_dim, out_dim, rng),
        )
    }

    pub fn from_layers(hidden: Linear, output: Linear) -> Self {
        assert_eq!(hidden.out_dim, output.in_dim, "layer widths must chain");
        let mut params = hidden.params;
        params.extend_from_slice(&output.params);
        Self {
            in_dim: hidden.in_dim,
            hidden_dim: hidden.out_dim,
            out_dim: output.out_dim,
            params,
        }
    }

    pub fn param_count(in_dim: usize, hidden_dim: usize, out_dim: usize) -> usize {
        Linear::param_count(in_dim, hidden_dim) + Linear::param_count(hidden_dim, out_dim)
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    fn split(&self) -> usize {
        Linear::param_count(self.in_dim, self.hidden_dim)
    }
}

impl Layer for Mlp {
    type Trace = MlpTrace;

    fn in_dim(&self) -> usize {
        self.in_dim
    }

    fn out_dim(&self) -> usize {
        self.out_dim
    }

    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, MlpTrace)> {
        check_len("mlp input", x.len(), self.in_dim)?;
        let (hp, op) = self.params.split_at(self.split());
        let pre = affine(hp, self.in_dim, x);
        let hidden = relu(&pre);
        let y = affine(op, self.hidden_dim, &hidden);
        Ok((
            y,
            MlpTrace {
                input: x.to_vec(),
                pre_activation: pre,
                hidden,
            },
        ))
    }

    fn backward(&self, trace: &MlpTrace, grad_out: &[f64], grad_params: &mut [f64]) -> Result<Vec<f64>> {
        check_len("mlp upstream gradient", grad_out.len(), self.out_dim)?;
        check_len("mlp gradient buffer", grad_params.len(), self.params.len())?;
        let split = self.split();
        let (hp, op) = self.params.split_at(split);
        let (gh, go) = grad_params.split_at_mut(split);
        let g_hidden = affine_backward(op, self.hidden_dim, &trace.hidden, grad_out, go);
        let g_pre = relu_backward(&trace.pre_activation, &g_hidden);
        Ok(affine_backward(hp, self.in_dim, &trace.input, &g_pre, gh))
    }
}

pub fn relu(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| v.max(0.0)).collect()
}

/// Passes gradient only where the pre-activation is strictly positive.
pub fn relu_backward(pre: &[f64], grad: &[f64]) -> Vec<f64> {
    pre.iter()
        .zip(grad)
        .map(|(&p, &g)| if p > 0.0 { g } else { 0.0 })
        .collect()
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
    logits.iter().map(|&z| z - lse).collect()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Shannon entropy in nats; zero-probability entries contribute nothing.
pub fn entropy(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// Gradient of `entropy(softmax(z))` with respect to `z`:
/// `-p_i (ln p_i + H)`.
pub fn entropy_grad_logits(probs: &[f64]) -> Vec<f64> {
    let h = entropy(probs);
    probs
        .iter()
        .map(|&p| if p > 0.0 { -p * (p.ln() + h) } else { 0.0 })
        .collect()
}

/// Adam with bias correction, shared across an ordered list of parameter
/// segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// One update over `segments`, which must be presented in the same order
    /// and with the same sizes on every call.
    pub fn step<'a, I>(&mut self, segments: I) -> Result<()>
    where
        I: IntoIterator<Item = (&'a mut [f64], &'a [f64])>,
    {
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        let mut offset = 0;
        for (params, grads) in segments {
            check_len("adam gradient segment", grads.len(), params.len())?;
            let end = offset + params.len();
            if self.m.len() < end {
                if self.step > 1 && self.m.len() > offset {
                    return Err(Error::Shape("parameter layout changed between steps".into()));
                }
                self.m.resize(end, 0.0);
                self.v.resize(end, 0.0);
            }
            for (i, (p, &g)) in params.iter_mut().zip(grads).enumerate() {
                let m = &mut self.m[offset + i];
                let v = &mut self.v[offset + i];
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
            offset = end;
        }
        Ok(())
    }
}

pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut Adam) -> Result<()> {
    state.step([(params, grads)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mlp_param_counts() {
        assert_eq!(Mlp::param_count(4, 8, 4), 76);
        assert_eq!(2 * Mlp::param_count(6, 3, 3), 66);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(Mlp::init(4, 8, 4, &mut rng).n_params(), 76);
        assert_eq!(Linear::init(4, 2, &mut rng).n_params(), 10);
    }

    #[test]
    fn zero_layer_outputs_zero() {
        let l = Linear::zeros(3, 2);
        assert_eq!(l.forward(&[1.0, -4.0, 9.0]).unwrap().0, vec![0.0, 0.0]);
        let m = Mlp::from_layers(Linear::zeros(3, 5), Linear::zeros(5, 2));
        assert_eq!(m.forward(&[1.0, 2.0, 3.0]).unwrap().0, vec![0.0, 0.0]);
    }

    #[test]
    fn identity_linear_weight_grads_are_inputs() {
        let l = Linear::from_parts(2, 2, &[1.0, 0.0, 0.0, 1.0], &[0.0, 0.0]).unwrap();
        let x = [0.3, -1.7];
        let (y, tr) = l.forward(&x).unwrap();
        assert_eq!(y, x.to_vec());
        let mut g = vec![0.0; 6];
        let gx = l.backward(&tr, &[1.0, 1.0], &mut g).unwrap();
        assert_eq!(&g[..4], &[0.3, -1.7, 0.3, -1.7]);
        assert_eq!(&g[4..], &[1.0, 1.0]);
        assert_eq!(gx, vec![1.0, 1.0]);
    }

    #[test]
    fn relu_tie_break_at_zero() {
        assert_eq!(relu_backward(&[0.0, 1.0, -1.0], &[5.0, 5.0, 5.0]), vec![0.0, 5.0, 0.0]);
    }

    #[test]
    fn activations() {
        assert_eq!(softmax(&[0.0, 0.0]), vec![0.5, 0.5]);
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((entropy(&[0.5, 0.5]) - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(entropy(&[1.0, 0.0]), 0.0);
        let p = softmax(&[1000.0, 0.0, -1000.0]);
        assert!(p.iter().all(|v| v.is_finite()));
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }

    #[test]
    fn adam_first_step_magnitude() {
        let mut opt = Adam::new(0.0005);
        let mut p = vec![1.0, 1.0, 1.0];
        let g = vec![0.2, -3.0, 1e-3];
        adam_step(&mut p, &g, &mut opt).unwrap();
        for (pi, gi) in p.iter().zip(&g) {
            let expected = 1.0 - 0.0005 * gi / (gi.abs() + 1e-8);
            assert!((pi - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn adam_zero_grad() {
        let mut opt = Adam::new(0.0005);
        let mut p = vec![0.7, -0.2];
        adam_step(&mut p, &[0.0, 0.0], &mut opt).unwrap();
        assert_eq!(p, vec![0.7, -0.2]);
        assert_eq!(opt.steps_taken(), 1);
    }

    #[test]
    fn adam_constant_grad_steps_do_not_grow() {
        // With constant g: m_hat = g exactly, v_hat = g^2 exactly, so the step is
        // lr * |g| / (|g| + eps) on both steps; with beta1 < 1 and a shrinking
        // second moment the magnitude never increases.
        let mut opt = Adam::new(0.01);
        let mut p = vec![0.0];
        adam_step(&mut p, &[0.5], &mut opt).unwrap();
        let s1 = p[0].abs();
        let before = p[0];
        adam_step(&mut p, &[0.5], &mut opt).unwrap();
        let s2 = (p[0] - before).abs();
        assert!(s2 <= s1 + 1e-15);
    }
}
