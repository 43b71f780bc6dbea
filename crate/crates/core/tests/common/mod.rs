//! Reference implementations used as test oracles. They are written
//! independently of the library: dense matrices for the simulator, textbook
//! formulas for the environments, central differences for gradients.
#![allow(dead_code)]

use num_complex::Complex64 as C;
use std::f64::consts::PI;

pub type Mat = Vec<Vec<C>>;

pub fn identity(n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) }).collect())
        .collect()
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (n, m) = (a.len(), b.len());
    let mut out = vec![vec![C::new(0.0, 0.0); n * m]; n * m];
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn rx(t: f64) -> Mat {
    let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
    vec![vec![C::new(c, 0.0), C::new(0.0, -s)], vec![C::new(0.0, -s), C::new(c, 0.0)]]
}

pub fn ry(t: f64) -> Mat {
    let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
    vec![vec![C::new(c, 0.0), C::new(-s, 0.0)], vec![C::new(s, 0.0), C::new(c, 0.0)]]
}

pub fn rz(t: f64) -> Mat {
    vec![
        vec![C::from_polar(1.0, -t / 2.0), C::new(0.0, 0.0)],
        vec![C::new(0.0, 0.0), C::from_polar(1.0, t / 2.0)],
    ]
}

/// Single-qubit `u` on `target` of an `n`-qubit register, qubit 0 leftmost.
pub fn embed(u: &Mat, target: usize, n: usize) -> Mat {
    let id = identity(2);
    let mut m = vec![vec![C::new(1.0, 0.0)]];
    for q in 0..n {
        m = kron(&m, if q == target { u } else { &id });
    }
    m
}

/// CNOT as a permutation matrix, qubit 0 being the most significant bit.
pub fn cnot(control: usize, target: usize, n: usize) -> Mat {
    let dim = 1 << n;
    let mut m = vec![vec![C::new(0.0, 0.0); dim]; dim];
    for i in 0..dim {
        let cbit = (i >> (n - 1 - control)) & 1;
        let j = if cbit == 1 { i ^ (1 << (n - 1 - target)) } else { i };
        m[j][i] = C::new(1.0, 0.0);
    }
    m
}

pub fn matvec(m: &Mat, v: &[C]) -> Vec<C> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

pub fn z_expectation(v: &[C], qubit: usize, n: usize) -> f64 {
    v.iter()
        .enumerate()
        .map(|(i, a)| {
            let sign = if (i >> (n - 1 - qubit)) & 1 == 0 { 1.0 } else { -1.0 };
            sign * a.norm_sqr()
        })
        .sum()
}

/// Central differences of a scalar function at `x`.
pub fn central_diff(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut x = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = x[i];
            x[i] = orig + h;
            let fp = f(&x);
            x[i] = orig - h;
            let fm = f(&x);
            x[i] = orig;
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Largest absolute deviation divided by the largest reference magnitude.
pub fn rel_err(got: &[f64], want: &[f64]) -> f64 {
    assert_eq!(got.len(), want.len());
    let scale = want.iter().fold(1e-8f64, |m, v| m.max(v.abs()));
    got.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale
}

/// Cart-pole with Euler integration, written from the textbook equations of
/// motion (Barto, Sutton and Anderson) with the usual constants.
pub fn cartpole_ref(s: [f64; 4], action: usize) -> ([f64; 4], bool) {
    let (g, mc, mp, l, fmag, tau) = (9.8, 1.0, 0.1, 0.5, 10.0, 0.02);
    let [x, xd, th, thd] = s;
    let f = if action == 1 { fmag } else { -fmag };
    let total = mc + mp;
    let temp = (f + mp * l * thd * thd * th.sin()) / total;
    let thacc = (g * th.sin() - th.cos() * temp) / (l * (4.0 / 3.0 - mp * th.cos().powi(2) / total));
    let xacc = temp - mp * l * thacc * th.cos() / total;
    let next = [x + tau * xd, xd + tau * xacc, th + tau * thd, thd + tau * thacc];
    let done = next[0].abs() > 2.4 || next[2].abs() > 12.0 * 2.0 * PI / 360.0;
    (next, done)
}

fn acrobot_dsdt(s: &[f64; 5]) -> [f64; 5] {
    let (m1, m2, l1, lc1, lc2, i1, i2, g): (f64, f64, f64, f64, f64, f64, f64, f64) = (1.0, 1.0, 1.0, 0.5, 0.5, 1.0, 1.0, 9.8);
    let a = s[4];
    let (t1, t2, dt1, dt2) = (s[0], s[1], s[2], s[3]);
    let d1 = m1 * lc1.powi(2) + m2 * (l1.powi(2) + lc2.powi(2) + 2.0 * l1 * lc2 * t2.cos()) + i1 + i2;
    let d2 = m2 * (lc2.powi(2) + l1 * lc2 * t2.cos()) + i2;
    let phi2 = m2 * lc2 * g * (t1 + t2 - PI / 2.0).cos();
    let phi1 = -m2 * l1 * lc2 * dt2.powi(2) * t2.sin() - 2.0 * m2 * l1 * lc2 * dt2 * dt1 * t2.sin()
        + (m1 * lc1 + m2 * l1) * g * (t1 - PI / 2.0).cos()
        + phi2;
    let ddt2 = (a + d2 / d1 * phi1 - m2 * l1 * lc2 * dt1.powi(2) * t2.sin() - phi2)
        / (m2 * lc2.powi(2) + i2 - d2.powi(2) / d1);
    let ddt1 = -(d2 * ddt2 + phi1) / d1;
    [dt1, dt2, ddt1, ddt2, 0.0]
}

fn wrap_ref(x: f64) -> f64 {
    let mut x = x;
    let diff = 2.0 * PI;
    while x > PI {
        x -= diff;
    }
    while x < -PI {
        x += diff;
    }
    x
}

/// Acrobot as in the classic-control reference: the torque is appended to
/// the state, integrated with fourth-order Runge-Kutta over one 0.2 s step,
/// then angles are wrapped and velocities clipped.
pub fn acrobot_ref(s: [f64; 4], action: usize) -> ([f64; 4], bool) {
    let torque = [-1.0, 0.0, 1.0][action];
    let y0 = [s[0], s[1], s[2], s[3], torque];
    let dt = 0.2;
    let step = |y: &[f64; 5], k: &[f64; 5], h: f64| -> [f64; 5] { std::array::from_fn(|i| y[i] + h * k[i]) };
    let k1 = acrobot_dsdt(&y0);
    let k2 = acrobot_dsdt(&step(&y0, &k1, dt / 2.0));
    let k3 = acrobot_dsdt(&step(&y0, &k2, dt / 2.0));
    let k4 = acrobot_dsdt(&step(&y0, &k3, dt));
    let y: [f64; 5] = std::array::from_fn(|i| y0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    let next = [
        wrap_ref(y[0]),
        wrap_ref(y[1]),
        y[2].clamp(-4.0 * PI, 4.0 * PI),
        y[3].clamp(-9.0 * PI, 9.0 * PI),
    ];
    let done = -next[0].cos() - (next[1] + next[0]).cos() > 1.0;
    (next, done)
}
