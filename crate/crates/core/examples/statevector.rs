//! Build a small entangling circuit, read out Pauli-Z expectations and
//! compare adjoint gradients with the parameter-shift rule.
//!
//! ```bash
//! cargo run --example statevector
//! ```

use hybrid_oc::qsim::{grad_expectations, parameter_shift_gradients, Circuit, Gate, Observable};

fn main() -> hybrid_oc::Result<()> {
    let mut c = Circuit::new(3)?;
    c.push(Gate::ry(0, 0.7).with_param(0))?;
    c.push(Gate::rx(1, -1.1).with_param(1))?;
    c.push(Gate::cnot(0, 1))?;
    c.push(Gate::cnot(1, 2))?;
    c.push(Gate::rz(2, 0.4).with_param(2))?;
    c.push(Gate::ry(2, 0.9).with_param(3))?;

    let state = c.run();
    println!("norm^2 = {:.15}", state.norm_sqr());
    for (i, a) in state.amplitudes().iter().enumerate() {
        if a.norm_sqr() > 1e-12 {
            println!("|{i:03b}>  {:+.5} {:+.5}i", a.re, a.im);
        }
    }

    let obs: Vec<Observable> = (0..3).map(Observable::z).collect();
    let z = c.expectations(&obs)?;
    println!("<Z> = {z:.5?}");

    let adjoint = grad_expectations(&c, &obs)?;
    let shift = parameter_shift_gradients(&c, &obs)?;
    let mut worst = 0.0f64;
    for (a, s) in adjoint.iter().flatten().zip(shift.iter().flatten()) {
        worst = worst.max((a - s).abs());
    }
    println!("d<Z_2>/dtheta (adjoint) = {:.6?}", adjoint[2]);
    println!("max |adjoint - shift| = {worst:.2e}");
    Ok(())
}
