//! The re-uploading circuit as a trainable layer: a few Adam steps pull the
//! two measured qubits towards a target readout.
//!
//! ```bash
//! cargo run --example vqc_layer
//! ```

use hybrid_oc::diffnet::{Adam, Layer};
use hybrid_oc::rng::{stream, Stream};
use hybrid_oc::vqc::{Encoding, EncodingSpec, QuantumLayer, VqcArchitecture, VqcParams};

fn main() -> hybrid_oc::Result<()> {
    let arch = VqcArchitecture::new(4, 2, 2)?;
    println!("4 qubits x 2 layers: {} parameters", arch.param_count());
    let params = VqcParams::init(arch, &mut stream(0, Stream::ParamInit));
    let enc = EncodingSpec::new(vec![
        Encoding::Bounded(2.4),
        Encoding::Unbounded,
        Encoding::Bounded(0.21),
        Encoding::Unbounded,
    ])?;
    let mut layer = QuantumLayer::new(enc, params)?;

    let x = [0.3, -1.2, 0.05, 0.8];
    let target = [0.5, -0.5];
    let mut opt = Adam::new(0.05);
    for epoch in 0..=100 {
        let (y, trace) = layer.forward(&x)?;
        let diff: Vec<f64> = y.iter().zip(target).map(|(a, b)| a - b).collect();
        let loss: f64 = diff.iter().map(|d| d * d).sum::<f64>() / 2.0;
        if epoch % 20 == 0 {
            println!("epoch {epoch:3}  loss {loss:.6}  y = {y:.4?}");
        }
        let mut grad = vec![0.0; layer.n_params()];
        layer.backward(&trace, &diff, &mut grad)?;
        opt.step([(layer.params_mut(), grad.as_slice())])?;
    }
    Ok(())
}
