//! A circuit option-value head reads out Pauli-Z expectations, so its values
//! live in [-1, 1] while CartPole returns grow into the tens. This run shows
//! how the policy entropy stays near its maximum under that head.
//!
//! ```bash
//! cargo run --release --example option_value_bottleneck
//! ```

use hybrid_oc::agent::{NetSpec, VariantSpec};
use hybrid_oc::envs::EnvKind;
use hybrid_oc::trainer::{TrainConfig, Trainer};

fn main() -> hybrid_oc::Result<()> {
    let steps = 15_000;
    for v in [VariantSpec::CLASSICAL, VariantSpec::HYBRID_O] {
        let cfg = TrainConfig { total_steps: steps, ..Default::default() };
        let mut trainer = Trainer::new(NetSpec::new(EnvKind::CartPole, v, 2), cfg, 1)?;
        let (mut entropy, mut n, mut qmax) = (0.0, 0, f64::NEG_INFINITY);
        let mut returns = Vec::new();
        trainer.run(|m, t| {
            if m.step > steps * 9 / 10 {
                entropy += m.entropy;
                n += 1;
                if let Some(r) = m.episode_return {
                    returns.push(r);
                }
            }
            if m.step == steps {
                let s = hybrid_oc::envs::reset_seeded(&mut EnvKind::CartPole.make(), 0);
                qmax = t.net().option_values(&s)?.into_iter().fold(qmax, f64::max);
            }
            Ok(())
        })?;
        let mean_return = returns.iter().sum::<f64>() / returns.len().max(1) as f64;
        println!(
            "{:<10} final entropy {:.3} (max {:.3})  max Q at a reset state {qmax:>7.2}  return {mean_return:.1}",
            v.name(),
            entropy / n as f64,
            2f64.ln()
        );
    }
    Ok(())
}
