//! Train one option-critic agent on CartPole and print progress.
//!
//! ```bash
//! cargo run --release --example train_cartpole -- hybrid_f 20000
//! ```

use hybrid_oc::agent::{NetSpec, VariantSpec};
use hybrid_oc::envs::EnvKind;
use hybrid_oc::trainer::{TrainConfig, Trainer};

fn main() -> hybrid_oc::Result<()> {
    let mut args = std::env::args().skip(1);
    let variant = match args.next().as_deref() {
        None | Some("classical") => VariantSpec::CLASSICAL,
        Some(name) => VariantSpec::HYBRIDS
            .into_iter()
            .find(|v| v.name() == name)
            .ok_or_else(|| hybrid_oc::Error::Config(format!("unknown variant {name}")))?,
    };
    let steps = args.next().and_then(|s| s.parse().ok()).unwrap_or(20_000);

    let cfg = TrainConfig { total_steps: steps, ..Default::default() };
    let mut trainer = Trainer::new(NetSpec::new(EnvKind::CartPole, variant, 2), cfg, 0)?;
    println!("{} with {} parameters, {steps} steps", variant.name(), trainer.net().n_params());

    let mut window = Vec::new();
    trainer.run(|m, t| {
        if let Some(r) = m.episode_return {
            window.push(r);
        }
        if m.step % 2000 == 0 && !window.is_empty() {
            let mean = window.iter().sum::<f64>() / window.len() as f64;
            println!(
                "step {:>6}  eps {:.3}  episodes {:>4}  mean return {mean:>7.2}  option {}",
                m.step,
                m.epsilon,
                window.len(),
                t.active_option()
            );
            window.clear();
        }
        Ok(())
    })
}
