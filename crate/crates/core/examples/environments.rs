//! CartPole and Acrobot under a uniform-random policy.
//!
//! ```bash
//! cargo run --example environments
//! ```

use hybrid_oc::envs::{reset_seeded, EnvKind};
use hybrid_oc::trainer::RandomAgent;

fn main() -> hybrid_oc::Result<()> {
    for kind in [EnvKind::CartPole, EnvKind::Acrobot] {
        let mut env = kind.make();
        let obs = reset_seeded(&mut env, 0);
        println!("{kind}: {} observations, {} actions, reset to {obs:.3?}", kind.obs_dim(), kind.n_actions());
        let step = env.step(kind.n_actions() - 1)?;
        println!("  one step: reward {} obs {:.4?}", step.reward, step.observation);

        let returns = RandomAgent::new(kind, 0).episodes(500)?;
        let mean = returns.iter().sum::<f64>() / returns.len() as f64;
        let best = returns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!("  random policy over 500 episodes: mean {mean:.2}, best {best}");
    }
    Ok(())
}
