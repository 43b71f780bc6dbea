//! Run the architecture ablations of the quantum feature extractor at a
//! small budget, then write a summary table and a plot.
//!
//! ```bash
//! cargo run --release --example ablation_suite -- /tmp/ablations
//! ```

use std::path::PathBuf;

use hybrid_oc::envs::EnvKind;
use hybrid_oc::expkit::render::render_svg;
use hybrid_oc::expkit::suites::ablation_suite;
use hybrid_oc::expkit::{run_experiment, summarize_dir, AgentKind, RunConfig};
use hybrid_oc::agent::VariantSpec;

fn main() -> hybrid_oc::Result<()> {
    let root = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("hoc_ablations"));
    let steps = 8_000;
    let mut configs = vec![RunConfig::new(EnvKind::CartPole, AgentKind::OptionCritic(VariantSpec::CLASSICAL))
        .with_out_dir(root.join("classical"))];
    configs.push(
        RunConfig::new(EnvKind::CartPole, AgentKind::OptionCritic(VariantSpec::HYBRID_F)).with_out_dir(root.join("hybrid_f")),
    );
    configs.extend(ablation_suite(EnvKind::CartPole, &root));

    let mut curves = Vec::new();
    for cfg in configs {
        let cfg = cfg.with_seeds(0..2).with_steps(steps);
        println!("running {}", cfg.label());
        curves.push(run_experiment(&cfg)?.aggregate);
    }
    for row in summarize_dir(&root)? {
        println!("{:<28} mean {:>7.2} sd {:>7.2} relative {:.2}", row.label, row.mean, row.sd, row.relative);
    }
    let svg = root.join("ablations.svg");
    std::fs::write(&svg, render_svg(&curves, "CartPole ablations")?)?;
    println!("plot written to {}", svg.display());
    Ok(())
}
