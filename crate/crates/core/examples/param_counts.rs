//! Trainable parameter counts per component for every variant, plus the
//! widened classical baselines.
//!
//! ```bash
//! cargo run --example param_counts
//! ```

use hybrid_oc::agent::{ArchOverrides, NetSpec, OptionCriticNet, VariantSpec};
use hybrid_oc::envs::EnvKind;
use hybrid_oc::rng::{stream, Stream};

fn build(spec: NetSpec) -> hybrid_oc::Result<OptionCriticNet> {
    OptionCriticNet::build(spec, &mut stream(0, Stream::ParamInit))
}

fn main() -> hybrid_oc::Result<()> {
    for env in [EnvKind::CartPole, EnvKind::Acrobot] {
        println!("{env}");
        println!("  {:<14} {:>8} {:>8} {:>8} {:>8} {:>8}", "variant", "feature", "q", "beta", "pi", "total");
        let variants = std::iter::once(VariantSpec::CLASSICAL).chain(VariantSpec::HYBRIDS);
        for v in variants {
            let c = build(NetSpec::new(env, v, 2))?.counts();
            let (f, q, b, p) = c.as_tuple();
            println!("  {:<14} {f:>8} {q:>8} {b:>8} {p:>8} {:>8}", v.name(), c.total());
        }
        for width in [16, 24, 32] {
            let o = ArchOverrides { fe_width: width, ..Default::default() };
            let n = build(NetSpec::new(env, VariantSpec::CLASSICAL, 2).with_overrides(o))?;
            println!("  classical, width {width}: {}", n.n_params());
        }
    }
    Ok(())
}
