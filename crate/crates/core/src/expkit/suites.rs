//! Built-in experiment matrices. Each suite varies one architectural choice
//! at a time; output directories are `<root>/<label>`.

use std::path::Path;

use super::config::{AgentKind, RunConfig};
use crate::agent::{ArchOverrides, VariantSpec};
use crate::envs::EnvKind;

fn at(root: &Path, cfg: RunConfig) -> RunConfig {
    let dir = root.join(cfg.label());
    cfg.with_out_dir(dir)
}

/// Classical, the eight hybrids and the random baseline.
pub fn main_suite(env: EnvKind, root: &Path) -> Vec<RunConfig> {
    let mut agents = vec![AgentKind::OptionCritic(VariantSpec::CLASSICAL)];
    agents.extend(VariantSpec::HYBRIDS.iter().map(|&v| AgentKind::OptionCritic(v)));
    agents.push(AgentKind::Random);
    agents.into_iter().map(|a| at(root, RunConfig::new(env, a))).collect()
}

/// Classical baseline with wider feature extractors.
pub fn width_suite(env: EnvKind, root: &Path) -> Vec<RunConfig> {
    [16, 24, 32]
        .into_iter()
        .map(|w| {
            let o = ArchOverrides {
                fe_width: w,
                ..Default::default()
            };
            at(root, RunConfig::new(env, AgentKind::OptionCritic(VariantSpec::CLASSICAL)).with_overrides(o))
        })
        .collect()
}

/// Three and four options for the classical model and Hybrid_P.
pub fn options_suite(env: EnvKind, root: &Path) -> Vec<RunConfig> {
    let mut out = Vec::new();
    for v in [VariantSpec::CLASSICAL, VariantSpec::HYBRID_P] {
        for n in [3, 4] {
            out.push(at(root, RunConfig::new(env, AgentKind::OptionCritic(v)).with_options(n)));
        }
    }
    out
}

/// Hybrid_F with two layers fewer or more, fixed input scaling, and no
/// entangling gates.
pub fn ablation_suite(env: EnvKind, root: &Path) -> Vec<RunConfig> {
    let d = ArchOverrides::default();
    [
        ArchOverrides { depth_delta: -2, ..d },
        ArchOverrides { depth_delta: 2, ..d },
        ArchOverrides { scaling: false, ..d },
        ArchOverrides { entangling: false, ..d },
    ]
    .into_iter()
    .map(|o| at(root, RunConfig::new(env, AgentKind::OptionCritic(VariantSpec::HYBRID_F)).with_overrides(o)))
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_labels() {
        let root = Path::new("r");
        let labels = |v: Vec<RunConfig>| v.iter().map(RunConfig::label).collect::<Vec<_>>();
        assert_eq!(
            labels(main_suite(EnvKind::CartPole, root)),
            [
                "classical",
                "hybrid_fotp",
                "hybrid_fo",
                "hybrid_ft",
                "hybrid_fp",
                "hybrid_f",
                "hybrid_o",
                "hybrid_t",
                "hybrid_p",
                "random"
            ]
        );
        assert_eq!(
            labels(width_suite(EnvKind::Acrobot, root)),
            ["classical_w16", "classical_w24", "classical_w32"]
        );
        assert_eq!(
            labels(options_suite(EnvKind::CartPole, root)),
            ["classical_o3", "classical_o4", "hybrid_p_o3", "hybrid_p_o4"]
        );
        assert_eq!(
            labels(ablation_suite(EnvKind::CartPole, root)),
            ["hybrid_f_depth-2", "hybrid_f_depth+2", "hybrid_f_fixed_lambda", "hybrid_f_no_cnot"]
        );
        for cfg in main_suite(EnvKind::Acrobot, root)
            .into_iter()
            .chain(width_suite(EnvKind::Acrobot, root))
            .chain(options_suite(EnvKind::Acrobot, root))
            .chain(ablation_suite(EnvKind::Acrobot, root))
        {
            cfg.validate().unwrap();
        }
    }
}
