use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use hybrid_oc::agent::ArchOverrides;
use hybrid_oc::envs::EnvKind;
use hybrid_oc::expkit::{self, aggregate, gradcheck, render, AgentKind, RunConfig};

#[derive(Parser)]
#[command(name = "hoc", about = "Hybrid quantum-classical option-critic experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train one variant over several seeds.
    Train {
        #[arg(long)]
        env: EnvKind,
        #[arg(long)]
        variant: AgentKind,
        #[arg(long, default_value_t = 2)]
        options: usize,
        /// Number of seeds; seeds 0..K are used.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long, default_value_t = 100_000)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        fe_width: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        depth_delta: Option<i32>,
        #[arg(long)]
        no_scaling: bool,
        #[arg(long)]
        no_entangle: bool,
        #[arg(long)]
        checkpoint_every: Option<usize>,
    },
    /// Print mean, SD and relative reward for every run under a directory.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Plot the smoothed reward curves of every run under a directory.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the finite-difference gradient suites.
    Gradcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.cmd {
        Cmd::Train {
            env,
            variant,
            options,
            seeds,
            steps,
            out,
            fe_width,
            depth_delta,
            no_scaling,
            no_entangle,
            checkpoint_every,
        } => {
            let d = ArchOverrides::default();
            let overrides = ArchOverrides {
                fe_width: fe_width.unwrap_or(d.fe_width),
                depth_delta: depth_delta.unwrap_or(d.depth_delta),
                scaling: !no_scaling,
                entangling: !no_entangle,
            };
            let mut cfg = RunConfig::new(env, variant)
                .with_seeds(0..seeds)
                .with_steps(steps)
                .with_options(options)
                .with_overrides(overrides)
                .with_out_dir(out);
            cfg.checkpoint_every = checkpoint_every;
            let arts = expkit::run_experiment(&cfg).context("training failed")?;
            let returns = arts.pooled_returns();
            let (mean, sd) = aggregate::mean_sd(&returns);
            println!(
                "{} on {env}: {} episodes, mean {mean:.2} sd {sd:.2}, written to {}",
                arts.label,
                returns.len(),
                arts.dir.display()
            );
            Ok(true)
        }
        Cmd::Summarize { input } => {
            let rows = expkit::summarize_dir(&input)?;
            aggregate::write_summary(io::stdout().lock(), &rows)?;
            Ok(true)
        }
        Cmd::Plot { input, out } => {
            let runs = expkit::discover_runs(&input)?;
            if runs.is_empty() {
                bail!("no runs found under {}", input.display());
            }
            let curves: Vec<_> = runs.iter().map(|r| r.aggregate()).collect();
            let title = format!("smoothed episodic reward ({})", input.display());
            std::fs::write(&out, render::render_svg(&curves, &title)?)
                .with_context(|| format!("writing {}", out.display()))?;
            let csv_path = out.with_extension("csv");
            render::write_curves_csv(BufWriter::new(File::create(&csv_path)?), &curves)?;
            println!("wrote {} and {}", out.display(), csv_path.display());
            Ok(true)
        }
        Cmd::Gradcheck { seed } => {
            let mut ok = true;
            for r in gradcheck::run_all(seed)? {
                let status = if r.passed() { "PASS" } else { "FAIL" };
                println!(
                    "{status} {} ({} instances): max error {:.3e} < {:.0e}",
                    r.name, r.instances, r.max_error, r.tolerance
                );
                ok &= r.passed();
            }
            Ok(ok)
        }
    }
}
