//! Experiment harness: configs, multi-seed runs, aggregation, rendering and
//! the built-in experiment suites.

pub mod aggregate;
pub mod config;
pub mod gradcheck;
pub mod metrics;
pub mod render;
pub mod suites;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use aggregate::{mean_sd, smooth_trailing, summarize, AggregateCurve, CurvePoint, RunReturns, SummaryRow};
pub use config::{AgentKind, RunConfig, RESOLVED_CONFIG};
pub use metrics::{episodes, read_metrics, write_metrics};
pub use render::{render_svg, write_curves_csv};

use crate::error::{Error, Result};
use crate::trainer::{RandomAgent, StepMetrics, Trainer};

/// Environment variable that sets the number of seeds run concurrently.
pub const WORKERS_ENV: &str = "HOC_WORKERS";

pub const METRICS_FILE: &str = "metrics.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const SUMMARY_FILE: &str = "summary.csv";

/// Per-step metrics of one seed.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub records: Vec<StepMetrics>,
}

impl SeedRun {
    pub fn episodes(&self) -> Vec<(usize, f64)> {
        episodes(&self.records)
    }
}

/// Everything a finished experiment produced.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub label: String,
    pub seeds: Vec<SeedRun>,
    pub aggregate: AggregateCurve,
    pub metrics_files: Vec<PathBuf>,
}

impl RunArtifacts {
    pub fn pooled_returns(&self) -> Vec<f64> {
        self.seeds
            .iter()
            .flat_map(|s| s.records.iter().filter_map(|r| r.episode_return))
            .collect()
    }
}

pub fn seed_dir(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("seed_{seed}"))
}

/// Trains (or plays randomly) for `total_steps` on one seed. When `dir` is
/// given, checkpoints are written there at the configured interval and at
/// the end.
pub fn run_seed(cfg: &RunConfig, seed: u64, dir: Option<&Path>) -> Result<SeedRun> {
    let steps = cfg.train.total_steps;
    let mut records = Vec::with_capacity(steps);
    match cfg.net_spec() {
        None => {
            let mut agent = RandomAgent::new(cfg.env, seed);
            for _ in 0..steps {
                records.push(agent.step()?);
            }
        }
        Some(spec) => {
            let mut trainer = Trainer::new(spec, cfg.train.clone(), seed)?;
            trainer.run(|m, tr| {
                if let (Some(dir), Some(every)) = (dir, cfg.checkpoint_every) {
                    if m.step % every == 0 && m.step < steps {
                        tr.net().save(&dir.join(format!("checkpoint_{}.json", m.step)))?;
                    }
                }
                records.push(m.clone());
                Ok(())
            })?;
            if let Some(dir) = dir {
                trainer.net().save(&dir.join(CHECKPOINT_FILE))?;
            }
        }
    }
    Ok(SeedRun { seed, records })
}

fn worker_count() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok()?.parse().ok().filter(|&n| n > 0)
}

/// Runs every seed (in parallel), then writes under `cfg.out_dir`:
/// `resolved.config`, `seed_<k>/metrics.csv`, `seed_<k>/checkpoint.json`,
/// `aggregate.csv` and `summary.csv`.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunArtifacts> {
    cfg.validate()?;
    let out = cfg.out_dir.clone();
    fs::create_dir_all(&out)?;
    fs::write(out.join(RESOLVED_CONFIG), cfg.to_toml()?)?;

    let job = |seed: &u64| -> Result<(SeedRun, PathBuf)> {
        let dir = seed_dir(&out, *seed);
        fs::create_dir_all(&dir)?;
        let run = run_seed(cfg, *seed, Some(&dir))?;
        let path = dir.join(METRICS_FILE);
        write_metrics(BufWriter::new(File::create(&path)?), &run.records)?;
        Ok((run, path))
    };
    let results: Vec<Result<(SeedRun, PathBuf)>> = match worker_count() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(|| cfg.seeds.par_iter().map(job).collect()),
        None => cfg.seeds.par_iter().map(job).collect(),
    };
    let mut seeds = Vec::with_capacity(results.len());
    let mut metrics_files = Vec::with_capacity(results.len());
    for r in results {
        let (run, path) = r?;
        seeds.push(run);
        metrics_files.push(path);
    }

    let label = cfg.label();
    let per_seed: Vec<_> = seeds.iter().map(SeedRun::episodes).collect();
    let aggregate = AggregateCurve::from_seeds(
        label.clone(),
        &per_seed,
        cfg.smoothing_window,
        cfg.train.total_steps,
        cfg.curve_stride,
    );
    aggregate.write_csv(BufWriter::new(File::create(out.join(AGGREGATE_FILE))?))?;

    let arts = RunArtifacts {
        dir: out,
        label,
        seeds,
        aggregate,
        metrics_files,
    };
    write_run_summary(cfg, &arts)?;
    Ok(arts)
}

fn write_run_summary(cfg: &RunConfig, arts: &RunArtifacts) -> Result<()> {
    let returns = arts.pooled_returns();
    let (mean, sd) = mean_sd(&returns);
    let mut w = csv::Writer::from_path(arts.dir.join(SUMMARY_FILE))?;
    w.write_record(["env", "model", "mean", "sd", "episodes"])?;
    w.write_record([
        cfg.env.to_string(),
        arts.label.clone(),
        mean.to_string(),
        sd.to_string(),
        returns.len().to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

/// A finished run loaded back from disk.
#[derive(Debug, Clone)]
pub struct StoredRun {
    pub dir: PathBuf,
    pub config: RunConfig,
    pub seeds: Vec<SeedRun>,
}

impl StoredRun {
    pub fn load(dir: &Path) -> Result<Self> {
        let config = RunConfig::load(&dir.join(RESOLVED_CONFIG))?;
        let mut seeds = Vec::with_capacity(config.seeds.len());
        for &seed in &config.seeds {
            let file = File::open(seed_dir(dir, seed).join(METRICS_FILE))?;
            seeds.push(SeedRun {
                seed,
                records: read_metrics(file)?,
            });
        }
        Ok(Self {
            dir: dir.to_path_buf(),
            config,
            seeds,
        })
    }

    pub fn returns(&self) -> RunReturns {
        RunReturns {
            env: self.config.env,
            label: self.config.label(),
            is_baseline: self.config.is_baseline(),
            returns: self
                .seeds
                .iter()
                .flat_map(|s| s.records.iter().filter_map(|r| r.episode_return))
                .collect(),
        }
    }

    pub fn aggregate(&self) -> AggregateCurve {
        let per_seed: Vec<_> = self.seeds.iter().map(SeedRun::episodes).collect();
        AggregateCurve::from_seeds(
            self.config.label(),
            &per_seed,
            self.config.smoothing_window,
            self.config.train.total_steps,
            self.config.curve_stride,
        )
    }
}

/// Run directories at `root` itself or one level below it, sorted by path.
pub fn discover_runs(root: &Path) -> Result<Vec<StoredRun>> {
    let mut dirs = Vec::new();
    if root.join(RESOLVED_CONFIG).is_file() {
        dirs.push(root.to_path_buf());
    }
    for entry in fs::read_dir(root)? {
        let p = entry?.path();
        if p.join(RESOLVED_CONFIG).is_file() {
            dirs.push(p);
        }
    }
    dirs.sort();
    dirs.iter().map(|d| StoredRun::load(d)).collect()
}

/// Table rows for every run under `root`.
pub fn summarize_dir(root: &Path) -> Result<Vec<SummaryRow>> {
    let runs = discover_runs(root)?;
    if runs.is_empty() {
        return Err(Error::Config(format!("no runs found under {}", root.display())));
    }
    let returns: Vec<_> = runs.iter().map(StoredRun::returns).collect();
    summarize(&returns)
}
