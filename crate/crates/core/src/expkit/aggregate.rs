//! Reward smoothing, cross-seed aggregation and summary tables.

use std::io::{Read, Write};

use serde::Serialize;

use crate::envs::EnvKind;
use crate::error::{Error, Result};

/// Population mean and standard deviation; `(NaN, NaN)` for an empty slice.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Trailing-window mean of episodic returns: at each `step` in `grid`, the
/// mean return of episodes ending in `(step - window, step]`. Steps whose
/// window holds no episode are skipped. `episodes` must be sorted by end step
/// and `grid` must be increasing.
pub fn smooth_trailing(
    episodes: &[(usize, f64)],
    window: usize,
    grid: impl IntoIterator<Item = usize>,
) -> Vec<(usize, f64)> {
    assert!(window > 0, "window must be positive");
    let mut out = Vec::new();
    let (mut lo, mut hi) = (0, 0);
    let mut sum = 0.0;
    for t in grid {
        while hi < episodes.len() && episodes[hi].0 <= t {
            sum += episodes[hi].1;
            hi += 1;
        }
        while lo < hi && episodes[lo].0 + window <= t {
            sum -= episodes[lo].1;
            lo += 1;
        }
        if hi > lo {
            // re-sum small windows exactly to avoid drift from the running sum
            let n = hi - lo;
            let mean = if n <= 64 {
                episodes[lo..hi].iter().map(|e| e.1).sum::<f64>() / n as f64
            } else {
                sum / n as f64
            };
            out.push((t, mean));
        }
    }
    out
}

/// Smoothed reward at `step`, if any episode ended inside the window.
pub fn smoothed_at(episodes: &[(usize, f64)], window: usize, step: usize) -> Option<f64> {
    smooth_trailing(episodes, window, [step]).first().map(|p| p.1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub step: usize,
    pub mean: f64,
    pub sd: f64,
}

/// Cross-seed mean and SD of the smoothed reward.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurve {
    pub label: String,
    pub points: Vec<CurvePoint>,
}

impl AggregateCurve {
    /// Points every `stride` steps up to `total_steps`; at each step only
    /// seeds with a defined smoothed value contribute.
    pub fn from_seeds(
        label: impl Into<String>,
        per_seed: &[Vec<(usize, f64)>],
        window: usize,
        total_steps: usize,
        stride: usize,
    ) -> Self {
        let grid: Vec<usize> = (stride..=total_steps).step_by(stride).collect();
        let smoothed: Vec<Vec<(usize, f64)>> = per_seed
            .iter()
            .map(|eps| smooth_trailing(eps, window, grid.iter().copied()))
            .collect();
        let mut cursors = vec![0usize; smoothed.len()];
        let mut points = Vec::new();
        let mut vals = Vec::with_capacity(smoothed.len());
        for &t in &grid {
            vals.clear();
            for (s, c) in smoothed.iter().zip(cursors.iter_mut()) {
                if *c < s.len() && s[*c].0 == t {
                    vals.push(s[*c].1);
                    *c += 1;
                }
            }
            if !vals.is_empty() {
                let (mean, sd) = mean_sd(&vals);
                points.push(CurvePoint { step: t, mean, sd });
            }
        }
        Self {
            label: label.into(),
            points,
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["step", "mean", "sd"])?;
        for p in &self.points {
            out.write_record([p.step.to_string(), p.mean.to_string(), p.sd.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(label: impl Into<String>, r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        if rdr.headers()?.iter().ne(["step", "mean", "sd"]) {
            return Err(Error::Config("unexpected curve header".into()));
        }
        let mut points = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let bad = || Error::Config("bad number in curve".into());
            points.push(CurvePoint {
                step: rec[0].parse().map_err(|_| bad())?,
                mean: rec[1].parse().map_err(|_| bad())?,
                sd: rec[2].parse().map_err(|_| bad())?,
            });
        }
        Ok(Self {
            label: label.into(),
            points,
        })
    }
}

/// Episodic returns of one labelled run, pooled over its seeds.
#[derive(Debug, Clone)]
pub struct RunReturns {
    pub env: EnvKind,
    pub label: String,
    pub is_baseline: bool,
    pub returns: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub env: EnvKind,
    pub label: String,
    pub mean: f64,
    pub sd: f64,
    /// Variant mean over the classical baseline mean. For Acrobot this is a
    /// penalty ratio, lower is better.
    pub relative: f64,
    pub episodes: usize,
}

/// Mean, SD and relative reward per run; every environment present needs a
/// baseline run.
pub fn summarize(runs: &[RunReturns]) -> Result<Vec<SummaryRow>> {
    let mut rows = Vec::with_capacity(runs.len());
    for run in runs {
        let base = runs
            .iter()
            .find(|r| r.env == run.env && r.is_baseline)
            .ok_or_else(|| Error::MissingBaseline(run.env.to_string()))?;
        let (base_mean, _) = mean_sd(&base.returns);
        let (mean, sd) = mean_sd(&run.returns);
        rows.push(SummaryRow {
            env: run.env,
            label: run.label.clone(),
            mean,
            sd,
            relative: relative_reward(mean, base_mean),
            episodes: run.returns.len(),
        });
    }
    Ok(rows)
}

pub fn relative_reward(mean: f64, baseline_mean: f64) -> f64 {
    mean / baseline_mean
}

pub fn write_summary<W: Write>(w: W, rows: &[SummaryRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["env", "model", "mean", "sd", "relative", "episodes"])?;
    for r in rows {
        out.write_record([
            r.env.to_string(),
            r.label.clone(),
            format!("{:.2}", r.mean),
            format!("{:.2}", r.sd),
            format!("{:.2}", r.relative),
            r.episodes.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothing_examples() {
        let eps = [(10, 5.0), (30, 5.0), (2500, 5.0)];
        for (_, v) in smooth_trailing(&eps, 2000, 1..=3000) {
            assert_eq!(v, 5.0);
        }
        assert_eq!(smoothed_at(&[(100, 100.0)], 2000, 150), Some(100.0));
        assert_eq!(smoothed_at(&[(100, 100.0), (120, 200.0)], 2000, 150), Some(150.0));
        assert_eq!(smoothed_at(&[(100, 100.0)], 2000, 50), None);
        // window is half-open: an episode ending exactly `window` steps ago is out
        assert_eq!(smoothed_at(&[(100, 100.0)], 2000, 2100), None);
        assert_eq!(smoothed_at(&[(100, 100.0)], 2000, 2099), Some(100.0));
    }

    #[test]
    fn mean_sd_known_values() {
        let (m, s) = mean_sd(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(m, 5.0);
        assert_eq!(s, 2.0);
        assert_eq!(mean_sd(&[3.0]), (3.0, 0.0));
    }

    #[test]
    fn single_seed_sd_is_zero() {
        let c = AggregateCurve::from_seeds("x", &[vec![(3, 1.0), (9, 4.0)]], 5, 12, 1);
        assert!(c.points.iter().all(|p| p.sd == 0.0));
        assert_eq!(c.points.first().unwrap().step, 3);
        // (9-5, 9] holds only the second episode
        assert_eq!(c.points.iter().find(|p| p.step == 9).unwrap().mean, 4.0);
    }

    #[test]
    fn summary_relative_rewards() {
        let runs = vec![
            RunReturns {
                env: EnvKind::CartPole,
                label: "classical".into(),
                is_baseline: true,
                returns: vec![73.13],
            },
            RunReturns {
                env: EnvKind::CartPole,
                label: "hybrid_f".into(),
                is_baseline: false,
                returns: vec![216.10],
            },
            RunReturns {
                env: EnvKind::Acrobot,
                label: "classical".into(),
                is_baseline: true,
                returns: vec![-233.44],
            },
            RunReturns {
                env: EnvKind::Acrobot,
                label: "hybrid_f".into(),
                is_baseline: false,
                returns: vec![-125.71],
            },
        ];
        let rows = summarize(&runs).unwrap();
        assert_eq!(rows[0].relative, 1.0);
        // ratios of unrounded means, so the last digit may differ from a rounded table
        assert!((rows[1].relative - 2.95).abs() < 0.01);
        assert!((rows[3].relative - 0.54).abs() < 0.01);
        assert!(matches!(summarize(&runs[1..2]), Err(Error::MissingBaseline(_))));
    }
}
