//! Per-step metrics CSV.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::trainer::StepMetrics;

pub const METRICS_HEADER: [&str; 7] = [
    "step",
    "episode_return",
    "entropy",
    "actor_loss",
    "critic_loss",
    "epsilon",
    "option",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_metrics<W: Write>(w: W, records: &[StepMetrics]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(METRICS_HEADER)?;
    for r in records {
        out.write_record([
            r.step.to_string(),
            opt(r.episode_return),
            r.entropy.to_string(),
            opt(r.actor_loss),
            opt(r.critic_loss),
            r.epsilon.to_string(),
            r.option.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_metrics<R: Read>(r: R) -> Result<Vec<StepMetrics>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    if header.iter().ne(METRICS_HEADER) {
        return Err(Error::Config(format!("unexpected metrics header {header:?}")));
    }
    let num = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::Config(format!("bad number '{s}' in metrics")))
    };
    let maybe = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            num(s).map(Some)
        }
    };
    let int = |s: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| Error::Config(format!("bad integer '{s}' in metrics")))
    };
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        out.push(StepMetrics {
            step: int(&rec[0])?,
            episode_return: maybe(&rec[1])?,
            entropy: num(&rec[2])?,
            actor_loss: maybe(&rec[3])?,
            critic_loss: maybe(&rec[4])?,
            epsilon: num(&rec[5])?,
            option: int(&rec[6])?,
        });
    }
    Ok(out)
}

/// `(end step, return)` of every completed episode.
pub fn episodes(records: &[StepMetrics]) -> Vec<(usize, f64)> {
    records
        .iter()
        .filter_map(|r| r.episode_return.map(|g| (r.step, g)))
        .collect()
}

/// How many steps each option was active.
pub fn option_histogram(records: &[StepMetrics], n_options: usize) -> Vec<usize> {
    let mut h = vec![0; n_options.max(1)];
    for r in records {
        if r.option < h.len() {
            h[r.option] += 1;
        }
    }
    h
}
