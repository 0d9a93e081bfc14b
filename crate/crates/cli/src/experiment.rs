//! Sweep execution and result files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use cbnet::lifecycle::simulate_network;
use cbnet::{lifetime_metrics, CbPolicy, LifetimeMetrics, Network, NetworkConfig, Point, Protocol, SinkPolicy};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::settings::{canonical_key, parse_value};

/// Parses `a..b` (inclusive), `a..=b`, or a comma list such as `0,3,7`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let text = text.trim();
    let seeds: Vec<u64> = if let Some((lo, hi)) = text.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let lo: u64 = lo.trim().parse().with_context(|| format!("bad seed range `{text}`"))?;
        let hi: u64 = hi.trim().parse().with_context(|| format!("bad seed range `{text}`"))?;
        if hi < lo {
            bail!("empty seed range `{text}`");
        }
        (lo..=hi).collect()
    } else {
        text.split(',')
            .map(|s| s.trim().parse().with_context(|| format!("bad seed `{s}`")))
            .collect::<Result<_>>()?
    };
    if seeds.is_empty() {
        bail!("seed list is empty");
    }
    Ok(seeds)
}

/// One sweep axis: a config field and the values it takes.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub key: String,
    pub values: Vec<Value>,
}

/// Parses `key=v1,v2,...`.
pub fn parse_axis(text: &str) -> Result<Axis> {
    let (key, values) = text
        .split_once('=')
        .with_context(|| format!("sweep axis must look like key=v1,v2; got `{text}`"))?;
    let values: Vec<Value> = values
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(parse_value)
        .collect();
    if values.is_empty() {
        bail!("sweep axis `{key}` has no values");
    }
    if values
        .iter()
        .any(|v| matches!(v, Value::Number(n) if !n.as_f64().is_some_and(f64::is_finite)))
    {
        bail!("sweep axis `{key}` has a non-finite value");
    }
    Ok(Axis {
        key: canonical_key(key.trim()).to_string(),
        values,
    })
}

/// Cartesian product of the axes, first axis slowest. No axes gives one empty point.
pub fn grid(axes: &[Axis]) -> Vec<Map<String, Value>> {
    let mut points = vec![Map::new()];
    for axis in axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.insert(axis.key.clone(), v.clone());
                    q
                })
            })
            .collect();
    }
    points
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub base: NetworkConfig,
    pub protocol: Protocol,
    pub cb_policy: CbPolicy,
    pub sink_policy: SinkPolicy,
    pub seeds: Vec<u64>,
    pub axes: Vec<Axis>,
    pub positions: Option<Vec<Point>>,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    /// Sample standard deviation; 0 for a single value.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std: var.sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceSummary {
    pub seed: u64,
    pub run_seed: u64,
    pub trace: String,
    pub metrics: LifetimeMetricsRow,
}

/// Metrics of one trace without the per-round throughput series.
#[derive(Debug, Clone, Serialize)]
pub struct LifetimeMetricsRow {
    pub fnd: cbnet::lifecycle::Milestone,
    pub hnd: cbnet::lifecycle::Milestone,
    pub and: cbnet::lifecycle::Milestone,
    pub f1: cbnet::lifecycle::Milestone,
    pub f2: f64,
    pub terminal_round: usize,
}

impl From<LifetimeMetrics> for LifetimeMetricsRow {
    fn from(m: LifetimeMetrics) -> Self {
        Self {
            fnd: m.fnd,
            hnd: m.hnd,
            and: m.and,
            f1: m.f1,
            f2: m.f2,
            terminal_round: m.terminal_round,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PointSummary {
    pub index: usize,
    pub overrides: Map<String, Value>,
    pub fnd: Stats,
    pub hnd: Stats,
    pub and: Stats,
    pub f2: Stats,
    /// Traces in which every node died before the run stopped.
    pub and_reached: usize,
    pub traces: Vec<TraceSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub routing: String,
    pub cb: String,
    pub master_seed: u64,
    pub seeds: Vec<u64>,
    pub points: Vec<PointSummary>,
}

fn point_dir(index: usize) -> String {
    format!("point-{index:03}")
}

impl Experiment {
    /// Resolved config of every sweep point.
    pub fn point_configs(&self) -> Result<Vec<(Map<String, Value>, NetworkConfig)>> {
        let mut out = Vec::new();
        for point in grid(&self.axes) {
            if self.positions.is_some() && point.contains_key("node_count") {
                bail!("invalid config field `node_count`: cannot be swept when positions are imported");
            }
            let mut config = self.base.clone();
            config.apply_flat_overrides(&point)?;
            if let Some(p) = &self.positions {
                config.node_count = p.len();
            }
            config.validate()?;
            out.push((point, config));
        }
        Ok(out)
    }

    /// Runs every (point, seed) trace on the current rayon pool and writes
    /// `point-NNN/seed-S.csv` files plus `summary.json` and `curves.csv`.
    pub fn run(&self) -> Result<Summary> {
        if self.cb_policy == CbPolicy::External {
            bail!("invalid config field `cb_policy`: `external` selections need the `serve` subcommand");
        }
        let points = self.point_configs()?;
        fs::create_dir_all(&self.out_dir).with_context(|| format!("creating {}", self.out_dir.display()))?;
        for index in 0..points.len() {
            fs::create_dir_all(self.out_dir.join(point_dir(index)))?;
        }
        let jobs: Vec<(usize, u64)> = (0..points.len())
            .flat_map(|p| self.seeds.iter().map(move |&s| (p, s)))
            .collect();
        let results: Vec<TraceSummary> = jobs
            .par_iter()
            .map(|&(p, seed)| self.run_trace(p, &points[p].1, seed))
            .collect::<Result<_>>()?;

        let mut summaries = Vec::new();
        let per_point = self.seeds.len();
        for (index, ((overrides, _), traces)) in points.into_iter().zip(results.chunks(per_point)).enumerate() {
            let col = |f: &dyn Fn(&LifetimeMetricsRow) -> f64| traces.iter().map(|t| f(&t.metrics)).collect::<Vec<_>>();
            summaries.push(PointSummary {
                index,
                overrides,
                fnd: Stats::of(&col(&|m| m.fnd.round as f64)),
                hnd: Stats::of(&col(&|m| m.hnd.round as f64)),
                and: Stats::of(&col(&|m| m.and.round as f64)),
                f2: Stats::of(&col(&|m| m.f2)),
                and_reached: traces.iter().filter(|t| t.metrics.and.reached).count(),
                traces: traces.to_vec(),
            });
        }
        let summary = Summary {
            routing: self.protocol.name().to_string(),
            cb: self.cb_policy.name().to_string(),
            master_seed: self.base.master_seed,
            seeds: self.seeds.clone(),
            points: summaries,
        };
        write_atomic(&self.out_dir.join("summary.json"), |w| {
            serde_json::to_writer_pretty(&mut *w, &summary)?;
            writeln!(w)?;
            Ok(())
        })?;
        write_atomic(&self.out_dir.join("curves.csv"), |w| {
            write_curves(w, &self.axes, &summary)
        })?;
        Ok(summary)
    }

    fn run_trace(&self, point: usize, config: &NetworkConfig, seed: u64) -> Result<TraceSummary> {
        let run_seed = config.master_seed.wrapping_add(seed);
        let net = match &self.positions {
            Some(p) => Network::from_positions(config.clone(), p.clone(), run_seed),
            None => Network::generate(config.clone(), run_seed),
        };
        let trace = simulate_network(net, self.protocol, self.cb_policy, self.sink_policy, run_seed)?;
        let rel = format!("{}/seed-{seed}.csv", point_dir(point));
        let file = fs::File::create(self.out_dir.join(&rel)).with_context(|| format!("creating {rel}"))?;
        let mut w = BufWriter::new(file);
        trace.write_csv(&mut w)?;
        w.flush()?;
        Ok(TraceSummary {
            seed,
            run_seed,
            trace: rel,
            metrics: lifetime_metrics(&trace, config.death_fraction).into(),
        })
    }
}

fn write_curves(w: &mut dyn Write, axes: &[Axis], summary: &Summary) -> Result<()> {
    let mut header: Vec<String> = vec!["point".into()];
    header.extend(axes.iter().map(|a| a.key.clone()));
    for m in ["fnd", "hnd", "and", "f2"] {
        header.push(format!("{m}_mean"));
        header.push(format!("{m}_std"));
    }
    writeln!(w, "{}", header.join(","))?;
    for p in &summary.points {
        let mut row = vec![p.index.to_string()];
        row.extend(axes.iter().map(|a| match &p.overrides[&a.key] {
            Value::Null => "none".to_string(),
            Value::String(s) => s.clone(),
            v => v.to_string(),
        }));
        for s in [&p.fnd, &p.hnd, &p.and, &p.f2] {
            row.push(format!("{:e}", s.mean));
            row.push(format!("{:e}", s.std));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Writes to a sibling temp file, then renames over `path`.
fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?);
        body(&mut w)?;
        w.flush()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming {}", tmp.display()))?;
    Ok(())
}
