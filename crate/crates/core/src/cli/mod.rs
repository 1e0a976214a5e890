//! Experiment harness: seeded replications, one-axis sweeps, result files
//! and side-by-side comparison of finished experiments.

pub mod config;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{ExperimentConfig, Overrides, SweepAxis, SweepSpec, SweepValue};

use crate::cache::write_cache_dump;
use crate::error::{Error, Result};
use crate::metrics::{self, AggregateReport, ReplicationReport};
use crate::model::ScenarioConfig;
use crate::radio::{self, SnrTrace};
use crate::scheduler::World;
use crate::workload::{self, ArrivalPlan};

/// Exit status for a failed command.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => 3,
        _ => 2,
    }
}

/// Externally supplied inputs shared by every replication.
#[derive(Debug, Clone, Default)]
pub struct Inputs {
    pub trace: Option<SnrTrace>,
    pub arrivals: Option<ArrivalPlan>,
}

impl Inputs {
    pub fn load(cfg: &ExperimentConfig) -> Result<Self> {
        let trace = match &cfg.trace {
            Some(p) => {
                let loaded = radio::load_trace(p)?;
                if loaded.duplicates > 0 {
                    eprintln!(
                        "warning: {} duplicate trace rows in {} (last one kept)",
                        loaded.duplicates,
                        p.display()
                    );
                }
                Some(loaded.trace)
            }
            None => None,
        };
        let arrivals = cfg.arrivals.as_deref().map(ArrivalPlan::read_csv).transpose()?;
        Ok(Self { trace, arrivals })
    }
}

/// Runs one seeded replication and returns its report (and the world's
/// caches for optional dumping).
pub fn run_replication(
    cfg: &ScenarioConfig,
    seed: u64,
    inputs: &Inputs,
) -> Result<(ReplicationReport, crate::scheduler::RunOutput)> {
    let trace = match &inputs.trace {
        Some(t) => t.clone(),
        None => radio::generate_trace(cfg, seed),
    };
    let plan = match &inputs.arrivals {
        Some(p) => p.clone(),
        None => workload::build_arrival_plan(cfg, seed)?,
    };
    let out = World::new(cfg.clone(), trace, &plan, seed)?.run();
    Ok((metrics::summarize(cfg, &out, seed), out))
}

/// Seeds `base, base + 1, ...`.
pub fn seed_list(base: u64, replications: u32) -> Vec<u64> {
    (0..replications as u64).map(|j| base + j).collect()
}

/// Runs all seeds of one scenario in parallel and aggregates them.
pub fn replicate(
    cfg: &ScenarioConfig,
    seeds: &[u64],
    inputs: &Inputs,
) -> Result<(Vec<ReplicationReport>, AggregateReport)> {
    let reports = seeds
        .par_iter()
        .map(|&s| run_replication(cfg, s, inputs).map(|(r, _)| r))
        .collect::<Result<Vec<_>>>()?;
    let agg = metrics::aggregate(&reports);
    Ok((reports, agg))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config_sha256: String,
    pub seeds: Vec<u64>,
    pub sweep_point: Option<String>,
    pub config: serde_json::Value,
    pub defaulted: Vec<String>,
}

fn resolved_json(cfg: &ExperimentConfig) -> serde_json::Value {
    serde_json::to_value(&cfg.resolved).expect("config values serialize")
}

/// SHA-256 of the canonical JSON form of the resolved configuration.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let canonical = serde_json::to_string(&resolved_json(cfg)).expect("serializable");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

#[derive(Debug, Clone)]
pub struct RunRequest {
    pub config: PathBuf,
    pub out: PathBuf,
    pub overrides: Overrides,
    pub dump_cache: bool,
}

/// Paths of the experiment directories written by a run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub points: Vec<(Option<String>, PathBuf, AggregateReport)>,
}

pub fn run_experiment(req: &RunRequest) -> Result<RunSummary> {
    let cfg = config::load(&req.config, &req.overrides)?;
    execute(&cfg, &req.out, req.dump_cache)
}

pub fn execute(cfg: &ExperimentConfig, out: &Path, dump_cache: bool) -> Result<RunSummary> {
    let inputs = Inputs::load(cfg)?;
    let seeds = seed_list(cfg.scenario.rng_seed, cfg.replications);
    let points: Vec<(Option<String>, ScenarioConfig)> = match &cfg.sweep {
        None => vec![(None, cfg.scenario.clone())],
        Some(s) => s
            .values
            .iter()
            .map(|v| Ok((Some(s.label(v)), s.apply(&cfg.scenario, v)?)))
            .collect::<Result<_>>()?,
    };
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let jobs: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|p| seeds.iter().map(move |&s| (p, s)))
        .collect();
    let dirs: Vec<PathBuf> = points
        .iter()
        .map(|(label, _)| label.as_ref().map_or_else(|| out.to_path_buf(), |l| out.join(l)))
        .collect();
    for d in &dirs {
        std::fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    let results = jobs
        .par_iter()
        .map(|&(p, seed)| {
            let (label, scenario) = &points[p];
            let (report, run) = run_replication(scenario, seed, &inputs)?;
            let dir = &dirs[p];
            metrics::write_client_csv(&dir.join(format!("clients_seed{seed}.csv")), &report.clients)?;
            if dump_cache {
                let rows: Vec<_> = run.caches.iter().flat_map(|c| c.snapshot(&scenario.ladder)).collect();
                write_cache_dump(&dir.join(format!("cache_seed{seed}.csv")), &rows)?;
            }
            let m = &report.metrics;
            let get = |k: &str| m.get(k).map_or("-".to_string(), |v| format!("{v:.3}"));
            eprintln!(
                "{} seed {seed}: avg_bitrate={} backhaul_mb={} miss_pct={}",
                label.as_deref().unwrap_or("run"),
                get("avg_bitrate"),
                get("avg_backhaul_mb"),
                get("miss_pct"),
            );
            Ok((p, report))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut summary = RunSummary { points: Vec::new() };
    for (p, (label, _)) in points.iter().enumerate() {
        let reports: Vec<ReplicationReport> = results
            .iter()
            .filter(|(q, _)| *q == p)
            .map(|(_, r)| r.clone())
            .collect();
        let agg = metrics::aggregate(&reports);
        let dir = &dirs[p];
        metrics::write_aggregate_json(&dir.join("aggregate.json"), &agg)?;
        let mut resolved = resolved_json(cfg);
        if let (Some(sweep), Some(obj)) = (&cfg.sweep, resolved.as_object_mut()) {
            let v = &sweep.values[p];
            obj.insert(sweep.axis.name().into(), serde_json::to_value(v).expect("serializable"));
        }
        let manifest = Manifest {
            version: env!("CARGO_PKG_VERSION").into(),
            config_sha256: config_hash(cfg),
            seeds: seeds.clone(),
            sweep_point: label.clone(),
            config: resolved,
            defaulted: cfg.defaulted.clone(),
        };
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).expect("serializable") + "\n";
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        summary.points.push((label.clone(), dir.clone(), agg));
    }
    Ok(summary)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Malformed {
        kind: "result",
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

#[derive(Deserialize)]
struct StoredMetric {
    mean: f64,
}

#[derive(Deserialize)]
struct StoredAggregate {
    metrics: BTreeMap<String, StoredMetric>,
}

/// Side-by-side table of aggregate means with ratios to the first
/// directory. Refuses directories whose slot count or ladder differ.
pub fn compare(dirs: &[PathBuf]) -> Result<String> {
    if dirs.len() < 2 {
        return Err(Error::Precondition(
            "compare needs at least two result directories".into(),
        ));
    }
    let manifests: Vec<Manifest> = dirs
        .iter()
        .map(|d| read_json(&d.join("manifest.json")))
        .collect::<Result<_>>()?;
    let aggs: Vec<StoredAggregate> = dirs
        .iter()
        .map(|d| read_json(&d.join("aggregate.json")))
        .collect::<Result<_>>()?;
    for key in ["num_slots", "ladder"] {
        let first = &manifests[0].config[key];
        for (d, m) in dirs.iter().zip(&manifests).skip(1) {
            if &m.config[key] != first {
                return Err(Error::config(
                    key,
                    format!(
                        "{} has {key} = {}, {} has {}",
                        dirs[0].display(),
                        first,
                        d.display(),
                        m.config[key]
                    ),
                ));
            }
        }
    }
    let mut names: Vec<&String> = aggs.iter().flat_map(|a| a.metrics.keys()).collect();
    names.sort();
    names.dedup();
    let labels: Vec<String> = dirs
        .iter()
        .enumerate()
        .map(|(i, d)| {
            d.file_name()
                .map_or(format!("#{i}"), |n| n.to_string_lossy().into_owned())
        })
        .collect();
    let w = labels.iter().map(String::len).max().unwrap_or(0).max(14);
    let mut out = String::new();
    write!(out, "{:<20}", "metric").unwrap();
    for (i, label) in labels.iter().enumerate() {
        write!(out, " {label:>w$}").unwrap();
        if i > 0 {
            write!(out, " {:>8}", "ratio").unwrap();
        }
    }
    out.push('\n');
    for name in names {
        write!(out, "{name:<20}").unwrap();
        let base = aggs[0].metrics.get(name).map(|m| m.mean);
        for (i, a) in aggs.iter().enumerate() {
            let v = a.metrics.get(name).map(|m| m.mean);
            match v {
                Some(v) => write!(out, " {v:>w$.4}").unwrap(),
                None => write!(out, " {:>w$}", "-").unwrap(),
            }
            if i > 0 {
                match (v, base) {
                    (Some(v), Some(b)) if b != 0.0 => write!(out, " {:>8.3}", v / b).unwrap(),
                    (Some(v), Some(b)) if v == b => write!(out, " {:>8.3}", 1.0).unwrap(),
                    _ => write!(out, " {:>8}", "-").unwrap(),
                }
            }
        }
        out.push('\n');
    }
    Ok(out)
}
