//! Flat key/value experiment files.
//!
//! A config is a TOML document with top-level keys only. Four keys are
//! required (`num_clients`, `num_servers`, `num_slots`, `cache_size`); all
//! others fall back to the desk-scale defaults and are listed in the run
//! manifest as defaulted.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::model::{
    BitrateLadder, CachePolicyKind, FeasibilityGate, ScenarioConfig, Strategy, Video, VideoCatalog, VideoId,
};
use crate::workload::CurveId;

pub const REQUIRED: [&str; 4] = ["num_clients", "num_servers", "num_slots", "cache_size"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Beta,
    ArrivalInterval,
    RetentionCurve,
    CachePolicy,
    Strategy,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            Self::Beta => "beta",
            Self::ArrivalInterval => "arrival_interval",
            Self::RetentionCurve => "retention_curve",
            Self::CachePolicy => "cache_policy",
            Self::Strategy => "strategy",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Self::Beta,
            Self::ArrivalInterval,
            Self::RetentionCurve,
            Self::CachePolicy,
            Self::Strategy,
        ]
        .into_iter()
        .find(|a| a.name() == s)
    }
}

/// One point of a sweep, already validated against its axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SweepValue {
    Number(f64),
    Name(String),
}

impl fmt::Display for SweepValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Number(v) => write!(f, "{v}"),
            Self::Name(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<SweepValue>,
}

impl SweepSpec {
    /// Directory name of a sweep point, e.g. `beta=0.5`.
    pub fn label(&self, value: &SweepValue) -> String {
        format!("{}={}", self.axis.name(), value)
    }

    pub fn apply(&self, base: &ScenarioConfig, value: &SweepValue) -> Result<ScenarioConfig> {
        let mut cfg = base.clone();
        let field = self.axis.name();
        match (self.axis, value) {
            (SweepAxis::Beta, SweepValue::Number(v)) => cfg.beta = *v,
            (SweepAxis::ArrivalInterval, SweepValue::Number(v)) => cfg.arrival_interval = *v,
            (SweepAxis::RetentionCurve, SweepValue::Name(s)) => {
                let c =
                    CurveId::parse(s).ok_or_else(|| Error::config("sweep_values", format!("unknown curve `{s}`")))?;
                cfg.catalog.videos.iter_mut().for_each(|v| v.curve = c);
            }
            (SweepAxis::CachePolicy, SweepValue::Name(s)) => {
                cfg.cache_policy = CachePolicyKind::parse(s)
                    .ok_or_else(|| Error::config("sweep_values", format!("unknown cache policy `{s}`")))?;
            }
            (SweepAxis::Strategy, SweepValue::Name(s)) => {
                cfg.strategy = Strategy::parse(s)
                    .ok_or_else(|| Error::config("sweep_values", format!("unknown strategy `{s}`")))?;
            }
            _ => {
                return Err(Error::config(
                    "sweep_values",
                    format!("value `{value}` does not fit axis {field}"),
                ))
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A parsed experiment file.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub replications: u32,
    pub trace: Option<PathBuf>,
    pub arrivals: Option<PathBuf>,
    pub sweep: Option<SweepSpec>,
    /// Keys that took their default value.
    pub defaulted: Vec<String>,
    /// Every key with the value actually used.
    pub resolved: BTreeMap<String, Value>,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub replications: Option<u32>,
    pub seed: Option<u64>,
    pub policy: Option<String>,
    pub strategy: Option<String>,
    pub beta: Option<f64>,
}

impl Overrides {
    fn apply(&self, table: &mut Table) {
        if let Some(n) = self.replications {
            table.insert("replications".into(), Value::Integer(n as i64));
        }
        if let Some(s) = self.seed {
            table.insert("rng_seed".into(), Value::Integer(s as i64));
        }
        if let Some(p) = &self.policy {
            table.insert("cache_policy".into(), Value::String(p.clone()));
        }
        if let Some(s) = &self.strategy {
            table.insert("strategy".into(), Value::String(s.clone()));
        }
        if let Some(b) = self.beta {
            table.insert("beta".into(), Value::Float(b));
        }
    }
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut table: Table = text.parse().map_err(|e: toml::de::Error| Error::Malformed {
        kind: "config",
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    overrides.apply(&mut table);
    let base = path.parent().unwrap_or(Path::new("."));
    parse_table(table, base)
}

struct Reader {
    table: Table,
    defaulted: Vec<String>,
    resolved: BTreeMap<String, Value>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<Value> {
        self.table.remove(key)
    }

    fn required_u32(&mut self, key: &str) -> Result<u32> {
        let v = self
            .take(key)
            .ok_or_else(|| Error::config(key, "required key is missing"))?;
        let n = as_u32(key, &v)?;
        self.resolved.insert(key.into(), v);
        Ok(n)
    }

    fn required_f64(&mut self, key: &str) -> Result<f64> {
        let v = self
            .take(key)
            .ok_or_else(|| Error::config(key, "required key is missing"))?;
        let x = as_f64(key, &v)?;
        self.resolved.insert(key.into(), Value::Float(x));
        Ok(x)
    }

    fn get<T>(
        &mut self,
        key: &str,
        default: T,
        conv: impl Fn(&str, &Value) -> Result<T>,
        back: impl Fn(&T) -> Value,
    ) -> Result<T> {
        let out = match self.take(key) {
            Some(v) => conv(key, &v)?,
            None => {
                self.defaulted.push(key.into());
                default
            }
        };
        self.resolved.insert(key.into(), back(&out));
        Ok(out)
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64> {
        self.get(key, default, as_f64, |x| Value::Float(*x))
    }

    fn u32(&mut self, key: &str, default: u32) -> Result<u32> {
        self.get(key, default, as_u32, |x| Value::Integer(*x as i64))
    }

    fn bool(&mut self, key: &str, default: bool) -> Result<bool> {
        self.get(
            key,
            default,
            |k, v| v.as_bool().ok_or_else(|| Error::config(k, "expected true or false")),
            |x| Value::Boolean(*x),
        )
    }

    fn name(&mut self, key: &str, default: &str) -> Result<String> {
        self.get(
            key,
            default.to_string(),
            |k, v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| Error::config(k, "expected a string"))
            },
            |x| Value::String(x.clone()),
        )
    }

    fn floats(&mut self, key: &str, default: Vec<f64>) -> Result<Vec<f64>> {
        self.get(
            key,
            default,
            |k, v| {
                v.as_array()
                    .ok_or_else(|| Error::config(k, "expected an array of numbers"))?
                    .iter()
                    .map(|x| as_f64(k, x))
                    .collect()
            },
            |xs| Value::Array(xs.iter().map(|x| Value::Float(*x)).collect()),
        )
    }
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(x) if x.is_finite() => Ok(*x),
        Value::Integer(n) => Ok(*n as f64),
        _ => Err(Error::config(key, format!("expected a finite number, got `{v}`"))),
    }
}

fn as_u32(key: &str, v: &Value) -> Result<u32> {
    match v {
        Value::Integer(n) if (0..=u32::MAX as i64).contains(n) => Ok(*n as u32),
        _ => Err(Error::config(
            key,
            format!("expected a non-negative integer, got `{v}`"),
        )),
    }
}

fn parse_with<T>(key: &str, s: &str, f: impl Fn(&str) -> Option<T>) -> Result<T> {
    f(s).ok_or_else(|| Error::config(key, format!("unknown value `{s}`")))
}

/// Resolves a parsed table; relative file paths are taken from `base`.
pub fn parse_table(table: Table, base: &Path) -> Result<ExperimentConfig> {
    let d = ScenarioConfig::desk_scale();
    let mut r = Reader {
        table,
        defaulted: Vec::new(),
        resolved: BTreeMap::new(),
    };

    let num_clients = r.required_u32("num_clients")?;
    let num_servers = r.required_u32("num_servers")?;
    let num_slots = r.required_u32("num_slots")?;
    let cache_size = r.required_f64("cache_size")?;

    let slot_len = r.f64("slot_len", d.slot_len)?;
    let chunk_len = r.f64("chunk_len", d.chunk_len)?;
    let ladder = BitrateLadder::new(r.floats("ladder", d.ladder.rates().to_vec())?)?;

    let curve_name = r.name("retention_curve", d.catalog.videos[0].curve.name())?;
    let curve = parse_with("retention_curve", &curve_name, CurveId::parse)?;
    let std_catalog = VideoCatalog::standard(curve);
    let durations = r.floats(
        "video_durations",
        std_catalog.videos.iter().map(|v| v.duration).collect(),
    )?;
    let min_watch = r.floats(
        "video_min_watch",
        std_catalog.videos.iter().map(|v| v.min_watch).collect(),
    )?;
    let popularity = r.floats(
        "video_popularity",
        std_catalog.videos.iter().map(|v| v.popularity).collect(),
    )?;
    if min_watch.len() != durations.len() || popularity.len() != durations.len() {
        return Err(Error::config(
            "video_durations",
            "video_durations, video_min_watch and video_popularity must have equal length",
        ));
    }
    let catalog = VideoCatalog {
        videos: (0..durations.len())
            .map(|i| Video {
                id: VideoId(i as u32),
                duration: durations[i],
                min_watch: min_watch[i],
                curve,
                popularity: popularity[i],
            })
            .collect(),
    };

    let mut radio = d.radio.clone();
    radio.alpha = r.f64("alpha", radio.alpha)?;
    radio.snr_min = r.f64("snr_min", radio.snr_min)?;
    radio.snr_max = r.f64("snr_max", radio.snr_max)?;
    radio.thr_max = r.f64("thr_max", radio.thr_max)?;
    radio.rb_bandwidth = r.f64("rb_bandwidth", radio.rb_bandwidth)?;
    radio.pathloss.ref_loss_db = r.f64("pathloss_ref_loss", radio.pathloss.ref_loss_db)?;
    radio.pathloss.exponent = r.f64("pathloss_exponent", radio.pathloss.exponent)?;
    radio.pathloss.ref_distance = r.f64("pathloss_ref_distance", radio.pathloss.ref_distance)?;
    radio.tx_power = r.f64("tx_power", radio.tx_power)?;
    radio.noise_floor = r.f64("noise_floor", radio.noise_floor)?;
    radio.client_gain = r.f64("client_gain", radio.client_gain)?;
    radio.enb_gain = r.f64("enb_gain", radio.enb_gain)?;
    radio.layout.bs_spacing = r.f64("bs_spacing", radio.layout.bs_spacing)?;
    radio.layout.speed = r.f64("speed", radio.layout.speed)?;
    radio.layout.lateral_min = r.f64("lateral_min", radio.layout.lateral_min)?;
    radio.layout.lateral_max = r.f64("lateral_max", radio.layout.lateral_max)?;
    radio.layout.min_distance = r.f64("min_distance", radio.layout.min_distance)?;
    radio.layout.ring = r.bool("ring", radio.layout.ring)?;

    let seed = r.get(
        "rng_seed",
        d.rng_seed,
        |k, v| match v {
            Value::Integer(n) if *n >= 0 => Ok(*n as u64),
            _ => Err(Error::config(k, "expected a non-negative integer")),
        },
        |x| Value::Integer(*x as i64),
    )?;
    let policy = r.name("cache_policy", d.cache_policy.name())?;
    let strategy = r.name("strategy", d.strategy.name())?;
    let gate = r.name("feasibility_gate", "literal")?;

    let scenario = ScenarioConfig {
        num_clients,
        num_servers,
        num_slots,
        slot_len,
        chunk_len,
        ladder,
        catalog,
        cache_size,
        buffer_cap: r.f64("buffer_cap", d.buffer_cap)?,
        rb_per_slot: r.u32("rb_per_slot", d.rb_per_slot)?,
        beta: r.f64("beta", d.beta)?,
        fairness_threshold: r.f64("fairness_threshold", d.fairness_threshold)?,
        arrival_interval: r.f64("arrival_interval", d.arrival_interval)?,
        rng_seed: seed,
        cache_policy: parse_with("cache_policy", &policy, CachePolicyKind::parse)?,
        strategy: parse_with("strategy", &strategy, Strategy::parse)?,
        feasibility_gate: parse_with("feasibility_gate", &gate, FeasibilityGate::parse)?,
        fixed_fill: r.f64("fixed_fill", d.fixed_fill)?,
        radio,
    };

    let replications = r.u32("replications", 1)?;
    if replications == 0 {
        return Err(Error::config("replications", "must be >= 1"));
    }
    let path_of = |r: &mut Reader, key: &str| -> Result<Option<PathBuf>> {
        match r.take(key) {
            None => Ok(None),
            Some(Value::String(s)) => {
                r.resolved.insert(key.into(), Value::String(s.clone()));
                Ok(Some(base.join(s)))
            }
            Some(_) => Err(Error::config(key, "expected a file path string")),
        }
    };
    let trace = path_of(&mut r, "trace")?;
    let arrivals = path_of(&mut r, "arrivals")?;

    let sweep = match (r.take("sweep_axis"), r.take("sweep_values")) {
        (None, None) => None,
        (Some(axis), Some(values)) => {
            let axis_name = axis
                .as_str()
                .ok_or_else(|| Error::config("sweep_axis", "expected a string"))?;
            let axis = parse_with("sweep_axis", axis_name, SweepAxis::parse)?;
            let raw = values
                .as_array()
                .ok_or_else(|| Error::config("sweep_values", "expected an array"))?;
            if raw.is_empty() {
                return Err(Error::config("sweep_values", "must not be empty"));
            }
            let values = raw
                .iter()
                .map(|v| match v {
                    Value::String(s) => Ok(SweepValue::Name(s.clone())),
                    other => as_f64("sweep_values", other).map(SweepValue::Number),
                })
                .collect::<Result<Vec<_>>>()?;
            r.resolved
                .insert("sweep_axis".into(), Value::String(axis.name().into()));
            r.resolved.insert("sweep_values".into(), Value::Array(raw.clone()));
            let sweep = SweepSpec { axis, values };
            for v in &sweep.values {
                sweep.apply(&scenario, v)?;
            }
            Some(sweep)
        }
        (Some(_), None) => return Err(Error::config("sweep_values", "sweep_axis given without sweep_values")),
        (None, Some(_)) => return Err(Error::config("sweep_axis", "sweep_values given without sweep_axis")),
    };

    if let Some(unknown) = r.table.keys().next() {
        return Err(Error::config(unknown.clone(), "unknown key"));
    }
    scenario.validate()?;
    Ok(ExperimentConfig {
        scenario,
        replications,
        trace,
        arrivals,
        sweep,
        defaulted: r.defaulted,
        resolved: r.resolved,
    })
}
