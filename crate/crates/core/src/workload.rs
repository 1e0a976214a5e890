//! Client arrivals, video choice, departures and audience retention curves.
//!
//! A retention curve gives the fraction of viewers still watching at each
//! chunk. All six shipped curves share the form `(1 - u)(1 - k u)` on the
//! normalized position `u = (x - 1) / (N - 1)`, so they start at 1, end at
//! 0 and sag further as `k` grows.

use std::fmt;
use std::path::Path;

use rand::distributions::WeightedIndex;
use rand::prelude::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ClientId, ScenarioConfig, Slot, VideoId};
use crate::radio::map_csv_err;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveId {
    Linear,
    Rc1,
    Rc2,
    Rc3,
    Rc4,
    Rc5,
}

impl CurveId {
    pub const ALL: [CurveId; 6] = [Self::Linear, Self::Rc1, Self::Rc2, Self::Rc3, Self::Rc4, Self::Rc5];

    pub fn name(self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::Rc1 => "rc1",
            Self::Rc2 => "rc2",
            Self::Rc3 => "rc3",
            Self::Rc4 => "rc4",
            Self::Rc5 => "rc5",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name().eq_ignore_ascii_case(s))
    }

    /// Curvature of the quadratic.
    fn sharpness(self) -> f64 {
        match self {
            Self::Linear => 0.0,
            Self::Rc1 => 0.2,
            Self::Rc2 => 0.4,
            Self::Rc3 => 0.6,
            Self::Rc4 => 0.8,
            Self::Rc5 => 1.0,
        }
    }
}

impl fmt::Display for CurveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `p(u) = a u^2 + b u + c` over `u` in `[0, 1]`, with `a = k`,
/// `b = -(1 + k)`, `c = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetentionCurve {
    pub id: CurveId,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl RetentionCurve {
    pub fn new(id: CurveId) -> Self {
        let k = id.sharpness();
        Self {
            id,
            a: k,
            b: -(1.0 + k),
            c: 1.0,
        }
    }

    /// Value at normalized position `u`, clamped to `[0, 1]`.
    pub fn at_fraction(&self, u: f64) -> f64 {
        // factored form keeps both endpoints exact
        ((1.0 - u) * (1.0 - self.a * u)).clamp(0.0, 1.0)
    }
}

/// All six curves, in order `LINEAR, RC1, ..., RC5`.
pub fn make_curves() -> Vec<RetentionCurve> {
    CurveId::ALL.into_iter().map(RetentionCurve::new).collect()
}

/// Probability a viewer is still watching chunk `chunk` (1-based) of an
/// `num_chunks`-chunk video.
pub fn retention_at(curve: &RetentionCurve, chunk: u32, num_chunks: u32) -> Result<f64> {
    if chunk == 0 || chunk > num_chunks {
        return Err(Error::ChunkOutOfRange {
            index: chunk,
            max: num_chunks,
        });
    }
    if num_chunks == 1 {
        return Ok(1.0);
    }
    let u = (chunk - 1) as f64 / (num_chunks - 1) as f64;
    Ok(curve.at_fraction(u))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedClient {
    pub client: ClientId,
    #[serde(rename = "arrival_slot")]
    pub arrival: Slot,
    pub video: VideoId,
    #[serde(rename = "departure_slot")]
    pub departure: Slot,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ArrivalPlan {
    pub clients: Vec<PlannedClient>,
}

impl ArrivalPlan {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| map_csv_err(path, e))?;
        for c in &self.clients {
            w.serialize(c).map_err(|e| map_csv_err(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| map_csv_err(path, e))?;
        let clients = r
            .deserialize()
            .collect::<std::result::Result<Vec<PlannedClient>, _>>()
            .map_err(|e| map_csv_err(path, e))?;
        Ok(Self { clients })
    }

    /// Checks the plan against a scenario: ids `0..S` in order, known
    /// videos, `A < D <= |T|` and departures no later than the video end.
    pub fn validate(&self, cfg: &ScenarioConfig) -> Result<()> {
        if self.clients.len() != cfg.num_clients as usize {
            return Err(Error::config(
                "arrivals",
                format!(
                    "plan has {} clients, config expects {}",
                    self.clients.len(),
                    cfg.num_clients
                ),
            ));
        }
        for (i, c) in self.clients.iter().enumerate() {
            if c.client.index() != i {
                return Err(Error::config(
                    "arrivals",
                    format!("row {i}: client ids must be 0..n in order"),
                ));
            }
            if c.video.index() >= cfg.catalog.len() {
                return Err(Error::config(
                    "arrivals",
                    format!("client {i}: unknown video {}", c.video),
                ));
            }
            if c.arrival >= c.departure || c.departure > cfg.num_slots {
                return Err(Error::config(
                    "arrivals",
                    format!("client {i}: need arrival < departure <= {}", cfg.num_slots),
                ));
            }
            let video_slots = (cfg.catalog.get(c.video).duration / cfg.slot_len).round() as Slot;
            if c.departure - c.arrival > video_slots {
                return Err(Error::config(
                    "arrivals",
                    format!("client {i}: session longer than the video"),
                ));
            }
        }
        Ok(())
    }
}

/// Draws arrivals uniformly over the arrival interval, videos by
/// popularity, and departures from the video's retention curve past the
/// minimum watch time. With the linear curve the extra viewing time is
/// uniform over the rest of the video.
pub fn build_arrival_plan(cfg: &ScenarioConfig, seed: u64) -> Result<ArrivalPlan> {
    let weights: Vec<f64> = cfg.catalog.videos.iter().map(|v| v.popularity).collect();
    let pick = WeightedIndex::new(&weights).map_err(|e| Error::config("video_popularity", e.to_string()))?;
    for v in &cfg.catalog.videos {
        if v.min_watch > v.duration {
            return Err(Error::config(
                "video_min_watch",
                format!("video {}: minimum watch exceeds duration", v.id),
            ));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_arrival = ((cfg.arrival_interval / cfg.slot_len).floor() as Slot).min(cfg.num_slots.saturating_sub(1));
    let mut clients = Vec::with_capacity(cfg.num_clients as usize);
    for i in 0..cfg.num_clients {
        let arrival = rng.gen_range(0..=max_arrival);
        let video = &cfg.catalog.videos[pick.sample(&mut rng)];
        let curve = RetentionCurve::new(video.curve);
        let min_slots = (video.min_watch / cfg.slot_len).ceil() as Slot;
        let rest = (video.duration / cfg.slot_len).round() as Slot - min_slots;
        let u: f64 = rng.gen();
        let extra = (1..=rest)
            .take_while(|&x| curve.at_fraction(x as f64 / (rest + 1) as f64) > u)
            .count() as Slot;
        let departure = (arrival + (min_slots + extra).max(1)).min(cfg.num_slots);
        clients.push(PlannedClient {
            client: ClientId(i),
            arrival,
            video: video.id,
            departure,
        });
    }
    Ok(ArrivalPlan { clients })
}
