//! Shared domain vocabulary: identifiers, the bitrate ladder, the video
//! catalog, scenario configuration, chunk keys, client sessions and the
//! per-slot ledger every metric is derived from.
//!
//! Units: data volumes are megabits (Mb), rates are megabits per second
//! (Mbps), durations are seconds unless a field says slots. Slots are
//! 1-based; a client arriving at slot `A` downloads during `(A, D]`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cache::CacheStats;
use crate::error::{Error, Result};
use crate::radio::RadioParams;
use crate::workload::CurveId;

pub type Slot = u32;

macro_rules! id_type {
    ($name:ident, $prefix:literal) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(ClientId, "c");
id_type!(ServerId, "k");
id_type!(VideoId, "v");

/// Discrete set of encodings, strictly increasing, in Mbps.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct BitrateLadder {
    rates: Vec<f64>,
}

impl BitrateLadder {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::config("ladder", "must not be empty"));
        }
        if rates.len() > u8::MAX as usize {
            return Err(Error::config("ladder", "at most 255 levels are supported"));
        }
        if rates.iter().any(|r| !r.is_finite() || *r <= 0.0) {
            return Err(Error::config("ladder", "all rates must be finite and > 0"));
        }
        if rates.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("ladder", "rates must be strictly increasing"));
        }
        Ok(Self { rates })
    }

    /// Ladder used by the shipped desk-scale configuration (Mbps).
    pub fn desk_scale() -> Self {
        Self::new(vec![1.5, 1.7, 2.2, 2.6, 3.0, 3.5, 3.8, 4.3, 4.5, 5.0]).expect("valid ladder")
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn rate(&self, level: u8) -> f64 {
        self.rates[level as usize]
    }

    pub fn min(&self) -> f64 {
        self.rates[0]
    }

    pub fn max(&self) -> f64 {
        self.rates[self.rates.len() - 1]
    }

    pub fn top_level(&self) -> u8 {
        (self.rates.len() - 1) as u8
    }

    /// `R_max - R_min`; zero for a single-rate ladder.
    pub fn span(&self) -> f64 {
        self.max() - self.min()
    }

    pub fn level_of(&self, rate: f64) -> Option<u8> {
        self.rates
            .iter()
            .position(|r| (r - rate).abs() <= 1e-9 * r.abs().max(1.0))
            .map(|p| p as u8)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Video {
    pub id: VideoId,
    /// Seconds; a positive multiple of the chunk length.
    pub duration: f64,
    /// Seconds every viewer of this video watches before it may depart.
    pub min_watch: f64,
    pub curve: CurveId,
    pub popularity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VideoCatalog {
    pub videos: Vec<Video>,
}

impl VideoCatalog {
    /// Four 270 s videos with minimum watch times of 90/50/50/30 s.
    pub fn standard(curve: CurveId) -> Self {
        let min_watch = [90.0, 50.0, 50.0, 30.0];
        let popularity = [0.4, 0.3, 0.2, 0.1];
        Self {
            videos: (0..4)
                .map(|i| Video {
                    id: VideoId(i as u32),
                    duration: 270.0,
                    min_watch: min_watch[i],
                    curve,
                    popularity: popularity[i],
                })
                .collect(),
        }
    }

    pub fn get(&self, id: VideoId) -> &Video {
        &self.videos[id.index()]
    }

    pub fn len(&self) -> usize {
        self.videos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.videos.is_empty()
    }

    pub fn validate(&self, chunk_len: f64) -> Result<()> {
        if self.videos.is_empty() {
            return Err(Error::config("video_durations", "catalog must contain a video"));
        }
        for (i, v) in self.videos.iter().enumerate() {
            if v.id.index() != i {
                return Err(Error::config("videos", "video ids must be 0..n in order"));
            }
            let chunks = v.duration / chunk_len;
            if v.duration <= 0.0 || (chunks - chunks.round()).abs() > 1e-9 {
                return Err(Error::config(
                    "video_durations",
                    format!(
                        "video {i}: duration {} is not a positive multiple of chunk_len {chunk_len}",
                        v.duration
                    ),
                ));
            }
            if v.min_watch < 0.0 || v.min_watch > v.duration {
                return Err(Error::config(
                    "video_min_watch",
                    format!(
                        "video {i}: minimum watch {} exceeds duration {}",
                        v.min_watch, v.duration
                    ),
                ));
            }
            if !(v.popularity >= 0.0) {
                return Err(Error::config("video_popularity", "weights must be >= 0"));
            }
        }
        let total: f64 = self.videos.iter().map(|v| v.popularity).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config(
                "video_popularity",
                format!("weights must sum to 1 (got {total})"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CachePolicyKind {
    Rbcrh,
    Lru,
    Lfu,
    Opt1,
    Fixed,
}

impl CachePolicyKind {
    pub const ALL: [CachePolicyKind; 5] = [Self::Rbcrh, Self::Lru, Self::Lfu, Self::Opt1, Self::Fixed];

    pub fn name(self) -> &'static str {
        match self {
            Self::Rbcrh => "rbcrh",
            Self::Lru => "lru",
            Self::Lfu => "lfu",
            Self::Opt1 => "opt1",
            Self::Fixed => "fixed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name().eq_ignore_ascii_case(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    QoeMax,
    Joint,
    TrafficMin,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Self::QoeMax, Self::Joint, Self::TrafficMin];

    pub fn name(self) -> &'static str {
        match self {
            Self::QoeMax => "qoe_max",
            Self::Joint => "joint",
            Self::TrafficMin => "traffic_min",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        Self::ALL.into_iter().find(|p| p.name() == norm)
    }
}

/// Which quantities bound a candidate bitrate in the feasibility gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeasibilityGate {
    /// `r <= max(estThr, Thr_hat, B / dt)`.
    Literal,
    /// `r <= max(estThr, Thr_hat)`.
    Throughput,
}

impl FeasibilityGate {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "literal" => Some(Self::Literal),
            "throughput" => Some(Self::Throughput),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub num_clients: u32,
    pub num_servers: u32,
    pub num_slots: u32,
    /// Seconds per slot.
    pub slot_len: f64,
    /// Seconds per chunk.
    pub chunk_len: f64,
    pub ladder: BitrateLadder,
    pub catalog: VideoCatalog,
    /// Per-server cache capacity in Mb.
    pub cache_size: f64,
    /// Per-client playback buffer capacity in Mb.
    pub buffer_cap: f64,
    /// Resource blocks per base station per slot.
    pub rb_per_slot: u32,
    pub beta: f64,
    pub fairness_threshold: f64,
    /// Arrivals are drawn from `U[0, arrival_interval]` seconds.
    pub arrival_interval: f64,
    pub rng_seed: u64,
    pub cache_policy: CachePolicyKind,
    pub strategy: Strategy,
    pub feasibility_gate: FeasibilityGate,
    /// Fraction of each cache filled at start under the fixed policy.
    pub fixed_fill: f64,
    pub radio: RadioParams,
}

impl ScenarioConfig {
    /// Defaults mirroring the reference setup, with the ladder, buffer and
    /// cache scaled down tenfold.
    pub fn desk_scale() -> Self {
        Self {
            num_clients: 100,
            num_servers: 10,
            num_slots: 300,
            slot_len: 1.0,
            chunk_len: 5.0,
            ladder: BitrateLadder::desk_scale(),
            catalog: VideoCatalog::standard(CurveId::Linear),
            cache_size: 200.0,
            buffer_cap: 25.0,
            rb_per_slot: 28,
            beta: 0.5,
            fairness_threshold: 0.5,
            arrival_interval: 30.0,
            rng_seed: 1,
            cache_policy: CachePolicyKind::Rbcrh,
            strategy: Strategy::Joint,
            feasibility_gate: FeasibilityGate::Literal,
            fixed_fill: 1.0,
            radio: RadioParams::default(),
        }
    }

    /// Slots per chunk (`C / dt`).
    pub fn chunk_slots(&self) -> u32 {
        (self.chunk_len / self.slot_len).round() as u32
    }

    /// Number of chunks of a video.
    pub fn chunks_of(&self, video: VideoId) -> u32 {
        (self.catalog.get(video).duration / self.chunk_len).round() as u32
    }

    /// The QoE-vs-traffic weight actually used by the selected strategy.
    pub fn effective_beta(&self) -> f64 {
        match self.strategy {
            Strategy::QoeMax => 1.0,
            Strategy::Joint => self.beta,
            Strategy::TrafficMin => 0.0,
        }
    }

    /// Megabits occupied by a cached chunk of this key.
    pub fn chunk_weight(&self, key: &ChunkKey) -> f64 {
        self.chunk_len * self.ladder.rate(key.level)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_servers == 0 {
            return Err(Error::config("num_servers", "must be >= 1"));
        }
        if self.num_slots == 0 {
            return Err(Error::config("num_slots", "must be >= 1"));
        }
        if !(self.slot_len > 0.0) {
            return Err(Error::config("slot_len", "must be > 0"));
        }
        if !(self.chunk_len > 0.0) {
            return Err(Error::config("chunk_len", "must be > 0"));
        }
        let ratio = self.chunk_len / self.slot_len;
        if ratio < 1.0 - 1e-9 || (ratio - ratio.round()).abs() > 1e-9 {
            return Err(Error::config(
                "chunk_len",
                format!(
                    "chunk_len {} must be a whole multiple of slot_len {}",
                    self.chunk_len, self.slot_len
                ),
            ));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::config("beta", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.fairness_threshold) {
            return Err(Error::config("fairness_threshold", "must lie in [0, 1]"));
        }
        if !(self.cache_size.is_finite()) || self.cache_size < self.chunk_len * self.ladder.min() - 1e-9 {
            return Err(Error::config(
                "cache_size",
                format!(
                    "must hold at least one lowest-quality chunk ({} Mb)",
                    self.chunk_len * self.ladder.min()
                ),
            ));
        }
        if !(self.buffer_cap > 0.0) {
            return Err(Error::config("buffer_cap", "must be > 0"));
        }
        if self.rb_per_slot == 0 {
            return Err(Error::config("rb_per_slot", "must be >= 1"));
        }
        if !(self.arrival_interval >= 0.0) {
            return Err(Error::config("arrival_interval", "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.fixed_fill) {
            return Err(Error::config("fixed_fill", "must lie in [0, 1]"));
        }
        self.catalog.validate(self.chunk_len)?;
        self.radio.validate()?;
        Ok(())
    }
}

/// A cacheable unit and a client request: (video, 1-based chunk, ladder level).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChunkKey {
    pub video: VideoId,
    pub chunk: u32,
    pub level: u8,
}

impl ChunkKey {
    pub fn new(video: VideoId, chunk: u32, level: u8) -> Self {
        Self { video, chunk, level }
    }

    pub fn bitrate(&self, ladder: &BitrateLadder) -> f64 {
        ladder.rate(self.level)
    }
}

impl fmt::Display for ChunkKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, L{})", self.video, self.chunk, self.level)
    }
}

/// Bitrate, server and origin flag held for the whole download of a chunk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChunkLock {
    pub key: ChunkKey,
    pub server: ServerId,
    pub origin: bool,
    /// Resource blocks reserved on `server` for every slot of the chunk.
    pub rb: u32,
    pub decided_at: Slot,
}

#[derive(Debug, Clone)]
pub struct ClientSession {
    pub id: ClientId,
    pub video: VideoId,
    pub arrival: Slot,
    pub departure: Slot,
    pub buffer: f64,
    pub buffer_full: bool,
    /// Slots from arrival until the buffer first filled.
    pub startup_delay: Option<Slot>,
    pub server: Option<ServerId>,
    /// Ladder level of every chunk downloaded so far, in chunk order.
    pub bitrate_history: Vec<u8>,
    /// Mb fetched from the origin on behalf of this client.
    pub backhaul: f64,
    /// Origin flag of every download slot so far.
    pub origin_flags: Vec<bool>,
    pub current: Option<ChunkLock>,
    pub stalls: u32,
    pub pressure_events: u32,
    /// Running sums of the self-tuned (rho, omega, gamma) over decisions.
    pub weight_sums: [f64; 3],
    pub decisions: u32,
    /// Effective throughput per slot of the most recent chunk.
    pub(crate) chunk_thr: Vec<(ServerId, f64)>,
    /// Slots spent at each ladder level, per server.
    pub(crate) access: BTreeMap<ServerId, Vec<u32>>,
}

impl ClientSession {
    pub fn new(id: ClientId, video: VideoId, arrival: Slot, departure: Slot) -> Self {
        Self {
            id,
            video,
            arrival,
            departure,
            buffer: 0.0,
            buffer_full: false,
            startup_delay: None,
            server: None,
            bitrate_history: Vec::new(),
            backhaul: 0.0,
            origin_flags: Vec::new(),
            current: None,
            stalls: 0,
            pressure_events: 0,
            weight_sums: [0.0; 3],
            decisions: 0,
            chunk_thr: Vec::new(),
            access: BTreeMap::new(),
        }
    }

    /// Downloading during slot `t`.
    pub fn is_active(&self, t: Slot) -> bool {
        t > self.arrival && t <= self.departure
    }

    /// First slot of a chunk download: `(t - A_i) mod C = 1`.
    pub fn at_chunk_boundary(&self, t: Slot, chunk_slots: u32) -> bool {
        t > self.arrival && (t - self.arrival - 1).is_multiple_of(chunk_slots)
    }

    /// Slots this client spent at each level on `server`.
    pub fn access_counts(&self, server: ServerId) -> Option<&[u32]> {
        self.access.get(&server).map(Vec::as_slice)
    }

    pub fn last_level(&self) -> Option<u8> {
        self.bitrate_history.last().copied()
    }
}

/// Download-chunk index `ceil((t - A_i) / C)`.
pub fn chunk_index_at(session: &ClientSession, t: Slot, chunk_slots: u32) -> Result<u32> {
    if !session.is_active(t) {
        return Err(Error::OutOfSession {
            client: session.id,
            slot: t,
            arrival: session.arrival,
            departure: session.departure,
        });
    }
    Ok((t - session.arrival).div_ceil(chunk_slots))
}

/// Playout-chunk index `ceil((t - A_i - L_i) / C)`; `None` before playback.
pub fn playout_index_at(session: &ClientSession, t: Slot, chunk_slots: u32) -> Option<u32> {
    let start = session.arrival + session.startup_delay?;
    (t > start && t <= session.departure).then(|| (t - start).div_ceil(chunk_slots))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerRow {
    pub slot: Slot,
    pub client: ClientId,
    pub server: ServerId,
    pub key: ChunkKey,
    pub bitrate: f64,
    pub origin: bool,
    /// First slot of this chunk (the request was made here).
    pub new_chunk: bool,
    pub thr_hat: f64,
    pub rb: u32,
    /// Slot-start mean bitrate of the other active clients.
    pub peer_mean: f64,
    /// Buffer level after this slot.
    pub buffer: f64,
    pub startup: bool,
    pub stall: bool,
    pub pressure: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ServerSlot {
    pub slot: Slot,
    pub server: ServerId,
    pub rb_used: u32,
    pub rb_budget: u32,
    /// Cache occupancy after this slot's update.
    pub cache_used: f64,
    pub cache_capacity: f64,
}

/// Audit trail of one run.
#[derive(Debug, Clone, Default)]
pub struct SlotLedger {
    pub rows: Vec<LedgerRow>,
    pub servers: Vec<ServerSlot>,
    pub cache_stats: Vec<CacheStats>,
}

impl SlotLedger {
    pub fn rows_for(&self, client: ClientId) -> impl Iterator<Item = &LedgerRow> {
        self.rows.iter().filter(move |r| r.client == client)
    }
}
