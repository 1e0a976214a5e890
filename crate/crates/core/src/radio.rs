//! Radio access model: SNR traces, the truncated Shannon mapping from SNR to
//! spectral efficiency, proportional-fair throughput shares and the
//! resource-block cost of a bitrate.
//!
//! Theoretical throughput is expressed per resource block (Mbps/RB) and the
//! per-slot budget `W` counts resource blocks, so `Thr * W` is in Mbps.

use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ClientId, ScenarioConfig, ServerId, Slot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathLossModel {
    /// `L(d) = L0 + 10 n log10(d / d0)`.
    LogDistance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathLoss {
    pub model: PathLossModel,
    /// Loss at the reference distance, dB.
    pub ref_loss_db: f64,
    pub exponent: f64,
    /// Reference distance, metres.
    pub ref_distance: f64,
}

impl PathLoss {
    pub fn loss_db(&self, distance: f64) -> f64 {
        match self.model {
            PathLossModel::LogDistance => {
                self.ref_loss_db + 10.0 * self.exponent * (distance / self.ref_distance).log10()
            }
        }
    }
}

/// Geometry of the synthetic trace generator.
///
/// Base stations sit on a road at `(k + 0.5) * spacing`; every client drives
/// along it at the same speed from a seeded initial position and lateral
/// offset. With `ring` the road closes on itself so client density stays
/// uniform over the run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Layout {
    pub bs_spacing: f64,
    /// Metres per second.
    pub speed: f64,
    pub lateral_min: f64,
    pub lateral_max: f64,
    pub min_distance: f64,
    pub ring: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadioParams {
    pub alpha: f64,
    pub snr_min: f64,
    pub snr_max: f64,
    /// bps/Hz at or above `snr_max`.
    pub thr_max: f64,
    /// MHz per resource block.
    pub rb_bandwidth: f64,
    pub pathloss: PathLoss,
    /// dBm.
    pub tx_power: f64,
    /// dBm over one resource block.
    pub noise_floor: f64,
    pub client_gain: f64,
    pub enb_gain: f64,
    pub layout: Layout,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            alpha: 0.6,
            snr_min: -10.0,
            snr_max: 23.0,
            thr_max: 4.4,
            rb_bandwidth: 0.18,
            pathloss: PathLoss {
                model: PathLossModel::LogDistance,
                ref_loss_db: 40.0,
                exponent: 3.5,
                ref_distance: 1.0,
            },
            tx_power: 26.0,
            noise_floor: -100.0,
            client_gain: 0.0,
            enb_gain: 18.0,
            layout: Layout {
                bs_spacing: 500.0,
                speed: 8.33,
                lateral_min: 20.0,
                lateral_max: 120.0,
                min_distance: 1.0,
                ring: true,
            },
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.snr_min < self.snr_max) {
            return Err(Error::config("snr_min", "must be below snr_max"));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::config("alpha", "must be > 0"));
        }
        if !(self.thr_max > 0.0) {
            return Err(Error::config("thr_max", "must be > 0"));
        }
        if !(self.rb_bandwidth > 0.0) {
            return Err(Error::config("rb_bandwidth", "must be > 0"));
        }
        if !(self.pathloss.ref_distance > 0.0) {
            return Err(Error::config("pathloss_ref_distance", "must be > 0"));
        }
        let l = &self.layout;
        if !(l.bs_spacing > 0.0) {
            return Err(Error::config("bs_spacing", "must be > 0"));
        }
        if !(l.min_distance > 0.0) {
            return Err(Error::config("min_distance", "must be > 0"));
        }
        if !(l.lateral_min >= 0.0 && l.lateral_min <= l.lateral_max) {
            return Err(Error::config("lateral_min", "need 0 <= lateral_min <= lateral_max"));
        }
        Ok(())
    }

    /// Link budget at a given distance (metres), clamped to `min_distance`.
    pub fn snr_at_distance(&self, distance: f64) -> f64 {
        let d = distance.max(self.layout.min_distance);
        self.tx_power + self.client_gain + self.enb_gain - self.pathloss.loss_db(d) - self.noise_floor
    }
}

/// SNR in dB for every (client, server, slot).
#[derive(Debug, Clone, PartialEq)]
pub struct SnrTrace {
    clients: u32,
    servers: u32,
    slots: u32,
    grid: Vec<f64>,
}

impl SnrTrace {
    pub fn from_fn(clients: u32, servers: u32, slots: u32, mut f: impl FnMut(ClientId, ServerId, Slot) -> f64) -> Self {
        let mut grid = Vec::with_capacity((clients * servers * slots) as usize);
        for c in 0..clients {
            for k in 0..servers {
                for t in 1..=slots {
                    grid.push(f(ClientId(c), ServerId(k), t));
                }
            }
        }
        Self {
            clients,
            servers,
            slots,
            grid,
        }
    }

    pub fn clients(&self) -> u32 {
        self.clients
    }

    pub fn servers(&self) -> u32 {
        self.servers
    }

    pub fn slots(&self) -> u32 {
        self.slots
    }

    /// Panics if the key is outside the grid; `t` is 1-based.
    pub fn snr(&self, client: ClientId, server: ServerId, t: Slot) -> f64 {
        assert!(t >= 1 && t <= self.slots, "slot {t} outside trace");
        let idx = (client.index() * self.servers as usize + server.index()) * self.slots as usize + (t as usize - 1);
        self.grid[idx]
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
        for c in 0..self.clients {
            for k in 0..self.servers {
                for t in 1..=self.slots {
                    w.serialize(TraceRecord {
                        client: c,
                        server: k,
                        slot: t,
                        snr_db: self.snr(ClientId(c), ServerId(k), t),
                    })
                    .map_err(|e| csv_err(path, e))?;
                }
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::Malformed {
            kind: "csv",
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }
}

pub(crate) fn map_csv_err(path: &Path, e: csv::Error) -> Error {
    csv_err(path, e)
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceRecord {
    client: u32,
    server: u32,
    slot: u32,
    snr_db: f64,
}

/// A trace read from disk plus the number of rows that overwrote an
/// earlier row for the same key.
#[derive(Debug, Clone)]
pub struct LoadedTrace {
    pub trace: SnrTrace,
    pub duplicates: usize,
}

/// Reads a `client,server,slot,snr_db` CSV. Ids are 0-based, slots 1-based;
/// grid dimensions are inferred from the largest ids present. Duplicate
/// rows are resolved last-write-wins.
pub fn load_trace(path: &Path) -> Result<LoadedTrace> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let expected = ["client", "server", "slot", "snr_db"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Malformed {
            kind: "trace",
            path: path.to_path_buf(),
            message: format!("header must be `{}`", expected.join(",")),
        });
    }
    let mut cells: HashMap<(u32, u32, u32), f64> = HashMap::new();
    let mut duplicates = 0;
    let (mut clients, mut servers, mut slots) = (0u32, 0u32, 0u32);
    for rec in rdr.deserialize::<TraceRecord>() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        if rec.slot == 0 {
            return Err(Error::Malformed {
                kind: "trace",
                path: path.to_path_buf(),
                message: "slots are 1-based".into(),
            });
        }
        if !rec.snr_db.is_finite() {
            return Err(Error::Malformed {
                kind: "trace",
                path: path.to_path_buf(),
                message: format!("non-finite snr for ({}, {}, {})", rec.client, rec.server, rec.slot),
            });
        }
        clients = clients.max(rec.client + 1);
        servers = servers.max(rec.server + 1);
        slots = slots.max(rec.slot);
        if cells.insert((rec.client, rec.server, rec.slot), rec.snr_db).is_some() {
            duplicates += 1;
        }
    }
    let mut missing = None;
    let trace = SnrTrace::from_fn(clients, servers, slots, |c, k, t| match cells.get(&(c.0, k.0, t)) {
        Some(v) => *v,
        None => {
            missing.get_or_insert((c, k, t));
            f64::NAN
        }
    });
    if let Some((client, server, slot)) = missing {
        return Err(Error::IncompleteTrace { client, server, slot });
    }
    Ok(LoadedTrace { trace, duplicates })
}

/// Synthesizes a trace from the layout in `cfg.radio`. Only initial
/// positions and lateral offsets are random.
pub fn generate_trace(cfg: &ScenarioConfig, seed: u64) -> SnrTrace {
    let radio = &cfg.radio;
    let layout = &radio.layout;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let road = layout.bs_spacing * cfg.num_servers as f64;
    let starts: Vec<(f64, f64)> = (0..cfg.num_clients)
        .map(|_| {
            let x = rng.gen_range(0.0..road);
            let y = if layout.lateral_max > layout.lateral_min {
                rng.gen_range(layout.lateral_min..layout.lateral_max)
            } else {
                layout.lateral_min
            };
            (x, y)
        })
        .collect();
    SnrTrace::from_fn(cfg.num_clients, cfg.num_servers, cfg.num_slots, |c, k, t| {
        let (x0, y) = starts[c.index()];
        let x = x0 + layout.speed * t as f64 * cfg.slot_len;
        let bs = (k.0 as f64 + 0.5) * layout.bs_spacing;
        let mut along = (x - bs).abs();
        if layout.ring {
            along %= road;
            along = along.min(road - along);
        }
        radio.snr_at_distance(along.hypot(y))
    })
}

/// Truncated Shannon mapping from SNR (dB) to bps/Hz.
pub fn spectral_efficiency(snr_db: f64, params: &RadioParams) -> f64 {
    if snr_db < params.snr_min {
        0.0
    } else if snr_db < params.snr_max {
        params.alpha * (1.0 + 10f64.powf(snr_db / 10.0)).log2()
    } else {
        params.thr_max
    }
}

/// Mbps deliverable on one resource block.
pub fn theoretical_throughput(snr_db: f64, params: &RadioParams) -> f64 {
    spectral_efficiency(snr_db, params) * params.rb_bandwidth
}

/// Proportional-fair share `Thr_i^2 / sum_j Thr_j * W` for every client
/// attached to one base station. All-zero links get zero.
pub fn effective_throughput(active: &[(ClientId, f64)], rb_budget: u32) -> Vec<(ClientId, f64)> {
    let total: f64 = active.iter().map(|(_, thr)| *thr).sum();
    active
        .iter()
        .map(|&(c, thr)| {
            let share = if total > 0.0 && thr > 0.0 {
                thr * thr / total * rb_budget as f64
            } else {
                0.0
            };
            (c, share)
        })
        .collect()
}

/// Resource blocks needed to carry `bitrate` on a link of `thr` Mbps/RB.
/// `None` marks a dead link.
pub fn rb_cost(bitrate: f64, thr: f64) -> Option<u32> {
    if !(thr > 0.0) {
        return None;
    }
    let ratio = bitrate / thr;
    // Absorb round-off so exact multiples do not round up.
    let blocks = (ratio - 1e-9 * ratio.max(1.0)).ceil().max(0.0);
    if blocks > u32::MAX as f64 {
        None
    } else {
        Some(blocks as u32)
    }
}
