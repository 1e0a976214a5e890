//! Per-client and aggregate outcome measures, all derived from the session
//! records and the slot ledger of a finished run.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::cache::CacheStats;
use crate::error::{Error, Result};
use crate::model::{BitrateLadder, ClientId, ClientSession, ScenarioConfig, SlotLedger, VideoId};
use crate::radio::map_csv_err;
use crate::scheduler::RunOutput;

/// Mean bitrate over the chunks a client downloaded; `None` without chunks.
pub fn avg_quality(session: &ClientSession, ladder: &BitrateLadder) -> Option<f64> {
    let h = &session.bitrate_history;
    (!h.is_empty()).then(|| h.iter().map(|&l| ladder.rate(l)).sum::<f64>() / h.len() as f64)
}

/// `(sum of |r(p) - r(p-1)|, number of changes)` over consecutive chunks.
pub fn switching(session: &ClientSession, ladder: &BitrateLadder) -> (f64, u32) {
    session.bitrate_history.windows(2).fold((0.0, 0), |(mag, freq), w| {
        let d = (ladder.rate(w[1]) - ladder.rate(w[0])).abs();
        (mag + d, freq + u32::from(w[0] != w[1]))
    })
}

/// Sum over the client's slots of `|r - peer mean|`.
pub fn fairness_deviation(ledger: &SlotLedger, client: ClientId) -> f64 {
    ledger.rows_for(client).map(|r| (r.bitrate - r.peer_mean).abs()).sum()
}

/// Megabits fetched from the origin on behalf of the client.
pub fn backhaul_traffic(ledger: &SlotLedger, client: ClientId, slot_len: f64) -> f64 {
    ledger
        .rows_for(client)
        .filter(|r| r.origin)
        .map(|r| r.bitrate * slot_len)
        .sum()
}

/// `100 * misses / lookups` over chunk requests; `None` without lookups.
pub fn miss_percentage(stats: &[CacheStats]) -> Option<f64> {
    let (miss, total) = stats
        .iter()
        .fold((0u64, 0u64), |(m, n), s| (m + s.misses, n + s.lookups()));
    (total > 0).then(|| 100.0 * miss as f64 / total as f64)
}

/// Jain's index of the given values; 1 when all are zero.
pub fn fairness_index(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "fairness index of no clients");
    let sum: f64 = values.iter().sum();
    let sq: f64 = values.iter().map(|v| v * v).sum();
    if sq == 0.0 {
        1.0
    } else {
        sum * sum / (values.len() as f64 * sq)
    }
}

/// Joint objective of one client with its average self-tuned weights.
pub fn client_utility(cfg: &ScenarioConfig, session: &ClientSession, ledger: &SlotLedger) -> f64 {
    let Some(aq) = avg_quality(session, &cfg.ladder) else {
        return 0.0;
    };
    let n = session.decisions.max(1) as f64;
    let [rho, omega, gamma] = session.weight_sums.map(|s| s / n);
    let (e, _) = switching(session, &cfg.ladder);
    let f = fairness_deviation(ledger, session.id);
    let beta = cfg.effective_beta();
    beta * (rho * aq - omega * e - gamma * f) - (1.0 - beta) * session.backhaul
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClientReport {
    pub client: ClientId,
    pub video: VideoId,
    pub arrival: u32,
    pub departure: u32,
    pub avg_bitrate: Option<f64>,
    pub backhaul_mb: f64,
    pub switch_freq: u32,
    pub switch_mag: f64,
    pub startup_slots: Option<u32>,
    pub stalls: u32,
    pub miss_ratio: Option<f64>,
    pub deviation: f64,
    pub lookups: u64,
    pub misses: u64,
    pub pressure_events: u32,
    pub utility: f64,
}

/// Column order of the per-client CSV.
#[derive(Serialize)]
struct ClientCsvRow {
    client: u32,
    video: u32,
    arrival: u32,
    departure: u32,
    avg_bitrate: Option<f64>,
    backhaul_mb: f64,
    switch_freq: u32,
    switch_mag: f64,
    startup_slots: Option<u32>,
    stalls: u32,
    miss_ratio: Option<f64>,
}

pub fn client_reports(cfg: &ScenarioConfig, out: &RunOutput) -> Vec<ClientReport> {
    let mut lookups: BTreeMap<ClientId, u64> = BTreeMap::new();
    let mut misses: BTreeMap<ClientId, u64> = BTreeMap::new();
    for s in &out.ledger.cache_stats {
        for (c, n) in &s.per_client_lookups {
            *lookups.entry(*c).or_default() += n;
        }
        for (c, n) in &s.per_client_misses {
            *misses.entry(*c).or_default() += n;
        }
    }
    out.sessions
        .iter()
        .map(|s| {
            let (mag, freq) = switching(s, &cfg.ladder);
            let l = lookups.get(&s.id).copied().unwrap_or(0);
            let m = misses.get(&s.id).copied().unwrap_or(0);
            ClientReport {
                client: s.id,
                video: s.video,
                arrival: s.arrival,
                departure: s.departure,
                avg_bitrate: avg_quality(s, &cfg.ladder),
                backhaul_mb: backhaul_traffic(&out.ledger, s.id, cfg.slot_len),
                switch_freq: freq,
                switch_mag: mag,
                startup_slots: s.startup_delay,
                stalls: s.stalls,
                miss_ratio: (l > 0).then(|| m as f64 / l as f64),
                deviation: fairness_deviation(&out.ledger, s.id),
                lookups: l,
                misses: m,
                pressure_events: s.pressure_events,
                utility: client_utility(cfg, s, &out.ledger),
            }
        })
        .collect()
}

/// One replication reduced to per-client rows and scalar metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationReport {
    pub seed: u64,
    pub clients: Vec<ClientReport>,
    pub metrics: BTreeMap<&'static str, f64>,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

pub fn summarize(cfg: &ScenarioConfig, out: &RunOutput, seed: u64) -> ReplicationReport {
    let clients = client_reports(cfg, out);
    let mut m = BTreeMap::new();
    let served: Vec<&ClientReport> = clients.iter().filter(|c| c.avg_bitrate.is_some()).collect();
    let aqs: Vec<f64> = served.iter().filter_map(|c| c.avg_bitrate).collect();
    if let Some(v) = mean(aqs.iter().copied()) {
        m.insert("avg_bitrate", v);
        m.insert("jain_index", fairness_index(&aqs));
    }
    if let Some(v) = mean(served.iter().map(|c| c.backhaul_mb)) {
        m.insert("avg_backhaul_mb", v);
        m.insert(
            "switch_freq",
            mean(served.iter().map(|c| c.switch_freq as f64)).unwrap(),
        );
        m.insert("switch_mag", mean(served.iter().map(|c| c.switch_mag)).unwrap());
        m.insert("stalls", mean(served.iter().map(|c| c.stalls as f64)).unwrap());
        m.insert(
            "pressure_events",
            mean(served.iter().map(|c| c.pressure_events as f64)).unwrap(),
        );
        let rows = out.ledger.rows.len().max(1) as f64;
        m.insert("mean_deviation", served.iter().map(|c| c.deviation).sum::<f64>() / rows);
    }
    if let Some(v) = mean(served.iter().filter_map(|c| c.startup_slots.map(f64::from))) {
        m.insert("startup_slots", v);
    }
    m.insert("total_backhaul_mb", clients.iter().map(|c| c.backhaul_mb).sum());
    if let Some(v) = miss_percentage(&out.ledger.cache_stats) {
        m.insert("miss_pct", v);
    }
    m.insert("total_utility", out.total_utility);
    ReplicationReport {
        seed,
        clients,
        metrics: m,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSummary {
    pub mean: f64,
    /// 95% t-interval half-width; absent for a single replication.
    pub ci95: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateReport {
    pub replications: usize,
    pub metrics: BTreeMap<String, MetricSummary>,
}

impl AggregateReport {
    pub fn mean(&self, metric: &str) -> Option<f64> {
        self.metrics.get(metric).map(|m| m.mean)
    }
}

/// Mean and t-distribution 95% half-width of a sample.
pub fn mean_ci(xs: &[f64]) -> MetricSummary {
    let n = xs.len();
    assert!(n > 0, "empty sample");
    let m = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return MetricSummary { mean: m, ci95: None };
    }
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("df >= 1")
        .inverse_cdf(0.975);
    MetricSummary {
        mean: m,
        ci95: Some(t * (var / n as f64).sqrt()),
    }
}

/// Combines replications metric by metric; a metric missing from some
/// replications is summarized over those that have it.
pub fn aggregate(reports: &[ReplicationReport]) -> AggregateReport {
    assert!(!reports.is_empty(), "aggregate of no replications");
    let mut samples: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in reports {
        for (k, v) in &r.metrics {
            samples.entry(k).or_default().push(*v);
        }
    }
    AggregateReport {
        replications: reports.len(),
        metrics: samples
            .into_iter()
            .map(|(k, xs)| (k.to_string(), mean_ci(&xs)))
            .collect(),
    }
}

pub fn write_client_csv(path: &Path, clients: &[ClientReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| map_csv_err(path, e))?;
    for c in clients {
        w.serialize(ClientCsvRow {
            client: c.client.0,
            video: c.video.0,
            arrival: c.arrival,
            departure: c.departure,
            avg_bitrate: c.avg_bitrate,
            backhaul_mb: c.backhaul_mb,
            switch_freq: c.switch_freq,
            switch_mag: c.switch_mag,
            startup_slots: c.startup_slots,
            stalls: c.stalls,
            miss_ratio: c.miss_ratio,
        })
        .map_err(|e| map_csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_aggregate_json(path: &Path, report: &AggregateReport) -> Result<()> {
    let text = serde_json::to_string_pretty(report).expect("serializable report");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
