//! Per-edge-server chunk caches and their replacement policies.
//!
//! A cache holds exact `(video, chunk, level)` triples weighted by their
//! size in megabits. Replacement runs once per slot, after all requests of
//! the slot have been served, so every policy sees the same request stream
//! within a slot.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BitrateLadder, CachePolicyKind, ChunkKey, ClientId, ScenarioConfig, ServerId, Slot, VideoId};
use crate::radio::map_csv_err;
use crate::workload::{retention_at, RetentionCurve};

#[derive(Debug, Clone, PartialEq)]
pub struct CacheEntry {
    pub key: ChunkKey,
    /// Megabits.
    pub weight: f64,
    pub last_access: Slot,
    pub access_count: u64,
    /// Caching value at the last RBCRH evaluation.
    pub value: f64,
    pub inserted_at: Slot,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CacheStats {
    pub server: ServerId,
    pub hits: u64,
    pub misses: u64,
    pub insertions: u64,
    pub evictions: u64,
    pub per_client_misses: BTreeMap<ClientId, u64>,
    pub per_client_lookups: BTreeMap<ClientId, u64>,
}

impl CacheStats {
    pub fn new(server: ServerId) -> Self {
        Self {
            server,
            hits: 0,
            misses: 0,
            insertions: 0,
            evictions: 0,
            per_client_misses: BTreeMap::new(),
            per_client_lookups: BTreeMap::new(),
        }
    }

    pub fn lookups(&self) -> u64 {
        self.hits + self.misses
    }
}

/// Changes made by one replacement round.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct UpdateReport {
    pub inserted: Vec<ChunkKey>,
    pub evicted: Vec<ChunkKey>,
}

#[derive(Debug, Clone)]
pub struct EdgeCache {
    pub server: ServerId,
    pub capacity: f64,
    pub policy: CachePolicyKind,
    entries: BTreeMap<ChunkKey, CacheEntry>,
    used: f64,
    pub stats: CacheStats,
}

/// Slack for floating-point capacity comparisons.
const CAP_EPS: f64 = 1e-9;

impl EdgeCache {
    pub fn new(server: ServerId, capacity: f64, policy: CachePolicyKind) -> Self {
        Self {
            server,
            capacity,
            policy,
            entries: BTreeMap::new(),
            used: 0.0,
            stats: CacheStats::new(server),
        }
    }

    /// Pure membership probe on the full triple.
    pub fn contains(&self, key: &ChunkKey) -> bool {
        self.entries.contains_key(key)
    }

    /// A committed chunk request: counts a hit or miss and, for LRU/LFU,
    /// refreshes the entry's recency and frequency.
    pub fn lookup(&mut self, client: ClientId, key: &ChunkKey, t: Slot) -> bool {
        *self.stats.per_client_lookups.entry(client).or_default() += 1;
        let tracks = matches!(self.policy, CachePolicyKind::Lru | CachePolicyKind::Lfu);
        match self.entries.get_mut(key) {
            Some(e) => {
                self.stats.hits += 1;
                if tracks {
                    e.last_access = t;
                    e.access_count += 1;
                }
                true
            }
            None => {
                self.stats.misses += 1;
                *self.stats.per_client_misses.entry(client).or_default() += 1;
                false
            }
        }
    }

    pub fn used(&self) -> f64 {
        self.used
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &CacheEntry> {
        self.entries.values()
    }

    pub fn keys(&self) -> impl Iterator<Item = &ChunkKey> {
        self.entries.keys()
    }

    pub fn entry(&self, key: &ChunkKey) -> Option<&CacheEntry> {
        self.entries.get(key)
    }

    pub fn fits(&self, weight: f64) -> bool {
        self.used + weight <= self.capacity + CAP_EPS
    }

    /// Inserts without eviction; `false` if absent room or already present.
    pub fn insert(&mut self, key: ChunkKey, weight: f64, t: Slot) -> bool {
        if self.entries.contains_key(&key) || !self.fits(weight) {
            return false;
        }
        self.entries.insert(
            key,
            CacheEntry {
                key,
                weight,
                last_access: t,
                access_count: 1,
                value: 0.0,
                inserted_at: t,
            },
        );
        self.used += weight;
        self.stats.insertions += 1;
        true
    }

    pub fn remove(&mut self, key: &ChunkKey) -> Option<CacheEntry> {
        let e = self.entries.remove(key)?;
        self.used -= e.weight;
        if self.entries.is_empty() {
            self.used = 0.0;
        }
        self.stats.evictions += 1;
        Some(e)
    }

    /// Replaces the contents with `keep`, retaining metadata of survivors.
    fn rebuild(&mut self, keep: Vec<(ChunkKey, f64, f64)>, t: Slot) -> UpdateReport {
        let keep_set: BTreeSet<ChunkKey> = keep.iter().map(|k| k.0).collect();
        let evict: Vec<ChunkKey> = self.entries.keys().filter(|k| !keep_set.contains(k)).copied().collect();
        let mut report = UpdateReport::default();
        for k in evict {
            self.remove(&k);
            report.evicted.push(k);
        }
        for (key, weight, value) in keep {
            if !self.entries.contains_key(&key) {
                let ok = self.insert(key, weight, t);
                debug_assert!(ok, "rebuild selection exceeds capacity");
                report.inserted.push(key);
            }
            if let Some(e) = self.entries.get_mut(&key) {
                e.value = value;
            }
        }
        report
    }

    pub fn snapshot(&self, ladder: &BitrateLadder) -> Vec<CacheDumpRow> {
        self.entries
            .values()
            .map(|e| CacheDumpRow {
                server: self.server.0,
                video: e.key.video.0,
                chunk: e.key.chunk,
                bitrate: ladder.rate(e.key.level),
                weight: e.weight,
                value: e.value,
                last_access: e.last_access,
                access_count: e.access_count,
            })
            .collect()
    }
}

/// One line of the cache dump.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CacheDumpRow {
    pub server: u32,
    pub video: u32,
    pub chunk: u32,
    pub bitrate: f64,
    pub weight: f64,
    pub value: f64,
    pub last_access: Slot,
    pub access_count: u64,
}

pub fn write_cache_dump(path: &Path, rows: &[CacheDumpRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| map_csv_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| map_csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// What the replacement heuristic knows about a client attached to the
/// server being updated.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientView {
    pub client: ClientId,
    pub video: VideoId,
    /// Current download-chunk index.
    pub chunk: u32,
    /// Chunk currently being fetched.
    pub key: ChunkKey,
    /// Whether `key` is coming from the origin.
    pub origin: bool,
    /// Slots spent at each ladder level on this server.
    pub access: Vec<u32>,
}

/// Clients whose future requests could hit `key`: same video, at or before
/// its chunk, not already fetching it.
pub fn candidate_set<'a>(clients: &'a [ClientView], key: &ChunkKey) -> Vec<&'a ClientView> {
    clients
        .iter()
        .filter(|j| j.video == key.video && j.chunk <= key.chunk && j.key != *key)
        .collect()
}

/// `1 - (P_act(j) - P_act(i))`, clamped.
pub fn p_reach(curve: &RetentionCurve, j_chunk: u32, i_chunk: u32, num_chunks: u32) -> Result<f64> {
    if j_chunk > i_chunk {
        return Err(Error::Precondition(format!(
            "reach probability needs j_chunk <= i_chunk (got {j_chunk} > {i_chunk})"
        )));
    }
    let pj = retention_at(curve, j_chunk, num_chunks)?;
    let pi = retention_at(curve, i_chunk, num_chunks)?;
    Ok((1.0 - (pj - pi)).clamp(0.0, 1.0))
}

/// Share of a client's slots on this server spent at `level`.
pub fn p_acc(access: &[u32], level: u8) -> f64 {
    let total: u64 = access.iter().map(|&n| n as u64).sum();
    if total == 0 {
        return 0.0;
    }
    access.get(level as usize).copied().unwrap_or(0) as f64 / total as f64
}

/// Union of the new-arrival event and independent peer events
/// `P_reach * P_acc`, in complement-product form.
pub fn p_cache(p_act_chunk: f64, ladder_len: usize, events: &[(f64, f64)]) -> f64 {
    let miss_new = 1.0 - p_act_chunk / ladder_len as f64;
    let miss_peers: f64 = events.iter().map(|(reach, acc)| 1.0 - reach * acc).product();
    (1.0 - miss_new * miss_peers).clamp(0.0, 1.0)
}

/// Caching value of `key` on a server given the clients attached to it.
pub fn chunk_value(cfg: &ScenarioConfig, clients: &[ClientView], key: &ChunkKey) -> f64 {
    let video = cfg.catalog.get(key.video);
    let curve = RetentionCurve::new(video.curve);
    let n = cfg.chunks_of(key.video);
    let p_act = retention_at(&curve, key.chunk, n).expect("key chunk in range");
    let events: Vec<(f64, f64)> = candidate_set(clients, key)
        .into_iter()
        .map(|j| {
            let reach = p_reach(&curve, j.chunk, key.chunk, n).expect("candidate precedes key");
            (reach, p_acc(&j.access, key.level))
        })
        .collect();
    p_cache(p_act, cfg.ladder.len(), &events)
}

/// Retention-based replacement: values every resident chunk and every chunk
/// fetched from the origin by an attached client, then refills the cache in
/// decreasing value order, skipping chunks that no longer fit.
pub fn rbcrh_update(cache: &mut EdgeCache, cfg: &ScenarioConfig, clients: &[ClientView], t: Slot) -> UpdateReport {
    let mut keys: BTreeSet<ChunkKey> = cache.keys().copied().collect();
    keys.extend(clients.iter().filter(|c| c.origin).map(|c| c.key));
    let mut scored: Vec<(ChunkKey, f64, f64)> = keys
        .into_iter()
        .map(|k| (k, cfg.chunk_weight(&k), chunk_value(cfg, clients, &k)))
        .collect();
    scored.sort_by(|a, b| {
        b.2.total_cmp(&a.2)
            .then(b.0.level.cmp(&a.0.level))
            .then(a.0.chunk.cmp(&b.0.chunk))
            .then(a.0.video.cmp(&b.0.video))
    });
    let mut room = cache.capacity;
    let keep: Vec<_> = scored
        .into_iter()
        .filter(|(_, w, _)| {
            if *w <= room + CAP_EPS {
                room -= w;
                true
            } else {
                false
            }
        })
        .collect();
    cache.rebuild(keep, t)
}

/// Classic recency/frequency replacement of this slot's misses, admitted in
/// request order. Oversized chunks are never admitted.
pub fn recency_update(cache: &mut EdgeCache, cfg: &ScenarioConfig, misses: &[ChunkKey], t: Slot) -> UpdateReport {
    let lfu = cache.policy == CachePolicyKind::Lfu;
    let mut report = UpdateReport::default();
    for key in misses {
        let weight = cfg.chunk_weight(key);
        if cache.contains(key) || weight > cache.capacity + CAP_EPS {
            continue;
        }
        while !cache.fits(weight) {
            let victim = cache
                .entries()
                .min_by(|a, b| {
                    let freq = if lfu {
                        a.access_count.cmp(&b.access_count)
                    } else {
                        std::cmp::Ordering::Equal
                    };
                    freq.then(a.last_access.cmp(&b.last_access)).then(a.key.cmp(&b.key))
                })
                .map(|e| e.key)
                .expect("non-empty cache while over capacity");
            cache.remove(&victim);
            report.evicted.push(victim);
        }
        cache.insert(*key, weight, t);
        report.inserted.push(*key);
    }
    report
}

pub fn lru_update(cache: &mut EdgeCache, cfg: &ScenarioConfig, misses: &[ChunkKey], t: Slot) -> UpdateReport {
    debug_assert_eq!(cache.policy, CachePolicyKind::Lru);
    recency_update(cache, cfg, misses, t)
}

pub fn lfu_update(cache: &mut EdgeCache, cfg: &ScenarioConfig, misses: &[ChunkKey], t: Slot) -> UpdateReport {
    debug_assert_eq!(cache.policy, CachePolicyKind::Lfu);
    recency_update(cache, cfg, misses, t)
}

/// An item offered to the one-slot-lookahead knapsack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnapsackItem {
    pub weight: f64,
    /// Next-slot requests this item would serve.
    pub demand: u64,
    pub resident: bool,
}

/// Exact 0/1 knapsack maximizing, in order: requests served, resident
/// weight kept, total weight kept. Returns the chosen item indices.
pub fn knapsack_select(items: &[KnapsackItem], capacity: f64) -> Vec<usize> {
    if items.is_empty() {
        return Vec::new();
    }
    let (weights, cap) = discretize(items.iter().map(|i| i.weight), capacity);
    let n = items.len();
    let cap = cap as usize;
    type Score = (u64, u64, u64);
    let mut best: Vec<Score> = vec![(0, 0, 0); cap + 1];
    let mut take = vec![vec![false; cap + 1]; n];
    for (idx, item) in items.iter().enumerate() {
        let w = weights[idx] as usize;
        if w > cap {
            continue;
        }
        let gain: Score = (item.demand, if item.resident { w as u64 } else { 0 }, w as u64);
        for c in (w..=cap).rev() {
            let prev = best[c - w];
            let cand = (prev.0 + gain.0, prev.1 + gain.1, prev.2 + gain.2);
            if cand > best[c] {
                best[c] = cand;
                take[idx][c] = true;
            }
        }
    }
    let mut chosen = Vec::new();
    let mut c = cap;
    for idx in (0..n).rev() {
        if take[idx][c] {
            chosen.push(idx);
            c -= weights[idx] as usize;
        }
    }
    chosen.reverse();
    chosen
}

/// Maps real weights onto a common integer grid. Exact when every weight is
/// a multiple of some power-of-ten resolution down to 1e-4; otherwise
/// weights are rounded up so the selection stays feasible.
fn discretize(weights: impl Iterator<Item = f64>, capacity: f64) -> (Vec<u64>, u64) {
    let weights: Vec<f64> = weights.collect();
    const MAX_CELLS: f64 = 4.0e6;
    let exact = (0..=4)
        .map(|p| 10f64.powi(p))
        .find(|s| weights.iter().all(|w| ((w * s) - (w * s).round()).abs() < 1e-6) && capacity * s <= MAX_CELLS * 1e3);
    let (scaled, cap) = match exact {
        Some(s) => {
            let scaled: Vec<u64> = weights.iter().map(|w| (w * s).round() as u64).collect();
            (scaled, ((capacity * s) + 1e-6).floor() as u64)
        }
        None => {
            let s = MAX_CELLS / capacity.max(1e-12);
            let scaled: Vec<u64> = weights.iter().map(|w| (w * s - 1e-9).ceil() as u64).collect();
            (scaled, (capacity * s).floor() as u64)
        }
    };
    let g = scaled.iter().fold(0u64, |g, &w| gcd(g, w));
    if g > 1 {
        (scaled.iter().map(|w| w / g).collect(), cap / g)
    } else {
        (scaled, cap)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Keeps the subset of residents and fresh downloads that serves the most
/// of the next slot's requests (`demand`, per key). Among equally good
/// subsets it prefers keeping residents, then more cached volume.
pub fn opt1_update(
    cache: &mut EdgeCache,
    cfg: &ScenarioConfig,
    downloads: &[ChunkKey],
    demand: &BTreeMap<ChunkKey, u64>,
    t: Slot,
) -> UpdateReport {
    let mut keys: BTreeSet<ChunkKey> = cache.keys().copied().collect();
    keys.extend(downloads.iter().copied());
    let keys: Vec<ChunkKey> = keys.into_iter().collect();
    let items: Vec<KnapsackItem> = keys
        .iter()
        .map(|k| KnapsackItem {
            weight: cfg.chunk_weight(k),
            demand: demand.get(k).copied().unwrap_or(0),
            resident: cache.contains(k),
        })
        .collect();
    let keep = knapsack_select(&items, cache.capacity)
        .into_iter()
        .map(|i| (keys[i], items[i].weight, items[i].demand as f64))
        .collect();
    cache.rebuild(keep, t)
}

/// Seeds a cache with random distinct triples up to `fixed_fill * Q`.
pub fn fixed_fill(cache: &mut EdgeCache, cfg: &ScenarioConfig, rng: &mut impl Rng) {
    let mut all = Vec::new();
    for v in &cfg.catalog.videos {
        for chunk in 1..=cfg.chunks_of(v.id) {
            for level in 0..cfg.ladder.len() as u8 {
                all.push(ChunkKey::new(v.id, chunk, level));
            }
        }
    }
    all.shuffle(rng);
    let budget = cfg.fixed_fill * cache.capacity;
    for key in all {
        let w = cfg.chunk_weight(&key);
        if cache.used() + w <= budget + CAP_EPS {
            cache.insert(key, w, 0);
        }
    }
    cache.stats.insertions = 0;
}
