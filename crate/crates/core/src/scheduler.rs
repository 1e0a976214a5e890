//! The slot loop and the cache-aware bitrate decision.
//!
//! Each slot runs in two phases. [`World::plan_slot`] maps clients to base
//! stations, shares radio capacity, and picks bitrates for clients at a
//! chunk boundary, reading caches through pure membership probes only.
//! [`World::run_slot`] then commits the plan (cache lookups, buffers,
//! traffic, ledger) and runs the configured cache replacement. Keeping
//! planning side-effect free lets the one-slot-lookahead cache oracle
//! replay the next slot's decisions against hypothetical cache contents.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cache::{self, ClientView, EdgeCache};
use crate::error::{Error, Result};
use crate::metrics;
use crate::model::{
    chunk_index_at, BitrateLadder, CachePolicyKind, ChunkKey, ChunkLock, ClientId, ClientSession, FeasibilityGate,
    LedgerRow, ScenarioConfig, ServerId, ServerSlot, Slot, SlotLedger,
};
use crate::radio::{self, SnrTrace};
use crate::workload::{self, ArrivalPlan};

/// Self-tuned QoE sub-weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub rho: f64,
    pub omega: f64,
    pub gamma: f64,
}

/// `rho` grows as `r` nears `R_max`; `omega` and `gamma` grow with the
/// distance to the previous bitrate and to the peer mean.
pub fn self_tune_weights(r: f64, r_prev: f64, r_bar: f64, ladder: &BitrateLadder) -> Weights {
    let span = ladder.span();
    if span <= 0.0 {
        return Weights {
            rho: 1.0,
            omega: 0.0,
            gamma: 0.0,
        };
    }
    Weights {
        rho: (1.0 - (ladder.max() - r) / span).clamp(0.0, 1.0),
        omega: ((r - r_prev).abs() / span).clamp(0.0, 1.0),
        gamma: ((r - r_bar).abs() / span).clamp(0.0, 1.0),
    }
}

/// `beta * QE - (1 - beta) * Data`, where `Data` is zero for a cached chunk.
pub fn candidate_utility(r: f64, r_prev: f64, r_bar: f64, cached: bool, w: &Weights, beta: f64) -> f64 {
    let qe = w.rho * r - w.omega * (r - r_prev).abs() - w.gamma * (r - r_bar).abs();
    let data = if cached { 0.0 } else { r };
    beta * qe - (1.0 - beta) * data
}

/// Switching a buffer-based controller would make from `r_prev`: the
/// buffer fill fraction picks a ladder rung linearly. Unbounded (`R_max -
/// R_min`) before the first chunk.
pub fn switching_threshold(buffer: f64, buffer_cap: f64, r_prev: Option<f64>, ladder: &BitrateLadder) -> f64 {
    let Some(r_prev) = r_prev else {
        return ladder.span();
    };
    let n = ladder.len();
    let rung = ((buffer / buffer_cap).clamp(0.0, 1.0) * n as f64).ceil() as usize;
    let r_bba = ladder.rates()[rung.clamp(1, n) - 1];
    (r_bba - r_prev).abs()
}

/// Mean effective throughput over the last chunk's slots on `server`, or
/// `current` without such history.
pub fn estimate_throughput(history: &[(ServerId, f64)], server: ServerId, current: f64) -> f64 {
    let (sum, n) = history
        .iter()
        .filter(|(k, _)| *k == server)
        .fold((0.0, 0usize), |(s, n), (_, thr)| (s + thr, n + 1));
    if n == 0 {
        current
    } else {
        sum / n as f64
    }
}

/// Highest-SNR base station at a chunk boundary (lowest id on ties);
/// otherwise the server of the chunk in progress.
pub fn map_server(session: &ClientSession, t: Slot, trace: &SnrTrace, chunk_slots: u32) -> ServerId {
    if !session.at_chunk_boundary(t, chunk_slots) {
        if let Some(k) = session.server {
            return k;
        }
    }
    let mut best = ServerId(0);
    let mut best_snr = f64::NEG_INFINITY;
    for k in 0..trace.servers() {
        let snr = trace.snr(session.id, ServerId(k), t);
        if snr > best_snr {
            best = ServerId(k);
            best_snr = snr;
        }
    }
    best
}

/// Startup buffering: no playback, so the buffer only fills. Records the
/// startup delay once the buffer first reaches capacity.
pub fn startup_buffer_step(session: &mut ClientSession, thr_hat: f64, slot_len: f64, buffer_cap: f64, t: Slot) {
    session.buffer = (session.buffer + thr_hat * slot_len).min(buffer_cap);
    if !session.buffer_full && session.buffer >= buffer_cap * (1.0 - 1e-12) {
        session.buffer = buffer_cap;
        session.buffer_full = true;
        session.startup_delay = Some(t - session.arrival);
    }
}

/// Playback drains at `r` while downloads refill at `thr_hat`. Returns
/// `true` on a stall (buffer driven to zero), which is counted and leaves
/// the buffer empty.
pub fn steady_buffer_step(session: &mut ClientSession, thr_hat: f64, r: f64, slot_len: f64, buffer_cap: f64) -> bool {
    let next = (session.buffer + (thr_hat - r) * slot_len).min(buffer_cap);
    if next <= 0.0 {
        session.buffer = 0.0;
        session.stalls += 1;
        true
    } else {
        session.buffer = next;
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tier {
    /// First chunk: highest bitrate the radio budget admits.
    First,
    /// Within the switching threshold and fair to peers.
    Balanced,
    /// Within the switching threshold.
    Smooth,
    /// Feasible only.
    Feasible,
    /// Nothing feasible; lowest bitrate with whatever blocks remain.
    Fallback,
}

/// Everything the bitrate decision for one client looks at.
pub struct SelectionInput<'a> {
    pub ladder: &'a BitrateLadder,
    pub first_chunk: bool,
    pub r_prev: Option<f64>,
    pub r_bar: f64,
    /// Mbps per resource block on the serving link.
    pub thr: f64,
    pub thr_hat: f64,
    pub est_thr: f64,
    pub buffer: f64,
    pub buffer_cap: f64,
    pub slot_len: f64,
    pub rb_remaining: u32,
    pub beta: f64,
    pub fairness_threshold: f64,
    pub gate: FeasibilityGate,
    /// Whether the requested chunk is cached at a given ladder level.
    pub cached: &'a dyn Fn(u8) -> bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub level: u8,
    pub rb: u32,
    pub tier: Tier,
    pub utility: f64,
}

/// The three-tier utility scan over the ladder, highest bitrate first.
/// Ties keep the higher bitrate.
pub fn select_bitrate(inp: &SelectionInput<'_>) -> Selection {
    let ladder = inp.ladder;
    let cost = |level: u8| radio::rb_cost(ladder.rate(level), inp.thr);
    let rb_ok = |level: u8| cost(level).is_some_and(|c| c <= inp.rb_remaining);

    if inp.first_chunk {
        if let Some(level) = (0..ladder.len() as u8).rev().find(|&l| rb_ok(l)) {
            return Selection {
                level,
                rb: cost(level).unwrap(),
                tier: Tier::First,
                utility: f64::NAN,
            };
        }
    } else {
        let r_prev = inp.r_prev.unwrap_or(ladder.max());
        let delta_s = switching_threshold(inp.buffer, inp.buffer_cap, inp.r_prev, ladder);
        let span = ladder.span();
        let bound = match inp.gate {
            FeasibilityGate::Literal => inp.est_thr.max(inp.thr_hat).max(inp.buffer / inp.slot_len),
            FeasibilityGate::Throughput => inp.est_thr.max(inp.thr_hat),
        };
        let feasible = |l: u8| rb_ok(l) && ladder.rate(l) <= bound * (1.0 + 1e-12);
        let smooth = |l: u8| (ladder.rate(l) - r_prev).abs() <= delta_s + 1e-12;
        let fair = |l: u8| {
            let dev = if span > 0.0 {
                (ladder.rate(l) - inp.r_bar).abs() / span
            } else {
                0.0
            };
            1.0 - dev >= inp.fairness_threshold - 1e-12
        };
        let tiers: [(Tier, &dyn Fn(u8) -> bool); 3] = [
            (Tier::Balanced, &|l| smooth(l) && fair(l)),
            (Tier::Smooth, &smooth),
            (Tier::Feasible, &|_| true),
        ];
        for (tier, pass) in tiers {
            let mut best: Option<(u8, f64)> = None;
            for l in (0..ladder.len() as u8).rev() {
                if !feasible(l) || !pass(l) {
                    continue;
                }
                let r = ladder.rate(l);
                let w = self_tune_weights(r, r_prev, inp.r_bar, ladder);
                let u = candidate_utility(r, r_prev, inp.r_bar, (inp.cached)(l), &w, inp.beta);
                if best.is_none_or(|(_, b)| u > b) {
                    best = Some((l, u));
                }
            }
            if let Some((level, utility)) = best {
                return Selection {
                    level,
                    rb: cost(level).unwrap(),
                    tier,
                    utility,
                };
            }
        }
    }
    Selection {
        level: 0,
        rb: cost(0).map_or(0, |c| c.min(inp.rb_remaining)),
        tier: Tier::Fallback,
        utility: f64::NAN,
    }
}

/// A committed bitrate decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub client: ClientId,
    pub slot: Slot,
    pub chunk: u32,
    pub level: u8,
    pub origin: bool,
    pub utility: f64,
    pub rb: u32,
    pub tier: Tier,
}

/// One active client's part of a slot plan.
#[derive(Debug, Clone)]
pub struct ClientStep {
    pub client: ClientId,
    pub server: ServerId,
    pub thr: f64,
    pub thr_hat: f64,
    pub peer_mean: Option<f64>,
    pub chunk: u32,
    /// Set when the client starts a new chunk this slot.
    pub selection: Option<Selection>,
    pub key: ChunkKey,
    pub rb: u32,
}

#[derive(Debug, Clone)]
pub struct SlotPlan {
    pub t: Slot,
    pub steps: Vec<ClientStep>,
}

/// Results of a finished run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub sessions: Vec<ClientSession>,
    pub ledger: SlotLedger,
    pub caches: Vec<EdgeCache>,
    pub decisions: Vec<Decision>,
    pub total_utility: f64,
}

#[derive(Debug, Clone)]
pub struct World {
    pub cfg: ScenarioConfig,
    pub trace: SnrTrace,
    pub sessions: Vec<ClientSession>,
    pub caches: Vec<EdgeCache>,
    pub ledger: SlotLedger,
    pub decisions: Vec<Decision>,
    pub total_utility: f64,
    /// Last simulated slot.
    pub t: Slot,
}

impl World {
    /// Builds a world from explicit inputs. The seed only drives the fixed
    /// cache fill.
    pub fn new(cfg: ScenarioConfig, trace: SnrTrace, plan: &ArrivalPlan, seed: u64) -> Result<Self> {
        cfg.validate()?;
        plan.validate(&cfg)?;
        if trace.clients() < cfg.num_clients || trace.servers() != cfg.num_servers || trace.slots() < cfg.num_slots {
            return Err(Error::config(
                "trace",
                format!(
                    "trace covers {} clients x {} servers x {} slots, scenario needs {} x {} x {}",
                    trace.clients(),
                    trace.servers(),
                    trace.slots(),
                    cfg.num_clients,
                    cfg.num_servers,
                    cfg.num_slots
                ),
            ));
        }
        let sessions = plan
            .clients
            .iter()
            .map(|p| ClientSession::new(p.client, p.video, p.arrival, p.departure))
            .collect();
        let mut caches: Vec<EdgeCache> = (0..cfg.num_servers)
            .map(|k| EdgeCache::new(ServerId(k), cfg.cache_size, cfg.cache_policy))
            .collect();
        if cfg.cache_policy == CachePolicyKind::Fixed {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(2);
            for c in &mut caches {
                cache::fixed_fill(c, &cfg, &mut rng);
            }
        }
        Ok(Self {
            cfg,
            trace,
            sessions,
            caches,
            ledger: SlotLedger::default(),
            decisions: Vec::new(),
            total_utility: 0.0,
            t: 0,
        })
    }

    /// Synthetic trace and arrival plan, both derived from `seed`.
    pub fn generate(cfg: ScenarioConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let trace = radio::generate_trace(&cfg, seed);
        let plan = workload::build_arrival_plan(&cfg, seed)?;
        Self::new(cfg, trace, &plan, seed)
    }

    fn chunk_slots(&self) -> u32 {
        self.cfg.chunk_slots()
    }

    /// Decides slot `t` against the given caches without changing state.
    pub fn plan_slot(&self, t: Slot, caches: &[EdgeCache]) -> SlotPlan {
        let cfg = &self.cfg;
        let cs = self.chunk_slots();
        let active: Vec<&ClientSession> = self.sessions.iter().filter(|s| s.is_active(t)).collect();

        // slot-start peer bitrates
        let committed: Vec<Option<f64>> = active
            .iter()
            .map(|s| s.last_level().map(|l| cfg.ladder.rate(l)))
            .collect();
        let (sum, count) = committed
            .iter()
            .flatten()
            .fold((0.0, 0usize), |(s, n), r| (s + r, n + 1));

        let servers: Vec<ServerId> = active.iter().map(|s| map_server(s, t, &self.trace, cs)).collect();
        let thr: Vec<f64> = active
            .iter()
            .zip(&servers)
            .map(|(s, k)| radio::theoretical_throughput(self.trace.snr(s.id, *k, t), &cfg.radio))
            .collect();
        let mut thr_hat = vec![0.0; active.len()];
        let mut remaining = vec![cfg.rb_per_slot; cfg.num_servers as usize];
        for k in 0..cfg.num_servers {
            let idx: Vec<usize> = (0..active.len()).filter(|&i| servers[i] == ServerId(k)).collect();
            let shares = radio::effective_throughput(
                &idx.iter().map(|&i| (active[i].id, thr[i])).collect::<Vec<_>>(),
                cfg.rb_per_slot,
            );
            for (&i, (_, share)) in idx.iter().zip(shares) {
                thr_hat[i] = share;
            }
        }
        // chunks in progress hold their blocks first
        for (i, s) in active.iter().enumerate() {
            if !s.at_chunk_boundary(t, cs) {
                let lock = s.current.expect("mid-chunk client holds a lock");
                let r = &mut remaining[servers[i].index()];
                *r = r.saturating_sub(lock.rb);
            }
        }

        let beta = cfg.effective_beta();
        let mut steps = Vec::with_capacity(active.len());
        for (i, s) in active.iter().enumerate() {
            let k = servers[i];
            let peer_mean = match committed[i] {
                Some(own) if count > 1 => Some((sum - own) / (count - 1) as f64),
                None if count > 0 => Some(sum / count as f64),
                _ => None,
            };
            let chunk = chunk_index_at(s, t, cs).expect("active session");
            if s.at_chunk_boundary(t, cs) {
                let r_prev = s.last_level().map(|l| cfg.ladder.rate(l));
                let cache = &caches[k.index()];
                let probe = |level: u8| cache.contains(&ChunkKey::new(s.video, chunk, level));
                let sel = select_bitrate(&SelectionInput {
                    ladder: &cfg.ladder,
                    first_chunk: chunk == 1,
                    r_prev,
                    r_bar: peer_mean.or(r_prev).unwrap_or(cfg.ladder.max()),
                    thr: thr[i],
                    thr_hat: thr_hat[i],
                    est_thr: estimate_throughput(&s.chunk_thr, k, thr_hat[i]),
                    buffer: s.buffer,
                    buffer_cap: cfg.buffer_cap,
                    slot_len: cfg.slot_len,
                    rb_remaining: remaining[k.index()],
                    beta,
                    fairness_threshold: cfg.fairness_threshold,
                    gate: cfg.feasibility_gate,
                    cached: &probe,
                });
                remaining[k.index()] -= sel.rb;
                steps.push(ClientStep {
                    client: s.id,
                    server: k,
                    thr: thr[i],
                    thr_hat: thr_hat[i],
                    peer_mean,
                    chunk,
                    selection: Some(sel),
                    key: ChunkKey::new(s.video, chunk, sel.level),
                    rb: sel.rb,
                });
            } else {
                let lock = s.current.expect("mid-chunk client holds a lock");
                steps.push(ClientStep {
                    client: s.id,
                    server: k,
                    thr: thr[i],
                    thr_hat: thr_hat[i],
                    peer_mean,
                    chunk,
                    selection: None,
                    key: lock.key,
                    rb: lock.rb,
                });
            }
        }
        SlotPlan { t, steps }
    }

    /// Simulates the next slot.
    pub fn run_slot(&mut self) {
        let t = self.t + 1;
        assert!(t <= self.cfg.num_slots, "run past the last slot");
        let plan = self.plan_slot(t, &self.caches);
        self.commit(&plan);
        self.update_caches(&plan);
        self.record_servers(&plan);
        self.t = t;
        for s in self.sessions.iter().filter(|s| s.departure == t) {
            self.total_utility += metrics::client_utility(&self.cfg, s, &self.ledger);
        }
    }

    fn commit(&mut self, plan: &SlotPlan) {
        let t = plan.t;
        let cfg = &self.cfg;
        let mut origins = vec![false; plan.steps.len()];
        for (n, step) in plan.steps.iter().enumerate() {
            let s = &mut self.sessions[step.client.index()];
            let r = cfg.ladder.rate(step.key.level);
            let new_chunk = step.selection.is_some();
            if let Some(sel) = step.selection {
                let origin = !self.caches[step.server.index()].lookup(s.id, &step.key, t);
                s.current = Some(ChunkLock {
                    key: step.key,
                    server: step.server,
                    origin,
                    rb: sel.rb,
                    decided_at: t,
                });
                s.server = Some(step.server);
                s.bitrate_history.push(sel.level);
                s.chunk_thr.clear();
                if sel.tier == Tier::Fallback {
                    s.pressure_events += 1;
                }
                let r_prev = s
                    .bitrate_history
                    .iter()
                    .rev()
                    .nth(1)
                    .map(|&l| cfg.ladder.rate(l))
                    .unwrap_or(r);
                let w = self_tune_weights(r, r_prev, step.peer_mean.unwrap_or(r_prev), &cfg.ladder);
                s.weight_sums[0] += w.rho;
                s.weight_sums[1] += w.omega;
                s.weight_sums[2] += w.gamma;
                s.decisions += 1;
                self.decisions.push(Decision {
                    client: s.id,
                    slot: t,
                    chunk: step.chunk,
                    level: sel.level,
                    origin,
                    utility: sel.utility,
                    rb: sel.rb,
                    tier: sel.tier,
                });
            }
            let lock = s.current.expect("lock set at first slot");
            origins[n] = lock.origin;

            let startup = !s.buffer_full;
            let stall = if startup {
                startup_buffer_step(s, step.thr_hat, cfg.slot_len, cfg.buffer_cap, t);
                false
            } else {
                steady_buffer_step(s, step.thr_hat, r, cfg.slot_len, cfg.buffer_cap)
            };
            if lock.origin {
                s.backhaul += r * cfg.slot_len;
            }
            s.origin_flags.push(lock.origin);
            s.chunk_thr.push((step.server, step.thr_hat));
            let counts = s.access.entry(step.server).or_insert_with(|| vec![0; cfg.ladder.len()]);
            counts[step.key.level as usize] += 1;

            let prev_chunk_rate = s.bitrate_history.iter().rev().nth(1).map(|&l| cfg.ladder.rate(l));
            self.ledger.rows.push(LedgerRow {
                slot: t,
                client: s.id,
                server: step.server,
                key: step.key,
                bitrate: r,
                origin: lock.origin,
                new_chunk,
                thr_hat: step.thr_hat,
                rb: lock.rb,
                peer_mean: step.peer_mean.or(prev_chunk_rate).unwrap_or(r),
                buffer: s.buffer,
                startup,
                stall,
                pressure: step.selection.is_some_and(|sel| sel.tier == Tier::Fallback),
            });
        }
    }

    fn client_views(&self, plan: &SlotPlan, k: ServerId) -> Vec<ClientView> {
        plan.steps
            .iter()
            .filter(|st| st.server == k)
            .map(|st| {
                let s = &self.sessions[st.client.index()];
                ClientView {
                    client: st.client,
                    video: s.video,
                    chunk: st.chunk,
                    key: st.key,
                    origin: s.current.is_some_and(|l| l.origin),
                    access: s.access_counts(k).map(<[u32]>::to_vec).unwrap_or_default(),
                }
            })
            .collect()
    }

    fn update_caches(&mut self, plan: &SlotPlan) {
        let t = plan.t;
        let policy = self.cfg.cache_policy;
        if policy == CachePolicyKind::Fixed {
            return;
        }
        let triggered: Vec<bool> = (0..self.cfg.num_servers)
            .map(|k| {
                plan.steps.iter().any(|st| {
                    st.server == ServerId(k) && self.sessions[st.client.index()].current.is_some_and(|l| l.origin)
                })
            })
            .collect();
        let origin_keys = |k: ServerId, new_only: bool| -> Vec<ChunkKey> {
            plan.steps
                .iter()
                .filter(|st| st.server == k && (!new_only || st.selection.is_some()))
                .filter(|st| self.sessions[st.client.index()].current.is_some_and(|l| l.origin))
                .map(|st| st.key)
                .collect()
        };
        let demand = if policy == CachePolicyKind::Opt1 && triggered.iter().any(|&b| b) {
            self.next_slot_demand(plan, &triggered)
        } else {
            Vec::new()
        };
        for k in (0..self.cfg.num_servers).map(ServerId) {
            if !triggered[k.index()] {
                continue;
            }
            match policy {
                CachePolicyKind::Rbcrh => {
                    let views = self.client_views(plan, k);
                    cache::rbcrh_update(&mut self.caches[k.index()], &self.cfg, &views, t);
                }
                CachePolicyKind::Lru | CachePolicyKind::Lfu => {
                    let misses = origin_keys(k, true);
                    cache::recency_update(&mut self.caches[k.index()], &self.cfg, &misses, t);
                }
                CachePolicyKind::Opt1 => {
                    let downloads = origin_keys(k, false);
                    let empty = BTreeMap::new();
                    let d = demand.get(k.index()).unwrap_or(&empty);
                    cache::opt1_update(&mut self.caches[k.index()], &self.cfg, &downloads, d, t);
                }
                CachePolicyKind::Fixed => unreachable!(),
            }
        }
    }

    /// Requests each server would receive in the next slot if every
    /// triggered cache kept all its candidates.
    fn next_slot_demand(&self, plan: &SlotPlan, triggered: &[bool]) -> Vec<BTreeMap<ChunkKey, u64>> {
        let next = plan.t + 1;
        let mut demand = vec![BTreeMap::new(); self.cfg.num_servers as usize];
        if next > self.cfg.num_slots {
            return demand;
        }
        let view: Vec<EdgeCache> = self
            .caches
            .iter()
            .map(|c| {
                if !triggered[c.server.index()] {
                    return c.clone();
                }
                let mut open = EdgeCache::new(c.server, f64::INFINITY, c.policy);
                for e in c.entries() {
                    open.insert(e.key, e.weight, e.inserted_at);
                }
                for st in plan.steps.iter().filter(|st| st.server == c.server) {
                    if self.sessions[st.client.index()].current.is_some_and(|l| l.origin) {
                        open.insert(st.key, self.cfg.chunk_weight(&st.key), plan.t);
                    }
                }
                open
            })
            .collect();
        for st in self.plan_slot(next, &view).steps {
            if st.selection.is_some() {
                *demand[st.server.index()].entry(st.key).or_insert(0) += 1;
            }
        }
        demand
    }

    fn record_servers(&mut self, plan: &SlotPlan) {
        for k in 0..self.cfg.num_servers {
            let rb_used = plan
                .steps
                .iter()
                .filter(|st| st.server == ServerId(k))
                .map(|st| st.rb)
                .sum();
            let c = &self.caches[k as usize];
            self.ledger.servers.push(ServerSlot {
                slot: plan.t,
                server: ServerId(k),
                rb_used,
                rb_budget: self.cfg.rb_per_slot,
                cache_used: c.used(),
                cache_capacity: c.capacity,
            });
        }
    }

    pub fn run(mut self) -> RunOutput {
        while self.t < self.cfg.num_slots {
            self.run_slot();
        }
        self.ledger.cache_stats = self.caches.iter().map(|c| c.stats.clone()).collect();
        RunOutput {
            sessions: self.sessions,
            ledger: self.ledger,
            caches: self.caches,
            decisions: self.decisions,
            total_utility: self.total_utility,
        }
    }
}
