//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Oracles here are written independently of the library
//! code they check.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mecstream::cache::{self, ClientView, EdgeCache};
use mecstream::cli::{self, config, Inputs, Overrides};
use mecstream::metrics::AggregateReport;
use mecstream::model::{
    BitrateLadder, CachePolicyKind, ChunkKey, ClientId, ScenarioConfig, ServerId, Slot, Strategy, Video, VideoCatalog,
    VideoId,
};
use mecstream::radio::{spectral_efficiency, RadioParams, SnrTrace};
use mecstream::scheduler::World;
use mecstream::workload::{ArrivalPlan, CurveId, PlannedClient, RetentionCurve};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn desk_config() -> config::ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/desk_scale.toml");
    config::load(&path, &Overrides::default()).expect("shipped desk config loads")
}

fn run_agg(cfg: &ScenarioConfig, seeds: &[u64]) -> AggregateReport {
    cli::replicate(cfg, seeds, &Inputs::default())
        .expect("replication runs")
        .1
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if b == 0.0 {
        a.abs() <= tol
    } else {
        ((a - b) / b).abs() <= tol
    }
}

// 1. Spectral efficiency branches.

fn criterion_1() -> Outcome {
    let p = RadioParams::default();
    let cases = [(-15.0, 0.0), (23.0, 4.4), (0.0, 0.6)];
    let mut detail = Vec::new();
    let mut ok = true;
    for (snr, want) in cases {
        let got = spectral_efficiency(snr, &p);
        ok &= rel_close(got, want, 1e-12);
        detail.push(format!("{snr} dB -> {got}"));
    }
    check(ok, detail.join(", "))
}

// 2. Caching probabilities against brute-force enumeration.

/// `P_act` written out from the curve family definition.
fn oracle_retention(kappa: f64, chunk: u32, n: u32) -> f64 {
    if n == 1 {
        return 1.0;
    }
    let u = (chunk as f64 - 1.0) / (n as f64 - 1.0);
    let a = kappa;
    let b = -(1.0 + kappa);
    (a * u * u + b * u + 1.0).clamp(0.0, 1.0)
}

/// Probability that at least one independent event occurs, by summing over
/// all 2^n outcomes.
fn union_by_enumeration(probs: &[f64]) -> f64 {
    let n = probs.len();
    let mut total = 0.0;
    for mask in 1u32..(1 << n) {
        let mut p = 1.0;
        for (i, q) in probs.iter().enumerate() {
            p *= if mask & (1 << i) != 0 { *q } else { 1.0 - q };
        }
        total += p;
    }
    total
}

fn small_world() -> (ScenarioConfig, World, f64) {
    let kappa = 0.6;
    let cfg = ScenarioConfig {
        num_clients: 4,
        num_servers: 2,
        num_slots: 6,
        slot_len: 1.0,
        chunk_len: 2.0,
        ladder: BitrateLadder::new(vec![1.0, 2.0, 3.0]).unwrap(),
        catalog: VideoCatalog {
            videos: vec![
                Video {
                    id: VideoId(0),
                    duration: 12.0,
                    min_watch: 2.0,
                    curve: CurveId::Rc3,
                    popularity: 0.5,
                },
                Video {
                    id: VideoId(1),
                    duration: 12.0,
                    min_watch: 2.0,
                    curve: CurveId::Rc3,
                    popularity: 0.5,
                },
            ],
        },
        cache_size: 8.0,
        buffer_cap: 4.0,
        rb_per_slot: 12,
        arrival_interval: 3.0,
        ..ScenarioConfig::desk_scale()
    };
    let plan = ArrivalPlan {
        clients: vec![
            PlannedClient {
                client: ClientId(0),
                arrival: 0,
                video: VideoId(0),
                departure: 6,
            },
            PlannedClient {
                client: ClientId(1),
                arrival: 1,
                video: VideoId(0),
                departure: 6,
            },
            PlannedClient {
                client: ClientId(2),
                arrival: 2,
                video: VideoId(0),
                departure: 6,
            },
            PlannedClient {
                client: ClientId(3),
                arrival: 0,
                video: VideoId(1),
                departure: 5,
            },
        ],
    };
    let trace = SnrTrace::from_fn(4, 2, 6, |c, k, t| {
        let base = [14.0, 4.0, 22.0, 9.0][c.index()];
        let swing = if (c.0 + k.0 + t) % 3 == 0 { 6.0 } else { -3.0 };
        base + swing - 2.0 * k.0 as f64
    });
    let world = World::new(cfg.clone(), trace, &plan, 1).unwrap();
    (cfg, world, kappa)
}

fn criterion_2() -> Outcome {
    let (cfg, mut world, kappa) = small_world();
    let n_chunks = 6;
    let levels = cfg.ladder.len();
    let mut compared = 0usize;
    let mut worst = 0.0f64;
    let mut fractional_acc = false;
    let mut multi_peer = false;
    let mut resident_checks = 0usize;
    for t in 1..=cfg.num_slots {
        world.run_slot();
        for k in 0..cfg.num_servers {
            let k = ServerId(k);
            // clients attached to k at t, straight from session state
            let views: Vec<ClientView> = world
                .sessions
                .iter()
                .filter(|s| s.is_active(t))
                .filter_map(|s| {
                    let lock = s.current?;
                    (lock.server == k).then(|| ClientView {
                        client: s.id,
                        video: s.video,
                        chunk: (t - s.arrival).div_ceil(cfg.chunk_slots()),
                        key: lock.key,
                        origin: lock.origin,
                        access: s.access_counts(k).map(<[u32]>::to_vec).unwrap_or_default(),
                    })
                })
                .collect();
            let rows: Vec<_> = world
                .ledger
                .rows
                .iter()
                .filter(|r| r.slot <= t && r.server == k)
                .collect();
            for video in 0..2u32 {
                for chunk in 1..=n_chunks {
                    for level in 0..levels as u8 {
                        let key = ChunkKey::new(VideoId(video), chunk, level);
                        let rate = cfg.ladder.rate(level);
                        let p_key = oracle_retention(kappa, chunk, n_chunks);
                        let mut events = Vec::new();
                        for v in &views {
                            if v.video != key.video || v.chunk > chunk || v.key == key {
                                continue;
                            }
                            let reach = (1.0 - (oracle_retention(kappa, v.chunk, n_chunks) - p_key)).clamp(0.0, 1.0);
                            let mine: Vec<_> = rows.iter().filter(|r| r.client == v.client).collect();
                            let acc = if mine.is_empty() {
                                0.0
                            } else {
                                mine.iter().filter(|r| r.bitrate == rate).count() as f64 / mine.len() as f64
                            };
                            fractional_acc |= acc > 0.0 && acc < 1.0;
                            let curve = RetentionCurve::new(CurveId::Rc3);
                            let lib_reach = cache::p_reach(&curve, v.chunk, chunk, n_chunks).unwrap();
                            let lib_acc = cache::p_acc(&v.access, level);
                            worst = worst.max((lib_reach - reach).abs()).max((lib_acc - acc).abs());
                            events.push((reach, acc));
                        }
                        multi_peer |= events.len() >= 2;
                        let mut probs: Vec<f64> = events.iter().map(|(r, a)| r * a).collect();
                        probs.push(p_key / levels as f64);
                        let want = union_by_enumeration(&probs);
                        let got_formula = cache::p_cache(p_key, levels, &events);
                        let got_value = cache::chunk_value(&cfg, &views, &key);
                        worst = worst.max((got_formula - want).abs()).max((got_value - want).abs());
                        compared += 1;

                        // values stored by this slot's replacement round
                        let triggered = views.iter().any(|v| v.origin);
                        if triggered {
                            if let Some(e) = world.caches[k.index()].entry(&key) {
                                worst = worst.max((e.value - want).abs());
                                resident_checks += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    let detail = format!(
        "{compared} (server, slot, chunk) values, {resident_checks} stored resident values, max abs error {worst:.2e}"
    );
    if !(fractional_acc && multi_peer && resident_checks > 0) {
        return Err(format!("scenario too trivial to be meaningful: {detail}"));
    }
    check(worst <= 1e-12, detail)
}

// 3. One-slot-lookahead knapsack against exhaustive search.

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut mismatches = 0;
    let mut over = 0;
    for _ in 0..200 {
        let n_levels = rng.gen_range(2..=5);
        let mut rates: Vec<f64> = (0..n_levels)
            .map(|_| rng.gen_range(100..=5000) as f64 / 1000.0)
            .collect();
        rates.sort_by(f64::total_cmp);
        rates.dedup();
        let cfg = ScenarioConfig {
            ladder: BitrateLadder::new(rates.clone()).unwrap(),
            cache_size: 1e9,
            ..ScenarioConfig::desk_scale()
        };
        let n = rng.gen_range(1..=12);
        let mut keys = BTreeSet::new();
        while keys.len() < n {
            keys.insert(ChunkKey::new(
                VideoId(rng.gen_range(0..4)),
                rng.gen_range(1..=20),
                rng.gen_range(0..rates.len() as u8),
            ));
        }
        let keys: Vec<ChunkKey> = keys.into_iter().collect();
        let weights: Vec<f64> = keys.iter().map(|k| cfg.chunk_weight(k)).collect();
        let total: f64 = weights.iter().sum();
        let capacity = (rng.gen_range(0.15..1.1) * total * 100.0).round() / 100.0;
        let capacity = capacity.max(cfg.chunk_len * rates[0]);
        let mut cache = EdgeCache::new(ServerId(0), capacity, CachePolicyKind::Opt1);
        let mut downloads = Vec::new();
        for k in &keys {
            if rng.gen_bool(0.5) && cache.insert(*k, cfg.chunk_weight(k), 0) {
                continue;
            }
            downloads.push(*k);
        }
        let mut demand = BTreeMap::new();
        for k in &keys {
            if rng.gen_bool(0.6) {
                demand.insert(*k, rng.gen_range(1..=4u64));
            }
        }
        let requests: u64 = demand.values().sum();

        cache::opt1_update(&mut cache, &cfg, &downloads, &demand, 1);
        let served: u64 = cache.keys().map(|k| demand.get(k).copied().unwrap_or(0)).sum();
        if cache.used() > capacity + 1e-9 || cache.keys().any(|k| !keys.contains(k)) {
            over += 1;
        }

        let mut best = 0u64;
        for mask in 0u32..(1 << n) {
            let mut w = 0.0;
            let mut d = 0;
            for i in 0..n {
                if mask & (1 << i) != 0 {
                    w += weights[i];
                    d += demand.get(&keys[i]).copied().unwrap_or(0);
                }
            }
            if w <= capacity + 1e-9 {
                best = best.max(d);
            }
        }
        if requests - served != requests - best {
            mismatches += 1;
        }
    }
    check(
        mismatches == 0 && over == 0,
        format!("200 instances, {mismatches} miss-count mismatches, {over} infeasible selections"),
    )
}

// 4. Strategy ordering.

fn criterion_4() -> Outcome {
    let exp = desk_config();
    let seeds = cli::seed_list(exp.scenario.rng_seed, exp.replications);
    let run = |s: Strategy| {
        let cfg = ScenarioConfig {
            strategy: s,
            ..exp.scenario.clone()
        };
        let a = run_agg(&cfg, &seeds);
        (a.mean("avg_backhaul_mb").unwrap(), a.mean("avg_bitrate").unwrap())
    };
    let (bt_q, aq_q) = run(Strategy::QoeMax);
    let (bt_j, aq_j) = run(Strategy::Joint);
    let (bt_t, aq_t) = run(Strategy::TrafficMin);
    let gap = 0.05;
    let ok = bt_q - bt_j >= gap * bt_q
        && bt_j - bt_t >= gap * bt_q
        && aq_q - aq_j >= gap * aq_q
        && aq_j - aq_t >= gap * aq_q;
    check(
        ok,
        format!(
            "{} reps; backhaul Mb qoe_max {bt_q:.1} joint {bt_j:.1} traffic_min {bt_t:.1}; bitrate {aq_q:.3} {aq_j:.3} {aq_t:.3}; \
             joint vs qoe_max: -{:.1}% traffic, -{:.1}% bitrate",
            seeds.len(),
            100.0 * (bt_q - bt_j) / bt_q,
            100.0 * (aq_q - aq_j) / aq_q,
        ),
    )
}

// 5. Cache-policy ordering.

fn criterion_5() -> Outcome {
    let exp = desk_config();
    let seeds = cli::seed_list(exp.scenario.rng_seed, exp.replications);
    let mut failures = Vec::new();
    let mut worst_ratio = 0.0f64;
    let mut ratio_sum = 0.0;
    let mut cells = 0;
    for interval in [10.0, 20.0, 30.0, 40.0] {
        for curve in [CurveId::Rc1, CurveId::Rc2, CurveId::Rc3, CurveId::Rc4, CurveId::Rc5] {
            let mut base = ScenarioConfig {
                strategy: Strategy::Joint,
                beta: 0.5,
                arrival_interval: interval,
                ..exp.scenario.clone()
            };
            base.catalog.videos.iter_mut().for_each(|v| v.curve = curve);
            let per_rep = |policy: CachePolicyKind| -> Vec<f64> {
                let cfg = ScenarioConfig {
                    cache_policy: policy,
                    ..base.clone()
                };
                let (reports, _) = cli::replicate(&cfg, &seeds, &Inputs::default()).unwrap();
                reports.iter().map(|r| r.metrics["miss_pct"]).collect()
            };
            let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
            let rb = per_rep(CachePolicyKind::Rbcrh);
            let lru = per_rep(CachePolicyKind::Lru);
            let lfu = per_rep(CachePolicyKind::Lfu);
            let opt = per_rep(CachePolicyKind::Opt1);
            let (m_rb, m_lru, m_lfu) = (mean(&rb), mean(&lru), mean(&lfu));
            if !(m_rb < m_lru && m_lru < m_lfu) {
                failures.push(format!("A={interval} {curve}: {m_rb:.2}/{m_lru:.2}/{m_lfu:.2}"));
            }
            let ratios: Vec<f64> = rb.iter().zip(&opt).map(|(a, b)| a / b).collect();
            let r = mean(&ratios);
            worst_ratio = worst_ratio.max(r);
            ratio_sum += r;
            cells += 1;
        }
    }
    let detail = format!(
        "{} of {cells} cells ordered rbcrh < lru < lfu; rbcrh/opt1 miss ratio mean {:.3}, worst cell {worst_ratio:.3} (limit 1.8){}",
        cells - failures.len(),
        ratio_sum / cells as f64,
        if failures.is_empty() { String::new() } else { format!("; unordered: {}", failures.join(", ")) }
    );
    check(failures.is_empty() && worst_ratio <= 1.8, detail)
}

// 6. Backhaul traffic falls with the QoE weight.

fn criterion_6() -> Outcome {
    let exp = desk_config();
    let seeds = cli::seed_list(exp.scenario.rng_seed, exp.replications);
    let points: Vec<(f64, f64, f64)> = [1.0, 0.8, 0.6, 0.4, 0.2, 0.0]
        .into_iter()
        .map(|beta| {
            let cfg = ScenarioConfig {
                strategy: Strategy::Joint,
                beta,
                ..exp.scenario.clone()
            };
            let a = run_agg(&cfg, &seeds);
            let m = &a.metrics["avg_backhaul_mb"];
            (beta, m.mean, m.ci95.unwrap_or(0.0))
        })
        .collect();
    let mut violations = Vec::new();
    for w in points.windows(2) {
        let ((b0, m0, c0), (b1, m1, c1)) = (w[0], w[1]);
        if m1 > m0 && m1 - m0 > c0.max(c1) {
            violations.push(format!("beta {b0} -> {b1}: {m0:.1} -> {m1:.1}"));
        }
    }
    let series: Vec<String> = points.iter().map(|(b, m, c)| format!("{b}:{m:.1}±{c:.1}")).collect();
    let detail = format!("backhaul Mb by beta {}", series.join(" "));
    if violations.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; increases beyond CI: {}", violations.join(", ")))
    }
}

// 7. Invariants over randomized runs.

fn criterion_7() -> Outcome {
    let exp = desk_config();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut rb_viol = 0;
    let mut buf_viol = 0;
    let mut lock_viol = 0;
    let mut cap_viol = 0;
    let mut rows_checked = 0;
    for i in 0..50u64 {
        let mut cfg = exp.scenario.clone();
        cfg.cache_policy = CachePolicyKind::ALL[rng.gen_range(0..CachePolicyKind::ALL.len())];
        cfg.strategy = Strategy::ALL[rng.gen_range(0..Strategy::ALL.len())];
        cfg.beta = rng.gen_range(0.0..=1.0);
        cfg.arrival_interval = [10.0, 20.0, 30.0, 40.0][rng.gen_range(0..4)];
        let curve = CurveId::ALL[rng.gen_range(0..CurveId::ALL.len())];
        cfg.catalog.videos.iter_mut().for_each(|v| v.curve = curve);
        let seed = 1000 + i;
        let out = World::generate(cfg.clone(), seed).unwrap().run();
        let cs = cfg.chunk_slots();

        let mut rb_by: BTreeMap<(Slot, ServerId), u32> = BTreeMap::new();
        for r in &out.ledger.rows {
            *rb_by.entry((r.slot, r.server)).or_default() += r.rb;
        }
        rb_viol += rb_by.values().filter(|&&v| v > cfg.rb_per_slot).count();
        rb_viol += out.ledger.servers.iter().filter(|s| s.rb_used > s.rb_budget).count();

        for s in &out.sessions {
            let rows: Vec<_> = out.ledger.rows_for(s.id).collect();
            let mut had_data = false;
            let mut prev: Option<&mecstream::model::LedgerRow> = None;
            for r in rows {
                rows_checked += 1;
                if r.buffer > cfg.buffer_cap + 1e-9 || r.buffer < 0.0 || (had_data && r.buffer <= 0.0 && !r.stall) {
                    buf_viol += 1;
                }
                had_data |= r.buffer > 0.0;
                let boundary = (r.slot - s.arrival - 1) % cs == 0;
                if boundary != r.new_chunk {
                    lock_viol += 1;
                }
                if let Some(p) = prev {
                    if !r.new_chunk
                        && (p.key != r.key
                            || p.server != r.server
                            || p.bitrate != r.bitrate
                            || p.rb != r.rb
                            || p.origin != r.origin)
                    {
                        lock_viol += 1;
                    }
                }
                prev = Some(r);
            }
        }

        cap_viol += out
            .ledger
            .servers
            .iter()
            .filter(|s| s.cache_used > s.cache_capacity + 1e-9)
            .count();
        for c in &out.caches {
            let sum: f64 = c.entries().map(|e| e.weight).sum();
            if sum > c.capacity + 1e-9 {
                cap_viol += 1;
            }
        }
    }
    check(
        rb_viol + buf_viol + lock_viol + cap_viol == 0,
        format!(
            "50 runs, {rows_checked} client-slots: rb {rb_viol}, buffer {buf_viol}, mid-chunk {lock_viol}, cache capacity {cap_viol} violations"
        ),
    )
}

// 8. Determinism of written results.

fn criterion_8() -> Outcome {
    let mut exp = desk_config();
    exp.replications = 3;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    cli::execute(&exp, a.path(), false).unwrap();
    cli::execute(&exp, b.path(), false).unwrap();
    let mut compared = 0;
    let mut differ = Vec::new();
    for seed in cli::seed_list(exp.scenario.rng_seed, exp.replications) {
        let name = format!("clients_seed{seed}.csv");
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        if x != y || x.is_empty() {
            differ.push(name);
        }
        compared += 1;
    }
    check(
        differ.is_empty(),
        format!("{compared} per-client CSVs compared, differing: {differ:?}"),
    )
}

// 9. Without capacity pressure every policy misses only compulsorily.

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut bad = Vec::new();
    for case in 0..20u64 {
        let ladder = BitrateLadder::new(vec![1.0, 1.5, 2.5, 4.0]).unwrap();
        let catalog = VideoCatalog {
            videos: (0..2)
                .map(|v| Video {
                    id: VideoId(v),
                    duration: 40.0,
                    min_watch: 10.0,
                    curve: CurveId::ALL[rng.gen_range(0..6)],
                    popularity: 0.5,
                })
                .collect(),
        };
        let mut cfg = ScenarioConfig {
            num_clients: rng.gen_range(3..=10),
            num_servers: rng.gen_range(1..=3),
            num_slots: rng.gen_range(20..=50),
            ladder,
            catalog,
            arrival_interval: rng.gen_range(0.0..15.0),
            rb_per_slot: rng.gen_range(10..=40),
            strategy: Strategy::ALL[rng.gen_range(0..3)],
            ..ScenarioConfig::desk_scale()
        };
        let all: f64 = (0..2)
            .flat_map(|v| (1..=8).flat_map(move |c| (0..4u8).map(move |l| ChunkKey::new(VideoId(v), c, l))))
            .map(|k| cfg.chunk_weight(&k))
            .sum();
        cfg.cache_size = all;
        let seed = 500 + case;

        let mut counts = Vec::new();
        for policy in [
            CachePolicyKind::Rbcrh,
            CachePolicyKind::Lru,
            CachePolicyKind::Lfu,
            CachePolicyKind::Opt1,
        ] {
            let out = World::generate(
                ScenarioConfig {
                    cache_policy: policy,
                    ..cfg.clone()
                },
                seed,
            )
            .unwrap()
            .run();
            let misses: u64 = out.ledger.cache_stats.iter().map(|s| s.misses).sum();
            // compulsory misses: every request in the slot a (server, key) is first seen
            let mut first: BTreeMap<(ServerId, ChunkKey), Slot> = BTreeMap::new();
            let mut compulsory = 0u64;
            let mut requested = BTreeSet::new();
            for r in out.ledger.rows.iter().filter(|r| r.new_chunk) {
                requested.insert(r.key);
                let f = *first.entry((r.server, r.key)).or_insert(r.slot);
                if f == r.slot {
                    compulsory += 1;
                }
            }
            let distinct: f64 = requested.iter().map(|k| cfg.chunk_weight(k)).sum();
            if distinct > cfg.cache_size {
                return Err(format!("case {case}: instance has capacity pressure"));
            }
            counts.push((policy, misses, compulsory));
        }
        let m0 = counts[0].1;
        if counts.iter().any(|&(_, m, c)| m != m0 || m != c) {
            bad.push(format!("case {case}: {counts:?}"));
        }
    }
    check(
        bad.is_empty(),
        format!(
            "20 instances, {} mismatching{}",
            bad.len(),
            if bad.is_empty() {
                String::new()
            } else {
                format!(": {}", bad.join("; "))
            }
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("spectral efficiency branches", criterion_1),
        ("caching probabilities vs enumeration", criterion_2),
        ("one-slot lookahead vs exhaustive search", criterion_3),
        ("strategy ordering", criterion_4),
        ("cache policy ordering", criterion_5),
        ("beta monotonicity", criterion_6),
        ("invariants over randomized runs", criterion_7),
        ("determinism", criterion_8),
        ("policy equivalence without pressure", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {} {name}: PASS ({d}) [{secs:.1}s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({d}) [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
