use std::collections::BTreeMap;

use proptest::prelude::*;

use mecstream::model::{CachePolicyKind, ScenarioConfig, ServerId, Slot, Strategy as Abr};
use mecstream::scheduler::World;
use mecstream::workload::CurveId;

fn scenario() -> impl Strategy<Value = (ScenarioConfig, u64)> {
    (
        1u32..15,
        1u32..4,
        10u32..80,
        0usize..5,
        0usize..3,
        0.0f64..=1.0,
        4u32..60,
        10.0f64..400.0,
        (0usize..6, 0.0f64..60.0, any::<u64>()),
    )
        .prop_map(
            |(clients, servers, slots, policy, strat, beta, w, q, (curve, interval, seed))| {
                let mut cfg = ScenarioConfig {
                    num_clients: clients,
                    num_servers: servers,
                    num_slots: slots,
                    cache_policy: CachePolicyKind::ALL[policy],
                    strategy: Abr::ALL[strat],
                    beta,
                    rb_per_slot: w,
                    cache_size: q,
                    arrival_interval: interval,
                    ..ScenarioConfig::desk_scale()
                };
                cfg.catalog
                    .videos
                    .iter_mut()
                    .for_each(|v| v.curve = CurveId::ALL[curve]);
                (cfg, seed)
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ledger_agrees_with_counters((cfg, seed) in scenario()) {
        let out = World::generate(cfg.clone(), seed).unwrap().run();

        let mut rb: BTreeMap<(Slot, ServerId), u32> = BTreeMap::new();
        for r in &out.ledger.rows {
            *rb.entry((r.slot, r.server)).or_default() += r.rb;
        }
        prop_assert!(rb.values().all(|&v| v <= cfg.rb_per_slot));

        for s in &out.ledger.servers {
            prop_assert!(s.cache_used <= s.cache_capacity + 1e-9);
        }

        let requests = out.ledger.rows.iter().filter(|r| r.new_chunk).count() as u64;
        let origin_requests = out.ledger.rows.iter().filter(|r| r.new_chunk && r.origin).count() as u64;
        let lookups: u64 = out.ledger.cache_stats.iter().map(|s| s.lookups()).sum();
        let misses: u64 = out.ledger.cache_stats.iter().map(|s| s.misses).sum();
        prop_assert_eq!(lookups, requests);
        prop_assert_eq!(misses, origin_requests);

        for s in &out.sessions {
            let rows: Vec<_> = out.ledger.rows_for(s.id).collect();
            let bt: f64 = rows.iter().filter(|r| r.origin).map(|r| r.bitrate * cfg.slot_len).sum();
            prop_assert!((bt - s.backhaul).abs() <= 1e-9 * bt.max(1.0));
            prop_assert_eq!(rows.iter().filter(|r| r.new_chunk).count(), s.bitrate_history.len());
            prop_assert_eq!(rows.len() as u32, s.departure - s.arrival);
            prop_assert!(rows.iter().all(|r| r.buffer >= 0.0 && r.buffer <= cfg.buffer_cap + 1e-9));
            prop_assert_eq!(rows.iter().filter(|r| r.stall).count() as u32, s.stalls);
        }
    }
}
