mod common;

use std::collections::BTreeMap;

use common::*;
use dlgraph::runtime::SolveOptions;
use dlgraph::sssp::{aggregate_path, batch_solve, dijkstra, distributed_sssp, PairOutcome, SolveError};
use dlgraph::topology::NodeId;
use proptest::prelude::*;

fn graph_params() -> impl Strategy<Value = (u64, usize, usize, f64)> {
    (any::<u64>(), 2usize..60, 0usize..180, prop_oneof![Just(0.0), Just(0.3)])
}

fn scheme() -> impl Strategy<Value = &'static str> {
    prop::sample::select(SCHEMES.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn global_dijkstra_condition_holds(
        (seed, n, m, dir) in graph_params(),
        scheme in scheme(),
        workers in 1u32..6,
        src in any::<prop::sample::Index>(),
    ) {
        let g = random_graph(seed, n, m, dir);
        let (_, c) = cluster(&g, scheme, workers, seed);
        let source = src.index(n) as NodeId + 1;
        let s = distributed_sssp(&c, source, &SolveOptions::default()).unwrap();
        let d = s.costs(&c);
        prop_assert_eq!(d[source as usize], 0.0);
        for e in g.edge_ids() {
            let [a, b] = g.edge(e).unwrap().nodes;
            let w = g.weight(e);
            for (j, i) in [(a, b), (b, a)] {
                if g.traversable_from(e, j) && d[j as usize].is_finite() {
                    prop_assert!(d[i as usize] <= d[j as usize] + w, "edge {} {}->{}: {} > {} + {}", e, j, i, d[i as usize], d[j as usize], w);
                }
            }
        }
    }

    #[test]
    fn duplicated_homes_agree(
        (seed, n, m, dir) in graph_params(),
        scheme in scheme(),
        workers in 2u32..6,
    ) {
        let g = random_graph(seed, n, m, dir);
        let (a, c) = cluster(&g, scheme, workers, seed);
        let s = distributed_sssp(&c, 1, &SolveOptions::default()).unwrap();
        for &v in &a.duplicated {
            let seen = costs_on_homes(&c, &s, v);
            prop_assert!(seen.windows(2).all(|p| p[0] == p[1]), "node {}: {:?}", v, seen);
        }
    }

    #[test]
    fn paths_are_valid(
        (seed, n, m, dir) in graph_params(),
        scheme in scheme(),
        workers in 1u32..6,
    ) {
        let g = random_graph(seed, n, m, dir);
        let (_, c) = cluster(&g, scheme, workers, seed);
        let s = distributed_sssp(&c, 1, &SolveOptions::default()).unwrap();
        for t in g.node_ids() {
            let cost = s.cost(&c, t);
            match aggregate_path(&c, &s, t) {
                Ok(p) => check_path(&g, &p, cost).map_err(TestCaseError::fail)?,
                Err(SolveError::NoPath { .. }) => prop_assert!(cost.is_infinite()),
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            }
        }
    }

    #[test]
    fn costs_match_oracle_for_every_scheme_and_worker_count(
        (seed, n, m, dir) in graph_params(),
        src in any::<prop::sample::Index>(),
    ) {
        let g = random_graph(seed, n, m, dir);
        let source = src.index(n) as NodeId + 1;
        let want = oracle_costs(&g, source);
        let single = dijkstra(&g, source).unwrap();
        for v in g.node_ids() {
            prop_assert!(close(single.cost(v), want[v as usize], 1e-9));
        }
        for scheme in SCHEMES {
            for workers in [1, 2, 3, 4, 7] {
                let (_, c) = cluster(&g, scheme, workers, seed);
                let s = distributed_sssp(&c, source, &SolveOptions::default()).unwrap();
                for v in g.node_ids() {
                    let got = s.cost(&c, v);
                    prop_assert!(close(got, want[v as usize], 1e-9), "{} x{} node {}: {} vs {}", scheme, workers, v, got, want[v as usize]);
                }
            }
        }
    }

    #[test]
    fn rounds_bounded_by_duplicated_count(
        (seed, n, m, dir) in graph_params(),
        scheme in scheme(),
        workers in 1u32..6,
    ) {
        let g = random_graph(seed, n, m, dir);
        let (a, c) = cluster(&g, scheme, workers, seed);
        let s = distributed_sssp(&c, 1, &SolveOptions::default()).unwrap();
        prop_assert!(s.rounds as usize <= a.duplicated.len() + 1, "{} rounds, {} duplicated", s.rounds, a.duplicated.len());
    }

    #[test]
    fn every_update_reaches_each_other_home_once(
        (seed, n, m, dir) in graph_params(),
        scheme in scheme(),
        workers in 2u32..6,
    ) {
        let g = random_graph(seed, n, m, dir);
        let (_, c) = cluster(&g, scheme, workers, seed);
        let s = distributed_sssp(&c, 1, &SolveOptions::default()).unwrap();

        let sent: usize = s.trace.iter().map(|r| r.updates_sent).sum();
        prop_assert_eq!(sent, s.emissions.len());
        prop_assert_eq!(s.updates_emitted, s.emissions.len());

        // (round, worker) -> updates it should receive
        let mut expected: BTreeMap<(u32, u32), usize> = BTreeMap::new();
        for em in &s.emissions {
            prop_assert!(c.homes(em.node).len() >= 2, "update for unduplicated node {}", em.node);
            for &h in c.homes(em.node) {
                if h != em.worker {
                    *expected.entry((em.round + 1, h)).or_default() += 1;
                }
            }
        }
        let total: usize = expected.values().sum();
        prop_assert_eq!(total, s.updates_delivered);
        let received: BTreeMap<(u32, u32), usize> = s
            .trace
            .iter()
            .filter(|r| r.updates_received > 0)
            .map(|r| ((r.round, r.worker), r.updates_received))
            .collect();
        prop_assert_eq!(received, expected);
    }

    #[test]
    fn service_order_does_not_change_costs(
        (seed, n, m, dir) in graph_params(),
        scheme in scheme(),
        workers in 2u32..6,
        shuffles in proptest::collection::vec(any::<u64>(), 1..4),
    ) {
        let g = random_graph(seed, n, m, dir);
        let (_, c) = cluster(&g, scheme, workers, seed);
        let base = distributed_sssp(&c, 1, &SolveOptions::sequential()).unwrap().costs(&c);
        for sh in shuffles {
            let opts = SolveOptions { parallel: false, shuffle_seed: Some(sh), ..SolveOptions::default() };
            let got = distributed_sssp(&c, 1, &opts).unwrap().costs(&c);
            prop_assert_eq!(got.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), base.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        }
    }
}

#[test]
fn batch_solve_matches_single_pair_solves() {
    let g = random_graph(7, 80, 240, 0.2);
    let (_, c) = cluster(&g, "random", 3, 7);
    let pairs: Vec<(NodeId, NodeId)> = vec![(5, 9), (1, 80), (5, 12), (33, 5), (1, 1), (80, 1)];
    let (outcomes, solves) = batch_solve(&c, &pairs, &SolveOptions::default()).unwrap();
    assert_eq!(solves, 4);
    for (&(s, t), o) in pairs.iter().zip(&outcomes) {
        let want = oracle_costs(&g, s)[t as usize];
        match o {
            PairOutcome::Path(p) => {
                assert_eq!((p.source, p.target), (s, t));
                check_path(&g, p, want).unwrap();
            }
            PairOutcome::NoPath { source, target } => {
                assert_eq!((*source, *target), (s, t));
                assert!(want.is_infinite());
            }
        }
    }
}

#[test]
fn unknown_nodes_are_rejected() {
    let g = random_graph(1, 10, 20, 0.0);
    let (_, c) = cluster(&g, "id-range", 2, 1);
    assert!(matches!(
        distributed_sssp(&c, 99, &SolveOptions::default()),
        Err(SolveError::UnknownNode(99))
    ));
    assert!(matches!(
        batch_solve(&c, &[(1, 42)], &SolveOptions::default()),
        Err(SolveError::UnknownNode(42))
    ));
}
