#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use dlgraph::grammar::PartitionHints;
use dlgraph::partition::registry::{PartitionContext, StrategyRegistry};
use dlgraph::partition::PartitionAssignment;
use dlgraph::runtime::{Cluster, Solution};
use dlgraph::sssp::PathResult;
use dlgraph::topology::{Direction, DlsGraph, EdgeId, NodeId, NodeSpec};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const SCHEMES: [&str; 4] = ["id-range", "geo", "random", "explicit"];

/// Random weighted multigraph with coordinates in [0, 100)^2 and weights in
/// (0, 10]. A `directed` fraction of edges gets a one-way direction.
pub fn random_graph(seed: u64, nodes: usize, edges: usize, directed: f64) -> DlsGraph {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut g = DlsGraph::new();
    for k in 0..nodes {
        let spec = NodeSpec::new()
            .external_id(k as i64 + 1)
            .coords(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0));
        g.insert_node(spec).unwrap();
    }
    for _ in 0..edges {
        let a = rng.gen_range(1..=nodes as NodeId);
        let b = rng.gen_range(1..=nodes as NodeId);
        let w = 10.0 - rng.gen::<f64>() * 10.0;
        let e = g.insert_edge(a, b, w).unwrap();
        if rng.gen_bool(directed) {
            let dir = if rng.gen_bool(0.5) { Direction::Forward } else { Direction::Backward };
            g.set_direction(e, dir).unwrap();
        }
    }
    g
}

/// Uniformly random owner per edge, as an explicit scheme would receive it.
pub fn random_hints(graph: &DlsGraph, workers: u32, seed: u64) -> PartitionHints {
    let mut rng = StdRng::seed_from_u64(seed ^ 0x5eed);
    let mut hints = PartitionHints::default();
    for (row, e) in graph.edge_ids().enumerate() {
        hints.edge_partition.insert(e, (rng.gen_range(0..workers), row + 1));
    }
    hints
}

/// Registry spec for a scheme at a worker count; geo lattices are k x 1
/// except 4 workers, which use 2 x 2.
pub fn scheme_spec(scheme: &str, workers: u32) -> String {
    match scheme {
        "geo" if workers == 4 => "geo:2x2".into(),
        "geo" => format!("geo:{workers}x1"),
        s => s.into(),
    }
}

pub fn partition(graph: &DlsGraph, scheme: &str, workers: u32, seed: u64) -> PartitionAssignment {
    let hints = if scheme == "explicit" { random_hints(graph, workers, seed) } else { PartitionHints::default() };
    let strategy = StrategyRegistry::with_defaults().create(&scheme_spec(scheme, workers)).unwrap();
    strategy.assign(&PartitionContext { graph, workers, hints: &hints }).unwrap()
}

pub fn cluster(graph: &DlsGraph, scheme: &str, workers: u32, seed: u64) -> (PartitionAssignment, Cluster) {
    let a = partition(graph, scheme, workers, seed);
    let c = Cluster::new(graph, &a).unwrap();
    (a, c)
}

/// Textbook O(V^2) Dijkstra over a dense scan, honoring edge directions.
/// Indexed by node id; dead slots and unreachable nodes are infinite.
pub fn oracle_costs(graph: &DlsGraph, source: NodeId) -> Vec<f64> {
    let cap = graph.node_capacity() + 1;
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); cap];
    for e in graph.edge_ids() {
        let [a, b] = graph.edge(e).unwrap().nodes;
        let w = graph.weight(e);
        match graph.direction(e) {
            Direction::Both => {
                adj[a as usize].push((b as usize, w));
                adj[b as usize].push((a as usize, w));
            }
            Direction::Forward => adj[a as usize].push((b as usize, w)),
            Direction::Backward => adj[b as usize].push((a as usize, w)),
        }
    }
    let mut d = vec![f64::INFINITY; cap];
    let mut done = vec![false; cap];
    d[source as usize] = 0.0;
    loop {
        let mut best = None;
        for v in 1..cap {
            if !done[v] && d[v].is_finite() && best.is_none_or(|b: usize| d[v] < d[b]) {
                best = Some(v);
            }
        }
        let Some(u) = best else { break };
        done[u] = true;
        for &(v, w) in &adj[u] {
            if d[u] + w < d[v] {
                d[v] = d[u] + w;
            }
        }
    }
    d
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

/// Path starts at the source, ends at the target, every edge joins its two
/// consecutive nodes and may be walked in that direction, and the weight sum
/// matches the converged target cost.
pub fn check_path(graph: &DlsGraph, p: &PathResult, expected_cost: f64) -> Result<(), String> {
    if p.nodes.first() != Some(&p.source) || p.nodes.last() != Some(&p.target) {
        return Err(format!("path endpoints {:?} for {} -> {}", p.nodes, p.source, p.target));
    }
    if p.edges.len() + 1 != p.nodes.len() {
        return Err("edge and node counts disagree".into());
    }
    let mut sum = 0.0;
    for (i, &e) in p.edges.iter().enumerate() {
        let rec = graph.edge(e).map_err(|err| err.to_string())?;
        let (u, v) = (p.nodes[i], p.nodes[i + 1]);
        let joins = (rec.nodes[0] == u && rec.nodes[1] == v) || (rec.nodes[0] == v && rec.nodes[1] == u);
        if !joins || !graph.traversable_from(e, u) {
            return Err(format!("edge {e} does not lead {u} -> {v}"));
        }
        sum += graph.weight(e);
    }
    if !close(sum, expected_cost, 1e-9) || !close(p.total_cost, expected_cost, 1e-9) {
        return Err(format!("path weight {sum} / reported {} vs cost {expected_cost}", p.total_cost));
    }
    Ok(())
}

/// Cost of a global node as seen by each of its homes.
pub fn costs_on_homes(cluster: &Cluster, solution: &Solution, v: NodeId) -> Vec<f64> {
    cluster
        .homes(v)
        .iter()
        .map(|&w| {
            let ws = &cluster.workers[w as usize];
            solution.fields[w as usize].cost(ws.local(v).unwrap())
        })
        .collect()
}

/// Predicate as the oracle sees it: (is_edge, attribute, op, literal).
pub type Pred = (bool, String, &'static str, String);

fn pred_holds(op: &str, left: &str, right: &str) -> bool {
    let ord = match (left.parse::<f64>(), right.parse::<f64>()) {
        (Ok(a), Ok(b)) => a.partial_cmp(&b).unwrap(),
        _ => left.cmp(right),
    };
    match op {
        "<" => ord.is_lt(),
        "<=" => ord.is_le(),
        "=" => ord.is_eq(),
        "!=" => ord.is_ne(),
        ">=" => ord.is_ge(),
        ">" => ord.is_gt(),
        _ => unreachable!("operator {op}"),
    }
}

/// Attribute rows for the oracle: (is_edge, attribute, key) -> value.
pub type Attrs = std::collections::HashMap<(bool, String, String), String>;

/// Every simple path of 1..=hops edges from `sources` to `targets`, built
/// breadth-first by appending one edge at a time, then filtered. Returned
/// as sorted (node sequence, edge sequence) pairs.
pub fn oracle_paths(
    graph: &DlsGraph,
    attrs: &Attrs,
    sources: &[NodeId],
    targets: &[NodeId],
    hops: usize,
    preds: &[Pred],
) -> Vec<(Vec<NodeId>, Vec<EdgeId>)> {
    let ok = |is_edge: bool, key: String| {
        preds.iter().filter(|p| p.0 == is_edge).all(|(_, attr, op, lit)| {
            match attrs.get(&(is_edge, attr.clone(), key.clone())) {
                Some(v) => pred_holds(op, v, lit),
                None => true,
            }
        })
    };
    let node_ok = |v: NodeId| ok(false, graph.display_key(v));
    let edge_ok = |e: EdgeId| ok(true, graph.edge_alias(e).map_or(e.to_string(), |a| a.to_string()));

    let mut layer: Vec<(Vec<NodeId>, Vec<EdgeId>)> = sources
        .iter()
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(|s| (vec![s], vec![]))
        .collect();
    let mut found = Vec::new();
    for _ in 0..hops {
        let mut next = Vec::new();
        for (nodes, edges) in &layer {
            let v = *nodes.last().unwrap();
            for e in graph.edge_ids() {
                let [a, b] = graph.edge(e).unwrap().nodes;
                let u = if a == v { b } else if b == v { a } else { continue };
                if !graph.traversable_from(e, v) || nodes.contains(&u) {
                    continue;
                }
                let mut n2 = nodes.clone();
                n2.push(u);
                let mut e2 = edges.clone();
                e2.push(e);
                next.push((n2, e2));
            }
        }
        for p in &next {
            if targets.contains(p.0.last().unwrap()) {
                found.push(p.clone());
            }
        }
        layer = next;
    }
    found.retain(|(nodes, edges)| nodes.iter().all(|&v| node_ok(v)) && edges.iter().all(|&e| edge_ok(e)));
    found.sort();
    found
}

/// A small social graph: two FEMALE people, three MALE people and one chess
/// interest node. Person-to-person edges carry a `since` year in a side
/// table; exactly one of them (susan -> bill, 2001) predates 2002.
pub fn knows_fixture() -> (DlsGraph, dlgraph::query::SideTables) {
    use dlgraph::grammar::{build_graph, parse_bindings, validate_request, GraphRequest, Table};
    use dlgraph::query::{Scope, SideTables};

    let rows = |r: &[&[&str]]| r.iter().map(|row| row.iter().map(|s| s.to_string()).collect()).collect();
    let nodes = Table::new(
        &["name", "label"],
        rows(&[
            &["susan", "FEMALE"],
            &["jane", "FEMALE"],
            &["tom", "MALE"],
            &["bill", "MALE"],
            &["alex", "MALE"],
            &["chess", "chess"],
        ]),
    );
    let edges = Table::new(
        &["id", "from", "to", "label"],
        rows(&[
            &["1", "susan", "tom", "knows"],
            &["2", "susan", "bill", "knows"],
            &["3", "susan", "alex", "knows"],
            &["4", "jane", "tom", "knows"],
            &["5", "jane", "alex", "knows"],
            &["6", "tom", "chess", "likes"],
            &["7", "bill", "chess", "likes"],
            &["8", "alex", "chess", "likes"],
        ]),
    );
    let bindings = parse_bindings(
        "EDGE_NODE1_NAME=from,EDGE_NODE2_NAME=to,EDGE_LABEL=label,NODE_NAME=name,NODE_LABEL=label",
    )
    .unwrap();
    let mut req = GraphRequest::new("knows", bindings);
    req.directed_default = true;
    let built = build_graph(&validate_request(&req).unwrap(), &edges, Some(&nodes)).unwrap();
    assert!(built.errors.is_empty());
    // rows become edges 1..=8 in order; the side table is keyed by edge id
    assert_eq!(built.graph.edge_ids().collect::<Vec<_>>(), (1..=8).collect::<Vec<_>>());

    let since = Table::new(
        &["id", "since"],
        rows(&[&["1", "2005"], &["2", "2001"], &["3", "2004"], &["4", "2010"], &["5", "2003"]]),
    );
    let mut tables = SideTables::new();
    tables.load(Scope::Edge, &since, "id").unwrap();
    (built.graph, tables)
}

/// `side` x `side` unit grid whose nodes are inserted in a random order, so
/// internal ids carry no locality. External ids follow insertion order.
pub fn scrambled_grid(side: usize, seed: u64) -> DlsGraph {
    use rand::seq::SliceRandom;
    let mut cells: Vec<(usize, usize)> = (0..side).flat_map(|i| (0..side).map(move |j| (i, j))).collect();
    cells.shuffle(&mut StdRng::seed_from_u64(seed));
    let mut g = DlsGraph::new();
    let mut id = vec![0 as NodeId; side * side];
    for (k, &(i, j)) in cells.iter().enumerate() {
        let spec = NodeSpec::new().external_id(k as i64 + 1).coords(i as f64, j as f64);
        id[i * side + j] = g.insert_node(spec).unwrap();
    }
    for i in 0..side {
        for j in 0..side {
            if i + 1 < side {
                g.insert_edge(id[i * side + j], id[(i + 1) * side + j], 1.0).unwrap();
            }
            if j + 1 < side {
                g.insert_edge(id[i * side + j], id[i * side + j + 1], 1.0).unwrap();
            }
        }
    }
    g
}

/// `node,cost` CSV bytes of a solve from `source`.
pub fn cost_csv(graph: &DlsGraph, cluster: &Cluster, source: NodeId) -> Vec<u8> {
    let s = cluster.orchestrate(source, &dlgraph::runtime::SolveOptions::default()).unwrap();
    let mut out = Vec::new();
    dlgraph::output::write_costs_csv(graph, cluster, &s, &mut out).unwrap();
    out
}

/// Saves a partitioned graph under `name` and returns the stored copy.
pub fn save_and_reload(
    ws: &dlgraph::workspace::Workspace,
    name: &str,
    graph: &DlsGraph,
    scheme: &str,
    assignment: &PartitionAssignment,
    cluster: &Cluster,
) -> dlgraph::workspace::StoredGraph {
    let meta = dlgraph::workspace::GraphMeta::new(
        name,
        scheme,
        assignment.clone(),
        PartitionHints::default(),
        cluster,
        Default::default(),
        Default::default(),
    );
    ws.save(graph, cluster, &meta, true).unwrap();
    ws.load(name).unwrap()
}

/// Edge signature: (id, endpoints, weight bits, direction code).
pub type EdgeSig = (EdgeId, NodeId, NodeId, u64, i8);

pub fn signature(g: &DlsGraph) -> BTreeMap<EdgeId, EdgeSig> {
    g.edge_ids()
        .map(|e| {
            let [a, b] = g.edge(e).unwrap().nodes;
            (e, (e, a, b, g.weight(e).to_bits(), g.direction(e).code()))
        })
        .collect()
}

/// Union of the worker subgraphs, translated back to global ids.
pub fn glue(cluster: &Cluster) -> (Vec<EdgeSig>, BTreeSet<NodeId>) {
    let mut edges = Vec::new();
    let mut nodes = BTreeSet::new();
    for ws in &cluster.workers {
        let sub = &ws.subgraph;
        for v in sub.node_ids() {
            nodes.insert(ws.global(v));
        }
        for e in sub.edge_ids() {
            let [a, b] = sub.edge(e).unwrap().nodes;
            edges.push((ws.global_edge(e), ws.global(a), ws.global(b), sub.weight(e).to_bits(), sub.direction(e).code()));
        }
    }
    edges.sort_unstable();
    (edges, nodes)
}
