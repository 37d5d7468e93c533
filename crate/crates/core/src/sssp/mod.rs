//! Label-setting shortest paths per worker, the distributed min-exchange
//! fixpoint across workers, and path aggregation by backtracking.

mod path;

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use thiserror::Error;

use crate::runtime::{Cluster, SolveOptions, Solution};
use crate::topology::{DlsGraph, EdgeId, NodeId, NULL};

pub use crate::runtime::worker::WorkerState;
pub use path::{aggregate_path, batch_solve, PairOutcome, PathResult, PathSegment};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("no path from {from} to {to}")]
    NoPath { from: NodeId, to: NodeId },
    #[error("solve aborted at round {round} ({finite_nodes} nodes had finite cost)")]
    Aborted { round: u32, finite_nodes: usize },
    #[error("worker {worker} failed in round {round}: {message} ({finite_nodes} nodes had finite cost)")]
    WorkerFailed {
        worker: u32,
        round: u32,
        message: String,
        finite_nodes: usize,
    },
    #[error("inconsistent solver state: {0}")]
    Inconsistent(String),
}

/// Per-worker cost labels, indexed by local node id.
#[derive(Clone, Debug, PartialEq)]
pub struct CostField {
    pub d: Vec<f64>,
    /// Edge through which the node was last lowered by local relaxation;
    /// `NULL` for unvisited, injected and source nodes.
    pub pred_edge: Vec<EdgeId>,
}

impl CostField {
    pub fn new(node_capacity: usize) -> Self {
        CostField {
            d: vec![f64::INFINITY; node_capacity + 1],
            pred_edge: vec![NULL; node_capacity + 1],
        }
    }

    pub fn for_worker(w: &WorkerState) -> Self {
        Self::new(w.subgraph.node_capacity())
    }

    pub fn cost(&self, local: NodeId) -> f64 {
        self.d[local as usize]
    }
}

/// Heap entry ordered by (cost, node id), smallest first.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Entry {
    cost: f64,
    node: NodeId,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Min-heap of (cost, node) seeds and tentative labels. Stale entries are
/// skipped on pop.
#[derive(Clone, Debug, Default)]
pub struct Front {
    heap: BinaryHeap<Entry>,
}

impl Front {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, node: NodeId, cost: f64) {
        self.heap.push(Entry { cost, node });
    }

    pub fn pop(&mut self) -> Option<(NodeId, f64)> {
        self.heap.pop().map(|e| (e.node, e.cost))
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

/// What one local solve produced.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LocalOutcome {
    /// Duplicated nodes (global id, new cost) lowered by local relaxation,
    /// ascending by global id.
    pub improvements: Vec<(NodeId, f64)>,
    pub settled: usize,
    /// Global ids whose cost went from infinite to finite during this call.
    pub newly_reached: Vec<NodeId>,
}

/// Seeds `field` with `fronts` (global ids) and runs label-setting
/// relaxation on the worker's subgraph. A front only takes effect when it
/// lowers the current label.
pub fn local_dijkstra(worker: &WorkerState, field: &mut CostField, fronts: &[(NodeId, f64)]) -> LocalOutcome {
    let g = &worker.subgraph;
    let mut out = LocalOutcome::default();
    let mut heap = Front::new();
    for &(global, cost) in fronts {
        debug_assert!(cost.is_finite() && cost >= 0.0);
        let Some(v) = worker.local(global) else { continue };
        if cost < field.d[v as usize] {
            if field.d[v as usize].is_infinite() {
                out.newly_reached.push(global);
            }
            field.d[v as usize] = cost;
            field.pred_edge[v as usize] = NULL;
            heap.push(v, cost);
        }
    }
    // duplicated node -> label before local relaxation touched it
    let mut before: HashMap<NodeId, f64> = HashMap::new();
    while let Some((v, cost)) = heap.pop() {
        if cost > field.d[v as usize] {
            continue;
        }
        out.settled += 1;
        for e in g.incident(v) {
            if !g.traversable_from(e, v) {
                continue;
            }
            let rec = g.edge(e).expect("incident edges are live");
            let u = rec.other(v);
            let w = g.weight(e);
            debug_assert!(w >= 0.0);
            let nd = cost + w;
            if nd < field.d[u as usize] {
                let old = field.d[u as usize];
                if old.is_infinite() {
                    out.newly_reached.push(worker.global(u));
                }
                if worker.is_duplicated_local(u) {
                    before.entry(u).or_insert(old);
                }
                field.d[u as usize] = nd;
                field.pred_edge[u as usize] = e;
                heap.push(u, nd);
            }
        }
    }
    out.improvements = before
        .into_iter()
        .filter(|&(v, old)| field.d[v as usize] < old)
        .map(|(v, _)| (worker.global(v), field.d[v as usize]))
        .collect();
    out.improvements.sort_by_key(|&(g, _)| g);
    out
}

/// Single-graph Dijkstra returning costs and predecessor edges indexed by
/// node id.
pub fn dijkstra(graph: &DlsGraph, source: NodeId) -> Result<CostField, SolveError> {
    if !graph.is_live_node(source) {
        return Err(SolveError::UnknownNode(source));
    }
    let mut field = CostField::new(graph.node_capacity());
    field.d[source as usize] = 0.0;
    let mut heap = Front::new();
    heap.push(source, 0.0);
    while let Some((v, cost)) = heap.pop() {
        if cost > field.d[v as usize] {
            continue;
        }
        for e in graph.incident(v) {
            if !graph.traversable_from(e, v) {
                continue;
            }
            let u = graph.edge(e).expect("live").other(v);
            let nd = cost + graph.weight(e);
            if nd < field.d[u as usize] {
                field.d[u as usize] = nd;
                field.pred_edge[u as usize] = e;
                heap.push(u, nd);
            }
        }
    }
    Ok(field)
}

/// Distributed single-source solve over all targets, without path
/// aggregation.
pub fn distributed_sssp(cluster: &Cluster, source: NodeId, options: &SolveOptions) -> Result<Solution, SolveError> {
    cluster.orchestrate(source, options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{assign_id_range, resolve_edge_ownership};
    use crate::runtime::worker::build_workers;
    use crate::topology::Direction;

    fn single(graph: &DlsGraph) -> WorkerState {
        let t = vec![Some(0); graph.node_capacity() + 1];
        let a = resolve_edge_ownership(graph, &t, 1);
        build_workers(graph, &a).unwrap().remove(0)
    }

    #[test]
    fn single_edge() {
        let mut g = DlsGraph::new();
        let (a, b) = (g.add_node(), g.add_node());
        g.insert_edge(a, b, 5.0).unwrap();
        let w = single(&g);
        let mut f = CostField::for_worker(&w);
        let out = local_dijkstra(&w, &mut f, &[(a, 0.0)]);
        assert_eq!(f.cost(b), 5.0);
        assert_eq!(out.settled, 2);
        assert!(out.improvements.is_empty());
    }

    #[test]
    fn triangle() {
        let mut g = DlsGraph::new();
        let (a, b, c) = (g.add_node(), g.add_node(), g.add_node());
        g.insert_edge(a, b, 1.0).unwrap();
        g.insert_edge(b, c, 1.0).unwrap();
        let ac = g.insert_edge(a, c, 3.0).unwrap();
        let f = dijkstra(&g, a).unwrap();
        assert_eq!(f.d[c as usize], 2.0);
        assert_eq!(f.pred_edge[c as usize], 2);
        g.set_weight(ac, 1.5).unwrap();
        assert_eq!(dijkstra(&g, a).unwrap().d[c as usize], 1.5);
    }

    #[test]
    fn direction_is_respected() {
        let mut g = DlsGraph::new();
        let (a, b) = (g.add_node(), g.add_node());
        let e = g.insert_edge(a, b, 1.0).unwrap();
        g.set_direction(e, Direction::Backward).unwrap();
        assert!(dijkstra(&g, a).unwrap().d[b as usize].is_infinite());
        assert_eq!(dijkstra(&g, b).unwrap().d[a as usize], 1.0);
    }

    #[test]
    fn heap_orders_by_cost_then_node() {
        let mut f = Front::new();
        f.push(5, 1.0);
        f.push(2, 1.0);
        f.push(9, 0.5);
        assert_eq!(f.pop(), Some((9, 0.5)));
        assert_eq!(f.pop(), Some((2, 1.0)));
        assert_eq!(f.pop(), Some((5, 1.0)));
    }

    #[test]
    fn reports_only_relaxed_duplicated_nodes() {
        let mut g = DlsGraph::new();
        for _ in 0..4 {
            g.add_node();
        }
        for k in 1..4 {
            g.insert_edge(k, k + 1, 1.0).unwrap();
        }
        let a = resolve_edge_ownership(&g, &assign_id_range(&g, 2).unwrap(), 2);
        let ws = build_workers(&g, &a).unwrap();
        // worker 0 holds 1-2-3, with 3 duplicated
        let mut f0 = CostField::for_worker(&ws[0]);
        let out = local_dijkstra(&ws[0], &mut f0, &[(1, 0.0)]);
        assert_eq!(out.improvements, vec![(3, 2.0)]);
        // injecting 3 on worker 1 is not itself reported
        let mut f1 = CostField::for_worker(&ws[1]);
        let out = local_dijkstra(&ws[1], &mut f1, &[(3, 2.0)]);
        assert!(out.improvements.is_empty());
        assert_eq!(f1.cost(ws[1].local(4).unwrap()), 3.0);
        // a non-improving front does nothing
        let out = local_dijkstra(&ws[1], &mut f1, &[(3, 2.5)]);
        assert_eq!(out.settled, 0);
    }
}
