use std::collections::BTreeMap;

use super::SolveError;
use crate::runtime::{Cluster, Message, SolveOptions, Solution};
use crate::topology::{EdgeId, NodeId};

/// Piece of a path walked on one worker, in source-to-target order.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSegment {
    pub worker: u32,
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathResult {
    pub source: NodeId,
    pub target: NodeId,
    /// Global node ids from source to target.
    pub nodes: Vec<NodeId>,
    /// Global edge ids; `edges[i]` joins `nodes[i]` and `nodes[i + 1]`.
    pub edges: Vec<EdgeId>,
    pub total_cost: f64,
    pub segments: Vec<PathSegment>,
    pub handoffs: usize,
}

/// Backtracks from `target` to the solve's source. Starts on the worker that
/// last lowered the target (or its first home), follows predecessor edges,
/// and at every node whose cost was injected hands over to the worker that
/// reported that cost.
pub fn aggregate_path(cluster: &Cluster, solution: &Solution, target: NodeId) -> Result<PathResult, SolveError> {
    let source = solution.source;
    if !cluster.contains(target) {
        return Err(SolveError::UnknownNode(target));
    }
    if solution.cost(cluster, target).is_infinite() {
        return Err(SolveError::NoPath { from: source, to: target });
    }
    let mut worker = solution
        .last_improver(target)
        .unwrap_or_else(|| cluster.homes(target)[0]);
    let mut node = target;
    // target-to-source pieces
    let mut pieces: Vec<PathSegment> = Vec::new();
    let guard = cluster.worker_count() + solution.ledger.len() + 1;
    loop {
        let msg = cluster.probe(worker, &solution.fields[worker as usize], node, source)?;
        let Message::PathSegment {
            worker: w,
            mut nodes,
            mut edges,
            handoff,
        } = msg
        else {
            return Err(SolveError::Inconsistent("probe returned a non-segment reply".into()));
        };
        nodes.reverse();
        edges.reverse();
        pieces.push(PathSegment { worker: w, nodes, edges });
        let Some(h) = handoff else { break };
        let next = solution
            .last_improver(h)
            .ok_or_else(|| SolveError::Inconsistent(format!("node {h} has an injected cost but no reporter")))?;
        if next == worker && pieces.last().is_some_and(|p| p.edges.is_empty()) {
            return Err(SolveError::Inconsistent(format!("handoff at node {h} loops on worker {worker}")));
        }
        if pieces.len() > guard {
            return Err(SolveError::Inconsistent("path aggregation did not reach the source".into()));
        }
        worker = next;
        node = h;
    }
    pieces.reverse();
    // a piece with no edges only re-states a junction node
    let segments: Vec<PathSegment> = pieces.into_iter().filter(|p| !p.edges.is_empty()).collect();
    let mut nodes = vec![source];
    let mut edges = Vec::new();
    for seg in &segments {
        nodes.extend_from_slice(&seg.nodes[1..]);
        edges.extend_from_slice(&seg.edges);
    }
    let total_cost = edges.iter().fold(0.0, |acc, &e| acc + edge_weight(cluster, e));
    Ok(PathResult {
        source,
        target,
        nodes,
        edges,
        total_cost,
        handoffs: segments.len().saturating_sub(1),
        segments,
    })
}

fn edge_weight(cluster: &Cluster, global_edge: EdgeId) -> f64 {
    for ws in &cluster.workers {
        if let Ok(local) = ws.global_edge_of_local.binary_search(&global_edge) {
            if local > 0 {
                return ws.subgraph.weight(local as EdgeId);
            }
        }
    }
    f64::NAN
}

#[derive(Clone, Debug, PartialEq)]
pub enum PairOutcome {
    Path(PathResult),
    NoPath { source: NodeId, target: NodeId },
}

impl PairOutcome {
    pub fn path(&self) -> Option<&PathResult> {
        match self {
            PairOutcome::Path(p) => Some(p),
            PairOutcome::NoPath { .. } => None,
        }
    }
}

/// Solves once per distinct source and aggregates every pair; output order
/// follows input order.
pub fn batch_solve(
    cluster: &Cluster,
    pairs: &[(NodeId, NodeId)],
    options: &SolveOptions,
) -> Result<(Vec<PairOutcome>, usize), SolveError> {
    let mut by_source: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
    for (i, &(s, t)) in pairs.iter().enumerate() {
        for v in [s, t] {
            if !cluster.contains(v) {
                return Err(SolveError::UnknownNode(v));
            }
        }
        by_source.entry(s).or_default().push(i);
    }
    let mut out: Vec<Option<PairOutcome>> = vec![None; pairs.len()];
    for (&source, idx) in &by_source {
        let solution = cluster.orchestrate(source, options)?;
        for &i in idx {
            let target = pairs[i].1;
            out[i] = Some(match aggregate_path(cluster, &solution, target) {
                Ok(p) => PairOutcome::Path(p),
                Err(SolveError::NoPath { from, to }) => PairOutcome::NoPath { source: from, target: to },
                Err(e) => return Err(e),
            });
        }
    }
    Ok((out.into_iter().map(|o| o.expect("every pair solved")).collect(), by_source.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::{assign_id_range, resolve_edge_ownership};
    use crate::topology::{DlsGraph, NodeSpec};

    fn path_cluster(n: i64, workers: u32) -> Cluster {
        let mut g = DlsGraph::new();
        for k in 0..n {
            g.insert_node(NodeSpec::new().external_id(k)).unwrap();
        }
        for k in 1..n as NodeId {
            g.insert_edge(k, k + 1, 1.0).unwrap();
        }
        let a = resolve_edge_ownership(&g, &assign_id_range(&g, workers).unwrap(), workers);
        Cluster::new(&g, &a).unwrap()
    }

    #[test]
    fn path_across_three_workers() {
        let c = path_cluster(10, 3);
        let s = c.orchestrate(10, &SolveOptions::default()).unwrap();
        for k in 1..=10 {
            assert_eq!(s.cost(&c, k), (10 - k) as f64);
        }
        let p = aggregate_path(&c, &s, 1).unwrap();
        assert_eq!(p.nodes, (1..=10).rev().collect::<Vec<_>>());
        assert_eq!(p.edges, (1..=9).rev().collect::<Vec<_>>());
        assert_eq!(p.total_cost, 9.0);
        assert_eq!(p.handoffs, 2);
        assert_eq!(p.segments.iter().map(|s| s.worker).collect::<Vec<_>>(), vec![2, 1, 0]);
    }

    #[test]
    fn two_partitions_single_handoff() {
        let c = path_cluster(10, 2);
        let s = c.orchestrate(1, &SolveOptions::default()).unwrap();
        let p = aggregate_path(&c, &s, 10).unwrap();
        assert_eq!(p.handoffs, 1);
        assert_eq!(p.segments.len(), 2);
        assert_eq!(p.total_cost, s.cost(&c, 10));
    }

    #[test]
    fn trivial_and_missing() {
        let c = path_cluster(4, 2);
        let s = c.orchestrate(2, &SolveOptions::default()).unwrap();
        let p = aggregate_path(&c, &s, 2).unwrap();
        assert_eq!((p.nodes.clone(), p.edges.len(), p.total_cost), (vec![2], 0, 0.0));

        let mut g = DlsGraph::new();
        g.add_node();
        g.add_node();
        let a = resolve_edge_ownership(&g, &assign_id_range(&g, 1).unwrap(), 1);
        let c = Cluster::new(&g, &a).unwrap();
        let s = c.orchestrate(1, &SolveOptions::default()).unwrap();
        assert_eq!(aggregate_path(&c, &s, 2), Err(SolveError::NoPath { from: 1, to: 2 }));
    }

    #[test]
    fn batch_groups_by_source() {
        let c = path_cluster(6, 2);
        let (out, solves) = batch_solve(&c, &[(1, 6), (1, 3), (1, 1)], &SolveOptions::default()).unwrap();
        assert_eq!(solves, 1);
        let costs: Vec<f64> = out.iter().map(|o| o.path().unwrap().total_cost).collect();
        assert_eq!(costs, vec![5.0, 2.0, 0.0]);
        let (out, solves) = batch_solve(&c, &[], &SolveOptions::default()).unwrap();
        assert!(out.is_empty());
        assert_eq!(solves, 0);
    }
}
