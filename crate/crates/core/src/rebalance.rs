//! Iso-cost rebalancing: solve from one source, renumber nodes by ascending
//! cost, and split the new id range evenly across workers.

use std::io::Write;

use thiserror::Error;

use crate::partition::{assign_id_range, resolve_edge_ownership, PartitionAssignment, PartitionError, PartitionScore};
use crate::runtime::{Cluster, SolveOptions};
use crate::sssp::SolveError;
use crate::topology::{DlsGraph, EdgeId, NodeId, NodeSpec, TopologyError};

#[derive(Debug, Error)]
pub enum RebalanceError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("writing tables: {0}")]
    Io(#[from] csv::Error),
}

#[derive(Clone, Debug, Default)]
pub struct RebalanceJob {
    /// Global node id; defaults to the node with the lowest key.
    pub source: Option<NodeId>,
    pub workers: u32,
}

/// Old internal id to new internal id, a bijection over live nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenumberMap {
    /// Indexed by old id; `None` for dead slots.
    pub new_of_old: Vec<Option<NodeId>>,
    /// Indexed by new id (slot 0 unused).
    pub old_of_new: Vec<NodeId>,
}

impl RenumberMap {
    pub fn new_id(&self, old: NodeId) -> Option<NodeId> {
        self.new_of_old.get(old as usize).copied().flatten()
    }

    pub fn len(&self) -> usize {
        self.old_of_new.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Live node with the lowest key.
pub fn default_source(graph: &DlsGraph) -> Option<NodeId> {
    graph.node_ids().min_by_key(|&v| (graph.node_key(v), v))
}

/// New ids follow ascending cost with ties broken by node key; unreachable
/// nodes come last, ordered by key.
pub fn renumber_by_cost(graph: &DlsGraph, costs: &[f64]) -> RenumberMap {
    let mut order: Vec<NodeId> = graph.node_ids().collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (costs[a as usize], costs[b as usize]);
        ca.is_infinite()
            .cmp(&cb.is_infinite())
            .then(if ca.is_finite() && cb.is_finite() { ca.total_cmp(&cb) } else { std::cmp::Ordering::Equal })
            .then(graph.node_key(a).cmp(&graph.node_key(b)))
            .then(a.cmp(&b))
    });
    let mut new_of_old = vec![None; graph.node_capacity() + 1];
    let mut old_of_new = vec![0];
    for (rank, &old) in order.iter().enumerate() {
        new_of_old[old as usize] = Some(rank as NodeId + 1);
        old_of_new.push(old);
    }
    RenumberMap { new_of_old, old_of_new }
}

/// Copy of `graph` with nodes inserted in new-id order. Node attributes are
/// kept; when the graph carries external ids they are replaced by the new
/// ids. Edges keep weight, direction, labels and alias, in old edge order.
pub fn rebuild(graph: &DlsGraph, map: &RenumberMap) -> Result<(DlsGraph, Vec<EdgeId>), TopologyError> {
    let keyed = graph.node_ids().any(|v| graph.external_id(v).is_some());
    let mut out = DlsGraph::new();
    for (new, &old) in map.old_of_new.iter().enumerate().skip(1) {
        let spec = NodeSpec {
            external_id: keyed.then_some(new as i64),
            ..graph.node_spec(old)
        };
        let id = out.insert_node(spec)?;
        debug_assert_eq!(id as usize, new);
    }
    let mut new_edge_of_old = vec![0; graph.edge_capacity() + 1];
    for e in graph.edge_ids() {
        let rec = graph.edge(e)?;
        let a = map.new_id(rec.nodes[0]).expect("live");
        let b = map.new_id(rec.nodes[1]).expect("live");
        let ne = out.insert_edge(a, b, graph.weight(e))?;
        out.set_direction(ne, graph.direction(e))?;
        for l in graph.edge_labels(e) {
            out.add_edge_label(ne, l)?;
        }
        if let Some(alias) = graph.edge_alias(e) {
            out.set_edge_alias(ne, alias)?;
        }
        new_edge_of_old[e as usize] = ne;
    }
    Ok((out, new_edge_of_old))
}

#[derive(Clone, Debug)]
pub struct RebalanceReport {
    pub source: NodeId,
    pub costs: Vec<f64>,
    pub map: RenumberMap,
    pub new_edge_of_old: Vec<EdgeId>,
    pub graph: DlsGraph,
    pub assignment: PartitionAssignment,
    pub before: PartitionScore,
    pub after: PartitionScore,
    pub edges_before: Vec<usize>,
    pub edges_after: Vec<usize>,
    pub rounds_before: u32,
    pub unreachable: usize,
}

/// Solves from the job's source on the current partitioning, renumbers by
/// cost and re-partitions the renumbered graph by id range.
pub fn rebalance(
    graph: &DlsGraph,
    current: &PartitionAssignment,
    cluster: &Cluster,
    job: &RebalanceJob,
    options: &SolveOptions,
) -> Result<RebalanceReport, RebalanceError> {
    let source = match job.source {
        Some(s) => s,
        None => default_source(graph).ok_or(RebalanceError::EmptyGraph)?,
    };
    let solution = cluster.orchestrate(source, options)?;
    let mut costs = solution.costs(cluster);
    costs.resize(graph.node_capacity() + 1, f64::INFINITY);
    let unreachable = graph.node_ids().filter(|&v| costs[v as usize].is_infinite()).count();
    let map = renumber_by_cost(graph, &costs);
    let (new_graph, new_edge_of_old) = rebuild(graph, &map)?;
    let workers = job.workers.max(1);
    let assignment = resolve_edge_ownership(&new_graph, &assign_id_range(&new_graph, workers)?, workers);
    Ok(RebalanceReport {
        source,
        map,
        new_edge_of_old,
        before: current.score(),
        after: assignment.score(),
        edges_before: current.edges_per_worker(),
        edges_after: assignment.edges_per_worker(),
        rounds_before: solution.rounds,
        unreachable,
        costs,
        graph: new_graph,
        assignment,
    })
}

fn fmt_coord(c: Option<(f64, f64)>, axis: usize) -> String {
    c.map(|p| if axis == 0 { p.0 } else { p.1 }.to_string()).unwrap_or_default()
}

/// Node table: old id, new id, cost, labels, coordinates and name, in new-id
/// order. Ids are display keys of the respective graphs.
pub fn write_node_table<W: Write>(old: &DlsGraph, report: &RebalanceReport, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["old_id", "new_id", "cost", "labels", "x", "y", "name"])?;
    for (new, &o) in report.map.old_of_new.iter().enumerate().skip(1) {
        let labels: Vec<&str> = old.node_labels(o).collect();
        let coords = old.coords(o);
        w.write_record([
            old.display_key(o),
            report.graph.display_key(new as NodeId),
            report.costs[o as usize].to_string(),
            labels.join(";"),
            fmt_coord(coords, 0),
            fmt_coord(coords, 1),
            old.node_name(o).unwrap_or_default().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Edge table of the renumbered graph.
pub fn write_edge_table<W: Write>(report: &RebalanceReport, out: W) -> Result<(), csv::Error> {
    let g = &report.graph;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["edge_id", "node1", "node2", "weight", "direction", "labels"])?;
    for e in g.edge_ids() {
        let rec = g.edge(e).expect("live");
        let labels: Vec<&str> = g.edge_labels(e).collect();
        w.write_record([
            g.edge_alias(e).map_or_else(|| e.to_string(), |a| a.to_string()),
            g.display_key(rec.nodes[0]),
            g.display_key(rec.nodes[1]),
            g.weight(e).to_string(),
            g.direction(e).code().to_string(),
            labels.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}
