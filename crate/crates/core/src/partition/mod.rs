//! Edge-to-worker assignment and duplicated interface nodes.

pub mod registry;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::PartitionHints;
use crate::topology::{DlsGraph, EdgeId, NodeId};

pub use registry::{
    ExplicitStrategy, GeoLatticeStrategy, IdRangeStrategy, PartitionContext, PartitionStrategy, RandomShardStrategy,
    StrategyFactory, StrategyRegistry,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartitionError {
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("unknown partition scheme {0:?} (known: {1})")]
    UnknownScheme(String, String),
    #[error("bad arguments for scheme {scheme}: {message}")]
    BadArguments { scheme: String, message: String },
    #[error("geo lattice {n}x{m} needs {} workers, got {workers}", n * m)]
    LatticeMismatch { n: u32, m: u32, workers: u32 },
    #[error("node {0} has no coordinates; geo partitioning needs coordinates on every node")]
    MissingCoordinates(String),
    #[error("edges row {row}: EDGE_PARTITION {value} is outside [0, {workers})")]
    PartitionOutOfRange { row: usize, value: u32, workers: u32 },
    #[error("node {node}: NODE_PARTITION_BOUNDARY worker {value} is outside [0, {workers})")]
    BoundaryOutOfRange { node: String, value: u32, workers: u32 },
    #[error("edge {0} carries no EDGE_PARTITION value")]
    MissingEdgePartition(EdgeId),
}

/// Final placement: one owner per live edge, and every worker that holds a
/// copy of each node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionAssignment {
    pub worker_count: u32,
    /// Indexed by edge id; `None` for dead slots.
    pub edge_owner: Vec<Option<u32>>,
    /// Indexed by node id; sorted worker ids, empty for dead slots.
    pub node_homes: Vec<Vec<u32>>,
    pub duplicated: BTreeSet<NodeId>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartitionScore {
    pub duplicated_total: usize,
    pub graph_size: usize,
    pub score: f64,
}

impl PartitionAssignment {
    pub fn owner(&self, e: EdgeId) -> Option<u32> {
        self.edge_owner.get(e as usize).copied().flatten()
    }

    pub fn homes(&self, v: NodeId) -> &[u32] {
        self.node_homes.get(v as usize).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_duplicated(&self, v: NodeId) -> bool {
        self.duplicated.contains(&v)
    }

    pub fn edges_per_worker(&self) -> Vec<usize> {
        let mut out = vec![0; self.worker_count as usize];
        for w in self.edge_owner.iter().flatten() {
            out[*w as usize] += 1;
        }
        out
    }

    pub fn nodes_per_worker(&self) -> Vec<usize> {
        let mut out = vec![0; self.worker_count as usize];
        for homes in &self.node_homes {
            for &w in homes {
                out[w as usize] += 1;
            }
        }
        out
    }

    pub fn duplicated_per_worker(&self) -> Vec<usize> {
        let mut out = vec![0; self.worker_count as usize];
        for &v in &self.duplicated {
            for &w in self.homes(v) {
                out[w as usize] += 1;
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edge_owner.iter().flatten().count()
    }

    pub fn score(&self) -> PartitionScore {
        partition_score(self)
    }
}

/// Duplicated nodes over edge count; 0 for an edgeless graph.
pub fn partition_score(a: &PartitionAssignment) -> PartitionScore {
    let duplicated_total = a.duplicated.len();
    let graph_size = a.edge_count();
    let score = if graph_size == 0 { 0.0 } else { duplicated_total as f64 / graph_size as f64 };
    PartitionScore {
        duplicated_total,
        graph_size,
        score,
    }
}

/// Tentative node placement, indexed by node id.
pub type NodeWorkers = Vec<Option<u32>>;

/// Splits the node key range `[min, max]` into `workers` contiguous ranges
/// whose sizes differ by at most one; the leading ranges take the remainder.
pub fn assign_id_range(graph: &DlsGraph, workers: u32) -> Result<NodeWorkers, PartitionError> {
    if workers == 0 {
        return Err(PartitionError::NoWorkers);
    }
    let mut out = vec![None; graph.node_capacity() + 1];
    let keys: Vec<(NodeId, i64)> = graph.node_ids().map(|v| (v, graph.node_key(v))).collect();
    let (Some(min), Some(max)) = (keys.iter().map(|k| k.1).min(), keys.iter().map(|k| k.1).max()) else {
        return Ok(out);
    };
    let span = (max as i128 - min as i128 + 1) as u128;
    for (v, key) in keys {
        out[v as usize] = Some(id_range_worker((key as i128 - min as i128) as u128, span, workers));
    }
    Ok(out)
}

fn id_range_worker(pos: u128, span: u128, workers: u32) -> u32 {
    let k = workers as u128;
    let base = span / k;
    let rem = span % k;
    let big = rem * (base + 1);
    if pos < big {
        (pos / (base + 1)) as u32
    } else {
        (rem + (pos - big) / base) as u32
    }
}

/// Places nodes on an `n` (along x) by `m` (along y) lattice over the global
/// bounding box; worker index is `row * n + column`.
pub fn assign_geo_lattice(graph: &DlsGraph, n: u32, m: u32) -> Result<NodeWorkers, PartitionError> {
    if n == 0 || m == 0 {
        return Err(PartitionError::NoWorkers);
    }
    let mut out = vec![None; graph.node_capacity() + 1];
    let mut pts = Vec::with_capacity(graph.node_count());
    for v in graph.node_ids() {
        match graph.coords(v) {
            Some(p) => pts.push((v, p)),
            None => return Err(PartitionError::MissingCoordinates(graph.display_key(v))),
        }
    }
    if pts.is_empty() {
        return Ok(out);
    }
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(_, (x, y)) in &pts {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    for (v, (x, y)) in pts {
        let i = lattice_cell(x, xmin, xmax, n);
        let j = lattice_cell(y, ymin, ymax, m);
        out[v as usize] = Some(j * n + i);
    }
    Ok(out)
}

/// Cell index along one axis. Points on an interior cell boundary go to the
/// higher cell; the global maximum goes to the last cell.
pub fn lattice_cell(value: f64, min: f64, max: f64, cells: u32) -> u32 {
    let width = max - min;
    if width <= 0.0 {
        return 0;
    }
    let c = ((value - min) / width * cells as f64).floor();
    (c.max(0.0) as u32).min(cells - 1)
}

/// Stable 64-bit string hash: FNV-1a followed by the splitmix64 finalizer,
/// which spreads FNV's weak low bits before the modulo.
pub fn stable_hash(text: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h = (h ^ (h >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h = (h ^ (h >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    h ^ (h >> 31)
}

/// Key hashed by the random-shard scheme: node name, else external id, else
/// internal id, in decimal.
pub fn shard_key(graph: &DlsGraph, v: NodeId) -> String {
    match (graph.node_name(v), graph.external_id(v)) {
        (Some(name), _) => name.to_string(),
        (None, Some(ext)) => ext.to_string(),
        (None, None) => v.to_string(),
    }
}

pub fn assign_random_shard(graph: &DlsGraph, workers: u32) -> Result<PartitionAssignment, PartitionError> {
    if workers == 0 {
        return Err(PartitionError::NoWorkers);
    }
    let mut tentative = vec![None; graph.node_capacity() + 1];
    for v in graph.node_ids() {
        tentative[v as usize] = Some((stable_hash(&shard_key(graph, v)) % workers as u64) as u32);
    }
    Ok(resolve_edge_ownership(graph, &tentative, workers))
}

/// Each edge goes to the lower-ranked worker of its two endpoints; a node
/// is homed on every worker owning one of its edges. Isolated nodes stay on
/// their tentative worker.
pub fn resolve_edge_ownership(graph: &DlsGraph, tentative: &NodeWorkers, workers: u32) -> PartitionAssignment {
    let worker_of = |v: NodeId| tentative[v as usize].expect("every live node is placed");
    let mut edge_owner = vec![None; graph.edge_capacity() + 1];
    for e in graph.edge_ids() {
        let rec = graph.edge(e).expect("live edge");
        edge_owner[e as usize] = Some(worker_of(rec.nodes[0]).min(worker_of(rec.nodes[1])));
    }
    finish(graph, edge_owner, workers, |v| vec![worker_of(v)], &Default::default())
}

/// Edge owners come verbatim from EDGE_PARTITION; NODE_PARTITION_BOUNDARY
/// nodes are homed on their declared workers and always count as duplicated.
pub fn assign_explicit(graph: &DlsGraph, hints: &PartitionHints, workers: u32) -> Result<PartitionAssignment, PartitionError> {
    if workers == 0 {
        return Err(PartitionError::NoWorkers);
    }
    let mut edge_owner = vec![None; graph.edge_capacity() + 1];
    for e in graph.edge_ids() {
        let &(value, row) = hints.edge_partition.get(&e).ok_or(PartitionError::MissingEdgePartition(e))?;
        if value >= workers {
            return Err(PartitionError::PartitionOutOfRange { row, value, workers });
        }
        edge_owner[e as usize] = Some(value);
    }
    for (&v, declared) in &hints.node_boundary {
        if let Some(&value) = declared.iter().find(|&&w| w >= workers) {
            return Err(PartitionError::BoundaryOutOfRange {
                node: graph.display_key(v),
                value,
                workers,
            });
        }
    }
    Ok(finish(graph, edge_owner, workers, |_| vec![0], &hints.node_boundary))
}

fn finish(
    graph: &DlsGraph,
    edge_owner: Vec<Option<u32>>,
    workers: u32,
    isolated_home: impl Fn(NodeId) -> Vec<u32>,
    boundary: &std::collections::BTreeMap<NodeId, Vec<u32>>,
) -> PartitionAssignment {
    let mut node_homes = vec![Vec::new(); graph.node_capacity() + 1];
    for e in graph.edge_ids() {
        let w = edge_owner[e as usize].expect("owned");
        for v in graph.edge(e).expect("live edge").nodes {
            node_homes[v as usize].push(w);
        }
    }
    let mut duplicated = BTreeSet::new();
    for v in graph.node_ids() {
        let homes = &mut node_homes[v as usize];
        if let Some(extra) = boundary.get(&v) {
            homes.extend(extra.iter().copied());
        }
        if homes.is_empty() {
            *homes = isolated_home(v);
        }
        homes.sort_unstable();
        homes.dedup();
        if homes.len() > 1 || boundary.contains_key(&v) {
            duplicated.insert(v);
        }
    }
    PartitionAssignment {
        worker_count: workers,
        edge_owner,
        node_homes,
        duplicated,
    }
}

/// Replicated mode: `copies` identical handles to the same graph.
pub fn replicate(graph: &DlsGraph, copies: usize) -> Vec<DlsGraph> {
    vec![graph.clone(); copies]
}
