//! Fixed-storage graph container built on the double-link edge structure.
//!
//! Every edge owns six integer slots: its two endpoints plus a `prev`/`next`
//! link per endpoint. The links thread each edge into one doubly-linked chain
//! per endpoint, so a node only needs to remember a single cached edge (the
//! head of its chain) to enumerate all incident edges. Deleted node and edge
//! ids go into FIFO queues and are handed out again before capacity grows.
//!
//! Ids are 1-based. Slot 0 of both record vectors is a permanently dead
//! sentinel and the value 0 doubles as the null link.

mod csr;
mod interner;
pub mod persist;

use std::collections::{BTreeMap, HashMap, VecDeque};

use thiserror::Error;

pub use csr::Csr;
pub use interner::Interner;

pub type NodeId = u32;
pub type EdgeId = u32;

/// Null link / null id.
pub const NULL: u32 = 0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("node {0} is not a live node")]
    InvalidNode(NodeId),
    #[error("edge {0} is not a live edge")]
    InvalidEdge(EdgeId),
    #[error("edge weight {0} must be finite and non-negative")]
    InvalidWeight(f64),
    #[error("external id {0} is already bound to node {1}")]
    DuplicateExternalId(i64, NodeId),
    #[error("node name {0:?} is already bound to node {1}")]
    DuplicateName(String, NodeId),
    #[error("id space exhausted")]
    CapacityExhausted,
}

/// The six topology slots of an edge. Index 0 is the `node1` side, index 1
/// the `node2` side.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EdgeRecord {
    pub nodes: [NodeId; 2],
    pub prev: [EdgeId; 2],
    pub next: [EdgeId; 2],
}

impl EdgeRecord {
    pub fn is_live(&self) -> bool {
        self.nodes[0] != NULL
    }

    pub fn is_self_loop(&self) -> bool {
        self.nodes[0] == self.nodes[1]
    }

    /// Endpoint opposite to `v` (or `v` itself for a self-loop).
    pub fn other(&self, v: NodeId) -> NodeId {
        if self.nodes[0] == v {
            self.nodes[1]
        } else {
            self.nodes[0]
        }
    }
}

/// Traversal direction of an edge.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Direction {
    #[default]
    Both,
    /// node1 -> node2 only.
    Forward,
    /// node2 -> node1 only.
    Backward,
}

impl Direction {
    pub fn from_code(code: i64) -> Option<Self> {
        match code {
            0 => Some(Direction::Both),
            1 => Some(Direction::Forward),
            -1 => Some(Direction::Backward),
            _ => None,
        }
    }

    pub fn code(self) -> i8 {
        match self {
            Direction::Both => 0,
            Direction::Forward => 1,
            Direction::Backward => -1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct NodeRecord {
    pub cached_edge: EdgeId,
    /// Sorted, deduplicated label dictionary ids.
    pub labels: Vec<u32>,
    pub coords: Option<(f64, f64)>,
    pub name_id: Option<u32>,
    pub external_id: Option<i64>,
    live: bool,
}

impl NodeRecord {
    pub fn is_live(&self) -> bool {
        self.live
    }
}

/// Recycled ids, reused in FIFO order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FreeList {
    pub nodes: VecDeque<NodeId>,
    pub edges: VecDeque<EdgeId>,
}

/// Attributes for a new node.
#[derive(Clone, Debug, Default)]
pub struct NodeSpec {
    pub labels: Vec<String>,
    pub coords: Option<(f64, f64)>,
    pub name: Option<String>,
    pub external_id: Option<i64>,
}

impl NodeSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn label(mut self, label: impl Into<String>) -> Self {
        self.labels.push(label.into());
        self
    }

    pub fn coords(mut self, x: f64, y: f64) -> Self {
        self.coords = Some((x, y));
        self
    }

    pub fn name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn external_id(mut self, id: i64) -> Self {
        self.external_id = Some(id);
        self
    }
}

/// Dynamic multigraph stored in double-link form.
#[derive(Clone, Debug, PartialEq)]
pub struct DlsGraph {
    nodes: Vec<NodeRecord>,
    edges: Vec<EdgeRecord>,
    weights: Vec<f64>,
    directions: Vec<Direction>,
    edge_labels: Vec<Vec<u32>>,
    edge_aliases: BTreeMap<EdgeId, i64>,
    free: FreeList,
    labels: Interner,
    names: Interner,
    by_external: HashMap<i64, NodeId>,
    by_name: HashMap<u32, NodeId>,
    live_nodes: usize,
    live_edges: usize,
}

impl Default for DlsGraph {
    fn default() -> Self {
        Self::new()
    }
}

impl DlsGraph {
    pub fn new() -> Self {
        DlsGraph {
            nodes: vec![NodeRecord::default()],
            edges: vec![EdgeRecord::default()],
            weights: vec![0.0],
            directions: vec![Direction::Both],
            edge_labels: vec![Vec::new()],
            edge_aliases: BTreeMap::new(),
            free: FreeList::default(),
            labels: Interner::default(),
            names: Interner::default(),
            by_external: HashMap::new(),
            by_name: HashMap::new(),
            live_nodes: 0,
            live_edges: 0,
        }
    }

    /// Number of allocated node slots (live or recycled), excluding the sentinel.
    pub fn node_capacity(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Number of allocated edge slots (live or recycled), excluding the sentinel.
    pub fn edge_capacity(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.live_nodes
    }

    pub fn edge_count(&self) -> usize {
        self.live_edges
    }

    /// Integer slots used by the edge topology (six per allocated edge).
    pub fn topology_slots(&self) -> usize {
        6 * self.edge_capacity()
    }

    pub fn free_list(&self) -> &FreeList {
        &self.free
    }

    pub fn is_live_node(&self, v: NodeId) -> bool {
        v != NULL && self.nodes.get(v as usize).is_some_and(|n| n.live)
    }

    pub fn is_live_edge(&self, e: EdgeId) -> bool {
        e != NULL && self.edges.get(e as usize).is_some_and(|r| r.is_live())
    }

    fn check_node(&self, v: NodeId) -> Result<(), TopologyError> {
        if self.is_live_node(v) {
            Ok(())
        } else {
            Err(TopologyError::InvalidNode(v))
        }
    }

    fn check_edge(&self, e: EdgeId) -> Result<(), TopologyError> {
        if self.is_live_edge(e) {
            Ok(())
        } else {
            Err(TopologyError::InvalidEdge(e))
        }
    }

    pub fn node(&self, v: NodeId) -> Result<&NodeRecord, TopologyError> {
        self.check_node(v)?;
        Ok(&self.nodes[v as usize])
    }

    pub fn edge(&self, e: EdgeId) -> Result<&EdgeRecord, TopologyError> {
        self.check_edge(e)?;
        Ok(&self.edges[e as usize])
    }

    /// Live node ids in ascending order.
    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, n)| n.live)
            .map(|(i, _)| i as NodeId)
    }

    /// Live edge ids in ascending order.
    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, r)| r.is_live())
            .map(|(i, _)| i as EdgeId)
    }

    pub fn insert_node(&mut self, spec: NodeSpec) -> Result<NodeId, TopologyError> {
        if let Some(ext) = spec.external_id {
            if let Some(&owner) = self.by_external.get(&ext) {
                return Err(TopologyError::DuplicateExternalId(ext, owner));
            }
        }
        let name_id = match &spec.name {
            Some(name) => {
                if let Some(owner) = self.node_by_name(name) {
                    return Err(TopologyError::DuplicateName(name.clone(), owner));
                }
                Some(self.names.intern(name))
            }
            None => None,
        };
        let mut labels: Vec<u32> = spec.labels.iter().map(|l| self.labels.intern(l)).collect();
        labels.sort_unstable();
        labels.dedup();

        let v = match self.free.nodes.pop_front() {
            Some(v) => v,
            None => {
                if self.nodes.len() > u32::MAX as usize {
                    return Err(TopologyError::CapacityExhausted);
                }
                self.nodes.push(NodeRecord::default());
                (self.nodes.len() - 1) as NodeId
            }
        };
        self.nodes[v as usize] = NodeRecord {
            cached_edge: NULL,
            labels,
            coords: spec.coords,
            name_id,
            external_id: spec.external_id,
            live: true,
        };
        if let Some(ext) = spec.external_id {
            self.by_external.insert(ext, v);
        }
        if let Some(id) = name_id {
            self.by_name.insert(id, v);
        }
        self.live_nodes += 1;
        Ok(v)
    }

    /// Inserts a node without attributes.
    pub fn add_node(&mut self) -> NodeId {
        self.insert_node(NodeSpec::default())
            .expect("attribute-free insert cannot collide")
    }

    fn alloc_edge(&mut self) -> Result<EdgeId, TopologyError> {
        if let Some(e) = self.free.edges.pop_front() {
            return Ok(e);
        }
        if self.edges.len() > u32::MAX as usize {
            return Err(TopologyError::CapacityExhausted);
        }
        self.edges.push(EdgeRecord::default());
        self.weights.push(0.0);
        self.directions.push(Direction::Both);
        self.edge_labels.push(Vec::new());
        Ok((self.edges.len() - 1) as EdgeId)
    }

    // Side of edge `x` at node `v` that was reached coming from edge `from`
    // (0 when starting at the chain head). Self-loops occupy both sides of
    // the same chain, side 1 nearer the head.
    fn slot_after(&self, x: EdgeId, v: NodeId, from: EdgeId) -> usize {
        let r = &self.edges[x as usize];
        if r.is_self_loop() {
            if from == x {
                0
            } else {
                1
            }
        } else if r.nodes[0] == v {
            0
        } else {
            1
        }
    }

    // Side of edge `x` at node `v` whose prev link is `to`.
    fn slot_before(&self, x: EdgeId, v: NodeId, to: EdgeId) -> usize {
        let r = &self.edges[x as usize];
        if r.is_self_loop() {
            if to == x {
                1
            } else {
                0
            }
        } else if r.nodes[0] == v {
            0
        } else {
            1
        }
    }

    pub fn insert_edge(&mut self, a: NodeId, b: NodeId, weight: f64) -> Result<EdgeId, TopologyError> {
        self.check_node(a)?;
        self.check_node(b)?;
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(TopologyError::InvalidWeight(weight));
        }
        let e = self.alloc_edge()?;
        let head_a = self.nodes[a as usize].cached_edge;
        if a == b {
            self.edges[e as usize] = EdgeRecord {
                nodes: [a, a],
                prev: [head_a, e],
                next: [e, NULL],
            };
            if head_a != NULL {
                let s = self.slot_after(head_a, a, NULL);
                self.edges[head_a as usize].next[s] = e;
            }
        } else {
            let head_b = self.nodes[b as usize].cached_edge;
            self.edges[e as usize] = EdgeRecord {
                nodes: [a, b],
                prev: [head_a, head_b],
                next: [NULL, NULL],
            };
            if head_a != NULL {
                let s = self.slot_after(head_a, a, NULL);
                self.edges[head_a as usize].next[s] = e;
            }
            if head_b != NULL {
                let s = self.slot_after(head_b, b, NULL);
                self.edges[head_b as usize].next[s] = e;
            }
        }
        self.nodes[a as usize].cached_edge = e;
        self.nodes[b as usize].cached_edge = e;
        self.weights[e as usize] = weight;
        self.directions[e as usize] = Direction::Both;
        self.edge_labels[e as usize].clear();
        self.live_edges += 1;
        Ok(e)
    }

    fn unlink(&mut self, e: EdgeId, side: usize) {
        let rec = self.edges[e as usize];
        let v = rec.nodes[side];
        let p = rec.prev[side];
        let n = rec.next[side];
        if p != NULL {
            let ps = self.slot_after(p, v, e);
            self.edges[p as usize].next[ps] = n;
        }
        if n != NULL {
            let ns = self.slot_before(n, v, e);
            self.edges[n as usize].prev[ns] = p;
        } else {
            // e sat at the head of v's chain.
            debug_assert_eq!(self.nodes[v as usize].cached_edge, e);
            self.nodes[v as usize].cached_edge = p;
        }
    }

    pub fn delete_edge(&mut self, e: EdgeId) -> Result<(), TopologyError> {
        self.check_edge(e)?;
        if self.edges[e as usize].is_self_loop() {
            self.unlink(e, 1);
            self.unlink(e, 0);
        } else {
            self.unlink(e, 0);
            self.unlink(e, 1);
        }
        self.edges[e as usize] = EdgeRecord::default();
        self.weights[e as usize] = 0.0;
        self.directions[e as usize] = Direction::Both;
        self.edge_labels[e as usize].clear();
        self.edge_aliases.remove(&e);
        self.free.edges.push_back(e);
        self.live_edges -= 1;
        Ok(())
    }

    /// Deletes `v` and all incident edges; returns the deleted edge ids in
    /// ascending order (which is also the order they enter the free queue).
    pub fn delete_node(&mut self, v: NodeId) -> Result<Vec<EdgeId>, TopologyError> {
        self.check_node(v)?;
        let mut incident: Vec<EdgeId> = self.incident(v).collect();
        incident.sort_unstable();
        for &e in &incident {
            self.delete_edge(e)?;
        }
        let rec = std::mem::take(&mut self.nodes[v as usize]);
        if let Some(ext) = rec.external_id {
            self.by_external.remove(&ext);
        }
        if let Some(name) = rec.name_id {
            self.by_name.remove(&name);
        }
        self.free.nodes.push_back(v);
        self.live_nodes -= 1;
        Ok(incident)
    }

    /// Chain walk from the cached edge of `v`. Yields each incident edge once.
    /// `v` is assumed live; a dead node yields nothing.
    pub fn incident(&self, v: NodeId) -> Incident<'_> {
        let start = self.nodes.get(v as usize).map_or(NULL, |n| n.cached_edge);
        Incident {
            graph: self,
            node: v,
            cur: start,
            from: NULL,
            last: NULL,
        }
    }

    pub fn adjacent_edges(&self, v: NodeId) -> Result<Vec<EdgeId>, TopologyError> {
        self.check_node(v)?;
        Ok(self.incident(v).collect())
    }

    /// `(opposite node, edge, weight)` for every incident edge, in walk order.
    pub fn neighbors(&self, v: NodeId) -> Result<Vec<(NodeId, EdgeId, f64)>, TopologyError> {
        self.check_node(v)?;
        Ok(self
            .incident(v)
            .map(|e| (self.edges[e as usize].other(v), e, self.weights[e as usize]))
            .collect())
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.incident(v).count()
    }

    pub fn to_csr(&self) -> Csr {
        Csr::from_graph(self)
    }

    // ---- per-edge attributes ----

    pub fn weight(&self, e: EdgeId) -> f64 {
        self.weights[e as usize]
    }

    pub fn set_weight(&mut self, e: EdgeId, weight: f64) -> Result<(), TopologyError> {
        self.check_edge(e)?;
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(TopologyError::InvalidWeight(weight));
        }
        self.weights[e as usize] = weight;
        Ok(())
    }

    pub fn direction(&self, e: EdgeId) -> Direction {
        self.directions[e as usize]
    }

    pub fn set_direction(&mut self, e: EdgeId, dir: Direction) -> Result<(), TopologyError> {
        self.check_edge(e)?;
        self.directions[e as usize] = dir;
        Ok(())
    }

    /// Whether edge `e` may be traversed leaving node `from`.
    pub fn traversable_from(&self, e: EdgeId, from: NodeId) -> bool {
        let r = &self.edges[e as usize];
        match self.directions[e as usize] {
            Direction::Both => true,
            Direction::Forward => r.nodes[0] == from,
            Direction::Backward => r.nodes[1] == from,
        }
    }

    pub fn edge_alias(&self, e: EdgeId) -> Option<i64> {
        self.edge_aliases.get(&e).copied()
    }

    pub fn set_edge_alias(&mut self, e: EdgeId, alias: i64) -> Result<(), TopologyError> {
        self.check_edge(e)?;
        self.edge_aliases.insert(e, alias);
        Ok(())
    }

    pub fn edge_aliases(&self) -> &BTreeMap<EdgeId, i64> {
        &self.edge_aliases
    }

    pub fn add_edge_label(&mut self, e: EdgeId, label: &str) -> Result<(), TopologyError> {
        self.check_edge(e)?;
        let id = self.labels.intern(label);
        let labels = &mut self.edge_labels[e as usize];
        if let Err(pos) = labels.binary_search(&id) {
            labels.insert(pos, id);
        }
        Ok(())
    }

    pub fn edge_label_ids(&self, e: EdgeId) -> &[u32] {
        &self.edge_labels[e as usize]
    }

    pub fn edge_labels(&self, e: EdgeId) -> impl Iterator<Item = &str> + '_ {
        self.edge_labels[e as usize]
            .iter()
            .map(|&id| self.labels.resolve(id).unwrap_or(""))
    }

    // ---- per-node attributes ----

    pub fn add_node_label(&mut self, v: NodeId, label: &str) -> Result<(), TopologyError> {
        self.check_node(v)?;
        let id = self.labels.intern(label);
        let labels = &mut self.nodes[v as usize].labels;
        if let Err(pos) = labels.binary_search(&id) {
            labels.insert(pos, id);
        }
        Ok(())
    }

    pub fn node_labels(&self, v: NodeId) -> impl Iterator<Item = &str> + '_ {
        self.nodes
            .get(v as usize)
            .map(|n| n.labels.as_slice())
            .unwrap_or(&[])
            .iter()
            .map(|&id| self.labels.resolve(id).unwrap_or(""))
    }

    pub fn node_has_label(&self, v: NodeId, label: &str) -> bool {
        match self.labels.get(label) {
            Some(id) => self.nodes[v as usize].labels.binary_search(&id).is_ok(),
            None => false,
        }
    }

    pub fn nodes_with_label(&self, label: &str) -> Vec<NodeId> {
        match self.labels.get(label) {
            Some(id) => self
                .node_ids()
                .filter(|&v| self.nodes[v as usize].labels.binary_search(&id).is_ok())
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn set_coords(&mut self, v: NodeId, x: f64, y: f64) -> Result<(), TopologyError> {
        self.check_node(v)?;
        self.nodes[v as usize].coords = Some((x, y));
        Ok(())
    }

    pub fn coords(&self, v: NodeId) -> Option<(f64, f64)> {
        self.nodes.get(v as usize).and_then(|n| n.coords)
    }

    pub fn node_name(&self, v: NodeId) -> Option<&str> {
        self.nodes
            .get(v as usize)
            .and_then(|n| n.name_id)
            .and_then(|id| self.names.resolve(id))
    }

    pub fn external_id(&self, v: NodeId) -> Option<i64> {
        self.nodes.get(v as usize).and_then(|n| n.external_id)
    }

    pub fn node_by_external(&self, ext: i64) -> Option<NodeId> {
        self.by_external.get(&ext).copied()
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.names.get(name).and_then(|id| self.by_name.get(&id).copied())
    }

    /// Integer key used for ordering and id-range splitting: the external id
    /// when one was ingested, otherwise the internal id.
    pub fn node_key(&self, v: NodeId) -> i64 {
        self.external_id(v).unwrap_or(v as i64)
    }

    /// Attribute snapshot of a live node, suitable for re-inserting it elsewhere.
    pub fn node_spec(&self, v: NodeId) -> NodeSpec {
        NodeSpec {
            labels: self.node_labels(v).map(str::to_string).collect(),
            coords: self.coords(v),
            name: self.node_name(v).map(str::to_string),
            external_id: self.external_id(v),
        }
    }

    /// Human-facing identity: external id, then name, then internal id.
    pub fn display_key(&self, v: NodeId) -> String {
        if let Some(ext) = self.external_id(v) {
            ext.to_string()
        } else if let Some(name) = self.node_name(v) {
            name.to_string()
        } else {
            v.to_string()
        }
    }

    /// Resolves user input to a node: external id, then name, then (for
    /// graphs without external ids) the internal id.
    pub fn resolve_node(&self, text: &str) -> Option<NodeId> {
        let text = text.trim();
        if let Ok(ext) = text.parse::<i64>() {
            if let Some(v) = self.node_by_external(ext) {
                return Some(v);
            }
        }
        if let Some(v) = self.node_by_name(text) {
            return Some(v);
        }
        if self.by_external.is_empty() {
            if let Ok(v) = text.parse::<NodeId>() {
                if self.is_live_node(v) {
                    return Some(v);
                }
            }
        }
        None
    }

    pub fn label_dictionary(&self) -> &Interner {
        &self.labels
    }

    pub fn name_dictionary(&self) -> &Interner {
        &self.names
    }

    /// Verifies chain symmetry, cached-edge validity and index consistency.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut seen = vec![0usize; self.edges.len()];
        for v in self.node_ids() {
            let head = self.nodes[v as usize].cached_edge;
            if head != NULL {
                if !self.is_live_edge(head) {
                    return Err(format!("node {v}: cached edge {head} is dead"));
                }
                let r = &self.edges[head as usize];
                if r.nodes[0] != v && r.nodes[1] != v {
                    return Err(format!("node {v}: cached edge {head} not incident"));
                }
            }
            let mut from = NULL;
            let mut cur = head;
            let mut steps = 0usize;
            while cur != NULL {
                let s = self.slot_after(cur, v, from);
                let r = &self.edges[cur as usize];
                if r.nodes[s] != v {
                    return Err(format!("node {v}: edge {cur} side {s} not at node"));
                }
                if r.next[s] != from {
                    return Err(format!("node {v}: edge {cur} next link {} != {from}", r.next[s]));
                }
                if !r.is_self_loop() || s == 0 {
                    seen[cur as usize] += 1;
                }
                from = cur;
                cur = r.prev[s];
                steps += 1;
                if steps > 2 * self.edges.len() {
                    return Err(format!("node {v}: chain does not terminate"));
                }
            }
        }
        for e in 1..self.edges.len() {
            let r = &self.edges[e];
            let expected = if !r.is_live() {
                0
            } else if r.is_self_loop() {
                1
            } else {
                2
            };
            if seen[e] != expected {
                return Err(format!("edge {e}: reached {} times, expected {expected}", seen[e]));
            }
            if r.is_live() && (!self.is_live_node(r.nodes[0]) || !self.is_live_node(r.nodes[1])) {
                return Err(format!("edge {e}: dangling endpoint"));
            }
        }
        if self.node_ids().count() != self.live_nodes || self.edge_ids().count() != self.live_edges {
            return Err("live counters out of sync".into());
        }
        for &e in &self.free.edges {
            if self.is_live_edge(e) {
                return Err(format!("free edge {e} is live"));
            }
        }
        for &v in &self.free.nodes {
            if self.is_live_node(v) {
                return Err(format!("free node {v} is live"));
            }
        }
        Ok(())
    }

    // Raw access for the persistence layer.
    pub(crate) fn raw_parts(&self) -> RawParts<'_> {
        RawParts {
            nodes: &self.nodes,
            edges: &self.edges,
            weights: &self.weights,
            directions: &self.directions,
            edge_labels: &self.edge_labels,
            edge_aliases: &self.edge_aliases,
            free: &self.free,
            labels: &self.labels,
            names: &self.names,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_raw(
        nodes: Vec<NodeRecord>,
        edges: Vec<EdgeRecord>,
        weights: Vec<f64>,
        directions: Vec<Direction>,
        edge_labels: Vec<Vec<u32>>,
        edge_aliases: BTreeMap<EdgeId, i64>,
        free: FreeList,
        labels: Interner,
        names: Interner,
    ) -> DlsGraph {
        let mut by_external = HashMap::new();
        let mut by_name = HashMap::new();
        let mut live_nodes = 0;
        for (i, n) in nodes.iter().enumerate().skip(1) {
            if n.live {
                live_nodes += 1;
                if let Some(ext) = n.external_id {
                    by_external.insert(ext, i as NodeId);
                }
                if let Some(name) = n.name_id {
                    by_name.insert(name, i as NodeId);
                }
            }
        }
        let live_edges = edges.iter().skip(1).filter(|r| r.is_live()).count();
        DlsGraph {
            nodes,
            edges,
            weights,
            directions,
            edge_labels,
            edge_aliases,
            free,
            labels,
            names,
            by_external,
            by_name,
            live_nodes,
            live_edges,
        }
    }
}

pub(crate) struct RawParts<'a> {
    pub nodes: &'a [NodeRecord],
    pub edges: &'a [EdgeRecord],
    pub weights: &'a [f64],
    pub directions: &'a [Direction],
    pub edge_labels: &'a [Vec<u32>],
    pub edge_aliases: &'a BTreeMap<EdgeId, i64>,
    pub free: &'a FreeList,
    pub labels: &'a Interner,
    pub names: &'a Interner,
}

pub(crate) fn live_node_record(
    cached_edge: EdgeId,
    labels: Vec<u32>,
    coords: Option<(f64, f64)>,
    name_id: Option<u32>,
    external_id: Option<i64>,
) -> NodeRecord {
    NodeRecord {
        cached_edge,
        labels,
        coords,
        name_id,
        external_id,
        live: true,
    }
}

/// Iterator over the edges incident to one node, following prev links from
/// the cached head edge.
pub struct Incident<'a> {
    graph: &'a DlsGraph,
    node: NodeId,
    cur: EdgeId,
    from: EdgeId,
    last: EdgeId,
}

impl Iterator for Incident<'_> {
    type Item = EdgeId;

    fn next(&mut self) -> Option<EdgeId> {
        while self.cur != NULL {
            let e = self.cur;
            let s = self.graph.slot_after(e, self.node, self.from);
            self.from = e;
            self.cur = self.graph.edges[e as usize].prev[s];
            if e != self.last {
                self.last = e;
                return Some(e);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nodes(g: &mut DlsGraph, n: usize) -> Vec<NodeId> {
        (0..n).map(|_| g.add_node()).collect()
    }

    // Vertex 1 with edges 1=(1,2), 2=(1,3), 3=(1,4).
    fn star_fixture() -> DlsGraph {
        let mut g = DlsGraph::new();
        nodes(&mut g, 4);
        g.insert_edge(1, 2, 1.0).unwrap();
        g.insert_edge(1, 3, 1.0).unwrap();
        g.insert_edge(1, 4, 1.0).unwrap();
        g
    }

    #[test]
    fn first_node_id_is_one() {
        let mut g = DlsGraph::new();
        assert_eq!(g.add_node(), 1);
        assert_eq!(g.add_node(), 2);
    }

    #[test]
    fn star_chain_walks_backwards_from_cache() {
        let g = star_fixture();
        assert_eq!(g.node(1).unwrap().cached_edge, 3);
        assert_eq!(g.adjacent_edges(1).unwrap(), vec![3, 2, 1]);
        assert_eq!(g.edge(3).unwrap().prev[0], 2);
        assert_eq!(g.edge(2).unwrap().prev[0], 1);
        assert_eq!(g.edge(1).unwrap().prev[0], 0);
        g.check_invariants().unwrap();
    }

    #[test]
    fn single_edge_has_empty_links() {
        let mut g = DlsGraph::new();
        nodes(&mut g, 2);
        let e = g.insert_edge(1, 2, 5.0).unwrap();
        let r = g.edge(e).unwrap();
        assert_eq!(r.prev, [0, 0]);
        assert_eq!(r.next, [0, 0]);
        assert_eq!(g.neighbors(2).unwrap(), vec![(1, e, 5.0)]);
    }

    #[test]
    fn delete_middle_edge() {
        let mut g = star_fixture();
        g.delete_edge(2).unwrap();
        assert_eq!(g.adjacent_edges(1).unwrap(), vec![3, 1]);
        assert_eq!(g.adjacent_edges(3).unwrap(), Vec::<EdgeId>::new());
        g.check_invariants().unwrap();
    }

    #[test]
    fn delete_head_edge_repairs_cache_with_prev() {
        let mut g = star_fixture();
        g.delete_edge(3).unwrap();
        assert_eq!(g.node(1).unwrap().cached_edge, 2);
        assert_eq!(g.adjacent_edges(1).unwrap(), vec![2, 1]);
        g.check_invariants().unwrap();
    }

    #[test]
    fn delete_only_edge_clears_caches() {
        let mut g = DlsGraph::new();
        nodes(&mut g, 2);
        let e = g.insert_edge(1, 2, 1.0).unwrap();
        g.delete_edge(e).unwrap();
        assert_eq!(g.node(1).unwrap().cached_edge, 0);
        assert_eq!(g.node(2).unwrap().cached_edge, 0);
    }

    #[test]
    fn deleted_edge_id_is_reused() {
        let mut g = star_fixture();
        g.delete_edge(2).unwrap();
        assert_eq!(g.insert_edge(2, 3, 1.0).unwrap(), 2);
        assert_eq!(g.edge_capacity(), 3);
        g.check_invariants().unwrap();
    }

    #[test]
    fn node_deletion_recycles_ids() {
        let mut g = DlsGraph::new();
        nodes(&mut g, 5);
        g.delete_node(3).unwrap();
        assert_eq!(g.add_node(), 3);
        assert_eq!(g.add_node(), 6);
    }

    #[test]
    fn delete_isolated_and_repeated_endpoints() {
        let mut g = DlsGraph::new();
        nodes(&mut g, 3);
        assert!(g.delete_node(3).unwrap().is_empty());
        let e = g.insert_edge(1, 2, 1.0).unwrap();
        assert_eq!(g.delete_node(1).unwrap(), vec![e]);
        assert!(g.delete_node(2).unwrap().is_empty());
        assert_eq!(g.delete_node(2), Err(TopologyError::InvalidNode(2)));
    }

    #[test]
    fn dead_ids_are_rejected() {
        let mut g = DlsGraph::new();
        nodes(&mut g, 1);
        assert_eq!(g.insert_edge(1, 2, 1.0), Err(TopologyError::InvalidNode(2)));
        assert_eq!(g.delete_edge(1), Err(TopologyError::InvalidEdge(1)));
        assert_eq!(g.adjacent_edges(0), Err(TopologyError::InvalidNode(0)));
        assert_eq!(g.insert_edge(1, 1, -1.0), Err(TopologyError::InvalidWeight(-1.0)));
    }

    #[test]
    fn self_loops_are_listed_once() {
        let mut g = DlsGraph::new();
        nodes(&mut g, 2);
        let a = g.insert_edge(1, 2, 1.0).unwrap();
        let l = g.insert_edge(1, 1, 2.0).unwrap();
        let b = g.insert_edge(1, 2, 3.0).unwrap();
        let l2 = g.insert_edge(1, 1, 4.0).unwrap();
        g.check_invariants().unwrap();
        assert_eq!(g.adjacent_edges(1).unwrap(), vec![l2, b, l, a]);
        assert!(g.neighbors(1).unwrap().contains(&(1, l, 2.0)));
        g.delete_edge(l).unwrap();
        g.check_invariants().unwrap();
        assert_eq!(g.adjacent_edges(1).unwrap(), vec![l2, b, a]);
        g.delete_edge(l2).unwrap();
        g.check_invariants().unwrap();
        assert_eq!(g.adjacent_edges(1).unwrap(), vec![b, a]);
        assert_eq!(g.adjacent_edges(2).unwrap(), vec![b, a]);
    }

    #[test]
    fn star_with_fifty_spokes() {
        let mut g = DlsGraph::new();
        let hub = g.add_node();
        let mut expected = Vec::new();
        for _ in 0..50 {
            let v = g.add_node();
            expected.push(g.insert_edge(hub, v, 1.0).unwrap());
        }
        let mut got = g.adjacent_edges(hub).unwrap();
        assert_eq!(got.len(), 50);
        got.sort_unstable();
        assert_eq!(got, expected);
    }

    #[test]
    fn labels_and_lookup() {
        let mut g = DlsGraph::new();
        let a = g
            .insert_node(NodeSpec::new().name("susan").label("FEMALE").external_id(7))
            .unwrap();
        assert_eq!(g.node_by_name("susan"), Some(a));
        assert_eq!(g.node_by_external(7), Some(a));
        assert_eq!(g.resolve_node("7"), Some(a));
        assert_eq!(g.resolve_node("susan"), Some(a));
        assert!(g.node_has_label(a, "FEMALE"));
        assert_eq!(g.nodes_with_label("FEMALE"), vec![a]);
        assert!(matches!(
            g.insert_node(NodeSpec::new().name("susan")),
            Err(TopologyError::DuplicateName(_, _))
        ));
        g.delete_node(a).unwrap();
        assert_eq!(g.node_by_name("susan"), None);
    }
}
