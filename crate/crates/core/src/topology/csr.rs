use super::{DlsGraph, EdgeId, NodeId};

/// Read-only compressed sparse row snapshot of a [`DlsGraph`].
///
/// `offsets` has `node_capacity + 1` entries; node `v` owns the slice
/// `offsets[v - 1]..offsets[v]`. Dead node slots have empty slices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Csr {
    pub offsets: Vec<usize>,
    pub targets: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
    pub weights: Vec<f64>,
}

impl Csr {
    pub fn from_graph(g: &DlsGraph) -> Csr {
        let cap = g.node_capacity();
        let mut csr = Csr {
            offsets: Vec::with_capacity(cap + 1),
            targets: Vec::with_capacity(2 * g.edge_count()),
            edges: Vec::with_capacity(2 * g.edge_count()),
            weights: Vec::with_capacity(2 * g.edge_count()),
        };
        csr.offsets.push(0);
        for v in 1..=cap as NodeId {
            if g.is_live_node(v) {
                for e in g.incident(v) {
                    let rec = &g.edges[e as usize];
                    csr.targets.push(rec.other(v));
                    csr.edges.push(e);
                    csr.weights.push(g.weight(e));
                }
            }
            csr.offsets.push(csr.targets.len());
        }
        csr
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    fn range(&self, v: NodeId) -> std::ops::Range<usize> {
        let v = v as usize;
        if v == 0 || v >= self.offsets.len() {
            return 0..0;
        }
        self.offsets[v - 1]..self.offsets[v]
    }

    /// `(target, edge, weight)` entries of node `v`.
    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = (NodeId, EdgeId, f64)> + '_ {
        self.range(v)
            .map(move |i| (self.targets[i], self.edges[i], self.weights[i]))
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.range(v).len()
    }
}
