use std::collections::HashMap;

use crate::topology::{DlsGraph, NodeId, NodeSpec, TopologyError};

/// Uniform-bin spatial hash used to snap coordinate points onto existing
/// nodes. Bin size equals the merge tolerance, so any node within tolerance
/// of a query point lives in the 3x3 block of bins around it.
#[derive(Clone, Debug, Default)]
pub struct NodeMergeIndex {
    tolerance: f64,
    bins: HashMap<(i64, i64), Vec<(NodeId, f64, f64)>>,
}

impl NodeMergeIndex {
    pub fn new(tolerance: f64) -> Self {
        NodeMergeIndex {
            tolerance: tolerance.max(0.0),
            bins: HashMap::new(),
        }
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    fn cell(&self, x: f64, y: f64) -> (i64, i64) {
        if self.tolerance > 0.0 {
            ((x / self.tolerance).floor() as i64, (y / self.tolerance).floor() as i64)
        } else {
            // exact matching: bin by bit pattern (+0.0 folds -0.0 into 0.0)
            ((x + 0.0).to_bits() as i64, (y + 0.0).to_bits() as i64)
        }
    }

    /// Lowest node id within tolerance of `(x, y)`, if any.
    pub fn find(&self, x: f64, y: f64) -> Option<NodeId> {
        let (cx, cy) = self.cell(x, y);
        let reach: i64 = if self.tolerance > 0.0 { 1 } else { 0 };
        let mut best: Option<NodeId> = None;
        for dx in -reach..=reach {
            for dy in -reach..=reach {
                let Some(bin) = self.bins.get(&(cx.saturating_add(dx), cy.saturating_add(dy))) else {
                    continue;
                };
                for &(id, nx, ny) in bin {
                    let d = ((nx - x).powi(2) + (ny - y).powi(2)).sqrt();
                    if d <= self.tolerance && best.is_none_or(|b| id < b) {
                        best = Some(id);
                    }
                }
            }
        }
        best
    }

    /// Registers an existing node at `(x, y)` without merging.
    pub fn insert(&mut self, id: NodeId, x: f64, y: f64) {
        let cell = self.cell(x, y);
        self.bins.entry(cell).or_default().push((id, x, y));
    }

    /// Returns the node snapped to `(x, y)`, creating one when nothing lies
    /// within tolerance. The flag is `true` when an existing node was reused.
    pub fn merge_node(&mut self, graph: &mut DlsGraph, x: f64, y: f64) -> Result<(NodeId, bool), TopologyError> {
        if let Some(id) = self.find(x, y) {
            return Ok((id, true));
        }
        let id = graph.insert_node(NodeSpec::new().coords(x, y))?;
        self.insert(id, x, y);
        Ok((id, false))
    }

    pub fn len(&self) -> usize {
        self.bins.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn nearby_degrees_merge() {
        let mut g = DlsGraph::new();
        let mut idx = NodeMergeIndex::new(0.00001);
        let (a, _) = idx.merge_node(&mut g, -77.03650, 38.89760).unwrap();
        let (b, merged) = idx.merge_node(&mut g, -77.036505, 38.89760).unwrap();
        assert_eq!(a, b);
        assert!(merged);
    }

    #[test]
    fn zero_tolerance_keeps_distinct_points() {
        let mut g = DlsGraph::new();
        let mut idx = NodeMergeIndex::new(0.0);
        let (a, _) = idx.merge_node(&mut g, 1.0, 1.0).unwrap();
        let (b, _) = idx.merge_node(&mut g, 1.0, 1.0000001).unwrap();
        let (c, _) = idx.merge_node(&mut g, 1.0, 1.0).unwrap();
        let (d, _) = idx.merge_node(&mut g, -0.0, 0.0).unwrap();
        let (e, _) = idx.merge_node(&mut g, 0.0, -0.0).unwrap();
        assert_ne!(a, b);
        assert_eq!(a, c);
        assert_eq!(d, e);
    }

    // Quadratic reference: scan every previously created node.
    fn brute_force(points: &[(f64, f64)], tol: f64) -> Vec<usize> {
        let mut centers: Vec<(f64, f64)> = Vec::new();
        let mut out = Vec::new();
        for &(x, y) in points {
            let hit = centers
                .iter()
                .position(|&(cx, cy)| ((cx - x).powi(2) + (cy - y).powi(2)).sqrt() <= tol);
            match hit {
                Some(i) => out.push(i),
                None => {
                    centers.push((x, y));
                    out.push(centers.len() - 1);
                }
            }
        }
        out
    }

    #[test]
    fn matches_quadratic_scan() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let points: Vec<(f64, f64)> = (0..1000).map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))).collect();
        for tol in [0.0, 0.005, 0.02, 0.1] {
            let mut g = DlsGraph::new();
            let mut idx = NodeMergeIndex::new(tol);
            let got: Vec<usize> = points
                .iter()
                .map(|&(x, y)| idx.merge_node(&mut g, x, y).unwrap().0 as usize - 1)
                .collect();
            assert_eq!(got, brute_force(&points, tol), "tolerance {tol}");
        }
    }

    #[test]
    fn separated_clusters_match_union_find() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        let tol = 0.01;
        // cluster centres on a 0.1 lattice, members within tol/2 of centre
        let mut points = Vec::new();
        for _ in 0..1000 {
            let cx = rng.gen_range(0..10) as f64 * 0.1;
            let cy = rng.gen_range(0..10) as f64 * 0.1;
            let r = rng.gen_range(0.0..tol / 2.0);
            let t = rng.gen_range(0.0..std::f64::consts::TAU);
            points.push((cx + r * t.cos(), cy + r * t.sin()));
        }
        // union-find over all pairs within tolerance
        let n = points.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (points[i], points[j]);
                if ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt() <= tol {
                    let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                    parent[ri] = rj;
                }
            }
        }
        let mut g = DlsGraph::new();
        let mut idx = NodeMergeIndex::new(tol);
        let ids: Vec<NodeId> = points.iter().map(|&(x, y)| idx.merge_node(&mut g, x, y).unwrap().0).collect();
        for i in 0..n {
            for j in i + 1..n {
                assert_eq!(root(&mut parent, i) == root(&mut parent, j), ids[i] == ids[j]);
            }
        }
    }
}
