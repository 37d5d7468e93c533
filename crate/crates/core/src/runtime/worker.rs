use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::partition::PartitionAssignment;
use crate::topology::{DlsGraph, EdgeId, NodeId, TopologyError};

/// One worker's share of a partitioned graph, with the maps that translate
/// between its local ids and the global ids of the source graph.
#[derive(Clone, Debug, PartialEq)]
pub struct WorkerState {
    pub worker_id: u32,
    pub subgraph: DlsGraph,
    /// Indexed by local node id (slot 0 unused).
    pub global_of_local: Vec<NodeId>,
    pub local_of_global: HashMap<NodeId, NodeId>,
    /// Indexed by local edge id (slot 0 unused).
    pub global_edge_of_local: Vec<EdgeId>,
    pub duplicated_local: BTreeSet<NodeId>,
}

/// Id maps of a worker, in a form that serializes next to the subgraph dump.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkerMaps {
    pub worker_id: u32,
    pub global_of_local: Vec<NodeId>,
    pub global_edge_of_local: Vec<EdgeId>,
    pub duplicated_local: Vec<NodeId>,
}

impl WorkerState {
    /// Builds the subgraph of worker `w`: its homed nodes in ascending global
    /// order with their full records, then its owned edges in ascending order.
    pub fn build(graph: &DlsGraph, assignment: &PartitionAssignment, w: u32) -> Result<WorkerState, TopologyError> {
        let mut subgraph = DlsGraph::new();
        let mut global_of_local = vec![0];
        let mut local_of_global = HashMap::new();
        let mut duplicated_local = BTreeSet::new();
        for v in graph.node_ids() {
            if !assignment.homes(v).contains(&w) {
                continue;
            }
            let local = subgraph.insert_node(graph.node_spec(v))?;
            global_of_local.push(v);
            local_of_global.insert(v, local);
            if assignment.is_duplicated(v) {
                duplicated_local.insert(local);
            }
        }
        let mut global_edge_of_local = vec![0];
        for e in graph.edge_ids() {
            if assignment.owner(e) != Some(w) {
                continue;
            }
            let rec = graph.edge(e)?;
            let a = local_of_global[&rec.nodes[0]];
            let b = local_of_global[&rec.nodes[1]];
            let le = subgraph.insert_edge(a, b, graph.weight(e))?;
            subgraph.set_direction(le, graph.direction(e))?;
            for label in graph.edge_labels(e) {
                subgraph.add_edge_label(le, label)?;
            }
            if let Some(alias) = graph.edge_alias(e) {
                subgraph.set_edge_alias(le, alias)?;
            }
            global_edge_of_local.push(e);
        }
        Ok(WorkerState {
            worker_id: w,
            subgraph,
            global_of_local,
            local_of_global,
            global_edge_of_local,
            duplicated_local,
        })
    }

    pub fn from_parts(subgraph: DlsGraph, maps: WorkerMaps) -> WorkerState {
        let local_of_global = maps
            .global_of_local
            .iter()
            .enumerate()
            .skip(1)
            .map(|(l, &g)| (g, l as NodeId))
            .collect();
        WorkerState {
            worker_id: maps.worker_id,
            subgraph,
            global_of_local: maps.global_of_local,
            local_of_global,
            global_edge_of_local: maps.global_edge_of_local,
            duplicated_local: maps.duplicated_local.into_iter().collect(),
        }
    }

    pub fn maps(&self) -> WorkerMaps {
        WorkerMaps {
            worker_id: self.worker_id,
            global_of_local: self.global_of_local.clone(),
            global_edge_of_local: self.global_edge_of_local.clone(),
            duplicated_local: self.duplicated_local.iter().copied().collect(),
        }
    }

    pub fn local(&self, global: NodeId) -> Option<NodeId> {
        self.local_of_global.get(&global).copied()
    }

    pub fn global(&self, local: NodeId) -> NodeId {
        self.global_of_local[local as usize]
    }

    pub fn global_edge(&self, local: EdgeId) -> EdgeId {
        self.global_edge_of_local[local as usize]
    }

    pub fn is_duplicated_local(&self, local: NodeId) -> bool {
        self.duplicated_local.contains(&local)
    }
}

/// Builds every worker of an assignment, in parallel.
pub fn build_workers(graph: &DlsGraph, assignment: &PartitionAssignment) -> Result<Vec<WorkerState>, TopologyError> {
    use rayon::prelude::*;
    (0..assignment.worker_count)
        .into_par_iter()
        .map(|w| WorkerState::build(graph, assignment, w))
        .collect()
}
