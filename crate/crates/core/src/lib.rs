//! Graph engine built on a fixed-storage double-link edge topology.
//!
//! Graphs are built from tables through a column-annotation grammar, split
//! across workers with duplicated interface nodes, and solved with a
//! round-based distributed shortest-path fixpoint.

pub mod grammar;
pub mod output;
pub mod partition;
pub mod query;
pub mod rebalance;
pub mod runtime;
pub mod sssp;
pub mod topology;
pub mod workspace;
