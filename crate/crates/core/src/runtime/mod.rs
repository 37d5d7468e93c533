//! Client/worker protocol: synchronous rounds in which the client fans
//! duplicated-node cost updates out to every other home of the node, until a
//! round yields no update and every queue is empty.

pub mod worker;

use std::collections::{HashMap, VecDeque};
use std::io::Write;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::Serialize;

use crate::partition::PartitionAssignment;
use crate::sssp::{local_dijkstra, CostField, SolveError};
use crate::topology::{DlsGraph, EdgeId, NodeId, TopologyError};

pub use worker::{build_workers, WorkerMaps, WorkerState};

#[derive(Clone, Debug, PartialEq)]
pub enum Message {
    /// Client to the source's home workers.
    SolveStart { source: NodeId },
    /// Worker to client: improved duplicated nodes. Client to worker: fronts.
    CostUpdates(Vec<(NodeId, f64)>),
    /// Worker to client at the end of its share of a round.
    RoundDone {
        updates_received: usize,
        updates_sent: usize,
        nodes_settled: usize,
        millis: f64,
        newly_reached: Vec<NodeId>,
    },
    /// Client to worker: walk predecessors back from this global node.
    PathProbe { node: NodeId },
    /// Worker to client: the walked piece in target-to-source order, and the
    /// node at which another worker must continue (if any).
    PathSegment {
        worker: u32,
        nodes: Vec<NodeId>,
        edges: Vec<EdgeId>,
        handoff: Option<NodeId>,
    },
    Abort,
}

/// Best reported cost of a duplicated node and who reported it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LedgerEntry {
    pub cost: f64,
    pub worker: u32,
    pub round: u32,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RoundLedger {
    pub round: u32,
    /// Per-worker inbound queues.
    pub pending: Vec<VecDeque<Message>>,
    best: HashMap<NodeId, LedgerEntry>,
}

impl RoundLedger {
    pub fn new(workers: usize) -> Self {
        RoundLedger {
            round: 0,
            pending: vec![VecDeque::new(); workers],
            best: HashMap::new(),
        }
    }

    /// Records `cost` for `node` if it beats the current entry. Within one
    /// round an equal cost from a lower worker id also replaces the entry,
    /// so the outcome does not depend on the order reports are serviced.
    pub fn record_improvement(&mut self, node: NodeId, cost: f64, worker: u32) -> bool {
        let round = self.round;
        let accept = match self.best.get(&node) {
            None => true,
            Some(cur) => cost < cur.cost || (cost == cur.cost && cur.round == round && worker < cur.worker),
        };
        if accept {
            self.best.insert(node, LedgerEntry { cost, worker, round });
        }
        accept
    }

    pub fn entry(&self, node: NodeId) -> Option<LedgerEntry> {
        self.best.get(&node).copied()
    }

    pub fn last_improver(&self, node: NodeId) -> Option<u32> {
        self.best.get(&node).map(|e| e.worker)
    }

    pub fn len(&self) -> usize {
        self.best.len()
    }

    pub fn is_empty(&self) -> bool {
        self.best.is_empty()
    }
}

/// One row per worker per round it ran in.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub round: u32,
    pub worker: u32,
    pub updates_received: usize,
    pub updates_sent: usize,
    pub nodes_settled: usize,
    pub millis: f64,
}

/// One duplicated-node cost reported to the client.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Emission {
    pub round: u32,
    pub worker: u32,
    pub node: NodeId,
    pub cost: f64,
}

pub fn write_trace_csv<W: Write>(rows: &[TraceRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(["round", "worker", "updates_received", "updates_sent", "nodes_settled", "millis"])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Shared flag that stops a solve at the next round boundary.
#[derive(Clone, Debug, Default)]
pub struct AbortHandle(Arc<AtomicBool>);

impl AbortHandle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn abort(&self) {
        self.0.store(true, Ordering::SeqCst);
    }

    pub fn is_aborted(&self) -> bool {
        self.0.load(Ordering::SeqCst)
    }
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Run the workers of a round on the rayon pool.
    pub parallel: bool,
    /// Shuffle the order in which workers are run and their replies serviced.
    pub shuffle_seed: Option<u64>,
    pub abort: Option<AbortHandle>,
    /// Abort once this many rounds have run without converging.
    pub round_limit: Option<u32>,
    /// Simulated fault: the given worker fails in the given round.
    pub fault: Option<(u32, u32)>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            parallel: true,
            shuffle_seed: None,
            abort: None,
            round_limit: None,
            fault: None,
        }
    }
}

impl SolveOptions {
    pub fn sequential() -> Self {
        SolveOptions {
            parallel: false,
            ..Self::default()
        }
    }
}

/// Converged state of a distributed solve.
#[derive(Clone, Debug)]
pub struct Solution {
    pub source: NodeId,
    pub fields: Vec<CostField>,
    pub ledger: RoundLedger,
    /// Rounds in which at least one worker ran.
    pub rounds: u32,
    pub trace: Vec<TraceRow>,
    /// Distinct global nodes with finite cost after each round.
    pub finite_per_round: Vec<usize>,
    pub updates_emitted: usize,
    pub updates_delivered: usize,
    /// Every update reported by a worker, in client processing order.
    pub emissions: Vec<Emission>,
}

/// The set of workers plus the global placement of every node.
#[derive(Clone, Debug)]
pub struct Cluster {
    pub workers: Vec<WorkerState>,
    /// Indexed by global node id.
    pub homes: Vec<Vec<u32>>,
}

impl Cluster {
    pub fn new(graph: &DlsGraph, assignment: &PartitionAssignment) -> Result<Cluster, TopologyError> {
        Ok(Cluster {
            workers: build_workers(graph, assignment)?,
            homes: assignment.node_homes.clone(),
        })
    }

    pub fn from_parts(workers: Vec<WorkerState>, homes: Vec<Vec<u32>>) -> Cluster {
        Cluster { workers, homes }
    }

    pub fn worker_count(&self) -> usize {
        self.workers.len()
    }

    pub fn homes(&self, global: NodeId) -> &[u32] {
        self.homes.get(global as usize).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn contains(&self, global: NodeId) -> bool {
        !self.homes(global).is_empty()
    }

    /// Runs rounds from `source` until no worker has pending messages.
    pub fn orchestrate(&self, source: NodeId, opts: &SolveOptions) -> Result<Solution, SolveError> {
        if !self.contains(source) {
            return Err(SolveError::UnknownNode(source));
        }
        let k = self.workers.len();
        let mut fields: Vec<CostField> = self.workers.iter().map(CostField::for_worker).collect();
        let mut ledger = RoundLedger::new(k);
        for &h in self.homes(source) {
            ledger.pending[h as usize].push_back(Message::SolveStart { source });
        }
        let mut rng = opts.shuffle_seed.map(StdRng::seed_from_u64);
        let mut reached = vec![false; self.homes.len()];
        let mut finite = 0usize;
        let mut trace = Vec::new();
        let mut finite_per_round = Vec::new();
        let (mut emitted, mut delivered) = (0usize, 0usize);
        let mut emissions = Vec::new();

        loop {
            let stop = opts.abort.as_ref().is_some_and(AbortHandle::is_aborted)
                || opts.round_limit.is_some_and(|limit| ledger.round >= limit);
            let mut order: Vec<usize> = (0..k).filter(|&w| !ledger.pending[w].is_empty()).collect();
            if stop && !order.is_empty() {
                for q in &mut ledger.pending {
                    q.push_back(Message::Abort);
                    q.clear();
                }
                return Err(SolveError::Aborted {
                    round: ledger.round,
                    finite_nodes: finite,
                });
            }
            if order.is_empty() {
                break;
            }
            ledger.round += 1;
            let round = ledger.round;
            if let Some(rng) = rng.as_mut() {
                order.shuffle(rng);
            }
            let jobs: Vec<(usize, Vec<Message>)> =
                order.iter().map(|&w| (w, ledger.pending[w].drain(..).collect())).collect();

            let results: Vec<(usize, Result<Vec<Message>, String>)> = if opts.parallel {
                let mut slots: Vec<Option<&mut CostField>> = fields.iter_mut().map(Some).collect();
                let tasks: Vec<_> = jobs
                    .into_iter()
                    .map(|(w, inbox)| (w, slots[w].take().expect("one job per worker"), inbox))
                    .collect();
                tasks
                    .into_par_iter()
                    .map(|(w, field, inbox)| (w, run_round(&self.workers[w], field, inbox, round, opts.fault)))
                    .collect()
            } else {
                jobs.into_iter()
                    .map(|(w, inbox)| (w, run_round(&self.workers[w], &mut fields[w], inbox, round, opts.fault)))
                    .collect()
            };

            let mut outbound: Vec<Vec<(NodeId, f64)>> = vec![Vec::new(); k];
            for (w, res) in results {
                let replies = res.map_err(|message| SolveError::WorkerFailed {
                    worker: w as u32,
                    round,
                    message,
                    finite_nodes: finite,
                })?;
                for msg in replies {
                    match msg {
                        Message::CostUpdates(updates) => {
                            for (node, cost) in updates {
                                emitted += 1;
                                emissions.push(Emission {
                                    round,
                                    worker: w as u32,
                                    node,
                                    cost,
                                });
                                ledger.record_improvement(node, cost, w as u32);
                                for &h in self.homes(node) {
                                    if h as usize != w {
                                        outbound[h as usize].push((node, cost));
                                        delivered += 1;
                                    }
                                }
                            }
                        }
                        Message::RoundDone {
                            updates_received,
                            updates_sent,
                            nodes_settled,
                            millis,
                            newly_reached,
                        } => {
                            for g in newly_reached {
                                if !std::mem::replace(&mut reached[g as usize], true) {
                                    finite += 1;
                                }
                            }
                            trace.push(TraceRow {
                                round,
                                worker: w as u32,
                                updates_received,
                                updates_sent,
                                nodes_settled,
                                millis,
                            });
                        }
                        other => {
                            return Err(SolveError::Inconsistent(format!(
                                "worker {w} replied {other:?} during a solve round"
                            )))
                        }
                    }
                }
            }
            for (h, updates) in outbound.into_iter().enumerate() {
                if !updates.is_empty() {
                    ledger.pending[h].push_back(Message::CostUpdates(updates));
                }
            }
            finite_per_round.push(finite);
        }
        trace.sort_by_key(|r| (r.round, r.worker));
        Ok(Solution {
            source,
            fields,
            rounds: ledger.round,
            ledger,
            trace,
            finite_per_round,
            updates_emitted: emitted,
            updates_delivered: delivered,
            emissions,
        })
    }

    /// Worker-side handling of a path probe.
    pub fn probe(&self, worker: u32, field: &CostField, node: NodeId, source: NodeId) -> Result<Message, SolveError> {
        let ws = &self.workers[worker as usize];
        let mut v = ws
            .local(node)
            .ok_or_else(|| SolveError::Inconsistent(format!("node {node} is not on worker {worker}")))?;
        let mut nodes = vec![node];
        let mut edges = Vec::new();
        let limit = ws.subgraph.node_capacity();
        while field.pred_edge[v as usize] != 0 {
            let e = field.pred_edge[v as usize];
            v = ws.subgraph.edge(e).expect("predecessor edges are live").other(v);
            edges.push(ws.global_edge(e));
            nodes.push(ws.global(v));
            if edges.len() > limit {
                return Err(SolveError::Inconsistent(format!("predecessor cycle on worker {worker}")));
            }
        }
        let end = ws.global(v);
        Ok(Message::PathSegment {
            worker,
            nodes,
            edges,
            handoff: (end != source).then_some(end),
        })
    }
}

/// One worker's share of a round: apply every inbound message, relax once,
/// reply with improvements and a completion record.
fn run_round(
    ws: &WorkerState,
    field: &mut CostField,
    inbox: Vec<Message>,
    round: u32,
    fault: Option<(u32, u32)>,
) -> Result<Vec<Message>, String> {
    let start = Instant::now();
    if fault == Some((ws.worker_id, round)) {
        return Err("simulated worker fault".into());
    }
    let mut fronts = Vec::new();
    let mut updates_received = 0;
    for msg in inbox {
        match msg {
            Message::SolveStart { source } => fronts.push((source, 0.0)),
            Message::CostUpdates(updates) => {
                updates_received += updates.len();
                fronts.extend(updates);
            }
            Message::Abort => return Ok(Vec::new()),
            other => return Err(format!("unexpected message {other:?}")),
        }
    }
    let out = local_dijkstra(ws, field, &fronts);
    let mut replies = Vec::new();
    let updates_sent = out.improvements.len();
    if updates_sent > 0 {
        replies.push(Message::CostUpdates(out.improvements));
    }
    replies.push(Message::RoundDone {
        updates_received,
        updates_sent,
        nodes_settled: out.settled,
        millis: start.elapsed().as_secs_f64() * 1000.0,
        newly_reached: out.newly_reached,
    });
    Ok(replies)
}

impl Solution {
    /// Converged cost of a global node (equal on all its homes).
    pub fn cost(&self, cluster: &Cluster, global: NodeId) -> f64 {
        match cluster.homes(global).first() {
            Some(&w) => {
                let ws = &cluster.workers[w as usize];
                self.fields[w as usize].cost(ws.local(global).expect("homed"))
            }
            None => f64::INFINITY,
        }
    }

    /// Costs indexed by global node id (infinite for dead slots).
    pub fn costs(&self, cluster: &Cluster) -> Vec<f64> {
        (0..cluster.homes.len() as NodeId).map(|g| self.cost(cluster, g)).collect()
    }

    pub fn last_improver(&self, global: NodeId) -> Option<u32> {
        self.ledger.last_improver(global)
    }
}
