//! CSV writers for solve results.

use std::io::Write;

use crate::runtime::{Cluster, Solution};
use crate::sssp::PairOutcome;
use crate::topology::{DlsGraph, NodeId};

/// `node,cost` for every live node in ascending internal id order. Costs use
/// Rust's shortest round-trip float formatting; unreachable nodes read `inf`.
pub fn write_costs_csv<W: Write>(graph: &DlsGraph, cluster: &Cluster, solution: &Solution, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["node", "cost"])?;
    for v in graph.node_ids() {
        w.write_record([graph.display_key(v), solution.cost(cluster, v).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn wkt_linestring(graph: &DlsGraph, nodes: &[NodeId]) -> Option<String> {
    if nodes.len() < 2 {
        return None;
    }
    let pts: Option<Vec<String>> = nodes
        .iter()
        .map(|&v| graph.coords(v).map(|(x, y)| format!("{x} {y}")))
        .collect();
    pts.map(|p| format!("LINESTRING({})", p.join(", ")))
}

/// One row per pair in input order. A `wkt` column is added when the graph
/// has coordinates; it is empty for paths that cannot be drawn.
pub fn write_paths_csv<W: Write>(graph: &DlsGraph, outcomes: &[PairOutcome], out: W) -> csv::Result<()> {
    let with_wkt = graph.node_ids().any(|v| graph.coords(v).is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["pair_id", "source", "target", "total_cost", "nodes"];
    if with_wkt {
        header.push("wkt");
    }
    w.write_record(&header)?;
    for (i, o) in outcomes.iter().enumerate() {
        let mut row = match o {
            PairOutcome::Path(p) => vec![
                i.to_string(),
                graph.display_key(p.source),
                graph.display_key(p.target),
                p.total_cost.to_string(),
                p.nodes.iter().map(|&v| graph.display_key(v)).collect::<Vec<_>>().join(";"),
            ],
            PairOutcome::NoPath { source, target } => vec![
                i.to_string(),
                graph.display_key(*source),
                graph.display_key(*target),
                f64::INFINITY.to_string(),
                String::new(),
            ],
        };
        if with_wkt {
            row.push(o.path().and_then(|p| wkt_linestring(graph, &p.nodes)).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
