use dlgraph::grammar::PartitionHints;
use dlgraph::rebalance::{rebalance, write_edge_table, write_node_table, RebalanceJob};
use dlgraph::runtime::{Cluster, SolveOptions};
use dlgraph::workspace::{GraphMeta, Workspace};

use super::resolve;
use crate::error::CmdResult;
use crate::RepartitionArgs;

fn counts(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

pub fn repartition(ws: &Workspace, args: RepartitionArgs) -> CmdResult {
    let stored = ws.load(&args.graph)?;
    let source = args.source.as_deref().map(|s| resolve(&stored.graph, s)).transpose()?;
    let job = RebalanceJob {
        source,
        workers: args.workers.unwrap_or(stored.meta.workers),
    };
    let opts = SolveOptions::default();
    let report = rebalance(&stored.graph, &stored.meta.assignment, &stored.cluster, &job, &opts)?;

    let mut nodes_csv = Vec::new();
    write_node_table(&stored.graph, &report, &mut nodes_csv)?;
    ws.write_file(&format!("{}.nodes.csv", args.graph), &nodes_csv)?;
    let mut edges_csv = Vec::new();
    write_edge_table(&report, &mut edges_csv)?;
    ws.write_file(&format!("{}.edges.csv", args.graph), &edges_csv)?;

    let cluster = Cluster::new(&report.graph, &report.assignment)?;
    let new_source = report.map.new_id(report.source).expect("source is live");
    let rounds_after = cluster.orchestrate(new_source, &opts)?.rounds;

    // Renumbering invalidates any explicit edge hints.
    let meta = GraphMeta::new(
        &args.graph,
        "id-range",
        report.assignment.clone(),
        PartitionHints::default(),
        &cluster,
        stored.meta.stats.clone(),
        stored.meta.options.clone(),
    );
    ws.save(&report.graph, &cluster, &meta, true)?;

    println!(
        "source {}: {} nodes renumbered, {} unreachable",
        stored.graph.display_key(report.source),
        report.map.len(),
        report.unreachable
    );
    println!(
        "score before: {} duplicated, score {}",
        report.before.duplicated_total, report.before.score
    );
    println!(
        "score after: {} duplicated, score {}",
        report.after.duplicated_total, report.after.score
    );
    println!("edges per worker before: {}", counts(&report.edges_before));
    println!("edges per worker after: {}", counts(&report.edges_after));
    println!("nodes per worker after: {}", counts(&report.assignment.nodes_per_worker()));
    println!("rounds before: {}, after: {}", report.rounds_before, rounds_after);
    Ok(())
}
