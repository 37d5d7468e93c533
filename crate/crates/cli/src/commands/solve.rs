use std::time::Instant;

use dlgraph::grammar::Table;
use dlgraph::output::{write_costs_csv, write_paths_csv};
use dlgraph::rebalance::default_source;
use dlgraph::runtime::{write_trace_csv, SolveOptions};
use dlgraph::sssp::{aggregate_path, batch_solve, PairOutcome, SolveError};
use dlgraph::workspace::Workspace;

use super::{output_path, resolve, write_to};
use crate::error::{CmdResult, Failure};
use crate::SolveArgs;

pub fn solve(ws: &Workspace, args: SolveArgs) -> CmdResult {
    let stored = ws.load(&args.graph)?;
    let (graph, cluster) = (&stored.graph, &stored.cluster);
    let opts = SolveOptions {
        parallel: !args.sequential,
        shuffle_seed: args.shuffle_seed,
        ..SolveOptions::default()
    };
    let paths_out = output_path(ws, args.paths.as_deref(), &args.graph, "paths.csv");

    if let Some(pairs_file) = &args.pairs {
        let table = Table::from_path(pairs_file, b',')?;
        let (Some(sc), Some(tc)) = (table.column("source"), table.column("target")) else {
            return Err(Failure::data(format!("{}: expected source and target columns", pairs_file.display())));
        };
        let mut pairs = Vec::with_capacity(table.len());
        for (i, row) in table.rows.iter().enumerate() {
            let at = |e: Failure| e.context(format!("pairs row {}", i + 1));
            pairs.push((resolve(graph, &row[sc]).map_err(at)?, resolve(graph, &row[tc]).map_err(at)?));
        }
        let started = Instant::now();
        let (outcomes, solves) = batch_solve(cluster, &pairs, &opts)?;
        let elapsed = started.elapsed();
        write_to(&paths_out, |w| Ok(write_paths_csv(graph, &outcomes, w)?))?;
        let missing = outcomes.iter().filter(|o| o.path().is_none()).count();
        println!("{} pairs over {} sources, {} without a path", outcomes.len(), solves, missing);
        eprintln!("time: {:.3} ms", elapsed.as_secs_f64() * 1e3);
        return Ok(());
    }

    let source = match &args.source {
        Some(s) => resolve(graph, s)?,
        None => default_source(graph).ok_or_else(|| Failure::data("graph has no nodes"))?,
    };
    let targets = args.targets.iter().map(|t| resolve(graph, t)).collect::<CmdResult<Vec<_>>>()?;

    let started = Instant::now();
    let solution = cluster.orchestrate(source, &opts)?;
    let mut outcomes = Vec::with_capacity(targets.len());
    for &t in &targets {
        outcomes.push(match aggregate_path(cluster, &solution, t) {
            Ok(p) => PairOutcome::Path(p),
            Err(SolveError::NoPath { from, to }) => PairOutcome::NoPath { source: from, target: to },
            Err(e) => return Err(e.into()),
        });
    }
    let elapsed = started.elapsed();

    let costs_out = output_path(ws, args.costs.as_deref(), &args.graph, "costs.csv");
    write_to(&costs_out, |w| Ok(write_costs_csv(graph, cluster, &solution, w)?))?;
    if !targets.is_empty() {
        write_to(&paths_out, |w| Ok(write_paths_csv(graph, &outcomes, w)?))?;
    }
    if let Some(trace) = &args.trace {
        write_to(trace, |w| Ok(write_trace_csv(&solution.trace, w)?))?;
    }

    let reached = graph.node_ids().filter(|&v| solution.cost(cluster, v).is_finite()).count();
    println!(
        "source {}: {} rounds, {} of {} nodes reached",
        graph.display_key(source),
        solution.rounds,
        reached,
        graph.node_count()
    );
    eprintln!("time: {:.3} ms", elapsed.as_secs_f64() * 1e3);
    Ok(())
}
