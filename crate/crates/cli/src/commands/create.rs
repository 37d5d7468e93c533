use std::path::Path;

use dlgraph::grammar::{build_graph, parse_bindings, validate_request, GraphRequest, Table};
use dlgraph::partition::registry::{PartitionContext, StrategyRegistry};
use dlgraph::runtime::Cluster;
use dlgraph::workspace::{GraphMeta, Workspace, WorkspaceError};

use super::{parse_bool, parse_options};
use crate::error::{CmdResult, Failure};
use crate::CreateArgs;

const DEFAULT_WORKERS: u32 = 4;

fn read_table(path: &Path, delimiter: u8) -> CmdResult<Table> {
    Table::from_path(path, delimiter).map_err(Failure::from)
}

pub fn create(ws: &Workspace, args: CreateArgs) -> CmdResult {
    let options = parse_options(&args.options)?;
    let opt_flag = |key: &str| options.get(key).map(|v| parse_bool(key, v)).transpose();

    let scheme = args.partition.clone().or_else(|| options.get("partition").cloned());
    let workers = match args.workers {
        Some(w) => Some(w),
        None => options
            .get("workers")
            .map(|v| v.parse::<u32>().map_err(|_| Failure::usage(format!("option workers={v:?} is not a count"))))
            .transpose()?,
    };
    let merge_tolerance = match args.merge_tolerance {
        Some(t) => t,
        None => options
            .get("merge_tolerance")
            .map(|v| v.parse::<f64>().map_err(|_| Failure::usage(format!("option merge_tolerance={v:?} is not a number"))))
            .transpose()?
            .unwrap_or(0.0),
    };
    let directed = args.directed || opt_flag("directed")?.unwrap_or(false);
    let strict = args.strict || opt_flag("strict")?.unwrap_or(false);
    let recreate = args.recreate || opt_flag("recreate")?.unwrap_or(false);
    if !args.delimiter.is_ascii() {
        return Err(Failure::usage(format!("delimiter {:?} is not ASCII", args.delimiter)));
    }

    if !recreate && ws.exists(&args.graph) {
        return Err(WorkspaceError::Exists(args.graph.clone()).into());
    }

    let mut req = GraphRequest::new(&args.graph, parse_bindings(&args.identifiers)?);
    req.merge_tolerance = merge_tolerance;
    req.directed_default = directed;
    req.strict = strict;
    req.options = options.clone();
    let validated = validate_request(&req)?;

    let delimiter = args.delimiter as u8;
    let edges = read_table(&args.edges, delimiter)?;
    let nodes = args.nodes.as_deref().map(|p| read_table(p, delimiter)).transpose()?;
    let built = build_graph(&validated, &edges, nodes.as_ref())?;
    for e in &built.errors {
        eprintln!("warning: skipped {} row {}: {}", e.table, e.row, e.message);
    }

    let registry = StrategyRegistry::with_defaults();
    let scheme = scheme.unwrap_or_else(|| {
        if built.hints.edge_partition.is_empty() { "id-range" } else { "explicit" }.to_string()
    });
    let strategy = registry.create(&scheme)?;
    let workers = workers.or(strategy.required_workers()).unwrap_or(DEFAULT_WORKERS);
    let assignment = strategy.assign(&PartitionContext {
        graph: &built.graph,
        workers,
        hints: &built.hints,
    })?;
    let cluster = Cluster::new(&built.graph, &assignment)?;
    let score = assignment.score();

    let stats = built.stats.clone();
    let meta = GraphMeta::new(&args.graph, &strategy.name(), assignment, built.hints, &cluster, stats.clone(), options);
    ws.save(&built.graph, &cluster, &meta, recreate)?;

    println!(
        "created {}: {} nodes, {} edges, {} merged, {} rows skipped",
        args.graph, stats.nodes, stats.edges, stats.merged_nodes, stats.skipped_rows
    );
    println!(
        "partition {} over {} worker{}: {} duplicated nodes, score {}",
        meta.scheme,
        meta.workers,
        if meta.workers == 1 { "" } else { "s" },
        score.duplicated_total,
        score.score
    );
    Ok(())
}
