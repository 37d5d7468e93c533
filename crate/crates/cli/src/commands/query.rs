use std::io::{self, Write};

use dlgraph::grammar::Table;
use dlgraph::query::{edge_key, query_paths, QueryPath, QuerySpec, Restriction, Scope, SideTables};
use dlgraph::topology::DlsGraph;
use dlgraph::query::Selector;
use dlgraph::workspace::Workspace;

use super::{resolve, write_to};
use crate::error::{CmdResult, Failure};
use crate::QueryArgs;

fn selector(graph: &DlsGraph, label: Option<&str>, nodes: &[String]) -> CmdResult<Selector> {
    match label {
        Some(l) => Ok(Selector::Label(l.to_string())),
        None => Ok(Selector::Nodes(nodes.iter().map(|n| resolve(graph, n)).collect::<CmdResult<_>>()?)),
    }
}

fn write_paths<W: Write>(graph: &DlsGraph, paths: &[QueryPath], out: W) -> CmdResult {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["path_id", "hops", "nodes", "edges"])?;
    for (i, p) in paths.iter().enumerate() {
        let nodes: Vec<String> = p.nodes.iter().map(|&v| graph.display_key(v)).collect();
        let edges: Vec<String> = p.edges.iter().map(|&e| edge_key(graph, e)).collect();
        w.write_record([i.to_string(), p.edges.len().to_string(), nodes.join(";"), edges.join(";")])?;
    }
    w.flush()?;
    Ok(())
}

pub fn query(ws: &Workspace, args: QueryArgs) -> CmdResult {
    let stored = ws.load(&args.graph)?;
    let graph = &stored.graph;

    let mut tables = SideTables::new();
    for item in &args.table {
        let (scope, file) = item
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("table {item:?} is not scope=file.csv")))?;
        let scope: Scope = scope.trim().parse()?;
        let t = Table::from_path(file.trim(), b',')?;
        tables.load(scope, &t, &args.key).map_err(|e| Failure::from(e).context(file.trim().to_string()))?;
    }
    let restrictions = args
        .restrict
        .iter()
        .map(|r| r.parse::<Restriction>())
        .collect::<Result<Vec<_>, _>>()?;

    let spec = QuerySpec {
        sources: selector(graph, args.from_label.as_deref(), &args.from)?,
        targets: selector(graph, args.to_label.as_deref(), &args.to)?,
        max_hops: args.hops,
        restrictions,
        limit: args.limit,
    };
    let paths = query_paths(graph, &tables, &spec)?;
    match &args.out {
        Some(path) => {
            write_to(path, |w| write_paths(graph, &paths, w))?;
            println!("{} paths", paths.len());
        }
        None => write_paths(graph, &paths, io::stdout().lock())?,
    }
    Ok(())
}
