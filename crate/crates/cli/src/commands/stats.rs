use dlgraph::workspace::Workspace;

use crate::error::CmdResult;
use crate::StatsArgs;

pub fn stats(ws: &Workspace, args: StatsArgs) -> CmdResult {
    let Some(name) = args.graph else {
        let names = ws.catalog()?;
        if names.is_empty() {
            println!("no graphs in {}", ws.dir().display());
            return Ok(());
        }
        println!("graph,scheme,workers,nodes,edges,duplicated,score");
        for name in names {
            let g = ws.load(&name)?;
            let s = g.meta.assignment.score();
            println!(
                "{},{},{},{},{},{},{}",
                name,
                g.meta.scheme,
                g.meta.workers,
                g.graph.node_count(),
                g.graph.edge_count(),
                s.duplicated_total,
                s.score
            );
        }
        return Ok(());
    };

    let g = ws.load(&name)?;
    let a = &g.meta.assignment;
    let (nodes, edges, dup) = (a.nodes_per_worker(), a.edges_per_worker(), a.duplicated_per_worker());
    println!("worker,nodes,edges,duplicated");
    for w in 0..a.worker_count as usize {
        println!("{},{},{},{}", w, nodes[w], edges[w], dup[w]);
    }
    let s = a.score();
    println!(
        "total,{},{},{} (score {})",
        g.graph.node_count(),
        g.graph.edge_count(),
        s.duplicated_total,
        s.score
    );
    Ok(())
}
