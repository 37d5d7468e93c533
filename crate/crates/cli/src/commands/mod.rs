use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use dlgraph::topology::{DlsGraph, NodeId};
use dlgraph::workspace::Workspace;

use crate::error::{CmdResult, Failure};

mod create;
mod query;
mod repartition;
mod solve;
mod stats;

pub use create::create;
pub use query::query;
pub use repartition::repartition;
pub use solve::solve;
pub use stats::stats;

/// `key=value` pairs; later keys win.
pub(crate) fn parse_options(items: &[String]) -> CmdResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("option {item:?} is not key=value")))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Failure::usage(format!("option {item:?} has an empty key")));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

pub(crate) fn parse_bool(key: &str, value: &str) -> CmdResult<bool> {
    match value.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Failure::usage(format!("option {key}={value:?} is not a boolean"))),
    }
}

pub(crate) fn resolve(graph: &DlsGraph, text: &str) -> CmdResult<NodeId> {
    graph
        .resolve_node(text)
        .ok_or_else(|| Failure::data(format!("unknown node {text:?}")))
}

/// Explicit path, or `<graph>.<suffix>` inside the workspace.
pub(crate) fn output_path(ws: &Workspace, explicit: Option<&Path>, graph: &str, suffix: &str) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .unwrap_or_else(|| ws.path(&format!("{graph}.{suffix}")))
}

pub(crate) fn write_to<F>(path: &Path, f: F) -> CmdResult
where
    F: FnOnce(&mut BufWriter<File>) -> CmdResult,
{
    let ctx = format!("writing {}", path.display());
    let file = File::create(path).map_err(|e| Failure::from(e).context(ctx.clone()))?;
    let mut w = BufWriter::new(file);
    f(&mut w).map_err(|e| e.context(ctx.clone()))?;
    w.flush().map_err(|e| Failure::from(e).context(ctx))
}
