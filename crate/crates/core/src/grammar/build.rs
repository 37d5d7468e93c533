use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::merge::NodeMergeIndex;
use super::wkt::{parse_wkt_linestring, parse_wkt_point};
use super::{BindingSource, GrammarError, Identifier, Table, ValidatedRequest};
use crate::topology::{Direction, DlsGraph, EdgeId, NodeId, NodeSpec};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildStats {
    pub nodes: usize,
    pub edges: usize,
    /// Coordinate points that snapped onto an already existing node.
    pub merged_nodes: usize,
    pub skipped_rows: usize,
    /// Segments dropped because both ends snapped to the same node.
    pub collapsed_segments: usize,
}

/// Explicit partitioning columns, kept beside the graph for the partitioner.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionHints {
    /// edge -> (EDGE_PARTITION value, 1-based source row)
    pub edge_partition: BTreeMap<EdgeId, (u32, usize)>,
    /// node -> declared boundary workers (NODE_PARTITION_BOUNDARY)
    pub node_boundary: BTreeMap<NodeId, Vec<u32>>,
}

impl PartitionHints {
    pub fn is_empty(&self) -> bool {
        self.edge_partition.is_empty() && self.node_boundary.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowError {
    pub table: &'static str,
    pub row: usize,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct BuildOutput {
    pub graph: DlsGraph,
    pub stats: BuildStats,
    pub hints: PartitionHints,
    /// Rows skipped in non-strict mode.
    pub errors: Vec<RowError>,
}

enum Src<'a> {
    Col(usize),
    Const(&'a str),
}

struct Resolver<'a> {
    sources: BTreeMap<Identifier, Src<'a>>,
}

impl<'a> Resolver<'a> {
    fn new(req: &'a ValidatedRequest, table: &Table, name: &'static str, component_nodes: bool) -> Result<Self, GrammarError> {
        let mut sources = BTreeMap::new();
        for (&id, src) in &req.bindings {
            let is_node = id.component() == super::Component::Nodes;
            if is_node != component_nodes {
                continue;
            }
            let resolved = match src {
                BindingSource::Constant(v) => Src::Const(v.as_str()),
                BindingSource::Column(c) => match table.column(c) {
                    Some(i) => Src::Col(i),
                    // unquoted numeric literal with no matching column
                    None if c.parse::<f64>().is_ok() => Src::Const(c.as_str()),
                    None => {
                        return Err(GrammarError::MissingColumn {
                            identifier: id,
                            column: c.clone(),
                            table: name,
                        })
                    }
                },
            };
            sources.insert(id, resolved);
        }
        Ok(Resolver { sources })
    }

    fn get<'r>(&'r self, id: Identifier, row: &'r [String]) -> Option<&'r str> {
        match self.sources.get(&id)? {
            Src::Col(i) => row.get(*i).map(String::as_str),
            Src::Const(v) => Some(v),
        }
    }

    fn required<'r>(&'r self, id: Identifier, row: &'r [String]) -> Result<&'r str, String> {
        match self.get(id, row) {
            Some(v) if !v.trim().is_empty() => Ok(v.trim()),
            _ => Err(format!("{id} is empty")),
        }
    }

    fn optional<'r>(&'r self, id: Identifier, row: &'r [String]) -> Option<&'r str> {
        self.get(id, row).map(str::trim).filter(|v| !v.is_empty())
    }
}

fn parse_int(id: Identifier, v: &str) -> Result<i64, String> {
    v.parse::<i64>().map_err(|_| format!("{id}: {v:?} is not an integer"))
}

fn parse_real(id: Identifier, v: &str) -> Result<f64, String> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("{id}: {v:?} is not a finite number")),
    }
}

fn split_list(v: Option<&str>) -> Vec<String> {
    v.map(|s| {
        s.split(';')
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect()
    })
    .unwrap_or_default()
}

fn parse_workers(id: Identifier, v: Option<&str>) -> Result<Vec<u32>, String> {
    let mut out = Vec::new();
    for item in split_list(v) {
        out.push(item.parse::<u32>().map_err(|_| format!("{id}: {item:?} is not a worker index"))?);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

enum NodeKey {
    Id(i64),
    Name(String),
    Point,
}

struct NodeRow {
    key: NodeKey,
    coords: Option<(f64, f64)>,
    labels: Vec<String>,
    boundary: Vec<u32>,
}

fn parse_node_row(r: &Resolver, row: &[String]) -> Result<NodeRow, String> {
    use Identifier::*;
    let coords = if let Some(p) = r.optional(NODE_WKTPOINT, row) {
        Some(parse_wkt_point(p).map_err(|e| format!("NODE_WKTPOINT: {e}"))?)
    } else if r.sources.contains_key(&NODE_X) {
        Some((
            parse_real(NODE_X, r.required(NODE_X, row)?)?,
            parse_real(NODE_Y, r.required(NODE_Y, row)?)?,
        ))
    } else {
        None
    };
    let key = if r.sources.contains_key(&NODE_ID) {
        NodeKey::Id(parse_int(NODE_ID, r.required(NODE_ID, row)?)?)
    } else if r.sources.contains_key(&NODE_NAME) {
        NodeKey::Name(r.required(NODE_NAME, row)?.to_string())
    } else {
        if coords.is_none() {
            return Err("NODE_WKTPOINT is empty".into());
        }
        NodeKey::Point
    };
    Ok(NodeRow {
        key,
        coords,
        labels: split_list(r.optional(NODE_LABEL, row)),
        boundary: parse_workers(NODE_PARTITION_BOUNDARY, r.optional(NODE_PARTITION_BOUNDARY, row))?,
    })
}

enum Ends {
    Ids(i64, i64),
    Names(String, String),
    Points((f64, f64), (f64, f64)),
    Line(Vec<(f64, f64)>),
}

struct EdgeRow {
    ends: Ends,
    weight: Option<f64>,
    direction: Option<Direction>,
    labels: Vec<String>,
    alias: Option<i64>,
    partition: Option<u32>,
}

fn parse_edge_row(r: &Resolver, row: &[String]) -> Result<EdgeRow, String> {
    use Identifier::*;
    let ends = if r.sources.contains_key(&EDGE_NODE1_ID) {
        Ends::Ids(
            parse_int(EDGE_NODE1_ID, r.required(EDGE_NODE1_ID, row)?)?,
            parse_int(EDGE_NODE2_ID, r.required(EDGE_NODE2_ID, row)?)?,
        )
    } else if r.sources.contains_key(&EDGE_NODE1_NAME) {
        Ends::Names(
            r.required(EDGE_NODE1_NAME, row)?.to_string(),
            r.required(EDGE_NODE2_NAME, row)?.to_string(),
        )
    } else if r.sources.contains_key(&EDGE_NODE1_WKTPOINT) {
        let a = parse_wkt_point(r.required(EDGE_NODE1_WKTPOINT, row)?).map_err(|e| format!("EDGE_NODE1_WKTPOINT: {e}"))?;
        let b = parse_wkt_point(r.required(EDGE_NODE2_WKTPOINT, row)?).map_err(|e| format!("EDGE_NODE2_WKTPOINT: {e}"))?;
        Ends::Points(a, b)
    } else {
        Ends::Line(parse_wkt_linestring(r.required(EDGE_WKTLINE, row)?).map_err(|e| format!("EDGE_WKTLINE: {e}"))?)
    };
    let weight = match r.optional(EDGE_WEIGHT_VALUESPECIFIED, row) {
        Some(v) => {
            let w = parse_real(EDGE_WEIGHT_VALUESPECIFIED, v)?;
            if w < 0.0 {
                return Err(format!("EDGE_WEIGHT_VALUESPECIFIED: negative weight {w}"));
            }
            Some(w)
        }
        None => None,
    };
    let direction = match r.optional(EDGE_DIRECTION, row) {
        Some(v) => Some(
            Direction::from_code(parse_int(EDGE_DIRECTION, v)?)
                .ok_or_else(|| format!("EDGE_DIRECTION: {v:?} is not one of 0, 1, -1"))?,
        ),
        None => None,
    };
    let alias = r.optional(EDGE_ID, row).map(|v| parse_int(EDGE_ID, v)).transpose()?;
    let partition = match r.optional(EDGE_PARTITION, row) {
        Some(v) => Some(v.parse::<u32>().map_err(|_| format!("EDGE_PARTITION: {v:?} is not a worker index"))?),
        None => None,
    };
    Ok(EdgeRow {
        ends,
        weight,
        direction,
        labels: split_list(r.optional(EDGE_LABEL, row)),
        alias,
        partition,
    })
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

struct Builder {
    graph: DlsGraph,
    index: NodeMergeIndex,
    stats: BuildStats,
    hints: PartitionHints,
}

impl Builder {
    fn node_by_id(&mut self, ext: i64) -> Result<NodeId, String> {
        match self.graph.node_by_external(ext) {
            Some(v) => Ok(v),
            None => self.graph.insert_node(NodeSpec::new().external_id(ext)).map_err(|e| e.to_string()),
        }
    }

    fn node_by_name(&mut self, name: &str) -> Result<NodeId, String> {
        match self.graph.node_by_name(name) {
            Some(v) => Ok(v),
            None => self.graph.insert_node(NodeSpec::new().name(name)).map_err(|e| e.to_string()),
        }
    }

    fn node_at(&mut self, p: (f64, f64)) -> Result<NodeId, String> {
        let (v, merged) = self.index.merge_node(&mut self.graph, p.0, p.1).map_err(|e| e.to_string())?;
        if merged {
            self.stats.merged_nodes += 1;
        }
        Ok(v)
    }

    fn apply_node(&mut self, row: NodeRow) -> Result<(), String> {
        let v = match &row.key {
            NodeKey::Id(ext) => self.node_by_id(*ext)?,
            NodeKey::Name(name) => self.node_by_name(name)?,
            NodeKey::Point => self.node_at(row.coords.expect("point rows carry coordinates"))?,
        };
        if let (Some((x, y)), false) = (row.coords, matches!(row.key, NodeKey::Point)) {
            if self.graph.coords(v).is_none() {
                self.index.insert(v, x, y);
            }
            self.graph.set_coords(v, x, y).map_err(|e| e.to_string())?;
        }
        for label in &row.labels {
            self.graph.add_node_label(v, label).map_err(|e| e.to_string())?;
        }
        if !row.boundary.is_empty() {
            let entry = self.hints.node_boundary.entry(v).or_default();
            entry.extend(row.boundary);
            entry.sort_unstable();
            entry.dedup();
        }
        Ok(())
    }

    fn apply_edge(&mut self, row: EdgeRow, row_no: usize, directed_default: bool) -> Result<(), String> {
        // (a, b, geometric length if any)
        let mut segments: Vec<(NodeId, NodeId, Option<f64>)> = Vec::new();
        match &row.ends {
            Ends::Ids(a, b) => {
                let a = self.node_by_id(*a)?;
                let b = self.node_by_id(*b)?;
                segments.push((a, b, None));
            }
            Ends::Names(a, b) => {
                let a = self.node_by_name(a)?;
                let b = self.node_by_name(b)?;
                segments.push((a, b, None));
            }
            Ends::Points(p, q) => {
                let a = self.node_at(*p)?;
                let b = self.node_at(*q)?;
                if a == b {
                    self.stats.collapsed_segments += 1;
                } else {
                    segments.push((a, b, Some(dist(*p, *q))));
                }
            }
            Ends::Line(points) => {
                let ids = points.iter().map(|&p| self.node_at(p)).collect::<Result<Vec<_>, _>>()?;
                for i in 1..points.len() {
                    if ids[i - 1] == ids[i] {
                        self.stats.collapsed_segments += 1;
                    } else {
                        segments.push((ids[i - 1], ids[i], Some(dist(points[i - 1], points[i]))));
                    }
                }
            }
        }
        let total_len: f64 = segments.iter().filter_map(|s| s.2).sum();
        let n = segments.len() as f64;
        let direction = row
            .direction
            .unwrap_or(if directed_default { Direction::Forward } else { Direction::Both });
        for &(a, b, len) in &segments {
            let weight = match (row.weight, len) {
                (Some(w), Some(l)) if total_len > 0.0 => w * l / total_len,
                (Some(w), _) => w / n,
                (None, Some(l)) => l,
                (None, None) => 1.0,
            };
            let e = self.graph.insert_edge(a, b, weight).map_err(|e| e.to_string())?;
            self.graph.set_direction(e, direction).map_err(|e| e.to_string())?;
            for label in &row.labels {
                self.graph.add_edge_label(e, label).map_err(|e| e.to_string())?;
            }
            if let Some(alias) = row.alias {
                self.graph.set_edge_alias(e, alias).map_err(|e| e.to_string())?;
            }
            if let Some(p) = row.partition {
                self.hints.edge_partition.insert(e, (p, row_no));
            }
        }
        Ok(())
    }
}

/// Builds a graph from an edge table and an optional node table.
///
/// Node rows are applied first so that edge endpoints can refer to them by
/// id, name or (within the merge tolerance) coordinates.
pub fn build_graph(req: &ValidatedRequest, edges: &Table, nodes: Option<&Table>) -> Result<BuildOutput, GrammarError> {
    let mut b = Builder {
        graph: DlsGraph::new(),
        index: NodeMergeIndex::new(req.merge_tolerance),
        stats: BuildStats::default(),
        hints: PartitionHints::default(),
    };
    let mut errors = Vec::new();

    let fail = |table: &'static str, row: usize, message: String, errors: &mut Vec<RowError>| {
        if req.strict {
            Err(GrammarError::Row { table, row, message })
        } else {
            errors.push(RowError { table, row, message });
            Ok(())
        }
    };

    if req.binds_nodes() {
        let table = nodes.ok_or(GrammarError::MissingNodeTable)?;
        let r = Resolver::new(req, table, "nodes", true)?;
        for (i, row) in table.rows.iter().enumerate() {
            if let Err(msg) = parse_node_row(&r, row).and_then(|nr| b.apply_node(nr)) {
                fail("nodes", i + 1, msg, &mut errors)?;
            }
        }
    }

    let r = Resolver::new(req, edges, "edges", false)?;
    for (i, row) in edges.rows.iter().enumerate() {
        match parse_edge_row(&r, row) {
            Ok(er) => {
                if let Err(msg) = b.apply_edge(er, i + 1, req.directed_default) {
                    fail("edges", i + 1, msg, &mut errors)?;
                }
            }
            Err(msg) => fail("edges", i + 1, msg, &mut errors)?,
        }
    }

    b.stats.nodes = b.graph.node_count();
    b.stats.edges = b.graph.edge_count();
    b.stats.skipped_rows = errors.len();
    Ok(BuildOutput {
        graph: b.graph,
        stats: b.stats,
        hints: b.hints,
        errors,
    })
}
