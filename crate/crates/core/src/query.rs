//! Hop-limited enumeration of simple paths between selected node sets, with
//! comparison predicates over node and edge side tables.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::grammar::Table;
use crate::topology::{DlsGraph, EdgeId, NodeId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QueryError {
    #[error("max hops must be at least 1")]
    ZeroHops,
    #[error("malformed restriction {0:?}; expected node|edge:attribute<op>value")]
    BadRestriction(String),
    #[error("unknown {scope} attribute {attribute:?}")]
    UnknownAttribute { scope: Scope, attribute: String },
    #[error("side table has no key column {0:?}")]
    MissingKey(String),
    #[error("unknown side table scope {0:?}; expected node or edge")]
    UnknownScope(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scope {
    Node,
    Edge,
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scope::Node => "node",
            Scope::Edge => "edge",
        })
    }
}

impl FromStr for Scope {
    type Err = QueryError;

    fn from_str(s: &str) -> Result<Self, QueryError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "node" | "nodes" => Ok(Scope::Node),
            "edge" | "edges" => Ok(Scope::Edge),
            other => Err(QueryError::UnknownScope(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparator {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl Comparator {
    fn holds(self, ord: Ordering) -> bool {
        match self {
            Comparator::Lt => ord == Ordering::Less,
            Comparator::Le => ord != Ordering::Greater,
            Comparator::Eq => ord == Ordering::Equal,
            Comparator::Ne => ord != Ordering::Equal,
            Comparator::Ge => ord != Ordering::Less,
            Comparator::Gt => ord == Ordering::Greater,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Eq => "=",
            Comparator::Ne => "!=",
            Comparator::Ge => ">=",
            Comparator::Gt => ">",
        }
    }
}

/// `scope:attribute <op> value`, e.g. `edge:since>=2002`.
#[derive(Clone, Debug, PartialEq)]
pub struct Restriction {
    pub scope: Scope,
    pub attribute: String,
    pub comparator: Comparator,
    pub value: String,
}

impl FromStr for Restriction {
    type Err = QueryError;

    fn from_str(text: &str) -> Result<Self, QueryError> {
        let bad = || QueryError::BadRestriction(text.to_string());
        let (scope, rest) = text.split_once(':').ok_or_else(bad)?;
        let scope: Scope = scope.parse().map_err(|_| bad())?;
        // two-character operators first
        let ops = [
            ("<=", Comparator::Le),
            (">=", Comparator::Ge),
            ("!=", Comparator::Ne),
            ("<>", Comparator::Ne),
            ("==", Comparator::Eq),
            ("<", Comparator::Lt),
            (">", Comparator::Gt),
            ("=", Comparator::Eq),
        ];
        let (pos, len, comparator) = ops
            .iter()
            .filter_map(|&(op, c)| rest.find(op).map(|p| (p, op.len(), c)))
            .min_by_key(|&(p, len, _)| (p, std::cmp::Reverse(len)))
            .ok_or_else(bad)?;
        let attribute = rest[..pos].trim();
        let value = rest[pos + len..].trim().trim_matches(|c| c == '\'' || c == '"');
        if attribute.is_empty() {
            return Err(bad());
        }
        Ok(Restriction {
            scope,
            attribute: attribute.to_string(),
            comparator,
            value: value.to_string(),
        })
    }
}

impl fmt::Display for Restriction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}{}{}", self.scope, self.attribute, self.comparator.as_str(), self.value)
    }
}

/// Numbers compare numerically when both sides parse; otherwise as strings.
fn compare(left: &str, right: &str) -> Ordering {
    match (left.trim().parse::<f64>(), right.trim().parse::<f64>()) {
        (Ok(a), Ok(b)) => a.total_cmp(&b),
        _ => left.cmp(right),
    }
}

/// Attribute columns keyed by entity key: the display key for nodes, the
/// edge alias (or internal id) for edges.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SideTables {
    columns: BTreeMap<(Scope, String), HashMap<String, String>>,
}

impl SideTables {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds every non-key column of `table` as an attribute of `scope`.
    pub fn load(&mut self, scope: Scope, table: &Table, key: &str) -> Result<(), QueryError> {
        let k = table.column(key).ok_or_else(|| QueryError::MissingKey(key.to_string()))?;
        for (c, name) in table.headers.iter().enumerate() {
            if c == k {
                continue;
            }
            let col = self.columns.entry((scope, name.clone())).or_default();
            for row in &table.rows {
                col.insert(row[k].clone(), row[c].clone());
            }
        }
        Ok(())
    }

    pub fn set(&mut self, scope: Scope, attribute: &str, key: &str, value: &str) {
        self.columns
            .entry((scope, attribute.to_string()))
            .or_default()
            .insert(key.to_string(), value.to_string());
    }

    pub fn has(&self, scope: Scope, attribute: &str) -> bool {
        self.columns.contains_key(&(scope, attribute.to_string()))
    }

    pub fn get(&self, scope: Scope, attribute: &str, key: &str) -> Option<&str> {
        self.columns.get(&(scope, attribute.to_string()))?.get(key).map(String::as_str)
    }
}

pub fn edge_key(graph: &DlsGraph, e: EdgeId) -> String {
    graph.edge_alias(e).map_or_else(|| e.to_string(), |a| a.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Selector {
    Label(String),
    Nodes(Vec<NodeId>),
}

impl Selector {
    fn resolve(&self, graph: &DlsGraph) -> BTreeSet<NodeId> {
        match self {
            Selector::Label(l) => graph.nodes_with_label(l).into_iter().collect(),
            Selector::Nodes(list) => list.iter().copied().filter(|&v| graph.is_live_node(v)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuerySpec {
    pub sources: Selector,
    pub targets: Selector,
    pub max_hops: usize,
    pub restrictions: Vec<Restriction>,
    pub limit: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct QueryPath {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
}

struct Filter<'a> {
    graph: &'a DlsGraph,
    tables: &'a SideTables,
    node: Vec<&'a Restriction>,
    edge: Vec<&'a Restriction>,
}

impl Filter<'_> {
    // An entity without a row in the side table is not restricted.
    fn passes(&self, rules: &[&Restriction], key: &str) -> bool {
        rules.iter().all(|r| match self.tables.get(r.scope, &r.attribute, key) {
            Some(v) => r.comparator.holds(compare(v, &r.value)),
            None => true,
        })
    }

    fn node_ok(&self, v: NodeId) -> bool {
        self.node.is_empty() || self.passes(&self.node, &self.graph.display_key(v))
    }

    fn edge_ok(&self, e: EdgeId) -> bool {
        self.edge.is_empty() || self.passes(&self.edge, &edge_key(self.graph, e))
    }
}

/// All simple paths of 1..=max_hops edges from a source-selected node to a
/// target-selected node, honoring edge direction and skipping restricted
/// nodes and edges. Sorted by node sequence, then edge sequence.
pub fn query_paths(graph: &DlsGraph, tables: &SideTables, spec: &QuerySpec) -> Result<Vec<QueryPath>, QueryError> {
    if spec.max_hops == 0 {
        return Err(QueryError::ZeroHops);
    }
    for r in &spec.restrictions {
        if !tables.has(r.scope, &r.attribute) {
            return Err(QueryError::UnknownAttribute {
                scope: r.scope,
                attribute: r.attribute.clone(),
            });
        }
    }
    let filter = Filter {
        graph,
        tables,
        node: spec.restrictions.iter().filter(|r| r.scope == Scope::Node).collect(),
        edge: spec.restrictions.iter().filter(|r| r.scope == Scope::Edge).collect(),
    };
    let targets = spec.targets.resolve(graph);
    let mut out = Vec::new();
    if targets.is_empty() {
        return Ok(out);
    }
    let mut on_path = vec![false; graph.node_capacity() + 1];
    for s in spec.sources.resolve(graph) {
        if !filter.node_ok(s) {
            continue;
        }
        let mut nodes = vec![s];
        let mut edges = Vec::new();
        on_path[s as usize] = true;
        extend(graph, &filter, &targets, spec.max_hops, &mut nodes, &mut edges, &mut on_path, &mut out);
        on_path[s as usize] = false;
    }
    out.sort();
    if let Some(limit) = spec.limit {
        out.truncate(limit);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn extend(
    graph: &DlsGraph,
    filter: &Filter<'_>,
    targets: &BTreeSet<NodeId>,
    max_hops: usize,
    nodes: &mut Vec<NodeId>,
    edges: &mut Vec<EdgeId>,
    on_path: &mut [bool],
    out: &mut Vec<QueryPath>,
) {
    if edges.len() == max_hops {
        return;
    }
    let v = *nodes.last().expect("non-empty");
    for e in graph.incident(v) {
        if !graph.traversable_from(e, v) || !filter.edge_ok(e) {
            continue;
        }
        let u = graph.edge(e).expect("live").other(v);
        if on_path[u as usize] || !filter.node_ok(u) {
            continue;
        }
        nodes.push(u);
        edges.push(e);
        on_path[u as usize] = true;
        if targets.contains(&u) {
            out.push(QueryPath {
                nodes: nodes.clone(),
                edges: edges.clone(),
            });
        }
        extend(graph, filter, targets, max_hops, nodes, edges, on_path, out);
        on_path[u as usize] = false;
        nodes.pop();
        edges.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{Direction, NodeSpec};

    #[test]
    fn parses_restrictions() {
        let r: Restriction = "edge:since>=2002".parse().unwrap();
        assert_eq!((r.scope, r.attribute.as_str(), r.comparator, r.value.as_str()), (Scope::Edge, "since", Comparator::Ge, "2002"));
        let r: Restriction = "node:name != 'bob'".parse().unwrap();
        assert_eq!((r.comparator, r.value.as_str()), (Comparator::Ne, "bob"));
        assert_eq!("node:age<3".parse::<Restriction>().unwrap().comparator, Comparator::Lt);
        assert_eq!("node:age=3".parse::<Restriction>().unwrap().to_string(), "node:age=3");
        assert!("since>=2002".parse::<Restriction>().is_err());
        assert!("edge:>=2002".parse::<Restriction>().is_err());
        assert!("vertex:a=1".parse::<Restriction>().is_err());
    }

    #[test]
    fn numeric_and_string_comparison() {
        assert_eq!(compare("10", "9"), Ordering::Greater);
        assert_eq!(compare("b", "a"), Ordering::Greater);
        assert_eq!(compare("10", "9x"), Ordering::Less);
    }

    #[test]
    fn two_node_graph() {
        let mut g = DlsGraph::new();
        let a = g.insert_node(NodeSpec::new().label("P")).unwrap();
        let b = g.insert_node(NodeSpec::new().label("P")).unwrap();
        g.insert_edge(a, b, 1.0).unwrap();
        let spec = QuerySpec {
            sources: Selector::Nodes(vec![a]),
            targets: Selector::Nodes(vec![b]),
            max_hops: 1,
            restrictions: vec![],
            limit: None,
        };
        let t = SideTables::new();
        assert_eq!(query_paths(&g, &t, &spec).unwrap().len(), 1);
        // same selector on both sides, one hop: each direct edge once per direction
        let spec = QuerySpec {
            sources: Selector::Label("P".into()),
            targets: Selector::Label("P".into()),
            ..spec
        };
        assert_eq!(query_paths(&g, &t, &spec).unwrap().len(), 2);
        g.set_direction(1, Direction::Forward).unwrap();
        let paths = query_paths(&g, &t, &spec).unwrap();
        assert_eq!(paths, vec![QueryPath { nodes: vec![a, b], edges: vec![1] }]);
    }

    #[test]
    fn errors_and_empty_selectors() {
        let mut g = DlsGraph::new();
        g.add_node();
        let t = SideTables::new();
        let mut spec = QuerySpec {
            sources: Selector::Label("nobody".into()),
            targets: Selector::Nodes(vec![1]),
            max_hops: 2,
            restrictions: vec![],
            limit: None,
        };
        assert!(query_paths(&g, &t, &spec).unwrap().is_empty());
        spec.restrictions.push("edge:since>=1".parse().unwrap());
        assert!(matches!(query_paths(&g, &t, &spec), Err(QueryError::UnknownAttribute { .. })));
        spec.max_hops = 0;
        assert_eq!(query_paths(&g, &t, &spec), Err(QueryError::ZeroHops));
    }

    #[test]
    fn side_table_loading() {
        let table = Table::new(&["id", "since", "w"], vec![vec!["7".into(), "2001".into(), "x".into()]]);
        let mut t = SideTables::new();
        t.load(Scope::Edge, &table, "id").unwrap();
        assert_eq!(t.get(Scope::Edge, "since", "7"), Some("2001"));
        assert!(t.has(Scope::Edge, "w"));
        assert!(t.load(Scope::Edge, &table, "key").is_err());
    }
}
