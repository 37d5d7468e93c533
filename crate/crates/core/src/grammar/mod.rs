//! Column-annotation grammar: binds table columns to component identifiers
//! and turns tabular rows into a [`DlsGraph`](crate::topology::DlsGraph).

mod build;
mod merge;
mod table;
pub mod wkt;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use build::{build_graph, BuildOutput, BuildStats, PartitionHints, RowError};
pub use merge::NodeMergeIndex;
pub use table::Table;
pub use wkt::{parse_wkt_linestring, parse_wkt_point, WktError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Component {
    Nodes,
    Edges,
    Weights,
    /// Restriction predicates are bound at query time, not at build time; no
    /// build identifier belongs to this component.
    Restrictions,
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Component::Nodes => "NODES",
            Component::Edges => "EDGES",
            Component::Weights => "WEIGHTS",
            Component::Restrictions => "RESTRICTIONS",
        })
    }
}

macro_rules! identifiers {
    ($($variant:ident => $name:literal, $component:ident;)*) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
        #[allow(non_camel_case_types)]
        pub enum Identifier {
            $($variant,)*
        }

        impl Identifier {
            pub const ALL: &'static [Identifier] = &[$(Identifier::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(Identifier::$variant => $name,)*
                }
            }

            pub fn component(self) -> Component {
                match self {
                    $(Identifier::$variant => Component::$component,)*
                }
            }
        }

        impl FromStr for Identifier {
            type Err = GrammarError;

            fn from_str(s: &str) -> Result<Self, GrammarError> {
                match s.trim().to_ascii_uppercase().as_str() {
                    $($name => Ok(Identifier::$variant),)*
                    "NODE_WKPOINT" => Ok(Identifier::NODE_WKTPOINT),
                    other => Err(GrammarError::UnknownIdentifier(other.to_string())),
                }
            }
        }
    };
}

identifiers! {
    NODE_ID => "NODE_ID", Nodes;
    NODE_X => "NODE_X", Nodes;
    NODE_Y => "NODE_Y", Nodes;
    NODE_NAME => "NODE_NAME", Nodes;
    NODE_WKTPOINT => "NODE_WKTPOINT", Nodes;
    NODE_LABEL => "NODE_LABEL", Nodes;
    NODE_PARTITION_BOUNDARY => "NODE_PARTITION_BOUNDARY", Nodes;
    EDGE_ID => "EDGE_ID", Edges;
    EDGE_NODE1_ID => "EDGE_NODE1_ID", Edges;
    EDGE_NODE2_ID => "EDGE_NODE2_ID", Edges;
    EDGE_NODE1_NAME => "EDGE_NODE1_NAME", Edges;
    EDGE_NODE2_NAME => "EDGE_NODE2_NAME", Edges;
    EDGE_NODE1_WKTPOINT => "EDGE_NODE1_WKTPOINT", Edges;
    EDGE_NODE2_WKTPOINT => "EDGE_NODE2_WKTPOINT", Edges;
    EDGE_WKTLINE => "EDGE_WKTLINE", Edges;
    EDGE_DIRECTION => "EDGE_DIRECTION", Edges;
    EDGE_LABEL => "EDGE_LABEL", Edges;
    EDGE_PARTITION => "EDGE_PARTITION", Edges;
    EDGE_WEIGHT_VALUESPECIFIED => "EDGE_WEIGHT_VALUESPECIFIED", Weights;
}

impl fmt::Display for Identifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where an identifier takes its values from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BindingSource {
    Column(String),
    /// Literal value shared by every row.
    Constant(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentifierBinding {
    pub identifier: String,
    pub source: BindingSource,
}

impl IdentifierBinding {
    pub fn column(identifier: impl Into<String>, column: impl Into<String>) -> Self {
        IdentifierBinding {
            identifier: identifier.into(),
            source: BindingSource::Column(column.into()),
        }
    }

    pub fn constant(identifier: impl Into<String>, value: impl Into<String>) -> Self {
        IdentifierBinding {
            identifier: identifier.into(),
            source: BindingSource::Constant(value.into()),
        }
    }
}

/// Parses `ID=column,ID='literal',...`. Single-quoted values are constants;
/// commas inside quotes are kept.
pub fn parse_bindings(text: &str) -> Result<Vec<IdentifierBinding>, GrammarError> {
    let mut parts = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    for c in text.chars() {
        match c {
            '\'' => {
                quoted = !quoted;
                cur.push(c);
            }
            ',' if !quoted => parts.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    if quoted {
        return Err(GrammarError::Syntax(format!("unterminated quote in {text:?}")));
    }
    parts.push(cur);
    parts
        .into_iter()
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (id, value) = p
                .split_once('=')
                .ok_or_else(|| GrammarError::Syntax(format!("expected IDENTIFIER=column, got {:?}", p.trim())))?;
            let value = value.trim();
            let source = if value.len() >= 2 && value.starts_with('\'') && value.ends_with('\'') {
                BindingSource::Constant(value[1..value.len() - 1].to_string())
            } else if value.is_empty() {
                return Err(GrammarError::Syntax(format!("empty binding for {}", id.trim())));
            } else {
                BindingSource::Column(value.to_string())
            };
            Ok(IdentifierBinding {
                identifier: id.trim().to_string(),
                source,
            })
        })
        .collect()
}

/// One accepted identifier set for a component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombinationRule {
    pub component: Component,
    pub identifiers: BTreeSet<Identifier>,
}

fn expand(component: Component, bases: &[&[Identifier]], optional: &[Identifier]) -> Vec<CombinationRule> {
    let mut out = Vec::new();
    for base in bases {
        for mask in 0..(1u32 << optional.len()) {
            let mut ids: BTreeSet<Identifier> = base.iter().copied().collect();
            for (i, &opt) in optional.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    ids.insert(opt);
                }
            }
            out.push(CombinationRule { component, identifiers: ids });
        }
    }
    out
}

/// Every accepted identifier set, per component.
pub fn registered_combinations() -> Vec<CombinationRule> {
    use Identifier::*;
    let mut rules = Vec::new();
    let edge_bases: &[&[Identifier]] = &[
        &[EDGE_ID, EDGE_NODE1_ID, EDGE_NODE2_ID],
        &[EDGE_ID, EDGE_NODE1_ID, EDGE_NODE2_ID, EDGE_DIRECTION],
        &[EDGE_ID, EDGE_NODE1_NAME, EDGE_NODE2_NAME],
        &[EDGE_ID, EDGE_NODE1_WKTPOINT, EDGE_NODE2_WKTPOINT],
        &[EDGE_ID, EDGE_WKTLINE],
        &[EDGE_ID, EDGE_WKTLINE, EDGE_DIRECTION],
        &[EDGE_NODE1_ID, EDGE_NODE2_ID],
        &[EDGE_NODE1_NAME, EDGE_NODE2_NAME],
        &[EDGE_NODE1_NAME, EDGE_NODE2_NAME, EDGE_LABEL],
        &[EDGE_NODE1_WKTPOINT, EDGE_NODE2_WKTPOINT],
        &[EDGE_WKTLINE],
        &[EDGE_WKTLINE, EDGE_DIRECTION],
    ];
    rules.extend(expand(Component::Edges, edge_bases, &[EDGE_PARTITION]));
    rules.extend(expand(Component::Weights, &[&[EDGE_WEIGHT_VALUESPECIFIED]], &[]));
    let node_bases: &[&[Identifier]] = &[
        &[NODE_ID],
        &[NODE_ID, NODE_X, NODE_Y],
        &[NODE_ID, NODE_WKTPOINT],
        &[NODE_NAME],
        &[NODE_WKTPOINT],
    ];
    rules.extend(expand(Component::Nodes, node_bases, &[NODE_LABEL, NODE_PARTITION_BOUNDARY]));
    rules
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphRequest {
    pub graph_name: String,
    pub bindings: Vec<IdentifierBinding>,
    /// Snapping distance for coordinate points, in coordinate units.
    pub merge_tolerance: f64,
    /// Orientation of edges when no EDGE_DIRECTION is bound: `true` makes
    /// them node1 -> node2.
    pub directed_default: bool,
    /// Abort on the first bad row instead of skipping it.
    pub strict: bool,
    pub options: BTreeMap<String, String>,
}

impl GraphRequest {
    pub fn new(graph_name: impl Into<String>, bindings: Vec<IdentifierBinding>) -> Self {
        GraphRequest {
            graph_name: graph_name.into(),
            bindings,
            merge_tolerance: 0.0,
            directed_default: false,
            strict: false,
            options: BTreeMap::new(),
        }
    }
}

/// A request whose bindings matched registered combinations.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidatedRequest {
    pub graph_name: String,
    pub bindings: BTreeMap<Identifier, BindingSource>,
    pub merge_tolerance: f64,
    pub directed_default: bool,
    pub strict: bool,
    pub options: BTreeMap<String, String>,
}

impl ValidatedRequest {
    pub fn has(&self, id: Identifier) -> bool {
        self.bindings.contains_key(&id)
    }

    pub fn binds_nodes(&self) -> bool {
        self.bindings.keys().any(|id| id.component() == Component::Nodes)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrammarError {
    #[error("unknown identifier {0:?}")]
    UnknownIdentifier(String),
    #[error("identifier {0} is bound more than once")]
    DuplicateBinding(Identifier),
    #[error("{component} identifiers {{{given}}} match no registered combination; nearest is {{{nearest}}}")]
    IncompleteCombination {
        component: Component,
        given: String,
        nearest: String,
    },
    #[error("ambiguous node coordinates: NODE_WKTPOINT and NODE_X/NODE_Y are both bound")]
    AmbiguousCoordinates,
    #[error("request binds no EDGES combination")]
    MissingEdges,
    #[error("merge tolerance must be finite and >= 0, got {0}")]
    InvalidTolerance(f64),
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("{identifier} is bound to column {column:?}, which the {table} table does not have")]
    MissingColumn {
        identifier: Identifier,
        column: String,
        table: &'static str,
    },
    #[error("node identifiers are bound but no node table was supplied")]
    MissingNodeTable,
    #[error("{table} row {row}: {message}")]
    Row {
        table: &'static str,
        row: usize,
        message: String,
    },
    #[error("csv: {0}")]
    Csv(String),
}

fn join(ids: &BTreeSet<Identifier>) -> String {
    ids.iter().map(|i| i.as_str()).collect::<Vec<_>>().join(", ")
}

/// Checks every component's identifier set against the registered
/// combinations.
pub fn validate_request(req: &GraphRequest) -> Result<ValidatedRequest, GrammarError> {
    if !(req.merge_tolerance.is_finite() && req.merge_tolerance >= 0.0) {
        return Err(GrammarError::InvalidTolerance(req.merge_tolerance));
    }
    let mut bindings = BTreeMap::new();
    for b in &req.bindings {
        let id: Identifier = b.identifier.parse()?;
        if bindings.insert(id, b.source.clone()).is_some() {
            return Err(GrammarError::DuplicateBinding(id));
        }
    }
    if bindings.contains_key(&Identifier::NODE_WKTPOINT)
        && (bindings.contains_key(&Identifier::NODE_X) || bindings.contains_key(&Identifier::NODE_Y))
    {
        return Err(GrammarError::AmbiguousCoordinates);
    }
    let rules = registered_combinations();
    for component in [Component::Nodes, Component::Edges, Component::Weights] {
        let given: BTreeSet<Identifier> = bindings.keys().copied().filter(|i| i.component() == component).collect();
        if given.is_empty() {
            if component == Component::Edges {
                return Err(GrammarError::MissingEdges);
            }
            continue;
        }
        let candidates: Vec<&CombinationRule> = rules.iter().filter(|r| r.component == component).collect();
        if candidates.iter().any(|r| r.identifiers == given) {
            continue;
        }
        let nearest = candidates
            .iter()
            .min_by_key(|r| r.identifiers.symmetric_difference(&given).count())
            .expect("every component has rules");
        return Err(GrammarError::IncompleteCombination {
            component,
            given: join(&given),
            nearest: join(&nearest.identifiers),
        });
    }
    Ok(ValidatedRequest {
        graph_name: req.graph_name.clone(),
        bindings,
        merge_tolerance: req.merge_tolerance,
        directed_default: req.directed_default,
        strict: req.strict,
        options: req.options.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(pairs: &[(&str, &str)]) -> GraphRequest {
        GraphRequest::new(
            "g",
            pairs.iter().map(|(i, c)| IdentifierBinding::column(*i, *c)).collect(),
        )
    }

    #[test]
    fn name_pair_is_valid() {
        validate_request(&req(&[("EDGE_NODE1_NAME", "a"), ("EDGE_NODE2_NAME", "b")])).unwrap();
    }

    #[test]
    fn wktline_with_direction_is_valid() {
        validate_request(&req(&[("EDGE_WKTLINE", "geom"), ("EDGE_DIRECTION", "dir")])).unwrap();
    }

    #[test]
    fn lone_node1_id_is_incomplete() {
        let err = validate_request(&req(&[("EDGE_NODE1_ID", "a")])).unwrap_err();
        match err {
            GrammarError::IncompleteCombination { component, nearest, .. } => {
                assert_eq!(component, Component::Edges);
                assert_eq!(nearest, "EDGE_NODE1_ID, EDGE_NODE2_ID");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_and_duplicate_identifiers() {
        assert!(matches!(
            validate_request(&req(&[("EDGE_COLOR", "c")])),
            Err(GrammarError::UnknownIdentifier(_))
        ));
        assert_eq!(
            validate_request(&req(&[("EDGE_NODE1_ID", "a"), ("EDGE_NODE1_ID", "b")])),
            Err(GrammarError::DuplicateBinding(Identifier::EDGE_NODE1_ID))
        );
    }

    #[test]
    fn missing_edges_and_bad_tolerance() {
        assert_eq!(validate_request(&req(&[("NODE_ID", "id")])), Err(GrammarError::MissingEdges));
        let mut r = req(&[("EDGE_WKTLINE", "g")]);
        r.merge_tolerance = -1.0;
        assert_eq!(validate_request(&r), Err(GrammarError::InvalidTolerance(-1.0)));
    }

    #[test]
    fn wktpoint_and_xy_is_ambiguous() {
        let r = req(&[
            ("EDGE_NODE1_ID", "a"),
            ("EDGE_NODE2_ID", "b"),
            ("NODE_ID", "id"),
            ("NODE_X", "x"),
            ("NODE_Y", "y"),
            ("NODE_WKTPOINT", "p"),
        ]);
        assert_eq!(validate_request(&r), Err(GrammarError::AmbiguousCoordinates));
    }

    #[test]
    fn optional_weight_and_partition() {
        validate_request(&req(&[
            ("EDGE_NODE1_ID", "a"),
            ("EDGE_NODE2_ID", "b"),
            ("EDGE_WEIGHT_VALUESPECIFIED", "w"),
            ("EDGE_PARTITION", "p"),
            ("NODE_ID", "id"),
            ("NODE_PARTITION_BOUNDARY", "bnd"),
        ]))
        .unwrap();
    }

    #[test]
    fn every_identifier_is_registered_somewhere() {
        let rules = registered_combinations();
        for &id in Identifier::ALL {
            assert!(rules.iter().any(|r| r.identifiers.contains(&id)), "{id} is never accepted");
        }
    }

    #[test]
    fn binding_string_parser() {
        let b = parse_bindings("EDGE_NODE1_NAME=a, EDGE_NODE2_NAME = b,EDGE_LABEL='x,y'").unwrap();
        assert_eq!(b[0], IdentifierBinding::column("EDGE_NODE1_NAME", "a"));
        assert_eq!(b[1], IdentifierBinding::column("EDGE_NODE2_NAME", "b"));
        assert_eq!(b[2], IdentifierBinding::constant("EDGE_LABEL", "x,y"));
        assert!(parse_bindings("EDGE_LABEL='x").is_err());
        assert!(parse_bindings("EDGE_LABEL").is_err());
    }
}
