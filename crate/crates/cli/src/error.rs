use std::fmt;
use std::process::ExitCode;

use dlgraph::grammar::GrammarError;
use dlgraph::partition::PartitionError;
use dlgraph::query::QueryError;
use dlgraph::rebalance::RebalanceError;
use dlgraph::sssp::SolveError;
use dlgraph::workspace::WorkspaceError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Usage,
    Data,
    Internal,
}

impl Kind {
    pub fn exit_code(self) -> ExitCode {
        ExitCode::from(match self {
            Kind::Usage => 2,
            Kind::Data => 3,
            Kind::Internal => 4,
        })
    }
}

/// A failed command: what went wrong and which exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(msg: impl fmt::Display) -> Self {
        Failure {
            kind: Kind::Usage,
            error: anyhow::anyhow!("{msg}"),
        }
    }

    pub fn data(msg: impl fmt::Display) -> Self {
        Failure {
            kind: Kind::Data,
            error: anyhow::anyhow!("{msg}"),
        }
    }

    pub fn context(mut self, ctx: impl fmt::Display + Send + Sync + 'static) -> Self {
        self.error = self.error.context(ctx);
        self
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

fn wrap(kind: Kind, e: impl std::error::Error + Send + Sync + 'static) -> Failure {
    Failure {
        kind,
        error: anyhow::Error::new(e),
    }
}

impl From<GrammarError> for Failure {
    fn from(e: GrammarError) -> Self {
        let kind = match e {
            GrammarError::Row { .. } | GrammarError::Csv(_) | GrammarError::MissingColumn { .. } => Kind::Data,
            _ => Kind::Usage,
        };
        wrap(kind, e)
    }
}

impl From<PartitionError> for Failure {
    fn from(e: PartitionError) -> Self {
        let kind = match e {
            PartitionError::NoWorkers
            | PartitionError::UnknownScheme(..)
            | PartitionError::BadArguments { .. }
            | PartitionError::LatticeMismatch { .. } => Kind::Usage,
            _ => Kind::Data,
        };
        wrap(kind, e)
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        let kind = match e {
            SolveError::UnknownNode(_) | SolveError::NoPath { .. } => Kind::Data,
            _ => Kind::Internal,
        };
        wrap(kind, e)
    }
}

impl From<QueryError> for Failure {
    fn from(e: QueryError) -> Self {
        let kind = match e {
            QueryError::ZeroHops | QueryError::BadRestriction(_) | QueryError::UnknownScope(_) => Kind::Usage,
            _ => Kind::Data,
        };
        wrap(kind, e)
    }
}

impl From<WorkspaceError> for Failure {
    fn from(e: WorkspaceError) -> Self {
        let kind = match e {
            WorkspaceError::BadName(_) => Kind::Usage,
            _ => Kind::Data,
        };
        wrap(kind, e)
    }
}

impl From<RebalanceError> for Failure {
    fn from(e: RebalanceError) -> Self {
        match e {
            RebalanceError::Solve(e) => e.into(),
            RebalanceError::Partition(e) => e.into(),
            RebalanceError::Topology(e) => wrap(Kind::Internal, e),
            e => wrap(Kind::Data, e),
        }
    }
}

impl From<dlgraph::topology::TopologyError> for Failure {
    fn from(e: dlgraph::topology::TopologyError) -> Self {
        wrap(Kind::Internal, e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        wrap(Kind::Data, e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        wrap(Kind::Data, e)
    }
}
