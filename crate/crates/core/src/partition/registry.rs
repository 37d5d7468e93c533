use std::collections::BTreeMap;
use std::fmt;

use super::{
    assign_explicit, assign_geo_lattice, assign_id_range, assign_random_shard, resolve_edge_ownership,
    PartitionAssignment, PartitionError,
};
use crate::grammar::PartitionHints;
use crate::topology::DlsGraph;

/// Everything a scheme may look at.
pub struct PartitionContext<'a> {
    pub graph: &'a DlsGraph,
    pub workers: u32,
    pub hints: &'a PartitionHints,
}

pub trait PartitionStrategy: Send + Sync {
    /// Canonical spec string, e.g. `geo:3x7`.
    fn name(&self) -> String;

    /// Worker count implied by the scheme itself, if any.
    fn required_workers(&self) -> Option<u32> {
        None
    }

    fn assign(&self, ctx: &PartitionContext<'_>) -> Result<PartitionAssignment, PartitionError>;
}

impl fmt::Debug for dyn PartitionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PartitionStrategy({})", self.name())
    }
}

pub struct IdRangeStrategy;

impl PartitionStrategy for IdRangeStrategy {
    fn name(&self) -> String {
        "id-range".into()
    }

    fn assign(&self, ctx: &PartitionContext<'_>) -> Result<PartitionAssignment, PartitionError> {
        let t = assign_id_range(ctx.graph, ctx.workers)?;
        Ok(resolve_edge_ownership(ctx.graph, &t, ctx.workers))
    }
}

pub struct GeoLatticeStrategy {
    pub n: u32,
    pub m: u32,
}

impl PartitionStrategy for GeoLatticeStrategy {
    fn name(&self) -> String {
        format!("geo:{}x{}", self.n, self.m)
    }

    fn required_workers(&self) -> Option<u32> {
        Some(self.n * self.m)
    }

    fn assign(&self, ctx: &PartitionContext<'_>) -> Result<PartitionAssignment, PartitionError> {
        if ctx.workers != self.n * self.m {
            return Err(PartitionError::LatticeMismatch {
                n: self.n,
                m: self.m,
                workers: ctx.workers,
            });
        }
        let t = assign_geo_lattice(ctx.graph, self.n, self.m)?;
        Ok(resolve_edge_ownership(ctx.graph, &t, ctx.workers))
    }
}

pub struct RandomShardStrategy;

impl PartitionStrategy for RandomShardStrategy {
    fn name(&self) -> String {
        "random".into()
    }

    fn assign(&self, ctx: &PartitionContext<'_>) -> Result<PartitionAssignment, PartitionError> {
        assign_random_shard(ctx.graph, ctx.workers)
    }
}

pub struct ExplicitStrategy;

impl PartitionStrategy for ExplicitStrategy {
    fn name(&self) -> String {
        "explicit".into()
    }

    fn assign(&self, ctx: &PartitionContext<'_>) -> Result<PartitionAssignment, PartitionError> {
        assign_explicit(ctx.graph, ctx.hints, ctx.workers)
    }
}

/// Builds a strategy from the argument text after `name:` (empty if none).
pub type StrategyFactory = Box<dyn Fn(&str) -> Result<Box<dyn PartitionStrategy>, PartitionError> + Send + Sync>;

/// Partition schemes keyed by name and selected from a `name[:args]` string.
pub struct StrategyRegistry {
    factories: BTreeMap<String, StrategyFactory>,
}

impl Default for StrategyRegistry {
    fn default() -> Self {
        Self::with_defaults()
    }
}

fn no_args(scheme: &'static str, make: fn() -> Box<dyn PartitionStrategy>) -> StrategyFactory {
    Box::new(move |args: &str| {
        if args.is_empty() {
            Ok(make())
        } else {
            Err(PartitionError::BadArguments {
                scheme: scheme.into(),
                message: format!("takes no arguments, got {args:?}"),
            })
        }
    })
}

fn geo_factory(args: &str) -> Result<Box<dyn PartitionStrategy>, PartitionError> {
    let bad = |message: String| PartitionError::BadArguments {
        scheme: "geo".into(),
        message,
    };
    let (n, m) = args
        .split_once(['x', 'X'])
        .ok_or_else(|| bad(format!("expected NxM, got {args:?}")))?;
    let parse = |s: &str| match s.trim().parse::<u32>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(bad(format!("{s:?} is not a positive integer"))),
    };
    Ok(Box::new(GeoLatticeStrategy {
        n: parse(n)?,
        m: parse(m)?,
    }))
}

impl StrategyRegistry {
    pub fn empty() -> Self {
        StrategyRegistry {
            factories: BTreeMap::new(),
        }
    }

    pub fn with_defaults() -> Self {
        let mut r = Self::empty();
        r.register("id-range", no_args("id-range", || Box::new(IdRangeStrategy)));
        r.register("geo", Box::new(geo_factory));
        r.register("random", no_args("random", || Box::new(RandomShardStrategy)));
        r.register("explicit", no_args("explicit", || Box::new(ExplicitStrategy)));
        r
    }

    /// Adds or replaces a scheme.
    pub fn register(&mut self, name: impl Into<String>, factory: StrategyFactory) {
        self.factories.insert(name.into(), factory);
    }

    pub fn names(&self) -> Vec<&str> {
        self.factories.keys().map(String::as_str).collect()
    }

    pub fn create(&self, spec: &str) -> Result<Box<dyn PartitionStrategy>, PartitionError> {
        let spec = spec.trim();
        let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
        let factory = self
            .factories
            .get(name)
            .ok_or_else(|| PartitionError::UnknownScheme(name.to_string(), self.names().join(", ")))?;
        factory(args.trim())
    }
}
