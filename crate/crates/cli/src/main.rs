use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod error;

use error::CmdResult;

#[derive(Parser, Debug)]
#[command(name = "dlgraph", version, about = "Build, partition, solve and query graphs from CSV tables")]
struct Cli {
    /// Directory holding persisted graphs.
    #[arg(long, global = true, default_value = ".")]
    workspace: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a graph from CSV tables, partition it and persist it.
    Create(CreateArgs),
    /// Shortest-path costs from one source, or paths for a batch of pairs.
    Solve(SolveArgs),
    /// Renumber nodes by cost from a source and split them evenly by id.
    Repartition(RepartitionArgs),
    /// Enumerate hop-limited paths between labeled node sets.
    Query(QueryArgs),
    /// List stored graphs, or per-worker counts for one graph.
    Stats(StatsArgs),
}

#[derive(Args, Debug)]
pub struct CreateArgs {
    #[arg(long)]
    pub graph: String,
    /// Edge table (CSV with header).
    #[arg(long)]
    pub edges: PathBuf,
    /// Optional node table.
    #[arg(long)]
    pub nodes: Option<PathBuf>,
    /// Column bindings, e.g. "EDGE_NODE1_NAME=a,EDGE_NODE2_NAME=b".
    #[arg(long)]
    pub identifiers: String,
    /// id-range | geo:NxM | random | explicit
    #[arg(long)]
    pub partition: Option<String>,
    #[arg(long)]
    pub workers: Option<u32>,
    #[arg(long)]
    pub merge_tolerance: Option<f64>,
    /// Edges without a direction column run node1 -> node2.
    #[arg(long)]
    pub directed: bool,
    /// Fail on the first bad row.
    #[arg(long)]
    pub strict: bool,
    /// Replace an existing graph of the same name.
    #[arg(long)]
    pub recreate: bool,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// Extra settings as key=value; repeatable.
    #[arg(long = "option", value_name = "KEY=VALUE")]
    pub options: Vec<String>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    pub graph: String,
    /// Source node key or name; defaults to the lowest key.
    #[arg(long, conflicts_with = "pairs")]
    pub source: Option<String>,
    /// Comma-separated targets whose paths are written to --paths.
    #[arg(long, value_delimiter = ',', conflicts_with = "pairs")]
    pub targets: Vec<String>,
    /// CSV with source,target columns; one path row per pair.
    #[arg(long)]
    pub pairs: Option<PathBuf>,
    /// Cost output; defaults to <graph>.costs.csv in the workspace.
    #[arg(long, conflicts_with = "pairs")]
    pub costs: Option<PathBuf>,
    /// Path output; defaults to <graph>.paths.csv in the workspace.
    #[arg(long)]
    pub paths: Option<PathBuf>,
    /// Per-round, per-worker runtime trace.
    #[arg(long, conflicts_with = "pairs")]
    pub trace: Option<PathBuf>,
    /// Run the workers of each round one after another.
    #[arg(long)]
    pub sequential: bool,
    /// Shuffle worker service order with this seed.
    #[arg(long)]
    pub shuffle_seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct RepartitionArgs {
    #[arg(long)]
    pub graph: String,
    #[arg(long)]
    pub source: Option<String>,
    /// Defaults to the graph's current worker count.
    #[arg(long)]
    pub workers: Option<u32>,
}

#[derive(Args, Debug)]
pub struct QueryArgs {
    #[arg(long)]
    pub graph: String,
    #[arg(long, required_unless_present = "from", conflicts_with = "from")]
    pub from_label: Option<String>,
    /// Comma-separated source nodes.
    #[arg(long, value_delimiter = ',')]
    pub from: Vec<String>,
    #[arg(long, required_unless_present = "to", conflicts_with = "to")]
    pub to_label: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub to: Vec<String>,
    #[arg(long)]
    pub hops: usize,
    /// Predicate like "edge:since>=2002"; repeatable.
    #[arg(long)]
    pub restrict: Vec<String>,
    /// Side table as scope=file.csv with scope node or edge; repeatable.
    #[arg(long, value_name = "SCOPE=FILE")]
    pub table: Vec<String>,
    /// Key column of the side tables.
    #[arg(long, default_value = "id")]
    pub key: String,
    #[arg(long)]
    pub limit: Option<usize>,
    /// Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    #[arg(long)]
    pub graph: Option<String>,
}

fn run(cli: Cli) -> CmdResult {
    let ws = dlgraph::workspace::Workspace::new(cli.workspace);
    match cli.command {
        Command::Create(a) => commands::create(&ws, a),
        Command::Solve(a) => commands::solve(&ws, a),
        Command::Repartition(a) => commands::repartition(&ws, a),
        Command::Query(a) => commands::query(&ws, a),
        Command::Stats(a) => commands::stats(&ws, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            f.kind.exit_code()
        }
    }
}
