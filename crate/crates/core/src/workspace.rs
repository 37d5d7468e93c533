//! On-disk catalog of named graphs: a master dump, one dump per worker and a
//! JSON metadata file holding the partition plan and id maps.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;
use thiserror::Error;

use crate::grammar::{BuildStats, PartitionHints};
use crate::partition::PartitionAssignment;
use crate::runtime::{Cluster, WorkerMaps, WorkerState};
use crate::topology::persist::PersistError;
use crate::topology::DlsGraph;

pub const META_SUFFIX: &str = ".meta.json";

#[derive(Debug, Error)]
pub enum WorkspaceError {
    #[error("invalid graph name {0:?}; use letters, digits, '_', '-' or '.'")]
    BadName(String),
    #[error("graph {0:?} not found in workspace")]
    NotFound(String),
    #[error("graph {0:?} already exists (pass the recreate option to replace it)")]
    Exists(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Persist { path: PathBuf, source: PersistError },
    #[error("{path}: {source}")]
    Meta { path: PathBuf, source: serde_json::Error },
    #[error("graph {name:?}: {message}")]
    Corrupt { name: String, message: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphMeta {
    pub name: String,
    pub format: u32,
    /// Partition scheme spec, e.g. `id-range` or `geo:2x2`.
    pub scheme: String,
    pub workers: u32,
    pub assignment: PartitionAssignment,
    pub hints: PartitionHints,
    pub worker_maps: Vec<WorkerMaps>,
    pub stats: BuildStats,
    pub options: BTreeMap<String, String>,
}

/// A graph loaded back from disk.
#[derive(Clone, Debug)]
pub struct StoredGraph {
    pub graph: DlsGraph,
    pub cluster: Cluster,
    pub meta: GraphMeta,
}

#[derive(Clone, Debug)]
pub struct Workspace {
    dir: PathBuf,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && !name.starts_with('.')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

impl Workspace {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Workspace { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn io_err(path: &Path) -> impl FnOnce(io::Error) -> WorkspaceError + '_ {
        move |source| WorkspaceError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }

    fn master_path(&self, name: &str) -> PathBuf {
        self.path(&format!("{name}.dls"))
    }

    fn worker_path(&self, name: &str, w: u32) -> PathBuf {
        self.path(&format!("{name}.w{w}.dls"))
    }

    fn meta_path(&self, name: &str) -> PathBuf {
        self.path(&format!("{name}{META_SUFFIX}"))
    }

    /// Graph names with a metadata file, sorted. A missing directory is an
    /// empty catalog.
    pub fn catalog(&self) -> Result<Vec<String>, WorkspaceError> {
        let entries = match fs::read_dir(&self.dir) {
            Ok(e) => e,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(Self::io_err(&self.dir)(e)),
        };
        let mut names = Vec::new();
        for entry in entries {
            let entry = entry.map_err(Self::io_err(&self.dir))?;
            let file = entry.file_name().to_string_lossy().into_owned();
            if let Some(name) = file.strip_suffix(META_SUFFIX) {
                if valid_name(name) {
                    names.push(name.to_string());
                }
            }
        }
        names.sort();
        Ok(names)
    }

    pub fn exists(&self, name: &str) -> bool {
        self.meta_path(name).is_file()
    }

    /// Writes master, worker dumps and metadata. Each file goes to a temporary
    /// sibling first and is renamed into place; the metadata file is renamed
    /// last, so readers never see a half-written graph under its name.
    pub fn save(
        &self,
        graph: &DlsGraph,
        cluster: &Cluster,
        meta: &GraphMeta,
        replace: bool,
    ) -> Result<(), WorkspaceError> {
        let name = meta.name.as_str();
        if !valid_name(name) {
            return Err(WorkspaceError::BadName(name.to_string()));
        }
        if !replace && self.exists(name) {
            return Err(WorkspaceError::Exists(name.to_string()));
        }
        fs::create_dir_all(&self.dir).map_err(Self::io_err(&self.dir))?;
        let old_workers = self.read_meta(name).map(|m| m.workers).unwrap_or(0);

        let mut staged: Vec<(NamedTempFile, PathBuf)> = Vec::new();
        staged.push((self.stage(&graph.to_bytes())?, self.master_path(name)));
        for ws in &cluster.workers {
            staged.push((self.stage(&ws.subgraph.to_bytes())?, self.worker_path(name, ws.worker_id)));
        }
        let json = serde_json::to_vec_pretty(meta).map_err(|source| WorkspaceError::Meta {
            path: self.meta_path(name),
            source,
        })?;
        staged.push((self.stage(&json)?, self.meta_path(name)));
        for (tmp, dest) in staged {
            tmp.persist(&dest).map_err(|e| Self::io_err(&dest)(e.error))?;
        }
        for w in cluster.workers.len() as u32..old_workers {
            let _ = fs::remove_file(self.worker_path(name, w));
        }
        Ok(())
    }

    fn stage(&self, bytes: &[u8]) -> Result<NamedTempFile, WorkspaceError> {
        let mut tmp = NamedTempFile::new_in(&self.dir).map_err(Self::io_err(&self.dir))?;
        tmp.write_all(bytes).map_err(Self::io_err(&self.dir))?;
        tmp.as_file().sync_all().map_err(Self::io_err(&self.dir))?;
        Ok(tmp)
    }

    fn read_meta(&self, name: &str) -> Result<GraphMeta, WorkspaceError> {
        let path = self.meta_path(name);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(WorkspaceError::NotFound(name.to_string())),
            Err(e) => return Err(Self::io_err(&path)(e)),
        };
        serde_json::from_slice(&bytes).map_err(|source| WorkspaceError::Meta { path, source })
    }

    fn read_dump(path: &Path) -> Result<DlsGraph, WorkspaceError> {
        let bytes = fs::read(path).map_err(Self::io_err(path))?;
        DlsGraph::from_bytes(&bytes).map_err(|source| WorkspaceError::Persist {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(&self, name: &str) -> Result<StoredGraph, WorkspaceError> {
        if !valid_name(name) {
            return Err(WorkspaceError::BadName(name.to_string()));
        }
        let meta = self.read_meta(name)?;
        let graph = Self::read_dump(&self.master_path(name))?;
        if meta.worker_maps.len() != meta.workers as usize {
            return Err(WorkspaceError::Corrupt {
                name: name.to_string(),
                message: format!("{} worker maps for {} workers", meta.worker_maps.len(), meta.workers),
            });
        }
        let mut workers = Vec::with_capacity(meta.workers as usize);
        for maps in &meta.worker_maps {
            let sub = Self::read_dump(&self.worker_path(name, maps.worker_id))?;
            if maps.global_of_local.len() != sub.node_capacity() + 1
                || maps.global_edge_of_local.len() != sub.edge_capacity() + 1
            {
                return Err(WorkspaceError::Corrupt {
                    name: name.to_string(),
                    message: format!("worker {} maps do not match its dump", maps.worker_id),
                });
            }
            workers.push(WorkerState::from_parts(sub, maps.clone()));
        }
        let cluster = Cluster::from_parts(workers, meta.assignment.node_homes.clone());
        Ok(StoredGraph { graph, cluster, meta })
    }

    /// Writes `bytes` to `file` inside the workspace via temp-and-rename.
    pub fn write_file(&self, file: &str, bytes: &[u8]) -> Result<PathBuf, WorkspaceError> {
        fs::create_dir_all(&self.dir).map_err(Self::io_err(&self.dir))?;
        let dest = self.path(file);
        let tmp = self.stage(bytes)?;
        tmp.persist(&dest).map_err(|e| Self::io_err(&dest)(e.error))?;
        Ok(dest)
    }
}

impl GraphMeta {
    pub fn new(
        name: &str,
        scheme: &str,
        assignment: PartitionAssignment,
        hints: PartitionHints,
        cluster: &Cluster,
        stats: BuildStats,
        options: BTreeMap<String, String>,
    ) -> Self {
        GraphMeta {
            name: name.to_string(),
            format: 1,
            scheme: scheme.to_string(),
            workers: assignment.worker_count,
            assignment,
            hints,
            worker_maps: cluster.workers.iter().map(WorkerState::maps).collect(),
            stats,
            options,
        }
    }
}
