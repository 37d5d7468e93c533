//! Versioned binary dump of a [`DlsGraph`].
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! header   magic "DLSG" | version u32 | node capacity u32 | edge capacity u32
//! nodes    per slot: flags u8 | cached edge u32 | [x f64 y f64] | [name u32]
//!          | [external id i64] | label count u32 | label ids u32..
//! edges    per slot: node1 node2 prev1 next1 prev2 next2 (u32 each)
//! free     node count u32 | ids.. | edge count u32 | ids..
//! labels   count u32 | (len u32 | utf-8 bytes)..
//! names    count u32 | (len u32 | utf-8 bytes)..
//! weights  f64 per edge slot
//! dirs     i8 per edge slot
//! elabels  per edge slot: count u32 | label ids u32..
//! aliases  count u32 | (edge u32 | alias i64)..
//! ```
//!
//! Node flag bits: 0 live, 1 coordinates, 2 name, 3 external id.

use std::collections::{BTreeMap, VecDeque};
use std::io::{self, Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use thiserror::Error;

use super::{
    live_node_record, Direction, DlsGraph, EdgeRecord, FreeList, Interner, NodeRecord, NULL,
};

pub const MAGIC: &[u8; 4] = b"DLSG";
pub const VERSION: u32 = 1;

const F_LIVE: u8 = 1;
const F_COORDS: u8 = 2;
const F_NAME: u8 = 4;
const F_EXT: u8 = 8;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("not a graph dump (bad magic)")]
    BadMagic,
    #[error("unsupported dump version {0}")]
    UnsupportedVersion(u32),
    #[error("corrupt dump: {0}")]
    Corrupt(String),
}

type W = LittleEndian;

fn write_strings<Wr: Write>(out: &mut Wr, dict: &Interner) -> io::Result<()> {
    out.write_u32::<W>(dict.len() as u32)?;
    for s in dict.iter() {
        out.write_u32::<W>(s.len() as u32)?;
        out.write_all(s.as_bytes())?;
    }
    Ok(())
}

fn read_strings<R: Read>(input: &mut R) -> Result<Interner, PersistError> {
    let n = input.read_u32::<W>()? as usize;
    let mut strings = Vec::with_capacity(n.min(1 << 16));
    for _ in 0..n {
        let len = input.read_u32::<W>()? as usize;
        let mut buf = Vec::with_capacity(len.min(1 << 16));
        input.by_ref().take(len as u64).read_to_end(&mut buf)?;
        if buf.len() != len {
            return Err(PersistError::Io(io::ErrorKind::UnexpectedEof.into()));
        }
        strings.push(String::from_utf8(buf).map_err(|_| PersistError::Corrupt("non-utf8 string".into()))?);
    }
    Ok(Interner::from_strings(strings))
}

fn read_ids<R: Read>(input: &mut R) -> Result<Vec<u32>, PersistError> {
    let n = input.read_u32::<W>()? as usize;
    let mut ids = Vec::with_capacity(n.min(1 << 16));
    for _ in 0..n {
        ids.push(input.read_u32::<W>()?);
    }
    Ok(ids)
}

pub fn write_graph<Wr: Write>(g: &DlsGraph, out: &mut Wr) -> io::Result<()> {
    let raw = g.raw_parts();
    let node_cap = raw.nodes.len() - 1;
    let edge_cap = raw.edges.len() - 1;
    out.write_all(MAGIC)?;
    out.write_u32::<W>(VERSION)?;
    out.write_u32::<W>(node_cap as u32)?;
    out.write_u32::<W>(edge_cap as u32)?;

    for n in &raw.nodes[1..] {
        let mut flags = 0u8;
        if n.is_live() {
            flags |= F_LIVE;
        }
        if n.coords.is_some() {
            flags |= F_COORDS;
        }
        if n.name_id.is_some() {
            flags |= F_NAME;
        }
        if n.external_id.is_some() {
            flags |= F_EXT;
        }
        out.write_u8(flags)?;
        out.write_u32::<W>(n.cached_edge)?;
        if let Some((x, y)) = n.coords {
            out.write_f64::<W>(x)?;
            out.write_f64::<W>(y)?;
        }
        if let Some(name) = n.name_id {
            out.write_u32::<W>(name)?;
        }
        if let Some(ext) = n.external_id {
            out.write_i64::<W>(ext)?;
        }
        out.write_u32::<W>(n.labels.len() as u32)?;
        for &l in &n.labels {
            out.write_u32::<W>(l)?;
        }
    }
    for r in &raw.edges[1..] {
        for v in [r.nodes[0], r.nodes[1], r.prev[0], r.next[0], r.prev[1], r.next[1]] {
            out.write_u32::<W>(v)?;
        }
    }
    out.write_u32::<W>(raw.free.nodes.len() as u32)?;
    for &v in &raw.free.nodes {
        out.write_u32::<W>(v)?;
    }
    out.write_u32::<W>(raw.free.edges.len() as u32)?;
    for &e in &raw.free.edges {
        out.write_u32::<W>(e)?;
    }
    write_strings(out, raw.labels)?;
    write_strings(out, raw.names)?;
    for &w in &raw.weights[1..] {
        out.write_f64::<W>(w)?;
    }
    for d in &raw.directions[1..] {
        out.write_i8(d.code())?;
    }
    for labels in &raw.edge_labels[1..] {
        out.write_u32::<W>(labels.len() as u32)?;
        for &l in labels {
            out.write_u32::<W>(l)?;
        }
    }
    out.write_u32::<W>(raw.edge_aliases.len() as u32)?;
    for (&e, &alias) in raw.edge_aliases {
        out.write_u32::<W>(e)?;
        out.write_i64::<W>(alias)?;
    }
    Ok(())
}

pub fn read_graph<R: Read>(input: &mut R) -> Result<DlsGraph, PersistError> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(PersistError::BadMagic);
    }
    let version = input.read_u32::<W>()?;
    if version != VERSION {
        return Err(PersistError::UnsupportedVersion(version));
    }
    let node_cap = input.read_u32::<W>()? as usize;
    let edge_cap = input.read_u32::<W>()? as usize;
    let corrupt = |msg: String| PersistError::Corrupt(msg);

    let mut nodes = Vec::with_capacity(node_cap.min(1 << 20) + 1);
    nodes.push(NodeRecord::default());
    for i in 1..=node_cap {
        let flags = input.read_u8()?;
        let cached = input.read_u32::<W>()?;
        let coords = if flags & F_COORDS != 0 {
            Some((input.read_f64::<W>()?, input.read_f64::<W>()?))
        } else {
            None
        };
        let name = if flags & F_NAME != 0 { Some(input.read_u32::<W>()?) } else { None };
        let ext = if flags & F_EXT != 0 { Some(input.read_i64::<W>()?) } else { None };
        let labels = read_ids(input)?;
        if cached as usize > edge_cap {
            return Err(corrupt(format!("node {i}: cached edge {cached} out of range")));
        }
        if flags & F_LIVE != 0 {
            nodes.push(live_node_record(cached, labels, coords, name, ext));
        } else if flags != 0 || cached != NULL || !labels.is_empty() {
            return Err(corrupt(format!("node {i}: dead slot carries data")));
        } else {
            nodes.push(NodeRecord::default());
        }
    }

    let mut edges = Vec::with_capacity(edge_cap.min(1 << 20) + 1);
    edges.push(EdgeRecord::default());
    for i in 1..=edge_cap {
        let mut s = [0u32; 6];
        for slot in s.iter_mut() {
            *slot = input.read_u32::<W>()?;
        }
        let rec = EdgeRecord {
            nodes: [s[0], s[1]],
            prev: [s[2], s[4]],
            next: [s[3], s[5]],
        };
        if rec.nodes.iter().any(|&v| v as usize > node_cap)
            || rec.prev.iter().chain(rec.next.iter()).any(|&e| e as usize > edge_cap)
        {
            return Err(corrupt(format!("edge {i}: link out of range")));
        }
        if (rec.nodes[0] == NULL) != (rec.nodes[1] == NULL) {
            return Err(corrupt(format!("edge {i}: half-dead record")));
        }
        edges.push(rec);
    }

    let free = FreeList {
        nodes: VecDeque::from(read_ids(input)?),
        edges: VecDeque::from(read_ids(input)?),
    };
    let labels = read_strings(input)?;
    let names = read_strings(input)?;

    let mut weights = Vec::with_capacity(edge_cap + 1);
    weights.push(0.0);
    for _ in 0..edge_cap {
        weights.push(input.read_f64::<W>()?);
    }
    let mut directions = Vec::with_capacity(edge_cap + 1);
    directions.push(Direction::Both);
    for i in 1..=edge_cap {
        let code = input.read_i8()?;
        directions.push(
            Direction::from_code(code as i64).ok_or_else(|| corrupt(format!("edge {i}: direction {code}")))?,
        );
    }
    let mut edge_labels = Vec::with_capacity(edge_cap + 1);
    edge_labels.push(Vec::new());
    for _ in 0..edge_cap {
        edge_labels.push(read_ids(input)?);
    }
    let n_alias = input.read_u32::<W>()? as usize;
    let mut aliases = BTreeMap::new();
    for _ in 0..n_alias {
        let e = input.read_u32::<W>()?;
        let alias = input.read_i64::<W>()?;
        aliases.insert(e, alias);
    }

    let label_count = labels.len() as u32;
    let name_count = names.len() as u32;
    for (i, n) in nodes.iter().enumerate().skip(1) {
        if n.labels.iter().any(|&l| l >= label_count) || n.name_id.is_some_and(|id| id >= name_count) {
            return Err(corrupt(format!("node {i}: dictionary index out of range")));
        }
    }
    if edge_labels.iter().flatten().any(|&l| l >= label_count) {
        return Err(corrupt("edge label index out of range".into()));
    }

    let g = DlsGraph::from_raw(nodes, edges, weights, directions, edge_labels, aliases, free, labels, names);
    g.check_invariants().map_err(PersistError::Corrupt)?;
    if g.edge_aliases().keys().any(|&e| !g.is_live_edge(e)) {
        return Err(corrupt("alias on dead edge".into()));
    }
    Ok(g)
}

impl DlsGraph {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        write_graph(self, &mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<DlsGraph, PersistError> {
        let mut cursor = bytes;
        let g = read_graph(&mut cursor)?;
        if !cursor.is_empty() {
            return Err(PersistError::Corrupt(format!("{} trailing bytes", cursor.len())));
        }
        Ok(g)
    }
}
