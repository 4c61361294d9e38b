//! Immutable directed data graph with forward (CSR) and reverse (CSC)
//! adjacency.

use std::collections::HashMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Dense node identifier, `0..node_count`.
pub type NodeId = u32;

/// Arc direction relative to a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Out,
    In,
}

/// A directed graph stored in both arc directions.
///
/// Each adjacency list is strictly ascending, so neighbor sets can be
/// intersected by a linear merge and probed by binary search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataGraph {
    fwd_offsets: Vec<usize>,
    fwd_targets: Vec<NodeId>,
    rev_offsets: Vec<usize>,
    rev_targets: Vec<NodeId>,
    original_ids: Vec<u64>,
}

impl DataGraph {
    /// Builds a graph over `original_ids.len()` nodes from dense arcs.
    /// Duplicate arcs are collapsed.
    pub fn from_dense_arcs(original_ids: Vec<u64>, arcs: &[(NodeId, NodeId)]) -> Self {
        let n = original_ids.len();
        let mut sorted: Vec<(NodeId, NodeId)> = arcs.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        debug_assert!(sorted.iter().all(|&(u, v)| (u as usize) < n && (v as usize) < n));

        let (fwd_offsets, fwd_targets) = compress(n, sorted.iter().copied());
        let mut reversed: Vec<(NodeId, NodeId)> = sorted.iter().map(|&(u, v)| (v, u)).collect();
        reversed.sort_unstable();
        let (rev_offsets, rev_targets) = compress(n, reversed.into_iter());

        Self { fwd_offsets, fwd_targets, rev_offsets, rev_targets, original_ids }
    }

    /// Builds a graph whose node ids are already dense (`0..node_count`).
    pub fn from_arcs(node_count: usize, arcs: &[(NodeId, NodeId)]) -> Self {
        Self::from_dense_arcs((0..node_count as u64).collect(), arcs)
    }

    pub fn node_count(&self) -> usize {
        self.original_ids.len()
    }

    pub fn arc_count(&self) -> usize {
        self.fwd_targets.len()
    }

    /// Sorted neighbor list of `node` in the given direction.
    ///
    /// Panics if `node` is out of range.
    pub fn arcs(&self, node: NodeId, direction: Direction) -> &[NodeId] {
        let i = node as usize;
        assert!(i < self.node_count(), "node {node} out of range");
        match direction {
            Direction::Out => &self.fwd_targets[self.fwd_offsets[i]..self.fwd_offsets[i + 1]],
            Direction::In => &self.rev_targets[self.rev_offsets[i]..self.rev_offsets[i + 1]],
        }
    }

    /// Checked variant of [`DataGraph::arcs`].
    pub fn try_arcs(&self, node: NodeId, direction: Direction) -> Result<&[NodeId]> {
        if (node as usize) < self.node_count() {
            Ok(self.arcs(node, direction))
        } else {
            Err(Error::Usage(format!("node {node} out of range (graph has {} nodes)", self.node_count())))
        }
    }

    pub fn out_degree(&self, node: NodeId) -> usize {
        let i = node as usize;
        self.fwd_offsets[i + 1] - self.fwd_offsets[i]
    }

    pub fn in_degree(&self, node: NodeId) -> usize {
        let i = node as usize;
        self.rev_offsets[i + 1] - self.rev_offsets[i]
    }

    pub fn has_arc(&self, src: NodeId, dst: NodeId) -> bool {
        self.arcs(src, Direction::Out).binary_search(&dst).is_ok()
    }

    /// Original (pre-remap) id of a dense node.
    pub fn original_id(&self, node: NodeId) -> u64 {
        self.original_ids[node as usize]
    }

    pub fn original_ids(&self) -> &[u64] {
        &self.original_ids
    }

    /// Dense id of an original id, if present.
    pub fn dense_id(&self, original: u64) -> Option<NodeId> {
        self.original_ids.binary_search(&original).ok().map(|i| i as NodeId)
    }

    /// All arcs as dense `(src, dst)` pairs in ascending order.
    pub fn arc_list(&self) -> Vec<(NodeId, NodeId)> {
        (0..self.node_count() as NodeId)
            .flat_map(|u| self.arcs(u, Direction::Out).iter().map(move |&v| (u, v)))
            .collect()
    }

    /// Parses a whitespace-separated arc list.
    ///
    /// Lines starting with `#` or `%` are comments, blank lines are skipped,
    /// tokens after the second are ignored. Ids are remapped to a dense range
    /// in ascending order of their original value.
    pub fn load_edge_list(text: &str) -> Result<Self> {
        let mut raw = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
                continue;
            }
            let mut tokens = trimmed.split_whitespace();
            let mut next_id = |what: &str| -> Result<u64> {
                let tok = tokens
                    .next()
                    .ok_or_else(|| Error::Parse { line: lineno + 1, message: format!("missing {what} node id") })?;
                tok.parse::<u64>()
                    .map_err(|_| Error::Parse { line: lineno + 1, message: format!("invalid {what} node id {tok:?}") })
            };
            let src = next_id("source")?;
            let dst = next_id("destination")?;
            raw.push((src, dst));
        }

        let mut ids: Vec<u64> = raw.iter().flat_map(|&(u, v)| [u, v]).collect();
        ids.sort_unstable();
        ids.dedup();
        let index: HashMap<u64, NodeId> = ids.iter().enumerate().map(|(i, &id)| (id, i as NodeId)).collect();
        let arcs: Vec<(NodeId, NodeId)> = raw.iter().map(|&(u, v)| (index[&u], index[&v])).collect();
        Ok(Self::from_dense_arcs(ids, &arcs))
    }

    /// Writes the arc list in the text format accepted by
    /// [`DataGraph::load_edge_list`], using original ids.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (u, v) in self.arc_list() {
            writeln!(out, "{} {}", self.original_id(u), self.original_id(v))?;
        }
        Ok(())
    }

    /// Serializes to the binary cache format.
    ///
    /// Layout (all integers little-endian): magic `DMGRAPH\0`, `u32` format
    /// version, `u64` node count, `u64` arc count, node count `u64` original
    /// ids, then arc count `(u32 src, u32 dst)` pairs in ascending order.
    pub fn write_binary<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(BINARY_MAGIC)?;
        out.write_all(&BINARY_VERSION.to_le_bytes())?;
        out.write_all(&(self.node_count() as u64).to_le_bytes())?;
        out.write_all(&(self.arc_count() as u64).to_le_bytes())?;
        for &id in &self.original_ids {
            out.write_all(&id.to_le_bytes())?;
        }
        for (u, v) in self.arc_list() {
            out.write_all(&u.to_le_bytes())?;
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut input: R) -> Result<Self> {
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes).map_err(|e| Error::Io(e.to_string()))?;
        Self::from_binary_bytes(&bytes)
    }

    pub fn from_binary_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cursor = ByteCursor { bytes, pos: 0 };
        if cursor.take(BINARY_MAGIC.len())? != BINARY_MAGIC {
            return Err(binary_error("bad magic"));
        }
        let version = u32::from_le_bytes(cursor.array()?);
        if version != BINARY_VERSION {
            return Err(binary_error(&format!("unsupported version {version}")));
        }
        let n = u64::from_le_bytes(cursor.array()?) as usize;
        let m = u64::from_le_bytes(cursor.array()?) as usize;
        let mut ids = Vec::with_capacity(n.min(bytes.len() / 8));
        for _ in 0..n {
            ids.push(u64::from_le_bytes(cursor.array()?));
        }
        if ids.windows(2).any(|w| w[0] >= w[1]) {
            return Err(binary_error("original ids not strictly ascending"));
        }
        let mut arcs = Vec::with_capacity(m.min(bytes.len() / 8));
        for _ in 0..m {
            let u = u32::from_le_bytes(cursor.array()?);
            let v = u32::from_le_bytes(cursor.array()?);
            if u as usize >= n || v as usize >= n {
                return Err(binary_error("arc endpoint out of range"));
            }
            arcs.push((u, v));
        }
        if cursor.pos != bytes.len() {
            return Err(binary_error("trailing bytes"));
        }
        Ok(Self::from_dense_arcs(ids, &arcs))
    }

    /// Loads either format, sniffing the binary magic.
    pub fn load_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.starts_with(BINARY_MAGIC) {
            Self::from_binary_bytes(bytes)
        } else {
            let text =
                std::str::from_utf8(bytes).map_err(|e| Error::Parse { line: 0, message: format!("not UTF-8: {e}") })?;
            Self::load_edge_list(text)
        }
    }
}

pub const BINARY_MAGIC: &[u8; 8] = b"DMGRAPH\0";
pub const BINARY_VERSION: u32 = 1;

fn binary_error(message: &str) -> Error {
    Error::Parse { line: 0, message: format!("binary graph cache: {message}") }
}

struct ByteCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteCursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| binary_error("truncated"))?;
        let slice = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().expect("slice length"))
    }
}

fn compress(n: usize, sorted: impl Iterator<Item = (NodeId, NodeId)>) -> (Vec<usize>, Vec<NodeId>) {
    let mut offsets = vec![0usize; n + 1];
    let mut targets = Vec::new();
    for (u, v) in sorted {
        offsets[u as usize + 1] += 1;
        targets.push(v);
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    (offsets, targets)
}
