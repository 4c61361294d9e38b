//! Brute-force reference matcher. Binds pattern vertices one at a time and
//! checks every arc against the data graph. Too slow for anything but small
//! inputs, which is the point: it shares no code with the planner.

use crate::digraph::{DataGraph, NodeId};
use crate::error::{Error, Result};
use crate::pattern::{PatternGraph, VertexId};

pub const ORACLE_MAX_PATTERN_VERTICES: usize = 8;
pub const ORACLE_MAX_ARCS: usize = 50_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub embedding_count: u64,
    /// Sorted lexicographically; empty unless requested.
    pub embeddings: Vec<Vec<NodeId>>,
}

/// All injective maps from pattern vertices to data nodes that preserve
/// every pattern arc.
pub fn enumerate_bruteforce(graph: &DataGraph, pattern: &PatternGraph, materialize: bool) -> Result<OracleResult> {
    if pattern.vertex_count() > ORACLE_MAX_PATTERN_VERTICES {
        return Err(Error::Capacity(format!(
            "oracle supports at most {ORACLE_MAX_PATTERN_VERTICES} pattern vertices, got {}",
            pattern.vertex_count()
        )));
    }
    if graph.arc_count() > ORACLE_MAX_ARCS {
        return Err(Error::Capacity(format!(
            "oracle supports at most {ORACLE_MAX_ARCS} arcs, got {}",
            graph.arc_count()
        )));
    }
    let order = bfs_order(pattern);
    let mut search = Search {
        graph,
        pattern,
        order: &order,
        assignment: vec![None; pattern.vertex_count()],
        count: 0,
        embeddings: Vec::new(),
        materialize,
    };
    search.rec(0);
    let mut embeddings = search.embeddings;
    embeddings.sort_unstable();
    Ok(OracleResult { embedding_count: search.count, embeddings })
}

/// Vertices in undirected BFS order from vertex 0, then any unreached ones.
fn bfs_order(pattern: &PatternGraph) -> Vec<VertexId> {
    let n = pattern.vertex_count();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        order.push(root);
        let mut head = order.len() - 1;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for e in pattern.incident_edges(v) {
                let w = pattern.edge(e).other(v);
                if !seen[w] {
                    seen[w] = true;
                    order.push(w);
                }
            }
        }
    }
    order
}

struct Search<'a> {
    graph: &'a DataGraph,
    pattern: &'a PatternGraph,
    order: &'a [VertexId],
    assignment: Vec<Option<NodeId>>,
    count: u64,
    embeddings: Vec<Vec<NodeId>>,
    materialize: bool,
}

impl Search<'_> {
    fn rec(&mut self, k: usize) {
        if k == self.order.len() {
            self.count += 1;
            if self.materialize {
                self.embeddings.push(self.assignment.iter().map(|n| n.expect("complete")).collect());
            }
            return;
        }
        let v = self.order[k];
        for node in 0..self.graph.node_count() as NodeId {
            if self.assignment.contains(&Some(node)) {
                continue;
            }
            let fits = self.pattern.incident_edges(v).all(|e| {
                let pe = self.pattern.edge(e);
                let other = pe.other(v);
                match self.assignment[other] {
                    None => true,
                    Some(m) if pe.src == v => self.graph.has_arc(node, m),
                    Some(m) => self.graph.has_arc(m, node),
                }
            });
            if fits {
                self.assignment[v] = Some(node);
                self.rec(k + 1);
                self.assignment[v] = None;
            }
        }
    }
}
