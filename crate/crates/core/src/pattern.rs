//! Pattern digraphs: variables, edge constraints and the degree constraints
//! they imply.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};

/// Index of a pattern vertex, in first-appearance order.
pub type VertexId = usize;
/// Index of a pattern edge, in file order.
pub type EdgeId = usize;

/// Largest pattern accepted by [`PatternGraph::automorphism_count`].
pub const MAX_AUTOMORPHISM_VERTICES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternEdge {
    pub src: VertexId,
    pub dst: VertexId,
}

impl PatternEdge {
    /// The endpoint that is not `v`. `v` must be an endpoint.
    pub fn other(&self, v: VertexId) -> VertexId {
        debug_assert!(self.src == v || self.dst == v);
        if self.src == v {
            self.dst
        } else {
            self.src
        }
    }

    pub fn touches(&self, v: VertexId) -> bool {
        self.src == v || self.dst == v
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternGraph {
    names: Vec<String>,
    edges: Vec<PatternEdge>,
    in_deg: Vec<usize>,
    out_deg: Vec<usize>,
}

impl PatternGraph {
    /// Parses one `src dst` edge per line. Vertex names are tokens of
    /// ASCII letters, digits and underscores.
    pub fn parse(text: &str) -> Result<Self> {
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, VertexId> = HashMap::new();
        let mut edges = Vec::new();
        let mut seen = HashSet::new();

        for (lineno, line) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
                continue;
            }
            let tokens: Vec<&str> = trimmed.split_whitespace().collect();
            if tokens.len() != 2 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected `src dst`, found {} tokens", tokens.len()),
                });
            }
            for tok in &tokens {
                if !tok.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(Error::Parse { line: line_no, message: format!("invalid vertex name {tok:?}") });
                }
            }
            if tokens[0] == tokens[1] {
                return Err(Error::Parse { line: line_no, message: format!("self-loop on {}", tokens[0]) });
            }
            let mut intern = |name: &str| -> VertexId {
                *index.entry(name.to_string()).or_insert_with(|| {
                    names.push(name.to_string());
                    names.len() - 1
                })
            };
            let edge = PatternEdge { src: intern(tokens[0]), dst: intern(tokens[1]) };
            if !seen.insert(edge) {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("duplicate edge {} {}", tokens[0], tokens[1]),
                });
            }
            edges.push(edge);
        }
        if edges.is_empty() {
            return Err(Error::Parse { line: 0, message: "empty pattern".into() });
        }
        Ok(Self::build(names, edges))
    }

    /// Builds a pattern from named edges, applying the same validation as
    /// [`PatternGraph::parse`].
    pub fn from_named_edges(edges: &[(&str, &str)]) -> Result<Self> {
        let text: String = edges.iter().map(|(u, v)| format!("{u} {v}\n")).collect();
        Self::parse(&text)
    }

    fn build(names: Vec<String>, edges: Vec<PatternEdge>) -> Self {
        let n = names.len();
        let mut in_deg = vec![0; n];
        let mut out_deg = vec![0; n];
        for e in &edges {
            out_deg[e.src] += 1;
            in_deg[e.dst] += 1;
        }
        Self { names, edges, in_deg, out_deg }
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[PatternEdge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> PatternEdge {
        self.edges[e]
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex(&self, name: &str) -> Option<VertexId> {
        self.names.iter().position(|n| n == name)
    }

    /// Edge index of `src -> dst` by vertex names.
    pub fn edge_by_names(&self, src: &str, dst: &str) -> Option<EdgeId> {
        let (s, d) = (self.vertex(src)?, self.vertex(dst)?);
        self.edges.iter().position(|e| e.src == s && e.dst == d)
    }

    pub fn in_deg(&self, v: VertexId) -> usize {
        self.in_deg[v]
    }

    pub fn out_deg(&self, v: VertexId) -> usize {
        self.out_deg[v]
    }

    pub fn total_deg(&self, v: VertexId) -> usize {
        self.in_deg[v] + self.out_deg[v]
    }

    pub fn in_edges(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).filter(move |&e| self.edges[e].dst == v)
    }

    pub fn out_edges(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).filter(move |&e| self.edges[e].src == v)
    }

    pub fn incident_edges(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).filter(move |&e| self.edges[e].touches(v))
    }

    /// `(a,c)` style label of an edge.
    pub fn edge_label(&self, e: EdgeId) -> String {
        let PatternEdge { src, dst } = self.edges[e];
        format!("({},{})", self.names[src], self.names[dst])
    }

    /// Weak connectivity.
    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for e in self.incident_edges(v) {
                let w = self.edges[e].other(v);
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Number of vertex permutations that map the edge set onto itself.
    pub fn automorphism_count(&self) -> Result<u64> {
        let n = self.vertex_count();
        if n > MAX_AUTOMORPHISM_VERTICES {
            return Err(Error::Capacity(format!(
                "automorphism search supports at most {MAX_AUTOMORPHISM_VERTICES} vertices, pattern has {n}"
            )));
        }
        let mut adj = vec![vec![false; n]; n];
        for e in &self.edges {
            adj[e.src][e.dst] = true;
        }
        let mut image = vec![usize::MAX; n];
        let mut used = vec![false; n];
        Ok(self.count_automorphisms(0, &adj, &mut image, &mut used))
    }

    fn count_automorphisms(&self, v: VertexId, adj: &[Vec<bool>], image: &mut [usize], used: &mut [bool]) -> u64 {
        let n = self.vertex_count();
        if v == n {
            return 1;
        }
        let mut total = 0;
        for w in 0..n {
            if used[w] || self.in_deg[w] != self.in_deg[v] || self.out_deg[w] != self.out_deg[v] {
                continue;
            }
            // edges between v and earlier vertices must map exactly
            let consistent = (0..v).all(|u| adj[u][v] == adj[image[u]][w] && adj[v][u] == adj[w][image[u]]);
            if !consistent {
                continue;
            }
            image[v] = w;
            used[w] = true;
            total += self.count_automorphisms(v + 1, adj, image, used);
            used[w] = false;
        }
        total
    }
}

impl fmt::Display for PatternGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.edges {
            writeln!(f, "{} {}", self.names[e.src], self.names[e.dst])?;
        }
        Ok(())
    }
}

/// A directed path through pattern edges: each edge's destination is the
/// next edge's source.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    edges: Vec<EdgeId>,
}

impl Path {
    pub fn new(pattern: &PatternGraph, edges: Vec<EdgeId>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::Usage("a path needs at least one edge".into()));
        }
        for w in edges.windows(2) {
            if pattern.edge(w[0]).dst != pattern.edge(w[1]).src {
                return Err(Error::Usage(format!(
                    "{} does not chain into {}",
                    pattern.edge_label(w[0]),
                    pattern.edge_label(w[1])
                )));
            }
        }
        Ok(Self { edges })
    }

    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn source(&self, pattern: &PatternGraph) -> VertexId {
        pattern.edge(self.edges[0]).src
    }

    pub fn destination(&self, pattern: &PatternGraph) -> VertexId {
        pattern.edge(*self.edges.last().expect("non-empty")).dst
    }

    /// Vertex sequence `<v0, v1, ..., vk>`.
    pub fn vertices(&self, pattern: &PatternGraph) -> Vec<VertexId> {
        let mut out = vec![self.source(pattern)];
        out.extend(self.edges.iter().map(|&e| pattern.edge(e).dst));
        out
    }

    /// `self ⋈ other`; fails unless `self` ends where `other` starts.
    pub fn concat(&self, pattern: &PatternGraph, other: &Path) -> Result<Path> {
        let mut edges = self.edges.clone();
        edges.extend_from_slice(&other.edges);
        Path::new(pattern, edges)
    }

    /// `<a,b,c>` style label.
    pub fn label(&self, pattern: &PatternGraph) -> String {
        let names: Vec<&str> = self.vertices(pattern).into_iter().map(|v| pattern.name(v)).collect();
        format!("<{}>", names.join(","))
    }
}

/// Directed 3-cycle `a -> b -> c -> a`.
pub fn p3() -> PatternGraph {
    directed_cycle(3)
}

/// Directed 4-cycle.
pub fn p4() -> PatternGraph {
    directed_cycle(4)
}

/// The seven-vertex, ten-edge pattern used throughout the reduction
/// examples.
pub fn p7a() -> PatternGraph {
    PatternGraph::parse(P7A_TEXT).expect("fixture parses")
}

pub const P7A_TEXT: &str = "\
a b
a c
b c
f c
b e
c e
c d
e f
f g
d g
";

/// Directed k-cycle over vertices named `a`, `b`, ... (or `v0`, `v1`, ...
/// past 26).
pub fn directed_cycle(k: usize) -> PatternGraph {
    assert!(k >= 2, "a directed cycle needs at least two vertices");
    let name = |i: usize| {
        if k <= 26 {
            ((b'a' + i as u8) as char).to_string()
        } else {
            format!("v{i}")
        }
    };
    let text: String = (0..k).map(|i| format!("{} {}\n", name(i), name((i + 1) % k))).collect();
    PatternGraph::parse(&text).expect("cycle parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_triangle() {
        let p = PatternGraph::parse("a b\nb c\nc a").unwrap();
        assert_eq!(p.vertex_count(), 3);
        assert_eq!(p.edge_count(), 3);
        assert!((0..3).all(|v| p.total_deg(v) == 2));
    }

    #[test]
    fn p7a_degrees() {
        let p = p7a();
        let c = p.vertex("c").unwrap();
        assert_eq!((p.total_deg(c), p.in_deg(c), p.out_deg(c)), (5, 3, 2));
        assert_eq!(p.total_deg(p.vertex("a").unwrap()), 2);
        assert_eq!(p.edge_count(), 10);
        assert_eq!(p.vertex_count(), 7);
        // first-appearance vertex order
        assert_eq!(p.names(), &["a", "b", "c", "f", "e", "d", "g"]);
    }

    #[test]
    fn rejects_bad_patterns() {
        let dup = PatternGraph::parse("a b\na b").unwrap_err();
        assert!(matches!(dup, Error::Parse { line: 2, .. }), "{dup:?}");
        assert!(matches!(PatternGraph::parse("x x"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(PatternGraph::parse("# only a comment\n"), Err(Error::Parse { .. })));
        assert!(PatternGraph::parse("a b c").is_err());
        assert!(PatternGraph::parse("a-1 b").is_err());
    }

    #[test]
    fn connectivity() {
        assert!(p7a().is_connected());
        assert!(!PatternGraph::parse("a b\nc d").unwrap().is_connected());
    }

    #[test]
    fn automorphisms_of_fixtures() {
        assert_eq!(p3().automorphism_count().unwrap(), 3);
        assert_eq!(PatternGraph::parse("a b").unwrap().automorphism_count().unwrap(), 1);
        // brute force over all 7! permutations, see `brute_force_automorphisms`
        assert_eq!(p7a().automorphism_count().unwrap(), brute_force_automorphisms(&p7a()));
        assert_eq!(p7a().automorphism_count().unwrap(), 1);
        let star = PatternGraph::parse("x a\nx b\nx c").unwrap();
        assert_eq!(star.automorphism_count().unwrap(), 6);
    }

    #[test]
    fn automorphism_size_guard() {
        let big = directed_cycle(13);
        assert!(matches!(big.automorphism_count(), Err(Error::Capacity(_))));
        assert_eq!(directed_cycle(12).automorphism_count().unwrap(), 12);
    }

    #[test]
    fn paths_chain() {
        let p = p7a();
        let bc = p.edge_by_names("b", "c").unwrap();
        let cd = p.edge_by_names("c", "d").unwrap();
        let path = Path::new(&p, vec![bc, cd]).unwrap();
        assert_eq!(path.label(&p), "<b,c,d>");
        assert!(Path::new(&p, vec![cd, bc]).is_err());
        let dg = Path::new(&p, vec![p.edge_by_names("d", "g").unwrap()]).unwrap();
        assert_eq!(path.concat(&p, &dg).unwrap().label(&p), "<b,c,d,g>");
    }

    /// Enumerates every permutation of the vertex set.
    fn brute_force_automorphisms(p: &PatternGraph) -> u64 {
        let n = p.vertex_count();
        let edges: HashSet<(usize, usize)> = p.edges().iter().map(|e| (e.src, e.dst)).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut count = 0;
        loop {
            if edges.iter().all(|&(u, v)| edges.contains(&(perm[u], perm[v]))) {
                count += 1;
            }
            // next lexicographic permutation
            let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else {
                break;
            };
            let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).unwrap();
            perm.swap(i, j);
            perm[i + 1..].reverse();
        }
        count
    }

    proptest! {
        #[test]
        fn cycle_automorphisms_equal_length(k in 3usize..=8) {
            prop_assert_eq!(directed_cycle(k).automorphism_count().unwrap(), k as u64);
        }

        #[test]
        fn degree_sums_match_edge_count(
            edges in prop::collection::btree_set((0u8..6, 0u8..6), 1..15)
        ) {
            let text: String = edges.iter().filter(|(u, v)| u != v)
                .map(|(u, v)| format!("v{u} v{v}\n")).collect();
            prop_assume!(!text.is_empty());
            let p = PatternGraph::parse(&text).unwrap();
            let ins: usize = (0..p.vertex_count()).map(|v| p.in_deg(v)).sum();
            let outs: usize = (0..p.vertex_count()).map(|v| p.out_deg(v)).sum();
            prop_assert_eq!(ins, p.edge_count());
            prop_assert_eq!(outs, p.edge_count());
            prop_assert!((0..p.vertex_count()).all(|v| p.total_deg(v) >= 1));
            prop_assert_eq!(PatternGraph::parse(&text).unwrap(), p.clone());
            prop_assert_eq!(brute_force_automorphisms(&p), p.automorphism_count().unwrap());
        }
    }
}
