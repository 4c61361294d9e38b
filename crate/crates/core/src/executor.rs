//! Plan execution over a data graph.
//!
//! Every start node is an independent task. A task walks the split queue:
//! for each kept edge it binds a pivot endpoint, reads the pivot's arcs once,
//! filters them by the far endpoint's degree filter and candidate table, and
//! seeds every removed edge hanging off that edge from the same filtered
//! list. After the last kept edge, the candidate sets of the still-unbound
//! vertices are combined.
//!
//! Tables are branch-local and every write is logged on a trail, so undoing
//! to a trail mark restores the exact prior state.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;

use crate::digraph::{DataGraph, Direction, NodeId};
use crate::error::{Error, Result};
use crate::pattern::{EdgeId, PatternGraph, VertexId};
use crate::reducer::MatchPlan;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatchMode {
    Count,
    Enumerate,
}

#[derive(Clone, Debug)]
pub struct ExecConfig {
    pub mode: MatchMode,
    pub threads: usize,
    /// Also report embeddings divided by the automorphism count.
    pub occurrences: bool,
    /// Re-count every shortcut leaf by enumeration and record mismatches.
    pub shadow_check: bool,
    /// Fingerprint the tables around every recursive call and record any
    /// difference after undo.
    pub verify_trail: bool,
    /// Enumeration stops with a capacity error past this many embeddings.
    pub max_embeddings: Option<u64>,
}

impl Default for ExecConfig {
    fn default() -> Self {
        Self {
            mode: MatchMode::Count,
            threads: 1,
            occurrences: false,
            shadow_check: false,
            verify_trail: false,
            max_embeddings: None,
        }
    }
}

impl ExecConfig {
    pub fn count(threads: usize) -> Self {
        Self { threads, ..Self::default() }
    }

    pub fn enumerate(threads: usize) -> Self {
        Self { mode: MatchMode::Enumerate, threads, ..Self::default() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub embedding_count: u64,
    pub occurrence_count: Option<u64>,
    /// Neighbor-list reads from the data graph.
    pub adjacency_reads: u64,
    /// Adjacency reads made while materializing removed edges. Always 0.
    pub removed_edge_adjacency_reads: u64,
    /// Largest number of table entries held by one branch at once.
    pub peak_tuples: u64,
    pub wall_time_ms: u64,
    pub threads: usize,
    pub start_candidates: u64,
    pub leaves: u64,
    /// Leaves counted by the product of candidate-set sizes.
    pub shortcut_leaves: u64,
    pub shadow_mismatches: u64,
    pub trail_violations: u64,
}

impl fmt::Display for Stats {
    /// `key=value` lines in a fixed order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "embedding_count={}", self.embedding_count)?;
        match self.occurrence_count {
            Some(o) => writeln!(f, "occurrence_count={o}")?,
            None => writeln!(f, "occurrence_count=n/a")?,
        }
        writeln!(f, "adjacency_reads={}", self.adjacency_reads)?;
        writeln!(f, "peak_tuples={}", self.peak_tuples)?;
        writeln!(f, "wall_time_ms={}", self.wall_time_ms)?;
        writeln!(f, "threads={}", self.threads)?;
        writeln!(f, "removed_edge_adjacency_reads={}", self.removed_edge_adjacency_reads)?;
        writeln!(f, "start_candidates={}", self.start_candidates)?;
        writeln!(f, "leaves={}", self.leaves)?;
        writeln!(f, "shortcut_leaves={}", self.shortcut_leaves)?;
        writeln!(f, "shadow_mismatches={}", self.shadow_mismatches)?;
        writeln!(f, "trail_violations={}", self.trail_violations)
    }
}

#[derive(Clone, Debug)]
pub struct MatchResult {
    pub mode: MatchMode,
    pub embedding_count: u64,
    pub occurrence_count: Option<u64>,
    /// Embeddings as dense node ids in pattern-vertex order, sorted.
    /// Empty in count mode.
    pub embeddings: Vec<Vec<NodeId>>,
    pub stats: Stats,
}

impl MatchResult {
    /// `v1=n1 v2=n2 ...` with original node ids.
    pub fn format_embedding(pattern: &PatternGraph, graph: &DataGraph, embedding: &[NodeId]) -> String {
        embedding
            .iter()
            .enumerate()
            .map(|(v, &n)| format!("{}={}", pattern.name(v), graph.original_id(n)))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn passes(pattern: &PatternGraph, graph: &DataGraph, v: VertexId, node: NodeId) -> bool {
    graph.in_degree(node) >= pattern.in_deg(v) && graph.out_degree(node) >= pattern.out_deg(v)
}

/// Nodes passing the start vertex's in- and out-degree filters, ascending.
pub fn init_start_candidates(plan: &MatchPlan, pattern: &PatternGraph, graph: &DataGraph) -> Vec<NodeId> {
    (0..graph.node_count() as NodeId).filter(|&n| passes(pattern, graph, plan.start_vertex, n)).collect()
}

/// Runs `plan` over `graph`.
pub fn run(plan: &MatchPlan, pattern: &PatternGraph, graph: &DataGraph, config: &ExecConfig) -> Result<MatchResult> {
    if config.threads == 0 {
        return Err(Error::Usage("thread count must be at least 1".into()));
    }
    let started = Instant::now();
    let starts = init_start_candidates(plan, pattern, graph);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Usage(format!("cannot build thread pool: {e}")))?;

    let shared = Shared { emitted: AtomicU64::new(0), abort: AtomicBool::new(false) };
    let totals = pool.install(|| {
        starts
            .par_iter()
            .fold(
                || Explorer::new(plan, pattern, graph, config, &shared),
                |mut explorer, &node| {
                    explorer.run_task(node);
                    explorer
                },
            )
            .map(Explorer::into_totals)
            .reduce(Totals::default, Totals::merge)
    });

    let mut embeddings = totals.embeddings;
    embeddings.sort_unstable();
    let occurrence_count =
        if config.occurrences { pattern.automorphism_count().ok().map(|aut| totals.count / aut) } else { None };
    let stats = Stats {
        embedding_count: totals.count,
        occurrence_count,
        adjacency_reads: totals.adjacency_reads,
        removed_edge_adjacency_reads: totals.removed_reads,
        peak_tuples: totals.peak_tuples,
        wall_time_ms: started.elapsed().as_millis() as u64,
        threads: config.threads,
        start_candidates: starts.len() as u64,
        leaves: totals.leaves,
        shortcut_leaves: totals.shortcut_leaves,
        shadow_mismatches: totals.shadow_mismatches,
        trail_violations: totals.trail_violations,
    };
    if shared.abort.load(Ordering::Relaxed) {
        return Err(Error::Capacity(format!(
            "more than {} embeddings; partial stats:\n{stats}",
            config.max_embeddings.unwrap_or(0)
        )));
    }
    Ok(MatchResult { mode: config.mode, embedding_count: totals.count, occurrence_count, embeddings, stats })
}

struct Shared {
    emitted: AtomicU64,
    abort: AtomicBool,
}

#[derive(Default)]
struct Totals {
    count: u64,
    adjacency_reads: u64,
    removed_reads: u64,
    peak_tuples: u64,
    leaves: u64,
    shortcut_leaves: u64,
    shadow_mismatches: u64,
    trail_violations: u64,
    embeddings: Vec<Vec<NodeId>>,
}

impl Totals {
    fn merge(mut self, other: Totals) -> Totals {
        self.count += other.count;
        self.adjacency_reads += other.adjacency_reads;
        self.removed_reads += other.removed_reads;
        self.peak_tuples = self.peak_tuples.max(other.peak_tuples);
        self.leaves += other.leaves;
        self.shortcut_leaves += other.shortcut_leaves;
        self.shadow_mismatches += other.shadow_mismatches;
        self.trail_violations += other.trail_violations;
        self.embeddings.extend(other.embeddings);
        self
    }
}

/// Binary table of an edge. One column is always a single node (the
/// endpoint bound when the table was built), so the table is that node
/// plus the sorted list of partners in the other column.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeTable {
    pub fixed_node: NodeId,
    /// Whether `fixed_node` is in the source column.
    pub fixed_is_src: bool,
    pub others: Vec<NodeId>,
}

impl EdgeTable {
    pub fn contains(&self, src: NodeId, dst: NodeId) -> bool {
        let (fixed, other) = if self.fixed_is_src { (src, dst) } else { (dst, src) };
        fixed == self.fixed_node && self.others.binary_search(&other).is_ok()
    }
}

enum Undo {
    Vertex(VertexId, Option<Vec<NodeId>>),
    Edge(EdgeId, Option<EdgeTable>),
    Bind(VertexId),
}

/// Per-task exploration state. Owned by one worker at a time and reused
/// across the tasks that worker runs.
pub struct Explorer<'a> {
    plan: &'a MatchPlan,
    pattern: &'a PatternGraph,
    graph: &'a DataGraph,
    config: &'a ExecConfig,
    shared: Option<&'a Shared>,
    /// Anchor of each removed edge.
    removed_anchor: Vec<Option<VertexId>>,
    vertex_tables: Vec<Option<Vec<NodeId>>>,
    edge_tables: Vec<Option<EdgeTable>>,
    bound: Vec<Option<NodeId>>,
    bound_nodes: Vec<NodeId>,
    trail: Vec<Undo>,
    tuples: u64,
    assignment: Vec<Option<NodeId>>,
    totals: Totals,
}

impl<'a> Explorer<'a> {
    fn new(
        plan: &'a MatchPlan,
        pattern: &'a PatternGraph,
        graph: &'a DataGraph,
        config: &'a ExecConfig,
        shared: &'a Shared,
    ) -> Self {
        let mut explorer = Self::standalone(plan, pattern, graph, config);
        explorer.shared = Some(shared);
        explorer
    }

    /// An explorer outside any parallel run.
    pub fn standalone(
        plan: &'a MatchPlan,
        pattern: &'a PatternGraph,
        graph: &'a DataGraph,
        config: &'a ExecConfig,
    ) -> Self {
        let mut removed_anchor = vec![None; pattern.edge_count()];
        for r in &plan.removed {
            removed_anchor[r.edge] = Some(r.anchor);
        }
        Self {
            plan,
            pattern,
            graph,
            config,
            shared: None,
            removed_anchor,
            vertex_tables: vec![None; pattern.vertex_count()],
            edge_tables: vec![None; pattern.edge_count()],
            bound: vec![None; pattern.vertex_count()],
            bound_nodes: Vec::with_capacity(pattern.vertex_count()),
            trail: Vec::new(),
            tuples: 0,
            assignment: vec![None; pattern.vertex_count()],
            totals: Totals::default(),
        }
    }

    /// Embeddings found so far by this explorer.
    pub fn count(&self) -> u64 {
        self.totals.count
    }

    pub fn adjacency_reads(&self) -> u64 {
        self.totals.adjacency_reads
    }

    pub fn removed_edge_adjacency_reads(&self) -> u64 {
        self.totals.removed_reads
    }

    pub fn shortcut_leaves(&self) -> u64 {
        self.totals.shortcut_leaves
    }

    pub fn trail_violations(&self) -> u64 {
        self.totals.trail_violations
    }

    fn into_totals(self) -> Totals {
        self.totals
    }

    fn aborted(&self) -> bool {
        self.shared.is_some_and(|s| s.abort.load(Ordering::Relaxed))
    }

    /// Explores every embedding that maps the start vertex to `node`.
    pub fn run_task(&mut self, node: NodeId) {
        if self.aborted() {
            return;
        }
        let start = self.plan.start_vertex;
        let mark = self.trail.len();
        self.bind(start, node);
        self.step(0, start, node);
        self.undo_to(mark);
        debug_assert!(self.trail.is_empty() && self.tuples == 0);
    }

    fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.vertex_tables.hash(&mut h);
        self.edge_tables.hash(&mut h);
        self.bound.hash(&mut h);
        self.bound_nodes.hash(&mut h);
        h.finish()
    }

    fn set_vertex(&mut self, v: VertexId, table: Vec<NodeId>) {
        self.tuples += table.len() as u64;
        let old = self.vertex_tables[v].replace(table);
        if let Some(t) = &old {
            self.tuples -= t.len() as u64;
        }
        self.trail.push(Undo::Vertex(v, old));
        self.totals.peak_tuples = self.totals.peak_tuples.max(self.tuples);
    }

    fn set_edge(&mut self, e: EdgeId, table: EdgeTable) {
        self.tuples += table.others.len() as u64;
        let old = self.edge_tables[e].replace(table);
        if let Some(t) = &old {
            self.tuples -= t.others.len() as u64;
        }
        self.trail.push(Undo::Edge(e, old));
        self.totals.peak_tuples = self.totals.peak_tuples.max(self.tuples);
    }

    fn bind(&mut self, v: VertexId, node: NodeId) {
        debug_assert!(self.bound[v].is_none() && !self.bound_nodes.contains(&node));
        self.bound[v] = Some(node);
        self.bound_nodes.push(node);
        self.trail.push(Undo::Bind(v));
        self.set_vertex(v, vec![node]);
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().expect("above mark") {
                Undo::Vertex(v, old) => {
                    if let Some(t) = &self.vertex_tables[v] {
                        self.tuples -= t.len() as u64;
                    }
                    if let Some(t) = &old {
                        self.tuples += t.len() as u64;
                    }
                    self.vertex_tables[v] = old;
                }
                Undo::Edge(e, old) => {
                    if let Some(t) = &self.edge_tables[e] {
                        self.tuples -= t.others.len() as u64;
                    }
                    if let Some(t) = &old {
                        self.tuples += t.others.len() as u64;
                    }
                    self.edge_tables[e] = old;
                }
                Undo::Bind(v) => {
                    self.bound[v] = None;
                    self.bound_nodes.pop();
                }
            }
        }
    }

    /// Pivot for split entry `i`: the anchor when the edge seeds removed
    /// edges, otherwise a bound endpoint, otherwise the endpoint with the
    /// smaller candidate table (source on ties).
    fn choose_pivot(&self, i: usize) -> VertexId {
        let s = &self.plan.split[i];
        if !self.plan.children[s.edge].is_empty() {
            return s.anchor;
        }
        let pe = self.pattern.edge(s.edge);
        if self.bound[pe.src].is_some() {
            return pe.src;
        }
        if self.bound[pe.dst].is_some() {
            return pe.dst;
        }
        match (&self.vertex_tables[pe.src], &self.vertex_tables[pe.dst]) {
            (Some(a), Some(b)) => {
                if a.len() <= b.len() {
                    pe.src
                } else {
                    pe.dst
                }
            }
            (Some(_), None) => pe.src,
            (None, Some(_)) => pe.dst,
            (None, None) => unreachable!("plan explores an edge with no materialized endpoint"),
        }
    }

    /// Explores split entry `i` for every admissible pivot binding.
    pub fn explore(&mut self, i: usize) {
        let before = self.config.verify_trail.then(|| self.fingerprint());
        let pivot = self.choose_pivot(i);
        if let Some(node) = self.bound[pivot] {
            self.step(i, pivot, node);
        } else {
            let candidates = self.vertex_tables[pivot].clone().expect("pivot has a candidate table");
            for node in candidates {
                if self.aborted() {
                    break;
                }
                if self.bound_nodes.contains(&node) {
                    continue;
                }
                let mark = self.trail.len();
                self.bind(pivot, node);
                self.step(i, pivot, node);
                self.undo_to(mark);
            }
        }
        if let Some(before) = before {
            if before != self.fingerprint() {
                self.totals.trail_violations += 1;
            }
        }
    }

    /// Materializes split entry `i` from `node`'s arcs, then continues.
    fn step(&mut self, i: usize, pivot: VertexId, node: NodeId) {
        let mark = self.trail.len();
        let edge = self.plan.split[i].edge;
        let pe = self.pattern.edge(edge);
        let (direction, far) = if pe.src == pivot { (Direction::Out, pe.dst) } else { (Direction::In, pe.src) };
        self.totals.adjacency_reads += 1;
        let raw: Vec<NodeId> = self
            .graph
            .arcs(node, direction)
            .iter()
            .copied()
            .filter(|&n| n != node && passes(self.pattern, self.graph, far, n))
            .collect();

        let mut alive = self.install_edge(edge, pivot, node, far, &raw);
        if alive {
            debug_assert!(self.plan.children[edge].is_empty() || pivot == self.plan.split[i].anchor);
            for k in 0..self.plan.children[edge].len() {
                let child = self.plan.children[edge][k];
                if !self.materialize_included(child, &raw) {
                    alive = false;
                    break;
                }
            }
        }
        if alive {
            if i + 1 < self.plan.split.len() {
                self.explore(i + 1);
            } else {
                self.combine_leaf();
            }
        }
        self.undo_to(mark);
    }

    /// Installs `A^e = {fixed_node} x partners`, where partners are `raw`
    /// restricted to the far vertex's candidates. Returns false if empty.
    fn install_edge(&mut self, e: EdgeId, fixed: VertexId, fixed_node: NodeId, far: VertexId, raw: &[NodeId]) -> bool {
        let others: Vec<NodeId> = match self.bound[far] {
            Some(m) => {
                if raw.binary_search(&m).is_ok() {
                    vec![m]
                } else {
                    Vec::new()
                }
            }
            None => {
                let mut partners = match &self.vertex_tables[far] {
                    Some(existing) => intersect(raw, existing),
                    None => raw.to_vec(),
                };
                partners.retain(|n| !self.bound_nodes.contains(n));
                partners
            }
        };
        if others.is_empty() {
            return false;
        }
        if self.bound[far].is_none() {
            self.set_vertex(far, others.clone());
        }
        let fixed_is_src = self.pattern.edge(e).src == fixed;
        self.set_edge(e, EdgeTable { fixed_node, fixed_is_src, others });
        true
    }

    /// Seeds removed edge `e` from its parent's degree-filtered arc list,
    /// then its own children from the result. Never reads adjacency.
    pub fn materialize_included(&mut self, e: EdgeId, parent_raw: &[NodeId]) -> bool {
        let reads_before = self.totals.adjacency_reads;
        let anchor = self.removed_anchor[e].expect("materialize_included on a kept edge");
        let anchor_node = self.bound[anchor].expect("anchor is bound while its edges are explored");
        let far = self.pattern.edge(e).other(anchor);
        let raw: Vec<NodeId> =
            parent_raw.iter().copied().filter(|&n| passes(self.pattern, self.graph, far, n)).collect();
        let mut alive = self.install_edge(e, anchor, anchor_node, far, &raw);
        if alive {
            for k in 0..self.plan.children[e].len() {
                let child = self.plan.children[e][k];
                if !self.materialize_included(child, &raw) {
                    alive = false;
                    break;
                }
            }
        }
        self.totals.removed_reads += self.totals.adjacency_reads - reads_before;
        alive
    }

    /// Combines the candidate sets of the unbound vertices at a leaf.
    pub fn combine_leaf(&mut self) {
        self.totals.leaves += 1;
        let unbound: Vec<VertexId> = (0..self.pattern.vertex_count()).filter(|&v| self.bound[v].is_none()).collect();
        if self.config.mode == MatchMode::Count && self.shortcut_applies(&unbound) {
            let product = unbound
                .iter()
                .map(|&v| self.vertex_tables[v].as_ref().expect("materialized").len() as u64)
                .fold(1u64, |acc, n| acc.saturating_mul(n));
            self.totals.shortcut_leaves += 1;
            self.totals.count += product;
            if self.config.shadow_check {
                let shadow = self.enumerate_leaf(&unbound, false);
                if shadow != product {
                    self.totals.shadow_mismatches += 1;
                }
            }
            return;
        }
        let emit = self.config.mode == MatchMode::Enumerate;
        let found = self.enumerate_leaf(&unbound, emit);
        self.totals.count += found;
    }

    /// Product counting is exact when the unbound vertices' candidate sets
    /// are pairwise disjoint, avoid every bound node, and no edge joins two
    /// unbound vertices.
    fn shortcut_applies(&self, unbound: &[VertexId]) -> bool {
        let p = self.pattern;
        if p.edges().iter().any(|e| self.bound[e.src].is_none() && self.bound[e.dst].is_none()) {
            return false;
        }
        let sets: Vec<&[NodeId]> =
            unbound.iter().map(|&v| self.vertex_tables[v].as_deref().expect("materialized")).collect();
        for (i, a) in sets.iter().enumerate() {
            if a.iter().any(|n| self.bound_nodes.contains(n)) {
                return false;
            }
            for b in &sets[i + 1..] {
                if !disjoint(a, b) {
                    return false;
                }
            }
        }
        true
    }

    /// Backtracks over the unbound vertices' candidates, accepting injective
    /// assignments whose every edge pair is in the edge's table.
    fn enumerate_leaf(&mut self, unbound: &[VertexId], emit: bool) -> u64 {
        for v in 0..self.pattern.vertex_count() {
            self.assignment[v] = self.bound[v];
        }
        let found = self.leaf_rec(unbound, 0, emit);
        for &v in unbound {
            self.assignment[v] = None;
        }
        found
    }

    fn leaf_rec(&mut self, unbound: &[VertexId], k: usize, emit: bool) -> u64 {
        if k == unbound.len() {
            if emit {
                let embedding: Vec<NodeId> = self.assignment.iter().map(|n| n.expect("complete")).collect();
                self.emit(embedding);
            }
            return 1;
        }
        let v = unbound[k];
        let candidates = self.vertex_tables[v].clone().expect("materialized");
        let mut found = 0;
        for node in candidates {
            if self.assignment.contains(&Some(node)) || !self.edges_consistent(v, node) {
                continue;
            }
            self.assignment[v] = Some(node);
            found += self.leaf_rec(unbound, k + 1, emit);
            self.assignment[v] = None;
            if self.aborted() {
                break;
            }
        }
        found
    }

    /// Checks every edge between `v` (tentatively `node`) and an assigned
    /// vertex against the stored edge table.
    fn edges_consistent(&self, v: VertexId, node: NodeId) -> bool {
        self.pattern.incident_edges(v).all(|e| {
            let pe = self.pattern.edge(e);
            let other = pe.other(v);
            let Some(other_node) = self.assignment[other] else {
                return true;
            };
            let (s, d) = if pe.src == v { (node, other_node) } else { (other_node, node) };
            self.edge_tables[e].as_ref().is_some_and(|t| t.contains(s, d))
        })
    }

    fn emit(&mut self, embedding: Vec<NodeId>) {
        if let (Some(shared), Some(limit)) = (self.shared, self.config.max_embeddings) {
            if shared.emitted.fetch_add(1, Ordering::Relaxed) >= limit {
                shared.abort.store(true, Ordering::Relaxed);
                return;
            }
        }
        self.totals.embeddings.push(embedding);
    }
}

fn intersect(a: &[NodeId], b: &[NodeId]) -> Vec<NodeId> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn disjoint(a: &[NodeId], b: &[NodeId]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return false,
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{p3, p4, p7a};
    use crate::plan;

    fn complete3() -> DataGraph {
        DataGraph::from_arcs(3, &[(0, 1), (1, 0), (1, 2), (2, 1), (0, 2), (2, 0)])
    }

    fn cycle_graph(k: u32) -> DataGraph {
        let arcs: Vec<_> = (0..k).map(|i| (i, (i + 1) % k)).collect();
        DataGraph::from_arcs(k as usize, &arcs)
    }

    fn count(p: &PatternGraph, g: &DataGraph, threads: usize) -> MatchResult {
        let plan = plan(p, true).unwrap();
        let config = ExecConfig { occurrences: true, ..ExecConfig::count(threads) };
        run(&plan, p, g, &config).unwrap()
    }

    #[test]
    fn triangle_in_triangle() {
        for threads in [1, 2, 8] {
            let r = count(&p3(), &cycle_graph(3), threads);
            assert_eq!(r.embedding_count, 3);
            assert_eq!(r.occurrence_count, Some(1));
        }
    }

    #[test]
    fn triangle_in_complete_digraph() {
        let r = count(&p3(), &complete3(), 2);
        assert_eq!(r.embedding_count, 6);
        assert_eq!(r.occurrence_count, Some(2));
    }

    #[test]
    fn four_cycle() {
        assert_eq!(count(&p4(), &cycle_graph(4), 1).embedding_count, 4);
    }

    #[test]
    fn start_candidates() {
        let p = p3();
        let pl = plan(&p, true).unwrap();
        assert_eq!(init_start_candidates(&pl, &p, &cycle_graph(3)), vec![0, 1, 2]);
        assert!(init_start_candidates(&pl, &p, &DataGraph::from_arcs(2, &[(0, 1)])).is_empty());
    }

    #[test]
    fn self_loops_never_match() {
        let g = DataGraph::from_arcs(2, &[(0, 0), (0, 1), (1, 1)]);
        let p = PatternGraph::parse("a b").unwrap();
        assert_eq!(count(&p, &g, 1).embedding_count, 1);
    }

    #[test]
    fn enumeration_lists_embeddings() {
        let p = p3();
        let g = cycle_graph(3);
        let pl = plan(&p, true).unwrap();
        let r = run(&pl, &p, &g, &ExecConfig::enumerate(2)).unwrap();
        assert_eq!(r.embeddings, vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]]);
        assert_eq!(MatchResult::format_embedding(&p, &g, &r.embeddings[1]), "a=1 b=2 c=0");
    }

    #[test]
    fn enumeration_cap_is_a_capacity_error() {
        let p = PatternGraph::parse("a b").unwrap();
        let g = complete3();
        let pl = plan(&p, true).unwrap();
        let config = ExecConfig { max_embeddings: Some(2), ..ExecConfig::enumerate(1) };
        assert!(matches!(run(&pl, &p, &g, &config), Err(Error::Capacity(_))));
    }

    #[test]
    fn zero_threads_rejected() {
        let p = p3();
        let pl = plan(&p, true).unwrap();
        assert!(run(&pl, &p, &cycle_graph(3), &ExecConfig::count(0)).is_err());
    }

    #[test]
    fn p7a_materialization_never_reads_adjacency() {
        let p = p7a();
        let pl = plan(&p, true).unwrap();
        // dense enough that the walk reaches removed edges
        let arcs: Vec<(u32, u32)> = (0..12u32)
            .flat_map(|u| (0..12u32).filter(move |&v| v != u && (u * 7 + v * 3) % 4 != 0).map(move |v| (u, v)))
            .collect();
        let g = DataGraph::from_arcs(12, &arcs);
        let config = ExecConfig { verify_trail: true, shadow_check: true, ..ExecConfig::count(1) };
        let r = run(&pl, &p, &g, &config).unwrap();
        assert!(r.embedding_count > 0);
        assert_eq!(r.stats.removed_edge_adjacency_reads, 0);
        assert_eq!(r.stats.trail_violations, 0);
        assert_eq!(r.stats.shadow_mismatches, 0);
    }

    #[test]
    fn start_with_no_out_arcs_backtracks() {
        let p = PatternGraph::parse("a b\nb c").unwrap();
        let g = DataGraph::from_arcs(3, &[(0, 1)]);
        assert_eq!(count(&p, &g, 1).embedding_count, 0);
    }

    /// Leaf with a hand-built table state: bound `c`, unbound `a` and `g`.
    fn leaf_fixture(pattern: &str) -> (PatternGraph, MatchPlan, DataGraph) {
        let p = PatternGraph::parse(pattern).unwrap();
        let pl = plan(&p, false).unwrap();
        (p, pl, DataGraph::from_arcs(10, &[]))
    }

    #[test]
    fn leaf_join_through_removed_edge_table() {
        let (p, pl, g) = leaf_fixture("c a\nc g\na g");
        let config = ExecConfig::count(1);
        let mut x = Explorer::standalone(&pl, &p, &g, &config);
        let (c, a, gv) = (p.vertex("c").unwrap(), p.vertex("a").unwrap(), p.vertex("g").unwrap());
        x.bind(c, 1);
        x.set_vertex(a, vec![5, 7]);
        x.set_vertex(gv, vec![9]);
        x.set_edge(0, EdgeTable { fixed_node: 1, fixed_is_src: true, others: vec![5, 7] });
        x.set_edge(1, EdgeTable { fixed_node: 1, fixed_is_src: true, others: vec![9] });
        x.set_edge(2, EdgeTable { fixed_node: 9, fixed_is_src: false, others: vec![5] });
        x.combine_leaf();
        assert_eq!(x.count(), 1);
        assert_eq!(x.shortcut_leaves(), 0);
    }

    #[test]
    fn leaf_product_shortcut() {
        let (p, pl, g) = leaf_fixture("c x\nc y");
        let config = ExecConfig { shadow_check: true, ..ExecConfig::count(1) };
        let mut e = Explorer::standalone(&pl, &p, &g, &config);
        let (c, x, y) = (p.vertex("c").unwrap(), p.vertex("x").unwrap(), p.vertex("y").unwrap());
        e.bind(c, 0);
        e.set_vertex(x, vec![1, 2]);
        e.set_vertex(y, vec![3, 4]);
        e.set_edge(0, EdgeTable { fixed_node: 0, fixed_is_src: true, others: vec![1, 2] });
        e.set_edge(1, EdgeTable { fixed_node: 0, fixed_is_src: true, others: vec![3, 4] });
        e.combine_leaf();
        assert_eq!(e.count(), 4);
        assert_eq!(e.shortcut_leaves(), 1);
        assert_eq!(e.totals.shadow_mismatches, 0);
    }

    #[test]
    fn leaf_overlap_falls_back_to_enumeration() {
        let (p, pl, g) = leaf_fixture("c x\nc y");
        let config = ExecConfig::count(1);
        let mut e = Explorer::standalone(&pl, &p, &g, &config);
        let (c, x, y) = (p.vertex("c").unwrap(), p.vertex("x").unwrap(), p.vertex("y").unwrap());
        e.bind(c, 0);
        e.set_vertex(x, vec![1, 2]);
        e.set_vertex(y, vec![2, 3]);
        e.set_edge(0, EdgeTable { fixed_node: 0, fixed_is_src: true, others: vec![1, 2] });
        e.set_edge(1, EdgeTable { fixed_node: 0, fixed_is_src: true, others: vec![2, 3] });
        e.combine_leaf();
        assert_eq!(e.count(), 3);
        assert_eq!(e.shortcut_leaves(), 0);
    }

    #[test]
    fn trail_restores_state() {
        let (p, pl, g) = leaf_fixture("c x\nc y");
        let config = ExecConfig::count(1);
        let mut e = Explorer::standalone(&pl, &p, &g, &config);
        let before = e.fingerprint();
        let mark = e.trail.len();
        e.bind(0, 3);
        e.set_vertex(1, vec![1, 2]);
        e.set_vertex(1, vec![2]);
        e.undo_to(mark);
        assert_eq!(before, e.fingerprint());
        assert_eq!(e.tuples, 0);
    }

    #[test]
    fn helpers() {
        assert_eq!(intersect(&[1, 3, 5, 7], &[3, 4, 5]), vec![3, 5]);
        assert!(disjoint(&[1, 3], &[2, 4]));
        assert!(!disjoint(&[1, 3], &[3]));
        let t = EdgeTable { fixed_node: 4, fixed_is_src: false, others: vec![1, 2] };
        assert!(t.contains(2, 4));
        assert!(!t.contains(4, 2));
    }
}
