//! Greedy constraint-cover reduction and match-plan assembly.
//!
//! Starting from the highest-degree vertex, each step picks the unvisited
//! incident edge that covers the most unvisited siblings, keeps it in the
//! split queue, and removes the siblings it includes. A removed edge is
//! later materialized from its parent's table instead of from adjacency,
//! so its parent must be explored with the shared vertex as the pivot.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::inclusion::{InclusionClosure, Side};
use crate::pattern::{EdgeId, PatternGraph, VertexId};

/// A kept edge, in exploration order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitEdge {
    pub edge: EdgeId,
    /// Vertex the reduction stood on when it picked this edge. Edges with
    /// materialization children must be explored from here.
    pub anchor: VertexId,
    /// Edges removed in this step (materialized from this edge's table,
    /// directly or through a chain).
    pub covers: Vec<EdgeId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RemovedEdge {
    pub edge: EdgeId,
    /// Tightest includer; its table seeds this edge's table.
    pub parent: EdgeId,
    /// Shared endpoint that must be bound when the parent is explored.
    pub anchor: VertexId,
    pub side: Side,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanItem {
    Vertex(VertexId),
    Edge(EdgeId),
}

/// One entry of the materialization schedule. Step 0 is the start vertex;
/// step `k` belongs to the `k`-th explored split edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Materialization {
    pub step: usize,
    pub item: PlanItem,
}

/// Operation counters of one reduction run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ReduceCounters {
    /// Inclusion-table probes.
    pub probes: usize,
    /// Outer restarts after the first search pass.
    pub restarts: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchPlan {
    pub start_vertex: VertexId,
    pub split: Vec<SplitEdge>,
    pub removed: Vec<RemovedEdge>,
    pub materialization_order: Vec<Materialization>,
    /// Per edge, the removed edges whose parent it is, in materialization
    /// order.
    pub children: Vec<Vec<EdgeId>>,
    pub counters: ReduceCounters,
}

/// Builds a plan using the sibling facts of `closure`.
pub fn reduce(pattern: &PatternGraph, closure: &InclusionClosure) -> Result<MatchPlan> {
    if !pattern.is_connected() {
        return Err(Error::Plan("pattern is not connected".into()));
    }
    let mut r = Reducer::new(pattern, closure);
    r.run();
    let plan = r.finish();
    debug_assert_eq!(plan.validate(pattern), Ok(()));
    Ok(plan)
}

/// Plan with every edge kept, built by the same search.
pub fn unreduced(pattern: &PatternGraph) -> Result<MatchPlan> {
    reduce(pattern, &InclusionClosure::empty())
}

/// Start vertex: maximal total degree, lowest index on ties.
pub fn start_vertex(pattern: &PatternGraph) -> VertexId {
    (0..pattern.vertex_count())
        .max_by_key(|&v| (pattern.total_deg(v), std::cmp::Reverse(v)))
        .expect("pattern has vertices")
}

/// Reduction state shared by the steps of the greedy search.
pub struct Reducer<'a> {
    pattern: &'a PatternGraph,
    /// `includes[x][y]`: y ⊑ x as siblings (the anchor is implied: two
    /// distinct edges share at most one endpoint on the same side).
    includes: Vec<Vec<bool>>,
    visited: Vec<bool>,
    touched: Vec<bool>,
    split: Vec<SplitEdge>,
    removed: Vec<RemovedEdge>,
    order: Vec<Materialization>,
    children: Vec<Vec<EdgeId>>,
    counters: ReduceCounters,
}

impl<'a> Reducer<'a> {
    pub fn new(pattern: &'a PatternGraph, closure: &InclusionClosure) -> Self {
        let m = pattern.edge_count();
        let mut includes = vec![vec![false; m]; m];
        for f in closure.sibling_facts() {
            includes[f.includer][f.included] = true;
        }
        Self {
            pattern,
            includes,
            visited: vec![false; m],
            touched: vec![false; pattern.vertex_count()],
            split: Vec::new(),
            removed: Vec::new(),
            order: Vec::new(),
            children: vec![Vec::new(); m],
            counters: ReduceCounters::default(),
        }
    }

    fn run(&mut self) {
        let start = start_vertex(self.pattern);
        self.touch(start, 0);
        self.search_split(start);
        while let Some(u) = self.restart_vertex() {
            self.counters.restarts += 1;
            self.search_split(u);
        }
    }

    /// Restart point once a search pass runs dry: the higher-degree endpoint
    /// of the first unvisited edge that touches the materialized region.
    fn restart_vertex(&self) -> Option<VertexId> {
        let p = self.pattern;
        let e = (0..p.edge_count()).find(|&e| {
            let pe = p.edge(e);
            !self.visited[e] && (self.touched[pe.src] || self.touched[pe.dst])
        })?;
        let pe = p.edge(e);
        let preferred = if p.total_deg(pe.src) <= p.total_deg(pe.dst) { pe.dst } else { pe.src };
        Some(if self.touched[preferred] { preferred } else { pe.other(preferred) })
    }

    fn search_split(&mut self, start: VertexId) {
        let mut current = Some(start);
        while let Some(v) = current {
            while self.has_unvisited_edge(v) {
                let chosen = self.find_max_e_coverage(v);
                self.visited[chosen] = true;
                self.split.push(SplitEdge { edge: chosen, anchor: v, covers: Vec::new() });
                let step = self.split.len();
                self.order.push(Materialization { step, item: PlanItem::Edge(chosen) });
                self.touch(self.pattern.edge(chosen).other(v), step);
                let covered = self.update_v_inclusion(v, chosen);
                self.split.last_mut().expect("just pushed").covers = covered;
            }
            current = self.next_vertex(v);
        }
    }

    fn touch(&mut self, v: VertexId, step: usize) {
        if !self.touched[v] {
            self.touched[v] = true;
            self.order.push(Materialization { step, item: PlanItem::Vertex(v) });
        }
    }

    fn has_unvisited_edge(&self, v: VertexId) -> bool {
        self.pattern.incident_edges(v).any(|e| !self.visited[e])
    }

    /// Unvisited same-side siblings of `e` at `v`.
    fn unvisited_siblings(&self, v: VertexId, e: EdgeId) -> Vec<EdgeId> {
        let pe = self.pattern.edge(e);
        let same_side: Vec<EdgeId> =
            if pe.dst == v { self.pattern.in_edges(v).collect() } else { self.pattern.out_edges(v).collect() };
        same_side.into_iter().filter(|&x| x != e && !self.visited[x]).collect()
    }

    fn probe(&mut self, includer: EdgeId, included: EdgeId) -> bool {
        self.counters.probes += 1;
        self.includes[includer][included]
    }

    /// Number of unvisited edges `e` would remove if kept at `v`.
    pub fn coverage(&mut self, v: VertexId, e: EdgeId) -> usize {
        let siblings = self.unvisited_siblings(v, e);
        siblings.into_iter().filter(|&x| self.probe(e, x)).count()
    }

    /// The unvisited edge at `v` with the largest coverage. Ties go to the
    /// edge whose far endpoint has the larger total degree, then to the
    /// lower edge index.
    ///
    /// Panics if `v` has no unvisited incident edge.
    pub fn find_max_e_coverage(&mut self, v: VertexId) -> EdgeId {
        let candidates: Vec<EdgeId> = self.pattern.incident_edges(v).filter(|&e| !self.visited[e]).collect();
        assert!(!candidates.is_empty(), "find_max_e_coverage: no unvisited edge at vertex {v}");
        let mut best: Option<(usize, usize, EdgeId)> = None;
        for e in candidates {
            let cov = self.coverage(v, e);
            let far_deg = self.pattern.total_deg(self.pattern.edge(e).other(v));
            let better = match best {
                None => true,
                Some((bc, bd, _)) => (cov, far_deg) > (bc, bd),
            };
            if better {
                best = Some((cov, far_deg, e));
            }
        }
        best.expect("non-empty").2
    }

    /// Removes every unvisited sibling that `chosen` includes at `anchor`
    /// and assigns each its tightest includer as parent. Returns the removed
    /// edges in materialization order.
    pub fn update_v_inclusion(&mut self, anchor: VertexId, chosen: EdgeId) -> Vec<EdgeId> {
        let p = self.pattern;
        let side = if p.edge(chosen).dst == anchor { Side::In } else { Side::Out };
        let mut group: Vec<EdgeId> = Vec::new();
        for x in self.unvisited_siblings(anchor, chosen) {
            if self.probe(chosen, x) {
                group.push(x);
            }
        }
        // Least restrictive first: along this order every includer precedes
        // what it includes (strict dominance raises the degree sum).
        group.sort_by_key(|&x| (p.total_deg(p.edge(x).other(anchor)), x));

        let step = self.split.len();
        let mut seeded = vec![chosen];
        for &x in &group {
            let mut parent = chosen;
            for i in (0..seeded.len()).rev() {
                if self.probe(seeded[i], x) {
                    parent = seeded[i];
                    break;
                }
            }
            self.visited[x] = true;
            self.children[parent].push(x);
            self.removed.push(RemovedEdge { edge: x, parent, anchor, side });
            self.order.push(Materialization { step, item: PlanItem::Edge(x) });
            self.touch(p.edge(x).other(anchor), step);
            seeded.push(x);
        }
        group
    }

    /// Next vertex to stand on: the highest-degree neighbor of `v` that
    /// still has unvisited edges (lowest index on ties).
    fn next_vertex(&self, v: VertexId) -> Option<VertexId> {
        let p = self.pattern;
        p.incident_edges(v)
            .map(|e| p.edge(e).other(v))
            .filter(|&w| self.touched[w] && self.has_unvisited_edge(w))
            .max_by_key(|&w| (p.total_deg(w), std::cmp::Reverse(w)))
    }

    fn finish(self) -> MatchPlan {
        MatchPlan {
            start_vertex: start_vertex(self.pattern),
            split: self.split,
            removed: self.removed,
            materialization_order: self.order,
            children: self.children,
            counters: self.counters,
        }
    }
}

impl MatchPlan {
    /// Kept edges in exploration order.
    pub fn exploration_order(&self) -> Vec<EdgeId> {
        self.split.iter().map(|s| s.edge).collect()
    }

    pub fn removed_edges(&self) -> Vec<EdgeId> {
        self.removed.iter().map(|r| r.edge).collect()
    }

    pub fn parent_of(&self, e: EdgeId) -> Option<EdgeId> {
        self.removed.iter().find(|r| r.edge == e).map(|r| r.parent)
    }

    pub fn is_irreducible(&self) -> bool {
        self.removed.is_empty()
    }

    /// Checks the structural invariants of a plan against its pattern.
    pub fn validate(&self, pattern: &PatternGraph) -> std::result::Result<(), String> {
        let m = pattern.edge_count();
        let n = pattern.vertex_count();
        let mut seen = vec![0u8; m];
        for s in &self.split {
            seen[s.edge] += 1;
        }
        for r in &self.removed {
            seen[r.edge] += 1;
        }
        if let Some(e) = seen.iter().position(|&c| c != 1) {
            return Err(format!("edge {} covered {} times", pattern.edge_label(e), seen[e]));
        }
        let first = self.split.first().ok_or("empty split")?;
        if !pattern.edge(first.edge).touches(self.start_vertex) || first.anchor != self.start_vertex {
            return Err("first split edge does not start at the start vertex".into());
        }

        // When was each edge and vertex scheduled?
        let mut edge_step = vec![usize::MAX; m];
        let mut vertex_step = vec![usize::MAX; n];
        let mut position = vec![usize::MAX; m];
        for (i, mat) in self.materialization_order.iter().enumerate() {
            match mat.item {
                PlanItem::Edge(e) => {
                    edge_step[e] = mat.step;
                    position[e] = i;
                }
                PlanItem::Vertex(v) => vertex_step[v] = vertex_step[v].min(mat.step),
            }
        }
        if vertex_step[self.start_vertex] != 0 {
            return Err("start vertex not materialized at step 0".into());
        }
        for (i, s) in self.split.iter().enumerate() {
            let pe = pattern.edge(s.edge);
            if !pe.touches(s.anchor) {
                return Err(format!("{} not incident to its anchor", pattern.edge_label(s.edge)));
            }
            if edge_step[s.edge] != i + 1 {
                return Err(format!("{} scheduled out of order", pattern.edge_label(s.edge)));
            }
            if vertex_step[s.anchor] > i {
                return Err(format!(
                    "anchor of {} is not materialized before it is explored",
                    pattern.edge_label(s.edge)
                ));
            }
        }
        for r in &self.removed {
            // parent chain must end in the split queue without cycles
            let mut cur = r.edge;
            let mut hops = 0;
            while let Some(parent) = self.parent_of(cur) {
                cur = parent;
                hops += 1;
                if hops > m {
                    return Err(format!("parent cycle through {}", pattern.edge_label(r.edge)));
                }
            }
            if !self.split.iter().any(|s| s.edge == cur) {
                return Err(format!("parent chain of {} leaves the plan", pattern.edge_label(r.edge)));
            }
            let (child, parent) = (pattern.edge(r.edge), pattern.edge(r.parent));
            let shares = match r.side {
                Side::In => child.dst == r.anchor && parent.dst == r.anchor,
                Side::Out => child.src == r.anchor && parent.src == r.anchor,
            };
            if !shares {
                return Err(format!("{} does not share its anchor with its parent", pattern.edge_label(r.edge)));
            }
            if position[r.parent] >= position[r.edge] || edge_step[r.parent] > edge_step[r.edge] {
                return Err(format!("parent of {} scheduled after it", pattern.edge_label(r.edge)));
            }
            let root = self.split.iter().find(|s| s.edge == cur).expect("checked");
            if root.anchor != r.anchor {
                return Err(format!("{} is not anchored where its root is explored", pattern.edge_label(r.edge)));
            }
        }
        Ok(())
    }

    /// Human-readable plan: start vertex, the split queue with the edges
    /// each entry covers, removed edges with parents, and the interleaved
    /// materialization schedule.
    pub fn dump(&self, pattern: &PatternGraph) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "START {}", pattern.name(self.start_vertex));
        let _ = writeln!(out, "SPLIT");
        for (i, s) in self.split.iter().enumerate() {
            let covers: Vec<String> = s.covers.iter().map(|&e| pattern.edge_label(e)).collect();
            let _ = writeln!(
                out,
                "{} {} anchor={} covers={}",
                i + 1,
                pattern.edge_label(s.edge),
                pattern.name(s.anchor),
                if covers.is_empty() { "-".to_string() } else { covers.join(",") }
            );
        }
        let _ = writeln!(out, "REMOVED");
        for r in &self.removed {
            let _ = writeln!(
                out,
                "{} parent={} ctx={}",
                pattern.edge_label(r.edge),
                pattern.edge_label(r.parent),
                pattern.name(r.anchor)
            );
        }
        let _ = writeln!(out, "MATERIALIZE");
        for m in &self.materialization_order {
            let label = match m.item {
                PlanItem::Vertex(v) => pattern.name(v).to_string(),
                PlanItem::Edge(e) => pattern.edge_label(e),
            };
            let _ = writeln!(out, "{} {}", m.step, label);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{p3, p4, p7a};

    fn labels(p: &PatternGraph, edges: &[EdgeId]) -> Vec<String> {
        edges.iter().map(|&e| p.edge_label(e)).collect()
    }

    fn e(p: &PatternGraph, s: &str, d: &str) -> EdgeId {
        p.edge_by_names(s, d).unwrap()
    }

    #[test]
    fn p7a_plan_shape() {
        let p = p7a();
        let plan = reduce(&p, &InclusionClosure::compute(&p)).unwrap();
        assert_eq!(p.name(plan.start_vertex), "c");
        let split = labels(&p, &plan.exploration_order());
        assert_eq!(&split[..2], ["(a,c)", "(c,d)"]);
        let mut kept = split.clone();
        kept.sort();
        let mut expected = vec!["(a,c)", "(c,d)", "(e,f)", "(f,g)", "(a,b)", "(b,e)", "(d,g)"];
        expected.sort();
        assert_eq!(kept, expected);
        assert_eq!(labels(&p, &plan.removed_edges()), ["(b,c)", "(f,c)", "(c,e)"]);
        assert_eq!(plan.validate(&p), Ok(()));
    }

    #[test]
    fn p7a_parents_form_chains() {
        let p = p7a();
        let plan = reduce(&p, &InclusionClosure::compute(&p)).unwrap();
        assert_eq!(plan.parent_of(e(&p, "b", "c")), Some(e(&p, "a", "c")));
        assert_eq!(plan.parent_of(e(&p, "f", "c")), Some(e(&p, "b", "c")));
        assert_eq!(plan.parent_of(e(&p, "c", "e")), Some(e(&p, "c", "d")));
        assert_eq!(plan.children[e(&p, "a", "c")], vec![e(&p, "b", "c")]);
    }

    #[test]
    fn cycles_are_irreducible() {
        for p in [p3(), p4()] {
            let plan = reduce(&p, &InclusionClosure::compute(&p)).unwrap();
            assert!(plan.is_irreducible());
            assert_eq!(plan.split.len(), p.edge_count());
            assert_eq!(plan.validate(&p), Ok(()));
        }
    }

    #[test]
    fn disconnected_pattern_is_rejected() {
        let p = PatternGraph::parse("a b\nc d").unwrap();
        assert!(matches!(reduce(&p, &InclusionClosure::compute(&p)), Err(Error::Plan(_))));
    }

    #[test]
    fn find_max_e_coverage_cases() {
        let p = p7a();
        let cl = InclusionClosure::compute(&p);
        let mut r = Reducer::new(&p, &cl);
        let c = p.vertex("c").unwrap();
        assert_eq!(r.coverage(c, e(&p, "a", "c")), 2);
        assert_eq!(r.coverage(c, e(&p, "c", "d")), 1);
        assert_eq!(r.find_max_e_coverage(c), e(&p, "a", "c"));

        let p = p3();
        let cl = InclusionClosure::compute(&p);
        let mut r = Reducer::new(&p, &cl);
        // all coverages zero and far degrees equal: lowest edge index
        assert_eq!(r.find_max_e_coverage(0), 0);

        let star = PatternGraph::parse("x a\nx b\nx c").unwrap();
        let cl = InclusionClosure::compute(&star);
        let mut r = Reducer::new(&star, &cl);
        assert_eq!(r.find_max_e_coverage(star.vertex("x").unwrap()), 0);
    }

    #[test]
    #[should_panic(expected = "no unvisited edge")]
    fn find_max_e_coverage_requires_unvisited_edge() {
        let p = PatternGraph::parse("a b").unwrap();
        let cl = InclusionClosure::compute(&p);
        let mut r = Reducer::new(&p, &cl);
        r.visited[0] = true;
        r.find_max_e_coverage(0);
    }

    #[test]
    fn update_v_inclusion_cases() {
        let p = p7a();
        let cl = InclusionClosure::compute(&p);
        let mut r = Reducer::new(&p, &cl);
        let c = p.vertex("c").unwrap();
        let ac = e(&p, "a", "c");
        r.visited[ac] = true;
        r.split.push(SplitEdge { edge: ac, anchor: c, covers: vec![] });
        assert_eq!(r.update_v_inclusion(c, ac), vec![e(&p, "b", "c"), e(&p, "f", "c")]);
        assert_eq!(r.children[ac], vec![e(&p, "b", "c")]);
        assert_eq!(r.children[e(&p, "b", "c")], vec![e(&p, "f", "c")]);

        let cd = e(&p, "c", "d");
        r.visited[cd] = true;
        assert_eq!(r.update_v_inclusion(c, cd), vec![e(&p, "c", "e")]);

        let p = p3();
        let cl = InclusionClosure::compute(&p);
        let mut r = Reducer::new(&p, &cl);
        r.visited[0] = true;
        assert!(r.update_v_inclusion(0, 0).is_empty());
    }

    #[test]
    fn star_keeps_one_edge() {
        let star = PatternGraph::parse("s a\ns b\ns c\ns d").unwrap();
        let plan = reduce(&star, &InclusionClosure::compute(&star)).unwrap();
        assert_eq!(plan.split.len(), 1);
        assert_eq!(plan.removed.len(), 3);
        // chain: each leaf seeded by the previous one
        assert_eq!(plan.parent_of(2), Some(1));
        assert_eq!(plan.parent_of(3), Some(2));
    }

    #[test]
    fn unreduced_keeps_everything() {
        let p = p7a();
        let plan = unreduced(&p).unwrap();
        assert!(plan.is_irreducible());
        assert_eq!(plan.split.len(), 10);
        assert_eq!(plan.validate(&p), Ok(()));
    }

    #[test]
    fn dump_is_stable() {
        let p = p7a();
        let plan = reduce(&p, &InclusionClosure::compute(&p)).unwrap();
        let dump = plan.dump(&p);
        assert!(
            dump.starts_with("START c\nSPLIT\n1 (a,c) anchor=c covers=(b,c),(f,c)\n2 (c,d) anchor=c covers=(c,e)\n")
        );
        assert!(
            dump.contains("REMOVED\n(b,c) parent=(a,c) ctx=c\n(f,c) parent=(b,c) ctx=c\n(c,e) parent=(c,d) ctx=c\n")
        );
        assert!(
            dump.contains("MATERIALIZE\n0 c\n1 (a,c)\n1 a\n1 (b,c)\n1 b\n1 (f,c)\n1 f\n2 (c,d)\n2 d\n2 (c,e)\n2 e\n")
        );
        assert_eq!(dump, reduce(&p, &InclusionClosure::compute(&p)).unwrap().dump(&p));
    }
}
