//! Constraint inclusion between pattern edges.
//!
//! Vertex constraints are the in/out degree thresholds of a pattern vertex.
//! `u ⪰ v` (u dominates v) when both of u's thresholds are at least v's, so
//! every data node that passes u's filter also passes v's.
//!
//! Two edges sharing an endpoint on the same side (both in-edges of `v`, or
//! both out-edges of `v`) are siblings. If the far endpoint of `e1`
//! dominates the far endpoint of `e2`, the arcs matching `e1` are a subset
//! of those matching `e2` once `v` is fixed: `e1 ⊑ e2` under context `v`.
//!
//! Facts are then grown along directed paths. If path `P1 ⊑ P2` (position
//! by position), appending out-edges at both tails (or prepending in-edges
//! at both heads) keeps the inclusion when the new far endpoints satisfy
//! `w1 ⪰ w2`. The closure is the fixpoint of that step.

use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;

use crate::pattern::{EdgeId, Path, PatternGraph, VertexId};

/// Facts beyond this many stop propagation; the closure is then flagged as
/// truncated. Plans only consume sibling facts, so truncation never changes
/// a plan.
pub const MAX_CLOSURE_FACTS: usize = 200_000;

/// `u ⪰ v`: componentwise degree dominance.
pub fn dominates(pattern: &PatternGraph, u: VertexId, v: VertexId) -> bool {
    pattern.in_deg(u) >= pattern.in_deg(v) && pattern.out_deg(u) >= pattern.out_deg(v)
}

/// Which side of the anchor vertex two sibling edges share.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    /// Both edges end at the anchor.
    In,
    /// Both edges start at the anchor.
    Out,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Derivation {
    /// Two edges sharing `anchor`.
    Sibling { anchor: VertexId, side: Side },
    /// Siblings at one end of a shared context edge.
    SharedContext { context: EdgeId, at_tail: bool },
    /// Extension of an earlier fact (index into [`InclusionClosure::facts`]).
    /// `at_tail` is true for an appended out-edge, false for a prepended
    /// in-edge.
    Extended { from: usize, at_tail: bool },
}

/// `included_path ⊑ includer_path`, aligned position by position.
///
/// The subject edges (`included`, `includer`) are the edges added last; the
/// rest of each path is its context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InclusionFact {
    pub included: EdgeId,
    pub includer: EdgeId,
    pub included_path: Path,
    pub includer_path: Path,
    pub derivation: Derivation,
}

impl InclusionFact {
    /// Anchor vertex if this is a sibling fact.
    pub fn anchor(&self) -> Option<VertexId> {
        match self.derivation {
            Derivation::Sibling { anchor, .. } => Some(anchor),
            Derivation::SharedContext { .. } | Derivation::Extended { .. } => None,
        }
    }

    pub fn is_sibling(&self) -> bool {
        matches!(self.derivation, Derivation::Sibling { .. })
    }

    fn context(path: &Path, subject: EdgeId) -> Vec<EdgeId> {
        path.edges().iter().copied().filter(|&e| e != subject).collect()
    }

    /// Context edges of the included side.
    pub fn included_context(&self) -> Vec<EdgeId> {
        Self::context(&self.included_path, self.included)
    }

    /// Context edges of the includer side.
    pub fn includer_context(&self) -> Vec<EdgeId> {
        Self::context(&self.includer_path, self.includer)
    }

    /// Context token used by the closure dump: the anchor name for sibling
    /// facts, otherwise `<..>` context path(s).
    pub fn context_label(&self, pattern: &PatternGraph) -> String {
        if let Some(anchor) = self.anchor() {
            return pattern.name(anchor).to_string();
        }
        let label = |ctx: Vec<EdgeId>| Path::new(pattern, ctx).expect("context is a path").label(pattern);
        let (a, b) = (label(self.included_context()), label(self.includer_context()));
        if a == b {
            a
        } else {
            format!("{a}/{b}")
        }
    }
}

/// `included^{included_ctx} ⊑ includer^{includer_ctx}` for vertices, where
/// each context is the edge through which the vertex was reached.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VertexInclusion {
    pub included: VertexId,
    pub includer: VertexId,
    pub included_ctx: EdgeId,
    pub includer_ctx: EdgeId,
    /// Edge fact that justifies this entry.
    pub fact: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InclusionClosure {
    facts: Vec<InclusionFact>,
    vertex_inclusions: Vec<VertexInclusion>,
    sibling_count: usize,
    truncated: bool,
}

/// Sibling (same-anchor) inclusion facts, sorted by (includer, included).
pub fn sibling_inclusions(pattern: &PatternGraph) -> Vec<InclusionFact> {
    let mut facts = Vec::new();
    for anchor in 0..pattern.vertex_count() {
        for side in [Side::In, Side::Out] {
            let group: Vec<EdgeId> = match side {
                Side::In => pattern.in_edges(anchor).collect(),
                Side::Out => pattern.out_edges(anchor).collect(),
            };
            for &e1 in &group {
                for &e2 in &group {
                    if e1 == e2 {
                        continue;
                    }
                    let far1 = pattern.edge(e1).other(anchor);
                    let far2 = pattern.edge(e2).other(anchor);
                    if dominates(pattern, far1, far2) {
                        facts.push(InclusionFact {
                            included: e1,
                            includer: e2,
                            included_path: Path::new(pattern, vec![e1]).expect("edge"),
                            includer_path: Path::new(pattern, vec![e2]).expect("edge"),
                            derivation: Derivation::Sibling { anchor, side },
                        });
                    }
                }
            }
        }
    }
    facts.sort_by_key(|f| (f.includer, f.included));
    facts
}

/// Grows `base` to its fixpoint along directed paths.
pub fn propagate_closure(pattern: &PatternGraph, base: Vec<InclusionFact>) -> InclusionClosure {
    let sibling_count = base.len();
    let mut facts = base;
    let mut seen: HashSet<(Vec<EdgeId>, Vec<EdgeId>)> =
        facts.iter().map(|f| (f.included_path.edges().to_vec(), f.includer_path.edges().to_vec())).collect();
    let max_len = pattern.edge_count();
    let mut truncated = false;

    // Extension sources: every fact, plus each single edge included in
    // itself (which yields same-context sibling facts like (c,e)^<b,c>).
    let mut queue: VecDeque<Source> =
        (0..pattern.edge_count()).map(Source::Reflexive).chain((0..facts.len()).map(Source::Fact)).collect();

    'outer: while let Some(source) = queue.pop_front() {
        let (p1, p2) = match source {
            Source::Reflexive(e) => (vec![e], vec![e]),
            Source::Fact(i) => (facts[i].included_path.edges().to_vec(), facts[i].includer_path.edges().to_vec()),
        };
        if p1.len() >= max_len {
            continue;
        }
        for at_tail in [true, false] {
            let candidates = extensions(pattern, &p1, &p2, at_tail);
            for (e2, e4) in candidates {
                if e2 == e4 {
                    continue;
                }
                let (new1, new2) = if at_tail {
                    ([p1.as_slice(), &[e2]].concat(), [p2.as_slice(), &[e4]].concat())
                } else {
                    ([&[e2], p1.as_slice()].concat(), [&[e4], p2.as_slice()].concat())
                };
                if !seen.insert((new1.clone(), new2.clone())) {
                    continue;
                }
                if facts.len() >= MAX_CLOSURE_FACTS {
                    truncated = true;
                    break 'outer;
                }
                let derivation = match source {
                    Source::Fact(i) => Derivation::Extended { from: i, at_tail },
                    Source::Reflexive(context) => Derivation::SharedContext { context, at_tail },
                };
                facts.push(InclusionFact {
                    included: e2,
                    includer: e4,
                    included_path: Path::new(pattern, new1).expect("extension keeps chaining"),
                    includer_path: Path::new(pattern, new2).expect("extension keeps chaining"),
                    derivation,
                });
                queue.push_back(Source::Fact(facts.len() - 1));
            }
        }
    }

    let vertex_inclusions = facts
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let (included, includer) = far_endpoints(pattern, f);
            VertexInclusion { included, includer, included_ctx: f.included, includer_ctx: f.includer, fact: i }
        })
        .collect();

    InclusionClosure { facts, vertex_inclusions, sibling_count, truncated }
}

#[derive(Clone, Copy)]
enum Source {
    Reflexive(EdgeId),
    Fact(usize),
}

/// Pairs of edges that extend both paths at the same end with a
/// dominance-compatible far endpoint, keeping each path vertex-simple.
fn extensions(pattern: &PatternGraph, p1: &[EdgeId], p2: &[EdgeId], at_tail: bool) -> Vec<(EdgeId, EdgeId)> {
    let v1 = path_vertices(pattern, p1);
    let v2 = path_vertices(pattern, p2);
    let (j1, j2) = if at_tail { (*v1.last().unwrap(), *v2.last().unwrap()) } else { (v1[0], v2[0]) };
    let step = |j: VertexId| -> Vec<EdgeId> {
        if at_tail {
            pattern.out_edges(j).collect()
        } else {
            pattern.in_edges(j).collect()
        }
    };
    let mut out = Vec::new();
    for e2 in step(j1) {
        let w1 = pattern.edge(e2).other(j1);
        if v1.contains(&w1) {
            continue;
        }
        for e4 in step(j2) {
            let w2 = pattern.edge(e4).other(j2);
            if v2.contains(&w2) || !dominates(pattern, w1, w2) {
                continue;
            }
            out.push((e2, e4));
        }
    }
    out
}

fn path_vertices(pattern: &PatternGraph, edges: &[EdgeId]) -> Vec<VertexId> {
    let mut out = vec![pattern.edge(edges[0]).src];
    out.extend(edges.iter().map(|&e| pattern.edge(e).dst));
    out
}

/// Far endpoints of a fact's subject edges: the vertices whose filters the
/// fact compares.
fn far_endpoints(pattern: &PatternGraph, f: &InclusionFact) -> (VertexId, VertexId) {
    let far = |path: &Path, subject: EdgeId| {
        let edges = path.edges();
        let e = pattern.edge(subject);
        if edges.len() == 1 {
            match f.derivation {
                Derivation::Sibling { side: Side::In, .. } => e.src,
                Derivation::Sibling { side: Side::Out, .. } => e.dst,
                _ => unreachable!("derived facts have context"),
            }
        } else if edges[0] == subject {
            e.src
        } else {
            e.dst
        }
    };
    (far(&f.included_path, f.included), far(&f.includer_path, f.includer))
}

impl InclusionClosure {
    pub fn compute(pattern: &PatternGraph) -> Self {
        propagate_closure(pattern, sibling_inclusions(pattern))
    }

    /// An empty closure; plans built from it keep every edge.
    pub fn empty() -> Self {
        Self { facts: Vec::new(), vertex_inclusions: Vec::new(), sibling_count: 0, truncated: false }
    }

    pub fn facts(&self) -> &[InclusionFact] {
        &self.facts
    }

    /// The same-anchor facts; these are the ones a plan may act on.
    pub fn sibling_facts(&self) -> &[InclusionFact] {
        &self.facts[..self.sibling_count]
    }

    pub fn vertex_inclusions(&self) -> &[VertexInclusion] {
        &self.vertex_inclusions
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    /// 𝓘(e): every fact whose includer is `e`.
    pub fn inclusion_set(&self, e: EdgeId) -> impl Iterator<Item = &InclusionFact> {
        self.facts.iter().filter(move |f| f.includer == e)
    }

    /// Whether `included ⊑ includer` holds as a sibling fact at `anchor`.
    pub fn sibling_includes(&self, anchor: VertexId, includer: EdgeId, included: EdgeId) -> bool {
        self.sibling_facts()
            .iter()
            .any(|f| f.includer == includer && f.included == included && f.anchor() == Some(anchor))
    }

    /// One line per fact: `INCL <included-edge> <includer-edge> CTX <path>`.
    pub fn dump(&self, pattern: &PatternGraph) -> String {
        let mut out = String::new();
        for f in &self.facts {
            let _ = writeln!(
                out,
                "INCL {} {} CTX {}",
                pattern.edge_label(f.included),
                pattern.edge_label(f.includer),
                f.context_label(pattern)
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{p3, p7a};

    fn e(p: &PatternGraph, s: &str, d: &str) -> EdgeId {
        p.edge_by_names(s, d).unwrap()
    }

    #[test]
    fn p7a_in_edges_of_c_form_a_chain() {
        let p = p7a();
        let cl = InclusionClosure::compute(&p);
        let c = p.vertex("c").unwrap();
        let (ac, bc, fc) = (e(&p, "a", "c"), e(&p, "b", "c"), e(&p, "f", "c"));
        assert!(cl.sibling_includes(c, ac, bc));
        assert!(cl.sibling_includes(c, bc, fc));
        assert!(cl.sibling_includes(c, ac, fc));
        // b and f carry identical degrees, so the tie is recorded both ways
        assert!(cl.sibling_includes(c, fc, bc));
        assert!(!cl.sibling_includes(c, bc, ac));
    }

    #[test]
    fn p7a_out_edges_of_c() {
        let p = p7a();
        let cl = InclusionClosure::compute(&p);
        let c = p.vertex("c").unwrap();
        let (ce, cd) = (e(&p, "c", "e"), e(&p, "c", "d"));
        assert!(cl.sibling_includes(c, cd, ce));
        // e has in-degree 2 and d only 1: d's filter does not imply e's
        assert!(!cl.sibling_includes(c, ce, cd));
    }

    #[test]
    fn sibling_facts_are_sorted() {
        let p = p7a();
        let base = sibling_inclusions(&p);
        assert!(base.windows(2).all(|w| (w[0].includer, w[0].included) <= (w[1].includer, w[1].included)));
        assert!(base.iter().all(|f| f.included != f.includer));
    }

    #[test]
    fn p7a_context_fact_under_bc() {
        let p = p7a();
        let cl = InclusionClosure::compute(&p);
        let (bc, cd, ce) = (e(&p, "b", "c"), e(&p, "c", "d"), e(&p, "c", "e"));
        let found = cl.facts().iter().any(|f| {
            f.included == ce
                && f.includer == cd
                && f.included_path.edges() == [bc, ce]
                && f.includer_path.edges() == [bc, cd]
        });
        assert!(found, "(c,e)^<b,c> ⊑ (c,d)^<b,c> missing");
        let dump = cl.dump(&p);
        assert!(dump.contains("INCL (c,e) (c,d) CTX <b,c>\n"), "{dump}");
        assert!(dump.contains("INCL (b,c) (a,c) CTX c\n"));
    }

    #[test]
    fn p3_has_no_sibling_facts() {
        let p = p3();
        assert!(sibling_inclusions(&p).is_empty());
        let cl = InclusionClosure::compute(&p);
        assert!(cl.sibling_facts().is_empty());
        assert!(cl.facts().iter().all(|f| !f.is_sibling()));
    }

    #[test]
    fn single_edge_closure_is_empty() {
        let p = PatternGraph::parse("a b").unwrap();
        assert!(InclusionClosure::compute(&p).is_empty());
    }

    #[test]
    fn vertex_inclusions_follow_dominance() {
        let p = p7a();
        let cl = InclusionClosure::compute(&p);
        assert_eq!(cl.vertex_inclusions().len(), cl.len());
        for vi in cl.vertex_inclusions() {
            assert!(dominates(&p, vi.included, vi.includer));
        }
        let (a, b) = (p.vertex("a").unwrap(), p.vertex("b").unwrap());
        assert!(cl.vertex_inclusions().iter().any(|vi| vi.included == b && vi.includer == a));
    }

    #[test]
    fn closure_is_deterministic() {
        let p = p7a();
        assert_eq!(InclusionClosure::compute(&p), InclusionClosure::compute(&p));
    }

    #[test]
    fn every_fact_is_aligned_and_dominated() {
        let p = p7a();
        let cl = InclusionClosure::compute(&p);
        assert!(!cl.is_truncated());
        for f in cl.facts() {
            let v1 = f.included_path.vertices(&p);
            let v2 = f.includer_path.vertices(&p);
            assert_eq!(v1.len(), v2.len());
            for (&x, &y) in v1.iter().zip(&v2) {
                assert!(dominates(&p, x, y) || x == y);
            }
            if let Derivation::Extended { from, .. } = f.derivation {
                assert!(from < cl.len());
            }
        }
    }
}
