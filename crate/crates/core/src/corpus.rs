//! Seeded random instances for cross-checking the matcher against the
//! brute-force oracle.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::digraph::{DataGraph, NodeId};
use crate::error::Result;
use crate::executor::{run, ExecConfig};
use crate::oracle::enumerate_bruteforce;
use crate::pattern::{p3, p4, p7a, PatternGraph};
use crate::plan;

pub const MIN_NODES: usize = 6;
pub const MAX_NODES: usize = 24;
pub const MIN_DENSITY: f64 = 0.05;
pub const MAX_DENSITY: f64 = 0.4;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdos-Renyi style digraph: each ordered pair `(u, v)`, `u != v`, is an
/// arc with probability `p`.
pub fn random_digraph<R: Rng>(rng: &mut R, nodes: usize, p: f64) -> DataGraph {
    let mut arcs = Vec::new();
    for u in 0..nodes as NodeId {
        for v in 0..nodes as NodeId {
            if u != v && rng.gen_bool(p) {
                arcs.push((u, v));
            }
        }
    }
    DataGraph::from_arcs(nodes, &arcs)
}

/// Digraph with node count and density drawn from the corpus ranges.
pub fn corpus_digraph<R: Rng>(rng: &mut R) -> DataGraph {
    let nodes = rng.gen_range(MIN_NODES..=MAX_NODES);
    let p = rng.gen_range(MIN_DENSITY..=MAX_DENSITY);
    random_digraph(rng, nodes, p)
}

/// Weakly connected pattern on `vertices` vertices: a random spanning tree
/// with random orientations plus each remaining ordered pair with
/// probability `extra`.
pub fn random_pattern<R: Rng>(rng: &mut R, vertices: usize, extra: f64) -> PatternGraph {
    assert!(vertices >= 2);
    let name = |i: usize| format!("v{i}");
    let mut order: Vec<usize> = (0..vertices).collect();
    order.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for k in 1..vertices {
        let a = order[k];
        let b = order[rng.gen_range(0..k)];
        edges.push(if rng.gen_bool(0.5) { (a, b) } else { (b, a) });
    }
    for u in 0..vertices {
        for v in 0..vertices {
            if u != v && !edges.contains(&(u, v)) && rng.gen_bool(extra) {
                edges.push((u, v));
            }
        }
    }
    edges.sort_unstable();
    let text: String = edges.iter().map(|&(u, v)| format!("{} {}\n", name(u), name(v))).collect();
    PatternGraph::parse(&text).expect("generated pattern is well formed")
}

/// Pattern with 4 to 6 vertices.
pub fn corpus_pattern<R: Rng>(rng: &mut R) -> PatternGraph {
    let vertices = rng.gen_range(4..=6);
    let extra = rng.gen_range(0.0..0.3);
    random_pattern(rng, vertices, extra)
}

/// The fixed patterns plus `random` generated ones.
pub fn pattern_suite<R: Rng>(rng: &mut R, random: usize) -> Vec<PatternGraph> {
    let mut suite = vec![p3(), p4(), p7a()];
    suite.extend((0..random).map(|_| corpus_pattern(rng)));
    suite
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    pub oracle: u64,
    pub reduced: u64,
    pub unreduced: u64,
    pub shadow_mismatches: u64,
    pub removed_edge_adjacency_reads: u64,
}

impl Comparison {
    pub fn agrees(&self) -> bool {
        self.oracle == self.reduced
            && self.oracle == self.unreduced
            && self.shadow_mismatches == 0
            && self.removed_edge_adjacency_reads == 0
    }
}

/// Counts `pattern` in `graph` three ways: brute force, reduced plan, and
/// unreduced plan.
pub fn compare(graph: &DataGraph, pattern: &PatternGraph, threads: usize) -> Result<Comparison> {
    let oracle = enumerate_bruteforce(graph, pattern, false)?.embedding_count;
    let config = ExecConfig { shadow_check: true, verify_trail: true, ..ExecConfig::count(threads) };
    let reduced = run(&plan(pattern, true)?, pattern, graph, &config)?;
    let unreduced = run(&plan(pattern, false)?, pattern, graph, &config)?;
    Ok(Comparison {
        oracle,
        reduced: reduced.embedding_count,
        unreduced: unreduced.embedding_count,
        shadow_mismatches: reduced.stats.shadow_mismatches + unreduced.stats.shadow_mismatches,
        removed_edge_adjacency_reads: reduced.stats.removed_edge_adjacency_reads,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_generation_is_reproducible() {
        let a = corpus_digraph(&mut rng(7));
        let b = corpus_digraph(&mut rng(7));
        assert_eq!(a, b);
        assert!((MIN_NODES..=MAX_NODES).contains(&a.node_count()));
        assert!(a.arc_list().iter().all(|(u, v)| u != v));
    }

    #[test]
    fn patterns_are_connected() {
        let mut r = rng(11);
        for _ in 0..200 {
            let p = corpus_pattern(&mut r);
            assert!(p.is_connected());
            assert!((4..=6).contains(&p.vertex_count()));
        }
    }

    #[test]
    fn compare_small_instance() {
        let g = random_digraph(&mut rng(3), 10, 0.3);
        let c = compare(&g, &p7a(), 2).unwrap();
        assert!(c.agrees(), "{c:?}");
    }
}
