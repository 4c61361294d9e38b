use dimatch::corpus::{compare, corpus_digraph, corpus_pattern, random_digraph, rng};
use dimatch::oracle::enumerate_bruteforce;
use dimatch::pattern::{directed_cycle, p3, p4, p7a};
use dimatch::{plan, run, DataGraph, ExecConfig, PatternGraph};
use proptest::prelude::*;

#[test]
fn fixed_patterns_match_oracle_on_seeded_graphs() {
    let mut r = rng(0xD1);
    for _ in 0..40 {
        let g = corpus_digraph(&mut r);
        for p in [p3(), p4(), p7a()] {
            let c = compare(&g, &p, 2).unwrap();
            assert!(c.agrees(), "{p}\n{c:?}\narcs {:?}", g.arc_list());
        }
    }
}

#[test]
fn enumeration_lists_exactly_the_oracle_embeddings() {
    let mut r = rng(0xE2);
    for _ in 0..30 {
        let g = random_digraph(&mut r, 9, 0.35);
        let p = corpus_pattern(&mut r);
        let expected = enumerate_bruteforce(&g, &p, true).unwrap().embeddings;
        for reduction in [true, false] {
            let got = run(&plan(&p, reduction).unwrap(), &p, &g, &ExecConfig::enumerate(3)).unwrap();
            assert_eq!(got.embeddings, expected, "{p}");
            assert_eq!(got.embedding_count as usize, expected.len());
        }
    }
}

#[test]
fn occurrences_times_automorphisms_is_embeddings() {
    let mut r = rng(0xF3);
    for _ in 0..20 {
        let g = random_digraph(&mut r, 10, 0.4);
        for p in [p3(), p4(), directed_cycle(5)] {
            let config = ExecConfig { occurrences: true, ..ExecConfig::count(2) };
            let res = run(&plan(&p, true).unwrap(), &p, &g, &config).unwrap();
            let aut = p.automorphism_count().unwrap();
            assert_eq!(res.occurrence_count.unwrap() * aut, res.embedding_count);
        }
    }
}

#[test]
fn dense_graph_with_bidirectional_arcs() {
    let arcs: Vec<(u32, u32)> =
        (0..7u32).flat_map(|u| (0..7u32).filter(move |&v| v != u).map(move |v| (u, v))).collect();
    let g = DataGraph::from_arcs(7, &arcs);
    // complete digraph: every injective map is an embedding
    let p = p7a();
    let c = compare(&g, &p, 4).unwrap();
    assert_eq!(c.oracle, 5040);
    assert!(c.agrees(), "{c:?}");
}

#[test]
fn antiparallel_pattern_edges() {
    let p = PatternGraph::parse("a b\nb a\nb c\nc a").unwrap();
    let mut r = rng(5);
    for _ in 0..20 {
        let g = random_digraph(&mut r, 10, 0.4);
        let c = compare(&g, &p, 1).unwrap();
        assert!(c.agrees(), "{c:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_instances_match_oracle(seed in any::<u64>(), threads in 1usize..4) {
        let mut r = rng(seed);
        let g = random_digraph(&mut r, 8 + (seed % 7) as usize, 0.15 + (seed % 5) as f64 * 0.05);
        let p = corpus_pattern(&mut r);
        let c = compare(&g, &p, threads).unwrap();
        prop_assert!(c.agrees(), "{}\n{:?}", p, c);
    }

    #[test]
    fn thread_count_does_not_change_counts(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = corpus_digraph(&mut r);
        let p = corpus_pattern(&mut r);
        let pl = plan(&p, true).unwrap();
        let counts: Vec<u64> = [1, 2, 8]
            .iter()
            .map(|&t| run(&pl, &p, &g, &ExecConfig::count(t)).unwrap().embedding_count)
            .collect();
        prop_assert!(counts.windows(2).all(|w| w[0] == w[1]), "{:?}", counts);
    }

    #[test]
    fn trail_restores_tables(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_digraph(&mut r, 12, 0.3);
        let p = corpus_pattern(&mut r);
        let config = ExecConfig { verify_trail: true, ..ExecConfig::count(1) };
        let res = run(&plan(&p, true).unwrap(), &p, &g, &config).unwrap();
        prop_assert_eq!(res.stats.trail_violations, 0);
    }
}
