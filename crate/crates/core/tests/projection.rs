mod common;

use std::collections::HashSet;

use backbone_core::bicm::{fit_bicm, FitConfig};
use backbone_core::community::louvain;
use backbone_core::graph::{BipartiteGraph, Layer};
use backbone_core::projection::{
    backbone, cooccurrence_probabilities, exact_pb_pvalue, fdr_select, layer_pair_pvalue,
    poisson_upper_tail, validated_projection,
};
use backbone_core::synth::{two_bloc_with, BlocParams};
use proptest::prelude::*;

proptest! {
    #[test]
    fn poisson_tail_is_non_increasing(mu in 0.0f64..40.0, k in 0u64..80) {
        let a = poisson_upper_tail(mu, k);
        let b = poisson_upper_tail(mu, k + 1);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a, "mu {mu}: P(>= {k}) = {a} < P(>= {}) = {b}", k + 1);
    }

    #[test]
    fn exact_tail_matches_fourier_oracle(probs in prop::collection::vec(0.0f64..1.0, 0..20), k in 0usize..22) {
        let got = exact_pb_pvalue(&probs, k).unwrap();
        let want = common::dft_pb_tail(&probs, k);
        prop_assert!((got - want).abs() <= 1e-10, "{got} vs {want}");
    }

    #[test]
    fn fdr_matches_reference(p in prop::collection::vec(0.0f64..1.0, 1..300), t in 0.001f64..0.3) {
        let sel = fdr_select(&p, t).unwrap();
        let mut got = sel.rejected.clone();
        got.sort_unstable();
        prop_assert_eq!(got, common::reference_bh(&p, t));
    }

    #[test]
    fn fdr_with_ties_matches_reference(p in prop::collection::vec(prop::sample::select(vec![0.0001, 0.001, 0.01, 0.02, 0.5, 1.0]), 1..100)) {
        let sel = fdr_select(&p, 0.05).unwrap();
        let mut got = sel.rejected.clone();
        got.sort_unstable();
        prop_assert_eq!(got, common::reference_bh(&p, 0.05));
    }
}

#[test]
fn pair_p_values_do_not_depend_on_orientation() {
    let g = common::uniform(15, 10, 0.3, 11);
    let m = fit_bicm(&g, &FitConfig::default()).unwrap();
    for layer in [Layer::Rows, Layer::Columns] {
        let n = g.ids(layer).len();
        for a in 0..n {
            for b in a + 1..n {
                let ab = layer_pair_pvalue(&m, &g, layer, a, b).unwrap();
                let ba = layer_pair_pvalue(&m, &g, layer, b, a).unwrap();
                assert_eq!(ab.p_value.to_bits(), ba.p_value.to_bits());
                assert_eq!(ab.observed, ba.observed);
            }
        }
    }
}

#[test]
fn lecam_bound_holds_on_random_graphs() {
    for seed in 0..5 {
        let g = common::uniform(12, 10, 0.35, seed);
        let m = fit_bicm(&g, &FitConfig::default()).unwrap();
        for a in 0..g.n_rows() {
            for b in a + 1..g.n_rows() {
                let s = layer_pair_pvalue(&m, &g, Layer::Rows, a, b).unwrap();
                let probs = cooccurrence_probabilities(&m, &g, Layer::Rows, a, b).unwrap();
                let exact = common::dft_pb_tail(&probs, s.observed);
                assert!((s.poisson_p_value - exact).abs() <= s.lecam_bound + 1e-12);
            }
        }
    }
}

/// Ten rows with identical neighbourhoods of ten columns inside a sparse
/// 10×200 graph are validated against each other.
#[test]
fn twin_rows_in_sparse_graph() {
    let rows = common::ids("r", 10);
    let cols = common::ids("c", 200);
    let mut links = Vec::new();
    for r in 0..10 {
        if r < 2 {
            links.extend((0..10).map(|c| (r, c)));
        } else {
            links.extend(
                (0..19)
                    .map(|j| (r, 10 + 19 * (r - 2) + j))
                    .filter(|&(_, c)| c < 200),
            );
        }
    }
    // Every column needs a link; leftover columns go to the last row.
    let used: HashSet<usize> = links.iter().map(|&(_, c)| c).collect();
    links.extend((0..200).filter(|c| !used.contains(c)).map(|c| (9, c)));
    let g = BipartiteGraph::from_links(&rows, &cols, &links).unwrap();
    let m = fit_bicm(&g, &FitConfig::default()).unwrap();
    let p = validated_projection(&g, &m, Layer::Rows, 0.05).unwrap();
    let pg = &p.graph;
    let (a, b) = (pg.index_of("r0").unwrap(), pg.index_of("r1").unwrap());
    assert!(pg.has_edge(a, b));
}

/// Two pairs of row twins and one pair of column twins; the backbone joins
/// both projections with the original links between survivors.
#[test]
fn backbone_of_fig1_topology() {
    let mut edges: Vec<(String, String)> = Vec::new();
    // Rows a1,a2 share columns x0..x7, rows b1,b2 share y0..y7; filler rows
    // and columns keep the rest of the graph sparse and unstructured.
    for r in ["a1", "a2"] {
        edges.extend((0..8).map(|i| (r.to_string(), format!("x{i}"))));
    }
    for r in ["b1", "b2"] {
        edges.extend((0..8).map(|i| (r.to_string(), format!("y{i}"))));
    }
    // Columns p and q are linked to the same twelve filler rows.
    for i in 0..12 {
        edges.push((format!("f{i}"), "p".into()));
        edges.push((format!("f{i}"), "q".into()));
    }
    for i in 0..40 {
        edges.push((format!("g{i}"), format!("z{i}")));
        edges.push((format!("g{i}"), format!("z{}", (i + 1) % 40)));
    }
    let g =
        BipartiteGraph::from_edges(edges.iter().map(|(a, b)| (a.as_str(), b.as_str()))).unwrap();
    let m = fit_bicm(&g, &FitConfig::default()).unwrap();
    let rows = validated_projection(&g, &m, Layer::Rows, 0.05).unwrap();
    let cols = validated_projection(&g, &m, Layer::Columns, 0.05).unwrap();
    let row_pairs: HashSet<(String, String)> =
        rows.graph.id_edges().map(|(a, b)| sorted(a, b)).collect();
    assert!(row_pairs.contains(&sorted("a1", "a2")));
    assert!(row_pairs.contains(&sorted("b1", "b2")));
    let col_pairs: HashSet<(String, String)> =
        cols.graph.id_edges().map(|(a, b)| sorted(a, b)).collect();
    assert!(col_pairs.contains(&sorted("p", "q")));

    let b = backbone(&g, &rows, &cols).unwrap();
    let bb: HashSet<(String, String)> = b.graph.id_edges().map(|(a, b)| sorted(a, b)).collect();
    assert!(row_pairs.is_subset(&bb));
    assert!(col_pairs.is_subset(&bb));
    // Original links between surviving nodes are re-attached.
    for (r, c) in g.links() {
        let (rid, cid) = (&g.row_ids()[r], &g.col_ids()[c]);
        if b.graph.index_of(rid).is_some() && b.graph.index_of(cid).is_some() {
            assert!(bb.contains(&sorted(rid, cid)), "{rid}-{cid}");
        }
    }
    for (u, layer) in b.layers.iter().enumerate() {
        let id = b.graph.node_id(u);
        assert_eq!(*layer == Layer::Rows, g.row_index(id).is_some());
    }
}

fn sorted(a: &str, b: &str) -> (String, String) {
    if a < b {
        (a.into(), b.into())
    } else {
        (b.into(), a.into())
    }
}

#[test]
fn backbone_contains_both_projections() {
    for seed in 0..4 {
        let tb = two_bloc_with(
            &BlocParams {
                density: 0.7,
                ..Default::default()
            },
            seed,
        )
        .unwrap();
        let g = &tb.graph;
        let m = fit_bicm(g, &FitConfig::default()).unwrap();
        let rows = validated_projection(g, &m, Layer::Rows, 0.05).unwrap();
        let cols = validated_projection(g, &m, Layer::Columns, 0.05).unwrap();
        let b = backbone(g, &rows, &cols).unwrap();
        let bb: HashSet<(String, String)> = b.graph.id_edges().map(|(a, b)| sorted(a, b)).collect();
        for p in [&rows, &cols] {
            for (a, c) in p.graph.id_edges() {
                assert!(bb.contains(&sorted(a, c)));
            }
        }
    }
}

/// Denser blocs than the acceptance fixture carry enough signal for the
/// projections, and Louvain on the backbone then recovers them.
#[test]
fn dense_blocs_are_recovered() {
    for seed in 0..3 {
        let tb = two_bloc_with(
            &BlocParams {
                density: 0.7,
                ..Default::default()
            },
            seed,
        )
        .unwrap();
        let g = &tb.graph;
        let m = fit_bicm(g, &FitConfig::default()).unwrap();
        let rows = validated_projection(g, &m, Layer::Rows, 0.05).unwrap();
        let cols = validated_projection(g, &m, Layer::Columns, 0.05).unwrap();
        let b = backbone(g, &rows, &cols).unwrap();
        let part = louvain(&b.graph, 10, seed).unwrap();
        let truth: Vec<usize> = b
            .graph
            .node_ids()
            .iter()
            .map(|id| match g.row_index(id) {
                Some(r) => tb.row_bloc[r],
                None => tb.col_bloc[g.col_index(id).unwrap()],
            })
            .collect();
        let score = common::nmi(&part.labels, &truth);
        assert!(score >= 0.9, "seed {seed}: NMI {score}");
    }
}
