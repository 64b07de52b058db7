mod common;

use backbone_core::bicm::{fit_bicm, FitConfig, FitMethod, NodeState};
use backbone_core::graph::{build_monopartite, BipartiteGraph, Layer};
use backbone_core::Error;
use proptest::prelude::*;

fn edge_list() -> impl Strategy<Value = Vec<(u8, u8)>> {
    prop::collection::vec((0u8..12, 0u8..9), 1..60)
}

fn bipartite(edges: &[(u8, u8)]) -> BipartiteGraph {
    BipartiteGraph::from_edges(
        edges
            .iter()
            .map(|&(r, c)| (format!("u{r}"), format!("h{c}"))),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn degree_sums_agree(edges in edge_list()) {
        let g = bipartite(&edges);
        let d = g.degree_sequences();
        prop_assert_eq!(d.row_degrees.iter().sum::<usize>(), g.n_links());
        prop_assert_eq!(d.col_degrees.iter().sum::<usize>(), g.n_links());
    }

    #[test]
    fn v_motifs_are_symmetric_and_bounded(edges in edge_list()) {
        let g = bipartite(&edges);
        for layer in [Layer::Rows, Layer::Columns] {
            let adj = g.adjacency(layer);
            for a in 0..adj.len() {
                for b in 0..adj.len() {
                    if a == b {
                        continue;
                    }
                    let v = g.layer_v_motifs(layer, a, b).unwrap();
                    prop_assert_eq!(v, g.layer_v_motifs(layer, b, a).unwrap());
                    prop_assert!(v <= adj[a].len().min(adj[b].len()));
                }
            }
        }
    }

    #[test]
    fn monopartite_ignores_duplicates_and_direction(edges in prop::collection::vec((0u8..10, 0u8..10), 1..40)) {
        let once = build_monopartite(edges.iter().map(|&(a, b)| (format!("n{a}"), format!("n{b}"))));
        let messy = build_monopartite(
            edges
                .iter()
                .flat_map(|&(a, b)| [(a, b), (b, a), (a, b)])
                .map(|(a, b)| (format!("n{a}"), format!("n{b}"))),
        );
        let set = |g: &backbone_core::graph::Graph| {
            let mut e: Vec<(String, String)> = g
                .id_edges()
                .map(|(a, b)| if a < b { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) })
                .collect();
            e.sort();
            e
        };
        prop_assert_eq!(set(&once), set(&messy));
    }

    #[test]
    fn fit_reproduces_degrees(edges in edge_list(), newton in any::<bool>()) {
        let g = bipartite(&edges);
        let cfg = FitConfig { method: if newton { FitMethod::Newton } else { FitMethod::FixedPoint }, ..Default::default() };
        let m = match fit_bicm(&g, &cfg) {
            Ok(m) => m,
            Err(Error::DegenerateDegree(_)) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let d = g.degree_sequences();
        let e = m.expected_degrees();
        for (k, ek) in d.row_degrees.iter().zip(&e.rows) {
            prop_assert!((*k as f64 - ek).abs() <= cfg.tolerance, "row {k} vs {ek}");
        }
        for (h, eh) in d.col_degrees.iter().zip(&e.cols) {
            prop_assert!((*h as f64 - eh).abs() <= cfg.tolerance, "col {h} vs {eh}");
        }
        for r in 0..g.n_rows() {
            for c in 0..g.n_cols() {
                let p = m.link_probability(r, c);
                prop_assert!((0.0..=1.0).contains(&p));
            }
        }
    }

    /// Equal degrees get equal multipliers; a larger degree never gets a
    /// smaller one, since the expected degree is increasing in the multiplier.
    #[test]
    fn multipliers_follow_degrees(edges in edge_list()) {
        let g = bipartite(&edges);
        let Ok(m) = fit_bicm(&g, &FitConfig::default()) else { return Ok(()) };
        let d = g.degree_sequences();
        for (deg, x, state) in [
            (&d.row_degrees, m.x(), m.row_state()),
            (&d.col_degrees, m.y(), m.col_state()),
        ] {
            let free: Vec<usize> = (0..deg.len()).filter(|&i| state[i] == NodeState::Free).collect();
            for &a in &free {
                prop_assert!(x[a].is_finite() && x[a] > 0.0);
                for &b in &free {
                    if deg[a] == deg[b] {
                        prop_assert!((x[a] - x[b]).abs() <= 1e-8 * x[a].max(x[b]));
                    } else if deg[a] < deg[b] {
                        prop_assert!(x[a] < x[b]);
                    }
                }
            }
        }
    }
}

#[test]
fn sampled_link_frequencies_match_probabilities() {
    let g = common::uniform(6, 8, 0.4, 3);
    let m = fit_bicm(&g, &FitConfig::default()).unwrap();
    let n = 40000;
    let mut counts = vec![vec![0usize; g.n_cols()]; g.n_rows()];
    for seed in 0..n {
        let s = m.sample(seed).unwrap();
        for (r, c) in s.links() {
            let (ri, ci) = (
                g.row_index(&s.row_ids()[r]).unwrap(),
                g.col_index(&s.col_ids()[c]).unwrap(),
            );
            counts[ri][ci] += 1;
        }
    }
    for (r, row) in counts.iter().enumerate() {
        for (c, &k) in row.iter().enumerate() {
            let p = m.link_probability(r, c);
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            assert!(
                (k as f64 - n as f64 * p).abs() <= 3.0 * sigma + 1.0,
                "({r},{c}): {k} vs {}",
                n as f64 * p
            );
        }
    }
}

#[test]
fn symmetric_two_by_two_sample_mean() {
    let g = BipartiteGraph::from_edges([("a", "x"), ("b", "y")]).unwrap();
    let m = fit_bicm(&g, &FitConfig::default()).unwrap();
    let n = 100_000u64;
    let total: usize = (0..n).map(|s| m.sample(s).map_or(0, |s| s.n_links())).sum();
    // Four independent links of probability 1/2: mean 2, variance 1 per draw.
    let mean = total as f64 / n as f64;
    assert!((mean - 2.0).abs() <= 3.0 / (n as f64).sqrt(), "{mean}");
}

#[test]
fn heavy_tailed_fit_is_tight() {
    for seed in 0..5 {
        let g = common::heavy_tailed(120, 200, 0.03, 2.2, seed);
        let m = fit_bicm(&g, &FitConfig::default()).unwrap();
        assert!(
            m.max_residual() <= 1e-8,
            "seed {seed}: {}",
            m.max_residual()
        );
    }
}
