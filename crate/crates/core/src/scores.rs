//! Core-periphery scores within a partition and the two-sample
//! Kolmogorov-Smirnov test used to compare user categories.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::ingest::{Categories, Category};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeScores {
    pub node: usize,
    pub community: usize,
    pub degree: usize,
    /// Neighbours inside the node's own community.
    pub in_degree: usize,
    pub participation: f64,
    pub relevance: f64,
}

fn check_partition(g: &Graph, partition: &[usize]) -> Result<()> {
    if partition.len() != g.n_nodes() {
        return Err(Error::PartitionSize {
            expected: g.n_nodes(),
            got: partition.len(),
        });
    }
    Ok(())
}

fn check_node(g: &Graph, node: usize) -> Result<()> {
    if node >= g.n_nodes() {
        return Err(Error::IndexOutOfRange {
            index: node,
            len: g.n_nodes(),
        });
    }
    Ok(())
}

/// `1 - Σ_c (k_ic / k_i)^2`, evaluated as one division of exact integers.
fn participation_of(g: &Graph, partition: &[usize], node: usize) -> Result<f64> {
    let k = g.degree(node) as u64;
    if k == 0 {
        return Err(Error::IsolatedNode(g.node_id(node).to_string()));
    }
    let mut by_comm: HashMap<usize, u64> = HashMap::new();
    for &v in g.neighbors(node) {
        *by_comm.entry(partition[v]).or_insert(0) += 1;
    }
    let sq: u64 = by_comm.values().map(|c| c * c).sum();
    Ok((k * k - sq) as f64 / (k * k) as f64)
}

fn in_degree(g: &Graph, partition: &[usize], node: usize) -> usize {
    g.neighbors(node)
        .iter()
        .filter(|&&v| partition[v] == partition[node])
        .count()
}

/// Participation of `node`: 0 when all its neighbours share its community.
pub fn participation_score(g: &Graph, partition: &[usize], node: usize) -> Result<f64> {
    check_partition(g, partition)?;
    check_node(g, node)?;
    participation_of(g, partition, node)
}

/// `-ln` of the fraction of members of the node's community (itself included)
/// whose in-community degree is at least the node's.
pub fn relevance_score(g: &Graph, partition: &[usize], node: usize) -> Result<f64> {
    check_partition(g, partition)?;
    check_node(g, node)?;
    let d = in_degree(g, partition, node);
    let c = partition[node];
    let (mut size, mut above) = (0usize, 0usize);
    for j in (0..g.n_nodes()).filter(|&j| partition[j] == c) {
        size += 1;
        if in_degree(g, partition, j) >= d {
            above += 1;
        }
    }
    Ok(relevance_from_counts(size, above))
}

fn relevance_from_counts(size: usize, above: usize) -> f64 {
    (size as f64 / above as f64).ln()
}

/// Scores of every node with at least one neighbour.
pub fn node_scores(g: &Graph, partition: &[usize]) -> Result<Vec<NodeScores>> {
    check_partition(g, partition)?;
    let d_in: Vec<usize> = (0..g.n_nodes())
        .map(|u| in_degree(g, partition, u))
        .collect();
    let mut by_comm: HashMap<usize, Vec<usize>> = HashMap::new();
    for (u, &d) in d_in.iter().enumerate() {
        by_comm.entry(partition[u]).or_default().push(d);
    }
    for v in by_comm.values_mut() {
        v.sort_unstable();
    }
    (0..g.n_nodes())
        .filter(|&u| g.degree(u) > 0)
        .map(|u| {
            let members = &by_comm[&partition[u]];
            let above = members.len() - members.partition_point(|&d| d < d_in[u]);
            Ok(NodeScores {
                node: u,
                community: partition[u],
                degree: g.degree(u),
                in_degree: d_in[u],
                participation: participation_of(g, partition, u)?,
                relevance: relevance_from_counts(members.len(), above),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n_a: usize,
    pub n_b: usize,
}

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Theta-function form; converges fast for small lambda.
        let c = -std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let s: f64 = (1..=6)
            .map(|k| ((2 * k - 1) as f64).powi(2) * c)
            .map(f64::exp)
            .sum();
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let s: f64 = (1..=100)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp()
            })
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }
}

/// Two-sample KS test with the asymptotic p-value at effective size
/// `n_a n_b / (n_a + n_b)`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(Error::InvalidConfig("NaN in KS sample".into()));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (na, nb) = (xs.len(), ys.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let x = xs[i].min(ys[j]);
        while i < na && xs[i] <= x {
            i += 1;
        }
        while j < nb && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na * nb) as f64 / (na + nb) as f64;
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf(ne.sqrt() * d),
        n_a: na,
        n_b: nb,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryMeans {
    pub category: Category,
    pub n: usize,
    pub participation: f64,
    pub relevance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryTest {
    pub a: Category,
    pub b: Category,
    /// `participation` or `relevance`.
    pub score: &'static str,
    pub ks: KsResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryScores {
    pub scores: Vec<NodeScores>,
    pub means: Vec<CategoryMeans>,
    pub tests: Vec<CategoryTest>,
    pub warnings: Vec<String>,
}

/// Category pairs compared by the KS test.
pub const KS_PAIRS: [(Category, Category); 2] = [
    (Category::Bot, Category::Genuine),
    (Category::Suspended, Category::Genuine),
];

/// Mean scores per category and KS comparisons of bots and suspended users
/// against genuine ones. Categories without scored nodes are skipped with a
/// warning.
pub fn score_by_category(
    g: &Graph,
    partition: &[usize],
    categories: &Categories,
) -> Result<CategoryScores> {
    let scores = node_scores(g, partition)?;
    let mut p: [Vec<f64>; 4] = Default::default();
    let mut r: [Vec<f64>; 4] = Default::default();
    for s in &scores {
        let c = categories.get(g.node_id(s.node)).index();
        p[c].push(s.participation);
        r[c].push(s.relevance);
    }
    let mut means = Vec::new();
    let mut warnings = Vec::new();
    for c in Category::ALL {
        let n = p[c.index()].len();
        if n == 0 {
            warnings.push(format!("no scored nodes in category {}", c.as_str()));
            continue;
        }
        means.push(CategoryMeans {
            category: c,
            n,
            participation: p[c.index()].iter().sum::<f64>() / n as f64,
            relevance: r[c.index()].iter().sum::<f64>() / n as f64,
        });
    }
    let mut tests = Vec::new();
    for (a, b) in KS_PAIRS {
        if p[a.index()].is_empty() || p[b.index()].is_empty() {
            continue;
        }
        for (name, v) in [("participation", &p), ("relevance", &r)] {
            tests.push(CategoryTest {
                a,
                b,
                score: name,
                ks: ks_two_sample(&v[a.index()], &v[b.index()])?,
            });
        }
    }
    Ok(CategoryScores {
        scores,
        means,
        tests,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // Star around `c` with neighbour communities given by `labels`.
    fn star(labels: &[usize]) -> (Graph, Vec<usize>) {
        let edges: Vec<(usize, usize)> = (1..=labels.len()).map(|i| (0, i)).collect();
        let ids = (0..=labels.len()).map(|i| format!("n{i}")).collect();
        let mut part = vec![0];
        part.extend_from_slice(labels);
        (Graph::from_index_edges(ids, edges).unwrap(), part)
    }

    #[test]
    fn participation_examples() {
        let (g, p) = star(&[0, 0, 0, 0]);
        assert_eq!(participation_score(&g, &p, 0).unwrap(), 0.0);
        let (g, p) = star(&[0, 0, 1, 1]);
        assert_eq!(participation_score(&g, &p, 0).unwrap(), 0.5);
        let (g, p) = star(&[0, 1, 2]);
        assert_relative_eq!(
            participation_score(&g, &p, 0).unwrap(),
            2.0 / 3.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn isolated_node_is_an_error() {
        let g =
            Graph::from_index_edges(vec!["a".into(), "b".into(), "c".into()], [(0, 1)]).unwrap();
        assert!(matches!(
            participation_score(&g, &[0, 0, 0], 2),
            Err(Error::IsolatedNode(_))
        ));
    }

    #[test]
    fn relevance_examples() {
        // Community {a, b, c, d} with in-degrees 3, 2, 2, 1.
        let g = Graph::from_edges([("a", "b"), ("a", "c"), ("a", "d"), ("b", "c")]);
        let part = vec![0; 4];
        let a = g.index_of("a").unwrap();
        let d = g.index_of("d").unwrap();
        assert_relative_eq!(
            relevance_score(&g, &part, a).unwrap(),
            4f64.ln(),
            epsilon = 1e-15
        );
        assert_eq!(relevance_score(&g, &part, d).unwrap(), 0.0);
        let lone = Graph::from_edges([("x", "y")]);
        assert_eq!(relevance_score(&lone, &[0, 1], 0).unwrap(), 0.0);
    }

    #[test]
    fn node_scores_agree_with_single_node_functions() {
        let g = Graph::from_edges([
            ("a", "b"),
            ("b", "c"),
            ("a", "c"),
            ("c", "d"),
            ("d", "e"),
            ("e", "f"),
            ("d", "f"),
        ]);
        let part = vec![0, 0, 0, 1, 1, 1];
        for s in node_scores(&g, &part).unwrap() {
            assert_eq!(
                s.participation,
                participation_score(&g, &part, s.node).unwrap()
            );
            assert_eq!(s.relevance, relevance_score(&g, &part, s.node).unwrap());
        }
    }

    #[test]
    fn ks_examples() {
        assert_eq!(
            ks_two_sample(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0])
                .unwrap()
                .statistic,
            0.0
        );
        assert_eq!(
            ks_two_sample(&[0.0, 0.0], &[1.0, 1.0]).unwrap().statistic,
            1.0
        );
        assert_eq!(
            ks_two_sample(&[1.0, 2.0, 3.0, 4.0], &[3.0, 4.0, 5.0, 6.0])
                .unwrap()
                .statistic,
            0.5
        );
        assert!(matches!(
            ks_two_sample(&[], &[1.0]),
            Err(Error::EmptySample)
        ));
    }

    #[test]
    fn kolmogorov_reference_values() {
        // Standard table values of the Kolmogorov distribution.
        assert_relative_eq!(kolmogorov_sf(1.36), 0.0494, epsilon = 2e-4);
        assert_relative_eq!(kolmogorov_sf(1.63), 0.0100, epsilon = 2e-4);
        assert_relative_eq!(kolmogorov_sf(0.5), 0.9639, epsilon = 2e-4);
        // The two series agree where they switch.
        let lo = {
            let l: f64 = 1.18;
            let c = -std::f64::consts::PI.powi(2) / (8.0 * l * l);
            1.0 - (2.0 * std::f64::consts::PI).sqrt() / l
                * (1..=6)
                    .map(|k| (((2 * k - 1) as f64).powi(2) * c).exp())
                    .sum::<f64>()
        };
        assert_relative_eq!(lo, kolmogorov_sf(1.18), epsilon = 1e-12);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn identical_samples_have_unit_p_value() {
        let a = [0.1, 0.4, 0.4, 0.7];
        let ks = ks_two_sample(&a, &a).unwrap();
        assert_eq!((ks.statistic, ks.p_value), (0.0, 1.0));
    }

    #[test]
    fn planted_categories_separate() {
        // Bots hang off a single hub of their own community (P = 0); genuine
        // nodes split their links over two communities (P = 0.5).
        let mut e = Vec::new();
        let mut cat = HashMap::new();
        for i in 0..6 {
            let g = format!("g{i}");
            e.push((g.clone(), format!("x{i}")));
            e.push((g.clone(), format!("y{i}")));
            cat.insert(g, Category::Genuine);
            let b = format!("b{i}");
            e.push((b.clone(), format!("x{i}")));
            cat.insert(b, Category::Bot);
            cat.insert(format!("x{i}"), Category::Verified);
            cat.insert(format!("y{i}"), Category::Verified);
        }
        let g = Graph::from_edges(e);
        let part: Vec<usize> = g
            .node_ids()
            .iter()
            .map(|id| {
                let i: usize = id[1..].parse().unwrap();
                if id.starts_with('y') {
                    2 * i + 1
                } else {
                    2 * i
                }
            })
            .collect();
        let out = score_by_category(&g, &part, &Categories::from_map(cat)).unwrap();
        let t = out
            .tests
            .iter()
            .find(|t| t.a == Category::Bot && t.score == "participation")
            .unwrap();
        assert_eq!(t.ks.statistic, 1.0);
        assert!(out.warnings.iter().any(|w| w.contains("suspended")));
        assert!(!out.tests.iter().any(|t| t.a == Category::Suspended));
    }
}
