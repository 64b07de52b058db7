//! Fixture generators shared by the integration tests.
#![allow(dead_code)]

use backbone_core::graph::BipartiteGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn ids(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Chung-Lu style bipartite graph with Pareto(`alpha`) node weights.
pub fn heavy_tailed(
    n_rows: usize,
    n_cols: usize,
    density: f64,
    alpha: f64,
    seed: u64,
) -> BipartiteGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pareto = |n: usize| -> Vec<f64> {
        (0..n)
            .map(|_| (1.0 - rng.gen::<f64>()).powf(-1.0 / (alpha - 1.0)))
            .collect()
    };
    let wr = pareto(n_rows);
    let wc = pareto(n_cols);
    let (sr, sc): (f64, f64) = (wr.iter().sum(), wc.iter().sum());
    let target = density * (n_rows * n_cols) as f64;
    let mut links = Vec::new();
    for r in 0..n_rows {
        for c in 0..n_cols {
            let p = (wr[r] * wc[c] * target / (sr * sc)).min(1.0);
            if rng.gen::<f64>() < p {
                links.push((r, c));
            }
        }
    }
    BipartiteGraph::from_links(&ids("r", n_rows), &ids("c", n_cols), &links).unwrap()
}

/// Erdős–Rényi bipartite graph.
pub fn uniform(n_rows: usize, n_cols: usize, p: f64, seed: u64) -> BipartiteGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut links = Vec::new();
    for r in 0..n_rows {
        for c in 0..n_cols {
            if rng.gen::<f64>() < p {
                links.push((r, c));
            }
        }
    }
    BipartiteGraph::from_links(&ids("r", n_rows), &ids("c", n_cols), &links).unwrap()
}

/// Textbook Benjamini–Hochberg: reject the `i` smallest p-values, where `i`
/// is the largest rank with `p_(i) <= i t / n`. Returns rejected indices, sorted.
pub fn reference_bh(p: &[f64], t: f64) -> Vec<usize> {
    let n = p.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| p[a].partial_cmp(&p[b]).unwrap().then(a.cmp(&b)));
    let mut cut = 0;
    for (rank, &i) in order.iter().enumerate() {
        if p[i] <= (rank + 1) as f64 * t / n as f64 {
            cut = rank + 1;
        }
    }
    let mut out = order[..cut].to_vec();
    out.sort_unstable();
    out
}

/// Upper tail `P(X >= k)` of a Poisson-binomial variable through the discrete
/// Fourier transform of its characteristic function.
pub fn dft_pb_tail(probs: &[f64], k: usize) -> f64 {
    let n = probs.len();
    let m = n + 1;
    let w = 2.0 * std::f64::consts::PI / m as f64;
    let mut pmf = vec![0.0; m];
    for l in 0..m {
        // prod_j (1 - p_j + p_j e^{i w l}) in polar form
        let (mut log_mod, mut arg) = (0.0f64, 0.0f64);
        for &p in probs {
            let (re, im) = (1.0 - p + p * (w * l as f64).cos(), p * (w * l as f64).sin());
            log_mod += re.hypot(im).ln();
            arg += im.atan2(re);
        }
        let modulus = log_mod.exp();
        for (x, slot) in pmf.iter_mut().enumerate() {
            *slot += modulus * (arg - w * (l * x) as f64).cos();
        }
    }
    pmf.iter()
        .skip(k)
        .map(|v| (v / m as f64).max(0.0))
        .sum::<f64>()
        .min(1.0)
}

/// Normalized mutual information `2 I / (H_a + H_b)`; 1 when both are trivial.
pub fn nmi(a: &[usize], b: &[usize]) -> f64 {
    use std::collections::HashMap;
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let mut ca: HashMap<usize, f64> = HashMap::new();
    let mut cb: HashMap<usize, f64> = HashMap::new();
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *ca.entry(x).or_default() += 1.0;
        *cb.entry(y).or_default() += 1.0;
        *joint.entry((x, y)).or_default() += 1.0;
    }
    let h = |c: &HashMap<usize, f64>| -c.values().map(|v| v / n * (v / n).ln()).sum::<f64>();
    let (ha, hb) = (h(&ca), h(&cb));
    if ha + hb == 0.0 {
        return 1.0;
    }
    let i: f64 = joint
        .iter()
        .map(|(&(x, y), &v)| v / n * (v * n / (ca[&x] * cb[&y])).ln())
        .sum();
    2.0 * i / (ha + hb)
}

/// Random simple graph on `n` nodes with edge probability `p`.
pub fn random_graph(n: usize, p: f64, seed: u64) -> backbone_core::graph::Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids = ids("n", n);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    backbone_core::graph::Graph::from_index_edges(ids, edges).unwrap()
}

/// Participation as the exact rational `(k^2 - sum_c k_c^2) / k^2`, counting
/// neighbours community by community.
pub fn brute_participation(
    g: &backbone_core::graph::Graph,
    labels: &[usize],
    u: usize,
) -> (u64, u64) {
    let k = g.degree(u) as u64;
    let n_comm = labels.iter().max().map_or(0, |m| m + 1);
    let mut s = 0;
    for c in 0..n_comm {
        let kc = g.neighbors(u).iter().filter(|&&v| labels[v] == c).count() as u64;
        s += kc * kc;
    }
    (k * k - s, k * k)
}

/// Relevance as the exact ratio `community size / members with in-community
/// degree at least the node's`.
pub fn brute_relevance(g: &backbone_core::graph::Graph, labels: &[usize], u: usize) -> (u64, u64) {
    let d_in = |x: usize| {
        g.neighbors(x)
            .iter()
            .filter(|&&v| labels[v] == labels[x])
            .count()
    };
    let members: Vec<usize> = (0..g.n_nodes())
        .filter(|&x| labels[x] == labels[u])
        .collect();
    let at_least = members.iter().filter(|&&x| d_in(x) >= d_in(u)).count();
    (members.len() as u64, at_least as u64)
}

/// Two-sample KS statistic by evaluating both ECDFs at every sample point.
pub fn brute_ks(a: &[f64], b: &[f64]) -> f64 {
    let ecdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
    a.iter()
        .chain(b)
        .map(|&x| (ecdf(a, x) - ecdf(b, x)).abs())
        .fold(0.0, f64::max)
}
