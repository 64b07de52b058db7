//! Statistically validated one-mode projections and the monopartite backbone.
//!
//! Two nodes of the same layer are linked in the projection when the number
//! of neighbours they share is significantly larger than the BiCM predicts.
//! Under the model that count is Poisson-binomial with per-neighbour success
//! probability `p_rc p_r'c`; it is approximated by a Poisson law of equal mean
//! unless Le Cam's bound on the approximation error is large, in which case
//! the exact distribution is used. Significance is decided jointly for all
//! pairs with the Benjamini-Hochberg procedure.

pub mod fdr;
pub mod tails;

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

pub use fdr::{fdr_select, fdr_select_among, FdrSelection};
pub use tails::{poisson_binomial_pmf, poisson_binomial_upper_tail, poisson_upper_tail};

use crate::bicm::{pair_probability, BicmModel, NodeState};
use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Graph, Layer};
use crate::io::fmt_exact;

/// Default single-test significance level.
pub const DEFAULT_FDR_LEVEL: f64 = 0.05;

/// Le Cam bound above which the exact Poisson-binomial tail is used.
pub const EXACT_BOUND_THRESHOLD: f64 = 1e-4;

/// Largest opposite layer for which the exact tail is attempted.
pub const EXACT_MAX_NEIGHBOURS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TailMethod {
    Poisson,
    Exact,
}

/// Similarity statistics of one node pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSimilarity {
    pub a: usize,
    pub b: usize,
    /// Observed number of common neighbours.
    pub observed: usize,
    /// Poisson mean `Σ_c p_ac p_bc`.
    pub mean: f64,
    /// `2 Σ_c (p_ac p_bc)^2`.
    pub lecam_bound: f64,
    pub poisson_p_value: f64,
    /// The p-value used for validation (Poisson or exact, see `method`).
    pub p_value: f64,
    pub method: TailMethod,
}

/// Link probabilities of every node of one layer against the other layer,
/// with both layers grouped into classes of identical state and multiplier.
struct PairContext<'a> {
    graph: &'a BipartiteGraph,
    layer: Layer,
    /// Class of each node of the projected layer.
    class_of: Vec<usize>,
    /// `probs[class][k]`: link probability to opposite class `k`.
    probs: Vec<Vec<f64>>,
    /// Size of each opposite class.
    opposite_count: Vec<usize>,
    n_opposite: usize,
}

fn group(mult: &[f64], state: &[NodeState]) -> (Vec<usize>, Vec<(NodeState, f64)>) {
    let mut index: HashMap<(NodeState, u64), usize> = HashMap::new();
    let mut reps = Vec::new();
    let class_of = mult
        .iter()
        .zip(state)
        .map(|(&x, &s)| {
            *index.entry((s, x.to_bits())).or_insert_with(|| {
                reps.push((s, x));
                reps.len() - 1
            })
        })
        .collect();
    (class_of, reps)
}

impl<'a> PairContext<'a> {
    fn new(m: &BicmModel, g: &'a BipartiteGraph, layer: Layer) -> Result<Self> {
        if !m.matches(g) {
            return Err(Error::MismatchedSource);
        }
        let other = match layer {
            Layer::Rows => Layer::Columns,
            Layer::Columns => Layer::Rows,
        };
        let (mx, ms) = m.layer(layer);
        let (ox, os) = m.layer(other);
        let (class_of, reps) = group(mx, ms);
        let (other_class, other_reps) = group(ox, os);
        let mut opposite_count = vec![0; other_reps.len()];
        for &k in &other_class {
            opposite_count[k] += 1;
        }
        let probs = reps
            .iter()
            .map(|&(s, x)| {
                other_reps
                    .iter()
                    .map(|&(so, xo)| pair_probability(s, x, so, xo))
                    .collect()
            })
            .collect();
        Ok(Self {
            graph: g,
            layer,
            class_of,
            probs,
            opposite_count,
            n_opposite: ox.len(),
        })
    }

    fn similarity(&self, a: usize, b: usize, observed: usize) -> PairSimilarity {
        let pa = &self.probs[self.class_of[a]];
        let pb = &self.probs[self.class_of[b]];
        let mut mean = 0.0;
        let mut sq = 0.0;
        for k in 0..pa.len() {
            let q = pa[k] * pb[k];
            let n = self.opposite_count[k] as f64;
            mean += n * q;
            sq += n * q * q;
        }
        let lecam_bound = 2.0 * sq;
        let poisson_p_value = poisson_upper_tail(mean, observed as u64);
        let use_exact =
            lecam_bound > EXACT_BOUND_THRESHOLD && self.n_opposite <= EXACT_MAX_NEIGHBOURS;
        let (p_value, method) = if use_exact && observed > 0 {
            let q: Vec<f64> = (0..pa.len())
                .flat_map(|k| std::iter::repeat_n(pa[k] * pb[k], self.opposite_count[k]))
                .collect();
            (poisson_binomial_upper_tail(&q, observed), TailMethod::Exact)
        } else {
            (
                poisson_p_value,
                if use_exact {
                    TailMethod::Exact
                } else {
                    TailMethod::Poisson
                },
            )
        };
        PairSimilarity {
            a,
            b,
            observed,
            mean,
            lecam_bound,
            poisson_p_value,
            p_value,
            method,
        }
    }

    /// Per-neighbour co-occurrence probabilities `p_ac p_bc`, in opposite-layer order.
    fn cooccurrence_probs(&self, m: &BicmModel, a: usize, b: usize) -> Vec<f64> {
        let n = self.n_opposite;
        (0..n)
            .map(|c| match self.layer {
                Layer::Rows => m.link_probability(a, c) * m.link_probability(b, c),
                Layer::Columns => m.link_probability(c, a) * m.link_probability(c, b),
            })
            .collect()
    }

    fn pair(&self, a: usize, b: usize) -> Result<PairSimilarity> {
        let observed = self.graph.layer_v_motifs(self.layer, a, b)?;
        Ok(self.similarity(a, b, observed))
    }
}

/// Similarity p-value of two rows.
pub fn pair_pvalue(
    m: &BicmModel,
    g: &BipartiteGraph,
    r: usize,
    r2: usize,
) -> Result<PairSimilarity> {
    layer_pair_pvalue(m, g, Layer::Rows, r, r2)
}

/// Similarity p-value of two nodes of `layer`.
pub fn layer_pair_pvalue(
    m: &BicmModel,
    g: &BipartiteGraph,
    layer: Layer,
    a: usize,
    b: usize,
) -> Result<PairSimilarity> {
    PairContext::new(m, g, layer)?.pair(a, b)
}

/// Per-neighbour probabilities `p_ac p_bc` of a pair, for exact tail checks.
pub fn cooccurrence_probabilities(
    m: &BicmModel,
    g: &BipartiteGraph,
    layer: Layer,
    a: usize,
    b: usize,
) -> Result<Vec<f64>> {
    Ok(PairContext::new(m, g, layer)?.cooccurrence_probs(m, a, b))
}

/// Exact `P(PB >= observed)`.
pub fn exact_pb_pvalue(probs: &[f64], observed: usize) -> Result<f64> {
    if let Some(&p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidConfig(format!(
            "probability {p} outside [0, 1]"
        )));
    }
    Ok(poisson_binomial_upper_tail(probs, observed))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidatedEdge {
    /// Layer indices in the source bipartite graph, `a < b`.
    pub a: usize,
    pub b: usize,
    pub observed: usize,
    pub p_value: f64,
}

/// A validated one-mode projection of one layer.
#[derive(Debug, Clone)]
pub struct ValidatedProjection {
    pub layer: Layer,
    pub fdr_level: f64,
    /// Projection over the surviving nodes only.
    pub graph: Graph,
    /// Source-layer index of each node of `graph`.
    pub layer_index: Vec<usize>,
    pub edges: Vec<ValidatedEdge>,
    /// Number of pairs tested, zero-similarity pairs included.
    pub n_hypotheses: usize,
    /// Pairs with at least one common neighbour.
    pub n_candidates: usize,
    /// Pairs whose p-value came from the exact distribution.
    pub n_exact: usize,
    pub cutoff: usize,
    pub threshold: Option<f64>,
    source: u64,
}

impl ValidatedProjection {
    /// Writes `id1 \t id2 \t p_value` lines.
    pub fn write_tsv<W: Write>(&self, g: &BipartiteGraph, mut w: W) -> Result<()> {
        let ids = g.ids(self.layer);
        writeln!(w, "# id1\tid2\tp_value")?;
        for e in &self.edges {
            writeln!(w, "{}\t{}\t{}", ids[e.a], ids[e.b], fmt_exact(e.p_value))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn derives_from(&self, g: &BipartiteGraph) -> bool {
        self.source == g.fingerprint()
    }
}

/// Candidate pairs of `layer` sharing at least one neighbour, with their counts,
/// ordered by `(a, b)`.
fn candidate_pairs(g: &BipartiteGraph, layer: Layer) -> Vec<(usize, usize, usize)> {
    let adj = g.adjacency(layer);
    let inverted = g.adjacency(match layer {
        Layer::Rows => Layer::Columns,
        Layer::Columns => Layer::Rows,
    });
    let n = adj.len();
    (0..n)
        .into_par_iter()
        .map_init(
            || (vec![0usize; n], Vec::new()),
            |(count, touched), a| {
                for &c in &adj[a] {
                    for &b in inverted[c].iter().rev() {
                        if b <= a {
                            break;
                        }
                        if count[b] == 0 {
                            touched.push(b);
                        }
                        count[b] += 1;
                    }
                }
                touched.sort_unstable();
                let out: Vec<_> = touched.iter().map(|&b| (a, b, count[b])).collect();
                for &b in touched.iter() {
                    count[b] = 0;
                }
                touched.clear();
                out
            },
        )
        .flatten_iter()
        .collect()
}

/// Validated projection of `layer` at FDR level `t`.
pub fn validated_projection(
    g: &BipartiteGraph,
    m: &BicmModel,
    layer: Layer,
    t: f64,
) -> Result<ValidatedProjection> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "FDR level must lie in (0, 1), got {t}"
        )));
    }
    let ctx = PairContext::new(m, g, layer)?;
    let n = g.ids(layer).len();
    let n_hypotheses = n * n.saturating_sub(1) / 2;
    let pairs: Vec<PairSimilarity> = candidate_pairs(g, layer)
        .into_par_iter()
        .map(|(a, b, v)| ctx.similarity(a, b, v))
        .collect();
    let n_exact = pairs
        .iter()
        .filter(|p| p.method == TailMethod::Exact)
        .count();
    let (cutoff, threshold, retained) = if pairs.is_empty() {
        (0, None, Vec::new())
    } else {
        let p: Vec<f64> = pairs.iter().map(|s| s.p_value).collect();
        let sel = fdr_select_among(&p, n_hypotheses, t)?;
        (sel.cutoff, sel.threshold, sel.rejected)
    };
    let edges: Vec<ValidatedEdge> = retained
        .into_iter()
        .map(|i| {
            let s = &pairs[i];
            ValidatedEdge {
                a: s.a,
                b: s.b,
                observed: s.observed,
                p_value: s.p_value,
            }
        })
        .collect();
    let mut survives = vec![false; n];
    for e in &edges {
        survives[e.a] = true;
        survives[e.b] = true;
    }
    let layer_index: Vec<usize> = (0..n).filter(|&i| survives[i]).collect();
    let mut local = vec![usize::MAX; n];
    for (j, &i) in layer_index.iter().enumerate() {
        local[i] = j;
    }
    let ids = g.ids(layer);
    let graph = Graph::from_index_edges(
        layer_index.iter().map(|&i| ids[i].clone()).collect(),
        edges.iter().map(|e| (local[e.a], local[e.b])),
    )?;
    Ok(ValidatedProjection {
        layer,
        fdr_level: t,
        graph,
        layer_index,
        n_candidates: pairs.len(),
        edges,
        n_hypotheses,
        n_exact,
        cutoff,
        threshold,
        source: g.fingerprint(),
    })
}

/// Monopartite backbone: both projections joined by the original links
/// between surviving nodes.
#[derive(Debug, Clone)]
pub struct Backbone {
    pub graph: Graph,
    /// Layer of each node of `graph`; rows come first.
    pub layers: Vec<Layer>,
}

impl Backbone {
    /// Writes `id \t layer` lines.
    pub fn write_nodes<W: Write>(&self, mut w: W) -> Result<()> {
        for (id, layer) in self.graph.node_ids().iter().zip(&self.layers) {
            writeln!(w, "{id}\t{}", layer.as_str())?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn backbone(
    g: &BipartiteGraph,
    rows: &ValidatedProjection,
    cols: &ValidatedProjection,
) -> Result<Backbone> {
    if rows.layer != Layer::Rows
        || cols.layer != Layer::Columns
        || !rows.derives_from(g)
        || !cols.derives_from(g)
    {
        return Err(Error::MismatchedSource);
    }
    let n_rows = rows.layer_index.len();
    let mut row_local = vec![None; g.n_rows()];
    let mut col_local = vec![None; g.n_cols()];
    let mut ids = Vec::with_capacity(n_rows + cols.layer_index.len());
    let mut layers = Vec::with_capacity(ids.capacity());
    for (j, &r) in rows.layer_index.iter().enumerate() {
        row_local[r] = Some(j);
        ids.push(g.row_ids()[r].clone());
        layers.push(Layer::Rows);
    }
    for (j, &c) in cols.layer_index.iter().enumerate() {
        col_local[c] = Some(n_rows + j);
        ids.push(g.col_ids()[c].clone());
        layers.push(Layer::Columns);
    }
    let mut edges: Vec<(usize, usize)> = Vec::new();
    edges.extend(
        rows.edges
            .iter()
            .map(|e| (row_local[e.a].unwrap(), row_local[e.b].unwrap())),
    );
    edges.extend(
        cols.edges
            .iter()
            .map(|e| (col_local[e.a].unwrap(), col_local[e.b].unwrap())),
    );
    for (r, c) in g.links() {
        if let (Some(u), Some(v)) = (row_local[r], col_local[c]) {
            edges.push((u, v));
        }
    }
    Ok(Backbone {
        graph: Graph::from_index_edges(ids, edges)?,
        layers,
    })
}
