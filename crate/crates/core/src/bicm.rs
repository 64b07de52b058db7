//! Bipartite Configuration Model: the maximum-entropy ensemble of binary
//! bipartite graphs whose expected degrees match an observed pair of degree
//! sequences. Links are independent with probability `x_r y_c / (1 + x_r y_c)`.
//!
//! Fitting works on a reduced system. Nodes whose degree equals the size of
//! the opposite layer (saturated) or zero are peeled off first; they have
//! link probability exactly one or zero and no finite multiplier. The remaining
//! nodes are grouped by degree, since equal degrees imply equal multipliers,
//! and the degree equations are solved over the distinct degrees only.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, DegreeSequences, Layer};

const MODEL_FORMAT: &str = "bicm/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    /// Gauss-Seidel fixed-point iteration with adaptive damping.
    FixedPoint,
    /// Newton iteration on the log-multipliers with backtracking line search.
    #[serde(alias = "quasi-newton")]
    Newton,
}

impl std::str::FromStr for FitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed-point" => Ok(FitMethod::FixedPoint),
            "newton" | "quasi-newton" => Ok(FitMethod::Newton),
            other => Err(Error::InvalidConfig(format!(
                "unknown fit method `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    /// Maximum absolute mismatch between expected and observed degree.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub method: FitMethod,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 10_000,
            method: FitMethod::FixedPoint,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// How a node enters the fitted model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum NodeState {
    /// Carries a finite positive multiplier.
    Free,
    /// Linked to every node of the other layer still present when it was
    /// peeled (`order` is the peeling step).
    Saturated { order: u32 },
    /// No links to nodes still present when it was peeled.
    Empty { order: u32 },
}

impl NodeState {
    fn order(self) -> Option<u32> {
        match self {
            NodeState::Free => None,
            NodeState::Saturated { order } | NodeState::Empty { order } => Some(order),
        }
    }
}

/// Link probability between two nodes of opposite layers given their states
/// and multipliers. Symmetric in its two arguments.
#[inline]
pub fn pair_probability(sa: NodeState, xa: f64, sb: NodeState, xb: f64) -> f64 {
    let decided_by = match (sa.order(), sb.order()) {
        (None, None) => {
            let z = xa * xb;
            return z / (1.0 + z);
        }
        (Some(_), None) => sa,
        (None, Some(_)) => sb,
        (Some(a), Some(b)) => {
            if a < b {
                sa
            } else {
                sb
            }
        }
    };
    match decided_by {
        NodeState::Saturated { .. } => 1.0,
        _ => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub method: FitMethod,
    pub iterations: usize,
    /// Maximum absolute degree residual over all nodes of the full model.
    pub max_residual: f64,
    pub saturated_nodes: usize,
    pub empty_nodes: usize,
    pub row_classes: usize,
    pub col_classes: usize,
}

/// A fitted BiCM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BicmModel {
    format: String,
    row_ids: Vec<String>,
    col_ids: Vec<String>,
    /// Row multipliers; zero for nodes that are not [`NodeState::Free`].
    x: Vec<f64>,
    y: Vec<f64>,
    row_state: Vec<NodeState>,
    col_state: Vec<NodeState>,
    row_degrees: Vec<usize>,
    col_degrees: Vec<usize>,
    report: FitReport,
}

/// Real-valued expected degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedDegrees {
    pub rows: Vec<f64>,
    pub cols: Vec<f64>,
}

impl BicmModel {
    /// Builds a model directly from multipliers; every node is free.
    pub fn from_multipliers(
        row_ids: Vec<String>,
        col_ids: Vec<String>,
        x: Vec<f64>,
        y: Vec<f64>,
    ) -> Result<Self> {
        if row_ids.len() != x.len() || col_ids.len() != y.len() {
            return Err(Error::InvalidConfig(
                "multiplier length does not match layer size".into(),
            ));
        }
        if let Some(v) = x.iter().chain(&y).find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "multiplier {v} is not a nonnegative finite number"
            )));
        }
        Ok(Self {
            format: MODEL_FORMAT.into(),
            row_state: vec![NodeState::Free; x.len()],
            col_state: vec![NodeState::Free; y.len()],
            row_degrees: vec![0; x.len()],
            col_degrees: vec![0; y.len()],
            row_ids,
            col_ids,
            x,
            y,
            report: FitReport {
                method: FitMethod::FixedPoint,
                iterations: 0,
                max_residual: 0.0,
                saturated_nodes: 0,
                empty_nodes: 0,
                row_classes: 0,
                col_classes: 0,
            },
        })
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn col_ids(&self) -> &[String] {
        &self.col_ids
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_ids.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn row_state(&self) -> &[NodeState] {
        &self.row_state
    }

    pub fn col_state(&self) -> &[NodeState] {
        &self.col_state
    }

    pub fn report(&self) -> &FitReport {
        &self.report
    }

    /// Observed degrees the model was fitted to.
    pub fn reference_degrees(&self) -> DegreeSequences {
        DegreeSequences {
            row_degrees: self.row_degrees.clone(),
            col_degrees: self.col_degrees.clone(),
        }
    }

    /// Multipliers and states of one layer.
    pub fn layer(&self, layer: Layer) -> (&[f64], &[NodeState]) {
        match layer {
            Layer::Rows => (&self.x, &self.row_state),
            Layer::Columns => (&self.y, &self.col_state),
        }
    }

    /// `p_rc`.
    pub fn link_probability(&self, r: usize, c: usize) -> f64 {
        pair_probability(self.row_state[r], self.x[r], self.col_state[c], self.y[c])
    }

    pub fn expected_degrees(&self) -> ExpectedDegrees {
        let rows = (0..self.n_rows())
            .into_par_iter()
            .map(|r| {
                (0..self.n_cols())
                    .map(|c| self.link_probability(r, c))
                    .sum()
            })
            .collect();
        let cols = (0..self.n_cols())
            .into_par_iter()
            .map(|c| {
                (0..self.n_rows())
                    .map(|r| self.link_probability(r, c))
                    .sum()
            })
            .collect();
        ExpectedDegrees { rows, cols }
    }

    /// Maximum absolute mismatch between expected and reference degrees.
    pub fn max_residual(&self) -> f64 {
        let e = self.expected_degrees();
        let rows = e
            .rows
            .iter()
            .zip(&self.row_degrees)
            .map(|(a, &b)| (a - b as f64).abs());
        let cols = e
            .cols
            .iter()
            .zip(&self.col_degrees)
            .map(|(a, &b)| (a - b as f64).abs());
        rows.chain(cols).fold(0.0, f64::max)
    }

    /// Draws one graph from the ensemble. Each row uses its own random stream
    /// derived from `seed`, so the result does not depend on thread count.
    /// Nodes that end up without links are dropped from the returned graph.
    pub fn sample(&self, seed: u64) -> Result<BipartiteGraph> {
        let links: Vec<(usize, usize)> = (0..self.n_rows())
            .into_par_iter()
            .flat_map_iter(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(r as u64);
                (0..self.n_cols())
                    .filter(|&c| rng.gen::<f64>() < self.link_probability(r, c))
                    .map(|c| (r, c))
                    .collect::<Vec<_>>()
            })
            .collect();
        BipartiteGraph::from_links(&self.row_ids, &self.col_ids, &links)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s)?;
        if m.format != MODEL_FORMAT {
            return Err(Error::UnsupportedFormat(m.format));
        }
        if m.x.len() != m.row_ids.len()
            || m.y.len() != m.col_ids.len()
            || m.row_state.len() != m.row_ids.len()
            || m.col_state.len() != m.col_ids.len()
        {
            return Err(Error::InvalidConfig(
                "model vectors do not match layer sizes".into(),
            ));
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Whether the model was fitted on a graph with these layers.
    pub fn matches(&self, g: &BipartiteGraph) -> bool {
        self.row_ids == g.row_ids() && self.col_ids == g.col_ids()
    }
}

/// Outcome of peeling saturated and empty nodes.
struct Peeled {
    row_state: Vec<NodeState>,
    col_state: Vec<NodeState>,
    /// Degrees counted towards free nodes only.
    row_reduced: Vec<usize>,
    col_reduced: Vec<usize>,
}

fn peel(g: &BipartiteGraph) -> Peeled {
    let deg = g.degree_sequences();
    let mut row_state = vec![NodeState::Free; g.n_rows()];
    let mut col_state = vec![NodeState::Free; g.n_cols()];
    let mut kr = deg.row_degrees;
    let mut hc = deg.col_degrees;
    let (mut free_rows, mut free_cols) = (g.n_rows(), g.n_cols());
    let mut order = 0u32;
    loop {
        let mut changed = false;
        for r in 0..g.n_rows() {
            if row_state[r] != NodeState::Free {
                continue;
            }
            if kr[r] == 0 {
                row_state[r] = NodeState::Empty { order };
            } else if kr[r] == free_cols {
                row_state[r] = NodeState::Saturated { order };
                for &c in g.row_neighbors(r) {
                    if col_state[c] == NodeState::Free {
                        hc[c] -= 1;
                    }
                }
            } else {
                continue;
            }
            order += 1;
            free_rows -= 1;
            changed = true;
        }
        for c in 0..g.n_cols() {
            if col_state[c] != NodeState::Free {
                continue;
            }
            if hc[c] == 0 {
                col_state[c] = NodeState::Empty { order };
            } else if hc[c] == free_rows {
                col_state[c] = NodeState::Saturated { order };
                for &r in g.col_neighbors(c) {
                    if row_state[r] == NodeState::Free {
                        kr[r] -= 1;
                    }
                }
            } else {
                continue;
            }
            order += 1;
            free_cols -= 1;
            changed = true;
        }
        if !changed {
            break;
        }
    }
    Peeled {
        row_state,
        col_state,
        row_reduced: kr,
        col_reduced: hc,
    }
}

/// Degree classes of one layer: distinct degrees with multiplicities, and the
/// class of each free node.
struct Classes {
    degree: Vec<f64>,
    count: Vec<f64>,
    of_node: Vec<Option<usize>>,
}

fn classes(states: &[NodeState], reduced: &[usize]) -> Classes {
    let mut by_degree: BTreeMap<usize, usize> = BTreeMap::new();
    for (s, &d) in states.iter().zip(reduced) {
        if *s == NodeState::Free {
            *by_degree.entry(d).or_default() += 1;
        }
    }
    let index: BTreeMap<usize, usize> =
        by_degree.keys().enumerate().map(|(i, &d)| (d, i)).collect();
    Classes {
        degree: by_degree.keys().map(|&d| d as f64).collect(),
        count: by_degree.values().map(|&n| n as f64).collect(),
        of_node: states
            .iter()
            .zip(reduced)
            .map(|(s, d)| (*s == NodeState::Free).then(|| index[d]))
            .collect(),
    }
}

/// Rejects reduced degree sequences on the boundary of the feasible region,
/// where some link is forced to probability 0 or 1 and no finite solution
/// exists (a tight Gale-Ryser inequality).
fn check_interior(rows: &Classes, cols: &Classes) -> Result<()> {
    let mut row_deg: Vec<usize> = Vec::new();
    for (d, n) in rows.degree.iter().zip(&rows.count) {
        row_deg.extend(std::iter::repeat_n(*d as usize, *n as usize));
    }
    row_deg.sort_unstable_by(|a, b| b.cmp(a));
    let n_rows = row_deg.len();
    let mut prefix = 0usize;
    for (j, &d) in row_deg.iter().enumerate().take(n_rows.saturating_sub(1)) {
        prefix += d;
        let size = j + 1;
        let capacity: usize = cols
            .degree
            .iter()
            .zip(&cols.count)
            .map(|(&h, &n)| (h as usize).min(size) * n as usize)
            .sum();
        if prefix >= capacity {
            return Err(Error::DegenerateDegree(format!(
                "the {size} highest-degree rows must link to every available column slot; \
                 some link probabilities are forced to 0 or 1"
            )));
        }
    }
    Ok(())
}

/// Maximum residual of the reduced system.
fn reduced_residual(rows: &Classes, cols: &Classes, x: &[f64], y: &[f64]) -> f64 {
    let mut res: f64 = 0.0;
    let mut col_sum = vec![0.0; y.len()];
    for a in 0..x.len() {
        let mut s = 0.0;
        for b in 0..y.len() {
            let z = x[a] * y[b];
            let p = z / (1.0 + z);
            s += cols.count[b] * p;
            col_sum[b] += rows.count[a] * p;
        }
        res = res.max((s - rows.degree[a]).abs());
    }
    for b in 0..y.len() {
        res = res.max((col_sum[b] - cols.degree[b]).abs());
    }
    res
}

fn solve_fixed_point(
    rows: &Classes,
    cols: &Classes,
    x: &mut [f64],
    y: &mut [f64],
    cfg: &FitConfig,
) -> (usize, f64) {
    let mut residual = reduced_residual(rows, cols, x, y);
    let mut damping = 1.0f64;
    let mut it = 0;
    let mut prev_x = x.to_vec();
    let mut prev_y = y.to_vec();
    while residual > cfg.tolerance && it < cfg.max_iterations {
        it += 1;
        prev_x.copy_from_slice(x);
        prev_y.copy_from_slice(y);
        for a in 0..x.len() {
            let denom: f64 = (0..y.len())
                .map(|b| cols.count[b] * y[b] / (1.0 + x[a] * y[b]))
                .sum();
            let target = rows.degree[a] / denom;
            x[a] = (1.0 - damping) * x[a] + damping * target;
        }
        for b in 0..y.len() {
            let denom: f64 = (0..x.len())
                .map(|a| rows.count[a] * x[a] / (1.0 + x[a] * y[b]))
                .sum();
            let target = cols.degree[b] / denom;
            y[b] = (1.0 - damping) * y[b] + damping * target;
        }
        let next = reduced_residual(rows, cols, x, y);
        if next > residual && damping > 0.05 {
            // overshoot: retry the step with a shorter stride
            x.copy_from_slice(&prev_x);
            y.copy_from_slice(&prev_y);
            damping *= 0.5;
            continue;
        }
        residual = next;
        damping = (damping * 1.25).min(1.0);
    }
    (it, residual)
}

/// Solves `a * v = rhs` in place by Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                rhs[row] -= f * rhs[col];
            }
        }
    }
    let mut v = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * v[k]).sum();
        v[row] = (rhs[row] - s) / a[row][row];
    }
    Some(v)
}

fn solve_newton(
    rows: &Classes,
    cols: &Classes,
    x: &mut [f64],
    y: &mut [f64],
    cfg: &FitConfig,
) -> (usize, f64) {
    let (na, nb) = (x.len(), y.len());
    // Unknowns: log x (all row classes), log y (column classes 1..). The first
    // column class is pinned to remove the scale freedom x -> λx, y -> y/λ, and
    // its equation is dropped because the degree sums already tie it down.
    let n = na + nb - 1;
    let mut residual = reduced_residual(rows, cols, x, y);
    let mut it = 0;
    while residual > cfg.tolerance && it < cfg.max_iterations {
        it += 1;
        let mut jac = vec![vec![0.0; n]; n];
        let mut f = vec![0.0; n];
        let mut col_sum = vec![0.0; nb];
        let mut col_diag = vec![0.0; nb];
        for a in 0..na {
            let mut s = 0.0;
            let mut diag = 0.0;
            for b in 0..nb {
                let z = x[a] * y[b];
                let p = z / (1.0 + z);
                let w = p / (1.0 + z);
                s += cols.count[b] * p;
                diag += cols.count[b] * w;
                col_sum[b] += rows.count[a] * p;
                col_diag[b] += rows.count[a] * w;
                if b > 0 {
                    jac[a][na + b - 1] = cols.count[b] * w;
                    jac[na + b - 1][a] = rows.count[a] * w;
                }
            }
            f[a] = s - rows.degree[a];
            jac[a][a] = diag;
        }
        for b in 1..nb {
            f[na + b - 1] = col_sum[b] - cols.degree[b];
            jac[na + b - 1][na + b - 1] = col_diag[b];
        }
        let Some(step) = solve_dense(jac, f.iter().map(|v| -v).collect()) else {
            break;
        };
        let (x0, y0) = (x.to_vec(), y.to_vec());
        let mut lambda = 1.0;
        loop {
            for a in 0..na {
                x[a] = x0[a] * (lambda * step[a]).exp();
            }
            for b in 1..nb {
                y[b] = y0[b] * (lambda * step[na + b - 1]).exp();
            }
            let next = reduced_residual(rows, cols, x, y);
            if next.is_finite() && next < residual {
                residual = next;
                break;
            }
            lambda *= 0.5;
            if lambda < 1e-12 {
                x.copy_from_slice(&x0);
                y.copy_from_slice(&y0);
                return (it, residual);
            }
        }
    }
    (it, residual)
}

/// Fits the model so that expected degrees reproduce the observed ones.
pub fn fit_bicm(g: &BipartiteGraph, cfg: &FitConfig) -> Result<BicmModel> {
    cfg.validate()?;
    if g.n_links() == 0 {
        return Err(Error::EmptyGraph);
    }
    let peeled = peel(g);
    let rows = classes(&peeled.row_state, &peeled.row_reduced);
    let cols = classes(&peeled.col_state, &peeled.col_reduced);
    let (iterations, residual, mut xc, mut yc);
    if rows.degree.is_empty() || cols.degree.is_empty() {
        if !rows.degree.is_empty() || !cols.degree.is_empty() {
            return Err(Error::DegenerateDegree(
                "free nodes left on only one layer".into(),
            ));
        }
        (iterations, residual, xc, yc) = (0, 0.0, Vec::new(), Vec::new());
    } else {
        check_interior(&rows, &cols)?;
        let links: f64 = rows
            .degree
            .iter()
            .zip(&rows.count)
            .map(|(d, n)| d * n)
            .sum();
        let scale = links.sqrt();
        xc = rows.degree.iter().map(|d| d / scale).collect::<Vec<_>>();
        yc = cols.degree.iter().map(|d| d / scale).collect::<Vec<_>>();
        // Solve with some headroom: the full model sums the same terms in a
        // different order than the reduced system.
        let inner = FitConfig {
            tolerance: cfg.tolerance * 0.5,
            ..*cfg
        };
        (iterations, residual) = match cfg.method {
            FitMethod::FixedPoint => solve_fixed_point(&rows, &cols, &mut xc, &mut yc, &inner),
            FitMethod::Newton => solve_newton(&rows, &cols, &mut xc, &mut yc, &inner),
        };
        if !(residual <= inner.tolerance) {
            return Err(Error::NonConvergence {
                iterations,
                residual,
            });
        }
    }
    let expand = |c: &Classes, v: &[f64]| {
        c.of_node
            .iter()
            .map(|k| k.map_or(0.0, |k| v[k]))
            .collect::<Vec<_>>()
    };
    let deg = g.degree_sequences();
    let non_free = |s: &[NodeState], f: fn(&NodeState) -> bool| s.iter().filter(|s| f(s)).count();
    let is_sat = |s: &NodeState| matches!(s, NodeState::Saturated { .. });
    let is_empty = |s: &NodeState| matches!(s, NodeState::Empty { .. });
    let mut model = BicmModel {
        format: MODEL_FORMAT.into(),
        row_ids: g.row_ids().to_vec(),
        col_ids: g.col_ids().to_vec(),
        x: expand(&rows, &xc),
        y: expand(&cols, &yc),
        report: FitReport {
            method: cfg.method,
            iterations,
            max_residual: residual,
            saturated_nodes: non_free(&peeled.row_state, is_sat)
                + non_free(&peeled.col_state, is_sat),
            empty_nodes: non_free(&peeled.row_state, is_empty)
                + non_free(&peeled.col_state, is_empty),
            row_classes: rows.degree.len(),
            col_classes: cols.degree.len(),
        },
        row_state: peeled.row_state,
        col_state: peeled.col_state,
        row_degrees: deg.row_degrees,
        col_degrees: deg.col_degrees,
    };
    model.report.max_residual = model.max_residual();
    if model.report.max_residual > cfg.tolerance {
        return Err(Error::NonConvergence {
            iterations,
            residual: model.report.max_residual,
        });
    }
    Ok(model)
}
