use std::collections::HashMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Layer};

/// Label propagation repetitions when none is given.
pub const DEFAULT_RUNS: usize = 1000;

/// Sweep cap per run; runs still changing after this many are flagged.
pub const MAX_SWEEPS: usize = 100;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeLabel {
    pub id: String,
    pub layer: Layer,
    pub fixed: bool,
    /// Modal label over runs; `None` when the node was most often unlabeled.
    pub label: Option<usize>,
    /// Fraction of runs that ended with `label`.
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscursiveLabels {
    /// Rows first, then columns, in graph order.
    pub nodes: Vec<NodeLabel>,
    pub n_runs: usize,
    /// Runs that hit the sweep cap before reaching consensus.
    pub unconverged_runs: usize,
}

impl DiscursiveLabels {
    pub fn get(&self, id: &str) -> Option<&NodeLabel> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Map from node id to its modal label, skipping unassigned nodes.
    pub fn assignment(&self) -> HashMap<String, usize> {
        self.nodes
            .iter()
            .filter_map(|n| n.label.map(|l| (n.id.clone(), l)))
            .collect()
    }

    /// Writes `id \t label \t frequency`; unassigned nodes get the label `unassigned`.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        for n in &self.nodes {
            match n.label {
                Some(l) => writeln!(w, "{}\t{l}\t{}", n.id, n.frequency)?,
                None => writeln!(w, "{}\tunassigned\t{}", n.id, n.frequency)?,
            }
        }
        w.flush()?;
        Ok(())
    }
}

struct Propagation {
    /// Rows are `0..n_rows`, columns follow.
    adj: Vec<Vec<usize>>,
    initial: Vec<u32>,
    free: Vec<usize>,
    n_labels: usize,
}

impl Propagation {
    /// One run from the fixed labels. Returns final labels and whether consensus was reached.
    fn run(&self, rng: &mut ChaCha8Rng) -> (Vec<u32>, bool) {
        let mut labels = self.initial.clone();
        let mut order = self.free.clone();
        order.shuffle(rng);
        let mut count = vec![0u32; self.n_labels];
        let mut touched: Vec<u32> = Vec::new();
        let mut modal: Vec<u32> = Vec::new();
        for _ in 0..MAX_SWEEPS {
            let mut changed = false;
            for &u in &order {
                for &v in &self.adj[u] {
                    let l = labels[v];
                    if l != NONE {
                        if count[l as usize] == 0 {
                            touched.push(l);
                        }
                        count[l as usize] += 1;
                    }
                }
                let top = touched
                    .iter()
                    .map(|&l| count[l as usize])
                    .max()
                    .unwrap_or(0);
                if top > 0 {
                    modal.extend(
                        touched
                            .iter()
                            .copied()
                            .filter(|&l| count[l as usize] == top),
                    );
                    modal.sort_unstable();
                    if !modal.contains(&labels[u]) {
                        labels[u] = modal[rng.gen_range(0..modal.len())];
                        changed = true;
                    }
                    modal.clear();
                }
                for &l in &touched {
                    count[l as usize] = 0;
                }
                touched.clear();
            }
            if !changed {
                return (labels, true);
            }
        }
        (labels, false)
    }
}

/// Propagates the fixed labels of row nodes through the bipartite graph.
///
/// Row nodes listed in `fixed` keep their label. Every other node takes the
/// most common label among its neighbours, ties broken uniformly at random
/// unless the current label is among the tied ones. Updates are asynchronous
/// in a shuffled order and repeat until no label changes. The reported label
/// is the most frequent outcome over `n_runs` independent runs.
pub fn label_propagation(
    bg: &BipartiteGraph,
    fixed: &HashMap<String, usize>,
    n_runs: usize,
    seed: u64,
) -> Result<DiscursiveLabels> {
    if n_runs == 0 {
        return Err(Error::InvalidConfig(
            "at least one propagation run is required".into(),
        ));
    }
    let n_rows = bg.n_rows();
    let n = n_rows + bg.n_cols();
    let mut values: Vec<usize> = bg
        .row_ids()
        .iter()
        .filter_map(|id| fixed.get(id).copied())
        .collect();
    if values.is_empty() {
        return Err(Error::NoFixedLabels);
    }
    values.sort_unstable();
    values.dedup();
    let compact: HashMap<usize, u32> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i as u32))
        .collect();

    let mut adj = Vec::with_capacity(n);
    adj.extend((0..n_rows).map(|r| {
        bg.row_neighbors(r)
            .iter()
            .map(|&c| n_rows + c)
            .collect::<Vec<_>>()
    }));
    adj.extend((0..bg.n_cols()).map(|c| bg.col_neighbors(c).to_vec()));
    let mut initial = vec![NONE; n];
    for (r, id) in bg.row_ids().iter().enumerate() {
        if let Some(v) = fixed.get(id) {
            initial[r] = compact[v];
        }
    }
    let free: Vec<usize> = (0..n).filter(|&u| initial[u] == NONE).collect();
    let prop = Propagation {
        adj,
        initial,
        free,
        n_labels: values.len(),
    };

    // counts[i * (k + 1) + l] for free node i; slot k counts unlabeled outcomes.
    let k = values.len();
    let width = k + 1;
    let (counts, unconverged) = (0..n_runs)
        .into_par_iter()
        .fold(
            || (vec![0u32; prop.free.len() * width], 0usize),
            |(mut counts, mut bad), run| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(run as u64);
                let (labels, converged) = prop.run(&mut rng);
                for (i, &u) in prop.free.iter().enumerate() {
                    let l = if labels[u] == NONE {
                        k
                    } else {
                        labels[u] as usize
                    };
                    counts[i * width + l] += 1;
                }
                bad += usize::from(!converged);
                (counts, bad)
            },
        )
        .reduce(
            || (vec![0u32; prop.free.len() * width], 0),
            |(mut a, x), (b, y)| {
                a.iter_mut().zip(&b).for_each(|(s, t)| *s += t);
                (a, x + y)
            },
        );

    let mut nodes: Vec<NodeLabel> = (0..n)
        .map(|u| {
            let (id, layer) = if u < n_rows {
                (&bg.row_ids()[u], Layer::Rows)
            } else {
                (&bg.col_ids()[u - n_rows], Layer::Columns)
            };
            let fixed = prop.initial[u] != NONE;
            NodeLabel {
                id: id.clone(),
                layer,
                fixed,
                label: fixed.then(|| values[prop.initial[u] as usize]),
                frequency: 1.0,
            }
        })
        .collect();
    for (i, &u) in prop.free.iter().enumerate() {
        let row = &counts[i * width..(i + 1) * width];
        // Lowest label wins ties; the unlabeled slot is last so it only wins outright.
        let best = (0..width).fold(0, |b, l| if row[l] > row[b] { l } else { b });
        nodes[u].label = (best < k).then(|| values[best]);
        nodes[u].frequency = row[best] as f64 / n_runs as f64;
    }
    Ok(DiscursiveLabels {
        nodes,
        n_runs,
        unconverged_runs: unconverged,
    })
}
