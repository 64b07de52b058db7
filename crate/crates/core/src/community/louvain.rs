use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{modularity, CommunityPartition};
use crate::error::{Error, Result};
use crate::graph::{canonical_labels, Graph};

/// Number of reshuffled restarts when none is given.
pub const DEFAULT_RESTARTS: usize = 10;

// Gains below this are treated as ties, which keeps sweeps from cycling on
// rounding noise.
const GAIN_EPS: f64 = 1e-10;

/// Weighted graph of one aggregation level.
struct Level {
    /// Neighbours other than the node itself, with link weights.
    adj: Vec<Vec<(usize, f64)>>,
    /// Weight of the self-loop, i.e. links internal to the merged community.
    self_weight: Vec<f64>,
    strength: Vec<f64>,
}

impl Level {
    fn from_graph(g: &Graph) -> Self {
        let adj: Vec<Vec<(usize, f64)>> = (0..g.n_nodes())
            .map(|u| g.neighbors(u).iter().map(|&v| (v, 1.0)).collect())
            .collect();
        let strength = adj.iter().map(|a| a.len() as f64).collect();
        Self {
            adj,
            self_weight: vec![0.0; g.n_nodes()],
            strength,
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    /// Local moving phase. Returns each node's community and whether any node moved.
    fn move_nodes(&self, two_m: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
        let n = self.len();
        let mut comm: Vec<usize> = (0..n).collect();
        let mut tot = self.strength.clone();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut weight_to = vec![0.0; n];
        let mut seen = vec![false; n];
        let mut touched = Vec::new();
        let mut any_move = false;
        loop {
            let mut moves = 0;
            for &i in &order {
                let ci = comm[i];
                let ki = self.strength[i];
                for &(j, w) in &self.adj[i] {
                    let c = comm[j];
                    if !seen[c] {
                        seen[c] = true;
                        touched.push(c);
                    }
                    weight_to[c] += w;
                }
                tot[ci] -= ki;
                let mut best = ci;
                let mut best_gain = weight_to[ci] - tot[ci] * ki / two_m;
                for &c in &touched {
                    let gain = weight_to[c] - tot[c] * ki / two_m;
                    if gain > best_gain + GAIN_EPS {
                        best = c;
                        best_gain = gain;
                    }
                }
                tot[best] += ki;
                comm[i] = best;
                if best != ci {
                    moves += 1;
                }
                for &c in &touched {
                    weight_to[c] = 0.0;
                    seen[c] = false;
                }
                touched.clear();
            }
            if moves == 0 {
                break;
            }
            any_move = true;
        }
        (comm, any_move)
    }

    /// Collapses communities (numbered `0..k`) into single nodes.
    fn aggregate(&self, comm: &[usize], k: usize) -> Self {
        let mut links: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); k];
        let mut self_weight = vec![0.0; k];
        for i in 0..self.len() {
            let ci = comm[i];
            self_weight[ci] += self.self_weight[i];
            for &(j, w) in &self.adj[i] {
                let cj = comm[j];
                if ci == cj {
                    if i < j {
                        self_weight[ci] += w;
                    }
                } else {
                    *links[ci].entry(cj).or_insert(0.0) += w;
                }
            }
        }
        let adj: Vec<Vec<(usize, f64)>> =
            links.into_iter().map(|m| m.into_iter().collect()).collect();
        let strength = adj
            .iter()
            .zip(&self_weight)
            .map(|(a, s)| a.iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * s)
            .collect();
        Self {
            adj,
            self_weight,
            strength,
        }
    }
}

/// One multi-level Louvain pass; returns the top-level community of every node.
fn run(g: &Graph, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let two_m = 2.0 * g.n_edges() as f64;
    let mut membership: Vec<usize> = (0..g.n_nodes()).collect();
    let mut level = Level::from_graph(g);
    while level.len() > 1 {
        let (comm, moved) = level.move_nodes(two_m, rng);
        if !moved {
            break;
        }
        let renumbered = canonical_labels(&comm);
        let k = renumbered.iter().max().map_or(0, |&m| m + 1);
        for m in membership.iter_mut() {
            *m = renumbered[*m];
        }
        level = level.aggregate(&renumbered, k);
    }
    canonical_labels(&membership)
}

/// Runs Louvain `n_restarts` times with node orders shuffled from `seed` and
/// keeps the partition of highest modularity (earliest restart on ties).
pub fn louvain(g: &Graph, n_restarts: usize, seed: u64) -> Result<CommunityPartition> {
    if n_restarts == 0 {
        return Err(Error::InvalidConfig(
            "at least one Louvain restart is required".into(),
        ));
    }
    if g.n_edges() == 0 {
        return Err(Error::UndefinedModularity);
    }
    let runs: Vec<(Vec<usize>, f64)> = (0..n_restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let labels = run(g, &mut rng);
            let q = modularity(g, &labels)?;
            Ok((labels, q))
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.1 > runs[best].1 {
            best = i;
        }
    }
    let (labels, q) = runs.into_iter().nth(best).expect("n_restarts > 0");
    Ok(CommunityPartition {
        n_communities: labels.iter().max().map_or(0, |&m| m + 1),
        labels,
        modularity: q,
        restarts: n_restarts,
        best_restart: best,
    })
}
