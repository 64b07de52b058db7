//! Modularity, Louvain community detection and label propagation.

mod discursive;
mod louvain;
mod propagation;

use std::collections::HashMap;
use std::io::Write;

use serde::Serialize;

pub use discursive::{discursive_communities, DiscursiveConfig, DiscursiveResult};
pub use louvain::{louvain, DEFAULT_RESTARTS};
pub use propagation::{label_propagation, DiscursiveLabels, NodeLabel, DEFAULT_RUNS, MAX_SWEEPS};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Newman-Girvan modularity of `partition` (one label per node of `g`).
pub fn modularity<L: Eq + std::hash::Hash>(g: &Graph, partition: &[L]) -> Result<f64> {
    if partition.len() != g.n_nodes() {
        return Err(Error::PartitionSize {
            expected: g.n_nodes(),
            got: partition.len(),
        });
    }
    if g.n_edges() == 0 {
        return Err(Error::UndefinedModularity);
    }
    let mut index: HashMap<&L, usize> = HashMap::new();
    let community: Vec<usize> = partition
        .iter()
        .map(|l| {
            let next = index.len();
            *index.entry(l).or_insert(next)
        })
        .collect();
    let mut internal = vec![0u64; index.len()];
    let mut degree = vec![0u64; index.len()];
    for u in 0..g.n_nodes() {
        degree[community[u]] += g.degree(u) as u64;
    }
    for (u, v) in g.edges() {
        if community[u] == community[v] {
            internal[community[u]] += 1;
        }
    }
    let m = g.n_edges() as f64;
    Ok(internal
        .iter()
        .zip(&degree)
        .map(|(&e, &d)| e as f64 / m - (d as f64 / (2.0 * m)).powi(2))
        .sum())
}

/// Best partition found over several Louvain restarts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommunityPartition {
    /// Label of each node, numbered `0..` in order of first appearance.
    pub labels: Vec<usize>,
    pub modularity: f64,
    pub n_communities: usize,
    pub restarts: usize,
    /// Index of the restart that produced this partition.
    pub best_restart: usize,
}

impl CommunityPartition {
    /// Writes `id \t label` lines.
    pub fn write_tsv<W: Write>(&self, g: &Graph, mut w: W) -> Result<()> {
        for (id, label) in g.node_ids().iter().zip(&self.labels) {
            writeln!(w, "{id}\t{label}")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Node indices of each community.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_communities];
        for (u, &l) in self.labels.iter().enumerate() {
            out[l].push(u);
        }
        out
    }
}
