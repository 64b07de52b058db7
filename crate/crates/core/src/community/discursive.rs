use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{
    label_propagation, louvain, CommunityPartition, DiscursiveLabels, DEFAULT_RESTARTS,
    DEFAULT_RUNS,
};
use crate::bicm::{fit_bicm, FitConfig, FitReport};
use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Layer};
use crate::ingest::{InteractionRecord, UserProfile};
use crate::projection::{validated_projection, ValidatedProjection, DEFAULT_FDR_LEVEL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscursiveConfig {
    pub fdr_level: f64,
    pub fit: FitConfig,
    pub louvain_restarts: usize,
    pub propagation_runs: usize,
    pub seed: u64,
}

impl Default for DiscursiveConfig {
    fn default() -> Self {
        Self {
            fdr_level: DEFAULT_FDR_LEVEL,
            fit: FitConfig::default(),
            louvain_restarts: DEFAULT_RESTARTS,
            propagation_runs: DEFAULT_RUNS,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiscursiveResult {
    /// Verified (rows) by unverified (columns) retweet graph.
    pub graph: BipartiteGraph,
    pub fit: FitReport,
    pub projection: ValidatedProjection,
    /// Louvain partition of the validated projection; `None` when the
    /// projection has no edges.
    pub partition: Option<CommunityPartition>,
    /// Label given to each verified user before propagation.
    pub verified_labels: HashMap<String, usize>,
    pub labels: DiscursiveLabels,
}

/// Discursive communities from retweets between verified and unverified users.
///
/// Verified users that survive the validated projection are labelled by
/// Louvain; the remaining verified users take part in propagation like
/// unverified ones. If the projection is empty, every verified user starts
/// a community of its own.
pub fn discursive_communities(
    records: &[InteractionRecord],
    profiles: &[UserProfile],
    cfg: &DiscursiveConfig,
) -> Result<DiscursiveResult> {
    let verified: HashSet<&str> = profiles
        .iter()
        .filter(|p| p.verified)
        .map(|p| p.id.as_str())
        .collect();
    if verified.is_empty() {
        return Err(Error::NoVerifiedUsers);
    }
    let edges: Vec<(&str, &str)> = records
        .iter()
        .filter(|r| r.is_retweet())
        .filter_map(|r| {
            let t = r.target.as_deref()?;
            match (verified.contains(r.actor.as_str()), verified.contains(t)) {
                (true, false) => Some((r.actor.as_str(), t)),
                (false, true) => Some((t, r.actor.as_str())),
                _ => None,
            }
        })
        .collect();
    if edges.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let graph = BipartiteGraph::from_edges(edges)?;
    let model = fit_bicm(&graph, &cfg.fit)?;
    let projection = validated_projection(&graph, &model, Layer::Rows, cfg.fdr_level)?;
    let (partition, verified_labels) = if projection.graph.n_edges() > 0 {
        let p = louvain(&projection.graph, cfg.louvain_restarts, cfg.seed)?;
        let labels = projection
            .graph
            .node_ids()
            .iter()
            .cloned()
            .zip(p.labels.iter().copied())
            .collect();
        (Some(p), labels)
    } else {
        (
            None,
            graph
                .row_ids()
                .iter()
                .cloned()
                .enumerate()
                .map(|(i, id)| (id, i))
                .collect(),
        )
    };
    let labels = label_propagation(&graph, &verified_labels, cfg.propagation_runs, cfg.seed)?;
    Ok(DiscursiveResult {
        fit: model.report().clone(),
        graph,
        projection,
        partition,
        verified_labels,
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::InteractionKind;

    fn rt(actor: &str, target: &str) -> InteractionRecord {
        InteractionRecord {
            actor: actor.into(),
            target: Some(target.into()),
            kind: InteractionKind::Retweet,
            ts: 0,
            hashtags: vec![],
            urls: vec![],
        }
    }

    fn user(id: &str, verified: bool) -> UserProfile {
        UserProfile {
            id: id.into(),
            verified,
            suspended: false,
            cap: None,
        }
    }

    #[test]
    fn single_verified_user_labels_everyone() {
        let records = vec![rt("u1", "v"), rt("u2", "v"), rt("u3", "v"), rt("u1", "u2")];
        let profiles = vec![user("v", true)];
        let cfg = DiscursiveConfig {
            propagation_runs: 20,
            ..Default::default()
        };
        let out = discursive_communities(&records, &profiles, &cfg).unwrap();
        assert!(out.partition.is_none());
        for u in ["u1", "u2", "u3"] {
            assert_eq!(out.labels.get(u).unwrap().label, Some(0));
        }
    }

    #[test]
    fn no_verified_users() {
        let records = vec![rt("u1", "u2")];
        assert!(matches!(
            discursive_communities(&records, &[user("u1", false)], &DiscursiveConfig::default()),
            Err(Error::NoVerifiedUsers)
        ));
    }
}
