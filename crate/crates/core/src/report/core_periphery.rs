use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::Serialize;

use super::Table;
use crate::community::louvain;
use crate::error::Result;
use crate::graph::build_monopartite;
use crate::ingest::{Categories, InteractionRecord};
use crate::scores::{score_by_category, CategoryScores};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DayScores {
    pub date: NaiveDate,
    pub node_ids: Vec<String>,
    pub modularity: f64,
    pub scores: CategoryScores,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorePeriphery {
    pub days: Vec<DayScores>,
    pub warnings: Vec<String>,
}

/// Participation and relevance on each day's undirected retweet graph,
/// partitioned by Louvain.
pub fn core_periphery(
    slices: &BTreeMap<NaiveDate, Vec<InteractionRecord>>,
    categories: &Categories,
    restarts: usize,
    seed: u64,
) -> Result<CorePeriphery> {
    let mut out = CorePeriphery {
        days: Vec::new(),
        warnings: Vec::new(),
    };
    for (&date, records) in slices {
        let g = build_monopartite(
            records
                .iter()
                .filter(|r| r.is_retweet())
                .filter_map(|r| Some((r.actor.as_str(), r.target.as_deref()?))),
        );
        if g.n_edges() == 0 {
            out.warnings.push(format!("{date}: no retweet links"));
            continue;
        }
        let partition = louvain(&g, restarts, seed)?;
        let scores = score_by_category(&g, &partition.labels, categories)?;
        out.warnings
            .extend(scores.warnings.iter().map(|w| format!("{date}: {w}")));
        out.days.push(DayScores {
            date,
            node_ids: g.node_ids().to_vec(),
            modularity: partition.modularity,
            scores,
        });
    }
    Ok(out)
}

impl CorePeriphery {
    /// `date, id, category, community, k, d_in, P, R`.
    pub fn scores_table(&self, categories: &Categories) -> Table {
        let mut t = Table::new(&[
            "date",
            "id",
            "category",
            "community",
            "k",
            "d_in",
            "participation",
            "relevance",
        ]);
        for d in &self.days {
            for s in &d.scores.scores {
                let id = &d.node_ids[s.node];
                t.push(vec![
                    d.date.to_string(),
                    id.clone(),
                    categories.get(id).as_str().to_string(),
                    s.community.to_string(),
                    s.degree.to_string(),
                    s.in_degree.to_string(),
                    s.participation.to_string(),
                    s.relevance.to_string(),
                ]);
            }
        }
        t
    }

    /// `date, pair, score, D, p_value`.
    pub fn ks_table(&self) -> Table {
        let mut t = Table::new(&["date", "pair", "score", "statistic", "p_value"]);
        for d in &self.days {
            for k in &d.scores.tests {
                t.push(vec![
                    d.date.to_string(),
                    format!("{}-{}", k.a.as_str(), k.b.as_str()),
                    k.score.to_string(),
                    k.ks.statistic.to_string(),
                    k.ks.p_value.to_string(),
                ]);
            }
        }
        t
    }

    /// `date, category, n, mean participation, mean relevance`.
    pub fn means_table(&self) -> Table {
        let mut t = Table::new(&["date", "category", "n", "participation", "relevance"]);
        for d in &self.days {
            for m in &d.scores.means {
                t.push(vec![
                    d.date.to_string(),
                    m.category.as_str().to_string(),
                    m.n.to_string(),
                    m.participation.to_string(),
                    m.relevance.to_string(),
                ]);
            }
        }
        t
    }
}
