use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

use super::{entity_bipartite, pct, ratio, EntityKind, Table};
use crate::bicm::fit_bicm;
use crate::community::{discursive_communities, DiscursiveConfig, DiscursiveResult};
use crate::error::{Error, Result};
use crate::graph::{Graph, Layer};
use crate::ingest::{Categories, Category, InteractionRecord, UserProfile};
use crate::projection::validated_projection;

/// Verified members listed per community.
pub const TOP_VERIFIED: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommunityRow {
    pub label: usize,
    pub size: usize,
    /// Verified members of highest degree in the interaction graph.
    pub top_verified: Vec<String>,
    pub by_category: [usize; 4],
    pub validated_bots: usize,
    pub validated_suspended: usize,
    /// Links of the interaction graph with both ends in the community.
    pub internal_links: usize,
}

impl CommunityRow {
    pub fn bots(&self) -> usize {
        self.by_category[Category::Bot.index()]
    }

    pub fn suspended(&self) -> usize {
        self.by_category[Category::Suspended.index()]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommunityComposition {
    /// Largest community first; ties by label.
    pub rows: Vec<CommunityRow>,
}

/// Composition of each community of `assignment`.
///
/// `validated` holds the users surviving the user-layer projections of the
/// bot and suspended user-by-hashtag networks; `g` is the interaction graph
/// used for degrees and link density.
pub fn community_composition(
    assignment: &HashMap<String, usize>,
    categories: &Categories,
    validated: &HashSet<String>,
    g: &Graph,
) -> CommunityComposition {
    let mut members: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    for (id, &l) in assignment {
        members.entry(l).or_default().push(id);
    }
    let mut internal: HashMap<usize, usize> = HashMap::new();
    for (u, v) in g.edges() {
        if let (Some(a), Some(b)) = (assignment.get(g.node_id(u)), assignment.get(g.node_id(v))) {
            if a == b {
                *internal.entry(*a).or_insert(0) += 1;
            }
        }
    }
    let degree = |id: &str| g.index_of(id).map_or(0, |i| g.degree(i));
    let mut rows: Vec<CommunityRow> = members
        .into_iter()
        .map(|(label, ids)| {
            let mut row = CommunityRow {
                label,
                size: ids.len(),
                top_verified: Vec::new(),
                by_category: [0; 4],
                validated_bots: 0,
                validated_suspended: 0,
                internal_links: internal.get(&label).copied().unwrap_or(0),
            };
            let mut verified = Vec::new();
            for &id in &ids {
                let c = categories.get(id);
                row.by_category[c.index()] += 1;
                match c {
                    Category::Bot if validated.contains(id) => row.validated_bots += 1,
                    Category::Suspended if validated.contains(id) => row.validated_suspended += 1,
                    Category::Verified => verified.push((degree(id), id)),
                    _ => {}
                }
            }
            verified.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(b.1)));
            row.top_verified = verified
                .into_iter()
                .take(TOP_VERIFIED)
                .map(|(_, id)| id.to_string())
                .collect();
            row
        })
        .collect();
    rows.sort_by(|a, b| b.size.cmp(&a.size).then(a.label.cmp(&b.label)));
    CommunityComposition { rows }
}

impl CommunityComposition {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&[
            "community",
            "size",
            "top_verified",
            "bot_pct",
            "suspended_pct",
            "verified_pct",
            "validated_bot_pct",
            "validated_suspended_pct",
            "link_density",
            "no_bots",
        ]);
        for r in &self.rows {
            t.push(vec![
                r.label.to_string(),
                r.size.to_string(),
                r.top_verified.join(";"),
                pct(r.bots(), r.size),
                pct(r.suspended(), r.size),
                pct(r.by_category[Category::Verified.index()], r.size),
                pct(r.validated_bots, r.bots()),
                pct(r.validated_suspended, r.suspended()),
                ratio(r.internal_links, r.size),
                (r.bots() == 0).to_string(),
            ]);
        }
        t
    }
}

#[derive(Debug, Clone)]
pub struct CompositionReport {
    pub discursive: DiscursiveResult,
    /// Bots and suspended users with at least one validated link in their
    /// category's user-by-hashtag projection.
    pub validated: HashSet<String>,
    pub composition: CommunityComposition,
    pub warnings: Vec<String>,
}

/// Users of `category` validated in the user layer of their user-by-hashtag
/// network.
pub fn validated_users(
    records: &[InteractionRecord],
    categories: &Categories,
    category: Category,
    cfg: &DiscursiveConfig,
) -> Result<HashSet<String>> {
    let g = entity_bipartite(records, categories, category, EntityKind::Hashtag)?;
    let model = fit_bicm(&g, &cfg.fit)?;
    let proj = validated_projection(&g, &model, Layer::Rows, cfg.fdr_level)?;
    Ok(proj
        .graph
        .edges()
        .flat_map(|(u, v)| [u, v])
        .map(|i| proj.graph.node_id(i).to_string())
        .collect())
}

/// Discursive communities, validated bot and suspended users, and the
/// composition of each community on the verified by unverified retweet graph.
pub fn composition_report(
    records: &[InteractionRecord],
    profiles: &[UserProfile],
    categories: &Categories,
    cfg: &DiscursiveConfig,
) -> Result<CompositionReport> {
    let discursive = discursive_communities(records, profiles, cfg)?;
    let mut validated = HashSet::new();
    let mut warnings = Vec::new();
    for category in [Category::Bot, Category::Suspended] {
        match validated_users(records, categories, category, cfg) {
            Ok(v) => validated.extend(v),
            Err(
                e @ (Error::NoUsersInCategory(_) | Error::EmptyGraph | Error::DegenerateDegree(_)),
            ) => {
                warnings.push(format!("{}: no validated users ({e})", category.as_str()));
            }
            Err(e) => return Err(e),
        }
    }
    let bg = &discursive.graph;
    let g = Graph::from_edges(
        bg.links()
            .map(|(r, c)| (&bg.row_ids()[r], &bg.col_ids()[c])),
    );
    let composition =
        community_composition(&discursive.labels.assignment(), categories, &validated, &g);
    Ok(CompositionReport {
        discursive,
        validated,
        composition,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validated_share_and_link_density() {
        let mut assignment = HashMap::new();
        let mut cats = HashMap::new();
        let mut validated = HashSet::new();
        for i in 0..100 {
            let id = format!("u{i}");
            assignment.insert(id.clone(), 7);
            if i < 10 {
                cats.insert(id.clone(), Category::Bot);
                if i < 5 {
                    validated.insert(id.clone());
                }
            }
        }
        // 200 internal links: each node to the next two (mod 100).
        let mut edges = Vec::new();
        for i in 0..100 {
            edges.push((format!("u{i}"), format!("u{}", (i + 1) % 100)));
            edges.push((format!("u{i}"), format!("u{}", (i + 2) % 100)));
        }
        let g = Graph::from_edges(edges);
        let comp = community_composition(&assignment, &Categories::from_map(cats), &validated, &g);
        let row = &comp.to_table().rows[0];
        assert_eq!(row[1], "100");
        assert_eq!(row[3], "10.00");
        assert_eq!(row[6], "50.00");
        assert_eq!(row[8], "2.00");
        assert_eq!(row[9], "false");
    }

    #[test]
    fn zero_bots_are_flagged() {
        let assignment: HashMap<String, usize> =
            [("v".to_string(), 0), ("u".to_string(), 0)].into();
        let cats: HashMap<String, Category> = [("v".to_string(), Category::Verified)].into();
        let g = Graph::from_edges([("v", "u")]);
        let comp = community_composition(
            &assignment,
            &Categories::from_map(cats),
            &HashSet::new(),
            &g,
        );
        let row = &comp.to_table().rows[0];
        assert_eq!(
            (row[2].as_str(), row[6].as_str(), row[9].as_str()),
            ("v", "0.00", "true")
        );
    }
}
