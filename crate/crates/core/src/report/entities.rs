use std::collections::HashMap;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{pct, Table};
use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;
use crate::ingest::{Categories, Category, InteractionRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    Hashtag,
    Url,
}

impl EntityKind {
    fn of(self, r: &InteractionRecord) -> &[String] {
        match self {
            EntityKind::Hashtag => &r.hashtags,
            EntityKind::Url => &r.urls,
        }
    }

    /// Node identifier of an entity in entity networks. Hashtags keep their
    /// `#` so that they cannot collide with user ids.
    pub fn node_id(self, name: &str) -> String {
        match self {
            EntityKind::Hashtag => format!("#{name}"),
            EntityKind::Url => name.to_string(),
        }
    }
}

impl FromStr for EntityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hashtag" => Ok(EntityKind::Hashtag),
            "url" => Ok(EntityKind::Url),
            _ => Err(Error::InvalidConfig(format!("unknown entity kind `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntityShare {
    pub name: String,
    /// Retweets carrying the entity.
    pub total: usize,
    pub by_category: [usize; 4],
}

impl EntityShare {
    fn share(&self, c: Category) -> f64 {
        self.by_category[c.index()] as f64 / self.total as f64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntityRanking {
    pub kind: EntityKind,
    pub k: usize,
    pub entities: Vec<EntityShare>,
    /// Indices into `entities` of the top `k` by bot share.
    pub top_bot: Vec<usize>,
    pub top_suspended: Vec<usize>,
}

fn rank(entities: &[EntityShare], c: Category, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..entities.len()).collect();
    idx.sort_by(|&a, &b| {
        let (x, y) = (&entities[a], &entities[b]);
        y.share(c)
            .total_cmp(&x.share(c))
            .then(y.total.cmp(&x.total))
            .then(x.name.cmp(&y.name))
    });
    idx.truncate(k);
    idx
}

/// Share of each entity's retweet usage coming from each category, with the
/// top `k` entities by bot share and by suspended share. Ties are broken by
/// total usage, then by name.
pub fn top_entities(
    records: &[InteractionRecord],
    categories: &Categories,
    kind: EntityKind,
    k: usize,
) -> EntityRanking {
    let mut usage: HashMap<&str, [usize; 4]> = HashMap::new();
    for r in records.iter().filter(|r| r.is_retweet()) {
        let c = categories.get(&r.actor).index();
        for e in kind.of(r) {
            usage.entry(e.as_str()).or_insert([0; 4])[c] += 1;
        }
    }
    let mut entities: Vec<EntityShare> = usage
        .into_iter()
        .map(|(name, by_category)| EntityShare {
            name: name.to_string(),
            total: by_category.iter().sum(),
            by_category,
        })
        .collect();
    entities.sort_by(|a, b| a.name.cmp(&b.name));
    let top_bot = rank(&entities, Category::Bot, k);
    let top_suspended = rank(&entities, Category::Suspended, k);
    EntityRanking {
        kind,
        k,
        entities,
        top_bot,
        top_suspended,
    }
}

impl EntityRanking {
    pub fn to_table(&self) -> Table {
        let mut h: Vec<String> = ["ranked_by", "rank", "entity", "total"]
            .map(String::from)
            .to_vec();
        h.extend(Category::ALL.map(|c| format!("{}_pct", c.as_str())));
        let mut t = Table::new(&h);
        for (by, list) in [("bot", &self.top_bot), ("suspended", &self.top_suspended)] {
            for (rank, &i) in list.iter().enumerate() {
                let e = &self.entities[i];
                let mut row = vec![
                    by.to_string(),
                    (rank + 1).to_string(),
                    e.name.clone(),
                    e.total.to_string(),
                ];
                row.extend(Category::ALL.map(|c| pct(e.by_category[c.index()], e.total)));
                t.push(row);
            }
        }
        t
    }
}

/// Users of `category` (rows) linked to the entities (columns) of posts they
/// retweeted at least once.
pub fn entity_bipartite(
    records: &[InteractionRecord],
    categories: &Categories,
    category: Category,
    kind: EntityKind,
) -> Result<BipartiteGraph> {
    let selected: Vec<&InteractionRecord> = records
        .iter()
        .filter(|r| r.is_retweet() && categories.get(&r.actor) == category)
        .collect();
    if selected.is_empty() {
        return Err(Error::NoUsersInCategory(category.as_str().to_string()));
    }
    let edges: Vec<(&str, String)> = selected
        .iter()
        .flat_map(|r| {
            kind.of(r)
                .iter()
                .map(|e| (r.actor.as_str(), kind.node_id(e)))
        })
        .collect();
    BipartiteGraph::from_edges(edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::InteractionKind;

    fn rt(actor: &str, tags: &[&str]) -> InteractionRecord {
        InteractionRecord {
            actor: actor.into(),
            target: Some("t".into()),
            kind: InteractionKind::Retweet,
            ts: 0,
            hashtags: tags.iter().map(|s| s.to_string()).collect(),
            urls: vec![],
        }
    }

    fn cats() -> Categories {
        Categories::from_map(
            [
                ("b1", Category::Bot),
                ("b2", Category::Bot),
                ("v", Category::Verified),
            ]
            .map(|(k, v)| (k.to_string(), v))
            .into_iter()
            .collect(),
        )
    }

    #[test]
    fn bot_share_of_one_hashtag() {
        let mut recs: Vec<_> = (0..4).map(|_| rt("b1", &["x"])).collect();
        recs.extend((0..6).map(|_| rt("g", &["x"])));
        let r = top_entities(&recs, &cats(), EntityKind::Hashtag, 5);
        let t = r.to_table();
        assert_eq!(
            t.rows[0][2..6],
            ["x", "10", "0.00", "40.00"].map(String::from)
        );
    }

    #[test]
    fn verified_only_entity_has_no_bot_share() {
        let recs = vec![rt("v", &["y"])];
        let r = top_entities(&recs, &cats(), EntityKind::Hashtag, 5);
        assert_eq!(r.entities[0].by_category[Category::Bot.index()], 0);
        assert_eq!(r.entities[0].by_category[Category::Suspended.index()], 0);
    }

    #[test]
    fn ties_break_on_total_then_name() {
        let recs = vec![rt("b1", &["b", "a"]), rt("b1", &["c"]), rt("b2", &["c"])];
        let r = top_entities(&recs, &cats(), EntityKind::Hashtag, 3);
        let names: Vec<&str> = r
            .top_bot
            .iter()
            .map(|&i| r.entities[i].name.as_str())
            .collect();
        assert_eq!(names, vec!["c", "a", "b"]);
    }

    #[test]
    fn bipartite_is_binary_and_retweet_only() {
        let mut recs = vec![rt("b1", &["a"]), rt("b1", &["a"])];
        let mut orig = rt("b2", &["z"]);
        orig.kind = InteractionKind::Original;
        orig.target = None;
        recs.push(orig);
        let g = entity_bipartite(&recs, &cats(), Category::Bot, EntityKind::Hashtag).unwrap();
        assert_eq!((g.n_rows(), g.n_cols(), g.n_links()), (1, 1, 1));
        assert!(matches!(
            entity_bipartite(&recs, &cats(), Category::Suspended, EntityKind::Hashtag),
            Err(Error::NoUsersInCategory(_))
        ));
    }
}
