use serde::Serialize;

use super::{pct_shares, Table};
use crate::ingest::{Categories, Category, InteractionKind, InteractionRecord};

/// Retweet and quote counts by actor category (rows) and target category
/// (columns), in table order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct CrossCategoryMatrix {
    pub retweets: [[usize; 4]; 4],
    pub quotes: [[usize; 4]; 4],
}

pub fn crosstab_interactions(
    records: &[InteractionRecord],
    categories: &Categories,
) -> CrossCategoryMatrix {
    let mut m = CrossCategoryMatrix::default();
    for r in records {
        let Some(target) = r.target.as_deref() else {
            continue;
        };
        let a = categories.get(&r.actor).index();
        let b = categories.get(target).index();
        match r.kind {
            InteractionKind::Retweet => m.retweets[a][b] += 1,
            InteractionKind::Quote => m.quotes[a][b] += 1,
            InteractionKind::Original => {}
        }
    }
    m
}

impl CrossCategoryMatrix {
    /// Retweets plus quotes made by a category.
    pub fn activity(&self, actor: Category) -> usize {
        let a = actor.index();
        self.retweets[a].iter().sum::<usize>() + self.quotes[a].iter().sum::<usize>()
    }

    pub fn total_activity(&self) -> usize {
        Category::ALL.iter().map(|&c| self.activity(c)).sum()
    }

    pub fn header() -> Vec<String> {
        let mut h = vec!["category".to_string(), "tot_pct".to_string()];
        for kind in ["retweet", "quote"] {
            for c in Category::ALL {
                h.push(format!("{kind}_{}_pct", c.as_str()));
            }
        }
        h
    }

    /// Row-normalized percentages; `tot_pct` is the category's share of all
    /// retweets and quotes.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&Self::header());
        let tot = pct_shares(&Category::ALL.map(|c| self.activity(c)));
        for c in Category::ALL {
            let a = c.index();
            let mut row = vec![c.as_str().to_string(), tot[a].clone()];
            for m in [&self.retweets, &self.quotes] {
                row.extend(pct_shares(&m[a]));
            }
            t.push(row);
        }
        t
    }
}
