use std::collections::{BTreeMap, HashSet};

use chrono::NaiveDate;
use serde::Serialize;

use super::{pct_shares, Table};
use crate::ingest::{day_of, Categories, Category, InteractionRecord};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RetweeterPoint {
    pub date: NaiveDate,
    /// Distinct retweeters on the day.
    pub retweeters: usize,
    pub by_category: [usize; 4],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RetweeterSeries {
    /// One entry per requested account, in request order; days without
    /// retweets are omitted.
    pub accounts: Vec<(String, Vec<RetweeterPoint>)>,
    pub warnings: Vec<String>,
}

/// Daily category composition of the distinct retweeters of each account.
pub fn retweeter_composition(
    records: &[InteractionRecord],
    categories: &Categories,
    accounts: &[String],
    offset_secs: i32,
) -> RetweeterSeries {
    let mut out = RetweeterSeries {
        accounts: Vec::new(),
        warnings: Vec::new(),
    };
    for account in accounts {
        let mut by_day: BTreeMap<NaiveDate, HashSet<&str>> = BTreeMap::new();
        for r in records
            .iter()
            .filter(|r| r.is_retweet() && r.target.as_deref() == Some(account.as_str()))
        {
            by_day
                .entry(day_of(r.ts, offset_secs))
                .or_default()
                .insert(&r.actor);
        }
        if by_day.is_empty() {
            out.warnings
                .push(format!("account {account} is never retweeted"));
        }
        let points = by_day
            .into_iter()
            .map(|(date, users)| {
                let mut by_category = [0; 4];
                for u in &users {
                    by_category[categories.get(u).index()] += 1;
                }
                RetweeterPoint {
                    date,
                    retweeters: users.len(),
                    by_category,
                }
            })
            .collect();
        out.accounts.push((account.clone(), points));
    }
    out
}

impl RetweeterSeries {
    pub fn to_table(&self) -> Table {
        let mut h: Vec<String> = ["account", "date", "retweeters"].map(String::from).to_vec();
        h.extend(Category::ALL.map(|c| format!("{}_pct", c.as_str())));
        let mut t = Table::new(&h);
        for (account, points) in &self.accounts {
            for p in points {
                let mut row = vec![
                    account.clone(),
                    p.date.to_string(),
                    p.retweeters.to_string(),
                ];
                row.extend(pct_shares(&p.by_category));
                t.push(row);
            }
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::InteractionKind;

    fn rt(actor: &str, target: &str, day: i64) -> InteractionRecord {
        InteractionRecord {
            actor: actor.into(),
            target: Some(target.into()),
            kind: InteractionKind::Retweet,
            ts: day * 86_400 + 10,
            hashtags: vec![],
            urls: vec![],
        }
    }

    #[test]
    fn distinct_retweeters_per_day() {
        let recs = vec![
            rt("b", "acc", 0),
            rt("u1", "acc", 0),
            rt("u2", "acc", 0),
            rt("u3", "acc", 0),
            rt("u3", "acc", 0),
            rt("u1", "acc", 2),
        ];
        let cats = Categories::from_map([("b".to_string(), Category::Bot)].into());
        let s = retweeter_composition(&recs, &cats, &["acc".to_string(), "ghost".to_string()], 0);
        let pts = &s.accounts[0].1;
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].retweeters, 4);
        let t = s.to_table();
        assert_eq!(t.rows[0][4], "25.00");
        assert!(s.accounts[1].1.is_empty());
        assert_eq!(s.warnings.len(), 1);
    }
}
