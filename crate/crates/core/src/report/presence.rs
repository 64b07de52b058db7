use std::collections::{BTreeMap, HashMap, HashSet};

use chrono::NaiveDate;
use serde::Serialize;

use super::{pct_shares, ratio, Table};
use crate::error::{Error, Result};
use crate::ingest::{Categories, Category, InteractionRecord};

/// Daily presence counts. Percentages are derived on output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DayPresence {
    pub date: NaiveDate,
    /// Records of the day, all kinds.
    pub tweets: usize,
    /// Distinct actors.
    pub users: usize,
    pub users_by_category: [usize; 4],
    /// Actors seen for the first time in the series.
    pub new_users: usize,
    pub new_by_category: [usize; 4],
    pub posts_by_category: [usize; 4],
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PresenceSeries {
    pub days: Vec<DayPresence>,
}

/// Per-day user counts, category shares, new-user shares and posts per user.
pub fn presence_series(
    slices: &BTreeMap<NaiveDate, Vec<InteractionRecord>>,
    categories: &Categories,
) -> PresenceSeries {
    let mut seen: HashSet<&str> = HashSet::new();
    let mut days = Vec::with_capacity(slices.len());
    for (&date, records) in slices {
        let mut posts: HashMap<&str, usize> = HashMap::new();
        for r in records {
            *posts.entry(r.actor.as_str()).or_insert(0) += 1;
        }
        let mut day = DayPresence {
            date,
            tweets: records.len(),
            users: posts.len(),
            users_by_category: [0; 4],
            new_users: 0,
            new_by_category: [0; 4],
            posts_by_category: [0; 4],
        };
        for (&user, &n) in &posts {
            let c = categories.get(user).index();
            day.users_by_category[c] += 1;
            day.posts_by_category[c] += n;
            if seen.insert(user) {
                day.new_users += 1;
                day.new_by_category[c] += 1;
            }
        }
        days.push(day);
    }
    PresenceSeries { days }
}

impl PresenceSeries {
    pub fn header() -> Vec<String> {
        let mut h: Vec<String> = ["date", "tweets", "users", "new_users"]
            .map(String::from)
            .to_vec();
        for c in Category::ALL {
            h.push(format!("{}_pct", c.as_str()));
        }
        for c in Category::ALL {
            h.push(format!("new_{}_pct", c.as_str()));
        }
        for c in Category::ALL {
            h.push(format!("{}_posts_per_user", c.as_str()));
        }
        h
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&Self::header());
        for d in &self.days {
            let mut row = vec![
                d.date.to_string(),
                d.tweets.to_string(),
                d.users.to_string(),
                d.new_users.to_string(),
            ];
            row.extend(pct_shares(&d.users_by_category));
            row.extend(pct_shares(&d.new_by_category));
            row.extend(Category::ALL.map(|c| {
                ratio(
                    d.posts_by_category[c.index()],
                    d.users_by_category[c.index()],
                )
            }));
            t.push(row);
        }
        t
    }
}

/// Index of the base-2 logarithmic bin `[2^i, 2^(i+1))` holding `n >= 1`.
pub fn log2_bin(n: usize) -> usize {
    debug_assert!(n >= 1);
    (usize::BITS - 1 - n.leading_zeros()) as usize
}

/// Posts on `day` of users of one category, split into users already active
/// on or before `reference` and users appearing after it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActivityHistogram {
    pub category: Category,
    pub day: NaiveDate,
    pub reference: NaiveDate,
    pub persisting: Vec<usize>,
    pub new: Vec<usize>,
    pub persisting_posts: usize,
    pub new_posts: usize,
}

pub fn activity_histogram(
    slices: &BTreeMap<NaiveDate, Vec<InteractionRecord>>,
    categories: &Categories,
    category: Category,
    day: NaiveDate,
    reference: NaiveDate,
) -> Result<ActivityHistogram> {
    if reference >= day {
        return Err(Error::InvalidConfig(format!(
            "reference day {reference} must precede {day}"
        )));
    }
    let records = slices
        .get(&day)
        .ok_or_else(|| Error::InvalidConfig(format!("day {day} outside the slices")))?;
    let earlier: HashSet<&str> = slices
        .range(..=reference)
        .flat_map(|(_, rs)| rs.iter().map(|r| r.actor.as_str()))
        .collect();
    let mut posts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records
        .iter()
        .filter(|r| categories.get(&r.actor) == category)
    {
        *posts.entry(r.actor.as_str()).or_insert(0) += 1;
    }
    let n_bins = posts.values().map(|&n| log2_bin(n) + 1).max().unwrap_or(0);
    let mut h = ActivityHistogram {
        category,
        day,
        reference,
        persisting: vec![0; n_bins],
        new: vec![0; n_bins],
        persisting_posts: 0,
        new_posts: 0,
    };
    for (user, n) in posts {
        if earlier.contains(user) {
            h.persisting[log2_bin(n)] += 1;
            h.persisting_posts += n;
        } else {
            h.new[log2_bin(n)] += 1;
            h.new_posts += n;
        }
    }
    Ok(h)
}

impl ActivityHistogram {
    pub fn persisting_users(&self) -> usize {
        self.persisting.iter().sum()
    }

    pub fn new_users(&self) -> usize {
        self.new.iter().sum()
    }

    /// One row per bin plus a closing row with mean posts per user.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(&["bin_low", "bin_high", "persisting", "new"]);
        for i in 0..self.persisting.len() {
            t.push(vec![
                (1usize << i).to_string(),
                ((1usize << (i + 1)) - 1).to_string(),
                self.persisting[i].to_string(),
                self.new[i].to_string(),
            ]);
        }
        t.push(vec![
            "mean".into(),
            String::new(),
            ratio(self.persisting_posts, self.persisting_users()),
            ratio(self.new_posts, self.new_users()),
        ]);
        t
    }
}
