use std::collections::{BTreeMap, HashMap};

use chrono::{NaiveDate, NaiveTime};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::SynthOutput;
use crate::ingest::{
    Category, InteractionKind, InteractionRecord, UserProfile, DEFAULT_CAP_THRESHOLD,
};
use crate::report::{
    log2_bin, ActivityHistogram, CrossCategoryMatrix, DayPresence, PresenceSeries,
};

#[derive(Debug, Clone, PartialEq)]
pub struct InjectionParams {
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// First day with injected bots.
    pub injection: NaiveDate,
    /// Last day with injected bots; suspended users rise the day after.
    pub election: NaiveDate,
    pub daily_users: usize,
    pub bots_base: usize,
    /// Bots per day between `injection` and `election`, old ones included.
    pub bots_injected: usize,
    pub suspended_before: usize,
    pub suspended_after: usize,
    pub verified_daily: usize,
    pub old_bot_pool: usize,
    pub suspended_pool: usize,
    pub verified_pool: usize,
    pub genuine_pool: usize,
    /// Day and reference day of the bot activity histogram.
    pub activity_day: NaiveDate,
    pub activity_reference: NaiveDate,
}

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid date")
}

impl Default for InjectionParams {
    fn default() -> Self {
        Self {
            start: date(2019, 11, 20),
            end: date(2019, 12, 23),
            injection: date(2019, 12, 6),
            election: date(2019, 12, 12),
            daily_users: 100,
            bots_base: 2,
            bots_injected: 11,
            suspended_before: 6,
            suspended_after: 9,
            verified_daily: 3,
            old_bot_pool: 4,
            suspended_pool: 30,
            verified_pool: 10,
            genuine_pool: 400,
            activity_day: date(2019, 12, 11),
            activity_reference: date(2019, 12, 5),
        }
    }
}

const TAGS: [&str; 12] = [
    "Brexit",
    "GE2019",
    "GetBrexitDone",
    "StopBrexit",
    "Labour",
    "Tories",
    "NHS",
    "VoteLabour",
    "BackBoris",
    "FinalSay",
    "PeoplesVote",
    "Scotland",
];
const DOMAINS: [&str; 6] = [
    "bbc.co.uk",
    "theguardian.com",
    "telegraph.co.uk",
    "youtube.com",
    "express.co.uk",
    "twitter.com",
];

// Share of retweet and quote targets by category, for every actor.
const TARGET_WEIGHTS: [u32; 4] = [4, 2, 50, 44];

struct Pools {
    old_bots: Vec<String>,
    suspended: Vec<String>,
    verified: Vec<String>,
    genuine: Vec<String>,
}

impl Pools {
    fn of(&self, c: Category) -> &[String] {
        match c {
            Category::Suspended => &self.suspended,
            Category::Bot => &self.old_bots,
            Category::Genuine => &self.genuine,
            Category::Verified => &self.verified,
        }
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &'a [String], n: usize) -> Vec<&'a String> {
    let mut idx = index::sample(rng, pool.len(), n).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| &pool[i]).collect()
}

fn decorate_tag(rng: &mut ChaCha8Rng, t: &str) -> String {
    match rng.gen_range(0..3) {
        0 => format!("#{t}"),
        1 => t.to_uppercase(),
        _ => t.to_string(),
    }
}

fn decorate_url(rng: &mut ChaCha8Rng, d: &str) -> String {
    match rng.gen_range(0..3) {
        0 => format!("https://www.{d}/news/{}", rng.gen_range(0..1000)),
        1 => format!("http://{}/a", d.to_uppercase()),
        _ => d.to_string(),
    }
}

/// Generates the scenario. All tallies in the ground truth come from the
/// generator's own bookkeeping, not from re-reading its output.
pub fn injection(p: &InjectionParams, seed: u64) -> SynthOutput {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids = |prefix: &str, n: usize| (0..n).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>();
    let pools = Pools {
        old_bots: ids("bot", p.old_bot_pool),
        suspended: ids("sus", p.suspended_pool),
        verified: ids("ver", p.verified_pool),
        genuine: ids("usr", p.genuine_pool),
    };
    let mut category: HashMap<String, Category> = HashMap::new();
    for c in Category::ALL {
        for id in pools.of(c) {
            category.insert(id.clone(), c);
        }
    }

    let mut records = Vec::new();
    let mut days = Vec::new();
    let mut matrix = CrossCategoryMatrix::default();
    let mut first_day: HashMap<String, NaiveDate> = HashMap::new();
    let mut new_bots = Vec::new();
    let mut activity_posts: BTreeMap<String, usize> = BTreeMap::new();

    let mut day = p.start;
    while day <= p.end {
        let injected = day >= p.injection && day <= p.election;
        let n_bots = if injected {
            p.bots_injected
        } else {
            p.bots_base
        };
        let n_old_bots = p.bots_base.min(n_bots);
        let n_sus = if day > p.election {
            p.suspended_after
        } else {
            p.suspended_before
        };
        let n_gen = p.daily_users - n_bots - n_sus - p.verified_daily;

        // (id, category, posts, posts only retweets)
        let mut active: Vec<(String, Category, usize, bool)> = Vec::new();
        for id in pick(&mut rng, &pools.old_bots, n_old_bots) {
            active.push((id.clone(), Category::Bot, rng.gen_range(3..=7), false));
        }
        for i in 0..n_bots - n_old_bots {
            let id = format!("newbot-{}-{i}", day.format("%m%d"));
            category.insert(id.clone(), Category::Bot);
            new_bots.push(id.clone());
            active.push((id, Category::Bot, 1, true));
        }
        for id in pick(&mut rng, &pools.suspended, n_sus) {
            active.push((id.clone(), Category::Suspended, rng.gen_range(4..=9), false));
        }
        for id in pick(&mut rng, &pools.verified, p.verified_daily) {
            active.push((id.clone(), Category::Verified, rng.gen_range(1..=3), false));
        }
        for id in pick(&mut rng, &pools.genuine, n_gen) {
            active.push((id.clone(), Category::Genuine, rng.gen_range(1..=4), false));
        }

        let mut tally = DayPresence {
            date: day,
            tweets: 0,
            users: active.len(),
            users_by_category: [0; 4],
            new_users: 0,
            new_by_category: [0; 4],
            posts_by_category: [0; 4],
        };
        let day_start = day.and_time(NaiveTime::MIN).and_utc().timestamp();
        for (id, cat, posts, retweets_only) in &active {
            let c = cat.index();
            tally.users_by_category[c] += 1;
            tally.posts_by_category[c] += posts;
            tally.tweets += posts;
            if !first_day.contains_key(id) {
                first_day.insert(id.clone(), day);
                tally.new_users += 1;
                tally.new_by_category[c] += 1;
            }
            if day == p.activity_day && *cat == Category::Bot {
                activity_posts.insert(id.clone(), *posts);
            }
            for _ in 0..*posts {
                let roll = rng.gen_range(0..100);
                let kind = if *retweets_only {
                    InteractionKind::Retweet
                } else if *cat == Category::Verified {
                    [
                        InteractionKind::Original,
                        InteractionKind::Retweet,
                        InteractionKind::Quote,
                    ][(roll >= 70) as usize + (roll >= 90) as usize]
                } else {
                    [
                        InteractionKind::Retweet,
                        InteractionKind::Quote,
                        InteractionKind::Original,
                    ][(roll >= 60) as usize + (roll >= 75) as usize]
                };
                let target = (kind != InteractionKind::Original).then(|| {
                    let total: u32 = TARGET_WEIGHTS.iter().sum();
                    let mut r = rng.gen_range(0..total);
                    let tc = Category::ALL[TARGET_WEIGHTS
                        .iter()
                        .position(|&w| {
                            if r < w {
                                true
                            } else {
                                r -= w;
                                false
                            }
                        })
                        .unwrap()];
                    let t = loop {
                        let t = pools.of(tc).choose(&mut rng).unwrap();
                        if t != id {
                            break t.clone();
                        }
                    };
                    match kind {
                        InteractionKind::Retweet => matrix.retweets[c][tc.index()] += 1,
                        _ => matrix.quotes[c][tc.index()] += 1,
                    }
                    t
                });
                let n_tags = rng.gen_range(0..=2);
                let hashtags = (0..n_tags)
                    .map(|_| {
                        let tag = *TAGS.choose(&mut rng).unwrap();
                        decorate_tag(&mut rng, tag)
                    })
                    .collect::<Vec<_>>();
                let urls = if rng.gen_bool(0.2) {
                    let domain = *DOMAINS.choose(&mut rng).unwrap();
                    vec![decorate_url(&mut rng, domain)]
                } else {
                    vec![]
                };
                records.push(InteractionRecord {
                    actor: id.clone(),
                    target,
                    kind,
                    ts: day_start + rng.gen_range(0..86_400),
                    hashtags,
                    urls,
                });
            }
        }
        days.push(tally);
        day = day.succ_opt().expect("date in range");
    }
    records.sort_by_key(|r| r.ts);

    let mut hist = ActivityHistogram {
        category: Category::Bot,
        day: p.activity_day,
        reference: p.activity_reference,
        persisting: Vec::new(),
        new: Vec::new(),
        persisting_posts: 0,
        new_posts: 0,
    };
    let n_bins = activity_posts
        .values()
        .map(|&n| log2_bin(n) + 1)
        .max()
        .unwrap_or(0);
    hist.persisting = vec![0; n_bins];
    hist.new = vec![0; n_bins];
    for (id, &n) in &activity_posts {
        if first_day[id] <= p.activity_reference {
            hist.persisting[log2_bin(n)] += 1;
            hist.persisting_posts += n;
        } else {
            hist.new[log2_bin(n)] += 1;
            hist.new_posts += n;
        }
    }

    let mut profiles: Vec<UserProfile> = Vec::new();
    let mut all_ids: Vec<&String> = category.keys().collect();
    all_ids.sort();
    for id in all_ids {
        let c = category[id];
        let cap = match c {
            Category::Bot => Some(rng.gen_range(DEFAULT_CAP_THRESHOLD..1.0)),
            Category::Genuine => rng
                .gen_bool(0.7)
                .then(|| rng.gen_range(0.0..DEFAULT_CAP_THRESHOLD)),
            Category::Suspended => rng.gen_bool(0.3).then(|| rng.gen_range(0.0..1.0)),
            Category::Verified => Some(rng.gen_range(0.0..1.0)),
        };
        profiles.push(UserProfile {
            id: id.clone(),
            verified: c == Category::Verified,
            suspended: c == Category::Suspended,
            cap,
        });
    }

    let manifest = json!({
        "scenario": "injection",
        "seed": seed,
        "window": [p.start.to_string(), p.end.to_string()],
        "injection_date": p.injection.to_string(),
        "election_date": p.election.to_string(),
        "daily_users": p.daily_users,
        "new_bots": new_bots.len(),
        "records": records.len(),
        "cap_threshold": DEFAULT_CAP_THRESHOLD,
    });
    let report_config = json!({
        "interactions": "interactions.jsonl",
        "profiles": "profiles.jsonl",
        "window": [p.start.to_string(), p.end.to_string()],
        "activity": {
            "category": "bot",
            "day": p.activity_day.to_string(),
            "reference": p.activity_reference.to_string(),
        },
    });
    SynthOutput {
        records,
        profiles,
        truth: vec![
            ("presence".into(), PresenceSeries { days }.to_table()),
            ("crosstab".into(), matrix.to_table()),
            ("activity".into(), hist.to_table()),
        ],
        extra: Vec::new(),
        manifest,
        report_config,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_shares() {
        let out = injection(&InjectionParams::default(), 3);
        let t = out.truth_table("presence").unwrap();
        let col = t.header.iter().position(|h| h == "bot_pct").unwrap();
        let sus = t.header.iter().position(|h| h == "suspended_pct").unwrap();
        let row = |d: &str| t.rows.iter().find(|r| r[0] == d).unwrap();
        assert_eq!(row("2019-12-05")[col], "2.00");
        assert_eq!(row("2019-12-06")[col], "11.00");
        assert_eq!(row("2019-12-12")[sus], "6.00");
        assert_eq!(row("2019-12-13")[sus], "9.00");
        assert_eq!(t.rows.len(), 34);
    }

    #[test]
    fn seeded() {
        let a = injection(&InjectionParams::default(), 5);
        let b = injection(&InjectionParams::default(), 5);
        assert_eq!(a.records, b.records);
        assert_eq!(a.profiles, b.profiles);
        assert_ne!(a.records, injection(&InjectionParams::default(), 6).records);
    }
}
