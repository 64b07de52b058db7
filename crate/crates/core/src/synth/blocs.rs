use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::SynthOutput;
use crate::error::Result;
use crate::graph::BipartiteGraph;
use crate::ingest::{InteractionKind, InteractionRecord, UserProfile};
use crate::report::Table;

pub const BLOC_USERS: usize = 50;
pub const BLOC_TAGS: usize = 30;
pub const BLOC_DENSITY: f64 = 0.5;
pub const CROSS_DENSITY: f64 = 0.02;

const BASE_TS: i64 = 1_575_158_400; // 2019-12-01T00:00:00Z

fn retweet(actor: &str, target: &str, ts: i64, hashtags: Vec<String>) -> InteractionRecord {
    InteractionRecord {
        actor: actor.into(),
        target: Some(target.into()),
        kind: InteractionKind::Retweet,
        ts,
        hashtags,
        urls: vec![],
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlocParams {
    pub users: usize,
    pub tags: usize,
    pub density: f64,
    pub cross_density: f64,
}

impl Default for BlocParams {
    fn default() -> Self {
        Self {
            users: BLOC_USERS,
            tags: BLOC_TAGS,
            density: BLOC_DENSITY,
            cross_density: CROSS_DENSITY,
        }
    }
}

/// Users by hashtags with two planted blocs.
#[derive(Debug, Clone)]
pub struct TwoBloc {
    pub graph: BipartiteGraph,
    /// Bloc of each row (user) of `graph`.
    pub row_bloc: Vec<usize>,
    /// Bloc of each column (hashtag) of `graph`.
    pub col_bloc: Vec<usize>,
    pub params: BlocParams,
}

/// Two blocs of 50 users and 30 hashtags; links inside a bloc with
/// probability 0.5, across blocs with probability 0.02.
pub fn two_bloc(seed: u64) -> Result<TwoBloc> {
    two_bloc_with(&BlocParams::default(), seed)
}

pub fn two_bloc_with(p: &BlocParams, seed: u64) -> Result<TwoBloc> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let users: Vec<String> = (0..2 * p.users).map(|i| format!("user{i}")).collect();
    let tags: Vec<String> = (0..2 * p.tags).map(|j| format!("tag{j}")).collect();
    let mut links = Vec::new();
    for u in 0..users.len() {
        for t in 0..tags.len() {
            let prob = if u / p.users == t / p.tags {
                p.density
            } else {
                p.cross_density
            };
            if rng.gen_bool(prob) {
                links.push((u, t));
            }
        }
    }
    let graph = BipartiteGraph::from_links(&users, &tags, &links)?;
    let bloc_of = |id: &str, n: usize| {
        id.trim_start_matches(|c: char| c.is_alphabetic())
            .parse::<usize>()
            .unwrap()
            / n
    };
    let row_bloc = graph
        .row_ids()
        .iter()
        .map(|id| bloc_of(id, p.users))
        .collect();
    let col_bloc = graph
        .col_ids()
        .iter()
        .map(|id| bloc_of(id, p.tags))
        .collect();
    Ok(TwoBloc {
        graph,
        row_bloc,
        col_bloc,
        params: *p,
    })
}

impl TwoBloc {
    /// Each link becomes one retweet by a bot of a post carrying the hashtag.
    pub fn into_output(self, seed: u64) -> SynthOutput {
        let g = &self.graph;
        let mut records = Vec::new();
        for (r, c) in g.links() {
            let source = format!("source{}", self.col_bloc[c]);
            records.push(retweet(
                &g.row_ids()[r],
                &source,
                BASE_TS + records.len() as i64,
                vec![g.col_ids()[c].clone()],
            ));
        }
        let mut profiles: Vec<UserProfile> = g
            .row_ids()
            .iter()
            .map(|id| UserProfile {
                id: id.clone(),
                verified: false,
                suspended: false,
                cap: Some(0.9),
            })
            .collect();
        profiles.extend((0..2).map(|b| UserProfile {
            id: format!("source{b}"),
            verified: true,
            suspended: false,
            cap: None,
        }));
        let mut truth = Table::new(&["id", "layer", "bloc"]);
        for (id, b) in g.row_ids().iter().zip(&self.row_bloc) {
            truth.push(vec![id.clone(), "rows".into(), b.to_string()]);
        }
        for (id, b) in g.col_ids().iter().zip(&self.col_bloc) {
            truth.push(vec![id.clone(), "columns".into(), b.to_string()]);
        }
        let edges = g
            .links()
            .map(|(r, c)| format!("{}\t{}", g.row_ids()[r], g.col_ids()[c]))
            .collect();
        SynthOutput {
            records,
            profiles,
            truth: vec![("blocs".into(), truth)],
            extra: vec![("edges.tsv".into(), edges)],
            manifest: json!({
                "scenario": "two-bloc",
                "seed": seed,
                "bloc_users": self.params.users,
                "bloc_tags": self.params.tags,
                "density": self.params.density,
                "cross_density": self.params.cross_density,
                "links": g.n_links(),
            }),
            report_config: json!({
                "interactions": "interactions.jsonl",
                "profiles": "profiles.jsonl",
                "entity": "hashtag",
                "k": 10,
            }),
        }
    }
}

pub const CAMP_VERIFIED: usize = 5;
pub const CAMP_UNVERIFIED: usize = 100;
const CAMP_DENSITY: f64 = 0.6;

/// Two camps of verified and unverified users; unverified users retweet
/// only verified users of their own camp.
#[derive(Debug, Clone)]
pub struct Camps {
    pub records: Vec<InteractionRecord>,
    pub profiles: Vec<UserProfile>,
    pub camp: BTreeMap<String, usize>,
}

pub fn camps(seed: u64) -> Camps {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Camps {
        records: Vec::new(),
        profiles: Vec::new(),
        camp: BTreeMap::new(),
    };
    for a in 0..2 {
        let verified: Vec<String> = (0..CAMP_VERIFIED)
            .map(|i| format!("camp{a}-v{i}"))
            .collect();
        for v in &verified {
            out.camp.insert(v.clone(), a);
            out.profiles.push(UserProfile {
                id: v.clone(),
                verified: true,
                suspended: false,
                cap: None,
            });
        }
        for i in 0..CAMP_UNVERIFIED {
            let u = format!("camp{a}-u{i}");
            out.camp.insert(u.clone(), a);
            out.profiles.push(UserProfile {
                id: u.clone(),
                verified: false,
                suspended: false,
                cap: Some(rng.gen_range(0.0..1.0)),
            });
            let mut any = false;
            for v in &verified {
                if rng.gen_bool(CAMP_DENSITY) {
                    out.records
                        .push(retweet(&u, v, BASE_TS + out.records.len() as i64, vec![]));
                    any = true;
                }
            }
            if !any {
                let v = &verified[rng.gen_range(0..verified.len())];
                out.records
                    .push(retweet(&u, v, BASE_TS + out.records.len() as i64, vec![]));
            }
            // Retweets among unverified users play no part in the pipeline.
            if rng.gen_bool(0.2) {
                let w = format!("camp{}-u{}", 1 - a, rng.gen_range(0..CAMP_UNVERIFIED));
                out.records
                    .push(retweet(&u, &w, BASE_TS + out.records.len() as i64, vec![]));
            }
        }
    }
    out
}

impl Camps {
    pub fn into_output(self, seed: u64) -> SynthOutput {
        let mut truth = Table::new(&["id", "camp"]);
        for (id, c) in &self.camp {
            truth.push(vec![id.clone(), c.to_string()]);
        }
        SynthOutput {
            records: self.records,
            profiles: self.profiles,
            truth: vec![("camps".into(), truth)],
            extra: Vec::new(),
            manifest: json!({
                "scenario": "camps",
                "seed": seed,
                "verified_per_camp": CAMP_VERIFIED,
                "unverified_per_camp": CAMP_UNVERIFIED,
            }),
            report_config: json!({
                "interactions": "interactions.jsonl",
                "profiles": "profiles.jsonl",
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_bloc_densities() {
        let tb = two_bloc(1).unwrap();
        let g = &tb.graph;
        let (mut inside, mut across) = (0, 0);
        for (r, c) in g.links() {
            if tb.row_bloc[r] == tb.col_bloc[c] {
                inside += 1;
            } else {
                across += 1;
            }
        }
        let cells = (2 * BLOC_USERS * BLOC_TAGS) as f64;
        assert!((inside as f64 / cells - BLOC_DENSITY).abs() < 0.03);
        assert!((across as f64 / cells - CROSS_DENSITY).abs() < 0.01);
    }

    #[test]
    fn camps_never_cross_to_verified() {
        let c = camps(4);
        for r in &c.records {
            let t = r.target.as_deref().unwrap();
            if t.contains("-v") {
                assert_eq!(c.camp[&r.actor], c.camp[t]);
            }
        }
    }
}
