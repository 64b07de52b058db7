use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::SynthOutput;
use crate::ingest::{
    Category, InteractionKind, InteractionRecord, UserProfile, DEFAULT_CAP_THRESHOLD,
};
use crate::report::{CommunityComposition, CommunityRow, TOP_VERIFIED};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupSizes {
    pub verified: usize,
    pub genuine: usize,
    pub bots: usize,
    /// Bots sharing the group's hashtag set; zero or at least two.
    pub coordinated_bots: usize,
    pub suspended: usize,
    pub coordinated_suspended: usize,
}

const fn group(genuine: usize, bots: usize, cb: usize, suspended: usize, cs: usize) -> GroupSizes {
    GroupSizes {
        verified: 4,
        genuine,
        bots,
        coordinated_bots: cb,
        suspended,
        coordinated_suspended: cs,
    }
}

/// Planted groups. Sizes are distinct so the table order is fixed.
pub const GROUPS: [GroupSizes; 8] = [
    group(120, 6, 2, 5, 0),
    group(100, 12, 6, 14, 7),
    group(80, 4, 0, 3, 0),
    group(70, 9, 3, 6, 2),
    group(60, 3, 2, 2, 0),
    group(50, 7, 4, 11, 5),
    group(40, 0, 0, 1, 0),
    group(30, 5, 2, 4, 2),
];

const COORDINATION_TAGS: usize = 8;
const RETWEET_DENSITY: f64 = 0.7;
const BASE_TS: i64 = 1_576_022_400; // 2019-12-11T00:00:00Z

/// Eight discursive groups: unverified members retweet only their own
/// group's verified users, and coordinated bots or suspended users of a group
/// all retweet posts carrying the same hashtags.
pub fn coordination(seed: u64) -> SynthOutput {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records: Vec<InteractionRecord> = Vec::new();
    let mut profiles: Vec<UserProfile> = Vec::new();
    let mut rows = Vec::new();
    let push =
        |records: &mut Vec<InteractionRecord>, actor: &str, target: &str, hashtags: Vec<String>| {
            let ts = BASE_TS + records.len() as i64;
            records.push(InteractionRecord {
                actor: actor.into(),
                target: Some(target.into()),
                kind: InteractionKind::Retweet,
                ts,
                hashtags,
                urls: vec![],
            });
        };
    for (g, grp) in GROUPS.iter().enumerate() {
        let verified: Vec<String> = (0..grp.verified).map(|i| format!("g{g}-v{i}")).collect();
        let mut members: Vec<(String, Category, Vec<String>)> = Vec::new();
        for i in 0..grp.genuine {
            members.push((format!("g{g}-u{i}"), Category::Genuine, vec![]));
        }
        for (prefix, cat, n, coord, tag) in [
            ("b", Category::Bot, grp.bots, grp.coordinated_bots, "bx"),
            (
                "s",
                Category::Suspended,
                grp.suspended,
                grp.coordinated_suspended,
                "sx",
            ),
        ] {
            for i in 0..n {
                let id = format!("g{g}-{prefix}{i}");
                let tags = if i < coord {
                    (0..COORDINATION_TAGS)
                        .map(|k| format!("g{g}-{tag}{k}"))
                        .collect()
                } else {
                    vec![format!("solo-{id}")]
                };
                members.push((id, cat, tags));
            }
        }
        let mut links: BTreeSet<(usize, usize)> = BTreeSet::new();
        for (m, (id, cat, tags)) in members.iter().enumerate() {
            let mut any = false;
            for (v, vid) in verified.iter().enumerate() {
                if rng.gen_bool(RETWEET_DENSITY) {
                    push(&mut records, id, vid, vec![]);
                    links.insert((v, m));
                    any = true;
                }
            }
            if !any {
                let v = rng.gen_range(0..verified.len());
                push(&mut records, id, &verified[v], vec![]);
                links.insert((v, m));
            }
            if !tags.is_empty() {
                push(&mut records, id, &verified[0], tags.clone());
                links.insert((0, m));
            }
            let cap = match cat {
                Category::Bot => Some(rng.gen_range(DEFAULT_CAP_THRESHOLD..1.0)),
                Category::Genuine => Some(rng.gen_range(0.0..DEFAULT_CAP_THRESHOLD)),
                _ => None,
            };
            profiles.push(UserProfile {
                id: id.clone(),
                verified: false,
                suspended: *cat == Category::Suspended,
                cap,
            });
        }
        for vid in &verified {
            profiles.push(UserProfile {
                id: vid.clone(),
                verified: true,
                suspended: false,
                cap: None,
            });
        }

        let mut degree: BTreeMap<&str, usize> = verified.iter().map(|v| (v.as_str(), 0)).collect();
        for &(v, _) in &links {
            *degree.get_mut(verified[v].as_str()).unwrap() += 1;
        }
        let mut top: Vec<(usize, &str)> = degree.iter().map(|(&v, &d)| (d, v)).collect();
        top.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(b.1)));
        let mut by_category = [0; 4];
        by_category[Category::Verified.index()] = grp.verified;
        by_category[Category::Genuine.index()] = grp.genuine;
        by_category[Category::Bot.index()] = grp.bots;
        by_category[Category::Suspended.index()] = grp.suspended;
        rows.push(CommunityRow {
            label: g,
            size: grp.verified + members.len(),
            top_verified: top
                .into_iter()
                .take(TOP_VERIFIED)
                .map(|(_, v)| v.to_string())
                .collect(),
            by_category,
            validated_bots: grp.coordinated_bots,
            validated_suspended: grp.coordinated_suspended,
            internal_links: links.len(),
        });
    }
    rows.sort_by(|a, b| b.size.cmp(&a.size).then(a.label.cmp(&b.label)));
    SynthOutput {
        records,
        profiles,
        truth: vec![(
            "composition".into(),
            CommunityComposition { rows }.to_table(),
        )],
        extra: Vec::new(),
        manifest: json!({
            "scenario": "coordination",
            "seed": seed,
            "groups": GROUPS.len(),
            "note": "the community column of truth/composition.csv holds planted group indices",
        }),
        report_config: json!({
            "interactions": "interactions.jsonl",
            "profiles": "profiles.jsonl",
        }),
    }
}
