//! Interaction logs, user profiles, categories and daily slicing.
//!
//! Both input formats are JSON lines, optionally preceded by a `#fmt=1`
//! header. Other lines starting with `#` are comments.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT_HEADER: &str = "#fmt=1";

/// CAP score at or above which an unverified, unsuspended user is a bot.
pub const DEFAULT_CAP_THRESHOLD: f64 = 0.43;

/// Share of malformed lines above which a whole file is rejected.
pub const MAX_MALFORMED_FRACTION: f64 = 0.10;

// Timestamps are kept within a range where day arithmetic cannot overflow.
const MAX_ABS_TS: i64 = 100_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionKind {
    Original,
    Retweet,
    Quote,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InteractionRecord {
    pub actor: String,
    /// Author of the retweeted or quoted post; `None` for originals.
    pub target: Option<String>,
    pub kind: InteractionKind,
    /// Seconds since the Unix epoch, UTC.
    pub ts: i64,
    /// Lowercase, without the leading `#`.
    pub hashtags: Vec<String>,
    /// Lowercase host names without a leading `www.`.
    pub urls: Vec<String>,
}

#[derive(Deserialize)]
struct RawRecord {
    actor: String,
    #[serde(default)]
    target: Option<String>,
    kind: InteractionKind,
    ts: i64,
    #[serde(default)]
    hashtags: Vec<String>,
    #[serde(default)]
    urls: Vec<String>,
}

pub fn normalize_hashtag(tag: &str) -> Option<String> {
    let t = tag.trim().trim_start_matches('#');
    (!t.is_empty()).then(|| t.to_lowercase())
}

/// Reduces a URL to its host, lowercased and without `www.`. Bare hosts
/// such as `example.org/path` are accepted.
pub fn normalize_url(raw: &str) -> Option<String> {
    let raw = raw.trim();
    let parsed = if raw.contains("://") {
        url::Url::parse(raw).ok()?
    } else {
        url::Url::parse(&format!("http://{raw}")).ok()?
    };
    let host = parsed.host_str()?.to_lowercase();
    let host = host
        .strip_prefix("www.")
        .unwrap_or(&host)
        .trim_end_matches('.');
    (!host.is_empty()).then(|| host.to_string())
}

impl InteractionRecord {
    fn from_raw(raw: RawRecord) -> std::result::Result<Self, String> {
        if raw.actor.is_empty() {
            return Err("empty actor".into());
        }
        let target = raw.target.filter(|t| !t.is_empty());
        match (raw.kind, &target) {
            (InteractionKind::Original, Some(_)) => {
                return Err("original post with a target".into())
            }
            (InteractionKind::Retweet | InteractionKind::Quote, None) => {
                return Err("missing target".into())
            }
            _ => {}
        }
        if raw.ts.abs() > MAX_ABS_TS {
            return Err(format!("timestamp {} out of range", raw.ts));
        }
        let mut hashtags: Vec<String> = raw
            .hashtags
            .iter()
            .filter_map(|h| normalize_hashtag(h))
            .collect();
        let mut urls: Vec<String> = raw.urls.iter().filter_map(|u| normalize_url(u)).collect();
        dedup_keep_order(&mut hashtags);
        dedup_keep_order(&mut urls);
        Ok(Self {
            actor: raw.actor,
            target,
            kind: raw.kind,
            ts: raw.ts,
            hashtags,
            urls,
        })
    }

    pub fn is_retweet(&self) -> bool {
        self.kind == InteractionKind::Retweet
    }
}

fn dedup_keep_order(v: &mut Vec<String>) {
    let mut seen = HashSet::new();
    v.retain(|s| seen.insert(s.clone()));
}

/// Parsed contents of a JSON-lines file with malformed-line bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub items: Vec<T>,
    /// Data lines seen (headers, comments and blank lines excluded).
    pub total: usize,
    pub malformed: usize,
}

fn parse_lines<R, T, F>(reader: R, mut parse: F) -> Result<Parsed<T>>
where
    R: BufRead,
    F: FnMut(&str) -> std::result::Result<T, String>,
{
    let mut items = Vec::new();
    let (mut total, mut malformed) = (0, 0);
    let mut first = true;
    for line in reader.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if first {
            first = false;
            if let Some(version) = line.strip_prefix("#fmt=") {
                if version.trim() != "1" {
                    return Err(Error::UnsupportedFormat(line.to_string()));
                }
                continue;
            }
        }
        if line.starts_with('#') {
            continue;
        }
        total += 1;
        match parse(line) {
            Ok(item) => items.push(item),
            Err(_) => malformed += 1,
        }
    }
    if malformed as f64 > MAX_MALFORMED_FRACTION * total as f64 {
        return Err(Error::CorruptInput { malformed, total });
    }
    Ok(Parsed {
        items,
        total,
        malformed,
    })
}

/// Reads an interaction log. Malformed lines are skipped and counted; the
/// records come back sorted by timestamp (stable for equal timestamps).
pub fn parse_interactions<R: BufRead>(reader: R) -> Result<Parsed<InteractionRecord>> {
    let mut parsed = parse_lines(reader, |line| {
        let raw: RawRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
        InteractionRecord::from_raw(raw)
    })?;
    parsed.items.sort_by_key(|r| r.ts);
    Ok(parsed)
}

pub fn read_interactions(path: impl AsRef<Path>) -> Result<Parsed<InteractionRecord>> {
    parse_interactions(BufReader::new(File::open(path)?))
}

pub fn write_interactions<W: Write>(mut w: W, records: &[InteractionRecord]) -> Result<()> {
    writeln!(w, "{FORMAT_HEADER}")?;
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserProfile {
    pub id: String,
    #[serde(default)]
    pub verified: bool,
    #[serde(default)]
    pub suspended: bool,
    /// Complete Automation Probability, when one could be retrieved.
    #[serde(default)]
    pub cap: Option<f64>,
}

/// Reads a profile file. Lines with an out-of-range score or a repeated id
/// count as malformed.
pub fn parse_profiles<R: BufRead>(reader: R) -> Result<Parsed<UserProfile>> {
    let mut seen = HashSet::new();
    parse_lines(reader, |line| {
        let p: UserProfile = serde_json::from_str(line).map_err(|e| e.to_string())?;
        if p.id.is_empty() {
            return Err("empty id".into());
        }
        if let Some(c) = p.cap {
            if !(0.0..=1.0).contains(&c) {
                return Err(format!("score {c} outside [0, 1]"));
            }
        }
        if !seen.insert(p.id.clone()) {
            return Err(format!("duplicate id {}", p.id));
        }
        Ok(p)
    })
}

pub fn read_profiles(path: impl AsRef<Path>) -> Result<Parsed<UserProfile>> {
    parse_profiles(BufReader::new(File::open(path)?))
}

pub fn write_profiles<W: Write>(mut w: W, profiles: &[UserProfile]) -> Result<()> {
    writeln!(w, "{FORMAT_HEADER}")?;
    for p in profiles {
        serde_json::to_writer(&mut w, p)?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// User category. The declaration order is the table order used in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Suspended,
    Bot,
    Genuine,
    Verified,
}

impl Category {
    pub const ALL: [Category; 4] = [
        Category::Suspended,
        Category::Bot,
        Category::Genuine,
        Category::Verified,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Suspended => "suspended",
            Category::Bot => "bot",
            Category::Genuine => "genuine",
            Category::Verified => "verified",
        }
    }

    /// Row label in cross-category tables.
    pub fn label(self) -> &'static str {
        match self {
            Category::Suspended => "Suspended",
            Category::Bot => "Bots",
            Category::Genuine => "Non-bots",
            Category::Verified => "Verified",
        }
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown category `{s}`")))
    }
}

/// Verified beats suspended beats bot; a user without a score is genuine.
pub fn categorize_user(p: &UserProfile, cap_threshold: f64) -> Category {
    if p.verified {
        Category::Verified
    } else if p.suspended {
        Category::Suspended
    } else if p.cap.is_some_and(|c| c >= cap_threshold) {
        Category::Bot
    } else {
        Category::Genuine
    }
}

/// Score threshold labelling the top `percentile` percent of `scores`.
///
/// Nearest rank on the descending order: with `k = floor(p N / 100)` the
/// threshold is the `k`-th largest score, lowered to the next distinct value
/// above it when ties would push more than `k` scores over. When no score can
/// qualify the result lies just above the maximum.
pub fn percentile_threshold(scores: &[f64], percentile: f64) -> Result<f64> {
    if !(percentile > 0.0 && percentile < 100.0) {
        return Err(Error::InvalidConfig(format!(
            "percentile must lie in (0, 100), got {percentile}"
        )));
    }
    if scores.is_empty() {
        return Err(Error::EmptySample);
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidConfig("NaN score".into()));
    }
    let mut desc = scores.to_vec();
    desc.sort_by(|a, b| b.total_cmp(a));
    let n = desc.len();
    let k = ((percentile * n as f64 / 100.0) + 1e-9).floor() as usize;
    let none = desc[0].next_up();
    if k == 0 {
        return Ok(none);
    }
    let t = desc[k - 1];
    if k < n && desc[k] == t {
        let first = desc.iter().position(|&s| s == t).expect("t is in desc");
        return Ok(if first == 0 { none } else { desc[first - 1] });
    }
    Ok(t)
}

/// How bots are told apart from genuine users.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapRule {
    Threshold(f64),
    /// Top percentile of scored, unverified, unsuspended users.
    Percentile(f64),
}

impl Default for CapRule {
    fn default() -> Self {
        CapRule::Threshold(DEFAULT_CAP_THRESHOLD)
    }
}

impl CapRule {
    /// Resolves the rule to a threshold for these profiles.
    pub fn threshold(&self, profiles: &[UserProfile]) -> Result<f64> {
        match *self {
            CapRule::Threshold(t) => {
                if !(t > 0.0 && t < 1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "CAP threshold must lie in (0, 1), got {t}"
                    )));
                }
                Ok(t)
            }
            CapRule::Percentile(p) => {
                let scores: Vec<f64> = profiles
                    .iter()
                    .filter(|u| !u.verified && !u.suspended)
                    .filter_map(|u| u.cap)
                    .collect();
                percentile_threshold(&scores, p)
            }
        }
    }
}

/// Category of every known user; unknown users count as genuine.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Categories {
    map: HashMap<String, Category>,
    pub cap_threshold: f64,
}

impl Categories {
    pub fn from_profiles(profiles: &[UserProfile], rule: CapRule) -> Result<Self> {
        let t = rule.threshold(profiles)?;
        let map = profiles
            .iter()
            .map(|p| (p.id.clone(), categorize_user(p, t)))
            .collect();
        Ok(Self {
            map,
            cap_threshold: t,
        })
    }

    pub fn from_map(map: HashMap<String, Category>) -> Self {
        Self {
            map,
            cap_threshold: DEFAULT_CAP_THRESHOLD,
        }
    }

    pub fn get(&self, id: &str) -> Category {
        self.map.get(id).copied().unwrap_or(Category::Genuine)
    }

    pub fn known(&self) -> impl Iterator<Item = (&str, Category)> {
        self.map.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Number of known users per category, in table order.
    pub fn counts(&self) -> [usize; 4] {
        let mut c = [0; 4];
        for v in self.map.values() {
            c[v.index()] += 1;
        }
        c
    }
}

/// Calendar day of a timestamp after shifting by `offset_secs`.
pub fn day_of(ts: i64, offset_secs: i32) -> NaiveDate {
    let shifted = ts.clamp(-MAX_ABS_TS, MAX_ABS_TS) + offset_secs as i64;
    DateTime::from_timestamp(shifted, 0)
        .expect("clamped timestamp is representable")
        .date_naive()
}

/// Groups records by calendar day. Every day from the earliest to the latest
/// of the window bounds and record days is present, empty or not, so the
/// slices always cover the input exactly.
pub fn daily_slices(
    records: &[InteractionRecord],
    offset_secs: i32,
    window: Option<(NaiveDate, NaiveDate)>,
) -> BTreeMap<NaiveDate, Vec<InteractionRecord>> {
    let mut days: BTreeMap<NaiveDate, Vec<InteractionRecord>> = BTreeMap::new();
    for r in records {
        days.entry(day_of(r.ts, offset_secs))
            .or_default()
            .push(r.clone());
    }
    let first = days
        .keys()
        .next()
        .copied()
        .into_iter()
        .chain(window.map(|w| w.0))
        .min();
    let last = days
        .keys()
        .next_back()
        .copied()
        .into_iter()
        .chain(window.map(|w| w.1))
        .max();
    if let (Some(mut d), Some(last)) = (first, last) {
        while d <= last {
            days.entry(d).or_default();
            d = d.succ_opt().expect("date in range");
        }
    }
    days
}
