use std::path::{Path, PathBuf};

use backbone_core::community::DiscursiveConfig;
use backbone_core::ingest::{
    daily_slices, day_of, read_interactions, read_profiles, CapRule, Categories, Category,
    InteractionRecord,
};
use backbone_core::report::{
    activity_histogram, composition_report, crosstab_interactions, presence_series,
    retweeter_composition, top_entities, window_slices, write_report, EntityKind, ReportMeta,
    Table,
};
use backbone_core::Error;
use chrono::NaiveDate;
use clap::ValueEnum;
use serde::Deserialize;

use crate::{open, Global};

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Presence,
    Crosstab,
    Composition,
    Entities,
    Retweeters,
}

impl Kind {
    fn as_str(self) -> &'static str {
        match self {
            Kind::Presence => "presence",
            Kind::Crosstab => "crosstab",
            Kind::Composition => "composition",
            Kind::Entities => "entities",
            Kind::Retweeters => "retweeters",
        }
    }
}

const DEFAULT_TOP_K: usize = 10;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportConfig {
    interactions: PathBuf,
    profiles: PathBuf,
    /// Inclusive `[start, end]` day range.
    window: Option<(NaiveDate, NaiveDate)>,
    utc_offset: Option<String>,
    cap_threshold: Option<f64>,
    cap_percentile: Option<f64>,
    fdr_level: Option<f64>,
    seed: Option<u64>,
    louvain_restarts: Option<usize>,
    propagation_runs: Option<usize>,
    activity: Option<ActivityConfig>,
    entity: Option<String>,
    k: Option<usize>,
    accounts: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActivityConfig {
    category: String,
    day: NaiveDate,
    reference: NaiveDate,
}

fn load_config(path: &Path) -> anyhow::Result<ReportConfig> {
    let mut cfg: ReportConfig = serde_json::from_reader(open(path)?).map_err(Error::from)?;
    let base = path.parent().unwrap_or(Path::new(""));
    cfg.interactions = base.join(&cfg.interactions);
    cfg.profiles = base.join(&cfg.profiles);
    Ok(cfg)
}

pub fn run(kind: Kind, config: &Path, out_dir: &Path, global: &Global) -> anyhow::Result<()> {
    let cfg = load_config(config)?;
    let offset = global.offset_secs(cfg.utc_offset.as_deref())?;
    if let Some((a, b)) = cfg.window {
        if a > b {
            return Err(
                Error::InvalidConfig(format!("window start {a} is after its end {b}")).into(),
            );
        }
    }
    let interactions = read_interactions(&cfg.interactions)?;
    let profiles = read_profiles(&cfg.profiles)?;
    let rule = global.cap_rule(cfg.cap_threshold, cfg.cap_percentile);
    let threshold = rule.threshold(&profiles.items)?;
    let categories = Categories::from_profiles(&profiles.items, CapRule::Threshold(threshold))?;

    let mut meta = ReportMeta {
        kind: kind.as_str().into(),
        window: cfg.window,
        utc_offset_secs: offset,
        cap_threshold: Some(threshold),
        ..Default::default()
    };
    for (name, malformed) in [
        ("interactions", interactions.malformed),
        ("profiles", profiles.malformed),
    ] {
        if malformed > 0 {
            meta.warnings
                .push(format!("{malformed} malformed {name} lines skipped"));
        }
    }
    let in_window = |r: &&InteractionRecord| {
        cfg.window
            .is_none_or(|(a, b)| (a..=b).contains(&day_of(r.ts, offset)))
    };
    let records: Vec<InteractionRecord> = interactions
        .items
        .iter()
        .filter(in_window)
        .cloned()
        .collect();
    std::fs::create_dir_all(out_dir)?;
    let out = |name: &str| out_dir.join(format!("{name}.csv"));

    let table: Table = match kind {
        Kind::Presence => {
            let slices = match cfg.window {
                Some(w) => window_slices(&records, offset, w),
                None => daily_slices(&records, offset, None),
            };
            if let Some(a) = &cfg.activity {
                let category: Category = a.category.parse()?;
                let hist = activity_histogram(&slices, &categories, category, a.day, a.reference)?;
                let t = hist.to_table();
                let m = ReportMeta {
                    kind: "activity".into(),
                    rows: t.rows.len(),
                    ..meta.clone()
                };
                write_report(&out("activity"), &t, &m)?;
            }
            presence_series(&slices, &categories).to_table()
        }
        Kind::Crosstab => crosstab_interactions(&records, &categories).to_table(),
        Kind::Composition => {
            let mut dc = DiscursiveConfig {
                fdr_level: global.fdr_level(cfg.fdr_level),
                ..Default::default()
            };
            if let Some(s) = cfg.seed {
                dc.seed = s;
            }
            if let Some(r) = cfg.louvain_restarts {
                dc.louvain_restarts = r;
            }
            if let Some(r) = cfg.propagation_runs {
                dc.propagation_runs = r;
            }
            let rep = composition_report(&records, &profiles.items, &categories, &dc)?;
            meta.fdr_level = Some(dc.fdr_level);
            meta.seed = Some(dc.seed);
            meta.warnings.extend(rep.warnings);
            if rep.discursive.labels.unconverged_runs > 0 {
                meta.warnings.push(format!(
                    "{} of {} label-propagation runs hit the sweep limit",
                    rep.discursive.labels.unconverged_runs, rep.discursive.labels.n_runs
                ));
            }
            rep.composition.to_table()
        }
        Kind::Entities => {
            let entity: EntityKind = cfg.entity.as_deref().unwrap_or("hashtag").parse()?;
            top_entities(
                &records,
                &categories,
                entity,
                cfg.k.unwrap_or(DEFAULT_TOP_K),
            )
            .to_table()
        }
        Kind::Retweeters => {
            let accounts = cfg
                .accounts
                .as_ref()
                .filter(|a| !a.is_empty())
                .ok_or_else(|| {
                    Error::InvalidConfig(
                        "retweeters report needs a non-empty `accounts` list".into(),
                    )
                })?;
            let series = retweeter_composition(&records, &categories, accounts, offset);
            meta.warnings.extend(series.warnings.iter().cloned());
            series.to_table()
        }
    };
    meta.rows = table.rows.len();
    write_report(&out(kind.as_str()), &table, &meta)?;
    println!("wrote {}", out(kind.as_str()).display());
    Ok(())
}
