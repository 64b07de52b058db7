//! Report tables built from categorized interaction logs.
//!
//! Every report renders to a [`Table`] written as CSV, next to a JSON
//! sidecar ([`ReportMeta`]) recording the parameters it was built with.
//! Percentages carry two decimals.

mod composition;
mod core_periphery;
mod crosstab;
mod entities;
mod presence;
mod retweeters;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use composition::{
    community_composition, composition_report, validated_users, CommunityComposition, CommunityRow,
    CompositionReport, TOP_VERIFIED,
};
pub use core_periphery::{core_periphery, CorePeriphery};
pub use crosstab::{crosstab_interactions, CrossCategoryMatrix};
pub use entities::{entity_bipartite, top_entities, EntityKind, EntityRanking, EntityShare};
pub use presence::{
    activity_histogram, log2_bin, presence_series, ActivityHistogram, DayPresence, PresenceSeries,
};
pub use retweeters::{retweeter_composition, RetweeterPoint, RetweeterSeries};

use crate::error::Result;
use crate::ingest::{daily_slices, InteractionRecord};
use crate::io::fmt2;

/// A rectangular table of already formatted cells.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }
}

/// Parameters and diagnostics stored next to each report.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReportMeta {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<(NaiveDate, NaiveDate)>,
    pub utc_offset_secs: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fdr_level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub rows: usize,
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// Path of the JSON sidecar belonging to a CSV report.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes `table` to `path` and `meta` to its sidecar.
pub fn write_report(path: &Path, table: &Table, meta: &ReportMeta) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    table.write_csv(&mut w)?;
    w.flush()?;
    let mut s = serde_json::to_string_pretty(meta)?;
    s.push('\n');
    std::fs::write(sidecar_path(path), s)?;
    Ok(())
}

/// Daily slices restricted to `window` (inclusive), empty days included.
pub fn window_slices(
    records: &[InteractionRecord],
    offset_secs: i32,
    window: (NaiveDate, NaiveDate),
) -> BTreeMap<NaiveDate, Vec<InteractionRecord>> {
    let mut s = daily_slices(records, offset_secs, Some(window));
    s.retain(|d, _| *d >= window.0 && *d <= window.1);
    s
}

/// `100 num / den` with two decimals; `0.00` for an empty denominator.
pub fn pct(num: usize, den: usize) -> String {
    if den == 0 {
        return fmt2(0.0);
    }
    fmt2(100.0 * num as f64 / den as f64)
}

/// Percentages of `counts` in their total with two decimals, rounded by
/// largest remainder so that a non-empty row sums to exactly `100.00`.
/// Ties in the remainder go to the earlier entry. All zeros for an empty row.
pub fn pct_shares(counts: &[usize]) -> Vec<String> {
    const UNITS: u128 = 10_000;
    let total: u128 = counts.iter().map(|&c| c as u128).sum();
    if total == 0 {
        return counts.iter().map(|_| fmt2(0.0)).collect();
    }
    let mut units: Vec<u128> = counts.iter().map(|&c| c as u128 * UNITS / total).collect();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    // Remainders compared exactly as fractions of `total`.
    order.sort_by_key(|&i| std::cmp::Reverse(counts[i] as u128 * UNITS % total));
    let missing = UNITS - units.iter().sum::<u128>();
    for &i in order.iter().take(missing as usize) {
        units[i] += 1;
    }
    units
        .into_iter()
        .map(|u| format!("{}.{:02}", u / 100, u % 100))
        .collect()
}

/// `num / den` with two decimals; `0.00` for an empty denominator.
pub fn ratio(num: usize, den: usize) -> String {
    if den == 0 {
        return fmt2(0.0);
    }
    fmt2(num as f64 / den as f64)
}
