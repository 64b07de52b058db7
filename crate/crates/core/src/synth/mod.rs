//! Seeded synthetic scenarios with planted structure and ground truth.
//!
//! * `injection`: daily activity where bots jump from 2% to 11% of daily
//!   users at a planted date and suspended users from 6% to 9% after a
//!   second date. Ground truth is tallied by the generator itself.
//! * `two-bloc`: users by hashtags with two dense diagonal blocks.
//! * `camps`: verified and unverified users split into two retweet camps.
//! * `coordination`: eight planted discursive groups with varying bot and
//!   suspended shares, some of them coordinated on hashtags.

mod blocs;
mod coordination;
mod injection;

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde_json::Value;

pub use blocs::{camps, two_bloc, two_bloc_with, BlocParams, Camps, TwoBloc};
pub use coordination::{coordination, GroupSizes, GROUPS};
pub use injection::{injection, InjectionParams};

use crate::error::{Error, Result};
use crate::ingest::{write_interactions, write_profiles, InteractionRecord, UserProfile};
use crate::report::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Injection,
    TwoBloc,
    Camps,
    Coordination,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::Injection,
        Scenario::TwoBloc,
        Scenario::Camps,
        Scenario::Coordination,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Injection => "injection",
            Scenario::TwoBloc => "two-bloc",
            Scenario::Camps => "camps",
            Scenario::Coordination => "coordination",
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

/// Generated inputs plus everything needed to check them.
#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub records: Vec<InteractionRecord>,
    pub profiles: Vec<UserProfile>,
    /// Ground-truth tables, written under `truth/<name>.csv`.
    pub truth: Vec<(String, Table)>,
    /// Extra tab-separated files (name, lines).
    pub extra: Vec<(String, Vec<String>)>,
    pub manifest: Value,
    /// Report configuration for the CLI, paths relative to the output directory.
    pub report_config: Value,
}

impl SynthOutput {
    pub fn truth_table(&self, name: &str) -> Option<&Table> {
        self.truth.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    /// Writes `interactions.jsonl`, `profiles.jsonl`, `manifest.json`,
    /// `config.json`, the extra files and `truth/*.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir.join("truth"))?;
        write_interactions(
            std::io::BufWriter::new(fs::File::create(dir.join("interactions.jsonl"))?),
            &self.records,
        )?;
        write_profiles(
            std::io::BufWriter::new(fs::File::create(dir.join("profiles.jsonl"))?),
            &self.profiles,
        )?;
        for (name, table) in &self.truth {
            fs::write(
                dir.join("truth").join(format!("{name}.csv")),
                table.to_csv_string()?,
            )?;
        }
        for (name, lines) in &self.extra {
            let mut s = lines.join("\n");
            s.push('\n');
            fs::write(dir.join(name), s)?;
        }
        fs::write(
            dir.join("manifest.json"),
            serde_json::to_string_pretty(&self.manifest)? + "\n",
        )?;
        fs::write(
            dir.join("config.json"),
            serde_json::to_string_pretty(&self.report_config)? + "\n",
        )?;
        Ok(())
    }
}

pub fn generate(scenario: Scenario, seed: u64) -> Result<SynthOutput> {
    match scenario {
        Scenario::Injection => Ok(injection(&InjectionParams::default(), seed)),
        Scenario::TwoBloc => Ok(two_bloc(seed)?.into_output(seed)),
        Scenario::Camps => Ok(camps(seed).into_output(seed)),
        Scenario::Coordination => Ok(coordination(seed)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.as_str().parse::<Scenario>().unwrap(), s);
        }
        assert!(matches!(
            "nope".parse::<Scenario>(),
            Err(Error::UnknownScenario(_))
        ));
    }
}
