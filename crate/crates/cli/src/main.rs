mod report;

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use backbone_core::bicm::{fit_bicm, BicmModel, FitConfig, FitMethod};
use backbone_core::community::{
    discursive_communities, louvain, DiscursiveConfig, DEFAULT_RESTARTS, DEFAULT_RUNS,
};
use backbone_core::graph::{BipartiteGraph, Graph, Layer};
use backbone_core::ingest::{
    read_interactions, read_profiles, CapRule, Categories, DEFAULT_CAP_THRESHOLD,
};
use backbone_core::io::read_edge_list;
use backbone_core::projection::{backbone, validated_projection, DEFAULT_FDR_LEVEL};
use backbone_core::report::{write_report, ReportMeta, Table};
use backbone_core::scores::score_by_category;
use backbone_core::synth::{generate, Scenario};
use backbone_core::Error;
use chrono::FixedOffset;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "backbone-cli",
    version,
    about = "Bipartite null models, validated projections and bot-presence reports"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
pub struct Global {
    /// FDR level of the validated projections.
    #[arg(long = "fdr-t", global = true)]
    pub fdr_t: Option<f64>,
    /// Minimum bot score of a bot.
    #[arg(long, global = true, conflicts_with = "cap_percentile")]
    pub cap_threshold: Option<f64>,
    /// Share of scored users labelled as bots, in percent, strictly between 0 and 100.
    #[arg(long, global = true)]
    pub cap_percentile: Option<f64>,
    /// Offset applied to timestamps before cutting days, e.g. `+01:00`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub utc_offset: Option<String>,
}

impl Global {
    pub fn fdr_level(&self, fallback: Option<f64>) -> f64 {
        self.fdr_t.or(fallback).unwrap_or(DEFAULT_FDR_LEVEL)
    }

    pub fn cap_rule(&self, threshold: Option<f64>, percentile: Option<f64>) -> CapRule {
        match (
            self.cap_threshold,
            self.cap_percentile,
            threshold,
            percentile,
        ) {
            (Some(t), _, _, _) => CapRule::Threshold(t),
            (_, Some(p), _, _) => CapRule::Percentile(p),
            (_, _, Some(t), _) => CapRule::Threshold(t),
            (_, _, _, Some(p)) => CapRule::Percentile(p),
            _ => CapRule::Threshold(DEFAULT_CAP_THRESHOLD),
        }
    }

    pub fn offset_secs(&self, fallback: Option<&str>) -> backbone_core::Result<i32> {
        match self.utc_offset.as_deref().or(fallback) {
            None => Ok(0),
            Some(s) => parse_offset(s),
        }
    }
}

pub fn parse_offset(s: &str) -> backbone_core::Result<i32> {
    s.parse::<FixedOffset>()
        .map(|o| o.local_minus_utc())
        .map_err(|_| {
            Error::InvalidConfig(format!("invalid UTC offset `{s}`, expected e.g. +01:00"))
        })
}

#[derive(Subcommand)]
enum Command {
    /// Fit the BiCM to a bipartite edge list and save the model as JSON.
    Fit {
        /// Tab-separated `row \t column` edge list.
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Validated projection of one layer of a bipartite edge list.
    Project {
        #[arg(long)]
        edges: PathBuf,
        /// Previously fitted model; fitted from `--edges` when absent.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "rows")]
        layer: LayerArg,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Monopartite backbone joining both validated projections.
    Backbone {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Backbone edge list.
        #[arg(long)]
        out: PathBuf,
        /// Optional `id \t layer` listing of the backbone nodes.
        #[arg(long)]
        nodes: Option<PathBuf>,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Louvain communities of an edge list, or discursive communities of an
    /// interaction log.
    Communities {
        /// Undirected edge list for Louvain.
        #[arg(
            long,
            required_unless_present = "interactions",
            conflicts_with = "interactions"
        )]
        edges: Option<PathBuf>,
        #[arg(long, requires = "profiles")]
        interactions: Option<PathBuf>,
        #[arg(long)]
        profiles: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        /// Label-propagation runs for discursive communities.
        #[arg(long, default_value_t = DEFAULT_RUNS)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `id \t label` lines (plus frequency for discursive communities).
        #[arg(long)]
        out: PathBuf,
    },
    /// Participation and relevance of every node, with KS tests between
    /// categories when profiles are given.
    Scores {
        #[arg(long)]
        edges: PathBuf,
        /// `id \t label` partition; Louvain is run when absent.
        #[arg(long)]
        partition: Option<PathBuf>,
        #[arg(long)]
        profiles: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV output; metadata, category means and KS tests go to the JSON sidecar.
        #[arg(long)]
        out: PathBuf,
    },
    /// Reports over a categorized interaction log.
    Report {
        #[arg(long, value_enum)]
        kind: report::Kind,
        /// JSON configuration; relative paths resolve against its directory.
        #[arg(long)]
        config: PathBuf,
        /// Output directory; `<kind>.csv` and its sidecar are written there.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Generate a planted synthetic scenario with its ground truth.
    Synth {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Clone, Copy, Debug)]
struct FitArgs {
    #[arg(long, value_enum, default_value = "fixed-point")]
    method: MethodArg,
    #[arg(long, default_value_t = FitConfig::default().tolerance)]
    tolerance: f64,
    #[arg(long, default_value_t = FitConfig::default().max_iterations)]
    max_iterations: usize,
}

impl FitArgs {
    fn config(self) -> FitConfig {
        let method = match self.method {
            MethodArg::FixedPoint => FitMethod::FixedPoint,
            MethodArg::Newton => FitMethod::Newton,
        };
        FitConfig {
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            method,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MethodArg {
    FixedPoint,
    Newton,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum LayerArg {
    Rows,
    Columns,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(err) if err.is_validation() => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn read_bipartite(path: &Path) -> anyhow::Result<BipartiteGraph> {
    let edges = read_edge_list(BufReader::new(open(path)?))?;
    Ok(BipartiteGraph::from_edges(edges)?)
}

pub fn open(path: &Path) -> anyhow::Result<File> {
    File::open(path).with_context(|| format!("cannot open {}", path.display()))
}

pub fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| {
        format!("cannot create {}", path.display())
    })?))
}

fn model_for(g: &BipartiteGraph, model: Option<&Path>, fit: FitArgs) -> anyhow::Result<BicmModel> {
    match model {
        Some(p) => {
            let m = BicmModel::load(p)?;
            if !m.matches(g) {
                return Err(Error::MismatchedSource.into());
            }
            Ok(m)
        }
        None => Ok(fit_bicm(g, &fit.config())?),
    }
}

fn read_partition(path: &Path, g: &Graph) -> anyhow::Result<Vec<usize>> {
    let pairs = read_edge_list(BufReader::new(open(path)?))?;
    let map: HashMap<String, String> = pairs.into_iter().collect();
    let mut labels: HashMap<&str, usize> = HashMap::new();
    g.node_ids()
        .iter()
        .map(|id| {
            let l = map.get(id).ok_or_else(|| Error::PartitionSize {
                expected: g.n_nodes(),
                got: map.len(),
            })?;
            let next = labels.len();
            Ok(*labels.entry(l.as_str()).or_insert(next))
        })
        .collect()
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let global = cli.global;
    match cli.command {
        Command::Fit { edges, out, fit } => {
            let g = read_bipartite(&edges)?;
            let m = fit_bicm(&g, &fit.config())?;
            m.save(&out)?;
            println!("{}", serde_json::to_string(m.report())?);
        }
        Command::Project {
            edges,
            model,
            layer,
            out,
            fit,
        } => {
            let g = read_bipartite(&edges)?;
            let m = model_for(&g, model.as_deref(), fit)?;
            let layer = match layer {
                LayerArg::Rows => Layer::Rows,
                LayerArg::Columns => Layer::Columns,
            };
            let p = validated_projection(&g, &m, layer, global.fdr_level(None))?;
            p.write_tsv(&g, create(&out)?)?;
            println!(
                "{} validated links out of {} tested pairs ({} candidates, {} exact tails)",
                p.edges.len(),
                p.n_hypotheses,
                p.n_candidates,
                p.n_exact
            );
        }
        Command::Backbone {
            edges,
            model,
            out,
            nodes,
            fit,
        } => {
            let g = read_bipartite(&edges)?;
            let m = model_for(&g, model.as_deref(), fit)?;
            let t = global.fdr_level(None);
            let rows = validated_projection(&g, &m, Layer::Rows, t)?;
            let cols = validated_projection(&g, &m, Layer::Columns, t)?;
            let b = backbone(&g, &rows, &cols)?;
            let bg = &b.graph;
            backbone_core::io::write_edge_list(
                create(&out)?,
                bg.edges().map(|(u, v)| (bg.node_id(u), bg.node_id(v))),
            )?;
            if let Some(path) = nodes {
                b.write_nodes(create(&path)?)?;
            }
            println!("{} nodes, {} links", bg.n_nodes(), bg.n_edges());
        }
        Command::Communities {
            edges,
            interactions,
            profiles,
            restarts,
            runs,
            seed,
            out,
        } => {
            if let Some(path) = edges {
                let g = Graph::from_edges(read_edge_list(BufReader::new(open(&path)?))?);
                let p = louvain(&g, restarts, seed)?;
                p.write_tsv(&g, create(&out)?)?;
                println!(
                    "{} communities, modularity {}",
                    p.n_communities, p.modularity
                );
            } else {
                let records = read_interactions(interactions.expect("required by clap"))?;
                let profiles = read_profiles(profiles.expect("required by clap"))?;
                let cfg = DiscursiveConfig {
                    fdr_level: global.fdr_level(None),
                    louvain_restarts: restarts,
                    propagation_runs: runs,
                    seed,
                    ..Default::default()
                };
                let res = discursive_communities(&records.items, &profiles.items, &cfg)?;
                res.labels.write_tsv(create(&out)?)?;
                let n = res
                    .partition
                    .as_ref()
                    .map_or(res.verified_labels.len(), |p| p.n_communities);
                println!(
                    "{n} communities, {} unconverged runs",
                    res.labels.unconverged_runs
                );
            }
        }
        Command::Scores {
            edges,
            partition,
            profiles,
            restarts,
            seed,
            out,
        } => {
            let g = Graph::from_edges(read_edge_list(BufReader::new(open(&edges)?))?);
            let (labels, louvain_seed) = match partition {
                Some(p) => (read_partition(&p, &g)?, None),
                None => (louvain(&g, restarts, seed)?.labels, Some(seed)),
            };
            let (categories, threshold) = match profiles {
                Some(p) => {
                    let profiles = read_profiles(p)?;
                    let rule = global.cap_rule(None, None);
                    let t = rule.threshold(&profiles.items)?;
                    (
                        Categories::from_profiles(&profiles.items, CapRule::Threshold(t))?,
                        Some(t),
                    )
                }
                None => (Categories::from_map(HashMap::new()), None),
            };
            let scores = score_by_category(&g, &labels, &categories)?;
            let mut t = Table::new(&[
                "id",
                "category",
                "community",
                "k",
                "d_in",
                "participation",
                "relevance",
            ]);
            for s in &scores.scores {
                let id = g.node_id(s.node);
                t.push(vec![
                    id.to_string(),
                    categories.get(id).as_str().to_string(),
                    s.community.to_string(),
                    s.degree.to_string(),
                    s.in_degree.to_string(),
                    s.participation.to_string(),
                    s.relevance.to_string(),
                ]);
            }
            let meta = ReportMeta {
                kind: "scores".into(),
                cap_threshold: threshold,
                seed: louvain_seed,
                rows: t.rows.len(),
                warnings: scores.warnings.clone(),
                ..Default::default()
            };
            write_report(&out, &t, &meta)?;
            let sidecar =
                serde_json::json!({ "meta": meta, "means": scores.means, "tests": scores.tests });
            let mut w = create(&backbone_core::report::sidecar_path(&out))?;
            serde_json::to_writer_pretty(&mut w, &sidecar)?;
            writeln!(w)?;
            w.flush()?;
        }
        Command::Report {
            kind,
            config,
            out_dir,
        } => report::run(kind, &config, &out_dir, &global)?,
        Command::Synth {
            scenario,
            seed,
            out,
        } => {
            let scenario: Scenario = scenario.parse()?;
            generate(scenario, seed)?.write(&out)?;
            writeln!(
                io::stdout(),
                "wrote {} scenario to {}",
                scenario.as_str(),
                out.display()
            )?;
        }
    }
    Ok(())
}
