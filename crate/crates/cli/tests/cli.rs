use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_backbone-cli"))
        .args(args)
        .output()
        .expect("run backbone-cli")
}

fn ok(args: &[&str]) -> Output {
    let out = cli(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn synth(scenario: &str, seed: u64, dir: &Path) {
    ok(&[
        "synth",
        "--scenario",
        scenario,
        "--seed",
        &seed.to_string(),
        "--out",
        dir.to_str().unwrap(),
    ]);
}

fn report(kind: &str, dir: &Path) -> std::path::PathBuf {
    let out_dir = dir.join("out");
    ok(&[
        "report",
        "--kind",
        kind,
        "--config",
        dir.join("config.json").to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    out_dir
}

fn drop_first_column(csv: &str) -> String {
    csv.lines()
        .map(|l| l.split_once(',').map_or(l, |(_, rest)| rest))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn injection_reports_match_ground_truth() {
    for seed in [0, 7] {
        let dir = tempfile::tempdir().unwrap();
        synth("injection", seed, dir.path());
        let out = report("presence", dir.path());
        for name in ["presence", "activity"] {
            assert_eq!(
                fs::read(out.join(format!("{name}.csv"))).unwrap(),
                fs::read(dir.path().join("truth").join(format!("{name}.csv"))).unwrap(),
                "{name}"
            );
        }
        let sidecar: serde_json::Value =
            serde_json::from_slice(&fs::read(out.join("presence.json")).unwrap()).unwrap();
        assert!(sidecar.is_object());
        let out = report("crosstab", dir.path());
        assert_eq!(
            fs::read(out.join("crosstab.csv")).unwrap(),
            fs::read(dir.path().join("truth/crosstab.csv")).unwrap()
        );
    }
}

#[test]
fn composition_matches_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    synth("coordination", 1, dir.path());
    let out = report("composition", dir.path());
    let got = fs::read_to_string(out.join("composition.csv")).unwrap();
    let want = fs::read_to_string(dir.path().join("truth/composition.csv")).unwrap();
    assert_eq!(drop_first_column(&got), drop_first_column(&want));
}

#[test]
fn edge_list_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth("two-bloc", 3, d);
    let edges = d.join("edges.tsv");
    let edges = edges.to_str().unwrap();
    let model = d.join("model.json");
    let out = ok(&["fit", "--edges", edges, "--out", model.to_str().unwrap()]);
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(summary.is_object());
    let rows = d.join("rows.tsv");
    ok(&[
        "project",
        "--edges",
        edges,
        "--model",
        model.to_str().unwrap(),
        "--layer",
        "rows",
        "--out",
        rows.to_str().unwrap(),
    ]);
    assert!(rows.exists());
    let bb = d.join("backbone.tsv");
    ok(&[
        "--fdr-t",
        "0.05",
        "backbone",
        "--edges",
        edges,
        "--out",
        bb.to_str().unwrap(),
    ]);
    assert!(bb.exists());
    let part = d.join("part.tsv");
    ok(&[
        "communities",
        "--edges",
        edges,
        "--seed",
        "1",
        "--out",
        part.to_str().unwrap(),
    ]);
    let again = d.join("part2.tsv");
    ok(&[
        "communities",
        "--edges",
        edges,
        "--seed",
        "1",
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(fs::read(&part).unwrap(), fs::read(&again).unwrap());
    let scores = d.join("scores.csv");
    ok(&[
        "scores",
        "--edges",
        edges,
        "--out",
        scores.to_str().unwrap(),
    ]);
    let text = fs::read_to_string(&scores).unwrap();
    assert!(text.lines().count() > 1);
}

#[test]
fn discursive_communities_from_interactions() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth("camps", 2, d);
    let out = d.join("labels.csv");
    ok(&[
        "communities",
        "--interactions",
        d.join("interactions.jsonl").to_str().unwrap(),
        "--profiles",
        d.join("profiles.jsonl").to_str().unwrap(),
        "--runs",
        "50",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(fs::read_to_string(out).unwrap().lines().count() > 1);
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = cli(&[
        "synth",
        "--scenario",
        "nope",
        "--seed",
        "1",
        "--out",
        d.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    synth("injection", 1, d);
    let out = cli(&[
        "--utc-offset",
        "+25:00",
        "report",
        "--kind",
        "presence",
        "--config",
        d.join("config.json").to_str().unwrap(),
        "--out-dir",
        d.join("out").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    synth("two-bloc", 1, d);
    let out = cli(&[
        "--fdr-t",
        "1.5",
        "project",
        "--edges",
        d.join("edges.tsv").to_str().unwrap(),
        "--out",
        d.join("p.tsv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_input_is_a_runtime_error() {
    let out = cli(&[
        "fit",
        "--edges",
        "/nonexistent/edges.tsv",
        "--out",
        "/tmp/unused.json",
    ]);
    assert_eq!(out.status.code(), Some(1));
}
