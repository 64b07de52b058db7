use backbone_core::community::{discursive_communities, DiscursiveConfig};
use backbone_core::ingest::{CapRule, Categories, DEFAULT_CAP_THRESHOLD};
use backbone_core::report::composition_report;
use backbone_core::synth::{camps, coordination};

fn without_label(rows: &[Vec<String>]) -> Vec<Vec<String>> {
    rows.iter().map(|r| r[1..].to_vec()).collect()
}

#[test]
fn table2_composition_is_recovered() {
    for seed in [1, 2, 3] {
        let out = coordination(seed);
        let cats =
            Categories::from_profiles(&out.profiles, CapRule::Threshold(DEFAULT_CAP_THRESHOLD))
                .unwrap();
        let cfg = DiscursiveConfig {
            propagation_runs: 50,
            seed,
            ..Default::default()
        };
        let rep = composition_report(&out.records, &out.profiles, &cats, &cfg).unwrap();
        let got = rep.composition.to_table();
        let want = out.truth_table("composition").unwrap();
        assert_eq!(got.header, want.header);
        assert_eq!(
            without_label(&got.rows),
            without_label(&want.rows),
            "seed {seed}"
        );
    }
}

#[test]
fn camps_are_separated() {
    let c = camps(9);
    let cfg = DiscursiveConfig {
        propagation_runs: 50,
        ..Default::default()
    };
    let res = discursive_communities(&c.records, &c.profiles, &cfg).unwrap();
    let assignment = res.labels.assignment();
    assert_eq!(assignment.len(), c.camp.len());
    for (a, ca) in &c.camp {
        for (b, cb) in &c.camp {
            assert_eq!(assignment[a] == assignment[b], ca == cb, "{a} {b}");
        }
    }
}
