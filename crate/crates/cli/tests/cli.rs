use std::path::Path;
use std::process::{Command, Output};

use nfv_cli::output::read_rows;
use nfv_core::netmodel::{
    write_scenario, Demand, Edge, NodeRecord, PhysicalNetwork, Sampling, Scenario,
};

fn nfv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nfv"))
        .args(args)
        .output()
        .unwrap()
}

fn tight_scenario(dir: &Path) -> String {
    let nodes = vec![
        NodeRecord::new(1, 0.1, ["f1"]),
        NodeRecord::new(2, 0.1, Vec::<String>::new()),
        NodeRecord::new(3, 0.1, ["f2"]),
    ];
    let edges = vec![
        Edge {
            u: 1,
            v: 2,
            weight: 1.0,
        },
        Edge {
            u: 2,
            v: 3,
            weight: 1.0,
        },
    ];
    let net = PhysicalNetwork::new(nodes, edges, false).unwrap();
    let limits = [("f1".into(), 1), ("f2".into(), 1)].into();
    let sc = Scenario::new(
        net,
        vec![Demand::new(1, 3, false, ["f1", "f2"])],
        limits,
        Sampling::default(),
    )
    .unwrap();
    let path = dir.join("tight.scn");
    std::fs::write(&path, write_scenario(&sc)).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(nfv(&["--scenario", "nsf", "path"]).status.code(), Some(0));
    assert_eq!(
        nfv(&["--scenario", "nowhere.scn", "path"]).status.code(),
        Some(2)
    );
    assert_eq!(nfv(&["path", "--bogus"]).status.code(), Some(2));
    let tight = tight_scenario(tmp.path());
    assert_eq!(nfv(&["--scenario", &tight, "path"]).status.code(), Some(0));
    let out = nfv(&["--scenario", &tight, "milp", "--solve"]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn experiment_files_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().to_str().unwrap();
    let out = nfv(&[
        "--seed",
        "3",
        "--out",
        dir,
        "experiment",
        "--kind",
        "sfc-survivability",
        "--desk",
        "--samples",
        "1",
    ]);
    assert!(out.status.success());
    let listed: Vec<&str> = std::str::from_utf8(&out.stdout).unwrap().lines().collect();
    assert_eq!(listed.len(), 2);
    let csv = std::fs::read_to_string(listed.iter().find(|p| !p.ends_with(".plot.csv")).unwrap())
        .unwrap();
    assert!(csv.starts_with("# experiment=sfc-survivability\n# seed=3\n"));
    let rows = read_rows(&csv).unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.samples + r.infeasible == 1));
    let plot =
        std::fs::read_to_string(listed.iter().find(|p| p.ends_with(".plot.csv")).unwrap()).unwrap();
    assert_eq!(plot.lines().count(), rows.len() + 1);
}

#[test]
fn seed_changes_failure_probabilities() {
    let a = nfv(&["--scenario", "nsf", "--seed", "1", "metrics", "--k", "3"]).stdout;
    let b = nfv(&["--scenario", "nsf", "--seed", "2", "metrics", "--k", "3"]).stdout;
    assert_ne!(a, b);
}
