use std::path::Path;
use std::process::{Command, Output};

fn cgso(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cgso"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn generate(dir: &Path) {
    let out = cgso(
        &[
            "generate", "sbbam", "--blocks", "40,40", "--r", "2,5", "--p", "0.05", "--seed", "1",
            "--features-sigma", "0.5", "-o", "g",
        ],
        dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn generate_writes_graph_labels_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path());
    let g = dir.path().join("g");
    for f in ["edges.txt", "labels.csv", "features.csv", "split.csv", "meta.json", "manifest.json"] {
        assert!(g.join(f).exists(), "missing {f}");
    }
    let manifest = json(&g.join("manifest.json"));
    assert_eq!(manifest["seed"], 1);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 5);
    // no temporary files left behind
    assert!(std::fs::read_dir(&g).unwrap().all(|e| !e.unwrap().file_name().to_string_lossy().ends_with(".tmp")));
}

#[test]
fn generation_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = cgso(&["generate", "ba", "--n", "50", "--n0", "5", "--r0", "4", "--r", "3", "--seed", "9", "-o", name], dir.path());
        assert!(out.status.success());
        std::fs::read(dir.path().join(name).join("edges.txt")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn cluster_heatmap_and_train_run_on_generated_data() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d);

    let out = cgso(
        &["cluster", "--graph", "g/edges.txt", "--labels", "g/labels.csv", "--e2", "-1", "--e3", "-0.5", "-o", "c"],
        d,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&d.join("c/cluster.json"));
    assert_eq!(report["e2"], -1.0);
    assert_eq!(report["e3"], -0.5);
    let ami = report["per_repeat"][0]["ami"].as_f64().unwrap();
    assert!((-1.0..=1.0).contains(&ami));
    let manifest = json(&d.join("c/manifest.json"));
    let hashes = manifest["inputs"].as_array().unwrap();
    assert_eq!(hashes.len(), 2);
    assert_eq!(hashes[0]["sha256"].as_str().unwrap().len(), 64);

    let out = cgso(
        &["heatmap", "--graph", "g/edges.txt", "--labels", "g/labels.csv", "--steps", "2", "--repeats", "1", "-o", "h"],
        d,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(d.join("h/ami.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);

    let out = cgso(
        &[
            "train", "--graph", "g/edges.txt", "--features", "g/features.csv", "--labels", "g/labels.csv", "--mask",
            "g/split.csv", "--epochs", "5", "--centrality", "kcore", "-o", "t",
        ],
        d,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let ops = std::fs::read_to_string(d.join("t/operators.csv")).unwrap();
    assert!(ops.starts_with("term,centrality,m1,m2,m3,e1,e2,e3,a"));
    assert_eq!(ops.lines().count(), 2);
    let report = json(&d.join("t/report.json"));
    assert_eq!(report["report"]["train_loss"].as_array().map(Vec::len), Some(5));
}

#[test]
fn frozen_training_keeps_the_preset() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    generate(d);
    let out = cgso(
        &[
            "train", "--graph", "g/edges.txt", "--features", "g/features.csv", "--labels", "g/labels.csv", "--mask",
            "g/split.csv", "--epochs", "3", "--gso", "preset:mean_aggregation", "--freeze-operator", "-o", "t",
        ],
        d,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let ops = std::fs::read_to_string(d.join("t/operators.csv")).unwrap();
    let row: Vec<f64> = ops.lines().nth(1).unwrap().split(',').skip(2).map(|s| s.parse().unwrap()).collect();
    assert_eq!(row, vec![0.0, 1.0, 0.0, 0.0, -1.0, 0.0, 0.0]);
}

#[test]
fn spectrum_prints_to_stdout_without_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p3.txt"), "0 1\n1 2\n").unwrap();
    let out = cgso(&["spectrum", "--graph", "p3.txt", "--e2", "-1", "--e3", "0"], dir.path());
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let eig: Vec<f64> = report["report"]["eigenvalues"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    // degree-normalized P3: eigenvalues 1, 0, -1
    for (got, want) in eig.iter().zip([1.0, 0.0, -1.0]) {
        assert!((got - want).abs() < 1e-10, "{eig:?}");
    }
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cgso(&["cluster", "--bogus"], dir.path()).status.code(), Some(1));
    assert_eq!(cgso(&["spectrum", "--graph", "missing.txt"], dir.path()).status.code(), Some(1));
    std::fs::write(dir.path().join("bad.txt"), "0 x\n").unwrap();
    assert_eq!(cgso(&["centrality", "--graph", "bad.txt"], dir.path()).status.code(), Some(1));
    assert_eq!(cgso(&["--help"], dir.path()).status.code(), Some(0));
}

#[test]
fn cheeger_refuses_large_graphs_with_computation_error() {
    let dir = tempfile::tempdir().unwrap();
    let edges: String = (0..30).map(|i| format!("{i} {}\n", i + 1)).collect();
    std::fs::write(dir.path().join("path.txt"), edges).unwrap();
    assert_eq!(cgso(&["cheeger", "--graph", "path.txt"], dir.path()).status.code(), Some(2));
}

#[test]
fn verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = cgso(&["verify", "--cases", "5"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.lines().skip(1).all(|l| l.ends_with("PASS")));
}
