use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rucb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rucb")).args(args).output().expect("spawn rucb")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn analyze_total_order_is_all_ones() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(
        dir.path(),
        "order.csv",
        "0.5,0.7,0.8,0.9\n0.3,0.5,0.6,0.7\n0.2,0.4,0.5,0.6\n0.1,0.3,0.4,0.5\n",
    );
    let o = rucb(&["analyze", "--matrix", &m, "--samples", "500"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("# condorcet_winner: 0"));
    assert!(out.contains("# total_order: 0 > 1 > 2 > 3"));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert_eq!((r[1].as_str(), r[2].as_str()), ("1", "1"));
    }
}

#[test]
fn analyze_three_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "cycle.csv", "# k=3\n0.5,0.6,0.4\n0.4,0.5,0.6\n0.6,0.4,0.5\n");
    let csv_path = dir.path().join("sweep.csv");
    let o = rucb(&["analyze", "--matrix", &m, "--out", csv_path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("# condorcet_winner: none"));
    let rows = csv_rows(&fs::read_to_string(csv_path).unwrap());
    let col: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(col, ["1", "1", "0"]);
}

#[test]
fn gen_matrix_round_trips_through_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.json");
    let o = rucb(&[
        "gen-matrix", "planted", "--k", "6", "--delta-min", "0.1", "--delta-max", "0.3", "--seed", "9", "--out",
        p.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(&p).unwrap().contains("\"k\": 6"));
    let a = rucb(&["analyze", "--matrix", p.to_str().unwrap(), "--samples", "100"]);
    assert!(stdout(&a).contains("# condorcet_winner: 0"));
    let c = rucb(&["gen-matrix", "cycle", "--k", "5"]);
    assert!(stdout(&c).starts_with("# k=5\n"));
}

#[test]
fn bounds_csv_and_alpha_rejection() {
    let o = rucb(&["bounds", "--alpha", "2", "--gaps", "0,0.2", "--delta", "1", "--t-max", "1000", "--points", "4"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("t,high_prob_bound,expected_bound\n"));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0][0], "1");
    let ex: f64 = rows[0][2].parse().unwrap();
    assert!((ex - 0.3 * (28.0f64 / 3.0).cbrt()).abs() < 1e-12);

    let low = rucb(&["bounds", "--alpha", "0.8", "--gaps", "0,0.2", "--t-max", "10", "--points", "2"]);
    assert!(low.status.success());
    assert!(csv_rows(&stdout(&low)).iter().all(|r| r[2].is_empty()));

    let bad = rucb(&["bounds", "--alpha", "0.4", "--gaps", "0,0.2"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn verify_lemmas_passes() {
    let o = rucb(&["verify-lemmas", "--n-max-estimate", "20", "--n-max", "60"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let out = stdout(&o);
    assert_eq!(out.matches(" pass ").count(), 3, "{out}");
}

#[test]
fn exit_codes() {
    assert_eq!(rucb(&[]).status.code(), Some(1));
    assert_eq!(rucb(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(rucb(&["--help"]).status.code(), Some(0));
    assert_eq!(rucb(&["analyze", "--matrix", "/nonexistent/m.csv"]).status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.csv", "0.5,0.6\n0.6,0.5\n");
    assert_eq!(rucb(&["analyze", "--matrix", &bad]).status.code(), Some(1));
}

const CONFIG: &str = r#"{
    "matrix": {"planted": {"k": 5, "delta_min": 0.1, "delta_max": 0.3, "seed": 3}},
    "algorithm": "rucb",
    "alpha": 2.0,
    "runs": 4,
    "horizon": 3000,
    "seed_base": 7,
    "checkpoints": {"log_spaced": {"count": 8, "start": 10}},
    "output_dir": "out",
    "workers": 2
}"#;

#[test]
fn run_writes_traces_aggregates_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "exp.json", CONFIG);
    let o = rucb(&["run", "--config", &cfg, "--overlay-high-prob", "0.05", "--overlay-expected"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    for f in ["aggregate.csv", "aggregate.json", "config.json", "regret.csv", "accuracy.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let regret = fs::read_to_string(out.join("regret.csv")).unwrap();
    assert!(regret.starts_with("checkpoint,mean,min,max,high_prob_bound,expected_bound\n"));
    assert_eq!(regret.lines().count(), 9);
    let trace = fs::read_to_string(out.join("traces/run_0002.csv")).unwrap();
    assert_eq!(trace.lines().count(), 3001);
    let side: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("traces/run_0002.json")).unwrap()).unwrap();
    assert_eq!(side["seed"], 9);
    assert_eq!(side["alpha"], 2.0);
    assert_eq!(side["matrix_sha256"].as_str().unwrap().len(), 64);
    assert!(side["rng"].as_str().unwrap().starts_with("chacha8"));

    let low = write(dir.path(), "low.json", &CONFIG.replace("\"alpha\": 2.0", "\"alpha\": 0.9"));
    let o = rucb(&["run", "--config", &low, "--overlay-expected"]);
    assert_eq!(o.status.code(), Some(1));
}
