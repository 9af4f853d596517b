use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use paramlearn::erm::Family;
use paramlearn::instances::read_instances;
use serde_json::Value;
use tempfile::TempDir;

const KNAPSACK: &str = r#"{
    "algorithm": {"family": "knapsack"},
    "source": {"generator": "knapsack_smooth", "n": 10, "capacity": 4.0, "b": 5.0},
    "count": 100,
    "train": {"test_count": 100},
    "online": {"t": 100, "seeds": 4},
    "dispersion": {"t": 100, "points": 6},
    "pdim": {"m": 6, "cap": 6},
    "report": {"instances": 2}
}"#;

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace { dir: tempfile::tempdir().unwrap() }
    }

    fn config(&self, name: &str, text: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        path
    }

    fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn paramlearn(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paramlearn"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn ok(args: &[&str], config: &Path, out: &Path) -> String {
    let o = paramlearn(args, config, out);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: PathBuf) -> (String, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    (header, lines.map(|l| l.split(',').map(str::to_string).collect()).collect())
}

#[test]
fn generate_writes_count_instances_and_is_reproducible() {
    let ws = Workspace::new();
    let cfg = ws.config("k.json", KNAPSACK);
    let stdout = ok(&["generate", "--seed", "5"], &cfg, &ws.out("a"));
    assert!(stdout.contains("100 knapsack"));
    ok(&["generate", "--seed", "5", "--workers", "3"], &cfg, &ws.out("b"));
    ok(&["generate", "--seed", "6"], &cfg, &ws.out("c"));
    let read = |d: &str| std::fs::read(ws.out(d).join("instances.json")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
    assert_eq!(read_instances(ws.out("a").join("instances.json")).unwrap().len(), 100);
    let resolved = json(ws.out("a").join("config.json"));
    assert_eq!(resolved["seed"], 5);
    assert_eq!(resolved["domain"], serde_json::json!([0.0, 5.0]));
}

#[test]
fn exit_codes() {
    let ws = Workspace::new();
    let bad_b = ws.config("b.json", &KNAPSACK.replace("\"b\": 5.0", "\"b\": 0.5"));
    let o = paramlearn(&["generate"], &bad_b, &ws.out("x"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("domain error"));

    let unknown = ws.config("u.json", &KNAPSACK.replace("\"count\"", "\"colour\": 1, \"count\""));
    assert_eq!(paramlearn(&["train"], &unknown, &ws.out("x")).status.code(), Some(2));

    let cap = ws.config("c.json", &KNAPSACK.replace("\"cap\": 6", "\"cap\": 40"));
    assert_eq!(paramlearn(&["pdim"], &cap, &ws.out("x")).status.code(), Some(3));

    assert_eq!(paramlearn(&["sweep"], &ws.out("missing.json"), &ws.out("x")).status.code(), Some(4));
    let missing_file = ws.config(
        "f.json",
        r#"{"algorithm": {"family": "knapsack"}, "source": {"generator": "file", "path": "/no/such/instances.json"}}"#,
    );
    assert_eq!(paramlearn(&["sweep"], &missing_file, &ws.out("x")).status.code(), Some(4));

    let good = ws.config("k.json", KNAPSACK);
    let o = paramlearn(&["train", "--check"], &good, &ws.out("checked"));
    assert_eq!(o.status.code(), Some(0));
    assert!(!ws.out("checked").exists());
    assert_eq!(paramlearn(&["train", "--check"], &bad_b, &ws.out("x")).status.code(), Some(2));
}

#[test]
fn sweep_rows_reevaluate() {
    let ws = Workspace::new();
    let cfg = ws.config("k.json", &KNAPSACK.replace("\"count\": 100", "\"count\": 15"));
    let out = ws.out("o");
    ok(&["generate"], &cfg, &out);
    let stdout = ok(&["sweep"], &cfg, &out);
    let xs = read_instances(out.join("instances.json")).unwrap();
    let (header, rows) = csv_rows(out.join("sweep.csv"));
    assert_eq!(header, "instance_id,lo,hi,utility");
    for row in &rows {
        let id: usize = row[0].parse().unwrap();
        let (lo, hi, u): (f64, f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap(), row[3].parse().unwrap());
        assert!(lo < hi);
        // Interior points only: at a critical value the index tie-break may
        // side with the left piece.
        for t in [0.25, 0.5, 0.75] {
            assert_eq!(Family::Knapsack.utility(&xs[id], lo + (hi - lo) * t).unwrap(), u);
        }
    }
    for line in stdout.lines().filter(|l| l.starts_with("instance")) {
        let pieces: usize = line.split_whitespace().nth(2).unwrap().parse().unwrap();
        assert!(pieces <= 10 * 9 / 2 + 1);
    }
}

#[test]
fn constant_instance_sweeps_to_one_piece() {
    let ws = Workspace::new();
    let cfg = ws.config(
        "one.json",
        r#"{"algorithm": {"family": "knapsack"},
            "source": {"generator": "knapsack_smooth", "n": 1, "capacity": 2.0, "b": 1.0},
            "count": 3, "pdim": {"m": 3, "cap": 3}}"#,
    );
    let out = ws.out("o");
    ok(&["sweep"], &cfg, &out);
    let (_, rows) = csv_rows(out.join("sweep.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[1] == "0" && r[2] == "5"));
    ok(&["pdim"], &cfg, &out);
    let report = json(out.join("pdim_report.json"));
    assert_eq!(report["largest_shattered"], 0);
    assert_eq!(report["piece_histogram"], serde_json::json!({"1": 3}));
}

#[test]
fn train_reports() {
    let ws = Workspace::new();
    let same = ws.config(
        "same.json",
        &KNAPSACK.replace("\"train\": {\"test_count\": 100}", "\"train\": {\"test_same\": true}"),
    );
    let out = ws.out("same");
    ok(&["train"], &same, &out);
    let r = json(out.join("train_report.json"));
    assert_eq!(r["gap"], 0.0);
    assert_eq!(r["config"]["train"]["test_same"], true);

    // H = 1, ε = 0.1, δ = 0.05, pdim = 10 gives m = ⌈100·(10 + ln 20)⌉ = 1300.
    let big = ws.config(
        "big.json",
        &KNAPSACK.replace(
            "\"train\": {\"test_count\": 100}",
            "\"train\": {\"m\": 1300, \"test_count\": 2000, \"h\": 1.0, \"eps\": 0.1, \"delta\": 0.05, \"pdim\": 10}",
        ),
    );
    let out = ws.out("big");
    ok(&["train"], &big, &out);
    let r = json(out.join("train_report.json"));
    assert_eq!(r["m_required"], 1300);
    assert_eq!(r["m"], 1300);
    assert!(r["gap"].as_f64().unwrap() <= 0.1);
    assert!(r["train_avg"].as_f64().unwrap() > 0.0);
}

#[test]
fn online_summary_matches_rounds() {
    let ws = Workspace::new();
    let cfg = ws.config("k.json", KNAPSACK);
    let out = ws.out("o");
    ok(&["online", "--seed", "10"], &cfg, &out);
    let (header, rows) = csv_rows(out.join("online_summary.csv"));
    assert_eq!(header, "seed,regret,bound,k,lambda,w");
    assert_eq!(rows.len(), 4);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[0], (10 + i).to_string());
        let (h, rounds) = csv_rows(out.join(format!("online_rounds_seed{}.csv", row[0])));
        assert_eq!(h, "round,rho_played,realized_utility,cumulative_regret,running_piece_count");
        assert_eq!(rounds.len(), 100);
        assert_eq!(rounds.last().unwrap()[3], row[1]);
        assert!(row[2].parse::<f64>().unwrap() >= 0.0);
    }
    let summary = json(out.join("online_summary.json"));
    assert!(summary["seeds"].as_array().unwrap().iter().all(|s| s["weight_ratio_holds"] == true));
}

#[test]
fn online_batch_emits_one_row_per_seed() {
    let ws = Workspace::new();
    let cfg = ws.config("k.json", &KNAPSACK.replace("\"t\": 100, \"seeds\": 4", "\"t\": 20, \"seeds\": 50"));
    let out = ws.out("o");
    ok(&["online"], &cfg, &out);
    let (_, rows) = csv_rows(out.join("online_summary.csv"));
    assert_eq!(rows.len(), 50);
    let seeds: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(seeds, (0..50).map(|s| s.to_string()).collect::<Vec<_>>());
}

#[test]
fn dispersion_curve() {
    let ws = Workspace::new();
    let cfg = ws.config("k.json", KNAPSACK);
    let out = ws.out("o");
    ok(&["dispersion"], &cfg, &out);
    let (header, rows) = csv_rows(out.join("dispersion.csv"));
    assert_eq!(header, "w,k,ball_center");
    let w: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    let k: Vec<usize> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(w.len(), 6);
    assert_eq!((w[0], w[5]), (0.01, 0.1));
    let ratios: Vec<f64> = w.windows(2).map(|p| p[1] / p[0]).collect();
    assert!(ratios.iter().all(|r| (r - ratios[0]).abs() < 1e-9));
    assert!(k.windows(2).all(|p| p[0] <= p[1]));
    let report = json(out.join("dispersion_report.json"));
    for p in report["points"].as_array().unwrap() {
        assert!(p["k"].as_f64().unwrap() <= p["bound"].as_f64().unwrap());
    }
}

#[test]
fn pdim_within_counting_bound() {
    let ws = Workspace::new();
    let cfg = ws.config("k.json", KNAPSACK);
    let (a, b) = (ws.out("a"), ws.out("b"));
    ok(&["pdim"], &cfg, &a);
    ok(&["pdim"], &cfg, &b);
    let r = json(a.join("pdim_report.json"));
    assert!(r["largest_shattered"].as_u64().unwrap() <= r["log2_bound"].as_u64().unwrap());
    assert_eq!(r["subset"].as_array().unwrap().len(), r["targets"].as_array().unwrap().len());
    assert_eq!(std::fs::read(a.join("pdim_report.json")).unwrap(), std::fs::read(b.join("pdim_report.json")).unwrap());
}

#[test]
fn report_runs_each_family() {
    let ws = Workspace::new();
    let configs = [
        (
            "scl",
            r#"{"algorithm": {"family": "scl", "extraction": {"method": "unmerge"}, "objective": "kmedian"},
                "source": {"generator": "clustering_smooth", "n": 8, "max_dist": 1.0, "b": 3.0, "k": 2},
                "count": 3, "report": {"rho": 0.5}}"#,
            "linkage",
        ),
        (
            "lloyds",
            r#"{"algorithm": {"family": "lloyds", "max_iters": 5},
                "source": {"generator": "clustering_smooth", "n": 8, "max_dist": 1.0, "b": 3.0, "k": 2},
                "count": 3, "report": {"rho": 2.0}}"#,
            "lloyds",
        ),
        (
            "mwis",
            r#"{"algorithm": {"family": "mwis"},
                "source": {"generator": "maxcut", "n": 8, "edge_prob": 0.4, "w_max": 1.0},
                "count": 3}"#,
            "mwis",
        ),
        (
            "slinear",
            r#"{"algorithm": {"family": "slinear", "rank": null, "sweeps": 20},
                "source": {"generator": "maxcut", "n": 8, "edge_prob": 0.4, "w_max": 1.0},
                "count": 3, "report": {"rho": 0.0}}"#,
            "slinear",
        ),
    ];
    for (name, text, kind) in configs {
        let cfg = ws.config(&format!("{name}.json"), text);
        let out = ws.out(name);
        ok(&["report"], &cfg, &out);
        let r = json(out.join("report.json"));
        let instances = r["instances"].as_array().unwrap();
        assert_eq!(instances.len(), 3, "{name}");
        assert!(instances.iter().all(|i| i["outcome"]["kind"] == kind), "{name}");
    }
    let r = json(ws.out("scl").join("report.json"));
    assert_eq!(r["instances"][0]["outcome"]["tree"]["merges"].as_array().unwrap().len(), 7);
}
