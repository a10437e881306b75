use std::path::Path;
use std::process::{Command, Output};

fn deffuant(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deffuant")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

#[test]
fn bound_on_half_ball() {
    let o = deffuant(&["bound", "--space", "ball:1:0.5:l2:0.5", "--dist", "uniform", "--tau", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(json["clamped_bound"], 0.5);
    assert_eq!(json["diameter"], 1.0);
    assert_eq!(json["expected_disagreement"], 0.25);
}

#[test]
fn bound_below_half_diameter_is_inapplicable() {
    let o = deffuant(&["bound", "--tau", "0.4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("inapplicable: τ ≤ 𝖣/2"));
}

#[test]
fn bound_without_closed_form_reports_standard_error() {
    let o = deffuant(&["bound", "--space", "box:2:l2", "--tau", "1", "--mc-samples", "20000", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(json["expected_disagreement_se"].as_f64().unwrap() > 0.0);
}

#[test]
fn simulate_writes_summary_and_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = [
        "simulate",
        "--graph",
        "complete:10",
        "--tau",
        "0.8",
        "--mu",
        "0.5",
        "--runs",
        "200",
        "--seed",
        "42",
        "--out",
        out,
        "--trajectories",
        "2",
        "--probes",
        "3",
    ];
    let o = deffuant(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    let pessimistic = summary["estimate"]["pessimistic_estimate"].as_f64().unwrap();
    assert!(pessimistic >= 1.0 / 6.0 - 0.08);
    let rows = csv_rows(&dir.path().join("runs.csv"));
    assert_eq!(rows.len(), 200);
    let header = csv::Reader::from_path(dir.path().join("runs.csv")).unwrap().headers().unwrap().clone();
    assert_eq!(
        header.iter().collect::<Vec<_>>(),
        ["run_id", "seed", "classification", "n_classes", "events", "final_time", "T_star", "event_A"]
    );
    let traj = csv::Reader::from_path(dir.path().join("trajectory_0001.csv")).unwrap().headers().unwrap().len();
    assert_eq!(traj, 5 + 3);

    // a second invocation appends rows below the single header
    assert_eq!(deffuant(&args).status.code(), Some(0));
    assert_eq!(csv_rows(&dir.path().join("runs.csv")).len(), 400);
}

#[test]
fn point_mass_on_two_vertices_always_agrees() {
    let o = deffuant(&["simulate", "--graph", "path:2", "--dist", "point:0.3", "--tau", "0.6", "--runs", "50"]);
    assert_eq!(o.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(json["estimate"]["point_estimate"], 1.0);
}

#[test]
fn zero_runs_is_a_usage_error() {
    let o = deffuant(&["simulate", "--tau", "0.8", "--runs", "0"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_clamps_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let o = deffuant(&["sweep", "--taus", "0.6,0.8,1.0", "--runs", "50", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("sweep.csv"));
    let clamped: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    for (got, want) in clamped.iter().zip([0.0, 1.0 / 6.0, 0.5]) {
        assert!((got - want).abs() < 1e-12, "{clamped:?}");
    }
    assert_eq!(stdout(&o), std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap());
}

#[test]
fn sweep_grid_must_ascend() {
    assert_eq!(deffuant(&["sweep", "--taus", "1.0,0.8"]).status.code(), Some(1));
    assert_eq!(deffuant(&["sweep", "--taus", "0.8,0.8"]).status.code(), Some(1));
}

#[test]
fn check_defaults_pass() {
    let o = deffuant(&["check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn check_injected_fault_fails_validation() {
    let o = deffuant(&["check", "--inject-fault"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mu"));
}

#[test]
fn check_missing_graph_file_is_io_error() {
    let o = deffuant(&["check", "--graph", "file:/nonexistent/graph.txt"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.txt");
    std::fs::write(&edges, "# triangle\n0 1\n1 2\n2 0\n").unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(&config, format!("graph = \"file:{}\"\ntau = 0.3\nruns = 5\n", edges.display())).unwrap();
    let o = deffuant(&["simulate", "--config", config.to_str().unwrap(), "--tau", "0.9"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(json["params"]["tau"], 0.9);
    assert_eq!(json["estimate"]["n_runs"], 5);

    std::fs::write(&config, "tua = 0.3\n").unwrap();
    assert_eq!(deffuant(&["bound", "--config", config.to_str().unwrap()]).status.code(), Some(1));
}
