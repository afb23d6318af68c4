use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const REFERENCE: &str = "lambda = 0.2\nmu = 0.1\ntemp.C = 3\ninit.delta = 4\n";

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lindho-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path
}

fn lindho(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lindho")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(text: &str, key: &str) -> f64 {
    let line = text
        .lines()
        .find(|l| l.starts_with(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"));
    line.split(" = ").nth(1).unwrap().parse().unwrap()
}

#[test]
fn coeffs_for_reference_run() {
    let dir = scratch("coeffs");
    let cfg = config(&dir, REFERENCE);
    let o = lindho(&["--config", cfg.to_str().unwrap(), "coeffs"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!((value(&text, "d_pp") - 0.45).abs() < 1e-15);
    assert!((value(&text, "d_qq") - 0.15).abs() < 1e-15);
}

#[test]
fn validate_failures_exit_one() {
    let o = lindho(&["--lambda", "0.05", "--mu", "0.1", "--coth", "3", "validate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("invalid"));

    let o = lindho(&["--lambda", "0.2", "--mu", "0.1", "--coth", "1.1", "validate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL thermal_constraint"));

    let o = lindho(&["--lambda", "0.2", "--mu", "0.1", "--coth", "3", "validate"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn flags_override_config_file() {
    let dir = scratch("override");
    let cfg = config(&dir, REFERENCE);
    let o = lindho(&[
        "--config",
        cfg.to_str().unwrap(),
        "--lambda",
        "0.3",
        "--delta-sq",
        "2",
        "deco",
    ]);
    let text = stdout(&o);
    assert_eq!(value(&text, "lambda"), 0.3);
    assert_eq!(value(&text, "init.delta"), 2.0);
    assert_eq!(value(&text, "mu"), 0.1);
}

#[test]
fn deco_reports_time_scales() {
    let o = lindho(&[
        "--lambda",
        "0.2",
        "--mu",
        "0.1",
        "--coth",
        "3",
        "--delta-sq",
        "4",
        "deco",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!((value(&text, "t_deco") - 0.15152).abs() < 5e-6);
    assert!((value(&text, "t_rel") - 5.0).abs() < 1e-12);

    let o = lindho(&["--lambda", "0.2", "--mu", "0", "--delta-sq", "1", "deco", "--json"]);
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json["time_scales"]["t_deco"]["time"], "inf");
}

#[test]
fn trajectory_routes() {
    let dir = scratch("traj");
    let cfg = config(&dir, "lambda = 0.2\nmu = 0.1\ntemp.C = 3\ninit.q0 = 6\ninit.p0 = 4\n");
    let c = cfg.to_str().unwrap();

    let o = lindho(&["--config", c, "trajectory", "--t-end", "0"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2);
    assert!(text.ends_with('\n'));
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("0.0000000000000000e0,6.0000000000000000e0,4.0000000000000000e0,"));

    let o = lindho(&["--config", c, "trajectory", "--route", "all", "--t-end", "14"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "route,t,mean_q,mean_p,s_qq,s_pp,s_pq,sigma_det,max_dev"
    );
    let mut rows = 0;
    for line in lines {
        let dev: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(dev < 1e-6, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 3 * 1401);

    // spiral to the origin
    let o = lindho(&["--config", c, "trajectory", "--t-end", "40", "--dt", "1"]);
    let last = stdout(&o).lines().last().unwrap().to_string();
    let cols: Vec<f64> = last.split(',').map(|x| x.parse().unwrap()).collect();
    assert!(cols[1].hypot(cols[2]) < 0.05);
}

#[test]
fn output_is_deterministic() {
    let dir = scratch("determinism");
    let cfg = config(&dir, REFERENCE);
    let c = cfg.to_str().unwrap();
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    for out in [&a, &b] {
        let o = lindho(&["--config", c, "metrics", "--t-end", "5", "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let sweep = |out: &PathBuf| {
        lindho(&[
            "--config",
            c,
            "sweep",
            "--axis",
            "C:1.5:6:10",
            "--axis",
            "t:0:20:21",
            "--out",
            out.to_str().unwrap(),
        ])
    };
    sweep(&a);
    sweep(&b);
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 211);
    assert_eq!(text, fs::read_to_string(&b).unwrap());
}

#[test]
fn windows() {
    let dir = scratch("window");
    let closed = config(&dir, "closed = true\ninit.delta = 1\n");
    let o = lindho(&["--config", closed.to_str().unwrap(), "window"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("window: empty"));

    let cfg = config(&dir, REFERENCE);
    let o = lindho(&[
        "--config",
        cfg.to_str().unwrap(),
        "window",
        "--qd",
        "0.99",
        "--cc",
        "10",
    ]);
    let text = stdout(&o);
    let first = text
        .lines()
        .find(|l| l.starts_with("window: ["))
        .expect("nonempty window");
    let inner = first.trim_start_matches("window: [").trim_end_matches(']');
    let ends: Vec<f64> = inner.split(", ").map(|x| x.parse().unwrap()).collect();
    assert!(ends[0] < ends[1] && ends[1] < 20.0);
}

#[test]
fn figdata_writes_every_figure() {
    let dir = scratch("figdata");
    let o = lindho(&["figdata", "all", "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    for name in [
        "fig1_trajectory",
        "fig1_contour_delta1",
        "fig1_contour_delta4",
        "fig2a",
        "fig2b",
        "fig3a",
        "fig3b",
        "fig3c",
        "fig4a",
        "fig4b",
    ] {
        let text = fs::read_to_string(dir.join(format!("{name}.csv"))).unwrap();
        assert!(text.ends_with('\n'), "{name}");
    }
    let fig2a = fs::read_to_string(dir.join("fig2a.csv")).unwrap();
    assert_eq!(fig2a.lines().count(), 1 + 51 * 201);

    let fig4b = fs::read_to_string(dir.join("fig4b.csv")).unwrap();
    let peak = fig4b
        .lines()
        .skip(1)
        .flat_map(|l| l.split(','))
        .map(|x| x.parse::<f64>().unwrap())
        .fold(0.0f64, f64::max);
    assert!((peak - 1.0 / (3.0 * std::f64::consts::PI)).abs() < 1e-12);

    assert_eq!(
        lindho(&["figdata", "9", "--out", dir.to_str().unwrap()]).status.code(),
        Some(1)
    );
}

#[test]
fn fpe_stationary_run_and_manifest() {
    let dir = scratch("fpe");
    let cfg = config(&dir, REFERENCE);
    let out = dir.join("run");
    let o = lindho(&[
        "--config",
        cfg.to_str().unwrap(),
        "fpe",
        "--stationary",
        "--t-end",
        "1",
        "--snapshots",
        "0.5,1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(value(&stdout(&o), "linf_drift") < 2e-3);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["snapshots"].as_array().unwrap().len(), 2);
    assert!(manifest["telemetry"]["mass_loss"].as_f64().unwrap() < 1e-3);
    assert!(out.join("snapshot_000.csv").exists());
}

#[test]
fn exit_codes() {
    let o = lindho(&[
        "--lambda", "0.2", "--mu", "0.1", "--coth", "3", "fpe", "--n", "64", "--dt", "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = lindho(&["--config", "/nonexistent/lindho.cfg", "coeffs"]);
    assert_eq!(o.status.code(), Some(3));
    let o = lindho(&["--no-such-flag"]);
    assert_eq!(o.status.code(), Some(1));
    let dir = scratch("badkey");
    let cfg = config(&dir, "lambda = 0.2\nlamda = 0.3\n");
    let o = lindho(&["--config", cfg.to_str().unwrap(), "coeffs"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}
