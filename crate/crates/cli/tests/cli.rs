use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn acdd(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_acdd"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run(command: &str, config: &Path, out: &Path, extra: &[&str]) -> i32 {
    let mut args = vec![
        command,
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let (code, stderr) = acdd(&args);
    if code != 0 {
        eprintln!("{stderr}");
    }
    code
}

fn csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    (header, rows)
}

fn last_mean_blue(path: &Path) -> f64 {
    let (header, rows) = csv(path);
    assert_eq!(header, ["t", "mean_blue"]);
    rows.last().unwrap()[1].parse().unwrap()
}

const SCENARIO_IV: &str = r#"{
    "seed": 3,
    "graph_b": {"kind": "er", "n": 2000, "p": 0.005, "seed": 1},
    "f": {"family": "polynomial", "coefficients": [0, 2, -2]},
    "g": {"family": "polynomial", "coefficients": [1, -1]},
    "simulation": {"t_end": 200, "record_every": 100}
}"#;

const HOPF: &str = r#"{
    "seed": 3,
    "graph_b": {"kind": "er", "n": 80, "p": 0.1, "seed": 1},
    "f": {"family": "polynomial", "coefficients": [0, 4, -4]},
    "g": {"family": "centered-quadratic-nu", "nu": 3},
    "simulation": {"t_end": 60},
    "hopf": {"nu_lo": 3, "nu_hi": 5, "step": 0.05},
    "sweep": {"nu_lo": 3, "nu_hi": 5, "step": 1},
    "structural": {"iterations": 2},
    "lyapunov": {"t_transient": 10, "t_total": 60, "k": 2},
    "perturb": {"d_nu": [0.01, 0.005]}
}"#;

#[test]
fn scenario_four_converges_to_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "iv.json", SCENARIO_IV);
    let out = dir.path().join("out");
    assert_eq!(run("simulate", &cfg, &out, &["--scale", "desk"]), 0);
    assert!((last_mean_blue(&out.join("trajectory.csv")) - 0.5).abs() <= 1e-3);
    let manifest: Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["config"]["graph_b"]["n"], 500);
    assert_eq!(manifest["config"]["simulation"]["step"], 0.01);
    assert_eq!(manifest["outputs"][0]["file"], "trajectory.csv");
}

#[test]
fn generation_failure_has_its_own_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let body = SCENARIO_IV.replace("\"p\": 0.005", "\"p\": 0");
    let cfg = write_config(dir.path(), "p0.json", &body);
    let out = dir.path().join("out");
    assert_eq!(run("simulate", &cfg, &out, &[]), 3);
    let record: Value = serde_json::from_str(&fs::read_to_string(out.join("error.json")).unwrap()).unwrap();
    assert_eq!(record["error"], "GenerationFailed");
    assert_eq!(record["exit_code"], 3);
}

#[test]
fn config_errors_map_to_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let typo = SCENARIO_IV.replace("\"seed\": 3", "\"sed\": 3");
    let cfg = write_config(dir.path(), "typo.json", &typo);
    let out = dir.path().join("out");
    assert_eq!(run("simulate", &cfg, &out, &[]), 2);
    let record: Value = serde_json::from_str(&fs::read_to_string(out.join("error.json")).unwrap()).unwrap();
    assert_eq!(record["error"], "ConfigParseError");

    let missing = write_config(dir.path(), "t.json", SCENARIO_IV);
    assert_eq!(run("threshold", &missing, &out, &[]), 2);
    assert_eq!(run("simulate", &dir.path().join("absent.json"), &out, &[]), 5);
}

#[test]
fn reruns_and_manifest_replays_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "iv.json", SCENARIO_IV);
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    assert_eq!(run("simulate", &cfg, &a, &["--scale", "desk"]), 0);
    assert_eq!(run("simulate", &cfg, &b, &["--scale", "desk"]), 0);
    let manifest = |d: &Path| -> Value {
        serde_json::from_str(&fs::read_to_string(d.join("manifest.json")).unwrap()).unwrap()
    };
    assert_eq!(manifest(&a)["outputs"], manifest(&b)["outputs"]);
    assert_eq!(
        fs::read(a.join("trajectory.csv")).unwrap(),
        fs::read(b.join("trajectory.csv")).unwrap()
    );
    let replay = write_config(dir.path(), "replay.json", &manifest(&a)["config"].to_string());
    assert_eq!(run("simulate", &replay, &c, &[]), 0);
    assert_eq!(manifest(&a)["outputs"], manifest(&c)["outputs"]);
    assert_eq!(manifest(&a)["config"], manifest(&c)["config"]);
}

#[test]
fn seed_override_changes_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "iv.json", SCENARIO_IV);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run("simulate", &cfg, &a, &["--scale", "desk"]), 0);
    assert_eq!(run("simulate", &cfg, &b, &["--scale", "desk", "--seed", "4"]), 0);
    assert_ne!(
        fs::read(a.join("trajectory.csv")).unwrap(),
        fs::read(b.join("trajectory.csv")).unwrap()
    );
}

/// A file name and its CSV header.
type Schema<'a> = (&'a str, &'a [&'a str]);

#[test]
fn every_command_writes_its_schema() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "hopf.json", HOPF);
    let threshold = write_config(
        dir.path(),
        "threshold.json",
        &HOPF.replace(
            "\"simulation\"",
            "\"threshold\": {\"tau1\": 0.6, \"tau2\": 0.6, \"alpha\": 0.9, \"beta\": 0.9}, \"simulation\"",
        ),
    );
    let cases: [(&str, &Path, &[Schema]); 8] = [
        ("simulate", &cfg, &[("trajectory.csv", &["t", "mean_blue"])]),
        (
            "equilibria",
            &cfg,
            &[("equilibria.csv", &["sigma", "residual", "verdict", "re_lambda1", "im_lambda1", "method"])],
        ),
        (
            "threshold",
            &threshold,
            &[
                ("threshold.csv", &["condition_id", "satisfied", "worst_point", "margin", "check_kind"]),
                ("transition.csv", &["membership", "outcome", "t_decide"]),
            ],
        ),
        ("hopf", &cfg, &[("hopf.csv", &["nu", "sigma", "re_lambda1", "im_lambda1"])]),
        ("sweep", &cfg, &[("sweep.csv", &["coordinate", "extremum"]), ("clusters.csv", &["coordinate", "cluster_count"])]),
        ("structural-sweep", &cfg, &[("clusters.csv", &["coordinate", "cluster_count"])]),
        ("lyapunov", &cfg, &[("exponents.csv", &["index", "exponent"])]),
        (
            "perturb-estimate",
            &cfg,
            &[("perturb.csv", &["case", "delta", "estimate_re", "estimate_im", "exact_re", "exact_im", "abs_error"])],
        ),
    ];
    for (command, config, files) in cases {
        let out = dir.path().join(command);
        assert_eq!(run(command, config, &out, &[]), 0, "{command}");
        for (file, header) in files {
            let (h, rows) = csv(&out.join(file));
            assert_eq!(h, *header, "{command}/{file}");
            // Converged orbits leave no extrema.
            if *file != "sweep.csv" {
                assert!(!rows.is_empty(), "{command}/{file}");
            }
            for cell in rows.iter().flatten() {
                if let Ok(x) = cell.parse::<f64>() {
                    assert!(x.is_finite());
                }
            }
        }
    }
    let (_, rows) = csv(&dir.path().join("equilibria").join("equilibria.csv"));
    assert!(rows.iter().any(|r| (r[0].parse::<f64>().unwrap() - 0.7).abs() < 1e-9 && r[2] == "stable" && r[5] == "proposition1-spectrum"));
    let (_, rows) = csv(&dir.path().join("perturb-estimate").join("perturb.csv"));
    assert_eq!(rows.iter().filter(|r| r[0] == "parameter").count(), 2);
    assert_eq!(rows.iter().filter(|r| r[0] == "structure").count(), 1);
}

#[test]
fn figure_two_d_desk() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig2d");
    let (code, err) = acdd(&["figure", "fig2d", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert!((last_mean_blue(&out.join("trajectory.csv")) - 0.5).abs() <= 1e-3);
    let (header, _) = csv(&out.join("fan.csv"));
    assert_eq!(header, ["initial", "t", "mean_blue"]);
}

#[test]
fn figure_three_is_kicked_three_times() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig3");
    let (code, err) = acdd(&["figure", "fig3", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let (_, rows) = csv(&out.join("trajectory.csv"));
    let series: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .collect();
    let at = |t: f64| series.iter().find(|(s, _)| (s - t).abs() < 1e-9).unwrap().1;
    assert!(at(149.99) > at(10.0) && at(10.0) > series[0].1);
    assert!(at(299.99) < 1e-10);
    assert!((at(399.99) - 0.5).abs() < 1e-6);
    assert!(at(500.0) < 1e-10);
    for t in [150.0, 300.0, 400.0] {
        assert!((at(t) - at(t - 0.01)).abs() > 1e-3, "no kick at {t}");
    }
}

#[test]
fn unknown_figure_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = acdd(&["figure", "fig9", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 2);
}
