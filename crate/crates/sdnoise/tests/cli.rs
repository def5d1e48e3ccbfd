use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"
name = "cli"
method = "weighted"
n_pairs = 2000
repeats = 1
seed = 3

[dataset.gaussian]
n = 800
pi = 0.25
mean_pos = [2.0, 2.0]
mean_neg = [-2.0, -2.0]

[noise]
model = "pairing"
rates = [0.1, 0.1]

[train]
arch = "linear"
epochs = 5
"#;

fn sdnoise(out_dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdnoise")).args(args).env("SDNOISE_OUTPUT_DIR", out_dir).output().unwrap()
}

fn ok(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn simulate_then_estimate_prior() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, CONFIG).unwrap();
    ok(&sdnoise(dir.path(), &["simulate", "--config", cfg.to_str().unwrap(), "--output", "pairs.csv"]));
    let pairs = dir.path().join("pairs.csv");
    let text = std::fs::read_to_string(&pairs).unwrap();
    assert_eq!(text.lines().next(), Some("x0,x1,xp0,xp1,q"));
    assert_eq!(text.lines().count(), 2001);

    let out = ok(&sdnoise(
        dir.path(),
        &["estimate-prior", "--pairs", pairs.to_str().unwrap(), "--model", "pairing", "--rates", "0.1,0.1"],
    ));
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    let pi = v["pi"].as_f64().unwrap();
    assert!((pi - 0.25).abs() < 0.06, "{pi}");
}

#[test]
fn train_then_evaluate_reproduces_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, CONFIG).unwrap();
    let cfg = cfg.to_str().unwrap();
    ok(&sdnoise(dir.path(), &["train", "--config", cfg, "--output", "model.txt"]));
    let model = dir.path().join("model.txt");
    let acc: f64 = ok(&sdnoise(dir.path(), &["evaluate", "--model", model.to_str().unwrap(), "--config", cfg]))
        .trim()
        .parse()
        .unwrap();
    let run = ok(&sdnoise(dir.path(), &["run", "--config", cfg, "--format", "json-lines"]));
    let report: serde_json::Value = serde_json::from_str(run.trim()).unwrap();
    assert_eq!(report["repeats"][0]["accuracy"].as_f64().unwrap(), acc);
    assert!(acc > 0.95);
}

#[test]
fn sweep_writes_plot_data_under_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, CONFIG).unwrap();
    let args = ["sweep-noise", "--config", cfg.to_str().unwrap(), "--rates", "0,0.2,0.4"];
    ok(&sdnoise(dir.path(), &[&args[..], &["--format", "plot-data", "--output", "sweep.dat"]].concat()));
    let text = std::fs::read_to_string(dir.path().join("sweep.dat")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.split_whitespace().all(|c| c.parse::<f64>().is_ok())));
}

#[test]
fn failures_exit_nonzero_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    // A balanced prior makes the weighted threshold undefined.
    std::fs::write(&cfg, CONFIG.replace("pi = 0.25", "pi = 0.5").replace("seed = 3", "seed = 3\nprior = 0.5")).unwrap();
    let o = sdnoise(dir.path(), &["run", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("train"), "{err}");

    let missing = sdnoise(dir.path(), &["run", "--config", "/nonexistent/exp.toml"]);
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error:"));
}
