use std::path::{Path, PathBuf};

use sdnoise::core::{BaseLoss, CorrectedLoss, NoiseModel};
use sdnoise::loader::DatasetManifest;
use sdnoise::report::{from_json_lines, to_json_lines, write_output};
use sdnoise::{run, ExperimentSpec, Method};

fn gaussian(method: &str, noise: &str, rates: [f64; 2]) -> ExperimentSpec {
    let text = format!(
        r#"
name = "g-{method}"
method = "{method}"
n_pairs = 3000
repeats = 2
seed = 5

[dataset.gaussian]
n = 1200
pi = 0.3
mean_pos = [2.0, 2.0]
mean_neg = [-2.0, -2.0]

[noise]
model = "{noise}"
rates = [{}, {}]

[train]
arch = "linear"
epochs = 5
"#,
        rates[0], rates[1]
    );
    ExperimentSpec::from_toml(&text, Path::new("inline.toml")).unwrap()
}

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

#[test]
fn full_run_is_deterministic() {
    let spec = gaussian("t_loss", "pairing", [0.2, 0.1]);
    let a = run(spec.clone()).unwrap();
    let b = run(spec).unwrap();
    assert!(a.is_complete());
    assert!(a.same_results(&b));
}

#[test]
fn unweighted_matches_weighted_under_symmetric_noise() {
    for noise in ["pairing", "labeling"] {
        let w = run(gaussian("weighted", noise, [0.2, 0.2])).unwrap();
        let u = run(gaussian("unweighted", noise, [0.2, 0.2])).unwrap();
        assert_eq!(w.accuracies(), u.accuracies(), "{noise}");
        assert!(w.repeats.iter().all(|r| r.alpha.is_some_and(|a| (a - 0.5).abs() < 1e-12)));
    }
}

#[test]
fn zero_rate_correction_is_the_clean_loss() {
    let pi = 0.3;
    let zero = CorrectedLoss::new(BaseLoss::Squared, &NoiseModel::pairing(0.0, 0.0).unwrap(), pi).unwrap();
    let clean = CorrectedLoss::clean(BaseLoss::Squared, pi).unwrap();
    assert_eq!(zero.coefficients(), clean.coefficients());

    let t = run(gaussian("t_loss", "pairing", [0.0, 0.0])).unwrap();
    let s = run(gaussian("sd_loss_clean", "pairing", [0.0, 0.0])).unwrap();
    assert_eq!(s.method, Method::SdLossClean);
    assert_eq!(t.accuracies(), s.accuracies());
}

#[test]
fn json_lines_round_trip_through_a_file() {
    let r = run(gaussian("km", "pairing", [0.1, 0.1])).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = write_output(&dir.path().join("nested/report.jsonl"), &to_json_lines(std::slice::from_ref(&r))).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(from_json_lines(&text, &path).unwrap(), vec![r]);
}

#[test]
fn bundled_datasets_load() {
    let cancer = DatasetManifest::from_file(&repo().join("configs/data/cancer.toml")).unwrap().load().unwrap();
    assert_eq!((cancer.dataset.n(), cancer.dataset.d()), (569, 30));
    assert!((cancer.prior() - 212.0 / 569.0).abs() < 1e-12);
    let diabetes = DatasetManifest::from_file(&repo().join("configs/data/diabetes.toml")).unwrap().load().unwrap();
    assert_eq!((diabetes.dataset.n(), diabetes.dataset.d()), (768, 8));
    assert!((diabetes.prior() - 268.0 / 768.0).abs() < 1e-12);
    let banana = DatasetManifest::from_file(&repo().join("configs/data/banana.toml")).unwrap().load().unwrap();
    assert_eq!((banana.dataset.n(), banana.dataset.d()), (5300, 2));
}

#[test]
fn every_shipped_config_parses() {
    for dir in ["gaussian", "uci", "banana"] {
        for entry in std::fs::read_dir(repo().join("configs").join(dir)).unwrap() {
            let path = entry.unwrap().path();
            ExperimentSpec::from_file(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        }
    }
}
