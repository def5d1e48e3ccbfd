use sdnoise_core::correction::BaseLoss;
use sdnoise_core::cv::{cross_validate, Candidate, CvMethod, CvSettings};
use sdnoise_core::data::{flatten_pairs, generate_gaussian_dataset};
use sdnoise_core::model::sgd_train;
use sdnoise_core::noise::{sample_noisy_pairs, NoiseKind};
use sdnoise_core::weighted::{classify, weighted_params};
use sdnoise_core::{Arch, CorrectedLoss, Dataset, NoiseModel, Predictor, Sign, TrainConfig, WeightedLoss};

fn accuracy(p: &Predictor, test: &Dataset, label: impl Fn(f64) -> Sign) -> f64 {
    let scores = p.predict_batch(&test.feature_matrix()).unwrap();
    let hits = scores.iter().zip(test.points()).filter(|(&t, pt)| label(t) == pt.y).count();
    hits as f64 / test.n() as f64
}

#[test]
fn epoch_loss_mostly_decreases() {
    let ds = generate_gaussian_dataset(2000, 0.2, &[2.0, 2.0], &[-2.0, -2.0], 1).unwrap();
    let noise = NoiseModel::pairing(0.2, 0.2).unwrap();
    let pairs = sample_noisy_pairs(&ds, &noise, 4000, 2).unwrap();
    let flat = flatten_pairs(&pairs).unwrap();
    let loss = CorrectedLoss::new(BaseLoss::Squared, &noise, 0.2).unwrap();
    let init = Predictor::init(Arch::Mlp, 2, 3).unwrap();
    let cfg = TrainConfig { epochs: 11, ..TrainConfig::default() };
    let h = sgd_train(&init, &flat, &loss, &cfg).unwrap().loss_history;
    let down = h.windows(2).filter(|w| w[1] <= w[0]).count();
    assert!(down >= 8, "{h:?}");
}

#[test]
fn training_is_bit_deterministic() {
    let ds = generate_gaussian_dataset(300, 0.3, &[1.0, 0.0], &[-1.0, 0.0], 4).unwrap();
    let pairs = sample_noisy_pairs(&ds, &NoiseModel::labeling(0.1, 0.2).unwrap(), 500, 5).unwrap();
    let flat = flatten_pairs(&pairs).unwrap();
    let loss = WeightedLoss::new(0.4, BaseLoss::Squared).unwrap();
    let init = Predictor::init(Arch::Mlp, 2, 6).unwrap();
    let cfg = TrainConfig { epochs: 3, seed: 9, ..TrainConfig::default() };
    let a = sgd_train(&init, &flat, &loss, &cfg).unwrap();
    let b = sgd_train(&init, &flat, &loss, &cfg).unwrap();
    assert_eq!(a.predictor.params(), b.predictor.params());
    assert_eq!(a.loss_history, b.loss_history);
}

/// With a prior below 1/2 the weighted minimizer is the negated clean
/// classifier, so the raw sign is almost always wrong.
#[test]
fn weighted_sign_flip_recovers_accuracy() {
    let pi = 0.2;
    let ds = generate_gaussian_dataset(4000, pi, &[2.0, 2.0], &[-2.0, -2.0], 7).unwrap();
    let test = generate_gaussian_dataset(4000, pi, &[2.0, 2.0], &[-2.0, -2.0], 8).unwrap();
    let noise = NoiseModel::pairing(0.2, 0.2).unwrap();
    let params = weighted_params(&noise, pi).unwrap();
    assert!(params.flip_sign);
    let pairs = sample_noisy_pairs(&ds, &noise, 10_000, 9).unwrap();
    let flat = flatten_pairs(&pairs).unwrap();
    let loss = WeightedLoss::new(params.alpha, BaseLoss::Squared).unwrap();
    let init = Predictor::init(Arch::Linear, 2, 10).unwrap();
    let cfg = TrainConfig { epochs: 20, ..TrainConfig::default() };
    let model = sgd_train(&init, &flat, &loss, &cfg).unwrap().predictor;
    let flipped = accuracy(&model, &test, |t| classify(t, &params));
    let raw = accuracy(&model, &test, Sign::of_score);
    assert!(flipped >= 0.98, "flipped {flipped}");
    assert!(raw <= 0.02, "raw {raw}");
}

fn cv_settings(epochs: usize) -> CvSettings {
    CvSettings { arch: Arch::Linear, train: TrainConfig { epochs, ..TrainConfig::default() } }
}

#[test]
fn cv_prefers_zero_rates_on_clean_pairs() {
    let method = CvMethod::LossCorrection { kind: NoiseKind::Pairing, pi: 0.2, base: BaseLoss::Squared };
    let grid = [Candidate::Rates(0.0, 0.0), Candidate::Rates(0.3, 0.3)];
    let mut wins = 0;
    for seed in 0..5 {
        let ds = generate_gaussian_dataset(2000, 0.2, &[2.0, 2.0], &[-2.0, -2.0], 100 + seed).unwrap();
        let pairs = sample_noisy_pairs(&ds, &NoiseModel::clean(), 10_000, seed).unwrap();
        let report = cross_validate(&pairs, &method, &grid, 5, seed, &cv_settings(5)).unwrap();
        if report.selected_candidate() == grid[0] {
            wins += 1;
        }
    }
    assert!(wins >= 4, "{wins} of 5");
}

#[test]
fn cv_prefers_half_weight_under_symmetric_noise() {
    let method = CvMethod::Weighted { base: BaseLoss::Squared };
    let grid: Vec<Candidate> = [0.3, 0.4, 0.5, 0.6, 0.7].map(Candidate::Alpha).to_vec();
    let mut wins = 0;
    for seed in 0..5 {
        let ds = generate_gaussian_dataset(2000, 0.3, &[0.5, 0.5], &[-0.5, -0.5], 200 + seed).unwrap();
        let noise = NoiseModel::pairing(0.2, 0.2).unwrap();
        let pairs = sample_noisy_pairs(&ds, &noise, 10_000, seed).unwrap();
        let report = cross_validate(&pairs, &method, &grid, 5, seed, &cv_settings(5)).unwrap();
        if report.selected_candidate() == Candidate::Alpha(0.5) {
            wins += 1;
        }
    }
    assert!(wins >= 3, "{wins} of 5");
}
