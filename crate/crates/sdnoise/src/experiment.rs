//! The experiment pipeline: split, corrupt and sample pairs, optionally
//! cross-validate, train by method, score on the clean test split, and
//! aggregate over repeats.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use sdnoise_core::cluster::{clusters_to_classes, constrained_kmeans, kmeans, ClusterClassifier, Constraints};
use sdnoise_core::cv::{cross_validate, Candidate, CvMethod, CvSettings};
use sdnoise_core::data::{flatten_pairs, generate_gaussian_dataset, split};
use sdnoise_core::estimation::{estimate_prior, Branch};
use sdnoise_core::model::sgd_train;
use sdnoise_core::noise::sample_noisy_pairs;
use sdnoise_core::rng::derive_seed;
use sdnoise_core::weighted::weighted_params;
use sdnoise_core::{
    Arch, BaseLoss, CorrectedLoss, Dataset, NoiseModel, PairPoint, PerExampleLoss, PointwiseSDPoint, Predictor, Sign,
    SplitSpec, WeightedLoss,
};

use crate::error::{Error, Result};
use crate::loader::{DatasetManifest, LoadedDataset};
use crate::model_io::{Decision, SavedModel};
use crate::spec::{DatasetRef, ExperimentSpec, Method, NoiseSpec, PriorKind, PriorSource};

/// Seed streams derived from a repeat seed.
mod stream {
    pub const DATA: u64 = 1;
    pub const PAIRS: u64 = 2;
    pub const INIT: u64 = 3;
    pub const SHUFFLE: u64 = 4;
    pub const CV: u64 = 5;
    pub const CLUSTER: u64 = 6;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Load,
    Split,
    Sample,
    EstimatePrior,
    CrossValidate,
    Train,
    Cluster,
    Evaluate,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Load => "load",
            Stage::Split => "split",
            Stage::Sample => "sample",
            Stage::EstimatePrior => "estimate-prior",
            Stage::CrossValidate => "cross-validate",
            Stage::Train => "train",
            Stage::Cluster => "cluster",
            Stage::Evaluate => "evaluate",
        })
    }
}

/// A failed repeat: where it failed and with which seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub repeat: usize,
    pub seed: u64,
    pub stage: Stage,
    pub message: String,
}

impl fmt::Display for StageFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "repeat {} (seed {}) failed at stage {}: {}", self.repeat, self.seed, self.stage, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    pub d: usize,
    pub prior: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepeatRecord {
    pub repeat: usize,
    pub seed: u64,
    pub accuracy: f64,
    pub n_pairs: usize,
    pub similar_fraction: f64,
    /// Prior used by the method; absent for methods that need none.
    pub prior: Option<f64>,
    /// Noise rates or weight chosen by cross-validation.
    pub selected: Option<Vec<f64>>,
    pub alpha: Option<f64>,
    pub flip_sign: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub name: String,
    pub method: Method,
    pub noise: NoiseSpec,
    pub dataset: DatasetSummary,
    pub repeats: Vec<RepeatRecord>,
    pub failures: Vec<StageFailure>,
    /// Over all requested repeats; absent when any repeat failed.
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub wall_clock_secs: f64,
}

impl RunReport {
    pub fn accuracies(&self) -> Vec<f64> {
        self.repeats.iter().map(|r| r.accuracy).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }

    /// Equality of everything except timing.
    pub fn same_results(&self, other: &RunReport) -> bool {
        RunReport { wall_clock_secs: 0.0, ..self.clone() } == RunReport { wall_clock_secs: 0.0, ..other.clone() }
    }
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

enum Source {
    Fixed(Box<LoadedDataset>),
    Gaussian,
}

/// Everything one repeat trains and tests on.
#[derive(Clone, Debug)]
pub struct RepeatData {
    pub repeat: usize,
    pub seed: u64,
    pub train: Dataset,
    pub test: Dataset,
    /// Empty for the supervised reference.
    pub pairs: Vec<PairPoint>,
}

/// A fitted classifier plus what was chosen along the way.
#[derive(Clone, Debug)]
pub struct Fitted {
    pub classifier: Classifier,
    pub prior: Option<f64>,
    pub selected: Option<Vec<f64>>,
    pub alpha: Option<f64>,
}

#[derive(Clone, Debug)]
pub enum Classifier {
    Model(SavedModel),
    Clusters(ClusterClassifier),
}

impl Classifier {
    pub fn flip_sign(&self) -> bool {
        matches!(self, Classifier::Model(SavedModel { decision: Decision::Flipped, .. }))
    }

    pub fn accuracy(&self, test: &Dataset) -> Result<f64> {
        let correct = match self {
            Classifier::Model(m) => {
                let scores = m.predictor.predict_batch(&test.feature_matrix())?;
                scores.iter().zip(test.points()).filter(|(&t, p)| m.decision.label(t) == p.y).count()
            }
            Classifier::Clusters(c) => test.points().iter().filter(|p| c.classify(&p.x) == p.y).count(),
        };
        Ok(correct as f64 / test.n() as f64)
    }
}

type StageResult<T> = std::result::Result<T, (Stage, Error)>;

fn at<E: Into<Error>>(stage: Stage) -> impl FnOnce(E) -> (Stage, Error) {
    move |e| (stage, e.into())
}

pub struct Experiment {
    spec: ExperimentSpec,
    source: Source,
    summary: DatasetSummary,
}

impl Experiment {
    /// Validates the spec and loads file-backed data once.
    pub fn new(spec: ExperimentSpec) -> Result<Self> {
        spec.validate()?;
        let (source, summary) = match &spec.dataset {
            DatasetRef::Manifest(path) => {
                let loaded = DatasetManifest::from_file(path)?.load()?;
                let name = path.file_stem().map_or("data".into(), |s| s.to_string_lossy().into_owned());
                Self::fixed(loaded, name)
            }
            DatasetRef::Csv(m) => {
                let name = m.path.file_stem().map_or("data".into(), |s| s.to_string_lossy().into_owned());
                Self::fixed(m.load()?, name)
            }
            DatasetRef::Gaussian(g) => {
                (Source::Gaussian, DatasetSummary { name: "gaussian".into(), d: g.mean_pos.len(), prior: g.pi, n: g.n })
            }
        };
        if let Source::Fixed(l) = &source {
            if !l.is_usable() {
                return Err(Error::Spec(format!("{}: dataset has a single class", spec.name)));
            }
        }
        Ok(Experiment { spec, source, summary })
    }

    fn fixed(loaded: LoadedDataset, name: String) -> (Source, DatasetSummary) {
        let summary = DatasetSummary { name, d: loaded.dataset.d(), prior: loaded.prior(), n: loaded.dataset.n() };
        (Source::Fixed(Box::new(loaded)), summary)
    }

    pub fn spec(&self) -> &ExperimentSpec {
        &self.spec
    }

    pub fn summary(&self) -> &DatasetSummary {
        &self.summary
    }

    /// Repeat `i` uses seed `base + i`.
    pub fn repeat_seed(&self, repeat: usize) -> u64 {
        self.spec.seed.wrapping_add(repeat as u64)
    }

    fn noise(&self) -> NoiseModel {
        self.spec.noise.to_model().expect("validated")
    }

    pub fn repeat_data(&self, repeat: usize) -> std::result::Result<RepeatData, StageFailure> {
        let seed = self.repeat_seed(repeat);
        self.repeat_data_inner(repeat, seed).map_err(|(stage, e)| failure(repeat, seed, stage, e))
    }

    fn repeat_data_inner(&self, repeat: usize, seed: u64) -> StageResult<RepeatData> {
        let generated;
        let full = match (&self.source, &self.spec.dataset) {
            (Source::Fixed(l), _) => &l.dataset,
            (Source::Gaussian, DatasetRef::Gaussian(g)) => {
                generated =
                    generate_gaussian_dataset(g.n, g.pi, &g.mean_pos, &g.mean_neg, derive_seed(seed, stream::DATA, 0))
                        .map_err(at(Stage::Load))?;
                &generated
            }
            _ => unreachable!("source follows the dataset reference"),
        };
        let (train, test) =
            split(full, SplitSpec { train_fraction: self.spec.train_fraction, seed }).map_err(at(Stage::Split))?;
        let pairs = if self.spec.method == Method::Pn {
            Vec::new()
        } else {
            let n = self.spec.pair_count(train.n());
            sample_noisy_pairs(&train, &self.noise(), n, derive_seed(seed, stream::PAIRS, 0))
                .map_err(at(Stage::Sample))?
        };
        Ok(RepeatData { repeat, seed, train, test, pairs })
    }

    /// Prior for the method: estimated from the pair counts, read from the
    /// clean training labels, or fixed by the config.
    fn prior(&self, data: &RepeatData) -> StageResult<f64> {
        match self.spec.prior {
            PriorSource::Fixed(p) => Ok(p),
            PriorSource::Kind(PriorKind::Oracle) => Ok(data.train.positive_fraction()),
            PriorSource::Kind(PriorKind::Estimate) => {
                let n_s = data.pairs.iter().filter(|p| p.q.is_plus()).count() as u64;
                let n_d = data.pairs.len() as u64 - n_s;
                let branch = Branch::from_hint(self.spec.prior_hint);
                let est = estimate_prior(n_s, n_d, &self.noise(), branch).map_err(at(Stage::EstimatePrior))?;
                Ok(est.pi)
            }
        }
    }

    pub fn fit(&self, data: &RepeatData) -> std::result::Result<Fitted, StageFailure> {
        self.fit_inner(data).map_err(|(stage, e)| failure(data.repeat, data.seed, stage, e))
    }

    fn fit_inner(&self, data: &RepeatData) -> StageResult<Fitted> {
        let spec = &self.spec;
        let seed = data.seed;
        let arch: Arch = spec.train.arch.into();
        let base: BaseLoss = spec.train.base_loss.into();
        let d = data.train.d();
        let init = Predictor::init(arch, d, derive_seed(seed, stream::INIT, 0)).map_err(at(Stage::Train))?;
        let cfg = spec.train.config(derive_seed(seed, stream::SHUFFLE, 0));
        let cv_seed = derive_seed(spec.seed, data.repeat as u64, stream::CV);
        let cv_settings = || CvSettings {
            arch,
            train: sdnoise_core::TrainConfig {
                epochs: spec.cv.as_ref().and_then(|c| c.epochs).unwrap_or(cfg.epochs),
                ..cfg
            },
        };

        if spec.method == Method::Pn {
            let flat: Vec<PointwiseSDPoint> =
                data.train.points().iter().map(|p| PointwiseSDPoint { x: p.x.clone(), q: p.y }).collect();
            return Ok(Fitted {
                classifier: train_model(&init, &flat, &base, &cfg, Decision::Sign)?,
                prior: None,
                selected: None,
                alpha: None,
            });
        }

        let flat = flatten_pairs(&data.pairs).map_err(at(Stage::Sample))?;
        let pi = self.prior(data)?;
        let noise = self.noise();
        let mut fitted = Fitted {
            classifier: Classifier::Clusters(ClusterClassifier {
                centroids: Vec::new(),
                labels: [Sign::Plus, Sign::Minus],
            }),
            prior: Some(pi),
            selected: None,
            alpha: None,
        };
        fitted.classifier = match spec.method {
            Method::TLoss => {
                let mut used = noise;
                if let Some(cv) = &spec.cv {
                    let grid: Vec<Candidate> = cv.grid.iter().map(|r| Candidate::Rates(r[0], r[1])).collect();
                    let method = CvMethod::LossCorrection { kind: noise.kind(), pi, base };
                    let report = cross_validate(&data.pairs, &method, &grid, cv.folds, cv_seed, &cv_settings())
                        .map_err(at(Stage::CrossValidate))?;
                    if let Candidate::Rates(a, b) = report.selected_candidate() {
                        used = NoiseModel::new(noise.kind(), a, b).map_err(at(Stage::CrossValidate))?;
                        fitted.selected = Some(vec![a, b]);
                    }
                }
                let loss = CorrectedLoss::new(base, &used, pi).map_err(at(Stage::Train))?;
                train_model(&init, &flat, &loss, &cfg, Decision::Sign)?
            }
            Method::SdLossClean => {
                let loss = CorrectedLoss::clean(base, pi).map_err(at(Stage::Train))?;
                train_model(&init, &flat, &loss, &cfg, Decision::Sign)?
            }
            Method::Weighted | Method::Unweighted => {
                let params = weighted_params(&noise, pi).map_err(at(Stage::Train))?;
                let mut alpha = if spec.method == Method::Weighted { params.alpha } else { 0.5 };
                if let (Method::Weighted, Some(cv)) = (spec.method, &spec.cv) {
                    let grid: Vec<Candidate> = cv.alphas.iter().map(|&a| Candidate::Alpha(a)).collect();
                    let report = cross_validate(
                        &data.pairs,
                        &CvMethod::Weighted { base },
                        &grid,
                        cv.folds,
                        cv_seed,
                        &cv_settings(),
                    )
                    .map_err(at(Stage::CrossValidate))?;
                    if let Candidate::Alpha(a) = report.selected_candidate() {
                        alpha = a;
                        fitted.selected = Some(vec![a]);
                    }
                }
                fitted.alpha = Some(alpha);
                let loss = WeightedLoss::new(alpha, base).map_err(at(Stage::Train))?;
                train_model(&init, &flat, &loss, &cfg, Decision::from_flip(params.flip_sign))?
            }
            Method::Km | Method::KmCop => {
                let points: Vec<Vec<f64>> = flat.iter().map(|p| p.x.clone()).collect();
                let cseed = derive_seed(seed, stream::CLUSTER, 0);
                let iters = spec.baseline.max_iters;
                let clustering = if spec.method == Method::Km {
                    kmeans(&points, 2, iters, cseed)
                } else {
                    let limit = spec.baseline.max_constraints.unwrap_or(data.pairs.len());
                    let mut cons = Constraints::default();
                    for (k, p) in data.pairs.iter().take(limit).enumerate() {
                        let link = (2 * k, 2 * k + 1);
                        if p.q.is_plus() {
                            cons.must_links.push(link);
                        } else {
                            cons.cannot_links.push(link);
                        }
                    }
                    constrained_kmeans(&points, &cons, iters, cseed)
                }
                .map_err(at(Stage::Cluster))?;
                let hint = spec.prior_hint.unwrap_or(pi);
                Classifier::Clusters(clusters_to_classes(&clustering, hint).map_err(at(Stage::Cluster))?)
            }
            Method::Pn => unreachable!("handled above"),
        };
        Ok(fitted)
    }

    pub fn run_repeat(&self, repeat: usize) -> std::result::Result<RepeatRecord, StageFailure> {
        let data = self.repeat_data(repeat)?;
        let fitted = self.fit(&data)?;
        let accuracy =
            fitted.classifier.accuracy(&data.test).map_err(|e| failure(repeat, data.seed, Stage::Evaluate, e))?;
        let n_pairs = data.pairs.len();
        let similar = data.pairs.iter().filter(|p| p.q.is_plus()).count();
        Ok(RepeatRecord {
            repeat,
            seed: data.seed,
            accuracy,
            n_pairs,
            similar_fraction: if n_pairs == 0 { 0.0 } else { similar as f64 / n_pairs as f64 },
            prior: fitted.prior,
            selected: fitted.selected,
            alpha: fitted.alpha,
            flip_sign: fitted.classifier.flip_sign(),
        })
    }

    pub fn run(&self) -> RunReport {
        let start = Instant::now();
        let mut repeats = Vec::new();
        let mut failures = Vec::new();
        for i in 0..self.spec.repeats {
            match self.run_repeat(i) {
                Ok(r) => repeats.push(r),
                Err(f) => failures.push(f),
            }
        }
        let (mean, std) = if failures.is_empty() {
            let acc: Vec<f64> = repeats.iter().map(|r| r.accuracy).collect();
            let (m, s) = mean_std(&acc);
            (Some(m), Some(s))
        } else {
            (None, None)
        };
        RunReport {
            name: self.spec.name.clone(),
            method: self.spec.method,
            noise: self.spec.noise,
            dataset: self.summary.clone(),
            repeats,
            failures,
            mean,
            std,
            wall_clock_secs: start.elapsed().as_secs_f64(),
        }
    }
}

fn train_model<L: PerExampleLoss>(
    init: &Predictor,
    flat: &[PointwiseSDPoint],
    loss: &L,
    cfg: &sdnoise_core::TrainConfig,
    decision: Decision,
) -> StageResult<Classifier> {
    let trained = sgd_train(init, flat, loss, cfg).map_err(at(Stage::Train))?;
    Ok(Classifier::Model(SavedModel { predictor: trained.predictor, decision }))
}

fn failure(repeat: usize, seed: u64, stage: Stage, e: Error) -> StageFailure {
    StageFailure { repeat, seed, stage, message: e.to_string() }
}

/// Loads the data and runs every repeat.
pub fn run(spec: ExperimentSpec) -> Result<RunReport> {
    Ok(Experiment::new(spec)?.run())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Symmetric noise rate.
    Rate,
    NPairs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub variable: SweepVariable,
    pub rows: Vec<(f64, RunReport)>,
}

impl SweepTable {
    /// `(x, mean accuracy)` for complete rows.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.rows.iter().filter_map(|(x, r)| r.mean.map(|m| (*x, m))).collect()
    }
}

fn check_ascending(values: &[f64], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Spec(format!("{what}: empty sweep")));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Spec(format!("{what}: values must be strictly ascending")));
    }
    Ok(())
}

/// One run per symmetric rate `(r, r)`.
pub fn sweep_noise(template: &ExperimentSpec, rates: &[f64]) -> Result<SweepTable> {
    check_ascending(rates, "sweep-noise")?;
    let mut rows = Vec::with_capacity(rates.len());
    for &r in rates {
        let mut spec = template.clone();
        spec.noise.rates = [r, r];
        spec.name = format!("{}@rate={r}", template.name);
        rows.push((r, run(spec)?));
    }
    Ok(SweepTable { variable: SweepVariable::Rate, rows })
}

/// One run per pair count. A file-backed dataset is loaded once.
pub fn sweep_samples(template: &ExperimentSpec, counts: &[usize]) -> Result<SweepTable> {
    if counts.contains(&0) {
        return Err(Error::Spec("sweep-samples: n_pairs must be at least 1".into()));
    }
    let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    check_ascending(&xs, "sweep-samples")?;
    let mut rows = Vec::with_capacity(counts.len());
    for &c in counts {
        let mut spec = template.clone();
        spec.n_pairs = Some(c);
        spec.name = format!("{}@n_pairs={c}", template.name);
        rows.push((c as f64, run(spec)?));
    }
    Ok(SweepTable { variable: SweepVariable::NPairs, rows })
}

/// Spearman rank correlation with average ranks for ties. `None` when
/// either side is constant or fewer than two points are given.
pub fn spearman(pairs: &[(f64, f64)]) -> Option<f64> {
    if pairs.len() < 2 {
        return None;
    }
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for &k in &idx[i..=j] {
                r[k] = avg;
            }
            i = j + 1;
        }
        r
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (rx, ry) = (ranks(&xs), ranks(&ys));
    let (mx, my) = (mean_std(&rx).0, mean_std(&ry).0);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::{GaussianSpec, TrainSettings};

    fn gaussian_spec(method: Method) -> ExperimentSpec {
        ExperimentSpec {
            name: "t".into(),
            dataset: DatasetRef::Gaussian(GaussianSpec {
                n: 400,
                pi: 0.3,
                mean_pos: vec![2.0, 2.0],
                mean_neg: vec![-2.0, -2.0],
            }),
            method,
            noise: NoiseSpec::default(),
            n_pairs: Some(600),
            pairs_per_point: 10.0,
            repeats: 2,
            seed: 4,
            train_fraction: 0.75,
            train: TrainSettings { arch: crate::spec::ArchTag::Linear, epochs: 5, ..TrainSettings::default() },
            prior: PriorSource::default(),
            prior_hint: None,
            cv: None,
            baseline: Default::default(),
            output: None,
        }
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman(&[(1.0, 2.0), (2.0, 4.0), (3.0, 9.0)]), Some(1.0));
        assert_eq!(spearman(&[(1.0, 3.0), (2.0, 2.0), (3.0, 1.0)]), Some(-1.0));
        assert_eq!(spearman(&[(1.0, 1.0), (2.0, 1.0)]), None);
        let r = spearman(&[(1.0, 1.0), (2.0, 2.0), (3.0, 2.0), (4.0, 3.0)]).unwrap();
        assert!(r > 0.9 && r < 1.0);
    }

    #[test]
    fn mean_std_uses_sample_deviation() {
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[0.5]), (0.5, 0.0));
    }

    #[test]
    fn every_method_runs() {
        for m in [
            Method::TLoss,
            Method::SdLossClean,
            Method::Weighted,
            Method::Unweighted,
            Method::Km,
            Method::KmCop,
            Method::Pn,
        ] {
            let r = run(gaussian_spec(m)).unwrap();
            assert!(r.is_complete(), "{m:?}: {:?}", r.failures);
            assert_eq!(r.repeats.len(), 2);
            assert!(r.mean.unwrap() > 0.9, "{m:?}: {:?}", r.mean);
        }
    }

    #[test]
    fn failures_name_their_stage() {
        let mut s = gaussian_spec(Method::TLoss);
        // Prior 1/2 makes the correction singular.
        s.prior = PriorSource::Fixed(0.5);
        let r = run(s).unwrap();
        assert_eq!(r.failures.len(), 2);
        assert_eq!(r.failures[0].stage, Stage::Train);
        assert!(r.mean.is_none());
    }

    #[test]
    fn sweeps_reject_bad_axes() {
        let s = gaussian_spec(Method::Weighted);
        assert!(sweep_noise(&s, &[0.2, 0.1]).is_err());
        assert!(sweep_samples(&s, &[0, 10]).is_err());
    }
}
