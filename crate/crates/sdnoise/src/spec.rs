//! Experiment configuration, read from TOML.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sdnoise_core::noise::NoiseKind;
use sdnoise_core::{Arch, BaseLoss, NoiseModel, TrainConfig};

use crate::error::{Error, Result};
use crate::loader::DatasetManifest;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Loss correction with the configured (or cross-validated) noise rates.
    TLoss,
    /// The clean S-D loss applied to noisy pairs without correction.
    SdLossClean,
    /// Weighted ERM with the derived (or cross-validated) weight.
    Weighted,
    /// Weighted ERM with the weight fixed at 1/2.
    Unweighted,
    Km,
    KmCop,
    /// Supervised reference trained on the clean class labels.
    Pn,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::TLoss => "t_loss",
            Method::SdLossClean => "sd_loss_clean",
            Method::Weighted => "weighted",
            Method::Unweighted => "unweighted",
            Method::Km => "km",
            Method::KmCop => "km_cop",
            Method::Pn => "pn",
        }
    }

    pub fn is_clustering(self) -> bool {
        matches!(self, Method::Km | Method::KmCop)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseTag {
    Pairing,
    Labeling,
}

impl From<NoiseTag> for NoiseKind {
    fn from(t: NoiseTag) -> Self {
        match t {
            NoiseTag::Pairing => NoiseKind::Pairing,
            NoiseTag::Labeling => NoiseKind::Labeling,
        }
    }
}

/// `{ model = "pairing" | "labeling", rates = [r1, r2] }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub model: NoiseTag,
    pub rates: [f64; 2],
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec { model: NoiseTag::Pairing, rates: [0.0, 0.0] }
    }
}

impl NoiseSpec {
    pub fn to_model(&self) -> Result<NoiseModel> {
        Ok(NoiseModel::new(self.model.into(), self.rates[0], self.rates[1])?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    pub n: usize,
    pub pi: f64,
    pub mean_pos: Vec<f64>,
    pub mean_neg: Vec<f64>,
}

/// Where the class-labeled data comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetRef {
    /// Path to a dataset manifest.
    Manifest(PathBuf),
    /// An inline manifest.
    Csv(DatasetManifest),
    /// Freshly generated for every repeat.
    Gaussian(GaussianSpec),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorKind {
    /// Inverted from the Similar/Dissimilar counts at the configured rates.
    Estimate,
    /// The clean positive fraction of the training split.
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PriorSource {
    Fixed(f64),
    Kind(PriorKind),
}

impl Default for PriorSource {
    fn default() -> Self {
        PriorSource::Kind(PriorKind::Estimate)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArchTag {
    Linear,
    Mlp,
}

impl From<ArchTag> for Arch {
    fn from(t: ArchTag) -> Self {
        match t {
            ArchTag::Linear => Arch::Linear,
            ArchTag::Mlp => Arch::Mlp,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossTag {
    Squared,
    Logistic,
}

impl From<LossTag> for BaseLoss {
    fn from(t: LossTag) -> Self {
        match t {
            LossTag::Squared => BaseLoss::Squared,
            LossTag::Logistic => BaseLoss::Logistic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSettings {
    pub arch: ArchTag,
    pub base_loss: LossTag,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for TrainSettings {
    fn default() -> Self {
        let c = TrainConfig::default();
        TrainSettings {
            arch: ArchTag::Mlp,
            base_loss: LossTag::Squared,
            learning_rate: c.learning_rate,
            momentum: c.momentum,
            epochs: c.epochs,
            batch_size: c.batch_size,
        }
    }
}

impl TrainSettings {
    pub fn config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            momentum: self.momentum,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvSpec {
    #[serde(default = "default_folds")]
    pub folds: usize,
    /// Noise-rate candidates for `t_loss`.
    #[serde(default)]
    pub grid: Vec<[f64; 2]>,
    /// Weight candidates for `weighted`.
    #[serde(default)]
    pub alphas: Vec<f64>,
    /// Training epochs per fold; defaults to the main budget.
    #[serde(default)]
    pub epochs: Option<usize>,
}

fn default_folds() -> usize {
    5
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSettings {
    pub max_iters: usize,
    /// Upper bound on pairs turned into constraints; all pairs when unset.
    pub max_constraints: Option<usize>,
}

impl Default for BaselineSettings {
    fn default() -> Self {
        BaselineSettings { max_iters: 100, max_constraints: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub dataset: DatasetRef,
    pub method: Method,
    #[serde(default)]
    pub noise: NoiseSpec,
    /// Pair count per repeat; overrides `pairs_per_point`.
    #[serde(default)]
    pub n_pairs: Option<usize>,
    /// Pairs per training point when `n_pairs` is unset.
    #[serde(default = "default_pairs_per_point")]
    pub pairs_per_point: f64,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub train: TrainSettings,
    #[serde(default)]
    pub prior: PriorSource,
    /// Side information on which side of 1/2 the prior lies; picks the
    /// estimation branch and the cluster-to-class mapping.
    #[serde(default)]
    pub prior_hint: Option<f64>,
    #[serde(default)]
    pub cv: Option<CvSpec>,
    #[serde(default)]
    pub baseline: BaselineSettings,
    /// Report destination, relative to the output directory.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_pairs_per_point() -> f64 {
    10.0
}

fn default_repeats() -> usize {
    3
}

fn default_train_fraction() -> f64 {
    0.75
}

fn in_open_unit(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

impl ExperimentSpec {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        let mut spec: ExperimentSpec =
            toml::from_str(text).map_err(|e| Error::Config { path: origin.to_path_buf(), message: e.to_string() })?;
        if let Some(dir) = origin.parent() {
            spec.resolve_paths(dir);
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path)
    }

    /// Makes dataset paths relative to `dir` absolute.
    pub fn resolve_paths(&mut self, dir: &Path) {
        match &mut self.dataset {
            DatasetRef::Manifest(p) if p.is_relative() => *p = dir.join(&*p),
            DatasetRef::Csv(m) if m.path.is_relative() => m.path = dir.join(&m.path),
            _ => {}
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Spec(format!("{}: {m}", self.name)));
        if self.repeats == 0 {
            return fail("repeats must be at least 1");
        }
        if self.n_pairs == Some(0) {
            return fail("n_pairs must be at least 1");
        }
        if !(self.pairs_per_point > 0.0 && self.pairs_per_point.is_finite()) {
            return fail("pairs_per_point must be positive");
        }
        if !in_open_unit(self.train_fraction) {
            return fail("train_fraction must lie in (0, 1)");
        }
        self.noise.to_model()?;
        self.train.config(0).validate()?;
        if let PriorSource::Fixed(p) = self.prior {
            if !in_open_unit(p) {
                return fail("a fixed prior must lie in (0, 1)");
            }
        }
        if self.prior_hint.is_some_and(|h| !in_open_unit(h)) {
            return fail("prior_hint must lie in (0, 1)");
        }
        if let DatasetRef::Gaussian(g) = &self.dataset {
            if g.n < 4 || !in_open_unit(g.pi) || g.mean_pos.len() != g.mean_neg.len() || g.mean_pos.is_empty() {
                return fail("gaussian dataset needs n >= 4, pi in (0, 1) and equal nonempty means");
            }
        }
        if let Some(cv) = &self.cv {
            if cv.folds < 2 {
                return fail("cv.folds must be at least 2");
            }
            match self.method {
                Method::TLoss if cv.grid.is_empty() => return fail("t_loss cross-validation needs cv.grid"),
                Method::TLoss if !cv.alphas.is_empty() => return fail("cv.alphas applies to weighted only"),
                Method::Weighted if cv.alphas.is_empty() => return fail("weighted cross-validation needs cv.alphas"),
                Method::Weighted if !cv.grid.is_empty() => return fail("cv.grid applies to t_loss only"),
                Method::TLoss | Method::Weighted => {}
                m => return fail(&format!("method {} takes no cross-validation", m.name())),
            }
            for r in &cv.grid {
                NoiseModel::new(self.noise.model.into(), r[0], r[1])?;
            }
            if cv.alphas.iter().any(|&a| !in_open_unit(a)) {
                return fail("cv.alphas must lie in (0, 1)");
            }
        }
        if self.baseline.max_iters == 0 {
            return fail("baseline.max_iters must be at least 1");
        }
        Ok(())
    }

    /// Pairs to draw for a training split of `n_train` points.
    pub fn pair_count(&self, n_train: usize) -> usize {
        self.n_pairs.unwrap_or_else(|| ((self.pairs_per_point * n_train as f64).round() as usize).max(1))
    }
}
