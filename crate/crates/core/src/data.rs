//! Labeled points, S-D pairs, splits and the Gaussian generator.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng;

/// A binary tag: a class label `y` or a pair label `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const SIMILAR: Sign = Sign::Plus;
    pub const DISSIMILAR: Sign = Sign::Minus;

    pub fn from_bool(positive: bool) -> Sign {
        if positive {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// Sign of a score, with 0 resolving to `Plus`.
    pub fn of_score(t: f64) -> Sign {
        Sign::from_bool(t >= 0.0)
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn is_plus(self) -> bool {
        self == Sign::Plus
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// `Plus` when both signs agree.
    pub fn agreement(self, other: Sign) -> Sign {
        Sign::from_bool(self == other)
    }

    pub(crate) fn index(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledPoint {
    pub x: Vec<f64>,
    pub y: Sign,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairPoint {
    pub x: Vec<f64>,
    pub x_prime: Vec<f64>,
    pub q: Sign,
}

/// One member of a flattened pair, carrying the pair's label.
#[derive(Clone, Debug, PartialEq)]
pub struct PointwiseSDPoint {
    pub x: Vec<f64>,
    pub q: Sign,
}

/// A nonempty collection of labeled points of one dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    points: Vec<LabeledPoint>,
    d: usize,
}

impl Dataset {
    pub fn new(points: Vec<LabeledPoint>) -> Result<Self> {
        let d = points.first().ok_or(Error::EmptyInput("dataset"))?.x.len();
        if d == 0 {
            return Err(Error::invalid("d", "feature dimension must be at least 1"));
        }
        if let Some(p) = points.iter().find(|p| p.x.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: p.x.len() });
        }
        Ok(Dataset { points, d })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[LabeledPoint] {
        &self.points
    }

    pub fn into_points(self) -> Vec<LabeledPoint> {
        self.points
    }

    /// Fraction of points with `y = +1`.
    pub fn positive_fraction(&self) -> f64 {
        let pos = self.points.iter().filter(|p| p.y.is_plus()).count();
        pos as f64 / self.n() as f64
    }

    /// A dataset is usable for training when both classes are present.
    pub fn is_usable(&self) -> bool {
        let p = self.positive_fraction();
        p > 0.0 && p < 1.0
    }

    /// Rescales every column to zero mean and unit (population) variance.
    ///
    /// Columns whose standard deviation is zero up to rounding are removed;
    /// their original indices are returned alongside the new dataset.
    pub fn standardized(&self) -> Result<(Dataset, Vec<usize>)> {
        let n = self.n() as f64;
        let mut mean = alloc::vec![0.0; self.d];
        for p in &self.points {
            for (m, v) in mean.iter_mut().zip(&p.x) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = alloc::vec![0.0; self.d];
        for p in &self.points {
            for ((s, v), m) in var.iter_mut().zip(&p.x).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let sd: Vec<f64> = var.iter().map(|s| libm::sqrt(s / n)).collect();
        let keep: Vec<usize> = (0..self.d).filter(|&j| sd[j] > 1e-12 * libm::fabs(mean[j]).max(1.0)).collect();
        if keep.is_empty() {
            return Err(Error::invalid("features", "every column is constant"));
        }
        let dropped = (0..self.d).filter(|j| !keep.contains(j)).collect();

        let points = self
            .points
            .iter()
            .map(|p| LabeledPoint { x: keep.iter().map(|&j| (p.x[j] - mean[j]) / sd[j]).collect(), y: p.y })
            .collect();
        Ok((Dataset { points, d: keep.len() }, dropped))
    }

    /// Features as one row-major `n x d` buffer.
    pub fn feature_matrix(&self) -> Vec<f64> {
        self.points.iter().flat_map(|p| p.x.iter().copied()).collect()
    }

    pub fn labels(&self) -> Vec<Sign> {
        self.points.iter().map(|p| p.y).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec { train_fraction: 0.75, seed: 0 }
    }
}

/// Random train/test partition with `floor(train_fraction * n)` training points.
pub fn split(dataset: &Dataset, spec: SplitSpec) -> Result<(Dataset, Dataset)> {
    let f = spec.train_fraction;
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::invalid("train_fraction", "must lie in (0, 1)"));
    }
    let n = dataset.n();
    if n < 4 {
        return Err(Error::TooFewPoints { needed: 4, got: n });
    }
    let n_train = libm::floor(f * n as f64) as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::invalid("train_fraction", "split leaves one side empty"));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::from_seed(spec.seed));
    let pick = |ids: &[usize]| -> Vec<LabeledPoint> { ids.iter().map(|&i| dataset.points[i].clone()).collect() };
    let train = Dataset { points: pick(&idx[..n_train]), d: dataset.d };
    let test = Dataset { points: pick(&idx[n_train..]), d: dataset.d };
    Ok((train, test))
}

/// Each pair contributes `(x, q)` then `(x', q)`.
pub fn flatten_pairs(pairs: &[PairPoint]) -> Result<Vec<PointwiseSDPoint>> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("pairs"));
    }
    let mut out = Vec::with_capacity(2 * pairs.len());
    for p in pairs {
        out.push(PointwiseSDPoint { x: p.x.clone(), q: p.q });
        out.push(PointwiseSDPoint { x: p.x_prime.clone(), q: p.q });
    }
    Ok(out)
}

/// Two isotropic unit-variance Gaussian classes; label `+1` with probability `pi`.
pub fn generate_gaussian_dataset(n: usize, pi: f64, mean_pos: &[f64], mean_neg: &[f64], seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    if !(pi > 0.0 && pi < 1.0) {
        return Err(Error::invalid("pi", "must lie in (0, 1)"));
    }
    if mean_pos.len() != mean_neg.len() {
        return Err(Error::DimensionMismatch { expected: mean_pos.len(), found: mean_neg.len() });
    }
    if mean_pos.is_empty() {
        return Err(Error::invalid("mean_pos", "dimension must be at least 1"));
    }
    let mut r = rng::from_seed(seed);
    let points = (0..n)
        .map(|_| {
            let y = Sign::from_bool(r.random::<f64>() < pi);
            let mean = if y.is_plus() { mean_pos } else { mean_neg };
            let x = mean
                .iter()
                .map(|m| {
                    let e: f64 = StandardNormal.sample(&mut r);
                    m + e
                })
                .collect();
            LabeledPoint { x, y }
        })
        .collect();
    Dataset::new(points)
}
