//! Pairing and labeling corruption, pair sampling and the posterior mixing
//! coefficients that tie noisy S/D posteriors to the clean class posterior.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::data::{Dataset, LabeledPoint, PairPoint};
use crate::error::{Error, Result};
use crate::rng;

fn check_rate(name: &'static str, r: f64) -> Result<()> {
    if r.is_finite() && (0.0..0.5).contains(&r) {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{r} is outside [0, 0.5)")))
    }
}

pub(crate) fn check_prior(pi: f64) -> Result<()> {
    if pi > 0.0 && pi < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("pi", format!("{pi} is outside (0, 1)")))
    }
}

/// S/D tags flip after a pair is drawn: S to D with `rho_s`, D to S with `rho_d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairingNoise {
    rho_s: f64,
    rho_d: f64,
}

impl PairingNoise {
    pub fn new(rho_s: f64, rho_d: f64) -> Result<Self> {
        check_rate("rho_s", rho_s)?;
        check_rate("rho_d", rho_d)?;
        Ok(PairingNoise { rho_s, rho_d })
    }

    pub fn rho_s(&self) -> f64 {
        self.rho_s
    }

    pub fn rho_d(&self) -> f64 {
        self.rho_d
    }
}

/// Class labels flip before pairing: `+1` with `rho_plus`, `-1` with `rho_minus`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabelingNoise {
    rho_plus: f64,
    rho_minus: f64,
}

impl LabelingNoise {
    pub fn new(rho_plus: f64, rho_minus: f64) -> Result<Self> {
        check_rate("rho_plus", rho_plus)?;
        check_rate("rho_minus", rho_minus)?;
        Ok(LabelingNoise { rho_plus, rho_minus })
    }

    pub fn rho_plus(&self) -> f64 {
        self.rho_plus
    }

    pub fn rho_minus(&self) -> f64 {
        self.rho_minus
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseModel {
    Pairing(PairingNoise),
    Labeling(LabelingNoise),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NoiseKind {
    Pairing,
    Labeling,
}

impl NoiseModel {
    pub fn clean() -> Self {
        NoiseModel::Pairing(PairingNoise { rho_s: 0.0, rho_d: 0.0 })
    }

    pub fn pairing(rho_s: f64, rho_d: f64) -> Result<Self> {
        PairingNoise::new(rho_s, rho_d).map(NoiseModel::Pairing)
    }

    pub fn labeling(rho_plus: f64, rho_minus: f64) -> Result<Self> {
        LabelingNoise::new(rho_plus, rho_minus).map(NoiseModel::Labeling)
    }

    pub fn new(kind: NoiseKind, r1: f64, r2: f64) -> Result<Self> {
        match kind {
            NoiseKind::Pairing => Self::pairing(r1, r2),
            NoiseKind::Labeling => Self::labeling(r1, r2),
        }
    }

    pub fn kind(&self) -> NoiseKind {
        match self {
            NoiseModel::Pairing(_) => NoiseKind::Pairing,
            NoiseModel::Labeling(_) => NoiseKind::Labeling,
        }
    }

    /// `(rho_s, rho_d)` or `(rho_plus, rho_minus)`.
    pub fn rates(&self) -> (f64, f64) {
        match self {
            NoiseModel::Pairing(n) => (n.rho_s, n.rho_d),
            NoiseModel::Labeling(n) => (n.rho_plus, n.rho_minus),
        }
    }

    pub fn is_clean(&self) -> bool {
        self.rates() == (0.0, 0.0)
    }
}

/// `alpha_k` is `P(Q = +1 | Y = y_k)` under the noisy process, with
/// `y_1 = +1` and `y_2 = -1`; `beta_k = 1 - alpha_k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PosteriorCoefficients {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl PosteriorCoefficients {
    fn from_alphas(alpha1: f64, alpha2: f64) -> Self {
        PosteriorCoefficients { alpha1, alpha2, beta1: 1.0 - alpha1, beta2: 1.0 - alpha2 }
    }

    /// Noisy similar-posterior `P(Q = +1 | x)` given the clean `eta(x)`.
    pub fn noisy_posterior(&self, eta: f64) -> f64 {
        self.alpha1 * eta + self.alpha2 * (1.0 - eta)
    }
}

/// Positive-class probability after label flipping.
pub fn modified_prior(pi: f64, noise: &LabelingNoise) -> Result<f64> {
    check_prior(pi)?;
    Ok(pi * (1.0 - noise.rho_plus) + (1.0 - pi) * noise.rho_minus)
}

pub fn posterior_coefficients(noise: &NoiseModel, pi: f64) -> Result<PosteriorCoefficients> {
    check_prior(pi)?;
    let (a1, a2) = match noise {
        NoiseModel::Pairing(n) => {
            // The partner is positive with probability pi.
            let a1 = (1.0 - n.rho_s) * pi + n.rho_d * (1.0 - pi);
            let a2 = n.rho_d * pi + (1.0 - n.rho_s) * (1.0 - pi);
            (a1, a2)
        }
        NoiseModel::Labeling(n) => {
            // The point keeps or flips its own label; the partner's flipped
            // label is positive with probability pi_tilde.
            let pt = modified_prior(pi, n)?;
            let a1 = (1.0 - n.rho_plus) * pt + n.rho_plus * (1.0 - pt);
            let a2 = n.rho_minus * pt + (1.0 - n.rho_minus) * (1.0 - pt);
            (a1, a2)
        }
    };
    Ok(PosteriorCoefficients::from_alphas(a1, a2))
}

/// Which clean densities a [`SimilarMixture`] mixes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixtureBasis {
    /// Weights on the clean similar and dissimilar point-wise densities.
    SimilarDissimilar,
    /// Weights on the positive and negative class-conditional densities.
    PositiveNegative,
}

/// The point-wise density of noisy Similar data as a two-component mixture.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimilarMixture {
    pub basis: MixtureBasis,
    /// Per-component flip weights before accounting for component mass.
    pub raw: [f64; 2],
    /// Normalized mixture proportions; they sum to 1.
    pub weights: [f64; 2],
}

pub fn noisy_similar_mixture_weights(noise: &NoiseModel, pi: f64) -> Result<SimilarMixture> {
    check_prior(pi)?;
    match noise {
        NoiseModel::Pairing(n) => {
            let s = pi * pi + (1.0 - pi) * (1.0 - pi);
            let d = 1.0 - s;
            let raw = [1.0 - n.rho_s, n.rho_d];
            let mass = [raw[0] * s, raw[1] * d];
            let z = mass[0] + mass[1];
            Ok(SimilarMixture { basis: MixtureBasis::SimilarDissimilar, raw, weights: [mass[0] / z, mass[1] / z] })
        }
        NoiseModel::Labeling(_) => {
            let c = posterior_coefficients(noise, pi)?;
            let raw = [pi * c.alpha1, (1.0 - pi) * c.alpha2];
            let z = raw[0] + raw[1];
            Ok(SimilarMixture { basis: MixtureBasis::PositiveNegative, raw, weights: [raw[0] / z, raw[1] / z] })
        }
    }
}

/// `P(Q = +1)` for a pair drawn under the noisy process.
pub fn expected_similar_fraction(noise: &NoiseModel, pi: f64) -> Result<f64> {
    check_prior(pi)?;
    Ok(match noise {
        NoiseModel::Pairing(n) => {
            let s = pi * pi + (1.0 - pi) * (1.0 - pi);
            (1.0 - n.rho_s) * s + n.rho_d * (1.0 - s)
        }
        NoiseModel::Labeling(n) => {
            let pt = modified_prior(pi, n)?;
            pt * pt + (1.0 - pt) * (1.0 - pt)
        }
    })
}

/// Draws both members uniformly with replacement; `q = +1` iff labels agree.
pub fn sample_clean_pairs(dataset: &Dataset, n_pairs: usize, seed: u64) -> Result<Vec<PairPoint>> {
    let pts = dataset.points();
    if pts.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: pts.len() });
    }
    if n_pairs == 0 {
        return Err(Error::invalid("n_pairs", "must be at least 1"));
    }
    let mut r = rng::from_seed(seed);
    Ok((0..n_pairs)
        .map(|_| {
            let a = &pts[r.random_range(0..pts.len())];
            let b = &pts[r.random_range(0..pts.len())];
            PairPoint { x: a.x.clone(), x_prime: b.x.clone(), q: a.y.agreement(b.y) }
        })
        .collect())
}

pub fn corrupt_pairing(pairs: &[PairPoint], noise: &PairingNoise, seed: u64) -> Vec<PairPoint> {
    let mut r = rng::from_seed(seed);
    pairs
        .iter()
        .map(|p| {
            let rate = if p.q.is_plus() { noise.rho_s } else { noise.rho_d };
            let flip = r.random::<f64>() < rate;
            PairPoint { q: if flip { p.q.flipped() } else { p.q }, ..p.clone() }
        })
        .collect()
}

pub fn corrupt_labeling(dataset: &Dataset, noise: &LabelingNoise, seed: u64) -> Dataset {
    let mut r = rng::from_seed(seed);
    let points = dataset
        .points()
        .iter()
        .map(|p| {
            let rate = if p.y.is_plus() { noise.rho_plus } else { noise.rho_minus };
            let flip = r.random::<f64>() < rate;
            LabeledPoint { x: p.x.clone(), y: if flip { p.y.flipped() } else { p.y } }
        })
        .collect();
    Dataset::new(points).expect("corruption preserves shape")
}

/// Clean pairs followed by the configured corruption.
///
/// Labeling noise flips the labels first and forms noiseless pairs from the
/// flipped labels; pairing noise flips the tags of clean pairs.
pub fn sample_noisy_pairs(dataset: &Dataset, noise: &NoiseModel, n_pairs: usize, seed: u64) -> Result<Vec<PairPoint>> {
    match noise {
        NoiseModel::Pairing(n) => {
            let clean = sample_clean_pairs(dataset, n_pairs, rng::derive_seed(seed, 1, 0))?;
            Ok(corrupt_pairing(&clean, n, rng::derive_seed(seed, 2, 0)))
        }
        NoiseModel::Labeling(n) => {
            let flipped = corrupt_labeling(dataset, n, rng::derive_seed(seed, 3, 0));
            sample_clean_pairs(&flipped, n_pairs, rng::derive_seed(seed, 1, 0))
        }
    }
}

impl core::fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            NoiseKind::Pairing => "pairing",
            NoiseKind::Labeling => "labeling",
        })
    }
}

impl core::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pairing" => Ok(NoiseKind::Pairing),
            "labeling" => Ok(NoiseKind::Labeling),
            _ => Err(Error::invalid("noise model", format!("unknown model `{s}`"))),
        }
    }
}
