//! Backward loss correction.
//!
//! `T = [[alpha1, alpha2], [beta1, beta2]]` maps the clean class posterior
//! to the noisy S/D posterior: `P(Q = q | x) = sum_y T[q][y] P(Y = y | x)`.
//! The corrected loss `l~(t, q) = sum_y M[q][y] l(t, y)` with `M = (T^-1)^T`
//! satisfies `E_Q[l~(t, Q) | x] = E_Y[l(t, Y) | x]` for every `x`, which makes
//! the empirical corrected risk an unbiased estimate of the clean risk.

use crate::data::Sign;
use crate::error::{Error, Result};
use crate::noise::{modified_prior, posterior_coefficients, NoiseModel};

pub const SINGULAR_TOLERANCE: f64 = 1e-8;

pub type Matrix2 = [[f64; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrectionMatrix {
    entries: Matrix2,
    det: f64,
}

impl CorrectionMatrix {
    /// Rows `(alpha1, alpha2)` and `(beta1, beta2)`.
    pub fn build(noise: &NoiseModel, pi: f64) -> Result<Self> {
        let c = posterior_coefficients(noise, pi)?;
        let m = Self::from_entries([[c.alpha1, c.alpha2], [c.beta1, c.beta2]]);
        if m.det.abs() <= SINGULAR_TOLERANCE {
            return Err(Error::SingularCorrection { det: m.det });
        }
        Ok(m)
    }

    pub fn from_entries(entries: Matrix2) -> Self {
        let det = entries[0][0] * entries[1][1] - entries[0][1] * entries[1][0];
        CorrectionMatrix { entries, det }
    }

    pub fn entries(&self) -> Matrix2 {
        self.entries
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn inverse(&self) -> Result<Matrix2> {
        invert_t(self)
    }
}

/// Closed-form 2x2 inverse.
pub fn invert_t(t: &CorrectionMatrix) -> Result<Matrix2> {
    if t.det.abs() <= SINGULAR_TOLERANCE {
        return Err(Error::SingularCorrection { det: t.det });
    }
    let [[a, b], [c, d]] = t.entries;
    let k = 1.0 / t.det;
    Ok([[d * k, -b * k], [-c * k, a * k]])
}

/// Margin losses `l(t, y) = phi(t y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BaseLoss {
    /// `(1 - u)^2`, equal to `(t - y)^2` for `y` in `{-1, +1}`.
    Squared,
    /// `ln(1 + e^-u)`.
    Logistic,
}

impl BaseLoss {
    pub fn margin(self, u: f64) -> f64 {
        match self {
            BaseLoss::Squared => (1.0 - u) * (1.0 - u),
            BaseLoss::Logistic => softplus(-u),
        }
    }

    pub fn margin_derivative(self, u: f64) -> f64 {
        match self {
            BaseLoss::Squared => -2.0 * (1.0 - u),
            BaseLoss::Logistic => -sigmoid(-u),
        }
    }

    pub fn value(self, t: f64, y: Sign) -> f64 {
        self.margin(t * y.value())
    }

    pub fn derivative(self, t: f64, y: Sign) -> f64 {
        y.value() * self.margin_derivative(t * y.value())
    }
}

pub(crate) fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + libm::log1p(libm::exp(-z))
    } else {
        libm::log1p(libm::exp(z))
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// How the inverse matrix combines the base-loss pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Convention {
    /// `l~(t, q) = sum_y T^-1[y][q] l(t, y)`; the unbiased combination.
    #[default]
    Unbiased,
    /// `l~(t, q) = sum_y T^-1[q][y] l(t, y)`; row of the inverse selected by `q`.
    /// Biased when `T` is asymmetric; kept for diagnostics.
    RowOfInverse,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrectedLoss {
    base: BaseLoss,
    /// `coeffs[q][y]` multiplies `l(t, y)` for pair label `q`.
    coeffs: Matrix2,
}

impl CorrectedLoss {
    pub fn new(base: BaseLoss, noise: &NoiseModel, pi: f64) -> Result<Self> {
        Self::with_convention(base, noise, pi, Convention::Unbiased)
    }

    /// The noise-free S-D loss for prior `pi`.
    pub fn clean(base: BaseLoss, pi: f64) -> Result<Self> {
        Self::new(base, &NoiseModel::clean(), pi)
    }

    pub fn with_convention(base: BaseLoss, noise: &NoiseModel, pi: f64, convention: Convention) -> Result<Self> {
        let inv = CorrectionMatrix::build(noise, pi)?.inverse()?;
        let coeffs = match convention {
            Convention::Unbiased => [[inv[0][0], inv[1][0]], [inv[0][1], inv[1][1]]],
            Convention::RowOfInverse => inv,
        };
        Ok(CorrectedLoss { base, coeffs })
    }

    pub fn base(&self) -> BaseLoss {
        self.base
    }

    pub fn coefficients(&self) -> Matrix2 {
        self.coeffs
    }

    pub fn value(&self, t: f64, q: Sign) -> f64 {
        let c = self.coeffs[q.index()];
        c[0] * self.base.value(t, Sign::Plus) + c[1] * self.base.value(t, Sign::Minus)
    }

    pub fn derivative(&self, t: f64, q: Sign) -> f64 {
        let c = self.coeffs[q.index()];
        c[0] * self.base.derivative(t, Sign::Plus) + c[1] * self.base.derivative(t, Sign::Minus)
    }
}

/// Sufficient condition for the corrected squared loss to be convex in `t`.
///
/// The rate ratio `(1 - 2 r1) / (1 - 2 r2)` must lie between `(1 - p) / p`
/// and `p / (1 - p)`, where `p` is the prior (pairing) or the modified prior
/// (labeling).
pub fn convexity_condition(noise: &NoiseModel, pi: f64) -> Result<bool> {
    crate::noise::check_prior(pi)?;
    let (r1, r2) = noise.rates();
    let den = 1.0 - 2.0 * r2;
    if den.abs() < 1e-12 || (1.0 - 2.0 * r1).abs() < 1e-12 {
        return Err(Error::DegenerateRate);
    }
    let ratio = (1.0 - 2.0 * r1) / den;
    let p = match noise {
        NoiseModel::Pairing(_) => pi,
        NoiseModel::Labeling(n) => modified_prior(pi, n)?,
    };
    let (a, b) = ((1.0 - p) / p, p / (1.0 - p));
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    Ok(lo <= ratio && ratio <= hi)
}

/// Second differences `(f(t+h) - 2 f(t) + f(t-h)) / h^2` on `[lo, hi]`.
pub fn second_differences(f: impl Fn(f64) -> f64, lo: f64, hi: f64, h: f64) -> alloc::vec::Vec<f64> {
    let steps = libm::round((hi - lo) / h) as usize;
    (1..steps)
        .map(|i| {
            let t = lo + i as f64 * h;
            (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h)
        })
        .collect()
}
