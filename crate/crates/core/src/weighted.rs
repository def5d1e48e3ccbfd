//! Weighted (cost-sensitive) classification on noisy S-D data.
//!
//! With `eta_Q(x) = alpha2 + (alpha1 - alpha2) eta(x)`, the weight
//! `alpha = (alpha1 + alpha2) / 2` makes the `U_alpha` risk on noisy pairs an
//! affine function of the clean 0-1 risk with slope `A = (alpha1 - alpha2) / 2`.
//! When `A < 0` the minimizer is the negated clean Bayes classifier.

use crate::correction::{BaseLoss, SINGULAR_TOLERANCE};
use crate::data::{PointwiseSDPoint, Sign};
use crate::error::{Error, Result};
use crate::noise::{posterior_coefficients, NoiseModel};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedRiskParams {
    pub alpha: f64,
    /// Slope relating the weighted noisy risk to the clean risk.
    pub a: f64,
    /// The value of `eta(x)` at which the noisy-S-D Bayes classifier
    /// (threshold 1/2 on `eta_Q`) switches sign.
    pub threshold: f64,
    pub flip_sign: bool,
}

pub fn weighted_params(noise: &NoiseModel, pi: f64) -> Result<WeightedRiskParams> {
    let c = posterior_coefficients(noise, pi)?;
    let den = c.alpha1 - c.alpha2;
    if den.abs() <= SINGULAR_TOLERANCE {
        return Err(Error::DegenerateThreshold { denominator: den });
    }
    let a = den / 2.0;
    Ok(WeightedRiskParams {
        alpha: (c.alpha1 + c.alpha2) / 2.0,
        a,
        threshold: (0.5 - c.alpha2) / den,
        flip_sign: a < 0.0,
    })
}

/// `sign(score)` with 0 mapped to `+1`, negated when `flip_sign` is set.
pub fn classify(score: f64, params: &WeightedRiskParams) -> Sign {
    let s = Sign::of_score(score);
    if params.flip_sign {
        s.flipped()
    } else {
        s
    }
}

/// `(1 - alpha) 1[q=+1] l(t) + alpha 1[q=-1] l(-t)` for a margin loss `l`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedLoss {
    pub alpha: f64,
    pub base: BaseLoss,
}

impl WeightedLoss {
    pub fn new(alpha: f64, base: BaseLoss) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid("alpha", "must lie in (0, 1)"));
        }
        Ok(WeightedLoss { alpha, base })
    }

    pub fn value(&self, t: f64, q: Sign) -> f64 {
        match q {
            Sign::Plus => (1.0 - self.alpha) * self.base.margin(t),
            Sign::Minus => self.alpha * self.base.margin(-t),
        }
    }

    pub fn derivative(&self, t: f64, q: Sign) -> f64 {
        match q {
            Sign::Plus => (1.0 - self.alpha) * self.base.margin_derivative(t),
            Sign::Minus => -self.alpha * self.base.margin_derivative(-t),
        }
    }
}

/// Empirical `U_alpha`: `(1 - alpha)` per positive scored `<= 0`, `alpha` per
/// negative scored `> 0`.
pub fn weighted_zero_one_risk(points: &[PointwiseSDPoint], scores: &[f64], alpha: f64) -> Result<f64> {
    if points.len() != scores.len() {
        return Err(Error::LengthMismatch { left: points.len(), right: scores.len() });
    }
    let labels: alloc::vec::Vec<Sign> = points.iter().map(|p| p.q).collect();
    u_alpha(&labels, scores, alpha)
}

/// [`weighted_zero_one_risk`] on bare labels.
pub fn u_alpha(labels: &[Sign], scores: &[f64], alpha: f64) -> Result<f64> {
    if labels.len() != scores.len() {
        return Err(Error::LengthMismatch { left: labels.len(), right: scores.len() });
    }
    if labels.is_empty() {
        return Err(Error::EmptyInput("points"));
    }
    let total: f64 = labels
        .iter()
        .zip(scores)
        .map(|(q, &t)| match q {
            Sign::Plus if t <= 0.0 => 1.0 - alpha,
            Sign::Minus if t > 0.0 => alpha,
            _ => 0.0,
        })
        .sum();
    Ok(total / labels.len() as f64)
}

/// Brute-force sweep of one-dimensional cuts minimizing empirical `U_alpha`.
///
/// Candidates are midpoints between consecutive distinct sorted values, plus
/// the two outer cuts. Both orientations are considered: `upper_positive`
/// scores `x > cut` as positive, otherwise `x < cut` is. Returns the best cut,
/// its orientation and its risk; ties keep the first (smallest) cut.
pub fn best_threshold(values: &[f64], labels: &[Sign], alpha: f64) -> Result<ThresholdSweep> {
    if values.len() != labels.len() {
        return Err(Error::LengthMismatch { left: values.len(), right: labels.len() });
    }
    if values.is_empty() {
        return Err(Error::EmptyInput("values"));
    }
    let mut order: alloc::vec::Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let n = values.len() as f64;
    let w_pos = 1.0 - alpha;
    let w_neg = alpha;
    let total_pos = labels.iter().filter(|q| q.is_plus()).count() as f64;
    let total_neg = n - total_pos;

    let mut best: Option<ThresholdSweep> = None;
    let (mut below_pos, mut below_neg) = (0.0, 0.0);
    let mut consider = |cut: f64, below_pos: f64, below_neg: f64| {
        // Positive above the cut: positives below and negatives above are errors.
        let up = (w_pos * below_pos + w_neg * (total_neg - below_neg)) / n;
        // Positive below the cut.
        let down = (w_neg * below_neg + w_pos * (total_pos - below_pos)) / n;
        for (risk, upper_positive) in [(up, true), (down, false)] {
            if best.is_none_or(|b| risk < b.risk) {
                best = Some(ThresholdSweep { cut, upper_positive, risk });
            }
        }
    };
    let first = values[order[0]];
    consider(first - 1.0, 0.0, 0.0);
    for (k, &i) in order.iter().enumerate() {
        if labels[i].is_plus() {
            below_pos += 1.0;
        } else {
            below_neg += 1.0;
        }
        let next = order.get(k + 1).map(|&j| values[j]);
        match next {
            Some(v) if v == values[i] => continue,
            Some(v) => consider(0.5 * (values[i] + v), below_pos, below_neg),
            None => consider(values[i] + 1.0, below_pos, below_neg),
        }
    }
    Ok(best.expect("nonempty input yields a candidate"))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdSweep {
    pub cut: f64,
    pub upper_positive: bool,
    pub risk: f64,
}
