//! Class-prior recovery from the observed numbers of Similar and Dissimilar
//! pairs. Pair labels cannot tell `pi` from `1 - pi`, so every estimate is
//! tied to an explicit branch.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::noise::{expected_similar_fraction, LabelingNoise, NoiseModel, PairingNoise};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    Low,
    High,
}

impl Branch {
    /// The branch containing `hint`, or `Low` without one.
    pub fn from_hint(hint: Option<f64>) -> Branch {
        match hint {
            Some(h) if h > 0.5 => Branch::High,
            _ => Branch::Low,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PriorEstimate {
    pub pi: f64,
    pub branch: Branch,
    /// `|P(Q = +1 | pi) - n_s / (n_s + n_d)|` at the returned `pi`.
    pub residual: f64,
    /// Every root found, ascending. More than two never occur; a single
    /// entry means both branches coincide.
    pub roots: Vec<f64>,
}

fn observed_fraction(n_s: u64, n_d: u64) -> Result<f64> {
    if n_s == 0 || n_d == 0 {
        return Err(Error::invalid("counts", "n_s and n_d must both be at least 1"));
    }
    Ok(n_s as f64 / (n_s + n_d) as f64)
}

fn check_fraction(f: f64) -> Result<()> {
    if f > 0.0 && f < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("similar fraction", "must lie in (0, 1)"))
    }
}

fn finish(noise: &NoiseModel, roots: Vec<f64>, branch: Branch, target: f64) -> Result<PriorEstimate> {
    let pi = match branch {
        Branch::Low => roots[0],
        Branch::High => roots[roots.len() - 1],
    };
    let residual = (expected_similar_fraction(noise, pi)? - target).abs();
    Ok(PriorEstimate { pi, branch, residual, roots })
}

/// Closed-form inversion under pairing noise.
///
/// With `r = n_s / n_d` and `d = 2 pi (1 - pi)`, the ratio equation is linear
/// in `d`: `d = c1 / (c1 + c2)` for `c1 = (1 - rho_s) - r rho_s` and
/// `c2 = r (1 - rho_d) - rho_d`. Then `pi = (1 -+ sqrt(1 - 2d)) / 2`.
pub fn estimate_prior_pairing(n_s: u64, n_d: u64, noise: &PairingNoise, branch: Branch) -> Result<PriorEstimate> {
    pairing_from_fraction(observed_fraction(n_s, n_d)?, noise, branch)
}

/// [`estimate_prior_pairing`] from the similar fraction `n_s / (n_s + n_d)`.
pub fn pairing_from_fraction(target: f64, noise: &PairingNoise, branch: Branch) -> Result<PriorEstimate> {
    check_fraction(target)?;
    let r = target / (1.0 - target);
    let (rs, rd) = (noise.rho_s(), noise.rho_d());
    let c1 = (1.0 - rs) - r * rs;
    let c2 = r * (1.0 - rd) - rd;
    let sum = c1 + c2;
    if sum <= 0.0 {
        return Err(Error::NegativeCoefficient { sum });
    }
    let mut d = c1 / sum;
    if !(-1e-12..=0.5 + 1e-12).contains(&d) {
        return Err(Error::InfeasibleRatio { d });
    }
    d = d.clamp(0.0, 0.5);
    let root = libm::sqrt(1.0 - 2.0 * d);
    let (lo, hi) = ((1.0 - root) / 2.0, (1.0 + root) / 2.0);
    if lo <= 0.0 {
        return Err(Error::InfeasibleRatio { d });
    }
    let roots = if root == 0.0 { alloc::vec![lo] } else { alloc::vec![lo, hi] };
    finish(&NoiseModel::Pairing(*noise), roots, branch, target)
}

const GRID_LO: f64 = 0.001;
const GRID_HI: f64 = 0.999;
const GRID_STEPS: usize = 9980;

/// Numerical inversion under labeling noise: dense scan of `pi` for sign
/// changes of the forward map, bisection inside each bracket.
pub fn estimate_prior_labeling(n_s: u64, n_d: u64, noise: &LabelingNoise, branch: Branch) -> Result<PriorEstimate> {
    labeling_from_fraction(observed_fraction(n_s, n_d)?, noise, branch)
}

/// [`estimate_prior_labeling`] from the similar fraction `n_s / (n_s + n_d)`.
pub fn labeling_from_fraction(target: f64, noise: &LabelingNoise, branch: Branch) -> Result<PriorEstimate> {
    check_fraction(target)?;
    let model = NoiseModel::Labeling(*noise);
    let g = |pi: f64| expected_similar_fraction(&model, pi).map(|f| f - target);
    let step = (GRID_HI - GRID_LO) / GRID_STEPS as f64;
    let mut roots = Vec::new();
    let mut prev_pi = GRID_LO;
    let mut prev = g(prev_pi)?;
    if prev == 0.0 {
        roots.push(prev_pi);
    }
    for k in 1..=GRID_STEPS {
        let pi = GRID_LO + k as f64 * step;
        let cur = g(pi)?;
        if cur == 0.0 {
            roots.push(pi);
        } else if prev != 0.0 && (prev < 0.0) != (cur < 0.0) {
            roots.push(bisect(&g, prev_pi, pi)?);
        }
        prev_pi = pi;
        prev = cur;
    }
    // The forward map is a parabola in pi_tilde with minimum 1/2; a target
    // at that minimum touches without a sign change.
    if roots.is_empty() {
        let span = 1.0 - noise.rho_plus() - noise.rho_minus();
        let vertex = (0.5 - noise.rho_minus()) / span;
        if (GRID_LO..=GRID_HI).contains(&vertex) && g(vertex)?.abs() < 1e-12 {
            roots.push(vertex);
        }
    }
    if roots.is_empty() {
        return Err(Error::NoRoot { target });
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    finish(&model, roots, branch, target)
}

fn bisect(g: &impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut glo = g(lo)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid)?;
        if gm == 0.0 {
            return Ok(mid);
        }
        if (gm < 0.0) == (glo < 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Dispatches on the noise model.
pub fn estimate_prior(n_s: u64, n_d: u64, noise: &NoiseModel, branch: Branch) -> Result<PriorEstimate> {
    match noise {
        NoiseModel::Pairing(n) => estimate_prior_pairing(n_s, n_d, n, branch),
        NoiseModel::Labeling(n) => estimate_prior_labeling(n_s, n_d, n, branch),
    }
}

/// Dispatches on the noise model, from the similar fraction.
pub fn estimate_prior_from_fraction(fraction: f64, noise: &NoiseModel, branch: Branch) -> Result<PriorEstimate> {
    match noise {
        NoiseModel::Pairing(n) => pairing_from_fraction(fraction, n, branch),
        NoiseModel::Labeling(n) => labeling_from_fraction(fraction, n, branch),
    }
}
