//! K-fold cross-validation of noise rates (loss correction) or of the weight
//! `alpha` (weighted method) on noisy pairs.
//!
//! Folds partition pairs, so both members of a pair are always held out
//! together. Candidates are ranked by a pair-level score that only needs the
//! noisy tags:
//!
//! * loss correction: Brier score of the predicted `P(Q = +1 | x, x')`
//!   implied by the candidate noise model and the squashed score read as
//!   `eta(x) = (1 + t) / 2`;
//! * weighted: the fraction of held-out pairs whose tag disagrees with
//!   whether the two members receive the same predicted sign.
//!
//! The held-out mean corrected loss and held-out `U_alpha` are recorded per
//! candidate as well (`pointwise_score`), but do not drive selection: the
//! corrected loss rewards larger symmetric rates whenever the model
//! overfits, and `U_alpha` evaluated at its own candidate weight changes its
//! scale with `alpha`.

use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::correction::{BaseLoss, CorrectedLoss};
use crate::data::{flatten_pairs, PairPoint, Sign};
use crate::error::{Error, Result};
use crate::model::{sgd_train, Arch, Predictor, TrainConfig};
use crate::noise::{NoiseKind, NoiseModel};
use crate::rng;
use crate::weighted::{u_alpha, WeightedLoss};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CvMethod {
    /// Candidates are rate pairs of the given noise model; `pi` is the prior
    /// used to build each candidate's correction.
    LossCorrection { kind: NoiseKind, pi: f64, base: BaseLoss },
    /// Candidates are weights `alpha`.
    Weighted { base: BaseLoss },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Candidate {
    Rates(f64, f64),
    Alpha(f64),
}

impl Candidate {
    /// Distance from the noise-free setting; exact score ties prefer smaller.
    fn noise_level(&self) -> f64 {
        match *self {
            Candidate::Rates(a, b) => a + b,
            Candidate::Alpha(a) => (a - 0.5).abs(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CvSettings {
    pub arch: Arch,
    pub train: TrainConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidateScore {
    pub candidate: Candidate,
    /// Mean held-out pair-level score; lower is better.
    pub score: f64,
    /// Mean held-out corrected loss or `U_alpha`, for reference.
    pub pointwise_score: f64,
    /// Held-out folds containing a single tag value.
    pub degenerate_folds: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvReport {
    pub scores: Vec<CandidateScore>,
    pub selected: usize,
    pub folds: usize,
}

impl CvReport {
    pub fn selected_candidate(&self) -> Candidate {
        self.scores[self.selected].candidate
    }
}

pub fn cross_validate(
    pairs: &[PairPoint],
    method: &CvMethod,
    grid: &[Candidate],
    folds: usize,
    seed: u64,
    settings: &CvSettings,
) -> Result<CvReport> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("candidate grid"));
    }
    if folds < 2 {
        return Err(Error::invalid("folds", "need at least 2"));
    }
    if folds > pairs.len() {
        return Err(Error::TooFewPoints { needed: folds, got: pairs.len() });
    }
    for c in grid {
        match (method, c) {
            (CvMethod::LossCorrection { .. }, Candidate::Rates(..)) => {}
            (CvMethod::Weighted { .. }, Candidate::Alpha(..)) => {}
            _ => return Err(Error::invalid("grid", "candidate type does not match the method")),
        }
    }
    let d = pairs[0].x.len();
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.shuffle(&mut rng::from_seed(rng::derive_seed(seed, u64::MAX, 0)));
    let fold_of = {
        let mut f = alloc::vec![0usize; pairs.len()];
        for (pos, &i) in order.iter().enumerate() {
            f[i] = pos % folds;
        }
        f
    };

    let mut scores = Vec::with_capacity(grid.len());
    for (j, cand) in grid.iter().enumerate() {
        let mut total = 0.0;
        let mut pointwise = 0.0;
        let mut degenerate = 0;
        for fold in 0..folds {
            let (train, held): (Vec<&PairPoint>, Vec<&PairPoint>) = pairs
                .iter()
                .enumerate()
                .map(|(i, p)| (fold_of[i], p))
                .fold((Vec::new(), Vec::new()), |(mut tr, mut ho), (f, p)| {
                    if f == fold {
                        ho.push(p);
                    } else {
                        tr.push(p);
                    }
                    (tr, ho)
                });
            if held.iter().all(|p| p.q == held[0].q) {
                degenerate += 1;
            }
            let train: Vec<PairPoint> = train.into_iter().cloned().collect();
            let flat = flatten_pairs(&train)?;
            let fold_seed = rng::derive_seed(seed, j as u64, fold as u64);
            let init = Predictor::init(settings.arch, d, rng::derive_seed(fold_seed, 0, 1))?;
            let cfg = TrainConfig { seed: rng::derive_seed(fold_seed, 0, 2), ..settings.train };

            let mut xs = Vec::with_capacity(2 * held.len() * d);
            for p in &held {
                xs.extend_from_slice(&p.x);
                xs.extend_from_slice(&p.x_prime);
            }
            let (pair_score, point_score) = match (*method, *cand) {
                (CvMethod::LossCorrection { kind, pi, base }, Candidate::Rates(r1, r2)) => {
                    let noise = NoiseModel::new(kind, r1, r2)?;
                    let loss = CorrectedLoss::new(base, &noise, pi)?;
                    let model = sgd_train(&init, &flat, &loss, &cfg)?.predictor;
                    let t = model.predict_batch(&xs)?;
                    let mut brier = 0.0;
                    let mut point = 0.0;
                    for (k, p) in held.iter().enumerate() {
                        let (a, b) = (t[2 * k], t[2 * k + 1]);
                        let target = if p.q.is_plus() { 1.0 } else { 0.0 };
                        let prob = similar_probability(&noise, a, b);
                        brier += (prob - target) * (prob - target);
                        point += loss.value(a, p.q) + loss.value(b, p.q);
                    }
                    (brier / held.len() as f64, point / (2 * held.len()) as f64)
                }
                (CvMethod::Weighted { base }, Candidate::Alpha(alpha)) => {
                    let loss = WeightedLoss::new(alpha, base)?;
                    let model = sgd_train(&init, &flat, &loss, &cfg)?.predictor;
                    let t = model.predict_batch(&xs)?;
                    let mut errors = 0usize;
                    let mut labels = Vec::with_capacity(2 * held.len());
                    for (k, p) in held.iter().enumerate() {
                        let same = Sign::of_score(t[2 * k]) == Sign::of_score(t[2 * k + 1]);
                        if same != p.q.is_plus() {
                            errors += 1;
                        }
                        labels.push(p.q);
                        labels.push(p.q);
                    }
                    (errors as f64 / held.len() as f64, u_alpha(&labels, &t, alpha)?)
                }
                _ => unreachable!("checked above"),
            };
            total += pair_score;
            pointwise += point_score;
        }
        scores.push(CandidateScore {
            candidate: *cand,
            score: total / folds as f64,
            pointwise_score: pointwise / folds as f64,
            degenerate_folds: degenerate,
        });
    }

    let mut ranked: Vec<usize> = (0..grid.len()).collect();
    ranked.sort_by(|&a, &b| grid[a].noise_level().total_cmp(&grid[b].noise_level()));
    let mut selected = ranked[0];
    for &i in &ranked[1..] {
        if scores[i].score < scores[selected].score {
            selected = i;
        }
    }
    Ok(CvReport { scores, selected, folds })
}

/// `P(Q = +1)` for a pair whose members have squashed scores `a` and `b`,
/// reading `(1 + t) / 2` as the clean positive posterior.
pub fn similar_probability(noise: &NoiseModel, a: f64, b: f64) -> f64 {
    let eta = |t: f64| (0.5 * (1.0 + t)).clamp(0.0, 1.0);
    let (ea, eb) = (eta(a), eta(b));
    let agree = |u: f64, v: f64| u * v + (1.0 - u) * (1.0 - v);
    match noise {
        NoiseModel::Pairing(n) => {
            let s = agree(ea, eb);
            (1.0 - n.rho_s()) * s + n.rho_d() * (1.0 - s)
        }
        NoiseModel::Labeling(n) => {
            let flip = |e: f64| (1.0 - n.rho_plus()) * e + n.rho_minus() * (1.0 - e);
            agree(flip(ea), flip(eb))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_gaussian_dataset;
    use crate::noise::sample_noisy_pairs;

    fn settings() -> CvSettings {
        CvSettings { arch: Arch::Linear, train: TrainConfig { epochs: 3, ..TrainConfig::default() } }
    }

    fn pairs(n_pairs: usize, seed: u64) -> Vec<PairPoint> {
        let ds = generate_gaussian_dataset(400, 0.3, &[1.0, 1.0], &[-1.0, -1.0], seed).unwrap();
        sample_noisy_pairs(&ds, &NoiseModel::pairing(0.1, 0.1).unwrap(), n_pairs, seed).unwrap()
    }

    #[test]
    fn single_candidate_is_selected() {
        let method = CvMethod::Weighted { base: BaseLoss::Squared };
        let r = cross_validate(&pairs(200, 1), &method, &[Candidate::Alpha(0.4)], 3, 2, &settings()).unwrap();
        assert_eq!(r.selected, 0);
        assert_eq!(r.folds, 3);
    }

    #[test]
    fn report_is_deterministic() {
        let method = CvMethod::LossCorrection { kind: NoiseKind::Pairing, pi: 0.3, base: BaseLoss::Squared };
        let grid = [Candidate::Rates(0.0, 0.0), Candidate::Rates(0.2, 0.2)];
        let p = pairs(300, 3);
        let a = cross_validate(&p, &method, &grid, 3, 9, &settings()).unwrap();
        let b = cross_validate(&p, &method, &grid, 3, 9, &settings()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_setups_are_rejected() {
        let method = CvMethod::Weighted { base: BaseLoss::Squared };
        let p = pairs(5, 4);
        assert!(cross_validate(&p, &method, &[], 2, 0, &settings()).is_err());
        assert!(cross_validate(&p, &method, &[Candidate::Alpha(0.5)], 1, 0, &settings()).is_err());
        assert!(cross_validate(&p, &method, &[Candidate::Alpha(0.5)], 6, 0, &settings()).is_err());
        assert!(cross_validate(&p, &method, &[Candidate::Rates(0.1, 0.1)], 2, 0, &settings()).is_err());
    }

    #[test]
    fn similar_probability_limits() {
        let clean = NoiseModel::clean();
        assert_eq!(similar_probability(&clean, 1.0, 1.0), 1.0);
        assert_eq!(similar_probability(&clean, 1.0, -1.0), 0.0);
        let noisy = NoiseModel::pairing(0.2, 0.1).unwrap();
        assert!((similar_probability(&noisy, 1.0, 1.0) - 0.8).abs() < 1e-15);
        assert!((similar_probability(&noisy, -1.0, 1.0) - 0.1).abs() < 1e-15);
        let lab = NoiseModel::labeling(0.2, 0.1).unwrap();
        // Both clean-positive: each flipped label positive w.p. 0.8.
        assert!((similar_probability(&lab, 1.0, 1.0) - 0.68).abs() < 1e-15);
    }
}
