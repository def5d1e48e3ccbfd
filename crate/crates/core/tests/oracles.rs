//! Exact expectation oracles on small discrete instances.
//!
//! The noisy posterior of each point is derived here by enumerating the
//! partner's label and every flip, independently of the library's
//! coefficient formulas.

#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdnoise_core::correction::{convexity_condition, invert_t, second_differences};
use sdnoise_core::noise::posterior_coefficients;
use sdnoise_core::weighted::{classify, weighted_params};
use sdnoise_core::{BaseLoss, CorrectedLoss, CorrectionMatrix, NoiseModel, Sign};

/// A finite distribution over points with known clean posteriors.
struct Instance {
    mass: Vec<f64>,
    eta: Vec<f64>,
}

impl Instance {
    fn prior(&self) -> f64 {
        self.mass.iter().zip(&self.eta).map(|(m, e)| m * e).sum()
    }
}

/// `P(Q = +1 | x)` for a point with clean posterior `eta` whose partner is
/// drawn from the same distribution.
fn noisy_posterior_by_enumeration(noise: &NoiseModel, pi: f64, eta: f64) -> f64 {
    match *noise {
        NoiseModel::Pairing(n) => {
            let mut p = 0.0;
            for (py, y) in [(eta, 1), (1.0 - eta, -1)] {
                for (py2, y2) in [(pi, 1), (1.0 - pi, -1)] {
                    let keep_similar = if y == y2 { 1.0 - n.rho_s() } else { n.rho_d() };
                    p += py * py2 * keep_similar;
                }
            }
            p
        }
        NoiseModel::Labeling(n) => {
            let own = eta * (1.0 - n.rho_plus()) + (1.0 - eta) * n.rho_minus();
            let partner = pi * (1.0 - n.rho_plus()) + (1.0 - pi) * n.rho_minus();
            own * partner + (1.0 - own) * (1.0 - partner)
        }
    }
}

fn clean_risk(inst: &Instance, scores: &[f64], base: BaseLoss) -> f64 {
    (0..inst.mass.len())
        .map(|k| {
            let (e, t) = (inst.eta[k], scores[k]);
            inst.mass[k] * (e * base.value(t, Sign::Plus) + (1.0 - e) * base.value(t, Sign::Minus))
        })
        .sum()
}

fn noisy_corrected_risk(inst: &Instance, scores: &[f64], noise: &NoiseModel, loss: &CorrectedLoss) -> f64 {
    let pi = inst.prior();
    (0..inst.mass.len())
        .map(|k| {
            let eq = noisy_posterior_by_enumeration(noise, pi, inst.eta[k]);
            let t = scores[k];
            inst.mass[k] * (eq * loss.value(t, Sign::Plus) + (1.0 - eq) * loss.value(t, Sign::Minus))
        })
        .sum()
}

/// Three points whose posteriors average to `pi`: two free posteriors and a
/// third solved for, rejected when it leaves `[0, 1]`.
fn instance_with_prior(pi: f64, e1: f64, e2: f64) -> Option<Instance> {
    let mass = vec![0.3, 0.3, 0.4];
    let e3 = (pi - 0.3 * e1 - 0.3 * e2) / 0.4;
    (0.0..=1.0).contains(&e3).then(|| Instance { mass, eta: vec![e1, e2, e3] })
}

fn noise_strategy() -> impl Strategy<Value = NoiseModel> {
    (any::<bool>(), 0.0..0.45f64, 0.0..0.45f64).prop_map(|(pairing, a, b)| {
        if pairing {
            NoiseModel::pairing(a, b).unwrap()
        } else {
            NoiseModel::labeling(a, b).unwrap()
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn corrected_loss_is_unbiased(
        noise in noise_strategy(),
        pi in 0.05..0.95f64,
        e1 in 0.0..1.0f64,
        e2 in 0.0..1.0f64,
        scores in prop::collection::vec(-1.0..1.0f64, 3),
        logistic in any::<bool>(),
    ) {
        let inst = instance_with_prior(pi, e1, e2);
        prop_assume!(inst.is_some());
        let inst = inst.unwrap();
        let t = CorrectionMatrix::build(&noise, pi);
        prop_assume!(t.as_ref().is_ok_and(|t| t.det().abs() > 1e-3));
        let base = if logistic { BaseLoss::Logistic } else { BaseLoss::Squared };
        let loss = CorrectedLoss::new(base, &noise, pi).unwrap();
        let noisy = noisy_corrected_risk(&inst, &scores, &noise, &loss);
        let clean = clean_risk(&inst, &scores, base);
        let tol = 1e-10 * (1.0 / t.unwrap().det().abs()).max(1.0);
        prop_assert!((noisy - clean).abs() < tol, "noisy {noisy} clean {clean}");
    }

    #[test]
    fn weighted_risk_is_affine_in_clean_risk(
        noise in noise_strategy(),
        pi in 0.05..0.95f64,
        e1 in 0.0..1.0f64,
        e2 in 0.0..1.0f64,
    ) {
        let inst = instance_with_prior(pi, e1, e2);
        prop_assume!(inst.is_some());
        let inst = inst.unwrap();
        let params = weighted_params(&noise, pi);
        prop_assume!(params.is_ok());
        let p = params.unwrap();
        let mut gaps = Vec::new();
        // Every deterministic classifier on three points, plus randomized ones.
        for mask in 0..8u32 {
            for soft in [0.0, 0.25] {
                let prob_pos: Vec<f64> = (0..3)
                    .map(|k| if mask >> k & 1 == 1 { 1.0 - soft } else { soft })
                    .collect();
                let (mut noisy, mut clean) = (0.0, 0.0);
                for k in 0..3 {
                    let eq = noisy_posterior_by_enumeration(&noise, pi, inst.eta[k]);
                    let f = prob_pos[k];
                    noisy += inst.mass[k] * ((1.0 - p.alpha) * eq * (1.0 - f) + p.alpha * (1.0 - eq) * f);
                    clean += inst.mass[k] * (inst.eta[k] * (1.0 - f) + (1.0 - inst.eta[k]) * f);
                }
                gaps.push(noisy - p.a * clean);
            }
        }
        let spread = gaps.iter().cloned().fold(f64::MIN, f64::max) - gaps.iter().cloned().fold(f64::MAX, f64::min);
        prop_assert!(spread < 1e-10, "spread {spread}");
    }

    #[test]
    fn determinant_identity(noise in noise_strategy(), pi in 0.01..0.99f64) {
        let c = posterior_coefficients(&noise, pi).unwrap();
        let expected = match noise {
            NoiseModel::Pairing(n) => (2.0 * pi - 1.0) * (1.0 - n.rho_s() - n.rho_d()),
            NoiseModel::Labeling(n) => {
                let pt = pi * (1.0 - n.rho_plus()) + (1.0 - pi) * n.rho_minus();
                (2.0 * pt - 1.0) * (1.0 - n.rho_plus() - n.rho_minus())
            }
        };
        prop_assert!((c.alpha1 - c.alpha2 - expected).abs() < 1e-10);
        prop_assert!((c.alpha1 + c.beta1 - 1.0).abs() < 1e-12);
        prop_assert!((c.alpha2 + c.beta2 - 1.0).abs() < 1e-12);
        if let Ok(t) = CorrectionMatrix::build(&noise, pi) {
            prop_assert!((t.det() - expected).abs() < 1e-10);
            let inv = invert_t(&t).unwrap();
            let m = t.entries();
            for i in 0..2 {
                for j in 0..2 {
                    let prod: f64 = (0..2).map(|k| m[i][k] * inv[k][j]).sum();
                    let id = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((prod - id).abs() < 1e-10 / t.det().abs().min(1.0));
                }
            }
        }
    }

    #[test]
    fn noisy_bayes_sign_matches_flipped_threshold(noise in noise_strategy(), pi in 0.05..0.95f64) {
        let params = weighted_params(&noise, pi);
        prop_assume!(params.is_ok());
        let p = params.unwrap();
        for i in 1..1000 {
            let eta = i as f64 / 1000.0;
            if (eta - p.threshold).abs() < 1e-9 {
                continue;
            }
            let eq = noisy_posterior_by_enumeration(&noise, pi, eta);
            if (eq - 0.5).abs() < 1e-12 {
                continue;
            }
            let noisy = Sign::from_bool(eq > 0.5);
            // classify() turns the noisy-Bayes sign back into the clean one.
            let clean = Sign::from_bool(eta > p.threshold);
            prop_assert_eq!(classify(noisy.value(), &p), clean, "eta {}", eta);
        }
    }

    #[test]
    fn convex_when_condition_holds(noise in noise_strategy(), pi in 0.05..0.95f64) {
        prop_assume!(CorrectionMatrix::build(&noise, pi).is_ok());
        prop_assume!(convexity_condition(&noise, pi).unwrap_or(false));
        let loss = CorrectedLoss::new(BaseLoss::Squared, &noise, pi).unwrap();
        for q in [Sign::Plus, Sign::Minus] {
            let dd = second_differences(|t| loss.value(t, q), -3.0, 3.0, 0.01);
            let min = dd.iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert!(min >= -1e-8, "min second difference {min}");
        }
    }
}

#[test]
fn clean_loss_matches_closed_form_on_grid() {
    for pi in [0.1, 0.2, 0.35, 0.7] {
        for base in [BaseLoss::Squared, BaseLoss::Logistic] {
            let loss = CorrectedLoss::clean(base, pi).unwrap();
            for i in 0..=400 {
                let t = -2.0 + i as f64 * 0.01;
                let k = 2.0 * pi - 1.0;
                let plus = pi / k * base.margin(t) - (1.0 - pi) / k * base.margin(-t);
                let minus = pi / k * base.margin(-t) - (1.0 - pi) / k * base.margin(t);
                assert!((loss.value(t, Sign::Plus) - plus).abs() < 1e-10);
                assert!((loss.value(t, Sign::Minus) - minus).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn symmetric_rates_collapse_weight_and_threshold() {
    for rho in [0.0, 0.1, 0.2, 0.3, 0.4] {
        for i in 1..=9 {
            let pi = i as f64 / 10.0;
            if i == 5 {
                continue;
            }
            for noise in [NoiseModel::pairing(rho, rho).unwrap(), NoiseModel::labeling(rho, rho).unwrap()] {
                let p = weighted_params(&noise, pi).unwrap();
                assert!((p.alpha - 0.5).abs() < 1e-12);
                assert!((p.threshold - 0.5).abs() < 1e-12);
                let expected_a = match noise {
                    NoiseModel::Pairing(_) => (1.0 - 2.0 * rho) * (2.0 * pi - 1.0) / 2.0,
                    NoiseModel::Labeling(_) => (1.0 - 2.0 * rho).powi(2) * (2.0 * pi - 1.0) / 2.0,
                };
                assert!((p.a - expected_a).abs() < 1e-12);
                assert_eq!(p.flip_sign, pi < 0.5);
            }
        }
    }
}

/// Sampling check of unbiasedness: draw `(x, Q)` by simulating the
/// generative process, average the corrected loss, compare to the exact
/// clean risk within three standard errors.
#[test]
fn corrected_loss_unbiased_by_simulation() {
    let inst = instance_with_prior(0.35, 0.9, 0.1).unwrap();
    let pi = inst.prior();
    let scores = [0.6, -0.2, 0.1];
    let mut r = ChaCha8Rng::seed_from_u64(11);
    let draw_point = |r: &mut ChaCha8Rng| {
        let u: f64 = r.random();
        let k = if u < 0.3 {
            0
        } else if u < 0.6 {
            1
        } else {
            2
        };
        let y = Sign::from_bool(r.random::<f64>() < inst.eta[k]);
        (k, y)
    };
    for noise in [NoiseModel::pairing(0.2, 0.1).unwrap(), NoiseModel::labeling(0.25, 0.1).unwrap()] {
        let loss = CorrectedLoss::new(BaseLoss::Squared, &noise, pi).unwrap();
        let n = 1_000_000;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n {
            let (k, y) = draw_point(&mut r);
            let (_, y2) = draw_point(&mut r);
            let q = match noise {
                NoiseModel::Pairing(p) => {
                    let q = y.agreement(y2);
                    let rate = if q.is_plus() { p.rho_s() } else { p.rho_d() };
                    if r.random::<f64>() < rate {
                        q.flipped()
                    } else {
                        q
                    }
                }
                NoiseModel::Labeling(l) => {
                    let flip = |y: Sign, r: &mut ChaCha8Rng| {
                        let rate = if y.is_plus() { l.rho_plus() } else { l.rho_minus() };
                        if r.random::<f64>() < rate {
                            y.flipped()
                        } else {
                            y
                        }
                    };
                    let a = flip(y, &mut r);
                    let b = flip(y2, &mut r);
                    a.agreement(b)
                }
            };
            let v = loss.value(scores[k], q);
            sum += v;
            sum_sq += v * v;
        }
        let mean = sum / n as f64;
        let se = ((sum_sq / n as f64 - mean * mean) / n as f64).sqrt();
        let clean = clean_risk(&inst, &scores, BaseLoss::Squared);
        assert!((mean - clean).abs() < 3.0 * se, "{noise:?}: {mean} vs {clean} (se {se})");
    }
}
