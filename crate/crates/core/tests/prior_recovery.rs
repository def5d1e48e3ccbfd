use proptest::prelude::*;
use sdnoise_core::data::generate_gaussian_dataset;
use sdnoise_core::estimation::{estimate_prior, estimate_prior_from_fraction, Branch};
use sdnoise_core::noise::{expected_similar_fraction, sample_noisy_pairs};
use sdnoise_core::{NoiseModel, PairingNoise};

fn rate_grid() -> Vec<(f64, f64)> {
    let rates = [0.0, 0.1, 0.2, 0.3];
    rates.iter().flat_map(|&a| rates.iter().map(move |&b| (a, b))).collect()
}

#[test]
fn exact_fraction_round_trips() {
    for i in 0..8 {
        let pi = 0.1 + 0.05 * i as f64;
        for (a, b) in rate_grid() {
            for (noise, tol) in
                [(NoiseModel::pairing(a, b).unwrap(), 1e-6), (NoiseModel::labeling(a, b).unwrap(), 1e-5)]
            {
                let f = expected_similar_fraction(&noise, pi).unwrap();
                let est = estimate_prior_from_fraction(f, &noise, Branch::Low).unwrap();
                // Under labeling noise the low root is the mirror of pi
                // through the vertex, which is pi itself only when the
                // vertex sits at 1/2.
                let hit = est.roots.iter().any(|r| (r - pi).abs() < tol);
                assert!(hit, "pi {pi} {noise:?}: {est:?}");
                if let NoiseModel::Pairing(_) = noise {
                    assert!((est.pi - pi).abs() < tol, "pi {pi} {noise:?}: {est:?}");
                }
                assert!(est.residual < 1e-9);
            }
        }
    }
}

#[test]
fn symmetric_labeling_self_inversion() {
    let noise = NoiseModel::labeling(0.2, 0.2).unwrap();
    let f = expected_similar_fraction(&noise, 0.3).unwrap();
    let est = estimate_prior_from_fraction(f, &noise, Branch::Low).unwrap();
    assert!((est.pi - 0.3).abs() < 1e-6 || (est.pi - 0.7).abs() < 1e-6, "{est:?}");
}

proptest! {
    #[test]
    fn pairing_branches_mirror(pi in 0.02..0.98f64, a in 0.0..0.45f64, b in 0.0..0.45f64) {
        let noise = NoiseModel::Pairing(PairingNoise::new(a, b).unwrap());
        let f = expected_similar_fraction(&noise, pi).unwrap();
        let lo = estimate_prior_from_fraction(f, &noise, Branch::Low);
        let hi = estimate_prior_from_fraction(f, &noise, Branch::High);
        prop_assume!(lo.is_ok());
        let (lo, hi) = (lo.unwrap(), hi.unwrap());
        prop_assert!((lo.pi + hi.pi - 1.0).abs() < 1e-12);
        prop_assert!(lo.pi <= hi.pi);
    }
}

fn monte_carlo_estimate(noise: &NoiseModel, pi: f64, seed: u64) -> f64 {
    let ds = generate_gaussian_dataset(100_000, pi, &[1.0], &[-1.0], seed).unwrap();
    let pairs = sample_noisy_pairs(&ds, noise, 100_000, seed).unwrap();
    let n_s = pairs.iter().filter(|p| p.q.is_plus()).count() as u64;
    let n_d = pairs.len() as u64 - n_s;
    estimate_prior(n_s, n_d, noise, Branch::Low).unwrap().pi
}

#[test]
fn pairing_recovery_from_simulated_counts() {
    let noise = NoiseModel::pairing(0.2, 0.1).unwrap();
    for seed in 0..3 {
        let est = monte_carlo_estimate(&noise, 0.3, seed);
        assert!((est - 0.3).abs() < 0.02, "seed {seed}: {est}");
    }
}

#[test]
fn labeling_recovery_from_simulated_counts() {
    let noise = NoiseModel::labeling(0.1, 0.2).unwrap();
    for seed in 0..3 {
        let est = monte_carlo_estimate(&noise, 0.24, seed);
        assert!((est - 0.24).abs() < 0.03, "seed {seed}: {est}");
    }
}
