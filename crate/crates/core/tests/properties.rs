//! Property tests over random chains and parameters.

use markov_psd::models::{birth_death_truncation_eigenvalues, BirthDeathRates, Boundary};
use markov_psd::scaling;
use markov_psd::simulate;
use markov_psd::spectral::{self, LorentzianSpectrum};
use nalgebra::DVector;
use proptest::prelude::*;

fn rate_vec(len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.2f64..5.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    /// Sorted spectra of successive truncations strictly interlace.
    #[test]
    fn truncation_spectra_interlace(
        n in 3usize..=9,
        lambdas in rate_vec(10),
        mus in rate_vec(10),
    ) {
        let r = BirthDeathRates::new(lambdas, mus).unwrap();
        let small = birth_death_truncation_eigenvalues(&r, n, Boundary::Origin).unwrap();
        let big = birth_death_truncation_eigenvalues(&r, n + 1, Boundary::Origin).unwrap();
        for i in 0..n {
            prop_assert!(big[i] < small[i], "lower interlace broken at {i}");
            prop_assert!(small[i] < big[i + 1], "upper interlace broken at {i}");
        }
    }

    /// Any positive-rate birth-death chain is reversible, and its spectrum
    /// obeys the coupling sum rule and the Green-Kubo identity.
    #[test]
    fn birth_death_sum_rules(
        n in 3usize..=10,
        lambdas in rate_vec(10),
        mus in rate_vec(10),
    ) {
        let r = BirthDeathRates::new(lambdas, mus).unwrap();
        let g = r.generator(n).unwrap();
        let pi = g.stationary_distribution().unwrap();
        prop_assert!(g.check_detailed_balance(&pi));

        let x = DVector::from_iterator(n, (0..n).map(|i| i as f64));
        let es = spectral::eigendecompose(&g, &pi).unwrap();
        let spec = LorentzianSpectrum::from_eigenstructure(&es, &x, &pi).unwrap();

        let mean: f64 = pi.as_vector().dot(&x);
        let var: f64 = pi
            .as_vector()
            .iter()
            .zip(x.iter())
            .map(|(&p, &xi)| p * (xi - mean) * (xi - mean))
            .sum();
        prop_assert!((spec.total_coupling() - var).abs() <= 1e-9 * var.max(1e-300));
        let d = spec.diffusion_coefficient();
        prop_assert!((d - spec.evaluate(0.0).unwrap()).abs() <= 1e-10 * d.abs());
    }

    /// Parseval: integrated periodogram equals the mean-removed sample
    /// variance, for arbitrary series.
    #[test]
    fn periodogram_parseval(
        log2_len in 6u32..=9,
        dt in 0.01f64..10.0,
        seed_vals in proptest::collection::vec(-10.0f64..10.0, 512),
    ) {
        let n = 1usize << log2_len;
        let series = &seed_vals[..n];
        let pg = simulate::periodogram(series, dt).unwrap();
        let mean = series.iter().sum::<f64>() / n as f64;
        let var = series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        prop_assert!((pg.total_power() - var).abs() <= 1e-9 * var.max(1e-300));
    }

    /// The infinite Lorentzian sum is monotone decreasing in frequency.
    #[test]
    fn direct_sum_monotone(
        w1 in 10.0f64..1e3,
        factor in 1.5f64..10.0,
    ) {
        let s1 = scaling::lorentzian_sum_direct(2.0, -1.0, w1, 100_000).unwrap();
        let s2 = scaling::lorentzian_sum_direct(2.0, -1.0, w1 * factor, 100_000).unwrap();
        prop_assert!(s2 < s1);
    }
}

/// Round trip of Criterion-based prediction: a synthetic eigenstructure
/// with exact power laws must yield an analytic PSD whose measured slope
/// over [omega_10, omega_100] matches the predicted zeta.
#[test]
fn zeta_round_trip_on_synthetic_eigenstructures() {
    for &(alpha, beta) in &[(2.0, -1.0), (2.0, -0.5), (3.0, -1.0)] {
        let n = 10_000;
        let omegas: Vec<f64> = (1..=n).map(|k| (k as f64).powf(alpha)).collect();
        let gammas_sq: Vec<f64> = (1..=n).map(|k| (k as f64).powf(2.0 * beta)).collect();
        let spec = LorentzianSpectrum::from_parts(&omegas, &gammas_sq).unwrap();
        let ne = scaling::predict_zeta(alpha, beta).unwrap();
        assert!(ne.admissible);
        assert!(ne.zeta > -2.0 && ne.zeta < 0.0);

        let (w_lo, w_hi) = (omegas[9], omegas[99]);
        let samples: Vec<(f64, f64)> = (0..400)
            .map(|i| {
                let w = w_lo * (w_hi / w_lo).powf(i as f64 / 399.0);
                (w, spec.evaluate(w).unwrap())
            })
            .collect();
        let (slope, _) = scaling::estimate_psd_slope(&samples, w_lo, w_hi).unwrap();
        assert!(
            (slope - ne.zeta).abs() < 0.05,
            "(alpha, beta) = ({alpha}, {beta}): slope {slope} vs zeta {}",
            ne.zeta
        );
    }
}
