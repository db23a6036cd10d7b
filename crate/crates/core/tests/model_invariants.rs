//! Model-level invariants that tie the closed forms to dense numerics.

use markov_psd::models::{
    birth_death_eigvec_coeffs, birth_death_truncation_eigenvalues, toeplitz_eigenvalues,
    BirthDeathRates, Boundary, ToeplitzParams,
};
use markov_psd::spectral;
use nalgebra::{DMatrix, DVector};

/// The truncated queue's bulk eigenvalues match the Toeplitz closed form:
/// the boundary rows only perturb edge modes.
#[test]
fn mm1_bulk_eigenvalues_match_toeplitz() {
    let (n, eps) = (1000usize, 1e-4f64);
    let (lambda, mu) = (1.0, 1.0 + eps);
    let g = markov_psd::models::mm1_generator(lambda, mu, n).unwrap();
    let pi = g.stationary_distribution().unwrap();
    let es = spectral::eigendecompose(&g, &pi).unwrap();
    // omegas() holds the n - 1 nonzero eigenvalues
    let mut numeric: Vec<f64> = es.omegas().to_vec();
    numeric.sort_by(f64::total_cmp);
    assert_eq!(numeric.len(), n - 1);

    let p = ToeplitzParams::new(-lambda, lambda + mu, -mu, n).unwrap();
    let mut closed = toeplitz_eigenvalues(&p);
    closed.sort_by(f64::total_cmp);

    for k in 10..=n / 2 {
        let num = numeric[k - 1];
        let rel = (num - closed[k - 1]).abs() / closed[k - 1];
        assert!(rel < 0.01, "k={k}: numeric {num} vs closed {}", closed[k - 1]);
    }
}

/// Light traffic: all nonzero eigenvalues collapse onto the single death
/// rate, within the perturbative width 2 sqrt(eps') + eps'.
#[test]
fn light_traffic_spectrum_degenerates() {
    let eps = 1e-6f64;
    let g = markov_psd::models::mm1_generator(eps, 1.0, 20).unwrap();
    let pi = g.stationary_distribution().unwrap();
    let es = spectral::eigendecompose(&g, &pi).unwrap();
    let width = 2.0 * eps.sqrt() + eps;
    for &w in es.omegas() {
        if w.abs() < 1e-8 {
            continue;
        }
        assert!((w - 1.0).abs() <= width, "eigenvalue {w} outside 1 +- {width}");
    }
}

/// Near-symmetric rates: the generalized-Fourier-series form of the
/// coupling, gamma_k ~ sqrt(pi_0) q_k xhat(omega_k), reproduces the exact
/// spectral-projector couplings of the principal minor to 5%.
#[test]
fn coupling_matches_orthogonal_polynomial_form() {
    let n = 8usize;
    let (lambda, mu) = (1.0, 1.01);
    let r = BirthDeathRates::constant(lambda, mu, n + 1).unwrap();
    let m = r.principal_minor(n).unwrap();

    // reversibility weights of the minor: w_{i+1}/w_i = lambda/mu
    let mut w = vec![1.0f64; n];
    for i in 1..n {
        w[i] = w[i - 1] * lambda / mu;
    }
    let total: f64 = w.iter().sum();
    for wi in &mut w {
        *wi /= total;
    }

    // exact couplings from the symmetrized eigenproblem
    let d_sqrt = DVector::from_iterator(n, w.iter().map(|&v| v.sqrt()));
    let mut s = m.clone();
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] *= d_sqrt[i] / d_sqrt[j];
        }
    }
    let s = DMatrix::from_fn(n, n, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));
    let eig = s.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let x = DVector::from_iterator(n, (0..n).map(|i| i as f64));
    let exact: Vec<f64> = order
        .iter()
        .map(|&c| {
            let phi = eig.eigenvectors.column(c);
            (0..n).map(|i| d_sqrt[i] * x[i] * phi[i]).sum::<f64>().abs()
        })
        .collect();

    let omegas = birth_death_truncation_eigenvalues(&r, n, Boundary::Origin).unwrap();
    for k in 0..n {
        assert!(
            (omegas[k] - eig.eigenvalues[order[k]]).abs() < 1e-8,
            "bisection eigenvalue {k} disagrees with dense solve"
        );
        let coeffs = birth_death_eigvec_coeffs(&r, n, &omegas, k, Boundary::Origin).unwrap();
        let xhat: f64 = coeffs
            .psi
            .iter()
            .enumerate()
            .map(|(i, &psi)| x[i] * psi)
            .sum();
        let predicted = (w[0] * coeffs.q_sq).sqrt() * xhat.abs();
        let rel = (predicted - exact[k]).abs() / exact[k];
        assert!(
            rel < 0.05,
            "mode {k}: predicted {predicted} vs exact {} (rel {rel})",
            exact[k]
        );
    }
}
