//! Eigenstructure of reversible generators and the spectral form of the
//! power spectral density: a sum of Lorentzians, one per nonzero eigenvalue,
//! weighted by the coupling of the observable to the eigenvectors.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::markov::{Generator, StateWeights, StationaryDistribution};

/// Relative tolerance used to group numerically degenerate eigenvalues.
pub const DEGENERACY_REL_TOL: f64 = 1e-8;

/// Eigenstructure of a reversible generator: the `n - 1` nonzero
/// eigenvalues in ascending order plus the right/left eigenvector pairs
/// (columns; normalized so `w_k . v_k = 1`).
#[derive(Debug, Clone)]
pub struct EigenStructure {
    omegas: Vec<f64>,
    right: DMatrix<f64>,
    left: DMatrix<f64>,
}

impl EigenStructure {
    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn right_eigenvector(&self, k: usize) -> DVector<f64> {
        self.right.column(k).into_owned()
    }

    pub fn left_eigenvector(&self, k: usize) -> DVector<f64> {
        self.left.column(k).into_owned()
    }

    pub fn n_states(&self) -> usize {
        self.right.nrows()
    }
}

/// Eigendecompose a reversible generator via the symmetrized matrix
/// `D^{1/2} G D^{-1/2}` (`D = diag pi`). The unique zero eigenvalue is
/// identified, snapped, and excluded from the returned structure.
pub fn eigendecompose(g: &Generator, pi: &StationaryDistribution) -> Result<EigenStructure> {
    if !g.check_detailed_balance(pi) {
        return Err(Error::NotReversible {
            max_violation: g.detailed_balance_violation(pi),
        });
    }
    let n = g.n();
    let sqrt_pi: DVector<f64> = pi.as_vector().map(|p| p.sqrt());

    let mut sym = g.entries().clone();
    for i in 0..n {
        for j in 0..n {
            sym[(i, j)] *= sqrt_pi[i] / sqrt_pi[j];
        }
    }
    // Force exact symmetry before the symmetric solver.
    let sym = 0.5 * (&sym + sym.transpose());
    let eig = SymmetricEigen::new(sym);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());

    let max_abs = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, &w| m.max(w.abs()));
    let zero_tol = 1e-9 * max_abs.max(f64::MIN_POSITIVE);
    let near_zero: Vec<usize> = order
        .iter()
        .cloned()
        .filter(|&i| eig.eigenvalues[i].abs() <= zero_tol)
        .collect();
    if near_zero.len() != 1 {
        return Err(Error::Reducible);
    }
    let zero_idx = near_zero[0];

    let mut omegas = Vec::with_capacity(n - 1);
    let mut right = DMatrix::zeros(n, n - 1);
    let mut left = DMatrix::zeros(n, n - 1);
    let mut col = 0;
    for &i in &order {
        if i == zero_idx {
            continue;
        }
        omegas.push(eig.eigenvalues[i]);
        let u = eig.eigenvectors.column(i);
        for row in 0..n {
            right[(row, col)] = u[row] / sqrt_pi[row];
            left[(row, col)] = u[row] * sqrt_pi[row];
        }
        col += 1;
    }
    if omegas[0] <= 0.0 {
        return Err(Error::InvalidGenerator(format!(
            "nonpositive nonzero eigenvalue {} for a reversible chain",
            omegas[0]
        )));
    }
    Ok(EigenStructure {
        omegas,
        right,
        left,
    })
}

/// Coupling coefficients `gamma_k^2 = <x, Pi_k x>_pi`, one per nonzero
/// eigenvalue, aligned with `omegas`. For degenerate eigenvalues only the
/// sum over the eigenspace is basis-independent; group before comparing
/// individual values.
pub fn coupling_coefficients(
    es: &EigenStructure,
    x: &StateWeights,
    pi: &StationaryDistribution,
) -> Result<Vec<f64>> {
    if x.len() != es.n_states() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: es.n_states(),
        });
    }
    let weighted: DVector<f64> = DVector::from_iterator(
        x.len(),
        x.iter().zip(pi.as_vector().iter()).map(|(&xi, &p)| xi * p),
    );
    let a = es.right.transpose() * &weighted; // <x, v_k>_pi
    let b = es.left.transpose() * x; // w_k . x
    Ok(a
        .iter()
        .zip(b.iter())
        .map(|(&p, &q)| (p * q).max(0.0))
        .collect())
}

/// Normalization convention for [`LorentzianSpectrum::evaluate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// `S(omega) = sum gamma_k^2 omega_k / (omega_k^2 + omega^2)`;
    /// integrates to `(pi/2) Var(x)` over `[0, inf)`.
    #[default]
    Raw,
    /// Extra `2/pi` factor so the spectrum integrates to `Var(x)`.
    Energy,
}

/// Analytic PSD as a list of `(omega_k, gamma_k^2)` Lorentzian terms.
/// Degenerate eigenvalues are merged into a single term.
#[derive(Debug, Clone)]
pub struct LorentzianSpectrum {
    terms: Vec<(f64, f64)>,
    normalization: Normalization,
}

impl LorentzianSpectrum {
    /// Build from aligned eigenvalue / coupling lists, grouping eigenvalues
    /// equal within [`DEGENERACY_REL_TOL`].
    pub fn from_parts(omegas: &[f64], gammas_sq: &[f64]) -> Result<Self> {
        if omegas.len() != gammas_sq.len() {
            return Err(Error::LengthMismatch {
                left: omegas.len(),
                right: gammas_sq.len(),
            });
        }
        if omegas.iter().any(|&w| w <= 0.0) {
            return Err(Error::InvalidArgument(
                "lorentzian cut-off frequencies must be positive".into(),
            ));
        }
        let mut terms: Vec<(f64, f64)> = Vec::new();
        for (&w, &g) in omegas.iter().zip(gammas_sq.iter()) {
            match terms.last_mut() {
                Some((w0, g0)) if (w - *w0).abs() <= DEGENERACY_REL_TOL * w0.abs() => {
                    // Merge into the eigenspace term, weight-averaging omega.
                    let total = *g0 + g;
                    if total > 0.0 {
                        *w0 = (*w0 * *g0 + w * g) / total;
                    }
                    *g0 = total;
                }
                _ => terms.push((w, g)),
            }
        }
        Ok(Self {
            terms,
            normalization: Normalization::Raw,
        })
    }

    pub fn from_eigenstructure(
        es: &EigenStructure,
        x: &StateWeights,
        pi: &StationaryDistribution,
    ) -> Result<Self> {
        let gammas = coupling_coefficients(es, x, pi)?;
        Self::from_parts(es.omegas(), &gammas)
    }

    pub fn with_normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// `(omega_k, gamma_k^2)` pairs, one per distinct eigenvalue, ascending.
    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    /// `S_X(omega) = sum_k gamma_k^2 omega_k / (omega_k^2 + omega^2)`.
    pub fn evaluate(&self, omega: f64) -> Result<f64> {
        if omega < 0.0 {
            return Err(Error::InvalidArgument("omega must be nonnegative".into()));
        }
        let raw: f64 = self
            .terms
            .iter()
            .map(|&(wk, gk)| gk * wk / (wk * wk + omega * omega))
            .sum();
        Ok(match self.normalization {
            Normalization::Raw => raw,
            Normalization::Energy => raw * std::f64::consts::FRAC_2_PI,
        })
    }

    /// Autocorrelation `C_X(tau) = sum_k gamma_k^2 exp(-omega_k tau)`;
    /// `C_X(0)` is the stationary variance of the observable.
    pub fn autocorrelation(&self, tau: f64) -> Result<f64> {
        if tau < 0.0 {
            return Err(Error::InvalidArgument("tau must be nonnegative".into()));
        }
        Ok(self
            .terms
            .iter()
            .map(|&(wk, gk)| gk * (-wk * tau).exp())
            .sum())
    }

    /// Green-Kubo diffusion coefficient `D_X = sum_k gamma_k^2 / omega_k`,
    /// which equals the raw-mode PSD at zero frequency.
    pub fn diffusion_coefficient(&self) -> f64 {
        self.terms.iter().map(|&(wk, gk)| gk / wk).sum()
    }

    /// `sum_k gamma_k^2`; equals `Var_pi(x)` for a spectrum built from a
    /// chain (the process is centered, so the zero mode carries no weight).
    pub fn total_coupling(&self) -> f64 {
        self.terms.iter().map(|&(_, gk)| gk).sum()
    }
}

/// Generalized fundamental matrix `Z(omega) = (G + omega^2 G#)#`, computed
/// spectrally for a reversible chain:
/// `Z(omega) = sum_k [omega_k / (omega_k^2 + omega^2)] Pi_k`.
/// `Z(0)` is the fundamental (deviation) matrix `G#`.
pub fn generalized_fundamental_matrix(
    g: &Generator,
    pi: &StationaryDistribution,
    omega: f64,
) -> Result<DMatrix<f64>> {
    const MAX_N: usize = 2048;
    if g.n() > MAX_N {
        return Err(Error::TooLarge {
            n: g.n(),
            max: MAX_N,
        });
    }
    if omega < 0.0 {
        return Err(Error::InvalidArgument("omega must be nonnegative".into()));
    }
    let es = eigendecompose(g, pi)?;
    let coeffs = DVector::from_iterator(
        es.omegas.len(),
        es.omegas.iter().map(|&wk| wk / (wk * wk + omega * omega)),
    );
    let mut scaled = es.right.clone();
    for (mut col, &c) in scaled.column_iter_mut().zip(coeffs.iter()) {
        col *= c;
    }
    Ok(scaled * es.left.transpose())
}

/// Graph Fourier transform of an observable over a symmetric generator
/// (the graph Laplacian): `xhat(omega_k) = <x, u_k>` with `u_k` the
/// orthonormal eigenvectors; `gamma_k = xhat(omega_k) / sqrt(n)`.
pub fn graph_fourier_transform(
    g: &Generator,
    es: &EigenStructure,
    x: &StateWeights,
) -> Result<Vec<f64>> {
    if !g.is_symmetric() {
        return Err(Error::InvalidArgument(
            "graph Fourier transform requires a symmetric generator".into(),
        ));
    }
    if x.len() != es.n_states() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: es.n_states(),
        });
    }
    // For a symmetric generator pi is uniform, so the orthonormal
    // eigenvectors are sqrt(n) times the stored left eigenvectors.
    let scale = (es.n_states() as f64).sqrt();
    let prods = es.left.transpose() * x;
    Ok(prods.iter().map(|&p| p * scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use approx::assert_relative_eq;

    fn two_state_unit() -> (Generator, StationaryDistribution) {
        let g = models::mm1_generator(1.0, 1.0, 2).unwrap();
        let pi = g.stationary_distribution().unwrap();
        (g, pi)
    }

    #[test]
    fn two_state_single_mode() {
        let (g, pi) = two_state_unit();
        let es = eigendecompose(&g, &pi).unwrap();
        assert_eq!(es.omegas().len(), 1);
        assert_relative_eq!(es.omegas()[0], 2.0, max_relative = 1e-12);

        let x = DVector::from_row_slice(&[0.0, 1.0]);
        let gammas = coupling_coefficients(&es, &x, &pi).unwrap();
        assert_relative_eq!(gammas[0], 0.25, max_relative = 1e-12);

        let spec = LorentzianSpectrum::from_parts(es.omegas(), &gammas).unwrap();
        assert_relative_eq!(spec.evaluate(0.0).unwrap(), 0.125, max_relative = 1e-12);
        assert_relative_eq!(spec.diffusion_coefficient(), 0.125, max_relative = 1e-12);
        assert_relative_eq!(
            spec.autocorrelation(1.0).unwrap(),
            0.25 * (-2.0f64).exp(),
            max_relative = 1e-12
        );
        assert_relative_eq!(spec.autocorrelation(0.0).unwrap(), 0.25);
        assert!(spec.autocorrelation(200.0).unwrap().abs() < 1e-30);
    }

    #[test]
    fn constant_observable_has_zero_coupling() {
        let g = models::mm1_generator(1.0, 2.0, 5).unwrap();
        let pi = g.stationary_distribution().unwrap();
        let es = eigendecompose(&g, &pi).unwrap();
        let ones = DVector::from_element(5, 1.0);
        let gammas = coupling_coefficients(&es, &ones, &pi).unwrap();
        for g in gammas {
            assert!(g.abs() < 1e-12);
        }
    }

    #[test]
    fn ring_n4_spectrum_and_couplings() {
        let g = models::ring_generator(1.0, 1.0, 4).unwrap();
        let pi = g.stationary_distribution().unwrap();
        let es = eigendecompose(&g, &pi).unwrap();
        let omegas = es.omegas();
        assert_relative_eq!(omegas[0], 2.0, epsilon = 1e-10);
        assert_relative_eq!(omegas[1], 2.0, epsilon = 1e-10);
        assert_relative_eq!(omegas[2], 4.0, epsilon = 1e-10);

        let x = DVector::from_row_slice(&[0.0, 1.0, 2.0, 3.0]);
        let spec = LorentzianSpectrum::from_eigenstructure(&es, &x, &pi).unwrap();
        // Degenerate pair at omega = 2 merged: gamma^2 = 2 * (1/sqrt2)^2 = 1.
        assert_eq!(spec.terms().len(), 2);
        assert_relative_eq!(spec.terms()[0].0, 2.0, epsilon = 1e-10);
        assert_relative_eq!(spec.terms()[0].1, 1.0, max_relative = 1e-10);
        assert_relative_eq!(spec.terms()[1].1, 0.25, max_relative = 1e-10);
        // Total coupling = Var(x) under the uniform law.
        assert_relative_eq!(spec.total_coupling(), 1.25, max_relative = 1e-10);
    }

    #[test]
    fn star_spectrum_has_three_distinct_eigenvalues() {
        let peripheral = 20;
        let g = models::star_generator(1.0, 1.0, peripheral).unwrap();
        let pi = g.stationary_distribution().unwrap();
        let es = eigendecompose(&g, &pi).unwrap();
        let omegas = es.omegas();
        assert_eq!(omegas.len(), peripheral);
        for &w in &omegas[..peripheral - 1] {
            assert_relative_eq!(w, 1.0, epsilon = 1e-9);
        }
        assert_relative_eq!(
            omegas[peripheral - 1],
            (peripheral + 1) as f64,
            max_relative = 1e-9
        );
    }

    #[test]
    fn nonreversible_chain_is_rejected() {
        let g = models::ring_generator(2.0, 1.0, 4).unwrap();
        let pi = g.stationary_distribution().unwrap();
        assert!(matches!(
            eigendecompose(&g, &pi),
            Err(Error::NotReversible { .. })
        ));
    }

    #[test]
    fn lorentzian_is_monotone_nonincreasing() {
        let spec = LorentzianSpectrum::from_parts(&[0.5, 2.0, 7.0], &[1.0, 0.3, 0.2]).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..100 {
            let s = spec.evaluate(i as f64 * 0.3).unwrap();
            assert!(s <= prev + 1e-15);
            prev = s;
        }
    }

    #[test]
    fn energy_normalization_factor() {
        let spec = LorentzianSpectrum::from_parts(&[3.0], &[2.0]).unwrap();
        let raw = spec.evaluate(1.0).unwrap();
        let energy = spec
            .clone()
            .with_normalization(Normalization::Energy)
            .evaluate(1.0)
            .unwrap();
        assert_relative_eq!(energy, raw * 2.0 / std::f64::consts::PI);
    }

    #[test]
    fn fundamental_matrix_group_inverse_axioms() {
        let g = models::mm1_generator(1.3, 2.1, 6).unwrap();
        let pi = g.stationary_distribution().unwrap();
        let z = generalized_fundamental_matrix(&g, &pi, 0.0).unwrap();
        let gm = g.entries();

        let zgz = &z * gm * &z;
        let gzg = gm * &z * gm;
        assert!((&zgz - &z).abs().max() < 1e-9);
        assert!((&gzg - gm).abs().max() < 1e-9);

        let ones = DVector::from_element(6, 1.0);
        assert!((&z * ones).abs().max() < 1e-9);
    }

    #[test]
    fn quadratic_form_equals_analytic_psd() {
        let g = models::mm1_generator(0.8, 1.7, 7).unwrap();
        let pi = g.stationary_distribution().unwrap();
        let es = eigendecompose(&g, &pi).unwrap();
        let x = DVector::from_iterator(7, (0..7).map(|i| i as f64));
        let spec = LorentzianSpectrum::from_eigenstructure(&es, &x, &pi).unwrap();
        for &omega in &[0.0, 0.3, 1.0, 4.0] {
            let z = generalized_fundamental_matrix(&g, &pi, omega).unwrap();
            let quad = pi.inner_product(&x, &(&z * &x)).unwrap();
            assert_relative_eq!(quad, spec.evaluate(omega).unwrap(), max_relative = 1e-9);
        }
    }

    #[test]
    fn gft_matches_couplings_on_the_ring() {
        let n = 4;
        let g = models::ring_generator(1.0, 1.0, n).unwrap();
        let pi = g.stationary_distribution().unwrap();
        let es = eigendecompose(&g, &pi).unwrap();

        // Constant observable: zero transform at every nonzero mode.
        let ones = DVector::from_element(n, 1.0);
        for v in graph_fourier_transform(&g, &es, &ones).unwrap() {
            assert!(v.abs() < 1e-10);
        }

        // x_q = q: aggregated |xhat|^2 / n over the degenerate pair equals
        // the aggregated gamma^2, and matches the closed form 2 * (1/2).
        let x = DVector::from_iterator(n, (0..n).map(|q| q as f64));
        let xhat = graph_fourier_transform(&g, &es, &x).unwrap();
        let pair = (xhat[0] * xhat[0] + xhat[1] * xhat[1]) / n as f64;
        assert_relative_eq!(pair, 1.0, max_relative = 1e-9);

        // An eigenvector transforms to a single nonzero coefficient.
        let v = es.right_eigenvector(2);
        let xhat = graph_fourier_transform(&g, &es, &v).unwrap();
        assert!(xhat[0].abs() < 1e-9 && xhat[1].abs() < 1e-9);
        assert!(xhat[2].abs() > 1e-3);
    }

    #[test]
    fn gft_rejects_asymmetric_generator() {
        let g = models::mm1_generator(1.0, 2.0, 4).unwrap();
        let pi = g.stationary_distribution().unwrap();
        let es = eigendecompose(&g, &pi).unwrap();
        let x = DVector::from_element(4, 1.0);
        assert!(graph_fourier_transform(&g, &es, &x).is_err());
    }
}
