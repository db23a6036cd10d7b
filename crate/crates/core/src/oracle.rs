//! Brute-force reference computations, kept independent of the spectral
//! path: autocorrelation through the dense matrix exponential and the PSD
//! through adaptive quadrature of the cosine transform. Small n only.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::markov::{Generator, StateWeights, StationaryDistribution};

/// `C_X(tau) = <x, [P(tau) - P(inf)] x>_pi` with `P(tau)` from the dense
/// matrix exponential and `P(inf)` built from `pi` directly.
pub fn autocorrelation_matrix_exp(
    g: &Generator,
    pi: &StationaryDistribution,
    x: &StateWeights,
    tau: f64,
) -> Result<f64> {
    let p = g.transition_matrix(tau)?;
    let px = &p * x;
    let mean = pi.mean(x)?;
    // <x, P(inf) x>_pi = <x>^2 since every row of P(inf) is pi.
    Ok(pi.inner_product(x, &px)? - mean * mean)
}

/// Numerical cosine transform `S(omega) = int_0^T C(tau) cos(omega tau) dtau`,
/// with `T` grown until the autocorrelation has decayed below `1e-12 C(0)`
/// and the integral evaluated by adaptive Simpson per oscillation segment.
pub fn psd_cosine_transform(
    g: &Generator,
    pi: &StationaryDistribution,
    x: &StateWeights,
    omega: f64,
) -> Result<f64> {
    if omega < 0.0 {
        return Err(Error::InvalidArgument("omega must be nonnegative".into()));
    }
    let c0 = autocorrelation_matrix_exp(g, pi, x, 0.0)?;
    if c0 <= 0.0 {
        return Ok(0.0);
    }

    // Find a horizon where the correlation is negligible.
    let mut horizon = 1.0 / g.max_abs_entry().max(1e-300);
    for _ in 0..80 {
        let c = autocorrelation_matrix_exp(g, pi, x, horizon)?;
        if c.abs() < 1e-12 * c0 {
            break;
        }
        horizon *= 2.0;
    }

    // Segment so each piece spans at most a quarter period of cos(omega tau).
    let max_seg = if omega > 0.0 {
        (std::f64::consts::PI / (4.0 * omega)).min(horizon / 16.0)
    } else {
        horizon / 16.0
    };
    let n_seg = (horizon / max_seg).ceil() as usize;
    let seg = horizon / n_seg as f64;

    let f = |tau: f64| -> f64 {
        autocorrelation_matrix_exp(g, pi, x, tau).expect("validated inputs")
            * (omega * tau).cos()
    };

    let tol = 1e-11 * c0 * horizon / n_seg as f64;
    let mut total = 0.0;
    for i in 0..n_seg {
        let a = i as f64 * seg;
        let b = a + seg;
        total += adaptive_simpson(&f, a, b, tol, 24);
    }
    Ok(total)
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    simpson_recurse(f, a, b, fa, fm, fb, whole, tol, depth)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= 15.0 * tol {
        return left + right + err / 15.0;
    }
    simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Deterministic xorshift-style stream used to build reproducible random
/// test chains without pulling an RNG into the library API.
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn uniform_usize(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }
}

/// Random reversible birth-death chain with rates in `[0.1, 10)` plus an
/// integer observable, for oracle sweeps.
pub fn random_birth_death_case(
    rng: &mut SplitMix64,
    max_states: usize,
) -> (Generator, DVector<f64>) {
    let n = rng.uniform_usize(3, max_states);
    let lambdas: Vec<f64> = (0..n - 1).map(|_| rng.uniform(0.1, 10.0)).collect();
    let mus: Vec<f64> = (0..n - 1).map(|_| rng.uniform(0.1, 10.0)).collect();
    let rates = crate::models::BirthDeathRates::new(lambdas, mus).expect("positive rates");
    let g = rates.generator(n).expect("valid birth-death generator");
    let x = DVector::from_iterator(n, (0..n).map(|_| rng.uniform_usize(0, 9) as f64));
    (g, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use approx::assert_relative_eq;

    #[test]
    fn two_state_autocorrelation_closed_form() {
        let g = models::mm1_generator(1.0, 1.0, 2).unwrap();
        let pi = g.stationary_distribution().unwrap();
        let x = DVector::from_row_slice(&[0.0, 1.0]);
        for &tau in &[0.0, 0.3, 1.0, 2.5] {
            let c = autocorrelation_matrix_exp(&g, &pi, &x, tau).unwrap();
            assert_relative_eq!(c, 0.25 * (-2.0 * tau).exp(), max_relative = 1e-10);
        }
    }

    #[test]
    fn cosine_transform_matches_single_lorentzian() {
        let g = models::mm1_generator(1.0, 1.0, 2).unwrap();
        let pi = g.stationary_distribution().unwrap();
        let x = DVector::from_row_slice(&[0.0, 1.0]);
        for &omega in &[0.0, 0.5, 1.0, 5.0] {
            let s = psd_cosine_transform(&g, &pi, &x, omega).unwrap();
            let expect = 0.25 * 2.0 / (4.0 + omega * omega);
            assert_relative_eq!(s, expect, max_relative = 1e-8);
        }
    }
}
