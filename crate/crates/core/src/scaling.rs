//! Power-law structure of eigenspectra and the resulting PSD exponent:
//! if `omega_k ~ k^alpha` and `gamma_k ~ k^beta` with `alpha > |2 beta + 1|`
//! the Lorentzian sum scales as `omega^zeta` with
//! `zeta = (2 beta - alpha + 1) / alpha`.

use crate::error::{Error, Result};

/// Least-squares fit of `log(value)` vs `log(k)` over a window.
#[derive(Debug, Clone, Copy)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// Max absolute deviation in log space over the window.
    pub residual: f64,
}

/// Fit `value_k ~ prefactor * k^exponent` over `k in [k_min, k_max]`
/// (1-based `k`; `values[k - 1]` is the k-th entry).
pub fn fit_power_law(values: &[f64], k_min: usize, k_max: usize) -> Result<PowerLawFit> {
    if k_min < 1 || k_max > values.len() || k_max < k_min + 4 {
        return Err(Error::InvalidArgument(format!(
            "fit window [{k_min}, {k_max}] needs at least 5 points inside 1..={}",
            values.len()
        )));
    }
    let window = &values[k_min - 1..k_max];
    if window.iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidArgument(
            "power-law fit requires positive values".into(),
        ));
    }
    let pts: Vec<(f64, f64)> = window
        .iter()
        .enumerate()
        .map(|(i, &v)| (((k_min + i) as f64).ln(), v.ln()))
        .collect();
    let (slope, intercept, _) = linear_regression(&pts);
    let residual = pts
        .iter()
        .map(|&(lx, ly)| (ly - slope * lx - intercept).abs())
        .fold(0.0f64, f64::max);
    Ok(PowerLawFit {
        exponent: slope,
        prefactor: intercept.exp(),
        residual,
    })
}

/// Joint fit of the eigenvalue and coupling power laws over one window.
#[derive(Debug, Clone, Copy)]
pub struct ScalingFit {
    pub alpha: f64,
    pub beta: f64,
    pub omega0: f64,
    pub gamma0: f64,
    pub k_min: usize,
    pub k_max: usize,
    pub omega_residual: f64,
    pub gamma_residual: f64,
}

/// Fit `omega_k ~ omega0 k^alpha` and `|gamma_k| ~ gamma0 k^beta`.
/// `gammas_sq` holds squared couplings; the fitted beta refers to
/// `|gamma_k|` itself.
pub fn fit_eigenstructure_scalings(
    omegas: &[f64],
    gammas_sq: &[f64],
    k_min: usize,
    k_max: usize,
) -> Result<ScalingFit> {
    let omega_fit = fit_power_law(omegas, k_min, k_max)?;
    let gammas_abs: Vec<f64> = gammas_sq.iter().map(|&g| g.max(0.0).sqrt()).collect();
    let gamma_fit = fit_power_law(&gammas_abs, k_min, k_max)?;
    Ok(ScalingFit {
        alpha: omega_fit.exponent,
        beta: gamma_fit.exponent,
        omega0: omega_fit.prefactor,
        gamma0: gamma_fit.prefactor,
        k_min,
        k_max,
        omega_residual: omega_fit.residual,
        gamma_residual: gamma_fit.residual,
    })
}

/// Default fit window `[5, n/10]`: stays inside the `k << n` regime while
/// skipping the lowest modes.
pub fn default_fit_window(n: usize) -> (usize, usize) {
    (5, (n / 10).max(10))
}

/// Predicted PSD exponent and Euler-Maclaurin correction coefficient.
#[derive(Debug, Clone, Copy)]
pub struct NoiseExponent {
    /// `(2 beta - alpha + 1) / alpha`; meaningful only when `admissible`.
    pub zeta: f64,
    /// `alpha > |2 beta + 1|`.
    pub admissible: bool,
    /// Coefficient of the `-K omega^{-2}` correction term.
    pub k_coefficient: f64,
}

// B_2, B_4, ..., B_10.
const BERNOULLI_EVEN: [f64; 5] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
];

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Correction coefficient K: `1/2` when `2 beta + alpha = 0`;
/// `B_{2p}/(2p)! * (2p - 2)!` when `2 beta + alpha + 1 = 2p` for integer
/// `p >= 1` (then `Gamma(2 beta + alpha) = (2p - 2)!`); zero otherwise.
pub fn correction_coefficient(alpha: f64, beta: f64) -> Result<f64> {
    const TOL: f64 = 1e-12;
    let s = 2.0 * beta + alpha;
    if s.abs() < TOL {
        return Ok(0.5);
    }
    let two_p = s + 1.0;
    let p = (two_p / 2.0).round();
    if p >= 1.0 && (two_p - 2.0 * p).abs() < TOL {
        let p = p as usize;
        if p > BERNOULLI_EVEN.len() {
            return Err(Error::InvalidArgument(format!(
                "correction term needs Bernoulli number B_{}; only B_2..B_10 are tabulated",
                2 * p
            )));
        }
        let b2p = BERNOULLI_EVEN[p - 1];
        return Ok(b2p / factorial(2 * p) * factorial(2 * p - 2));
    }
    Ok(0.0)
}

/// Criterion for 1/f-type scaling from the eigenstructure power laws.
pub fn predict_zeta(alpha: f64, beta: f64) -> Result<NoiseExponent> {
    let admissible = alpha > (2.0 * beta + 1.0).abs();
    let zeta = (2.0 * beta - alpha + 1.0) / alpha;
    let k_coefficient = if admissible {
        correction_coefficient(alpha, beta)?
    } else {
        0.0
    };
    if admissible {
        debug_assert!(zeta > -2.0 && zeta < 0.0);
    }
    Ok(NoiseExponent {
        zeta,
        admissible,
        k_coefficient,
    })
}

/// Closed-form Cauchy-moment integral
/// `I_ab(w) = (pi / 2 alpha) sec(pi (1 + 2 beta) / (2 alpha)) w^zeta`.
pub fn cauchy_moment_integral(alpha: f64, beta: f64, omega_bar: f64) -> Result<f64> {
    ensure_admissible(alpha, beta)?;
    if omega_bar <= 0.0 {
        return Err(Error::InvalidArgument("omega_bar must be positive".into()));
    }
    let zeta = (2.0 * beta - alpha + 1.0) / alpha;
    let angle = std::f64::consts::PI * (1.0 + 2.0 * beta) / (2.0 * alpha);
    Ok(std::f64::consts::PI / (2.0 * alpha) / angle.cos() * omega_bar.powf(zeta))
}

/// Asymptotic PSD of a power-law eigenstructure in rescaled frequency:
/// `I_ab(omega_bar) - K omega_bar^{-2}`.
pub fn asymptotic_psd(alpha: f64, beta: f64, omega_bar: f64) -> Result<f64> {
    let i = cauchy_moment_integral(alpha, beta, omega_bar)?;
    let k = correction_coefficient(alpha, beta)?;
    Ok(i - k / (omega_bar * omega_bar))
}

fn ensure_admissible(alpha: f64, beta: f64) -> Result<()> {
    let bound = (2.0 * beta + 1.0).abs();
    if !(alpha > bound) {
        return Err(Error::Inadmissible { alpha, bound });
    }
    Ok(())
}

/// Certified evaluation of `S_ab(omega_bar) = sum_{k=1}^inf f_ab(k)` with
/// `f_ab(x) = x^{2 beta + alpha} / (x^{2 alpha} + omega_bar^2)`:
/// partial sum to `terms`, Euler-Maclaurin tail
/// `int_N^inf f + f(N)/2`, and an error bound `|f'(N)| / 12` that must fall
/// below `1e-8` of the total. At `omega_bar = 0` this is the Riemann zeta
/// value `zeta(alpha - 2 beta)`.
pub fn lorentzian_sum_direct(
    alpha: f64,
    beta: f64,
    omega_bar: f64,
    terms: usize,
) -> Result<f64> {
    ensure_admissible(alpha, beta)?;
    if omega_bar < 0.0 {
        return Err(Error::InvalidArgument(
            "omega_bar must be nonnegative".into(),
        ));
    }
    if terms < 2 {
        return Err(Error::TailBound { terms });
    }
    let p = 2.0 * beta + alpha;
    let f = |x: f64| x.powf(p) / (x.powf(2.0 * alpha) + omega_bar * omega_bar);

    let n = terms as f64;
    // Tail integral needs the power-law regime: x^{2 alpha} must dominate.
    let ratio = (omega_bar * omega_bar) / n.powf(2.0 * alpha);
    if omega_bar > 0.0 && ratio > 0.25 {
        return Err(Error::TailBound { terms });
    }

    let mut total: f64 = (1..terms).map(|k| f(k as f64)).sum();

    // int_N^inf f dx expanded in powers of omega_bar^2 / x^{2 alpha}.
    let mut tail_int = 0.0;
    let mut coeff = 1.0f64;
    for j in 0..200 {
        let power = p - 2.0 * alpha * (j as f64 + 1.0) + 1.0;
        // exponent is p - 2 alpha (j+1) < -1 by admissibility, so each term
        // integrates to N^{power} / (-power).
        let term = coeff * n.powf(power) / (-power);
        tail_int += term;
        coeff *= -(omega_bar * omega_bar);
        if term.abs() < 1e-16 * tail_int.abs().max(1e-300) {
            break;
        }
        if j == 199 {
            return Err(Error::TailBound { terms });
        }
    }
    total += tail_int + 0.5 * f(n);

    // Euler-Maclaurin remainder estimate: |f'(N)| / 12.
    let denom = n.powf(2.0 * alpha) + omega_bar * omega_bar;
    let fprime = (p * n.powf(p - 1.0) * denom
        - 2.0 * alpha * n.powf(2.0 * alpha - 1.0) * n.powf(p))
        / (denom * denom);
    if fprime.abs() / 12.0 > 1e-8 * total {
        return Err(Error::TailBound { terms });
    }
    Ok(total)
}

/// Slope of `log S` vs `log f` over `[f_lo, f_hi]`, from log-spaced bin
/// averages of the samples. Returns `(slope, stderr)`.
pub fn estimate_psd_slope(
    samples: &[(f64, f64)],
    f_lo: f64,
    f_hi: f64,
) -> Result<(f64, f64)> {
    if !(f_lo > 0.0 && f_hi >= 10.0 * f_lo) {
        return Err(Error::InvalidArgument(
            "slope window must span at least a decade of positive frequency".into(),
        ));
    }
    let in_band: Vec<(f64, f64)> = samples
        .iter()
        .filter(|&&(f, _)| f >= f_lo && f <= f_hi)
        .cloned()
        .collect();
    if in_band.len() < 20 {
        return Err(Error::InvalidArgument(format!(
            "slope window contains {} samples, need at least 20",
            in_band.len()
        )));
    }

    let decades = (f_hi / f_lo).log10();
    let n_bins = ((decades * 12.0).round() as usize).clamp(8, 60);
    let log_lo = f_lo.ln();
    let step = (f_hi.ln() - log_lo) / n_bins as f64;

    let mut sums = vec![(0.0f64, 0.0f64, 0usize); n_bins];
    for &(f, p) in &in_band {
        let idx = (((f.ln() - log_lo) / step) as usize).min(n_bins - 1);
        sums[idx].0 += f.ln();
        sums[idx].1 += p;
        sums[idx].2 += 1;
    }
    let pts: Vec<(f64, f64)> = sums
        .iter()
        .filter(|&&(_, p, c)| c > 0 && p > 0.0)
        .map(|&(lf, p, c)| (lf / c as f64, (p / c as f64).ln()))
        .collect();
    if pts.len() < 5 {
        return Err(Error::InvalidArgument(
            "too few non-empty log bins for a slope fit".into(),
        ));
    }
    let (slope, _, stderr) = linear_regression(&pts);
    Ok((slope, stderr))
}

/// Returns `(slope, intercept, slope_stderr)`.
fn linear_regression(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let dof = (n - 2.0).max(1.0);
    let sse: f64 = pts
        .iter()
        .map(|p| {
            let r = p.1 - slope * p.0 - intercept;
            r * r
        })
        .sum();
    let stderr = (sse / dof / sxx).sqrt();
    (slope, intercept, stderr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_power_law_recovered() {
        let values: Vec<f64> = (1..=50).map(|k| 4.0 * (k as f64).powi(2)).collect();
        let fit = fit_power_law(&values, 1, 50).unwrap();
        assert_relative_eq!(fit.exponent, 2.0, epsilon = 1e-12);
        assert_relative_eq!(fit.prefactor, 4.0, max_relative = 1e-10);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn fit_rejects_bad_windows() {
        let values = vec![1.0, 2.0, 3.0];
        assert!(fit_power_law(&values, 1, 3).is_err());
        let neg = vec![1.0, -1.0, 2.0, 3.0, 4.0, 5.0];
        assert!(fit_power_law(&neg, 1, 6).is_err());
    }

    #[test]
    fn zeta_prediction_cases() {
        let p = predict_zeta(2.0, -1.0).unwrap();
        assert!(p.admissible);
        assert_relative_eq!(p.zeta, -1.5);
        assert_relative_eq!(p.k_coefficient, 0.5); // 2 beta + alpha = 0

        let p = predict_zeta(2.0, -0.5).unwrap();
        assert!(p.admissible);
        assert_relative_eq!(p.zeta, -1.0);
        assert_relative_eq!(p.k_coefficient, 1.0 / 12.0);
    }

    #[test]
    fn correction_coefficient_cases() {
        assert_relative_eq!(correction_coefficient(2.0, -1.0).unwrap(), 0.5);
        // 2 beta + alpha = 1 -> 2p = 2, K = B_2 / 2! * Gamma(1) = 1/12.
        assert_relative_eq!(correction_coefficient(2.0, -0.5).unwrap(), 1.0 / 12.0);
        // Non-integer combination: no correction.
        assert_relative_eq!(correction_coefficient(2.5, -1.0).unwrap(), 0.0);
        // 2 beta + alpha = 3 -> 2p = 4, K = B_4 / 4! * 2! = -1/360.
        assert_relative_eq!(correction_coefficient(3.0, 0.0).unwrap(), -1.0 / 360.0);
    }

    #[test]
    fn inadmissible_at_boundary() {
        let p = predict_zeta(1.0, -1.0).unwrap();
        assert!(!p.admissible);
        assert!(asymptotic_psd(1.0, -1.0, 10.0).is_err());
    }

    #[test]
    fn cauchy_integral_example_value() {
        // alpha=2, beta=-1, w=100: (pi/4) sec(pi/4) 100^{-3/2} - 0.5 * 100^{-2}
        let v = asymptotic_psd(2.0, -1.0, 100.0).unwrap();
        let expect = std::f64::consts::PI / 4.0 * 2.0f64.sqrt() * 1e-3 - 5e-5;
        assert_relative_eq!(v, expect, max_relative = 1e-12);
        assert!((v - 1.0607e-3).abs() < 1e-6);
    }

    #[test]
    fn beta_half_gives_exact_one_over_f() {
        for &alpha in &[1.0, 2.0, 3.0] {
            let i1 = cauchy_moment_integral(alpha, -0.5, 10.0).unwrap();
            let i2 = cauchy_moment_integral(alpha, -0.5, 100.0).unwrap();
            assert_relative_eq!(i1 / i2, 10.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn direct_sum_zero_frequency_is_riemann_zeta() {
        // alpha=2, beta=-1: zeta(4) = pi^4 / 90.
        let s = lorentzian_sum_direct(2.0, -1.0, 0.0, 1000).unwrap();
        let zeta4 = std::f64::consts::PI.powi(4) / 90.0;
        assert_relative_eq!(s, zeta4, max_relative = 1e-9);
        assert!((s - 1.082323).abs() < 1e-6);
    }

    #[test]
    fn direct_sum_is_monotone_in_omega() {
        let a = lorentzian_sum_direct(2.0, -1.0, 10.0, 5000).unwrap();
        let b = lorentzian_sum_direct(2.0, -1.0, 20.0, 5000).unwrap();
        assert!(b < a);
    }

    #[test]
    fn direct_sum_rejects_short_truncations() {
        assert!(lorentzian_sum_direct(2.0, -1.0, 1e6, 100).is_err());
    }

    #[test]
    fn asymptotic_matches_direct_sum_at_large_omega() {
        for &(alpha, beta) in &[(2.0, -1.0), (2.0, -0.5), (3.0, -1.0)] {
            for &w in &[1e3, 1e4] {
                let direct = lorentzian_sum_direct(alpha, beta, w, 200_000).unwrap();
                let asym = asymptotic_psd(alpha, beta, w).unwrap();
                let rel = ((asym - direct) / direct).abs();
                assert!(
                    rel < 0.01,
                    "(alpha={alpha}, beta={beta}, w={w}): rel err {rel}"
                );
            }
        }
    }

    #[test]
    fn slope_of_white_spectrum_is_zero() {
        let samples: Vec<(f64, f64)> = (1..=2000)
            .map(|i| (i as f64 * 0.01, 3.0))
            .collect();
        let (slope, _) = estimate_psd_slope(&samples, 0.1, 10.0).unwrap();
        assert!(slope.abs() < 0.02, "slope {slope}");
    }

    #[test]
    fn slope_of_lorentzian_tail_is_minus_two() {
        let w0 = 0.01;
        let samples: Vec<(f64, f64)> = (1..=5000)
            .map(|i| {
                let f = i as f64 * 0.01;
                (f, w0 / (w0 * w0 + f * f))
            })
            .collect();
        let (slope, _) = estimate_psd_slope(&samples, 1.0, 40.0).unwrap();
        assert!((slope + 2.0).abs() < 0.05, "slope {slope}");
    }
}
