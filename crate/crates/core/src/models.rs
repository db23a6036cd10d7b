//! Model zoo: truncated M/M/1 queue, tridiagonal Toeplitz closed forms,
//! ring random walk, star graph, and general birth-death chains with their
//! orthogonal-polynomial eigenstructure.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::markov::{Generator, Structure};

/// Birth and death rates of a birth-death chain.
///
/// `lambdas[i]` is the birth rate out of state `i` and `mus[i]` is the death
/// rate out of state `i + 1`, so `m = lambdas.len()` rate pairs describe the
/// first `m + 1` states of the chain.
#[derive(Debug, Clone)]
pub struct BirthDeathRates {
    lambdas: Vec<f64>,
    mus: Vec<f64>,
}

impl BirthDeathRates {
    pub fn new(lambdas: Vec<f64>, mus: Vec<f64>) -> Result<Self> {
        if lambdas.len() != mus.len() || lambdas.is_empty() {
            return Err(Error::InvalidArgument(
                "need equally many birth and death rates, at least one pair".into(),
            ));
        }
        if lambdas.iter().chain(mus.iter()).any(|&r| r <= 0.0) {
            return Err(Error::InvalidArgument("all rates must be positive".into()));
        }
        Ok(Self { lambdas, mus })
    }

    pub fn constant(lambda: f64, mu: f64, pairs: usize) -> Result<Self> {
        Self::new(vec![lambda; pairs], vec![mu; pairs])
    }

    pub fn pairs(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambda(&self, i: usize) -> f64 {
        self.lambdas[i]
    }

    /// Death rate out of state `i` (defined for `i >= 1`).
    pub fn mu(&self, i: usize) -> f64 {
        self.mus[i - 1]
    }

    /// Zero-row-sum generator over states `0..n`, reflecting at both ends.
    pub fn generator(&self, n: usize) -> Result<Generator> {
        if n < 2 || n > self.pairs() + 1 {
            return Err(Error::InvalidArgument(format!(
                "generator size {n} outside the described range"
            )));
        }
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let birth = if i + 1 < n { self.lambda(i) } else { 0.0 };
            let death = if i > 0 { self.mu(i) } else { 0.0 };
            if i + 1 < n {
                m[(i, i + 1)] = -birth;
            }
            if i > 0 {
                m[(i, i - 1)] = -death;
            }
            m[(i, i)] = birth + death;
        }
        Generator::from_matrix(m, Structure::Tridiagonal)
    }

    /// Top-left `n x n` principal minor of the (untruncated) generator: the
    /// last row keeps its full diagonal `lambda_{n-1} + mu_{n-1}` and does
    /// not sum to zero. This is the matrix whose characteristic polynomials
    /// satisfy the three-term recurrence below.
    pub fn principal_minor(&self, n: usize) -> Result<DMatrix<f64>> {
        if n < 1 || n > self.pairs() {
            return Err(Error::InvalidArgument(format!(
                "principal minor size {n} needs {n} rate pairs"
            )));
        }
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let death = if i > 0 { self.mu(i) } else { 0.0 };
            m[(i, i)] = self.lambda(i) + death;
            if i + 1 < n {
                m[(i, i + 1)] = -self.lambda(i);
                m[(i + 1, i)] = -self.mu(i + 1);
            }
        }
        Ok(m)
    }
}

/// Tridiagonal Toeplitz matrix `T_n(a, b, c)` parameters.
#[derive(Debug, Clone, Copy)]
pub struct ToeplitzParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub n: usize,
}

impl ToeplitzParams {
    pub fn new(a: f64, b: f64, c: f64, n: usize) -> Result<Self> {
        if !(a < 0.0 && c < 0.0 && b > 0.0) {
            return Err(Error::InvalidArgument(
                "toeplitz closed forms require a < 0, c < 0, b > 0".into(),
            ));
        }
        if n < 2 {
            return Err(Error::InvalidArgument("toeplitz size must be >= 2".into()));
        }
        Ok(Self { a, b, c, n })
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            m[(i, i)] = self.b;
            if i + 1 < self.n {
                m[(i, i + 1)] = self.c;
                m[(i + 1, i)] = self.a;
            }
        }
        m
    }
}

/// Closed-form eigenvalues of `T_n(a, b, c)`, ascending:
/// `omega_k = b - 2 sqrt(ac) cos(k pi / (n+1))`, `k = 1..n`.
pub fn toeplitz_eigenvalues(p: &ToeplitzParams) -> Vec<f64> {
    let root = (p.a * p.c).sqrt();
    (1..=p.n)
        .map(|k| p.b - 2.0 * root * (k as f64 * std::f64::consts::PI / (p.n as f64 + 1.0)).cos())
        .collect()
}

/// Unnormalized right/left eigenvector pair of `T_n(a, b, c)` for mode `k`.
#[derive(Debug, Clone)]
pub struct ToeplitzEigenvectors {
    pub right: DVector<f64>,
    pub left: DVector<f64>,
    /// `left . right`; divide the left vector by this to get `w v^T` a projector.
    pub normalizer: f64,
}

/// `v_{k,i} = (a/c)^{i/2} sin(k i pi / (n+1))`, `w_{k,i} = (c/a)^{i/2} sin(...)`.
pub fn toeplitz_eigenvectors(p: &ToeplitzParams, k: usize) -> Result<ToeplitzEigenvectors> {
    if k < 1 || k > p.n {
        return Err(Error::InvalidArgument(format!(
            "mode index {k} outside 1..={}",
            p.n
        )));
    }
    let ratio = p.a / p.c;
    let n1 = p.n as f64 + 1.0;
    let mut right = DVector::zeros(p.n);
    let mut left = DVector::zeros(p.n);
    for i in 1..=p.n {
        let s = (k as f64 * i as f64 * std::f64::consts::PI / n1).sin();
        right[i - 1] = ratio.powf(i as f64 / 2.0) * s;
        left[i - 1] = ratio.powf(-(i as f64) / 2.0) * s;
    }
    // sum_i sin^2(k i pi / (n+1)) = (n+1)/2
    let normalizer = n1 / 2.0;
    Ok(ToeplitzEigenvectors {
        right,
        left,
        normalizer,
    })
}

/// Heavy-traffic M/M/1 configuration: `lambda = 1`, `mu = 1 + epsilon`.
#[derive(Debug, Clone, Copy)]
pub struct HeavyTrafficConfig {
    pub epsilon: f64,
    pub n: usize,
}

impl HeavyTrafficConfig {
    pub fn new(epsilon: f64, n: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::InvalidArgument(
                "heavy traffic requires 0 < epsilon << 1".into(),
            ));
        }
        if n < 100 {
            return Err(Error::InvalidArgument(
                "heavy-traffic scaling window requires n >= 100".into(),
            ));
        }
        Ok(Self { epsilon, n })
    }

    pub fn generator(&self) -> Result<Generator> {
        mm1_generator(1.0, 1.0 + self.epsilon, self.n)
    }

    /// True when the truncation cuts below the bulk of the stationary law
    /// (`epsilon * n < 0.01`): eigen-scaling stays valid but the truncated
    /// chain is not the simulated chain.
    pub fn truncates_stationary_bulk(&self) -> bool {
        self.epsilon * (self.n as f64) < 0.01
    }
}

/// Heavy-traffic coupling approximation `|gamma_k| ~ sqrt(eps) n^2 / (pi k)`.
pub fn mm1_gamma_scaling(cfg: &HeavyTrafficConfig, k: usize) -> Result<f64> {
    if k < 1 || k > cfg.n / 10 {
        return Err(Error::InvalidArgument(format!(
            "scaling approximation only valid for 1 <= k <= n/10, got k={k}"
        )));
    }
    let n = cfg.n as f64;
    Ok(cfg.epsilon.sqrt() * n * n / (std::f64::consts::PI * k as f64))
}

/// Numeric eigenmodes of the heavy-traffic scaling window: the n-state
/// Toeplitz window of the infinite queue (absorbing-ended principal minor,
/// not the reflecting truncation), diagonalized after symmetrization by the
/// geometric weights `pi_i = (1 - rho) rho^i` of the infinite chain, with
/// the observable `x_i = i` on states `1..n`.
///
/// Couplings use the window's sine-amplitude convention, in which the
/// scaling approximation `|gamma_k| ~ sqrt(eps) n^2 / (pi k)` holds; the
/// projector-normalized coupling is `2/(n+1)` times the value returned
/// here. The reflecting truncation is deliberately not used: its cosine
/// modes couple to `x_i = i` like `k^-2` and miss the `k^-1` law entirely.
///
/// Returns `(omega_k, gamma_k^2)`, ascending in `omega_k`.
pub fn mm1_window_modes(cfg: &HeavyTrafficConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = cfg.n;
    if n > 2048 {
        return Err(Error::TooLarge { n, max: 2048 });
    }
    let eps = cfg.epsilon;
    let rho = 1.0 / (1.0 + eps);
    let off = -(1.0 + eps).sqrt();
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = 2.0 + eps;
        if i + 1 < n {
            h[(i, i + 1)] = off;
            h[(i + 1, i)] = off;
        }
    }
    let se = h.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));

    // unit eigenvector -> sine amplitude 1
    let amp = ((n as f64 + 1.0) / 2.0).sqrt();
    let mut omegas = Vec::with_capacity(n);
    let mut gammas_sq = Vec::with_capacity(n);
    for &j in &idx {
        let u = se.eigenvectors.column(j);
        let mut s = 0.0;
        for i in 1..=n {
            s += ((1.0 - rho) * rho.powi(i as i32)).sqrt() * i as f64 * u[i - 1];
        }
        let g = amp * s;
        omegas.push(se.eigenvalues[j]);
        gammas_sq.push(g * g);
    }
    Ok((omegas, gammas_sq))
}

/// Truncated M/M/1 generator on `n` states; the last row is closed to
/// `(-mu, mu)` so that row sums stay zero and the chain stays reversible.
pub fn mm1_generator(lambda: f64, mu: f64, n: usize) -> Result<Generator> {
    if lambda <= 0.0 || mu <= 0.0 {
        return Err(Error::InvalidArgument("rates must be positive".into()));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("need at least 2 states".into()));
    }
    let mut m = DMatrix::zeros(n, n);
    m[(0, 0)] = lambda;
    m[(0, 1)] = -lambda;
    for i in 1..n - 1 {
        m[(i, i - 1)] = -mu;
        m[(i, i)] = lambda + mu;
        m[(i, i + 1)] = -lambda;
    }
    m[(n - 1, n - 2)] = -mu;
    m[(n - 1, n - 1)] = mu;
    Generator::from_matrix(m, Structure::Tridiagonal)
}

/// Ring random walk on `n` states, clockwise rate `lambda`,
/// counterclockwise rate `mu` (right circulant generator).
pub fn ring_generator(lambda: f64, mu: f64, n: usize) -> Result<Generator> {
    if lambda <= 0.0 || mu <= 0.0 {
        return Err(Error::InvalidArgument("rates must be positive".into()));
    }
    if n < 3 {
        return Err(Error::InvalidArgument("ring needs at least 3 states".into()));
    }
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = lambda + mu;
        m[(i, (i + 1) % n)] = -lambda;
        m[(i, (i + n - 1) % n)] = -mu;
    }
    Generator::from_matrix(m, Structure::Circulant)
}

/// Closed-form nonzero eigenvalue of the unit-rate ring:
/// `omega_k = 2 - 2 cos(2 pi k / n)`, `k = 1..n-1` (k and n-k coincide).
pub fn ring_omega(n: usize, k: usize) -> f64 {
    2.0 - 2.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos()
}

/// Closed-form coupling `gamma_k = 1 / (2 sin(pi k / n))` for the unit-rate
/// ring with observable `x_q = q`; asymptotically `n / (2 pi k)` for k << n.
pub fn ring_gamma_closed_form(n: usize, k: usize) -> Result<f64> {
    if k < 1 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "mode index {k} outside 1..{n}"
        )));
    }
    Ok(1.0 / (2.0 * (std::f64::consts::PI * k as f64 / n as f64).sin()))
}

/// Star-graph walk with `n` peripheral states (n+1 states total):
/// center -> each peripheral at rate `lambda`, peripheral -> center at `mu`.
/// The generator is an arrowhead matrix; `n = 1` is the telegraph process.
pub fn star_generator(lambda: f64, mu: f64, n: usize) -> Result<Generator> {
    if lambda <= 0.0 || mu <= 0.0 {
        return Err(Error::InvalidArgument("rates must be positive".into()));
    }
    if n < 1 {
        return Err(Error::InvalidArgument(
            "star needs at least one peripheral state".into(),
        ));
    }
    let size = n + 1;
    let mut m = DMatrix::zeros(size, size);
    m[(0, 0)] = n as f64 * lambda;
    for p in 1..size {
        m[(0, p)] = -lambda;
        m[(p, 0)] = -mu;
        m[(p, p)] = mu;
    }
    Generator::from_matrix(m, Structure::Arrowhead)
}

/// First-row convention for the birth-death characteristic polynomials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// State 0 is the true origin: first diagonal entry is `lambda_0`.
    Origin,
    /// The window starts mid-chain: first diagonal entry is
    /// `lambda_0 + mu_1`, which makes the constant-rate case exactly
    /// Toeplitz.
    Interior,
}

/// Characteristic polynomials `f_0(x)..f_upto(x)` of the principal minors,
/// by the three-term recurrence
/// `f_{m+1}(x) = (lambda_m + mu_m - x) f_m(x) - lambda_{m-1} mu_m f_{m-1}(x)`.
pub fn birth_death_char_polys(
    r: &BirthDeathRates,
    x: f64,
    upto: usize,
    boundary: Boundary,
) -> Result<Vec<f64>> {
    if upto > r.pairs() {
        return Err(Error::InvalidArgument(format!(
            "char poly degree {upto} needs {upto} rate pairs, have {}",
            r.pairs()
        )));
    }
    let mut f = Vec::with_capacity(upto + 1);
    f.push(1.0);
    if upto == 0 {
        return Ok(f);
    }
    let d0 = match boundary {
        Boundary::Origin => r.lambda(0),
        Boundary::Interior => r.lambda(0) + r.mu(1),
    };
    f.push(d0 - x);
    for m in 1..upto {
        let diag = r.lambda(m) + r.mu(m);
        let prod = r.lambda(m - 1) * r.mu(m);
        let next = (diag - x) * f[m] - prod * f[m - 1];
        f.push(next);
    }
    Ok(f)
}

/// All `n` eigenvalues of the size-`n` principal minor, found by bisection:
/// the roots of `f_{m}` strictly interlace the roots of `f_{m+1}`, so each
/// level's roots bracket the next level's.
pub fn birth_death_truncation_eigenvalues(
    r: &BirthDeathRates,
    n: usize,
    boundary: Boundary,
) -> Result<Vec<f64>> {
    if n < 1 || n > r.pairs() {
        return Err(Error::InvalidArgument(format!(
            "truncation size {n} needs {n} rate pairs"
        )));
    }
    // Gershgorin bound on the spectrum of every principal minor.
    let mut hi = 0.0f64;
    for i in 0..n {
        let death = if i > 0 { r.mu(i) } else { 0.0 };
        let extra = match boundary {
            Boundary::Interior if i == 0 => r.mu(1),
            _ => 0.0,
        };
        let diag = r.lambda(i) + death + extra;
        let off = r.lambda(i) + if i > 0 { r.mu(i) } else { 0.0 };
        hi = hi.max(diag + off);
    }
    let lo = -1e-9 * hi.max(1.0);
    hi += 1e-9 * hi.max(1.0);

    let eval = |m: usize, x: f64| -> f64 {
        birth_death_char_polys(r, x, m, boundary).expect("degree checked")[m]
    };

    let mut roots: Vec<f64> = vec![match boundary {
        Boundary::Origin => r.lambda(0),
        Boundary::Interior => r.lambda(0) + r.mu(1),
    }];
    for m in 2..=n {
        let mut brackets = Vec::with_capacity(m + 1);
        brackets.push(lo);
        brackets.extend_from_slice(&roots);
        brackets.push(hi);
        let mut next = Vec::with_capacity(m);
        for w in brackets.windows(2) {
            next.push(bisect_root(|x| eval(m, x), w[0], w[1])?);
        }
        roots = next;
    }
    Ok(roots)
}

fn bisect_root(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::InvalidArgument(
            "bisection bracket does not straddle a root".into(),
        ));
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Orthogonal-polynomial eigenvector coefficients for one eigenvalue of the
/// size-`n` principal minor: `v_{k,i} = q_k psi_i(omega_k)` with
/// `psi_i(x) = f_{i-1}(x) / beta_{i-1}` and `beta_i` the product of the
/// first `i` death rates.
///
/// For general rates `psi(omega_k)` is the left eigenvector of the
/// truncation; in the symmetric (heavy-traffic) regime, where the formula
/// is used, left and right eigenvectors coincide.
#[derive(Debug, Clone)]
pub struct EigvecCoeffs {
    /// `psi_1(omega_k) .. psi_n(omega_k)`.
    pub psi: Vec<f64>,
    /// Squared normalization `q_k^2`.
    pub q_sq: f64,
}

pub fn birth_death_eigvec_coeffs(
    r: &BirthDeathRates,
    n: usize,
    eigenvalues: &[f64],
    k: usize,
    boundary: Boundary,
) -> Result<EigvecCoeffs> {
    if eigenvalues.len() != n {
        return Err(Error::LengthMismatch {
            left: eigenvalues.len(),
            right: n,
        });
    }
    if k >= n {
        return Err(Error::InvalidArgument(format!(
            "eigenvalue index {k} outside 0..{n}"
        )));
    }
    let omega_k = eigenvalues[k];
    let spread = eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        - eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    for (i, &w) in eigenvalues.iter().enumerate() {
        if i != k && (omega_k - w).abs() < 1e-10 * spread.max(1.0) {
            return Err(Error::InvalidArgument(
                "near-degenerate eigenvalue: q_k^2 denominator vanishes".into(),
            ));
        }
    }

    // f_0 .. f_n evaluated at omega_k; psi_i = f_{i-1} / beta_{i-1}.
    let f = birth_death_char_polys(r, omega_k, n, boundary)?;
    let mut beta = vec![1.0f64; n + 1];
    for i in 1..=n {
        beta[i] = beta[i - 1] * r.mu(i);
    }
    let psi: Vec<f64> = (1..=n).map(|i| f[i - 1] / beta[i - 1]).collect();

    // q_k^2 = beta_{n-1} / (psi_n(omega_k) prod_{i != k} (omega_k - omega_i)),
    // with a (-1)^{n-1} factor from writing the characteristic polynomial as
    // det(G - x) instead of det(x - G); the combination is positive for a
    // symmetrizable tridiagonal matrix.
    let mut denom = psi[n - 1];
    for (i, &w) in eigenvalues.iter().enumerate() {
        if i != k {
            denom *= omega_k - w;
        }
    }
    let sign = if (n - 1) % 2 == 0 { 1.0 } else { -1.0 };
    let q_sq = sign * beta[n - 1] / denom;
    Ok(EigvecCoeffs { psi, q_sq })
}
