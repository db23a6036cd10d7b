//! Finite-state CTMC generators, stationary distributions and the
//! pi-weighted geometry they induce.
//!
//! Sign convention: `P(tau) = exp(-G * tau)`, so a valid generator has
//! nonnegative diagonal, nonpositive off-diagonal and zero row sums.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Structural tag used for solver dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    Dense,
    Tridiagonal,
    Circulant,
    Arrowhead,
}

/// Observable values attached to each state.
pub type StateWeights = DVector<f64>;

/// Infinitesimal generator of a finite-state CTMC.
#[derive(Debug, Clone)]
pub struct Generator {
    entries: DMatrix<f64>,
    structure: Structure,
}

/// One violated generator invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    RowSum { row: usize, sum: f64 },
    SignPattern { row: usize, col: usize, value: f64 },
    NotIrreducible,
}

/// Outcome of [`Generator::validate`]; empty iff the generator is valid.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl Generator {
    /// Wrap a rate matrix without validating it. Must be square.
    pub fn from_matrix(entries: DMatrix<f64>, structure: Structure) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::NotSquare {
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        if entries.nrows() < 2 {
            return Err(Error::InvalidGenerator(
                "state count must be at least 2".into(),
            ));
        }
        Ok(Self { entries, structure })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    /// Largest absolute rate; tolerances are taken relative to this scale.
    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self) -> bool {
        let tol = 1e-12 * self.max_abs_entry().max(1.0);
        let n = self.n();
        for i in 0..n {
            for j in (i + 1)..n {
                if (self.entries[(i, j)] - self.entries[(j, i)]).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Check row sums, sign pattern and irreducibility.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let n = self.n();
        let scale = self.max_abs_entry().max(f64::MIN_POSITIVE);
        let tol = 1e-12 * scale;

        for i in 0..n {
            let sum: f64 = self.entries.row(i).iter().sum();
            if sum.abs() > tol {
                report.violations.push(Violation::RowSum { row: i, sum });
            }
            for j in 0..n {
                let v = self.entries[(i, j)];
                let bad = if i == j { v < -tol } else { v > tol };
                if bad {
                    report.violations.push(Violation::SignPattern {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
        }

        if !self.is_strongly_connected() {
            report.violations.push(Violation::NotIrreducible);
        }
        report
    }

    /// Strong connectivity of the directed graph of nonzero off-diagonal rates.
    pub fn is_strongly_connected(&self) -> bool {
        let n = self.n();
        let edge = |i: usize, j: usize| i != j && self.entries[(i, j)] != 0.0;
        reachable_from(0, n, |i, j| edge(i, j)) && reachable_from(0, n, |i, j| edge(j, i))
    }

    /// Stationary distribution: the left null vector of G, normalized to 1.
    ///
    /// Tridiagonal generators use the exact product-form recursion; the
    /// general path solves the balance equations with one row replaced by
    /// the normalization constraint.
    pub fn stationary_distribution(&self) -> Result<StationaryDistribution> {
        let n = self.n();
        let pi = match self.structure {
            Structure::Tridiagonal => {
                // pi_{k+1} = pi_k * lambda_k / mu_{k+1}, in log space to
                // survive long chains with rho far from 1.
                let mut logw = vec![0.0f64; n];
                for k in 0..n - 1 {
                    let lambda = -self.entries[(k, k + 1)];
                    let mu = -self.entries[(k + 1, k)];
                    if lambda <= 0.0 || mu <= 0.0 {
                        return Err(Error::InvalidGenerator(
                            "tridiagonal generator has a nonpositive transition rate".into(),
                        ));
                    }
                    logw[k + 1] = logw[k] + lambda.ln() - mu.ln();
                }
                let logmax = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let w: Vec<f64> = logw.iter().map(|&l| (l - logmax).exp()).collect();
                let total: f64 = w.iter().sum();
                DVector::from_iterator(n, w.iter().map(|&v| v / total))
            }
            _ => {
                // Solve G^T pi = 0 with the last equation replaced by sum(pi) = 1.
                let mut a = self.entries.transpose();
                for j in 0..n {
                    a[(n - 1, j)] = 1.0;
                }
                let mut b = DVector::zeros(n);
                b[n - 1] = 1.0;
                let lu = a.lu();
                let pi = lu.solve(&b).ok_or(Error::Reducible)?;
                pi
            }
        };

        let scale = self.max_abs_entry().max(f64::MIN_POSITIVE);
        let residual = (pi.transpose() * &self.entries).abs().max();
        if residual > 1e-10 * scale {
            return Err(Error::Reducible);
        }
        if pi.iter().any(|&p| p <= 0.0) {
            return Err(Error::Reducible);
        }
        Ok(StationaryDistribution { pi })
    }

    /// Detailed balance: `pi_i G_ij == pi_j G_ji` within `1e-10 * max|entry|`.
    pub fn check_detailed_balance(&self, pi: &StationaryDistribution) -> bool {
        self.detailed_balance_violation(pi) <= 1e-10 * self.max_abs_entry()
    }

    pub fn detailed_balance_violation(&self, pi: &StationaryDistribution) -> f64 {
        let n = self.n();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                let d = pi.pi[i] * self.entries[(i, j)] - pi.pi[j] * self.entries[(j, i)];
                worst = worst.max(d.abs());
            }
        }
        worst
    }

    /// Dense transition matrix `P(tau) = exp(-G tau)`. Oracle-grade only.
    pub fn transition_matrix(&self, tau: f64) -> Result<DMatrix<f64>> {
        const MAX_N: usize = 2048;
        if self.n() > MAX_N {
            return Err(Error::TooLarge {
                n: self.n(),
                max: MAX_N,
            });
        }
        if !(tau >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tau must be nonnegative, got {tau}"
            )));
        }
        Ok((-&self.entries * tau).exp())
    }
}

fn reachable_from(start: usize, n: usize, edge: impl Fn(usize, usize) -> bool) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    let mut count = 1;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            if !seen[j] && edge(i, j) {
                seen[j] = true;
                count += 1;
                stack.push(j);
            }
        }
    }
    count == n
}

/// Stationary probability vector over the states.
#[derive(Debug, Clone)]
pub struct StationaryDistribution {
    pi: DVector<f64>,
}

impl StationaryDistribution {
    pub fn from_vector(pi: DVector<f64>) -> Result<Self> {
        if pi.iter().any(|&p| p <= 0.0) {
            return Err(Error::InvalidArgument(
                "stationary probabilities must be positive".into(),
            ));
        }
        let total: f64 = pi.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "stationary probabilities must sum to 1, got {total}"
            )));
        }
        Ok(Self { pi })
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.pi
    }

    pub fn n(&self) -> usize {
        self.pi.len()
    }

    /// `<u, v>_pi = sum_i pi_i u_i v_i`.
    pub fn inner_product(&self, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
        if u.len() != v.len() || u.len() != self.pi.len() {
            return Err(Error::LengthMismatch {
                left: u.len(),
                right: v.len(),
            });
        }
        Ok(self
            .pi
            .iter()
            .zip(u.iter().zip(v.iter()))
            .map(|(&p, (&a, &b))| p * a * b)
            .sum())
    }

    /// Stationary mean `<x>` of an observable.
    pub fn mean(&self, x: &DVector<f64>) -> Result<f64> {
        let ones = DVector::from_element(self.pi.len(), 1.0);
        self.inner_product(x, &ones)
    }

    /// Stationary variance `<x^2> - <x>^2`.
    pub fn variance(&self, x: &DVector<f64>) -> Result<f64> {
        let m = self.mean(x)?;
        Ok(self.inner_product(x, x)? - m * m)
    }
}

/// Free-function form of the pi-weighted scalar product.
pub fn pi_inner_product(
    u: &DVector<f64>,
    v: &DVector<f64>,
    pi: &StationaryDistribution,
) -> Result<f64> {
    pi.inner_product(u, v)
}
