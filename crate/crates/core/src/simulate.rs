//! Gillespie sampling of jump processes, uniform resampling, and averaged
//! periodograms.
//!
//! Realization `i` of an ensemble uses stream `i` of a counter-based RNG
//! seeded with the master seed, so ensembles are reproducible regardless of
//! evaluation order. Periodograms are one-sided and normalized so that
//! `sum_j P(f_j) df` equals the series variance exactly (the interior bins
//! carry a factor 2, the Nyquist bin does not).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::markov::{Generator, StationaryDistribution, StateWeights};
use crate::spectral::LorentzianSpectrum;

/// A continuous-time jump process the Gillespie loop can drive.
///
/// Jump and initial-state draws take a single uniform variate so that every
/// implementation consumes randomness in the same pattern; this keeps fused
/// simulation paths bit-identical to the composed ones.
pub trait JumpModel {
    /// Total exit rate out of `state`; must be positive (no absorbing states).
    fn exit_rate(&self, state: usize) -> f64;

    /// Next state given a uniform `u` in `[0, 1)`; must differ from `state`.
    fn next_state(&self, state: usize, u: f64) -> usize;

    /// Initial state drawn from the stationary law, `u` uniform in `[0, 1)`.
    fn initial_state(&self, u: f64) -> usize;

    /// Observable attached to a state. Defaults to the state index.
    fn observable(&self, state: usize) -> f64 {
        state as f64
    }
}

/// Unbounded M/M/1 queue-length counter: births at `lambda`, deaths at `mu`,
/// no death at zero. Requires `lambda < mu` so the stationary law exists
/// (geometric with ratio `lambda/mu`).
#[derive(Debug, Clone, Copy)]
pub struct Mm1Counter {
    lambda: f64,
    mu: f64,
}

impl Mm1Counter {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda > 0.0 && mu > lambda) {
            return Err(Error::InvalidArgument(
                "need 0 < lambda < mu for a stable queue".into(),
            ));
        }
        Ok(Self { lambda, mu })
    }

    /// Heavy-traffic parametrization `lambda = 1`, `mu = 1 + eps`.
    pub fn heavy_traffic(eps: f64) -> Result<Self> {
        Self::new(1.0, 1.0 + eps)
    }

    pub fn utilization(&self) -> f64 {
        self.lambda / self.mu
    }

    /// Stationary mean queue length `rho / (1 - rho)`.
    pub fn mean_queue_length(&self) -> f64 {
        let rho = self.utilization();
        rho / (1.0 - rho)
    }
}

impl JumpModel for Mm1Counter {
    fn exit_rate(&self, state: usize) -> f64 {
        if state == 0 {
            self.lambda
        } else {
            self.lambda + self.mu
        }
    }

    fn next_state(&self, state: usize, u: f64) -> usize {
        if state == 0 {
            1
        } else if u * (self.lambda + self.mu) < self.lambda {
            state + 1
        } else {
            state - 1
        }
    }

    fn initial_state(&self, u: f64) -> usize {
        // Geometric: P(X >= m) = rho^m.
        let rho = self.utilization();
        ((1.0 - u).ln() / rho.ln()).floor().max(0.0) as usize
    }
}

/// Biased random walk on a ring of `n` sites: `lambda` clockwise,
/// `mu` counterclockwise. Observable is the site index (no winding).
#[derive(Debug, Clone, Copy)]
pub struct RingWalk {
    lambda: f64,
    mu: f64,
    n: usize,
}

impl RingWalk {
    pub fn new(lambda: f64, mu: f64, n: usize) -> Result<Self> {
        if lambda <= 0.0 || mu <= 0.0 {
            return Err(Error::InvalidArgument("rates must be positive".into()));
        }
        if n < 3 {
            return Err(Error::InvalidArgument("ring needs at least 3 sites".into()));
        }
        Ok(Self { lambda, mu, n })
    }
}

impl JumpModel for RingWalk {
    fn exit_rate(&self, _state: usize) -> f64 {
        self.lambda + self.mu
    }

    fn next_state(&self, state: usize, u: f64) -> usize {
        if u * (self.lambda + self.mu) < self.lambda {
            (state + 1) % self.n
        } else {
            (state + self.n - 1) % self.n
        }
    }

    fn initial_state(&self, u: f64) -> usize {
        ((u * self.n as f64) as usize).min(self.n - 1)
    }
}

/// Walk on a star: state 0 is the hub, states `1..=n` are leaves. The hub
/// jumps to a uniform leaf at total rate `n * lambda`; each leaf returns at
/// rate `mu`. With `lambda = mu` the stationary law is uniform.
#[derive(Debug, Clone, Copy)]
pub struct StarWalk {
    lambda: f64,
    mu: f64,
    n: usize,
}

impl StarWalk {
    pub fn new(lambda: f64, mu: f64, n: usize) -> Result<Self> {
        if lambda <= 0.0 || mu <= 0.0 {
            return Err(Error::InvalidArgument("rates must be positive".into()));
        }
        if n < 1 {
            return Err(Error::InvalidArgument("star needs at least one leaf".into()));
        }
        Ok(Self { lambda, mu, n })
    }
}

impl JumpModel for StarWalk {
    fn exit_rate(&self, state: usize) -> f64 {
        if state == 0 {
            self.n as f64 * self.lambda
        } else {
            self.mu
        }
    }

    fn next_state(&self, state: usize, u: f64) -> usize {
        if state == 0 {
            1 + ((u * self.n as f64) as usize).min(self.n - 1)
        } else {
            0
        }
    }

    fn initial_state(&self, u: f64) -> usize {
        // pi_hub proportional to mu, each leaf proportional to lambda.
        let total = self.mu + self.n as f64 * self.lambda;
        if u * total < self.mu {
            0
        } else {
            let v = (u * total - self.mu) / self.lambda;
            1 + (v as usize).min(self.n - 1)
        }
    }
}

/// Simulation driven by an explicit finite generator, with an observable
/// vector; used to validate the analytic spectrum on small chains.
#[derive(Debug, Clone)]
pub struct GeneratorChain {
    rates: Vec<Vec<(usize, f64)>>,
    exit: Vec<f64>,
    pi_cdf: Vec<f64>,
    x: Vec<f64>,
}

impl GeneratorChain {
    pub fn new(g: &Generator, pi: &StationaryDistribution, x: &StateWeights) -> Result<Self> {
        let n = g.n();
        if x.len() != n {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: n,
            });
        }
        let m = g.entries();
        let mut rates = Vec::with_capacity(n);
        let mut exit = Vec::with_capacity(n);
        for i in 0..n {
            let mut out = Vec::new();
            let mut total = 0.0;
            for j in 0..n {
                if j != i && m[(i, j)] < 0.0 {
                    out.push((j, -m[(i, j)]));
                    total += -m[(i, j)];
                }
            }
            if total <= 0.0 {
                return Err(Error::Simulation(format!("state {i} is absorbing")));
            }
            rates.push(out);
            exit.push(total);
        }
        let pi_vec = pi.as_vector();
        let mut pi_cdf = Vec::with_capacity(n);
        let mut acc = 0.0;
        for i in 0..n {
            acc += pi_vec[i];
            pi_cdf.push(acc);
        }
        Ok(Self {
            rates,
            exit,
            pi_cdf,
            x: x.iter().cloned().collect(),
        })
    }
}

impl JumpModel for GeneratorChain {
    fn exit_rate(&self, state: usize) -> f64 {
        self.exit[state]
    }

    fn next_state(&self, state: usize, u: f64) -> usize {
        let target = u * self.exit[state];
        let mut acc = 0.0;
        let out = &self.rates[state];
        for &(j, r) in out {
            acc += r;
            if target < acc {
                return j;
            }
        }
        out.last().expect("no absorbing states").0
    }

    fn initial_state(&self, u: f64) -> usize {
        match self.pi_cdf.iter().position(|&c| u < c) {
            Some(i) => i,
            None => self.pi_cdf.len() - 1,
        }
    }

    fn observable(&self, state: usize) -> f64 {
        self.x[state]
    }
}

/// Ensemble parameters. The grid length `t_end / sample_dt` must round to a
/// power of two (FFT length).
#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub seed: u64,
    pub t_end: f64,
    pub sample_dt: f64,
    pub n_realizations: usize,
}

impl SimConfig {
    pub fn new(seed: u64, t_end: f64, sample_dt: f64, n_realizations: usize) -> Result<Self> {
        if !(t_end > 0.0 && sample_dt > 0.0) {
            return Err(Error::InvalidArgument(
                "t_end and sample_dt must be positive".into(),
            ));
        }
        if n_realizations < 1 {
            return Err(Error::InvalidArgument(
                "need at least one realization".into(),
            ));
        }
        let cfg = Self {
            seed,
            t_end,
            sample_dt,
            n_realizations,
        };
        let n = cfg.n_samples();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "t_end/sample_dt rounds to {n}, not a power of two"
            )));
        }
        Ok(cfg)
    }

    /// Grid with `2^log2_len` samples of spacing `sample_dt`.
    pub fn with_log2_len(
        seed: u64,
        sample_dt: f64,
        log2_len: u32,
        n_realizations: usize,
    ) -> Result<Self> {
        let n = 1u64 << log2_len;
        Self::new(seed, n as f64 * sample_dt, sample_dt, n_realizations)
    }

    pub fn n_samples(&self) -> usize {
        (self.t_end / self.sample_dt).round() as usize
    }

    fn rng(&self, realization: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(realization as u64);
        rng
    }
}

/// Event-time sample path: `states[0]` holds on `[0, jump_times[1])`,
/// `states[i]` from `jump_times[i]` to the next event (or `t_end`).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub jump_times: Vec<f64>,
    pub states: Vec<usize>,
    pub t_end: f64,
}

impl Trajectory {
    /// Exact occupation-weighted time average of the observable.
    pub fn time_average<M: JumpModel>(&self, model: &M) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.states.len() {
            let t0 = self.jump_times[i];
            let t1 = if i + 1 < self.jump_times.len() {
                self.jump_times[i + 1]
            } else {
                self.t_end
            };
            acc += model.observable(self.states[i]) * (t1 - t0);
        }
        acc / self.t_end
    }
}

fn hold_time<M: JumpModel>(model: &M, state: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let rate = model.exit_rate(state);
    if !(rate > 0.0) {
        return Err(Error::Simulation(format!(
            "state {state} has exit rate {rate}"
        )));
    }
    // 1 - U is in (0, 1], so the log is finite.
    let u: f64 = rng.gen();
    Ok(-(1.0 - u).ln() / rate)
}

/// Gillespie sample path for realization `realization` of the ensemble.
pub fn gillespie_path<M: JumpModel>(
    model: &M,
    cfg: &SimConfig,
    realization: usize,
) -> Result<Trajectory> {
    let mut rng = cfg.rng(realization);
    let mut state = model.initial_state(rng.gen());
    let mut t = 0.0f64;
    let mut jump_times = vec![0.0];
    let mut states = vec![state];
    loop {
        t += hold_time(model, state, &mut rng)?;
        if t >= cfg.t_end {
            break;
        }
        state = model.next_state(state, rng.gen());
        jump_times.push(t);
        states.push(state);
    }
    Ok(Trajectory {
        jump_times,
        states,
        t_end: cfg.t_end,
    })
}

/// Previous-value-hold resampling onto the uniform grid
/// `t_i = i * sample_dt`, which is exact for a piecewise-constant path.
pub fn resample_uniform<M: JumpModel>(
    model: &M,
    traj: &Trajectory,
    sample_dt: f64,
) -> Result<Vec<f64>> {
    if !(sample_dt > 0.0) {
        return Err(Error::InvalidArgument("sample_dt must be positive".into()));
    }
    let n = (traj.t_end / sample_dt).round() as usize;
    let mut series = Vec::with_capacity(n);
    let mut ev = 0usize;
    for i in 0..n {
        let t = i as f64 * sample_dt;
        while ev + 1 < traj.jump_times.len() && traj.jump_times[ev + 1] <= t {
            ev += 1;
        }
        series.push(model.observable(traj.states[ev]));
    }
    Ok(series)
}

/// One realization simulated straight onto the uniform grid, without
/// materializing the event list. Consumes randomness in the same order as
/// `gillespie_path`, so the output is bit-identical to
/// `resample_uniform(gillespie_path(..))`.
fn sampled_path<M: JumpModel>(
    model: &M,
    cfg: &SimConfig,
    realization: usize,
) -> Result<Vec<f64>> {
    let mut rng = cfg.rng(realization);
    let mut state = model.initial_state(rng.gen());
    let n = cfg.n_samples();
    let mut series = Vec::with_capacity(n);
    let mut t = 0.0f64;
    let mut next_jump = t + hold_time(model, state, &mut rng)?;
    for i in 0..n {
        let grid_t = i as f64 * cfg.sample_dt;
        while next_jump <= grid_t && next_jump < cfg.t_end {
            state = model.next_state(state, rng.gen());
            t = next_jump;
            next_jump = t + hold_time(model, state, &mut rng)?;
        }
        series.push(model.observable(state));
    }
    Ok(series)
}

/// One-sided spectral estimate on the grid `f_j = j / (N * sample_dt)`.
#[derive(Debug, Clone)]
pub struct Periodogram {
    pub freqs: Vec<f64>,
    pub power: Vec<f64>,
    pub n_realizations: usize,
    pub sample_dt: f64,
}

impl Periodogram {
    /// `sum_j P(f_j) * df`; equals the series variance for a single
    /// realization.
    pub fn total_power(&self) -> f64 {
        let df = self.freqs[0];
        self.power.iter().sum::<f64>() * df
    }

    /// Samples restricted to `[f_lo, f_hi]` as `(freq, power)` pairs.
    pub fn band(&self, f_lo: f64, f_hi: f64) -> Vec<(f64, f64)> {
        self.freqs
            .iter()
            .zip(&self.power)
            .filter(|&(&f, _)| f >= f_lo && f <= f_hi)
            .map(|(&f, &p)| (f, p))
            .collect()
    }
}

/// Plain periodogram with mean removal, no window. Bins `1..N/2` carry a
/// factor 2 so the one-sided sum reproduces the variance; the Nyquist bin
/// `N/2` does not.
pub fn periodogram(series: &[f64], sample_dt: f64) -> Result<Periodogram> {
    let n = series.len();
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "series length {n} is not a power of two"
        )));
    }
    if !(sample_dt > 0.0) {
        return Err(Error::InvalidArgument("sample_dt must be positive".into()));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = series
        .iter()
        .map(|&v| Complex::new(v - mean, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let half = n / 2;
    let scale = sample_dt / n as f64;
    let mut freqs = Vec::with_capacity(half);
    let mut power = Vec::with_capacity(half);
    for j in 1..=half {
        let two_sided = scale * buf[j].norm_sqr();
        let p = if j < half { 2.0 * two_sided } else { two_sided };
        freqs.push(j as f64 / (n as f64 * sample_dt));
        power.push(p);
    }
    Ok(Periodogram {
        freqs,
        power,
        n_realizations: 1,
        sample_dt,
    })
}

/// Averaged periodogram plus the ensemble's mean time-averaged observable.
#[derive(Debug, Clone)]
pub struct EnsembleStats {
    pub periodogram: Periodogram,
    pub mean_observable: f64,
}

/// Sequentially simulates `cfg.n_realizations` paths and averages their
/// periodograms in realization order. Paths are generated straight onto the
/// sample grid, so memory stays at one grid plus one FFT buffer.
pub fn run_ensemble<M: JumpModel>(model: &M, cfg: &SimConfig) -> Result<EnsembleStats> {
    let mut acc: Option<Periodogram> = None;
    let mut mean_obs = 0.0;
    for r in 0..cfg.n_realizations {
        let series = sampled_path(model, cfg, r)?;
        mean_obs += series.iter().sum::<f64>() / series.len() as f64;
        let pg = periodogram(&series, cfg.sample_dt)?;
        match &mut acc {
            None => acc = Some(pg),
            Some(a) => {
                for (p, q) in a.power.iter_mut().zip(&pg.power) {
                    *p += q;
                }
            }
        }
    }
    let mut pg = acc.expect("n_realizations >= 1");
    let r = cfg.n_realizations as f64;
    for p in &mut pg.power {
        *p /= r;
    }
    pg.n_realizations = cfg.n_realizations;
    Ok(EnsembleStats {
        periodogram: pg,
        mean_observable: mean_obs / r,
    })
}

/// See [`run_ensemble`]; this is the same computation without the
/// time-average bookkeeping in the result.
pub fn averaged_periodogram<M: JumpModel>(model: &M, cfg: &SimConfig) -> Result<Periodogram> {
    Ok(run_ensemble(model, cfg)?.periodogram)
}

/// Analytic Lorentzian-sum value mapped to the empirical one-sided
/// periodogram convention: `P(f) = 4 * S(2 pi f)` (factor 2 for the
/// two-sided autocorrelation transform, factor 2 for one-sidedness).
pub fn analytic_psd_at_freq(spectrum: &LorentzianSpectrum, freq: f64) -> f64 {
    4.0 * spectrum
        .evaluate(2.0 * std::f64::consts::PI * freq)
        .expect("nonnegative frequency")
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonBin {
    pub freq: f64,
    pub empirical: f64,
    pub analytic: f64,
    pub log10_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub f_lo: f64,
    pub f_hi: f64,
    pub n_realizations: usize,
    pub bins: Vec<ComparisonBin>,
    pub max_abs_log10_ratio: f64,
}

/// Log-binned comparison of an averaged periodogram against the analytic
/// spectrum over `[f_lo, f_hi]`.
pub fn compare_analytic_empirical(
    pg: &Periodogram,
    spectrum: &LorentzianSpectrum,
    f_lo: f64,
    f_hi: f64,
) -> Result<ComparisonReport> {
    if !(f_lo > 0.0 && f_hi > f_lo) {
        return Err(Error::InvalidArgument("need 0 < f_lo < f_hi".into()));
    }
    let in_band = pg.band(f_lo, f_hi);
    if in_band.is_empty() {
        return Err(Error::InvalidArgument(
            "no periodogram samples in the comparison band".into(),
        ));
    }
    let decades = (f_hi / f_lo).log10();
    let n_bins = ((decades * 10.0).round() as usize).clamp(4, 50);
    let log_lo = f_lo.ln();
    let step = (f_hi.ln() - log_lo) / n_bins as f64;

    let mut sums = vec![(0.0f64, 0.0f64, 0usize); n_bins];
    for (f, p) in in_band {
        let idx = (((f.ln() - log_lo) / step) as usize).min(n_bins - 1);
        sums[idx].0 += f.ln();
        sums[idx].1 += p;
        sums[idx].2 += 1;
    }
    let mut bins = Vec::new();
    let mut max_abs = 0.0f64;
    for &(lf, p, c) in &sums {
        if c == 0 {
            continue;
        }
        let freq = (lf / c as f64).exp();
        let empirical = p / c as f64;
        let analytic = analytic_psd_at_freq(spectrum, freq);
        let log10_ratio = (empirical / analytic).log10();
        max_abs = max_abs.max(log10_ratio.abs());
        bins.push(ComparisonBin {
            freq,
            empirical,
            analytic,
            log10_ratio,
        });
    }
    Ok(ComparisonReport {
        f_lo,
        f_hi,
        n_realizations: pg.n_realizations,
        bins,
        max_abs_log10_ratio: max_abs,
    })
}
