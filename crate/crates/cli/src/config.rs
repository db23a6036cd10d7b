//! Run configuration: a flat `key = value` file merged with CLI flags
//! (flags win), resolved to concrete values and snapshotted into the run
//! directory so any run can be reproduced from its own output.

use std::path::Path;

use markov_psd::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Mm1,
    Ring,
    Star,
}

impl Model {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mm1" => Ok(Self::Mm1),
            "ring" => Ok(Self::Ring),
            "star" => Ok(Self::Star),
            other => Err(Error::InvalidArgument(format!(
                "unknown model '{other}' (expected mm1, ring or star)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Mm1 => "mm1",
            Self::Ring => "ring",
            Self::Star => "star",
        }
    }
}

/// Partially specified settings, before defaults are applied. `None` means
/// "not given here"; merging keeps the higher-priority side.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub model: Option<String>,
    pub n: Option<usize>,
    pub eps: Option<f64>,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub seed: Option<u64>,
    pub realizations: Option<usize>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad value '{value}' for key '{key}'")))
}

impl Settings {
    /// Grammar: one `key = value` per line, `#` starts a comment, blank
    /// lines ignored. Unknown keys are errors.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut s = Self::default();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("config line '{line}' is not 'key = value'"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "model" => s.model = Some(value.to_string()),
                "n" => s.n = Some(parse_num(key, value)?),
                "eps" => s.eps = Some(parse_num(key, value)?),
                "lambda" => s.lambda = Some(parse_num(key, value)?),
                "mu" => s.mu = Some(parse_num(key, value)?),
                "seed" => s.seed = Some(parse_num(key, value)?),
                "realizations" => s.realizations = Some(parse_num(key, value)?),
                "t_end" => s.t_end = Some(parse_num(key, value)?),
                "dt" => s.dt = Some(parse_num(key, value)?),
                _ => {
                    return Err(Error::InvalidArgument(format!("unknown config key '{key}'")));
                }
            }
        }
        Ok(s)
    }

    /// Overlay `high` on top of `self`: any value set in `high` wins.
    pub fn overlaid_with(self, high: Settings) -> Settings {
        Settings {
            model: high.model.or(self.model),
            n: high.n.or(self.n),
            eps: high.eps.or(self.eps),
            lambda: high.lambda.or(self.lambda),
            mu: high.mu.or(self.mu),
            seed: high.seed.or(self.seed),
            realizations: high.realizations.or(self.realizations),
            t_end: high.t_end.or(self.t_end),
            dt: high.dt.or(self.dt),
        }
    }

    /// Fill in defaults and validate. `need_seed` is set for simulation
    /// commands, where an explicit seed is mandatory.
    pub fn resolve(&self, need_seed: bool) -> Result<RunConfig> {
        let model = Model::parse(
            self.model
                .as_deref()
                .ok_or_else(|| Error::InvalidArgument("--model is required".into()))?,
        )?;
        if need_seed && self.seed.is_none() {
            return Err(Error::InvalidArgument(
                "--seed is required for simulation commands".into(),
            ));
        }
        if self.eps.is_some() && model != Model::Mm1 {
            return Err(Error::InvalidArgument(
                "--eps only applies to the mm1 model".into(),
            ));
        }
        let n = self.n.unwrap_or(match model {
            Model::Mm1 | Model::Ring => 1000,
            Model::Star => 100,
        });
        // In the heavy-traffic parametrization the rates are pinned to
        // (1, 1 + eps); explicit --lambda/--mu are rejected to avoid a
        // silently ignored flag.
        let (lambda, mu) = match (model, self.eps) {
            (Model::Mm1, Some(eps)) => {
                if self.lambda.is_some() || self.mu.is_some() {
                    return Err(Error::InvalidArgument(
                        "give either --eps or --lambda/--mu, not both".into(),
                    ));
                }
                (1.0, 1.0 + eps)
            }
            _ => (self.lambda.unwrap_or(1.0), self.mu.unwrap_or(1.0)),
        };
        if !(lambda > 0.0 && mu > 0.0) {
            return Err(Error::InvalidArgument("rates must be positive".into()));
        }

        // Grid defaults: dt resolves the fastest exit rate, t_end covers
        // the slowest analytic mode (capped), and the sample count is
        // rounded up to a power of two for the FFT.
        let max_exit = match model {
            Model::Mm1 | Model::Ring => lambda + mu,
            Model::Star => (n as f64 * lambda).max(mu),
        };
        let dt = self.dt.unwrap_or(0.25 / max_exit);
        let omega_min = match model {
            Model::Mm1 => (mu.sqrt() - lambda.sqrt()).powi(2),
            Model::Ring => {
                (lambda + mu) * (1.0 - (std::f64::consts::TAU / n as f64).cos())
            }
            Model::Star => mu,
        };
        let t_end = self.t_end.unwrap_or_else(|| {
            let horizon = if omega_min > 0.0 { 100.0 / omega_min } else { f64::INFINITY };
            horizon.clamp(100.0 * dt, 1e7)
        });
        if !(t_end > 0.0 && dt > 0.0) {
            return Err(Error::InvalidArgument("t_end and dt must be positive".into()));
        }
        let n_samples = ((t_end / dt).ceil().max(2.0) as u64).next_power_of_two();
        let t_end = n_samples as f64 * dt;

        Ok(RunConfig {
            model,
            n,
            eps: self.eps,
            lambda,
            mu,
            seed: self.seed.unwrap_or(0),
            realizations: self.realizations.unwrap_or(8),
            t_end,
            dt,
        })
    }
}

/// Fully resolved configuration; what the snapshot records.
#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub model: Model,
    pub n: usize,
    pub eps: Option<f64>,
    pub lambda: f64,
    pub mu: f64,
    pub seed: u64,
    pub realizations: usize,
    pub t_end: f64,
    pub dt: f64,
}

impl RunConfig {
    /// Effective settings in the config-file grammar; re-running from this
    /// snapshot reproduces the run bit for bit.
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("model = {}\n", self.model.name()));
        out.push_str(&format!("n = {}\n", self.n));
        if let Some(eps) = self.eps {
            out.push_str(&format!("eps = {eps:.16e}\n"));
        } else {
            out.push_str(&format!("lambda = {:.16e}\n", self.lambda));
            out.push_str(&format!("mu = {:.16e}\n", self.mu));
        }
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("realizations = {}\n", self.realizations));
        out.push_str(&format!("t_end = {:.16e}\n", self.t_end));
        out.push_str(&format!("dt = {:.16e}\n", self.dt));
        out
    }
}
