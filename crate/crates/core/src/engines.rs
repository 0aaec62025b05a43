//! Seeded stochastic engines.
//!
//! Four regimes share one interface: a Gaussian, a Weibull and an integer-shape
//! Gamma distribution, all driven by a ChaCha8 uniform stream, and a logistic
//! map whose growth rate drifts by a fixed increment each step.
//!
//! Every engine emits three views of the same variate:
//!
//! * [`StochasticEngine::sample_raw`] is a draw from the configured law;
//! * [`StochasticEngine::sample_unit`] pushes that draw through the law's own
//!   CDF (the identity for the chaotic map) so it lands in `[0, 1]`;
//! * [`StochasticEngine::sample_signed`] is `2 * unit - 1`.
//!
//! Each call advances the engine by exactly one logical step.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Iterates of the logistic map discarded right after construction.
pub const CHAOTIC_WARMUP: usize = 10;

/// Rate increment of the drifting logistic map.
pub const DEFAULT_RATE_STEP: f64 = 0.01;

/// Largest growth rate for which the logistic map keeps `[0, 1]` invariant.
const LOGISTIC_RATE_LIMIT: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    Gaussian,
    Weibull,
    Gamma,
    Chaotic,
}

impl EngineKind {
    pub const ALL: [EngineKind; 4] = [
        EngineKind::Gaussian,
        EngineKind::Weibull,
        EngineKind::Gamma,
        EngineKind::Chaotic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EngineKind::Gaussian => "gaussian",
            EngineKind::Weibull => "weibull",
            EngineKind::Gamma => "gamma",
            EngineKind::Chaotic => "chaotic",
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(EngineKind::Gaussian),
            "weibull" => Ok(EngineKind::Weibull),
            "gamma" => Ok(EngineKind::Gamma),
            "chaotic" => Ok(EngineKind::Chaotic),
            other => Err(Error::Config(format!(
                "unknown engine `{other}` (expected gaussian, weibull, gamma or chaotic)"
            ))),
        }
    }
}

/// Full parameterization of an engine.
///
/// Only the fields belonging to `kind` influence the variates, but every field
/// is validated so a config file can carry all of them at once.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub kind: EngineKind,
    pub seed: u64,
    /// Gaussian mean.
    pub mu: f64,
    /// Gaussian standard deviation.
    pub sigma: f64,
    /// Weibull scale.
    pub lambda: f64,
    /// Weibull shape.
    pub k: f64,
    /// Gamma shape (integral).
    pub alpha: u32,
    /// Gamma rate.
    pub beta: f64,
    /// Initial logistic-map state.
    pub psi0: f64,
    /// Initial logistic-map growth rate.
    pub r0: f64,
    /// Growth-rate increment per step.
    pub dr: f64,
    /// Number of logistic iterates discarded at construction.
    pub warmup: usize,
}

impl EngineConfig {
    pub fn new(kind: EngineKind, seed: u64) -> Self {
        EngineConfig {
            kind,
            seed,
            mu: 0.0,
            sigma: 1.0,
            lambda: 1.0,
            k: 1.0,
            alpha: 2,
            beta: 1.0,
            psi0: 0.3,
            r0: 3.9,
            dr: DEFAULT_RATE_STEP,
            warmup: CHAOTIC_WARMUP,
        }
    }

    /// Names accepted by [`EngineConfig::set_param`].
    pub const PARAM_NAMES: [&'static str; 10] = [
        "mu", "sigma", "lambda", "k", "alpha", "beta", "psi0", "r0", "dr", "warmup",
    ];

    /// Sets one parameter from its textual `key=value` form.
    pub fn set_param(&mut self, key: &str, value: &str) -> Result<()> {
        let real = || {
            value
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("engine parameter {key}: `{value}` is not a number")))
        };
        let count = || {
            value.trim().parse::<u64>().map_err(|_| {
                Error::Config(format!(
                    "engine parameter {key}: `{value}` is not a non-negative integer"
                ))
            })
        };
        match key.trim() {
            "mu" => self.mu = real()?,
            "sigma" => self.sigma = real()?,
            "lambda" => self.lambda = real()?,
            "k" => self.k = real()?,
            "alpha" => {
                self.alpha = u32::try_from(count()?)
                    .map_err(|_| Error::Config(format!("engine parameter alpha: `{value}` is too large")))?
            }
            "beta" => self.beta = real()?,
            "psi0" => self.psi0 = real()?,
            "r0" => self.r0 = real()?,
            "dr" => self.dr = real()?,
            "warmup" => {
                self.warmup = usize::try_from(count()?)
                    .map_err(|_| Error::Config(format!("engine parameter warmup: `{value}` is too large")))?
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown engine parameter `{other}` (expected one of {})",
                    Self::PARAM_NAMES.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Parses a `key=value` pair and applies it.
    pub fn apply_pair(&mut self, pair: &str) -> Result<()> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("engine parameter `{pair}` is not of the form key=value")))?;
        self.set_param(key, value)
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "{name} must be a finite positive number (got {v})"
                )))
            }
        }
        if !self.mu.is_finite() {
            return Err(Error::Config(format!("mu must be finite (got {})", self.mu)));
        }
        positive("sigma", self.sigma)?;
        positive("lambda", self.lambda)?;
        positive("k", self.k)?;
        positive("beta", self.beta)?;
        if self.alpha < 1 {
            return Err(Error::Config("alpha must be an integer >= 1 (got 0)".into()));
        }
        if !(self.psi0 > 0.0 && self.psi0 < 1.0) {
            return Err(Error::Config(format!(
                "psi0 must lie strictly inside (0, 1) (got {})",
                self.psi0
            )));
        }
        if !(0.0..=5.0).contains(&self.r0) {
            return Err(Error::Config(format!("r0 must lie in [0, 5] (got {})", self.r0)));
        }
        if !self.dr.is_finite() {
            return Err(Error::Config(format!("dr must be finite (got {})", self.dr)));
        }
        Ok(())
    }

    /// The continuous law behind this engine, `None` for the chaotic map.
    pub fn distribution(&self) -> Option<Distribution> {
        match self.kind {
            EngineKind::Gaussian => Some(Distribution::Gaussian {
                mu: self.mu,
                sigma: self.sigma,
            }),
            EngineKind::Weibull => Some(Distribution::Weibull {
                lambda: self.lambda,
                k: self.k,
            }),
            EngineKind::Gamma => Some(Distribution::Gamma {
                alpha: self.alpha,
                beta: self.beta,
            }),
            EngineKind::Chaotic => None,
        }
    }
}

/// The three continuous laws with closed-form CDFs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Distribution {
    Gaussian {
        mu: f64,
        sigma: f64,
    },
    Weibull {
        lambda: f64,
        k: f64,
    },
    /// Erlang: integer shape `alpha`, rate `beta`.
    Gamma {
        alpha: u32,
        beta: f64,
    },
}

impl Distribution {
    fn name(&self) -> &'static str {
        match self {
            Distribution::Gaussian { .. } => "gaussian",
            Distribution::Weibull { .. } => "weibull",
            Distribution::Gamma { .. } => "gamma",
        }
    }

    /// Cumulative probability at `x`.
    ///
    /// Weibull and Gamma reject negative `x`; the Gamma CDF is the finite
    /// Poisson-tail sum valid for integer shape.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        let supported = match self {
            Distribution::Gaussian { .. } => !x.is_nan(),
            Distribution::Weibull { .. } | Distribution::Gamma { .. } => x >= 0.0,
        };
        if !supported {
            return Err(Error::Domain {
                distribution: self.name(),
                x,
            });
        }
        Ok(self.cdf_in_support(x))
    }

    fn cdf_in_support(&self, x: f64) -> f64 {
        let p = match *self {
            Distribution::Gaussian { mu, sigma } => 0.5 * libm::erfc(-(x - mu) / (sigma * SQRT_2)),
            Distribution::Weibull { lambda, k } => -(-(x / lambda).powf(k)).exp_m1(),
            Distribution::Gamma { alpha, beta } => {
                let bx = beta * x;
                let mut term = (-bx).exp();
                let mut tail = term;
                for i in 1..alpha {
                    term *= bx / f64::from(i);
                    tail += term;
                }
                1.0 - tail
            }
        };
        p.clamp(0.0, 1.0)
    }

    /// Weibull quantile function; `None` for the other laws.
    pub fn weibull_inverse_cdf(&self, u: f64) -> Option<f64> {
        match *self {
            Distribution::Weibull { lambda, k } => Some(weibull_quantile(lambda, k, u)),
            _ => None,
        }
    }
}

fn weibull_quantile(lambda: f64, k: f64, u: f64) -> f64 {
    lambda * (-(-u).ln_1p()).powf(k.recip())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChaoticState {
    pub psi: f64,
    pub r: f64,
}

/// A seeded, single-owner random source.
///
/// Two engines built from equal configs emit bit-identical sequences.
#[derive(Clone, Debug)]
pub struct StochasticEngine {
    config: EngineConfig,
    rng: ChaCha8Rng,
    chaos: Option<ChaoticState>,
    steps: u64,
}

impl StochasticEngine {
    pub fn new(config: EngineConfig) -> Result<Self> {
        config.validate()?;
        let mut engine = StochasticEngine {
            config,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            chaos: None,
            steps: 0,
        };
        if config.kind == EngineKind::Chaotic {
            engine.chaos = Some(ChaoticState {
                psi: config.psi0,
                r: config.r0,
            });
            for _ in 0..config.warmup {
                engine.advance_chaos();
            }
        }
        Ok(engine)
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn kind(&self) -> EngineKind {
        self.config.kind
    }

    /// Current logistic-map state, if this is a chaotic engine.
    pub fn chaotic_state(&self) -> Option<ChaoticState> {
        self.chaos
    }

    /// Variates emitted so far (warm-up iterates are not counted).
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Uniform on `[0, 1)`.
    fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on `(0, 1]`, safe to take the logarithm of.
    fn uniform_positive(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    /// One iterate of the drifting logistic map.
    ///
    /// When the rate passes 4 or the state leaves the open unit interval the
    /// state is re-seeded from the uniform stream and the rate returns to `r0`.
    fn advance_chaos(&mut self) -> f64 {
        let state = self.chaos.expect("chaotic state present for chaotic engines");
        let mut psi = state.r * state.psi * (1.0 - state.psi);
        let mut r = state.r + self.config.dr;
        if !(psi > 0.0 && psi < 1.0) || r > LOGISTIC_RATE_LIMIT {
            psi = loop {
                let candidate = self.uniform();
                if candidate > 0.0 {
                    break candidate;
                }
            };
            r = self.config.r0;
        }
        self.chaos = Some(ChaoticState { psi, r });
        psi
    }

    /// One variate from the configured law.
    ///
    /// Gaussian draws use the cosine branch of the Box-Muller transform on two
    /// uniforms. Weibull draws invert the CDF. Gamma draws add `alpha`
    /// exponential variates of rate `beta`.
    pub fn sample_raw(&mut self) -> f64 {
        self.steps += 1;
        let c = self.config;
        match c.kind {
            EngineKind::Gaussian => {
                let radius = (-2.0 * self.uniform_positive().ln()).sqrt();
                let angle = 2.0 * PI * self.uniform();
                c.mu + c.sigma * radius * angle.cos()
            }
            EngineKind::Weibull => {
                let u = self.uniform();
                weibull_quantile(c.lambda, c.k, u)
            }
            EngineKind::Gamma => {
                let mut sum = 0.0;
                for _ in 0..c.alpha {
                    sum -= self.uniform_positive().ln();
                }
                sum / c.beta
            }
            EngineKind::Chaotic => self.advance_chaos(),
        }
    }

    /// Maps a raw variate of this engine's law to `[0, 1]`.
    pub fn to_unit(&self, raw: f64) -> f64 {
        match self.config.distribution() {
            Some(dist) => {
                // Raw variates from the sampler always lie in the support.
                if raw < 0.0 && !matches!(dist, Distribution::Gaussian { .. }) {
                    0.0
                } else {
                    dist.cdf_in_support(raw)
                }
            }
            None => raw.clamp(0.0, 1.0),
        }
    }

    pub fn sample_unit(&mut self) -> f64 {
        let raw = self.sample_raw();
        self.to_unit(raw)
    }

    pub fn sample_signed(&mut self) -> f64 {
        2.0 * self.sample_unit() - 1.0
    }
}
