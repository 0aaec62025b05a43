//! Plain-text `key = value` configuration for `run` and `sweep`.
//!
//! Blank lines and `#` comments are ignored. Unknown keys are errors. The
//! resolved configuration prints back in the same format, so an echoed config
//! can be saved and loaded again unchanged.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::bfa::BfaParams;
use crate::engines::{EngineConfig, EngineKind};
use crate::error::{Error, Result};
use crate::experiment::DEFAULT_RUNS_PER_WEIGHT;
use crate::metrics::DEFAULT_AER_THRESHOLD;

pub const DEFAULT_WEIGHT_STEP: f64 = 0.1;
pub const DEFAULT_WEIGHT_MIN: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedConfig {
    pub bfa: BfaParams,
    /// Distribution parameters shared by every engine; `kind` and `seed` unused.
    pub engine_params: EngineConfig,
    pub engines: Vec<EngineKind>,
    pub runs: usize,
    pub threshold: f64,
    pub seed: Option<u64>,
    pub weight_step: f64,
    pub weight_min: f64,
    pub weights_file: Option<PathBuf>,
}

impl Default for ResolvedConfig {
    fn default() -> Self {
        ResolvedConfig {
            bfa: BfaParams::default(),
            engine_params: EngineConfig::new(EngineKind::Gaussian, 0),
            engines: EngineKind::ALL.to_vec(),
            runs: DEFAULT_RUNS_PER_WEIGHT,
            threshold: DEFAULT_AER_THRESHOLD,
            seed: None,
            weight_step: DEFAULT_WEIGHT_STEP,
            weight_min: DEFAULT_WEIGHT_MIN,
            weights_file: None,
        }
    }
}

fn parse_engines(value: &str) -> Result<Vec<EngineKind>> {
    let kinds = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<Vec<EngineKind>>>()?;
    if kinds.is_empty() {
        return Err(Error::Config("engine list is empty".into()));
    }
    Ok(kinds)
}

fn parse_bool(value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("`{value}` is not a boolean"))),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse `{value}`")))
}

impl ResolvedConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let b = &mut self.bfa;
        match key {
            "nt" => b.nt = parse_num(key, value)?,
            "pop" => b.pop = parse_num(key, value)?,
            "ns" => b.ns = parse_num(key, value)?,
            "nc" => b.nc = parse_num(key, value)?,
            "nr" => b.nr = parse_num(key, value)?,
            "ned" => b.ned = parse_num(key, value)?,
            "step" => b.step = parse_num(key, value)?,
            "ped" => {
                let ped: f64 = parse_num(key, value)?;
                if !(0.0..=1.0).contains(&ped) {
                    return Err(Error::Config(format!("ped must lie in [0, 1] (got {ped})")));
                }
                b.ped = ped;
            }
            "swarming" => b.swarming = parse_bool(value)?,
            "w_rep" => b.w_rep = parse_num(key, value)?,
            "w_att" => b.w_att = parse_num(key, value)?,
            "h_rep" => b.h_rep = parse_num(key, value)?,
            "h_att" => b.h_att = parse_num(key, value)?,
            "engines" => self.engines = parse_engines(value)?,
            "runs" => self.runs = parse_num(key, value)?,
            "threshold" => self.threshold = parse_num(key, value)?,
            "seed" => self.seed = Some(parse_num(key, value)?),
            "weight_step" => self.weight_step = parse_num(key, value)?,
            "weight_min" => self.weight_min = parse_num(key, value)?,
            "weights_file" => self.weights_file = Some(PathBuf::from(value)),
            other if EngineConfig::PARAM_NAMES.contains(&other) => self.engine_params.set_param(other, value)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Parses config text on top of the defaults.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut config = ResolvedConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let wrap = |message: String| Error::ConfigLine { line: i + 1, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| wrap(format!("expected `key = value`, got `{line}`")))?;
            config
                .set(key.trim(), value.trim())
                .map_err(|e| wrap(e.to_string().trim_start_matches("config error: ").to_string()))?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.bfa.validate()?;
        self.engine_params.validate()?;
        if self.runs < 1 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if !(self.threshold.is_finite() && self.threshold >= 0.0) {
            return Err(Error::Config(format!(
                "threshold must be non-negative (got {})",
                self.threshold
            )));
        }
        Ok(())
    }

    /// The config in loadable `key = value` form.
    pub fn to_text(&self) -> String {
        let b = &self.bfa;
        let e = &self.engine_params;
        let mut s = String::new();
        let engines: Vec<&str> = self.engines.iter().map(|k| k.as_str()).collect();
        let _ = writeln!(s, "nt = {}", b.nt);
        let _ = writeln!(s, "pop = {}", b.pop);
        let _ = writeln!(s, "ns = {}", b.ns);
        let _ = writeln!(s, "nc = {}", b.nc);
        let _ = writeln!(s, "nr = {}", b.nr);
        let _ = writeln!(s, "ned = {}", b.ned);
        let _ = writeln!(s, "step = {}", b.step);
        let _ = writeln!(s, "ped = {}", b.ped);
        let _ = writeln!(s, "swarming = {}", b.swarming);
        let _ = writeln!(s, "w_rep = {}", b.w_rep);
        let _ = writeln!(s, "w_att = {}", b.w_att);
        let _ = writeln!(s, "h_rep = {}", b.h_rep);
        let _ = writeln!(s, "h_att = {}", b.h_att);
        let _ = writeln!(s, "engines = {}", engines.join(","));
        let _ = writeln!(s, "mu = {}", e.mu);
        let _ = writeln!(s, "sigma = {}", e.sigma);
        let _ = writeln!(s, "lambda = {}", e.lambda);
        let _ = writeln!(s, "k = {}", e.k);
        let _ = writeln!(s, "alpha = {}", e.alpha);
        let _ = writeln!(s, "beta = {}", e.beta);
        let _ = writeln!(s, "psi0 = {}", e.psi0);
        let _ = writeln!(s, "r0 = {}", e.r0);
        let _ = writeln!(s, "dr = {}", e.dr);
        let _ = writeln!(s, "warmup = {}", e.warmup);
        let _ = writeln!(s, "runs = {}", self.runs);
        let _ = writeln!(s, "threshold = {}", self.threshold);
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "seed = {seed}");
        }
        let _ = writeln!(s, "weight_step = {}", self.weight_step);
        let _ = writeln!(s, "weight_min = {}", self.weight_min);
        if let Some(path) = &self.weights_file {
            let _ = writeln!(s, "weights_file = {}", path.display());
        }
        s
    }

    /// Engine config of one kind carrying the shared parameters.
    pub fn engine(&self, kind: EngineKind, seed: u64) -> EngineConfig {
        EngineConfig {
            kind,
            seed,
            ..self.engine_params
        }
    }
}
