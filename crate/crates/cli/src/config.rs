//! Run configuration as flat `key = value` text.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use nlgreen::bench::{GridSpec, Strategy};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Check,
    Green,
    Solve,
    Bench,
    Catalog,
}

impl Subcommand {
    pub fn as_str(self) -> &'static str {
        match self {
            Subcommand::Check => "check",
            Subcommand::Green => "green",
            Subcommand::Solve => "solve",
            Subcommand::Bench => "bench",
            Subcommand::Catalog => "catalog",
        }
    }
}

impl FromStr for Subcommand {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Ok(match s {
            "check" => Subcommand::Check,
            "green" => Subcommand::Green,
            "solve" => Subcommand::Solve,
            "bench" => Subcommand::Bench,
            "catalog" => Subcommand::Catalog,
            _ => return Err(ConfigError::BadValue("subcommand".into(), s.into())),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {0}: expected `key = value`")]
    Syntax(usize),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("bad value for `{0}`: `{1}`")]
    BadValue(String, String),
    #[error("duplicate key `{0}`")]
    Duplicate(String),
}

/// Everything a subcommand reads. Unset fields take subcommand defaults.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub subcommand: Option<Subcommand>,
    pub nonlin: Option<String>,
    pub forcing: Option<String>,
    pub s: Option<f64>,
    pub k: Option<usize>,
    pub strategy: Option<Strategy>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub grid: Option<GridSpec>,
    pub eta: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub liouville: bool,
    pub epsilon: Option<f64>,
    pub t_max: Option<f64>,
    pub t_fit: Option<f64>,
    pub tol: Option<f64>,
    pub samples: Option<usize>,
}

pub fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("grid `{s}` must be n,t0,t1"));
    }
    let n: usize = parts[0]
        .parse()
        .map_err(|_| format!("bad grid size `{}`", parts[0]))?;
    let t0: f64 = parts[1]
        .parse()
        .map_err(|_| format!("bad grid start `{}`", parts[1]))?;
    let t1: f64 = parts[2]
        .parse()
        .map_err(|_| format!("bad grid end `{}`", parts[2]))?;
    if n == 0 || !t0.is_finite() || !t1.is_finite() || (n > 1 && !(t1 > t0)) {
        return Err(format!("grid `{s}` needs n >= 1 and t0 < t1"));
    }
    Ok(GridSpec { n, t0, t1 })
}

pub fn parse_strategy(s: &str) -> Result<Strategy, String> {
    Strategy::parse(s).ok_or_else(|| format!("strategy must be match or lsq, got `{s}`"))
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T, ConfigError> {
    raw.parse()
        .map_err(|_| ConfigError::BadValue(key.into(), raw.into()))
}

impl RunConfig {
    /// Fields set in `other` replace those in `self`.
    pub fn merged(mut self, other: RunConfig) -> RunConfig {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            subcommand, nonlin, forcing, s, k, strategy, rtol, atol, grid, eta, out, seed, epsilon,
            t_max, t_fit, tol, samples
        );
        self.liouville |= other.liouville;
        self
    }

    /// On-disk form. Floats use the shortest representation that
    /// parses back to the same value.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        if let Some(c) = self.subcommand {
            put("subcommand", c.as_str().into());
        }
        if let Some(v) = &self.nonlin {
            put("nonlin", v.clone());
        }
        if let Some(v) = &self.forcing {
            put("forcing", v.clone());
        }
        if let Some(v) = self.s {
            put("s", format!("{v:?}"));
        }
        if let Some(v) = self.k {
            put("K", v.to_string());
        }
        if let Some(v) = self.strategy {
            put("strategy", v.as_str().into());
        }
        if let Some(v) = self.rtol {
            put("rtol", format!("{v:?}"));
        }
        if let Some(v) = self.atol {
            put("atol", format!("{v:?}"));
        }
        if let Some(g) = self.grid {
            put("grid", format!("{},{:?},{:?}", g.n, g.t0, g.t1));
        }
        if let Some(v) = self.eta {
            put("eta", format!("{v:?}"));
        }
        if let Some(v) = &self.out {
            put("out", v.display().to_string());
        }
        if let Some(v) = self.seed {
            put("seed", v.to_string());
        }
        if self.liouville {
            put("liouville", "true".into());
        }
        if let Some(v) = self.epsilon {
            put("epsilon", format!("{v:?}"));
        }
        if let Some(v) = self.t_max {
            put("t_max", format!("{v:?}"));
        }
        if let Some(v) = self.t_fit {
            put("t_fit", format!("{v:?}"));
        }
        if let Some(v) = self.tol {
            put("tol", format!("{v:?}"));
        }
        if let Some(v) = self.samples {
            put("samples", v.to_string());
        }
        out
    }

    /// Parses the on-disk form; `#` starts a comment line.
    pub fn from_text(text: &str) -> Result<RunConfig, ConfigError> {
        let mut c = RunConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, raw) = line.split_once('=').ok_or(ConfigError::Syntax(i + 1))?;
            let (key, raw) = (key.trim(), raw.trim());
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::Duplicate(key.into()));
            }
            let bad = || ConfigError::BadValue(key.into(), raw.into());
            match key {
                "subcommand" => c.subcommand = Some(raw.parse()?),
                "nonlin" => c.nonlin = Some(raw.into()),
                "forcing" => c.forcing = Some(raw.into()),
                "s" => c.s = Some(value(key, raw)?),
                "K" | "k" => c.k = Some(value(key, raw)?),
                "strategy" => c.strategy = Some(parse_strategy(raw).map_err(|_| bad())?),
                "rtol" => c.rtol = Some(value(key, raw)?),
                "atol" => c.atol = Some(value(key, raw)?),
                "grid" => c.grid = Some(parse_grid(raw).map_err(|_| bad())?),
                "eta" => c.eta = Some(value(key, raw)?),
                "out" => c.out = Some(PathBuf::from(raw)),
                "seed" => c.seed = Some(value(key, raw)?),
                "liouville" => c.liouville = value(key, raw)?,
                "epsilon" => c.epsilon = Some(value(key, raw)?),
                "t_max" => c.t_max = Some(value(key, raw)?),
                "t_fit" => c.t_fit = Some(value(key, raw)?),
                "tol" => c.tol = Some(value(key, raw)?),
                "samples" => c.samples = Some(value(key, raw)?),
                _ => return Err(ConfigError::UnknownKey(key.into())),
            }
        }
        Ok(c)
    }
}
