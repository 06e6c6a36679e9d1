//! Merging of the optional JSON configuration file with command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;
use sobolev_split::problems::{by_name, Coefficients};
use sobolev_split::{BoundaryMode, Error, KRule, LeapfrogAlpha, Problem, Result, RhsSign, SchemeConfig};

use crate::args::SchemeArgs;

/// Keys accepted in the configuration file; every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub problem: Option<String>,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    /// `"auto"` or a number.
    pub k: Option<Value>,
    #[serde(rename = "T")]
    pub t_final: Option<f64>,
    pub boundary: Option<String>,
    pub rhs_sign: Option<String>,
    pub leapfrog_alpha: Option<String>,
    pub picard_tol: Option<f64>,
    pub picard_max_iters: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub levels: Option<String>,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    fn k_string(&self) -> Result<Option<String>> {
        match &self.k {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(Value::Number(n)) => Ok(Some(n.to_string())),
            Some(other) => Err(Error::Config(format!("k must be \"auto\" or a number, got {other}"))),
        }
    }
}

fn parse_or<T: std::str::FromStr<Err = Error>>(cli: &Option<String>, file: &Option<String>, default: T) -> Result<T> {
    match cli.as_ref().or(file.as_ref()) {
        Some(s) => s.parse(),
        None => Ok(default),
    }
}

/// Scheme configuration from flags, then file, then defaults.
pub fn scheme_config(cli: &SchemeArgs, file: &FileConfig) -> Result<SchemeConfig> {
    let d = SchemeConfig::default();
    let cfg = SchemeConfig {
        rhs_sign: parse_or::<RhsSign>(&cli.rhs_sign, &file.rhs_sign, d.rhs_sign)?,
        leapfrog_alpha: parse_or::<LeapfrogAlpha>(&cli.leapfrog_alpha, &file.leapfrog_alpha, d.leapfrog_alpha)?,
        boundary_mode: parse_or::<BoundaryMode>(&cli.boundary, &file.boundary, d.boundary_mode)?,
        picard_tol: cli.picard_tol.or(file.picard_tol).unwrap_or(d.picard_tol),
        picard_max_iters: cli.picard_max_iters.or(file.picard_max_iters).unwrap_or(d.picard_max_iters),
        k_rule: parse_or::<KRule>(&cli.k, &file.k_string()?, d.k_rule)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// The selected problem with coefficient and final-time overrides applied.
pub fn problem(cli: &SchemeArgs, file: &FileConfig) -> Result<Problem> {
    let name = cli
        .problem
        .clone()
        .or_else(|| file.problem.clone())
        .ok_or_else(|| Error::Config("no problem selected (use --problem)".into()))?;
    let alpha = cli.alpha.or(file.alpha);
    let beta = cli.beta.or(file.beta);
    let gamma = cli.gamma.or(file.gamma);
    let overrides = if alpha.is_some() || beta.is_some() || gamma.is_some() {
        let base = if name == "zero" {
            Coefficients {
                alpha: 1.0,
                beta: 0.0,
                gamma: 1.0,
            }
        } else {
            sobolev_split::problems::default_manufactured_coeffs()
        };
        if !(name.starts_with("manufactured:") || name == "zero") {
            return Err(Error::Config(format!("problem '{name}' has fixed coefficients")));
        }
        Some(Coefficients {
            alpha: alpha.unwrap_or(base.alpha),
            beta: beta.unwrap_or(base.beta),
            gamma: gamma.unwrap_or(base.gamma),
        })
    } else {
        None
    };
    let mut p = by_name::<f64>(&name, overrides)?;
    if let Some(t) = cli.t_final.or(file.t_final) {
        p.t_final = t;
        p.validate()?;
    }
    Ok(p)
}

/// Parses `a..b` (or `a..=b`).
pub fn parse_levels(s: &str) -> Result<(u32, u32)> {
    let bad = || Error::Config(format!("invalid level range '{s}' (expected a..b)"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let a: u32 = a.trim().parse().map_err(|_| bad())?;
    let b: u32 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}
