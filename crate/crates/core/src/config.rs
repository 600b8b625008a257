//! Suite configuration: defaults, a flat `key = value` file format, and
//! validation ahead of any computation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Signed;
use thiserror::Error;

use crate::opalg::DEFAULT_EXP_BOUND;
use crate::scalar::{parse_rational, rat, rat_int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got '{text}'")]
    Syntax { line: usize, text: String },
    #[error("unknown configuration key '{0}'")]
    UnknownKey(String),
    #[error("invalid value '{value}' for '{key}': {msg}")]
    InvalidValue { key: String, value: String, msg: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteSelector {
    Qho,
    Calogero,
    All,
}

impl FromStr for SuiteSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "qho" => Ok(Self::Qho),
            "calogero" => Ok(Self::Calogero),
            "all" => Ok(Self::All),
            _ => Err("expected qho, calogero or all".into()),
        }
    }
}

impl fmt::Display for SuiteSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Qho => "qho",
            Self::Calogero => "calogero",
            Self::All => "all",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Markdown,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Self::Json),
            "markdown" | "md" => Ok(Self::Markdown),
            _ => Err("expected json or markdown".into()),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Json => "json",
            Self::Markdown => "markdown",
        })
    }
}

/// Everything a suite run depends on. Two runs with equal configurations
/// produce identical reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteConfig {
    pub suite: SuiteSelector,
    pub omega: Rational,
    /// Defaults to `omega / 2` when unset.
    pub beta: Option<Rational>,
    pub nu: Rational,
    pub n: usize,
    pub nmax: u32,
    pub degmax: u32,
    pub cutoff: i64,
    pub quad_order: usize,
    pub format: OutputFormat,
    pub seed: u64,
    pub exp_bound: usize,
    pub allow_nu: bool,
    /// Corrupts `O_L` so that the commutator checks must fail.
    pub inject_fault: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            suite: SuiteSelector::All,
            omega: rat_int(1),
            beta: None,
            nu: rat(3, 2),
            n: 2,
            nmax: 6,
            degmax: 8,
            cutoff: -12,
            quad_order: 40,
            format: OutputFormat::Json,
            seed: 0,
            exp_bound: DEFAULT_EXP_BOUND,
            allow_nu: false,
            inject_fault: false,
        }
    }
}

pub const KEYS: &[&str] = &[
    "suite",
    "omega",
    "beta",
    "nu",
    "n",
    "nmax",
    "degmax",
    "cutoff",
    "quad_order",
    "format",
    "seed",
    "exp_bound",
    "allow_nu",
    "inject_fault",
];

fn parse_with<T>(key: &str, value: &str, f: impl FnOnce(&str) -> Result<T, String>) -> Result<T, ConfigError> {
    f(value).map_err(|msg| ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        msg,
    })
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    parse_with(key, value, |v| v.parse::<T>().map_err(|e| e.to_string()))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    parse_with(key, value, |v| match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err("expected true or false".into()),
    })
}

impl SuiteConfig {
    /// Resolved `beta`.
    pub fn beta(&self) -> Rational {
        self.beta.clone().unwrap_or_else(|| &self.omega / rat_int(2))
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let rational = |v: &str| parse_with(key, v, |v| parse_rational(v).map_err(|e| e.to_string()));
        match key {
            "suite" => self.suite = parse_with(key, value, SuiteSelector::from_str)?,
            "omega" => self.omega = rational(value)?,
            "beta" => self.beta = Some(rational(value)?),
            "nu" => self.nu = rational(value)?,
            "n" => self.n = parse_num(key, value)?,
            "nmax" => self.nmax = parse_num(key, value)?,
            "degmax" => self.degmax = parse_num(key, value)?,
            "cutoff" => self.cutoff = parse_num(key, value)?,
            "quad_order" => self.quad_order = parse_num(key, value)?,
            "format" => self.format = parse_with(key, value, OutputFormat::from_str)?,
            "seed" => self.seed = parse_num(key, value)?,
            "exp_bound" => self.exp_bound = parse_num(key, value)?,
            "allow_nu" => self.allow_nu = parse_bool(key, value)?,
            "inject_fault" => self.inject_fault = parse_bool(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies a config file. Blank lines and `#` comments are ignored;
    /// later keys override earlier ones.
    pub fn apply_file(&mut self, text: &str) -> Result<(), ConfigError> {
        for (k, v) in parse_config_text(text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if !self.omega.is_positive() {
            return bad(format!("omega must be positive, got {}", self.omega));
        }
        let beta = self.beta();
        if !beta.is_positive() || beta > self.omega {
            return bad(format!("beta must satisfy 0 < beta <= omega, got {beta}"));
        }
        if self.nu <= rat(1, 2) && !self.allow_nu {
            return bad(format!("nu must exceed 1/2, got {} (set allow_nu to override)", self.nu));
        }
        if !(2..=3).contains(&self.n) {
            return bad(format!("n must be 2 or 3, got {}", self.n));
        }
        if self.nmax > 12 {
            return bad(format!("nmax must be at most 12, got {}", self.nmax));
        }
        if self.degmax > 16 {
            return bad(format!("degmax must be at most 16, got {}", self.degmax));
        }
        if self.cutoff >= 0 {
            return bad(format!("cutoff must be negative, got {}", self.cutoff));
        }
        if self.quad_order < 10 {
            return bad(format!("quad_order must be at least 10, got {}", self.quad_order));
        }
        if self.exp_bound == 0 {
            return bad("exp_bound must be positive".into());
        }
        Ok(())
    }

    /// Parameter echo for the report header.
    pub fn params(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("suite", self.suite.to_string());
        put("omega", self.omega.to_string());
        put("beta", self.beta().to_string());
        put("nu", self.nu.to_string());
        put("n", self.n.to_string());
        put("nmax", self.nmax.to_string());
        put("degmax", self.degmax.to_string());
        put("cutoff", self.cutoff.to_string());
        put("quad_order", self.quad_order.to_string());
        put("seed", self.seed.to_string());
        put("exp_bound", self.exp_bound.to_string());
        put("allow_nu", self.allow_nu.to_string());
        if self.inject_fault {
            put("inject_fault", "true".into());
        }
        m
    }
}

/// Splits a config file into `(key, value)` pairs in file order.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            });
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            });
        }
        let key = k.replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(k.to_string()));
        }
        out.push((key, v.to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = SuiteConfig::default();
        c.validate().unwrap();
        assert_eq!(c.beta(), rat(1, 2));
    }

    #[test]
    fn file_overrides() {
        let mut c = SuiteConfig::default();
        c.apply_file("# qho run\nsuite = qho\nomega = 4   # four\nbeta=3/2\n\nnmax = 3\nformat = markdown\n")
            .unwrap();
        assert_eq!(c.suite, SuiteSelector::Qho);
        assert_eq!(c.omega, rat_int(4));
        assert_eq!(c.beta(), rat(3, 2));
        assert_eq!(c.nmax, 3);
        assert_eq!(c.format, OutputFormat::Markdown);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = SuiteConfig::default();
        assert!(matches!(c.apply_file("omega 2"), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(c.apply_file("colour = red"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(c.set("omega", "1/0"), Err(ConfigError::InvalidValue { .. })));
        assert!(matches!(c.set("n", "two"), Err(ConfigError::InvalidValue { .. })));
        c.set("beta", "2").unwrap();
        assert!(matches!(c.validate(), Err(ConfigError::Invalid(_))));
        let mut c = SuiteConfig::default();
        c.set("nu", "1/2").unwrap();
        assert!(c.validate().is_err());
        c.set("allow_nu", "true").unwrap();
        c.validate().unwrap();
    }
}
