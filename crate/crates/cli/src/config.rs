//! Flat `key = value` experiment configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Every key is validated
//! and unknown or repeated keys are rejected. Real values accept plain
//! numbers and multiples of pi such as `pi/3`, `2pi/3`, `-pi/4` or `0.5*pi`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: bad value for `{key}`: {msg}")]
    BadValue {
        line: usize,
        key: String,
        msg: String,
    },
    #[error("{0}")]
    Invalid(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Trajectory,
    ScanThetaTau,
    SweepNa,
    Figure2,
    Figure3,
    Figure4,
    Figure5,
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "trajectory" => Scenario::Trajectory,
            "scan_theta_tau" => Scenario::ScanThetaTau,
            "sweep_na" => Scenario::SweepNa,
            "figure2" => Scenario::Figure2,
            "figure3" => Scenario::Figure3,
            "figure4" => Scenario::Figure4,
            "figure5" => Scenario::Figure5,
            other => return Err(format!("unknown scenario `{other}`")),
        })
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Trajectory => "trajectory",
            Scenario::ScanThetaTau => "scan_theta_tau",
            Scenario::SweepNa => "sweep_na",
            Scenario::Figure2 => "figure2",
            Scenario::Figure3 => "figure3",
            Scenario::Figure4 => "figure4",
            Scenario::Figure5 => "figure5",
        })
    }
}

/// How long a trajectory runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    Steps(usize),
    KTau(f64),
    /// Run to the closed-form full-charge estimate `k_est`.
    KEst,
}

impl Budget {
    /// Number of collisions for step size `tau` and estimate `k_est`.
    pub fn steps(
        &self,
        tau: f64,
        k_est: impl FnOnce() -> spincharge::Result<u64>,
    ) -> spincharge::Result<usize> {
        match *self {
            Budget::Steps(n) => Ok(n),
            Budget::KTau(kt) => Ok((kt / tau).round() as usize),
            Budget::KEst => k_est().map(|k| k as usize),
        }
    }
}

/// Inclusive evenly spaced grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.max
                } else {
                    self.min + i as f64 * step
                }
            })
            .collect()
    }
}

/// Parsed configuration; `None` fields fall back to scenario defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Option<Scenario>,
    pub n_atoms: Option<usize>,
    pub n_b: Option<usize>,
    pub energy_spacing: Option<f64>,
    pub theta0: Option<f64>,
    pub phi0: Option<f64>,
    pub coherence: Option<f64>,
    pub tau: Option<f64>,
    pub budget: Option<Budget>,
    pub stride: Option<usize>,
    pub ergotropy: Option<bool>,
    pub initial_level: Option<usize>,
    pub theta_min: Option<f64>,
    pub theta_max: Option<f64>,
    pub theta_count: Option<usize>,
    pub tau_min: Option<f64>,
    pub tau_max: Option<f64>,
    pub tau_count: Option<usize>,
    pub na_list: Option<Vec<usize>>,
    pub output_path: Option<String>,
    pub numeric_tolerance: Option<f64>,
}

const KEYS: &[&str] = &[
    "scenario",
    "n_atoms",
    "n_b",
    "energy_spacing",
    "theta0",
    "phi0",
    "coherence",
    "tau",
    "steps",
    "k_tau_budget",
    "stride",
    "ergotropy",
    "initial_level",
    "theta_min",
    "theta_max",
    "theta_count",
    "tau_min",
    "tau_max",
    "tau_count",
    "na_list",
    "output_path",
    "numeric_tolerance",
];

/// Parses `pi`-multiples and plain reals.
pub fn parse_real(text: &str) -> Result<f64, String> {
    let s: String = text
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect::<String>()
        .to_lowercase();
    let value = match s.find("pi") {
        None => s
            .parse::<f64>()
            .map_err(|_| format!("`{text}` is not a number"))?,
        Some(at) => {
            let coef = s[..at].trim_end_matches('*');
            let coef = match coef {
                "" | "+" => 1.0,
                "-" => -1.0,
                c => c
                    .parse::<f64>()
                    .map_err(|_| format!("bad coefficient in `{text}`"))?,
            };
            let rest = &s[at + 2..];
            let den = match rest {
                "" => 1.0,
                r if r.starts_with('/') => r[1..]
                    .parse::<f64>()
                    .map_err(|_| format!("bad divisor in `{text}`"))?,
                _ => return Err(format!("cannot parse `{text}`")),
            };
            coef * std::f64::consts::PI / den
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("`{text}` is not finite"))
    }
}

fn parse_bool(text: &str) -> Result<bool, String> {
    match text {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("`{text}` is not a boolean")),
    }
}

fn parse_usize(text: &str) -> Result<usize, String> {
    text.parse::<usize>()
        .map_err(|_| format!("`{text}` is not a non-negative integer"))
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        let mut budget_key: Option<&str> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                msg: format!("expected `key = value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            };
            if seen.contains(&known) {
                return Err(ConfigError::Duplicate {
                    line,
                    key: key.to_string(),
                });
            }
            seen.push(known);
            let bad = |msg: String| ConfigError::BadValue {
                line,
                key: key.to_string(),
                msg,
            };
            if value.is_empty() {
                return Err(bad("empty value".into()));
            }
            match known {
                "scenario" => cfg.scenario = Some(value.parse().map_err(bad)?),
                "n_atoms" => cfg.n_atoms = Some(parse_usize(value).map_err(bad)?),
                "n_b" => cfg.n_b = Some(parse_usize(value).map_err(bad)?),
                "energy_spacing" => cfg.energy_spacing = Some(parse_real(value).map_err(bad)?),
                "theta0" => cfg.theta0 = Some(parse_real(value).map_err(bad)?),
                "phi0" => cfg.phi0 = Some(parse_real(value).map_err(bad)?),
                "coherence" => cfg.coherence = Some(parse_real(value).map_err(bad)?),
                "tau" => cfg.tau = Some(parse_real(value).map_err(bad)?),
                "steps" | "k_tau_budget" => {
                    if let Some(other) = budget_key {
                        return Err(bad(format!("conflicts with `{other}`")));
                    }
                    budget_key = Some(known);
                    cfg.budget = Some(if value == "k_est" {
                        Budget::KEst
                    } else if known == "steps" {
                        Budget::Steps(parse_usize(value).map_err(bad)?)
                    } else {
                        let kt = parse_real(value).map_err(bad)?;
                        if !(kt > 0.0) {
                            return Err(bad("k_tau_budget must be positive".into()));
                        }
                        Budget::KTau(kt)
                    });
                }
                "stride" => {
                    let s = parse_usize(value).map_err(bad)?;
                    if s == 0 {
                        return Err(bad("stride must be at least 1".into()));
                    }
                    cfg.stride = Some(s);
                }
                "ergotropy" => cfg.ergotropy = Some(parse_bool(value).map_err(bad)?),
                "initial_level" => cfg.initial_level = Some(parse_usize(value).map_err(bad)?),
                "theta_min" => cfg.theta_min = Some(parse_real(value).map_err(bad)?),
                "theta_max" => cfg.theta_max = Some(parse_real(value).map_err(bad)?),
                "theta_count" => cfg.theta_count = Some(parse_usize(value).map_err(bad)?),
                "tau_min" => cfg.tau_min = Some(parse_real(value).map_err(bad)?),
                "tau_max" => cfg.tau_max = Some(parse_real(value).map_err(bad)?),
                "tau_count" => cfg.tau_count = Some(parse_usize(value).map_err(bad)?),
                "na_list" => {
                    let list = value
                        .split(',')
                        .map(|v| parse_usize(v.trim()))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(bad)?;
                    if list.is_empty() || list.contains(&0) {
                        return Err(bad("atom counts must be positive".into()));
                    }
                    cfg.na_list = Some(list);
                }
                "output_path" => cfg.output_path = Some(value.to_string()),
                "numeric_tolerance" => {
                    let t = parse_real(value).map_err(bad)?;
                    if !(t > 0.0) {
                        return Err(bad("must be positive".into()));
                    }
                    cfg.numeric_tolerance = Some(t);
                }
                _ => unreachable!("every key in KEYS is handled"),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        for (name, count) in [
            ("theta_count", self.theta_count),
            ("tau_count", self.tau_count),
        ] {
            if let Some(c) = count {
                if c < 2 {
                    return Err(ConfigError::Invalid(format!(
                        "{name} must be at least 2, got {c}"
                    )));
                }
            }
        }
        if let Some(t) = self.tau {
            if t == 0.0 {
                return Err(ConfigError::Invalid("tau must be nonzero".into()));
            }
        }
        Ok(())
    }

    pub fn theta_grid(&self, default: Grid) -> Grid {
        Grid {
            min: self.theta_min.unwrap_or(default.min),
            max: self.theta_max.unwrap_or(default.max),
            count: self.theta_count.unwrap_or(default.count),
        }
    }

    pub fn tau_grid(&self, default: Grid) -> Grid {
        Grid {
            min: self.tau_min.unwrap_or(default.min),
            max: self.tau_max.unwrap_or(default.max),
            count: self.tau_count.unwrap_or(default.count),
        }
    }
}
