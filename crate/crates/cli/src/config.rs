//! Scenario configuration: a flat `key = value` file, overridden by flags.
//!
//! ```text
//! # singlet, second axis along x
//! scenario = bell
//! a = 0.7071067811865476
//! b = 0.7071067811865476
//! theta1 = 0
//! theta2 = 1.5707963267948966
//! ```
//!
//! Angles are radians. Complex coefficients are written `re` or `re,im`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qrs_core::bell::ChshAngles;
use qrs_core::linalg::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("missing required field `{0}`")]
    Missing(&'static str),

    #[error("{source_name}: invalid value {value:?} for `{key}`: {reason}")]
    Invalid {
        source_name: String,
        key: String,
        value: String,
        reason: String,
    },

    #[error("{0}: unknown key `{1}`")]
    UnknownKey(String, String),

    #[error("{0}: expected `key = value`")]
    Syntax(String),

    #[error("cannot read config file {path}: {message}")]
    Read { path: PathBuf, message: String },

    #[error("coefficients are not normalized: |a|² + |b|² = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    IntroMeasurement,
    PairCorrelations,
    Bell,
    BellAncilla,
    ChshScan,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::IntroMeasurement,
        Scenario::PairCorrelations,
        Scenario::Bell,
        Scenario::BellAncilla,
        Scenario::ChshScan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::IntroMeasurement => "intro-measurement",
            Scenario::PairCorrelations => "pair-correlations",
            Scenario::Bell => "bell",
            Scenario::BellAncilla => "bell-ancilla",
            Scenario::ChshScan => "chsh-scan",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Scenario::ALL.iter().map(|s| s.name()).collect();
                format!("expected one of {}", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    Csv,
    #[default]
    Json,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err("expected csv or json".into()),
        }
    }
}

/// Evenly spaced values `start..=stop` in `steps` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| self.start + step * i as f64)
            .collect()
    }
}

/// Unvalidated key/value settings, as read from a file or from flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawSettings {
    pub scenario: Option<String>,
    pub a: Option<String>,
    pub b: Option<String>,
    pub theta1: Option<String>,
    pub theta2: Option<String>,
    pub angles: Option<String>,
    pub grid: Option<String>,
    pub seed: Option<String>,
    pub samples: Option<String>,
    pub format: Option<String>,
    pub out: Option<String>,
    /// Where each value came from, for error messages.
    origins: Vec<(&'static str, String)>,
}

const KEYS: [&str; 11] = [
    "scenario", "a", "b", "theta1", "theta2", "angles", "grid", "seed", "samples", "format", "out",
];

impl RawSettings {
    fn slot(&mut self, key: &str) -> Option<(&'static str, &mut Option<String>)> {
        let name = KEYS.into_iter().find(|k| *k == key)?;
        let slot = match name {
            "scenario" => &mut self.scenario,
            "a" => &mut self.a,
            "b" => &mut self.b,
            "theta1" => &mut self.theta1,
            "theta2" => &mut self.theta2,
            "angles" => &mut self.angles,
            "grid" => &mut self.grid,
            "seed" => &mut self.seed,
            "samples" => &mut self.samples,
            "format" => &mut self.format,
            _ => &mut self.out,
        };
        Some((name, slot))
    }

    /// Records `key = value` from `origin` (e.g. `cfg.txt:3` or `--theta1`).
    pub fn set(&mut self, key: &str, value: impl Into<String>, origin: impl Into<String>) -> bool {
        let value = value.into();
        let Some((name, slot)) = self.slot(key) else {
            return false;
        };
        *slot = Some(value);
        let origin = origin.into();
        self.origins.retain(|(k, _)| *k != name);
        self.origins.push((name, origin));
        true
    }

    fn origin(&self, key: &str) -> String {
        self.origins
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, o)| o.clone())
            .unwrap_or_else(|| key.to_string())
    }

    pub fn parse_file_contents(name: &str, contents: &str) -> Result<Self, ConfigError> {
        let mut raw = Self::default();
        for (lineno, line) in contents.lines().enumerate() {
            let origin = format!("{name}:{}", lineno + 1);
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax(origin.clone()))?;
            let (key, value) = (key.trim(), value.trim());
            if key == "config" || !raw.set(key, value, origin.clone()) {
                return Err(ConfigError::UnknownKey(origin, key.to_string()));
            }
        }
        Ok(raw)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let contents = std::fs::read_to_string(path).map_err(|e| ConfigError::Read {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::parse_file_contents(&path.display().to_string(), &contents)
    }

    /// Values present in `overrides` replace those in `self`.
    pub fn merged_with(mut self, overrides: &RawSettings) -> Self {
        for (key, origin) in &overrides.origins {
            let value = overrides.clone().slot(key).and_then(|(_, v)| v.clone());
            if let Some(value) = value {
                self.set(key, value, origin.clone());
            }
        }
        self
    }

    fn invalid(&self, key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
        ConfigError::Invalid {
            source_name: self.origin(key),
            key: key.to_string(),
            value: value.to_string(),
            reason: reason.into(),
        }
    }

    fn radians(&self, key: &str, text: &str) -> Result<f64, ConfigError> {
        let t = text.trim();
        let lowered = t.to_ascii_lowercase();
        if t.ends_with('°') || lowered.ends_with("deg") || lowered.ends_with("degrees") {
            return Err(self.invalid(
                key,
                text,
                "angles are radians; multiply degrees by π/180 (e.g. 90° = 1.5707963267948966)",
            ));
        }
        let value: f64 = t
            .parse()
            .map_err(|_| self.invalid(key, text, "expected a number of radians"))?;
        if !value.is_finite() {
            return Err(self.invalid(key, text, "angle must be finite"));
        }
        Ok(value)
    }

    fn complex(&self, key: &str, text: &str) -> Result<Complex64, ConfigError> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        let number = |s: &str| -> Result<f64, ConfigError> {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| self.invalid(key, text, "expected `re` or `re,im`"))
        };
        match parts.as_slice() {
            [re] => Ok(Complex64::new(number(re)?, 0.0)),
            [re, im] => Ok(Complex64::new(number(re)?, number(im)?)),
            _ => Err(self.invalid(key, text, "expected `re` or `re,im`")),
        }
    }

    fn integer<T: FromStr>(&self, key: &str, text: &str) -> Result<T, ConfigError> {
        text.trim()
            .parse()
            .map_err(|_| self.invalid(key, text, "expected a non-negative integer"))
    }

    pub fn into_spec(self) -> Result<ScenarioSpec, ConfigError> {
        let scenario_text = self
            .scenario
            .as_deref()
            .ok_or(ConfigError::Missing("scenario"))?;
        let scenario: Scenario = scenario_text
            .parse()
            .map_err(|reason: String| self.invalid("scenario", scenario_text, reason))?;

        let a = match &self.a {
            Some(t) => self.complex("a", t)?,
            None => Complex64::new(FRAC_1_SQRT_2, 0.0),
        };
        let b = match &self.b {
            Some(t) => self.complex("b", t)?,
            None => Complex64::new(FRAC_1_SQRT_2, 0.0),
        };
        let norm_sqr = a.norm_sqr() + b.norm_sqr();
        if (norm_sqr - 1.0).abs() > 1e-12 {
            return Err(ConfigError::NotNormalized { norm_sqr });
        }

        let theta1 = match &self.theta1 {
            Some(t) => self.radians("theta1", t)?,
            None => 0.0,
        };
        let theta2 = match &self.theta2 {
            Some(t) => self.radians("theta2", t)?,
            None => FRAC_PI_2,
        };

        let angles = match &self.angles {
            Some(t) => {
                let values = t
                    .split(',')
                    .map(|v| self.radians("angles", v))
                    .collect::<Result<Vec<_>, _>>()?;
                match values.as_slice() {
                    &[alpha, alpha_prime, beta, beta_prime] => {
                        ChshAngles::new(alpha, alpha_prime, beta, beta_prime)
                    }
                    _ => return Err(self.invalid("angles", t, "expected four angles a,a',b,b'")),
                }
            }
            None => ChshAngles::standard(),
        };

        let grid = match &self.grid {
            Some(t) => {
                let parts: Vec<&str> = t.split(',').map(str::trim).collect();
                let [start, stop, steps] = parts.as_slice() else {
                    return Err(self.invalid("grid", t, "expected start,stop,steps"));
                };
                let steps: usize = self.integer("grid", steps)?;
                if steps < 1 {
                    return Err(self.invalid("grid", t, "steps must be at least 1"));
                }
                if scenario != Scenario::ChshScan {
                    return Err(self.invalid("grid", t, "only chsh-scan uses a grid"));
                }
                Some(Grid {
                    start: self.radians("grid", start)?,
                    stop: self.radians("grid", stop)?,
                    steps,
                })
            }
            None => None,
        };

        let seed = match &self.seed {
            Some(t) => Some(self.integer::<u64>("seed", t)?),
            None => None,
        };
        let samples = match &self.samples {
            Some(t) => self.integer::<u64>("samples", t)?,
            None => 0,
        };
        if samples > 0 && scenario == Scenario::ChshScan {
            return Err(self.invalid(
                "samples",
                &samples.to_string(),
                "chsh-scan has no table to sample",
            ));
        }

        let format = match &self.format {
            Some(t) => t
                .parse()
                .map_err(|reason: String| self.invalid("format", t, reason))?,
            None => Format::default(),
        };

        Ok(ScenarioSpec {
            scenario,
            a,
            b,
            theta1,
            theta2,
            angles,
            grid,
            seed,
            samples,
            format,
            out: self.out.map(PathBuf::from),
        })
    }
}

/// A validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub scenario: Scenario,
    pub a: Complex64,
    pub b: Complex64,
    pub theta1: f64,
    pub theta2: f64,
    pub angles: ChshAngles,
    pub grid: Option<Grid>,
    pub seed: Option<u64>,
    pub samples: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

/// Reads `config` (if any), applies `flags` on top and validates.
pub fn parse_config(
    config: Option<&Path>,
    flags: &RawSettings,
) -> Result<ScenarioSpec, ConfigError> {
    let base = match config {
        Some(path) => RawSettings::from_file(path)?,
        None => RawSettings::default(),
    };
    base.merged_with(flags).into_spec()
}
