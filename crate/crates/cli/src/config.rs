//! Experiment configuration: a TOML file plus command-line overrides.

use std::fmt;
use std::str::FromStr;

use anyhow::Context;
use clap::ValueEnum;
use fhgmc::chebyshev::ChebSeries;
use fhgmc::equilibrium::{check_one_cut, normalize_support_solved, Potential};
use fhgmc::hankel::{ExpectationOptions, FHSymbol, Method, MAX_PRECISION};
use fhgmc::rmt::{Bump, Normalizer, Sampler};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Rejected configuration; the driver exits with status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad<T, E: From<ConfigError>>(msg: impl Into<String>) -> Result<T, E> {
    Err(ConfigError(msg.into()).into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Equilibrium,
    Hankel,
    CompareAsymptotics,
    DiCheck,
    RhpCheck,
    Sample,
    Gmc,
    SecondMoment,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Equilibrium => "equilibrium",
            Command::Hankel => "hankel",
            Command::CompareAsymptotics => "compare-asymptotics",
            Command::DiCheck => "di-check",
            Command::RhpCheck => "rhp-check",
            Command::Sample => "sample",
            Command::Gmc => "gmc",
            Command::SecondMoment => "second-moment",
        }
    }
}

/// Parses a unit enum from its serialized name, e.g. `exact_hankel`.
pub fn parse_enum<T: DeserializeOwned>(s: &str, what: &str) -> Result<T, ConfigError> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| ConfigError(format!("unknown {what} '{s}'")))
}

/// Potential descriptor: `gue`, `t4` (2x²+0.1T₄), `t3t4` (2x²+0.05T₃+0.05T₄),
/// `quartic` (4x⁴/3), `mono:c0,c1,...` or `cheb:a0,a1,...`.
pub fn parse_potential(descriptor: &str) -> Result<Potential, ConfigError> {
    let cheb = |extra: &[(usize, f64)], name: &str| {
        let mut c = Potential::gue().chebyshev();
        for &(k, a) in extra {
            c = c.add(&ChebSeries::single(k, a));
        }
        Potential::from_chebyshev(&c.coeffs, name).map_err(|e| ConfigError(e.to_string()))
    };
    match descriptor {
        "gue" => Ok(Potential::gue()),
        "t4" => cheb(&[(4, 0.1)], "2x^2+0.1T4"),
        "t3t4" => cheb(&[(3, 0.05), (4, 0.05)], "2x^2+0.05T3+0.05T4"),
        "quartic" => Potential::new(vec![0.0, 0.0, 0.0, 0.0, 4.0 / 3.0], "4x^4/3").map_err(|e| ConfigError(e.to_string())),
        _ => {
            if let Some(rest) = descriptor.strip_prefix("mono:") {
                Potential::new(parse_list(rest)?, descriptor).map_err(|e| ConfigError(e.to_string()))
            } else if let Some(rest) = descriptor.strip_prefix("cheb:") {
                Potential::from_chebyshev(&parse_list(rest)?, descriptor).map_err(|e| ConfigError(e.to_string()))
            } else {
                bad(format!("unknown potential '{descriptor}'"))
            }
        }
    }
}

pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, ConfigError> {
    if s.trim().is_empty() {
        return Ok(vec![]);
    }
    s.split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| ConfigError(format!("cannot parse '{p}' in list '{s}'"))))
        .collect()
}

/// `x:beta` pairs separated by commas, e.g. `0:1,0.5:2`.
pub fn parse_points(s: &str) -> Result<Vec<(f64, f64)>, ConfigError> {
    if s.trim().is_empty() {
        return Ok(vec![]);
    }
    s.split(',')
        .map(|p| {
            let (x, b) = p
                .split_once(':')
                .ok_or_else(|| ConfigError(format!("singularity '{p}' is not of the form x:beta")))?;
            let x = x.trim().parse().map_err(|_| ConfigError(format!("bad location in '{p}'")))?;
            let b = b.trim().parse().map_err(|_| ConfigError(format!("bad exponent in '{p}'")))?;
            Ok((x, b))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default = "default_potential")]
    pub potential: String,
    /// solve for the support and rescale it to [-1, 1]
    #[serde(default)]
    pub normalize_support: bool,
    #[serde(default)]
    pub points: Vec<(f64, f64)>,
    /// Chebyshev coefficients of the smooth part 𝒯
    #[serde(default)]
    pub smooth: Vec<f64>,
    #[serde(default = "one")]
    pub t: f64,
    #[serde(rename = "N", default = "default_ns")]
    pub n: Vec<usize>,
    /// Hankel order; N − 1 when absent
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(rename = "M", default = "default_m")]
    pub m: usize,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default, with = "seed_repr")]
    pub seed: u64,
    #[serde(default = "default_precision")]
    pub precision_bits: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_sampler")]
    pub sampler: Sampler,
    #[serde(default = "default_normalizer")]
    pub normalizer: Normalizer,
    /// support of the bump test function
    #[serde(default = "default_bump")]
    pub bump: (f64, f64),
    /// evaluation points of the jump check
    #[serde(default = "default_xs")]
    pub xs: Vec<f64>,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "half")]
    pub s: f64,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_config_id")]
    pub config_id: String,
}

fn default_potential() -> String {
    "gue".into()
}
fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn default_ns() -> Vec<usize> {
    vec![8, 16, 32]
}
fn default_m() -> usize {
    8
}
fn default_beta() -> f64 {
    0.5
}
fn default_precision() -> u32 {
    256
}
fn default_samples() -> usize {
    1000
}
fn default_method() -> Method {
    Method::Recurrence
}
fn default_sampler() -> Sampler {
    Sampler::Tridiagonal
}
fn default_normalizer() -> Normalizer {
    Normalizer::Auto
}
fn default_bump() -> (f64, f64) {
    (-0.5, 0.5)
}
fn default_xs() -> Vec<f64> {
    vec![-0.8, -0.5, 0.0, 0.2, 0.7]
}
fn default_h() -> f64 {
    1e-4
}
fn default_grid() -> usize {
    256
}
fn default_config_id() -> String {
    "run".into()
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        ExperimentConfig {
            command,
            potential: default_potential(),
            normalize_support: false,
            points: vec![],
            smooth: vec![],
            t: 1.0,
            n: default_ns(),
            k: None,
            m: default_m(),
            beta: default_beta(),
            seed: 0,
            precision_bits: default_precision(),
            output: None,
            samples: default_samples(),
            method: default_method(),
            sampler: default_sampler(),
            normalizer: default_normalizer(),
            bump: default_bump(),
            xs: default_xs(),
            h: default_h(),
            s: 0.5,
            grid: default_grid(),
            config_id: default_config_id(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }

    /// The potential, rescaled when asked; a failed support solve is a
    /// numerical error, not a configuration one.
    pub fn potential(&self) -> anyhow::Result<Potential> {
        let v = parse_potential(&self.potential)?;
        if self.normalize_support {
            return normalize_support_solved(&v, -1.0, 1.0).context("equilibrium module failed");
        }
        Ok(v)
    }

    pub fn symbol(&self) -> Result<FHSymbol, ConfigError> {
        FHSymbol::from_points(&self.points)
            .and_then(|f| f.with_smooth(ChebSeries::new(self.smooth.clone()), self.t))
            .map_err(|e| ConfigError(e.to_string()))
    }

    pub fn expectation_options(&self) -> ExpectationOptions {
        ExpectationOptions {
            precision_bits: self.precision_bits,
            method: self.method,
        }
    }

    pub fn smooth_series(&self) -> ChebSeries {
        ChebSeries::new(self.smooth.clone())
    }

    pub fn bump_fn(&self) -> Result<Bump, ConfigError> {
        Bump::new(self.bump.0, self.bump.1).map_err(|e| ConfigError(e.to_string()))
    }

    /// Checks every field the chosen command uses against the library
    /// preconditions. Rejections are [`ConfigError`]s.
    pub fn validate(&self) -> anyhow::Result<()> {
        let v = self.potential()?;
        self.symbol()?;
        if !(53..=MAX_PRECISION).contains(&self.precision_bits) {
            return bad(format!("precision_bits {} outside [53, {MAX_PRECISION}]", self.precision_bits));
        }
        let needs_n = !matches!(self.command, Command::Equilibrium | Command::RhpCheck | Command::Gmc);
        if needs_n && (self.n.is_empty() || self.n.contains(&0)) {
            return bad("N must be a non-empty list of sizes >= 1");
        }
        if !self.t.is_finite() || !(0.0..=1.0).contains(&self.t) {
            return bad(format!("t = {} must lie in [0,1]", self.t));
        }
        match self.command {
            Command::Equilibrium => {
                if self.grid < 2 {
                    return bad("grid must have at least 2 points");
                }
            }
            Command::Hankel => {}
            Command::CompareAsymptotics => {
                if (self.t - 1.0).abs() > 0.0 {
                    return bad("compare-asymptotics uses the full symbol: t must be 1");
                }
                one_cut(&v)?;
            }
            Command::DiCheck => {
                for (name, val) in [("t", self.t), ("s", self.s)] {
                    if !(val > 0.0 && val < 1.0) {
                        return bad(format!("{name} = {val} must lie in (0,1) for di-check"));
                    }
                }
                if !(self.h > 0.0 && self.h < self.t.min(1.0 - self.t).min(self.s).min(1.0 - self.s)) {
                    return bad(format!("step h = {} must be positive and keep t±h, s±h inside [0,1]", self.h));
                }
            }
            Command::RhpCheck => {
                if self.xs.is_empty() {
                    return bad("rhp-check needs at least one x");
                }
                for &x in &self.xs {
                    if !(x.abs() <= 1.0 - 1e-3) || self.points.iter().any(|p| (p.0 - x).abs() < 1e-3) {
                        return bad(format!("jump point {x} must be 1e-3 away from ±1 and from every singularity"));
                    }
                }
            }
            Command::Sample => {
                if self.samples == 0 {
                    return bad("samples must be >= 1");
                }
                if self.sampler == Sampler::Mcmc {
                    one_cut(&v)?;
                } else if !v.is_gue() {
                    return bad("the tridiagonal sampler only draws from the GUE potential; use sampler = mcmc");
                }
            }
            Command::Gmc => {
                if !(self.beta.abs() < std::f64::consts::SQRT_2) {
                    return bad(format!(
                        "beta = {} violates the L2-phase bound |beta| < sqrt(2)",
                        self.beta
                    ));
                }
                if self.m == 0 {
                    return bad("M must be >= 1");
                }
                if self.samples < 2 {
                    return bad("samples must be >= 2");
                }
                self.bump_fn()?;
            }
            Command::SecondMoment => {
                if !(0.0..std::f64::consts::SQRT_2).contains(&self.beta) {
                    return bad(format!(
                        "beta = {} violates the L2-phase bound 0 <= beta < sqrt(2)",
                        self.beta
                    ));
                }
                if self.samples < 2 || self.grid < 2 {
                    return bad("samples and grid must be >= 2");
                }
                if !v.is_gue() {
                    return bad("second-moment samples the GUE potential only");
                }
                self.bump_fn()?;
            }
        }
        Ok(())
    }
}

fn one_cut(v: &Potential) -> Result<(), ConfigError> {
    let r = check_one_cut(v);
    if r.all_pass() {
        return Ok(());
    }
    let hint = if r.support_normalized { "" } else { " (normalize_support rescales the support to [-1,1])" };
    bad(format!("potential '{}' fails the one-cut check: {}{hint}", v.description, r.diagnostics.join("; ")))
}

/// TOML integers are signed, so seeds above i64::MAX travel as strings.
mod seed_repr {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&seed.to_string()),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(u64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Int(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}
