//! Command-line arguments and how they override a configuration file.

use std::path::PathBuf;

use clap::Parser;

use crate::config::{parse_enum, parse_list, parse_points, Command, ConfigError, ExperimentConfig};

#[derive(Debug, Clone, Parser)]
#[command(name = "fhgmc", version, about = "Batch experiments on Hankel determinants with Fisher-Hartwig symbols and their chaos limits")]
#[command(allow_negative_numbers = true)]
pub struct Args {
    /// experiment to run; overrides `command` in the config file
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// TOML experiment file; flags below override its fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// gue, t4, t3t4, quartic, mono:c0,c1,.. or cheb:a0,a1,..
    #[arg(long)]
    pub potential: Option<String>,
    /// rescale the potential so its support is [-1,1]
    #[arg(long)]
    pub normalize_support: bool,
    /// singularities as x:beta pairs, e.g. 0:1,-0.5:2
    #[arg(long, allow_hyphen_values = true)]
    pub points: Option<String>,
    /// Chebyshev coefficients of the smooth part
    #[arg(long, allow_hyphen_values = true)]
    pub smooth: Option<String>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    /// finite-difference step
    #[arg(long)]
    pub h: Option<f64>,
    /// comma-separated sizes
    #[arg(long = "N")]
    pub n: Option<String>,
    /// Hankel order (default N-1)
    #[arg(long)]
    pub k: Option<usize>,
    /// chaos truncation level
    #[arg(long = "M")]
    pub m: Option<usize>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// master seed
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub precision_bits: Option<u32>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// direct or recurrence
    #[arg(long)]
    pub method: Option<String>,
    /// tridiagonal or mcmc
    #[arg(long)]
    pub sampler: Option<String>,
    /// exact_hankel, asymptotic or auto
    #[arg(long)]
    pub normalizer: Option<String>,
    /// support a,b of the bump test function
    #[arg(long, allow_hyphen_values = true)]
    pub bump: Option<String>,
    /// jump check points
    #[arg(long, allow_hyphen_values = true)]
    pub xs: Option<String>,
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub config_id: Option<String>,
    /// write <output>.csv and <output>.json instead of CSV on stdout
    #[arg(long)]
    pub output: Option<String>,
}

impl Args {
    /// The config file (if any) with every given flag applied on top.
    pub fn resolve(&self) -> Result<ExperimentConfig, ConfigError> {
        let mut c = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| ConfigError(format!("cannot read {}: {e}", p.display())))?;
                let mut c = ExperimentConfig::from_toml(&text)?;
                if let Some(cmd) = self.command {
                    c.command = cmd;
                }
                c
            }
            None => ExperimentConfig::new(
                self.command
                    .ok_or_else(|| ConfigError("no command given and no --config file".into()))?,
            ),
        };
        if let Some(v) = &self.potential {
            c.potential = v.clone();
        }
        if self.normalize_support {
            c.normalize_support = true;
        }
        if let Some(v) = &self.points {
            c.points = parse_points(v)?;
        }
        if let Some(v) = &self.smooth {
            c.smooth = parse_list(v)?;
        }
        if let Some(v) = &self.n {
            c.n = parse_list(v)?;
        }
        if let Some(v) = &self.bump {
            match parse_list::<f64>(v)?.as_slice() {
                &[a, b] => c.bump = (a, b),
                _ => return Err(ConfigError(format!("bump '{v}' must be two numbers a,b"))),
            }
        }
        if let Some(v) = &self.xs {
            c.xs = parse_list(v)?;
        }
        if let Some(v) = &self.method {
            c.method = parse_enum(v, "method")?;
        }
        if let Some(v) = &self.sampler {
            c.sampler = parse_enum(v, "sampler")?;
        }
        if let Some(v) = &self.normalizer {
            c.normalizer = parse_enum(v, "normalizer")?;
        }
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = &self.$f { c.$f = v.clone(); } )* };
        }
        set!(t, s, h, m, beta, seed, precision_bits, samples, grid, config_id);
        if self.k.is_some() {
            c.k = self.k;
        }
        if self.output.is_some() {
            c.output = self.output.clone();
        }
        Ok(c)
    }
}
