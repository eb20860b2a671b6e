//! Dispatch of a validated configuration onto library calls.

use std::fmt::Display;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fhgmc::asymptotics::{compare_with_exact, fh_log_moment};
use fhgmc::equilibrium::{density_from_potential, equilibrium};
use fhgmc::gmc::{limit_second_moment, second_moment_mc};
use fhgmc::hankel::{di1_residual, di2_residual, hankel_logdet_direct, orthopoly_recurrence, Method};
use fhgmc::rhp::{
    decomposition_residual, pinf_eval, jump_residual, szego_at_infinity, szego_endpoint_check, Mat2,
    ParametrixConfig,
};
use fhgmc::rmt::{
    empirical_measure_integral, ks_distance_to, sample_gue, sample_invariant_many, semicircle_cdf, stream_rng,
    McmcParams, Sampler, SpectrumSample,
};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;

pub const TOOL_VERSION: &str = concat!("fhgmc ", env!("CARGO_PKG_VERSION"));

/// |z| at which the normalization of the outer parametrix is checked.
const FAR_RADIUS: f64 = 1e5;

/// Result table plus the JSON summary of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: Value,
    pub config: ExperimentConfig,
}

impl RunOutput {
    fn new(config: &ExperimentConfig, columns: &[&str]) -> Self {
        RunOutput {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: vec![],
            summary: Value::Null,
            config: config.clone(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    /// Comment lines describing the run; no timestamps, so reruns match.
    pub fn metadata_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("# tool: {TOOL_VERSION}"),
            format!("# command: {}", self.config.command.name()),
            format!("# seed: {}", self.config.seed),
            format!("# precision_bits: {}", self.config.precision_bits),
            "# config:".to_string(),
        ];
        lines.extend(self.config.to_toml().lines().map(|l| format!("#   {l}")));
        lines
    }

    /// The header row and data rows only.
    pub fn csv_body(&self) -> String {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn csv(&self) -> String {
        let mut s = self.metadata_lines().join("\n");
        s.push('\n');
        s.push_str(&self.csv_body());
        s
    }

    pub fn json(&self) -> Value {
        json!({
            "metadata": {
                "tool": TOOL_VERSION,
                "command": self.config.command.name(),
                "seed": self.config.seed,
                "precision_bits": self.config.precision_bits,
                "config": self.config,
            },
            "columns": self.columns,
            "rows": self.rows,
            "summary": self.summary,
        })
    }

    /// Writes `<stem>.csv` and `<stem>.json`; dots already in the stem are kept.
    pub fn write_files(&self, stem: &Path) -> Result<()> {
        let suffixed = |ext: &str| {
            let mut p = stem.as_os_str().to_owned();
            p.push(ext);
            PathBuf::from(p)
        };
        let csv_path = suffixed(".csv");
        let json_path = suffixed(".json");
        std::fs::write(&csv_path, self.csv()).with_context(|| format!("writing {}", csv_path.display()))?;
        let mut js = serde_json::to_string_pretty(&self.json())?;
        js.push('\n');
        std::fs::write(&json_path, js).with_context(|| format!("writing {}", json_path.display()))?;
        Ok(())
    }
}

fn cell(v: impl Display) -> String {
    v.to_string()
}

fn module<T>(r: fhgmc::error::Result<T>, name: &'static str) -> Result<T> {
    r.with_context(|| format!("{name} module failed"))
}

/// Validates and runs one experiment.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    use crate::config::Command::*;
    match config.command {
        Equilibrium => run_equilibrium(config),
        Hankel => run_hankel(config),
        CompareAsymptotics => run_compare(config),
        DiCheck => run_di(config),
        RhpCheck => run_rhp(config),
        Sample => run_sample(config),
        Gmc => run_gmc(config),
        SecondMoment => run_second_moment(config),
    }
}

fn run_equilibrium(c: &ExperimentConfig) -> Result<RunOutput> {
    let v = c.potential()?;
    let eq = module(equilibrium(&v), "equilibrium")?;
    let h = 2.0 / c.grid as f64;
    let grid: Vec<f64> = (0..c.grid).map(|i| -1.0 + (i as f64 + 0.5) * h).collect();
    let dens = module(density_from_potential(&v, &grid), "equilibrium")?;
    let mut out = RunOutput::new(c, &["x", "density"]);
    for (x, d) in grid.iter().zip(&dens.values) {
        out.push(vec![cell(x), cell(d)]);
    }
    out.summary = json!({
        "potential": v.description,
        "lagrange_constant": eq.ell,
        "edge_defect": eq.edge_defect,
        "density_chebyshev": eq.density_cheb.coeffs,
        "one_cut": eq.report,
    });
    Ok(out)
}

fn run_hankel(c: &ExperimentConfig) -> Result<RunOutput> {
    let v = c.potential()?;
    let f = c.symbol()?;
    let mut out = RunOutput::new(c, &["N", "k", "method", "log_det"]);
    let mut results = vec![];
    for &n in &c.n {
        let k = c.k.unwrap_or(n - 1);
        let r = match c.method {
            Method::Direct => hankel_logdet_direct(&f, &v, n, k, c.precision_bits),
            Method::Recurrence => orthopoly_recurrence(&f, &v, n, k, c.precision_bits),
        };
        let r = module(r, "hankel")?;
        out.push(vec![cell(n), cell(k), enum_name(&r.method), cell(r.log_det)]);
        results.push(r);
    }
    out.summary = json!({ "results": results });
    Ok(out)
}

fn run_compare(c: &ExperimentConfig) -> Result<RunOutput> {
    let v = c.potential()?;
    let eq = module(equilibrium(&v), "equilibrium")?;
    let t = c.smooth_series();
    let rows = module(
        compare_with_exact(&v, &eq, &c.points, &t, &c.n, &c.expectation_options(), &c.config_id),
        "asymptotics",
    )?;
    let mut out = RunOutput::new(c, &["N", "log_exact", "log_predicted", "diff"]);
    let mut predictions = vec![];
    for r in &rows {
        out.push(vec![cell(r.n), cell(r.log_exact), cell(r.log_predicted), cell(r.diff)]);
        predictions.push(module(fh_log_moment(&v, &eq, &c.points, &t, r.n), "asymptotics")?);
    }
    out.summary = json!({ "comparison": rows, "predictions": predictions });
    Ok(out)
}

fn run_di(c: &ExperimentConfig) -> Result<RunOutput> {
    let v = c.potential()?;
    let f = c.symbol()?;
    let mut out = RunOutput::new(
        c,
        &["N", "identity", "h", "finite_difference", "identity_value", "residual", "residual_half", "step_ratio"],
    );
    let mut summary = vec![];
    for &n in &c.n {
        let d1 = module(di1_residual(&f, &v, n, c.t, c.h, c.precision_bits), "hankel")?;
        let d2 = module(di2_residual(&f, &v, n, c.s, c.h, c.precision_bits), "hankel")?;
        for (name, d) in [("di1", d1), ("di2", d2)] {
            out.push(vec![
                cell(n),
                name.to_string(),
                cell(d.h),
                cell(d.finite_difference),
                cell(d.identity),
                cell(d.residual),
                cell(d.residual_half),
                cell(d.step_ratio()),
            ]);
            summary.push(json!({ "N": n, "identity": name, "residual": d }));
        }
    }
    out.summary = json!({ "residuals": summary });
    Ok(out)
}

fn run_rhp(c: &ExperimentConfig) -> Result<RunOutput> {
    let cfg = module(ParametrixConfig::new(c.symbol()?, c.t), "rhp")?;
    let mut out = RunOutput::new(c, &["x", "delta", "residual", "config_id"]);
    let mut jumps = vec![];
    for &x in &c.xs {
        let j = module(jump_residual(x, &cfg), "rhp")?;
        for row in j.rows(&c.config_id) {
            let delta = row.delta.map(cell).unwrap_or_else(|| "extrapolated".into());
            out.push(vec![cell(row.x), delta, cell(row.residual), row.config_id]);
        }
        jumps.push(j);
    }
    let far = Complex64::from_polar(FAR_RADIUS, std::f64::consts::FRAC_PI_4);
    let at_far = module(pinf_eval(far, &cfg), "rhp")?;
    let probes = [Complex64::new(0.3, 0.2), Complex64::new(-0.7, -0.4), Complex64::new(2.0, 0.5)];
    let mut det_dev = 0.0f64;
    let mut decomposition = 0.0f64;
    for z in probes {
        det_dev = det_dev.max((module(pinf_eval(z, &cfg), "rhp")?.det() - 1.0).norm());
        decomposition = decomposition.max(module(decomposition_residual(z, &cfg), "rhp")?);
    }
    out.summary = json!({
        "jumps": jumps,
        "endpoint": module(szego_endpoint_check(&cfg), "rhp")?,
        "szego_at_infinity": szego_at_infinity(&cfg),
        "normalization_radius": FAR_RADIUS,
        "normalization_deviation": at_far.sub(&Mat2::identity()).max_abs(),
        "max_det_deviation": det_dev,
        "max_decomposition_residual": decomposition,
    });
    Ok(out)
}

fn draw_spectra(c: &ExperimentConfig, n: usize) -> Result<Vec<SpectrumSample>> {
    let mut rng = stream_rng(c.seed, n as u64);
    let mut spectra = match c.sampler {
        Sampler::Tridiagonal => (0..c.samples)
            .map(|_| module(sample_gue(n, &mut rng), "rmt"))
            .collect::<Result<Vec<_>>>()?,
        Sampler::Mcmc => module(
            sample_invariant_many(&c.potential()?, n, McmcParams::default(), rng, c.samples),
            "rmt",
        )?,
    };
    for s in &mut spectra {
        s.seed = Some(c.seed);
    }
    Ok(spectra)
}

fn run_sample(c: &ExperimentConfig) -> Result<RunOutput> {
    let mut out = RunOutput::new(c, &["N", "sample", "index", "eigenvalue"]);
    let mut summary = vec![];
    for &n in &c.n {
        let spectra = draw_spectra(c, n)?;
        let mut pooled = vec![];
        for (i, s) in spectra.iter().enumerate() {
            for (j, e) in s.eigenvalues.iter().enumerate() {
                out.push(vec![cell(n), cell(i), cell(j), format!("{e:.17e}")]);
            }
            pooled.extend_from_slice(&s.eigenvalues);
        }
        summary.push(json!({
            "N": n,
            "sampler": c.sampler,
            "ensemble": spectra[0].ensemble,
            "stream": n,
            "ks_to_semicircle": c.potential()?.is_gue().then(|| ks_distance_to(&pooled, semicircle_cdf)),
            "mcmc_diagnostics": spectra.last().and_then(|s| s.mcmc_diagnostics),
        }));
    }
    out.summary = json!({ "samples": summary });
    Ok(out)
}

fn run_gmc(c: &ExperimentConfig) -> Result<RunOutput> {
    let phi = c.bump_fn()?;
    let est = module(second_moment_mc(c.m, c.beta, &phi, c.samples, c.seed), "gmc")?;
    let limit = module(limit_second_moment(c.beta.abs(), &phi), "gmc")?;
    let mut out = RunOutput::new(
        c,
        &[
            "M",
            "beta",
            "samples",
            "mean",
            "mean_se",
            "second_moment",
            "second_moment_se",
            "exact_second_moment",
            "limit_second_moment",
        ],
    );
    out.push(vec![
        cell(c.m),
        cell(c.beta),
        cell(c.samples),
        cell(est.mean),
        cell(est.mean_standard_error),
        cell(est.estimate),
        cell(est.standard_error),
        cell(est.exact_formula_value),
        cell(limit),
    ]);
    out.summary = json!({ "estimate": est, "limit_second_moment": limit, "test_function": phi });
    Ok(out)
}

fn run_second_moment(c: &ExperimentConfig) -> Result<RunOutput> {
    let v = c.potential()?;
    let phi = c.bump_fn()?;
    let limit = module(limit_second_moment(c.beta, &phi), "gmc")?;
    let mut out = RunOutput::new(
        c,
        &["N", "mean", "mean_se", "second_moment", "second_moment_se", "normalizer", "limit_second_moment"],
    );
    let mut summary = vec![];
    for &n in &c.n {
        let spectra = draw_spectra(c, n)?;
        let r = module(
            empirical_measure_integral(&spectra, &v, &phi, c.beta, c.normalizer, c.grid, &c.expectation_options()),
            "rmt",
        )?;
        out.push(vec![
            cell(n),
            cell(r.mean),
            cell(r.standard_error),
            cell(r.second_moment),
            cell(r.second_moment_se),
            enum_name(&r.normalizer_used),
            cell(limit),
        ]);
        summary.push(json!({
            "N": n,
            "normalizer_used": r.normalizer_used,
            "heavy_tail": r.heavy_tail,
            "max_kurtosis": r.max_kurtosis,
            "grid": r.grid,
            "pointwise_ratio_mean": r.pointwise_ratio_mean,
            "pointwise_ratio_se": r.pointwise_ratio_se,
        }));
    }
    out.summary = json!({ "integrals": summary, "limit_second_moment": limit });
    Ok(out)
}

fn enum_name<T: serde::Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        other => format!("{other:?}"),
    }
}
