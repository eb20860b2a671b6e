//! One PASS/FAIL line per acceptance criterion, with the measured numbers.

use std::f64::consts::{FRAC_2_PI, LN_2};
use std::time::{Duration, Instant};

use fhgmc::asymptotics::{compare_with_exact, fh_log_moment, quadratic_functional, quadratic_functional_quadrature, ComparisonRow};
use fhgmc::chebyshev::{cheb_eval, log_kernel_partial, ChebSeries};
use fhgmc::equilibrium::{density_from_potential, equilibrium, lagrange_constant, normalize_support_solved, Potential};
use fhgmc::error::Result;
use fhgmc::gmc::{chaos_kernel, limit_second_moment, pointwise_mean_one_mc, second_moment_exact, second_moment_mc};
use fhgmc::hankel::{di1_residual, di2_residual, hankel_logdet_direct, orthopoly_recurrence, ExpectationOptions, FHSymbol, Method};
use fhgmc::rhp::{jump_residual, pinf_eval, Mat2, ParametrixConfig};
use fhgmc::rmt::{ks_distance_to, ks_two_sample, sample_gue_seeded, sample_invariant_many, semicircle_cdf, stream_rng, Bump, McmcParams};
use num_complex::Complex64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn decreasing(rows: &[ComparisonRow]) -> bool {
    rows.windows(2).all(|w| w[1].diff < w[0].diff)
}

fn diffs(rows: &[ComparisonRow]) -> String {
    rows.iter().map(|r| format!("N={}:{:.4e}", r.n, r.diff)).collect::<Vec<_>>().join(" ")
}

fn t4_raw() -> Potential {
    let c = Potential::gue().chebyshev().add(&ChebSeries::single(4, 0.1));
    Potential::from_chebyshev(&c.coeffs, "2x^2+0.1T4").unwrap()
}

fn gue_equilibrium() -> Result<Outcome> {
    let v = Potential::gue();
    let grid: Vec<f64> = (0..100).map(|i| -0.99 + 1.98 * i as f64 / 99.0).collect();
    let d = density_from_potential(&v, &grid)?;
    let worst = d.values.iter().map(|x| (x - FRAC_2_PI).abs()).fold(0.0, f64::max);
    let ell = (lagrange_constant(&v)? + 1.0 + 2.0 * LN_2).abs();
    outcome(worst < 1e-10 && ell < 1e-10, format!("density err {worst:.2e}, constant err {ell:.2e}"))
}

fn hankel_equivalence() -> Result<Outcome> {
    let symbols = [
        FHSymbol::trivial(),
        FHSymbol::from_points(&[(0.0, 1.0)])?,
        FHSymbol::from_points(&[(0.3, 0.5)])?,
        FHSymbol::from_points(&[(-0.5, 1.0), (0.5, 1.0)])?,
        FHSymbol::from_points(&[(0.2, 2.0)])?,
        FHSymbol::trivial().with_smooth(ChebSeries::single(2, 0.4), 1.0)?,
        FHSymbol::from_points(&[(0.3, 1.0)])?.with_smooth(ChebSeries::single(1, 0.2), 0.5)?,
    ];
    let quartic = Potential::new(vec![0.0, 0.0, 0.0, 0.0, 4.0 / 3.0], "4x^4/3")?;
    let mut configs = 0;
    let mut worst = 0.0f64;
    for f in &symbols {
        for v in [Potential::gue(), t4_raw(), quartic.clone()] {
            configs += 1;
            for (n, k) in [(4, 6), (12, 12)] {
                let d = hankel_logdet_direct(f, &v, n, k, 256)?;
                let q = orthopoly_recurrence(f, &v, n, k, 256)?;
                worst = worst.max(((d.log_det - q.log_det) / d.log_det.abs().max(1.0)).abs());
            }
        }
    }
    outcome(worst < 1e-10 && configs >= 12, format!("{configs} configurations, worst relative gap {worst:.2e}"))
}

fn krasovsky() -> Result<Outcome> {
    let v = Potential::gue();
    let eq = equilibrium(&v)?;
    let opts = ExpectationOptions { precision_bits: 512, method: Method::Recurrence };
    let rows = compare_with_exact(&v, &eq, &[(0.0, 1.0)], &ChebSeries::zero(), &[8, 16, 32, 64], &opts, "gue-0-1")?;
    let last = rows.last().unwrap().diff;
    outcome(decreasing(&rows) && last < 0.05, diffs(&rows))
}

fn one_cut() -> Result<Outcome> {
    let v = normalize_support_solved(&t4_raw(), -1.0, 1.0)?;
    let eq = equilibrium(&v)?;
    let rows = compare_with_exact(&v, &eq, &[(0.0, 1.0)], &ChebSeries::zero(), &[8, 16, 32], &ExpectationOptions::default(), "t4")?;
    let last = rows.last().unwrap().diff;
    outcome(
        decreasing(&rows) && last < 0.1,
        format!("{} (support-normalized potential)", diffs(&rows)),
    )
}

fn smooth_part() -> Result<Outcome> {
    let v = Potential::gue();
    let eq = equilibrium(&v)?;
    let t = ChebSeries::single(2, 0.4);
    let rows = compare_with_exact(&v, &eq, &[(0.0, 1.0)], &t, &[8, 16, 32], &ExpectationOptions::default(), "fh")?;
    let closed = t.coeffs.iter().enumerate().map(|(k, a)| k as f64 * a * a).sum::<f64>() / 8.0;
    let q = quadratic_functional(&t);
    let qq = quadratic_functional_quadrature(&t)?;
    let ok = decreasing(&rows) && (q - closed).abs() < 1e-15 && (q - qq).abs() < 1e-8;
    outcome(ok, format!("{}; quadratic {q:.12} vs quadrature gap {:.1e}", diffs(&rows), (q - qq).abs()))
}

fn differential_identities() -> Result<Outcome> {
    let v = Potential::gue();
    let mut worst = 0.0f64;
    let mut ratios = Vec::new();
    for n in [5, 6] {
        let f = FHSymbol::from_points(&[(0.3, 1.0)])?.with_smooth(ChebSeries::single(2, 0.3), 0.5)?;
        let r = di1_residual(&f, &v, n, 0.5, 1e-4, 256)?;
        worst = worst.max(r.residual);
        ratios.push(r.step_ratio());
        for f in [FHSymbol::trivial(), FHSymbol::from_points(&[(0.2, 1.0)])?] {
            let r = di2_residual(&f, &t4_raw(), n, 0.5, 1e-4, 256)?;
            worst = worst.max(r.residual);
            ratios.push(r.step_ratio());
        }
    }
    let scaling = ratios.iter().all(|r| (r - 4.0).abs() < 0.5);
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.2}")).collect();
    outcome(worst < 1e-5 && scaling, format!("worst residual {worst:.2e}, halving ratios [{}]", shown.join(", ")))
}

fn parametrix() -> Result<Outcome> {
    let configs = [
        ParametrixConfig::new(FHSymbol::trivial(), 1.0)?,
        ParametrixConfig::new(FHSymbol::from_points(&[(0.3, 1.0)])?.with_smooth(ChebSeries::single(2, 0.2), 1.0)?, 1.0)?,
        ParametrixConfig::new(
            FHSymbol::from_points(&[(-0.4, 0.5), (0.5, 1.0)])?.with_smooth(ChebSeries::new(vec![0.1, 0.3, -0.2]), 0.5)?,
            0.5,
        )?,
    ];
    let (mut jump, mut det, mut inf) = (0.0f64, 0.0f64, 0.0f64);
    for cfg in &configs {
        for x in [-0.8, -0.5, 0.0, 0.2, 0.7] {
            jump = jump.max(jump_residual(x, cfg)?.at(1e-6).unwrap());
        }
        for k in 0..20 {
            let th = 0.3 + k as f64 * 0.31;
            let z = Complex64::from_polar(0.2 + 0.15 * k as f64, th);
            det = det.max((pinf_eval(z, cfg)?.det() - 1.0).norm());
        }
        let far = Complex64::from_polar(1e5, 0.7);
        inf = inf.max(pinf_eval(far, cfg)?.sub(&Mat2::identity()).max_abs());
    }
    outcome(
        jump < 1e-5 && det < 1e-10 && inf < 1e-4,
        format!("jump {jump:.2e} at delta=1e-6, det {det:.1e}, at infinity {inf:.1e}"),
    )
}

fn gmc_moments() -> Result<Outcome> {
    let phi = Bump::new(-0.5, 0.5)?;
    let e = second_moment_mc(8, 0.5, &phi, 100_000, 20)?;
    let z = (e.estimate - e.exact_formula_value).abs() / e.standard_error;
    let xs: Vec<f64> = (0..10).map(|i| -0.9 + 0.2 * i as f64).collect();
    let pm = pointwise_mean_one_mc(8, 0.5, &xs, 100_000, 21)?;
    let worst_pm = pm.iter().map(|(m, se)| (m - 1.0).abs() / se).fold(0.0, f64::max);
    let bound = limit_second_moment(0.5, &phi)?;
    let mut bounded = true;
    for m in [4, 8, 16, 32] {
        bounded &= second_moment_exact(m, 0.5, &phi)? < bound;
    }
    outcome(
        z < 3.0 && worst_pm < 3.0 && bounded,
        format!(
            "MC {:.5}±{:.5} vs {:.5} ({z:.2} SE), pointwise worst {worst_pm:.2} SE, bound {bound:.5} held={bounded}",
            e.estimate, e.standard_error, e.exact_formula_value
        ),
    )
}

fn sampling() -> Result<Outcome> {
    let mut pooled = Vec::new();
    for d in 0..100 {
        pooled.extend(sample_gue_seeded(200, 300 + d)?.eigenvalues);
    }
    let ks = ks_distance_to(&pooled, semicircle_cdf);
    let chain = sample_invariant_many(&Potential::gue(), 64, McmcParams::default(), stream_rng(31, 0), 200)?;
    let a: Vec<f64> = chain.iter().flat_map(|s| s.eigenvalues.clone()).collect();
    let mut b = Vec::new();
    for d in 0..200 {
        b.extend(sample_gue_seeded(64, 700 + d)?.eigenvalues);
    }
    let (dist, p) = ks_two_sample(&a, &b);
    outcome(ks < 0.05 && p > 0.01, format!("semicircle KS {ks:.4}, two-sample D {dist:.4} p {p:.3}"))
}

fn log_kernel() -> Result<Outcome> {
    let (x, y) = (0.25f64, -0.4f64);
    let exact = (x - y).abs().ln();
    let e16 = (log_kernel_partial(x, y, 16) - exact).abs();
    let e256 = (log_kernel_partial(x, y, 256) - exact).abs();
    outcome(e256 < 1e-2 && e256 < e16, format!("error M=16 {e16:.3e}, M=256 {e256:.3e}"))
}

// The symbol 𝒯_y = −β Σ (2/k) T_k(y) T_k added to a point (x, β) changes the
// prediction by β² Σ T_k(x)T_k(y)/k beyond the two separate effects.
fn chaos_consistency() -> Result<Outcome> {
    let v = Potential::gue();
    let eq = equilibrium(&v)?;
    let (beta, m, n) = (0.8, 24, 50);
    let mut worst = 0.0f64;
    for (x, y) in [(0.25, -0.4), (0.1, 0.1), (-0.7, 0.55), (0.0, 0.9)] {
        let coeffs = (0..=m).map(|k| if k == 0 { 0.0 } else { -beta * 2.0 / k as f64 * cheb_eval(k, y) }).collect();
        let t = ChebSeries::new(coeffs);
        let joint = fh_log_moment(&v, &eq, &[(x, beta)], &t, n)?.log_value;
        let point = fh_log_moment(&v, &eq, &[(x, beta)], &ChebSeries::zero(), n)?.log_value;
        let field = fh_log_moment(&v, &eq, &[], &t, n)?.log_value;
        let predicted = (joint - point - field).exp();
        let kernel = chaos_kernel(x, y, beta, m)?;
        worst = worst.max((predicted / kernel - 1.0).abs());
    }
    outcome(worst < 1e-12, format!("worst relative gap {worst:.2e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 11] = [
        ("GUE equilibrium", gue_equilibrium),
        ("Hankel oracle equivalence", hankel_equivalence),
        ("single-singularity GUE convergence", krasovsky),
        ("one-cut potential convergence", one_cut),
        ("smooth-part convergence and quadratic term", smooth_part),
        ("differential identities", differential_identities),
        ("global parametrix", parametrix),
        ("chaos moments", gmc_moments),
        ("sampling", sampling),
        ("log-kernel truncation", log_kernel),
        ("chaos-vs-matrix kernel consistency", chaos_consistency),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = run();
        let took: Duration = start.elapsed();
        let (pass, detail) = match res {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            took.as_secs_f64()
        );
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
