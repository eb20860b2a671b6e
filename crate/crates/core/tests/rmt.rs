use std::f64::consts::{LN_2, PI};

use fhgmc::chebyshev::ChebSeries;
use fhgmc::equilibrium::{equilibrium, normalize_support_solved, Potential};
use fhgmc::gmc::limit_second_moment;
use fhgmc::hankel::ExpectationOptions;
use fhgmc::quadrature::gauss_legendre;
use fhgmc::rmt::*;

fn spectrum(eigenvalues: Vec<f64>) -> SpectrumSample {
    SpectrumSample {
        eigenvalues,
        ensemble: "fixed".into(),
        seed: None,
        sampler: Sampler::Tridiagonal,
        mcmc_diagnostics: None,
    }
}

#[test]
fn single_eigenvalue_variance() {
    let mut rng = stream_rng(2024, 0);
    let n = 100_000;
    let xs: Vec<f64> = (0..n).map(|_| sample_gue(1, &mut rng).unwrap().eigenvalues[0]).collect();
    let m = xs.iter().sum::<f64>() / n as f64;
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    let var = sq.iter().sum::<f64>() / (n - 1) as f64;
    let var_se = (sq.iter().map(|s| (s - var).powi(2)).sum::<f64>() / (n as f64 * (n - 1) as f64)).sqrt();
    assert!((var - 0.25).abs() < 3.0 * var_se, "var={var} se={var_se}");
}

#[test]
fn semicircle_and_determinism() {
    let mut pooled = Vec::new();
    for d in 0..100 {
        let s = sample_gue_seeded(200, 1000 + d).unwrap();
        assert_eq!(s.n(), 200);
        assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        pooled.extend(s.eigenvalues);
    }
    assert!(ks_distance_to(&pooled, semicircle_cdf) < 0.05);
    let m2 = pooled.iter().map(|x| x * x).sum::<f64>() / pooled.len() as f64;
    assert!((m2 - 0.25).abs() < 0.01);
    assert_eq!(sample_gue_seeded(50, 9).unwrap(), sample_gue_seeded(50, 9).unwrap());
}

#[test]
fn field_identities() {
    let s = spectrum(vec![0.5]);
    assert!((field_xn(&s, 0.3) - 0.2f64.ln()).abs() < 1e-15);
    let a = spectrum(vec![-0.2, 0.7]);
    let b = spectrum(vec![0.1]);
    let ab = spectrum(vec![-0.2, 0.1, 0.7]);
    assert!((field_xn(&ab, 0.35) - field_xn(&a, 0.35) - field_xn(&b, 0.35)).abs() < 1e-14);
    assert!((field_xn(&a, 0.0) - (0.2f64 * 0.7).ln()).abs() < 1e-15);
    assert_eq!(field_truncated(&spectrum(vec![]), 0.3, 12), 0.0);
    // odd Chebyshev traces vanish for a symmetric spectrum: the field is even in x
    let sym = spectrum(vec![-0.6, 0.6]);
    assert!((field_truncated(&sym, 0.3, 9) - field_truncated(&sym, -0.3, 9)).abs() < 1e-13);
}

#[test]
fn truncated_field_converges() {
    let s = spectrum(vec![-0.81, -0.4, 0.05, 0.33, 0.72]);
    let exact = field_xn(&s, 0.1) + truncation_offset(5);
    assert!((truncation_offset(5) - 5.0 * LN_2).abs() < 1e-15);
    let err = |m| (field_truncated(&s, 0.1, m) - exact).abs();
    assert!(err(512) < err(16));
    assert!(err(2048) < 1e-2);
}

#[test]
fn mcmc_zero_steps_returns_start() {
    let p = McmcParams {
        burn_in_per_n: 0,
        thin_per_n: 0,
        ..McmcParams::default()
    };
    let s = sample_invariant(&Potential::gue(), 8, p, stream_rng(1, 0)).unwrap();
    assert_eq!(s.eigenvalues, initial_configuration(8));
}

#[test]
fn mcmc_rejects_non_one_cut() {
    let wide = Potential::new(vec![0.0, 0.0, 8.0], "8x^2").unwrap();
    assert!(sample_invariant(&wide, 4, McmcParams::default(), stream_rng(1, 0)).is_err());
}

#[test]
fn mcmc_matches_tridiagonal() {
    let n = 64;
    let chain = sample_invariant_many(&Potential::gue(), n, McmcParams::default(), stream_rng(77, 0), 200).unwrap();
    let diag = chain[0].mcmc_diagnostics.unwrap();
    assert!((0.1..=0.6).contains(&diag.acceptance_rate));
    let a: Vec<f64> = chain.iter().flat_map(|s| s.eigenvalues.clone()).collect();
    let b: Vec<f64> = (0..200)
        .flat_map(|d| sample_gue_seeded(n, 5000 + d).unwrap().eigenvalues)
        .collect();
    let (dist, p) = ks_two_sample(&a, &b);
    assert!(dist < 0.05 && p > 0.01, "D={dist} p={p}");
}

#[test]
fn mcmc_matches_equilibrium() {
    let c = Potential::gue().chebyshev().add(&ChebSeries::single(4, 0.1));
    let raw = Potential::from_chebyshev(&c.coeffs, "2x^2+0.1T4").unwrap();
    let v = normalize_support_solved(&raw, -1.0, 1.0).unwrap();
    let eq = equilibrium(&v).unwrap();
    let rule = gauss_legendre(64);
    // μ([-1, t]) with x = cos θ
    let cdf = |t: f64| {
        if t <= -1.0 {
            return 0.0;
        }
        if t >= 1.0 {
            return 1.0;
        }
        rule.integrate(&mut |th: f64| eq.density(th.cos()) * th.sin().powi(2), t.acos(), PI)
    };
    let chain = sample_invariant_many(&v, 64, McmcParams::default(), stream_rng(78, 0), 200).unwrap();
    let pooled: Vec<f64> = chain.iter().flat_map(|s| s.eigenvalues.clone()).collect();
    assert!(ks_distance_to(&pooled, cdf) < 0.08);
}

#[test]
fn empirical_integral_beta_zero() {
    let samples: Vec<_> = (0..5).map(|d| sample_gue_seeded(10, d).unwrap()).collect();
    let phi = Bump::new(-0.5, 0.5).unwrap();
    let r = empirical_measure_integral(&samples, &Potential::gue(), &phi, 0.0, Normalizer::ExactHankel, 64, &ExpectationOptions::default())
        .unwrap();
    // the estimator reduces to the grid quadrature of φ
    let on_grid = gauss_legendre(64).integrate(&mut |x| phi.eval(x), -0.5, 0.5);
    for v in &r.values {
        assert!((v - on_grid).abs() < 1e-15);
    }
    assert!((on_grid - phi.integral()).abs() < 1e-8);
}

// mean one by construction, and the second moment against the limiting
// double integral ∬ φφ (2|x−y|)^{−β²/2}
#[test]
fn empirical_integral_moments() {
    let n = 64;
    let samples: Vec<_> = (0..4000).map(|d| sample_gue_seeded(n, 90_000 + d).unwrap()).collect();
    let phi = Bump::new(-0.5, 0.5).unwrap();
    let beta = 0.5;
    let r = empirical_measure_integral(&samples, &Potential::gue(), &phi, beta, Normalizer::Auto, 16, &ExpectationOptions::default())
        .unwrap();
    assert_eq!(r.normalizer_used, Normalizer::ExactHankel);
    assert!((r.mean - phi.integral()).abs() < 3.0 * r.standard_error, "{} ± {}", r.mean, r.standard_error);
    for (m, se) in r.pointwise_ratio_mean.iter().zip(&r.pointwise_ratio_se) {
        assert!((m - 1.0).abs() < 3.0 * se, "{m} ± {se}");
    }
    let lim = limit_second_moment(beta, &phi).unwrap();
    assert!((r.second_moment - lim).abs() < 3.0 * r.second_moment_se, "{} ± {} vs {lim}", r.second_moment, r.second_moment_se);
}

#[test]
fn ks_helpers() {
    let xs: Vec<f64> = (0..1000).map(|i| -1.0 + 2.0 * (i as f64 + 0.5) / 1000.0).collect();
    assert!(ks_distance_to(&xs, |t| (t + 1.0) / 2.0) < 1e-3);
    let (d, p) = ks_two_sample(&xs, &xs);
    assert_eq!(d, 0.0);
    assert_eq!(p, 1.0);
}
