use fhgmc::chebyshev::ChebSeries;
use fhgmc::hankel::FHSymbol;
use fhgmc::rhp::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn trivial(t: f64) -> ParametrixConfig {
    ParametrixConfig::new(FHSymbol::trivial(), t).unwrap()
}

fn with_point() -> ParametrixConfig {
    let f = FHSymbol::from_points(&[(0.3, 1.0)]).unwrap().with_smooth(ChebSeries::single(2, 0.2), 1.0).unwrap();
    ParametrixConfig::new(f, 1.0).unwrap()
}

fn two_points(t: f64) -> ParametrixConfig {
    let f = FHSymbol::from_points(&[(-0.4, 0.5), (0.5, 1.0)])
        .unwrap()
        .with_smooth(ChebSeries::new(vec![0.1, 0.3, -0.2]), t)
        .unwrap();
    ParametrixConfig::new(f, t).unwrap()
}

fn random_points(n: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    (0..n)
        .map(|_| c(rng.random_range(-3.0..3.0), rng.random_range(0.05..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 }))
        .collect()
}

#[test]
fn branch_values() {
    assert!((r_eval(c(2.0, 0.0), None).unwrap() - c(3f64.sqrt(), 0.0)).norm() < 1e-15);
    let s = (1.0f64 - 0.09).sqrt();
    assert!((r_eval(c(0.3, 0.0), Some(Side::Upper)).unwrap() - c(0.0, s)).norm() < 1e-15);
    assert!((r_eval(c(0.3, 0.0), Some(Side::Lower)).unwrap() - c(0.0, -s)).norm() < 1e-15);
    // one-sided limits agree with the flagged boundary values
    assert!((r_eval(c(0.3, 1e-12), None).unwrap() - c(0.0, s)).norm() < 1e-10);
    assert!((a_eval(c(0.3, -1e-12), None).unwrap() - a_eval(c(0.3, 0.0), Some(Side::Lower)).unwrap()).norm() < 1e-10);
    assert!((a_eval(c(1e6, 1e6), None).unwrap() - 1.0).norm() < 1e-5);
    assert!(r_eval(c(-0.2, 0.0), None).is_err());
    assert!(a_eval(c(0.9, 0.0), None).is_err());
}

#[test]
fn szego_values() {
    let d = szego_d(c(1.5, 0.4), &trivial(1.0)).unwrap();
    assert!((d - 1.0).norm() < 1e-15);
    for beta in [0.5, 1.0, 2.0] {
        let f = FHSymbol::from_points(&[(0.0, beta)]).unwrap();
        let cfg = ParametrixConfig::new(f, 1.0).unwrap();
        let got = szego_d(c(2.0, 0.0), &cfg).unwrap();
        let want = (2.0 + 3f64.sqrt()).powf(-beta / 2.0) * 2f64.powf(beta / 2.0);
        assert!((got - want).norm() < 1e-14);
        assert!((szego_at_infinity(&cfg) - 2f64.powf(-beta / 2.0)).abs() < 1e-15);
    }
    assert!(szego_d(c(-0.5, 0.0), &with_point()).is_err());
}

#[test]
fn szego_exponent_against_chebyshev_form() {
    for cfg in [with_point(), two_points(0.5), two_points(1.0)] {
        for z in [c(0.2, 1e-5), c(-0.9, -0.2), c(1.001, 0.0), c(-3.0, 2.0), c(0.0, 40.0)] {
            let a = q_sz(z, &cfg).unwrap();
            let b = q_sz_chebyshev(z, &cfg, 64).unwrap();
            assert!((a - b).norm() < 1e-11, "{z} {a} {b}");
        }
    }
}

#[test]
fn szego_bounded_near_interval() {
    let sups: Vec<f64> = [0.0, 0.5, 1.0].iter().map(|&t| szego_contour_sup(&two_points(t), 0.05, 100).unwrap()).collect();
    assert_eq!(sups[0], 0.0);
    assert!(sups.iter().all(|s| s.is_finite() && *s < 1.0), "{sups:?}");
}

#[test]
fn parametrix_determinant_and_infinity() {
    for cfg in [trivial(1.0), with_point(), two_points(0.5)] {
        for z in random_points(20) {
            let p = pinf_eval(z, &cfg).unwrap();
            assert!((p.det() - 1.0).norm() < 1e-10, "{z}");
        }
        let far = pinf_eval(c(6e4, 8e4), &cfg).unwrap();
        assert!(far.sub(&Mat2::identity()).max_abs() < 1e-4);
    }
}

#[test]
fn parametrix_explicit_trivial() {
    let z = c(0.0, 2.0);
    let p = pinf_eval(z, &trivial(1.0)).unwrap();
    // a(2i)⁴ = (2i−1)/(2i+1) = (3 + 4i)/5, which has argument atan(4/3)
    let a = Complex64::from_polar(1.0, (4.0f64 / 3.0).atan() / 4.0);
    let want = Mat2([
        [0.5 * (a + 1.0 / a), c(0.0, -0.5) * (a - 1.0 / a)],
        [c(0.0, 0.5) * (a - 1.0 / a), 0.5 * (a + 1.0 / a)],
    ]);
    assert!(p.sub(&want).max_abs() < 1e-15);
}

#[test]
fn factorized_and_decomposed_forms() {
    for cfg in [with_point(), two_points(0.5), two_points(1.0)] {
        for z in random_points(10) {
            let a = pinf_eval(z, &cfg).unwrap();
            let b = pinf_factorized(z, &cfg).unwrap();
            assert!(a.sub(&b).max_abs() < 1e-9);
            assert!(decomposition_residual(z, &cfg).unwrap() < 1e-10);
        }
    }
}

#[test]
fn jump_condition() {
    let r = jump_residual(0.2, &trivial(1.0)).unwrap();
    assert!(r.at(1e-6).unwrap() < 1e-6);
    let r = jump_residual(-0.5, &with_point()).unwrap();
    assert!(r.at(1e-6).unwrap() < 1e-5);
    for cfg in [trivial(1.0), with_point(), two_points(0.5)] {
        for x in [-0.8, -0.5, 0.0, 0.2, 0.7] {
            let r = jump_residual(x, &cfg).unwrap();
            assert!(r.residuals.windows(2).all(|w| w[1] < w[0]), "{r:?}");
            assert!(r.extrapolated < 1e-8, "{r:?}");
            assert_eq!(r.rows("c").len(), 4);
        }
    }
    assert!(jump_residual(0.3, &with_point()).is_err());
    assert!(jump_residual(0.9999, &trivial(1.0)).is_err());
}

#[test]
fn endpoint_values() {
    assert_eq!(szego_endpoint_check(&trivial(1.0)).unwrap().max_deviation, 0.0);
    let t1 = ParametrixConfig::new(FHSymbol::trivial().with_smooth(ChebSeries::single(1, 1.0), 1.0).unwrap(), 1.0).unwrap();
    assert!((q_sz(c(1.0 + 1e-12, 0.0), &t1).unwrap() - 0.5).norm() < 1e-5);
    assert!((q_sz(c(-1.0 - 1e-12, 0.0), &t1).unwrap() + 0.5).norm() < 1e-5);
    let t2 = ParametrixConfig::new(FHSymbol::trivial().with_smooth(ChebSeries::single(2, 1.0), 0.5).unwrap(), 0.5).unwrap();
    let target = (0.5 + 0.5 * std::f64::consts::E).ln() / 2.0;
    for e in [1.0, -1.0] {
        assert!((q_sz(c(e * (1.0 + 1e-12), 0.0), &t2).unwrap() - target).norm() < 1e-5);
    }
    // deviation at offset δ scales like √δ
    for cfg in [t1, t2, with_point()] {
        let a = szego_endpoint_check_at(&cfg, 1e-6).unwrap();
        let b = szego_endpoint_check_at(&cfg, 1e-8).unwrap();
        assert_eq!(a.deviations.len(), 8);
        assert!(a.max_deviation < 1e-2);
        let ratio = a.max_deviation / b.max_deviation;
        assert!((ratio - 10.0).abs() < 1.0, "ratio {ratio}");
    }
}
