use std::f64::consts::{FRAC_2_PI, LN_2, PI};

use fhgmc::chebyshev::{pv_hilbert_weighted, ChebSeries, Weight};
use fhgmc::equilibrium::*;
use fhgmc::quadrature::integrate_adaptive;

fn t4_raw() -> Potential {
    let c = Potential::gue().chebyshev().add(&ChebSeries::single(4, 0.1));
    Potential::from_chebyshev(&c.coeffs, "2x^2+0.1T4").unwrap()
}

fn t3t4() -> Potential {
    let c = Potential::gue()
        .chebyshev()
        .add(&ChebSeries::single(3, 0.05))
        .add(&ChebSeries::single(4, 0.05));
    Potential::from_chebyshev(&c.coeffs, "2x^2+0.05T3+0.05T4").unwrap()
}

fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| ((i as f64 + 0.5) * PI / n as f64).cos()).collect()
}

#[test]
fn gue_density_and_constant() {
    let v = Potential::gue();
    let d = density_from_potential(&v, &grid(100)).unwrap();
    assert!(d.values.iter().all(|x| (x - FRAC_2_PI).abs() < 1e-10));
    assert!((lagrange_constant(&v).unwrap() + 1.0 + 2.0 * LN_2).abs() < 1e-10);
    assert!(check_one_cut(&v).all_pass());
}

#[test]
fn zero_potential_constant() {
    let v = Potential::formal(vec![0.0], "zero");
    assert!((lagrange_constant(&v).unwrap() + 2.0 * LN_2).abs() < 1e-12);
}

// inversion formula evaluated directly with an adaptive P.V. integral
#[test]
fn density_against_pv_oracle() {
    let v = t4_raw();
    let xs: Vec<f64> = (0..10).map(|i| -0.9 + 0.2 * i as f64).collect();
    let d = density_from_potential(&v, &xs).unwrap();
    let dv = v.deriv();
    for (x, got) in xs.iter().zip(&d.values) {
        let h = pv_hilbert_weighted(|l| dv.eval(l), *x, Weight::Sqrt).unwrap();
        let want = (2.0 - h) / (2.0 * PI * (1.0 - x * x));
        assert!((got - want).abs() < 1e-8, "x={x}");
    }
    let even = density_from_potential(&v, &[0.3, -0.3]).unwrap();
    assert!((even.values[0] - even.values[1]).abs() < 1e-13);
}

#[test]
fn t4_constant_unchanged() {
    let l = lagrange_constant(&t4_raw()).unwrap();
    assert!((l + 1.0 + 2.0 * LN_2).abs() < 1e-10);
}

#[test]
fn failing_potentials() {
    let dw = Potential::new(vec![0.0, 0.0, -4.0, 0.0, 1.0], "double well").unwrap();
    let r = check_one_cut(&dw);
    assert!(!r.density_positive);
    assert!(r.min_density < 0.0);
    let wide = Potential::new(vec![0.0, 0.0, 8.0], "8x^2").unwrap();
    let r = check_one_cut(&wide);
    assert!(!r.support_normalized);
    assert!((r.mass - 1.0).abs() > 0.5);
}

#[test]
fn residual_inside_support() {
    for v in [Potential::gue(), t3t4()] {
        for i in 0..50 {
            let x = -0.98 + 1.96 * i as f64 / 49.0;
            let r = eq_log_potential_residual(&v, x).unwrap();
            assert!(r.abs() < 1e-7, "{} x={x} r={r}", v.description);
        }
    }
    let v = Potential::gue();
    let a = eq_log_potential_residual(&v, 0.0).unwrap();
    let b = eq_log_potential_residual(&v, 0.5).unwrap();
    assert!((a - b).abs() < 2e-8);
}

#[test]
fn arcsine_log_potential() {
    for x in [-0.7f64, 0.0, 0.33] {
        let v = integrate_adaptive(
            |th: f64| (x - th.cos()).abs().ln(),
            0.0,
            x.acos(),
            1e-13,
            "arcsine",
        )
        .unwrap()
            + integrate_adaptive(|th: f64| (x - th.cos()).abs().ln(), x.acos(), PI, 1e-13, "arcsine").unwrap();
        assert!((v / PI + LN_2).abs() < 1e-10);
    }
}

#[test]
fn homotopy_is_linear_in_density() {
    let v = Potential::new(vec![0.0, 0.0, 0.0, 0.0, 4.0 / 3.0], "4x^4/3").unwrap();
    let xs = grid(40);
    let d1 = density_from_potential(&v, &xs).unwrap().values;
    for s in [0.25, 0.5, 0.9] {
        let ds = density_from_potential(&v.homotopy(s), &xs).unwrap().values;
        for (a, b) in ds.iter().zip(&d1) {
            assert!((a - ((1.0 - s) * FRAC_2_PI + s * b)).abs() < 1e-9);
        }
    }
}

#[test]
fn mass_is_one_for_passing_potentials() {
    let quartic = Potential::new(vec![0.0, 0.0, 0.0, 0.0, 4.0 / 3.0], "4x^4/3").unwrap();
    for v in [Potential::gue(), quartic, normalize_support_solved(&t4_raw(), -1.0, 1.0).unwrap()] {
        let eq = equilibrium(&v).unwrap();
        assert!(eq.report.all_pass(), "{}", v.description);
        let m = eq.integrate(|_| 1.0, 1e-13).unwrap();
        assert!((m - 1.0).abs() < 1e-8, "{} mass {m}", v.description);
    }
}

#[test]
fn support_normalization() {
    let half = Potential::new(vec![0.0, 0.0, 0.5], "x^2/2").unwrap();
    let w = normalize_support(&half, -2.0, 2.0).unwrap();
    assert!((w.monomial[2] - 2.0).abs() < 1e-14);
    assert!(check_one_cut(&w).support_normalized);
    let g = normalize_support(&Potential::gue(), -1.0, 1.0).unwrap();
    assert_eq!(g.monomial, Potential::gue().monomial);
    let (a, b) = solve_support(&half, -1.5, 1.5).unwrap();
    assert!((a + 2.0).abs() < 1e-10 && (b - 2.0).abs() < 1e-10);
    let quartic = Potential::new(vec![0.0, 0.0, 0.0, 0.0, 0.05], "x^4/20").unwrap();
    let w = normalize_support_solved(&quartic, -2.0, 2.0).unwrap();
    assert!(check_one_cut(&w).all_pass());
    // support ±(80/3)^{1/4}, so W = (80/3)/20 · x⁴
    assert!((w.monomial[4] - 4.0 / 3.0).abs() < 1e-9);
}
