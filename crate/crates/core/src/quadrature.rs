//! Gauss–Legendre rules and a bisection-adaptive integrator over real or
//! complex integrands.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Nodes and weights on [-1, 1], nodes ascending.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    fn compute(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess for the i-th largest root.
            let theta = PI * (i as f64 + 0.75) / (n as f64 + 0.5);
            let nf = n as f64;
            let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[n - 1 - i] = x;
            nodes[i] = -x;
            weights[n - 1 - i] = w;
            weights[i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussRule { nodes, weights }
    }

    /// Nodes and weights mapped affinely to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + h * x, h * w))
    }

    pub fn integrate<T: Integrand>(&self, f: &mut impl FnMut(f64) -> T, a: f64, b: f64) -> T {
        let mut acc = T::zero();
        for (x, w) in self.mapped(a, b) {
            acc = acc + f(x) * w;
        }
        acc
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared, cached Gauss–Legendre rule with `n` points.
pub fn gauss_legendre(n: usize) -> Arc<GaussRule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&n) {
        return r.clone();
    }
    let rule = Arc::new(GaussRule::compute(n));
    cache.lock().unwrap().entry(n).or_insert(rule).clone()
}

pub trait Integrand: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

const ADAPT_ORDER: usize = 20;
const MAX_DEPTH: u32 = 48;

/// Adaptive bisection: a panel is accepted when its estimate and the sum of
/// its two halves differ by less than its share of `tol`, where `tol` is an
/// absolute tolerance relaxed to relative once the integral exceeds one.
pub fn integrate_adaptive<T: Integrand>(
    mut f: impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    tol: f64,
    context: &str,
) -> Result<T> {
    if a == b {
        return Ok(T::zero());
    }
    let rule = gauss_legendre(ADAPT_ORDER);
    let whole = rule.integrate(&mut f, a, b);
    let scale = whole.magnitude().max(1.0);
    let mut worst = 0.0f64;
    let mut ok = true;
    let floor = 8.0 * f64::EPSILON * scale;
    let val = adapt(&rule, &mut f, a, b, whole, (tol * scale, floor), b - a, 0, &mut ok, &mut worst);
    if ok {
        Ok(val)
    } else {
        Err(Error::Quadrature {
            context: context.to_string(),
            tol,
            achieved: worst,
        })
    }
}

#[allow(clippy::too_many_arguments)]
fn adapt<T: Integrand>(
    rule: &GaussRule,
    f: &mut impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    whole: T,
    tol: (f64, f64),
    total_len: f64,
    depth: u32,
    ok: &mut bool,
    worst: &mut f64,
) -> T {
    let m = 0.5 * (a + b);
    let left = rule.integrate(f, a, m);
    let right = rule.integrate(f, m, b);
    let refined = left + right;
    let diff = (refined - whole).magnitude();
    let share = (tol.0 * ((b - a) / total_len).max(1e-3)).max(tol.1);
    if diff <= share {
        return refined;
    }
    if depth >= MAX_DEPTH || m <= a || m >= b {
        *ok = false;
        *worst = worst.max(diff);
        return refined;
    }
    adapt(rule, f, a, m, left, tol, total_len, depth + 1, ok, worst)
        + adapt(rule, f, m, b, right, tol, total_len, depth + 1, ok, worst)
}

/// Adaptive integration over consecutive breakpoints.
pub fn integrate_piecewise<T: Integrand>(
    mut f: impl FnMut(f64) -> T,
    breaks: &[f64],
    tol: f64,
    context: &str,
) -> Result<T> {
    let mut acc = T::zero();
    for w in breaks.windows(2) {
        acc = acc + integrate_adaptive(&mut f, w[0], w[1], tol, context)?;
    }
    Ok(acc)
}
