//! Chebyshev-T toolkit: evaluation, fitting, the truncated logarithmic kernel,
//! weighted finite Hilbert transforms and the smooth cutoff used for
//! compactly supported extensions of smooth symbols.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quadrature::integrate_adaptive;

/// Half-width of the transition layer of the smooth cutoff: the cutoff is 1 on
/// |λ| ≤ 1 + EPS and 0 on |λ| ≥ 1 + 2·EPS.
pub const CUTOFF_EPS: f64 = 0.05;

/// T_k(x) by the three-term recurrence. Valid for any real x; outside
/// [-1, 1] the values grow like cosh(k·acosh|x|).
pub fn cheb_eval(k: usize, x: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut t0, mut t1) = (1.0, x);
            for _ in 2..=k {
                let t2 = 2.0 * x * t1 - t0;
                t0 = t1;
                t1 = t2;
            }
            t1
        }
    }
}

/// T_0(x), ..., T_m(x).
pub fn cheb_all(m: usize, x: f64) -> Vec<f64> {
    let mut t = Vec::with_capacity(m + 1);
    t.push(1.0);
    if m >= 1 {
        t.push(x);
    }
    for k in 2..=m {
        let v = 2.0 * x * t[k - 1] - t[k - 2];
        t.push(v);
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChebSeries {
    pub coeffs: Vec<f64>,
}

impl ChebSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        ChebSeries { coeffs }
    }

    pub fn zero() -> Self {
        ChebSeries { coeffs: vec![] }
    }

    /// α·T_k.
    pub fn single(k: usize, alpha: f64) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = alpha;
        ChebSeries { coeffs }
    }

    /// Truncation order M (0 for the empty series).
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Clenshaw summation of Σ α_k T_k(x).
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.coeffs.len();
        if n == 0 {
            return 0.0;
        }
        let (mut b1, mut b2) = (0.0, 0.0);
        for k in (1..n).rev() {
            let b0 = self.coeffs[k] + 2.0 * x * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + x * b1 - b2
    }

    /// Value of the compactly supported extension: eval(x)·cutoff(x).
    pub fn eval_cut(&self, x: f64) -> f64 {
        let c = cutoff(x);
        if c == 0.0 {
            0.0
        } else {
            c * self.eval(x)
        }
    }

    pub fn derivative(&self) -> ChebSeries {
        let n = self.coeffs.len();
        if n <= 1 {
            return ChebSeries::zero();
        }
        let mut d = vec![0.0; n + 1];
        for k in (1..n).rev() {
            d[k - 1] = d[k + 1] + 2.0 * k as f64 * self.coeffs[k];
        }
        d[0] *= 0.5;
        d.truncate(n - 1);
        ChebSeries { coeffs: d }
    }

    pub fn scaled(&self, s: f64) -> ChebSeries {
        ChebSeries::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &ChebSeries) -> ChebSeries {
        let n = self.coeffs.len().max(other.coeffs.len());
        ChebSeries::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    /// (1/π)∫_{-1}^{1} s(x)/√(1-x²) dx = α_0.
    pub fn arcsine_mean(&self) -> f64 {
        self.coeff(0)
    }

    /// ∫_{-1}^{1} s(x)√(1-x²) dx = π/2·α_0 − π/4·α_2.
    pub fn semicircle_integral(&self) -> f64 {
        PI / 2.0 * self.coeff(0) - PI / 4.0 * self.coeff(2)
    }

    /// Monomial coefficients c_n of Σ c_n x^n.
    pub fn to_monomial(&self) -> Vec<f64> {
        let n = self.coeffs.len();
        let mut out = vec![0.0; n.max(1)];
        let mut prev: Vec<f64> = vec![1.0];
        let mut cur: Vec<f64> = vec![0.0, 1.0];
        for (k, &a) in self.coeffs.iter().enumerate() {
            let tk: &[f64] = match k {
                0 => &prev,
                1 => &cur,
                _ => {
                    let mut next = vec![0.0; k + 1];
                    for (i, &c) in cur.iter().enumerate() {
                        next[i + 1] += 2.0 * c;
                    }
                    for (i, &c) in prev.iter().enumerate() {
                        next[i] -= c;
                    }
                    prev = std::mem::replace(&mut cur, next);
                    &cur
                }
            };
            for (i, &c) in tk.iter().enumerate() {
                out[i] += a * c;
            }
        }
        out
    }

    pub fn from_monomial(mono: &[f64]) -> ChebSeries {
        // Horner in the Chebyshev basis: s ← x·s + c_n, using x·T_k = (T_{k+1} + T_{|k-1|})/2.
        let mut s: Vec<f64> = Vec::new();
        for &c in mono.iter().rev() {
            let mut next = vec![0.0; s.len() + 1];
            for (k, &a) in s.iter().enumerate() {
                next[k + 1] += 0.5 * a;
                if k == 0 {
                    next[1] += 0.5 * a;
                } else {
                    next[k - 1] += 0.5 * a;
                }
            }
            next[0] += c;
            s = next;
        }
        ChebSeries::new(s)
    }
}

/// Interpolating fit on the M+1 Chebyshev–Gauss nodes.
pub fn cheb_fit(g: impl Fn(f64) -> f64, m: i64) -> Result<ChebSeries> {
    if m < 0 {
        return domain(format!("cheb_fit order must be nonnegative, got {m}"));
    }
    let m = m as usize;
    let n = m + 1;
    let vals: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let th = PI * (j as f64 + 0.5) / n as f64;
            (th, g(th.cos()))
        })
        .collect();
    let coeffs = (0..=m)
        .map(|k| {
            let s: f64 = vals.iter().map(|&(th, v)| v * (k as f64 * th).cos()).sum();
            let c = 2.0 * s / n as f64;
            if k == 0 {
                0.5 * c
            } else {
                c
            }
        })
        .collect();
    Ok(ChebSeries::new(coeffs))
}

/// −log 2 − Σ_{n=1}^{M} (2/n) T_n(x) T_n(y), which tends to log|x − y|.
pub fn log_kernel_partial(x: f64, y: f64, m: usize) -> f64 {
    let (tx, ty) = (cheb_all(m, x), cheb_all(m, y));
    let mut s = 0.0;
    for n in 1..=m {
        s += 2.0 / n as f64 * (tx[n] * ty[n]);
    }
    -std::f64::consts::LN_2 - s
}

/// Smooth cutoff: 1 on |λ| ≤ 1+ε, 0 on |λ| ≥ 1+2ε, C^∞ in between.
pub fn cutoff(lambda: f64) -> f64 {
    let u = (lambda.abs() - 1.0 - CUTOFF_EPS) / CUTOFF_EPS;
    if u <= 0.0 {
        1.0
    } else if u >= 1.0 {
        0.0
    } else {
        let a = (-1.0 / u).exp();
        let b = (-1.0 / (1.0 - u)).exp();
        b / (a + b)
    }
}

/// T̃_k(λ) = T_k(λ)·cutoff(λ).
pub fn truncated_cheb(k: usize, lambda: f64) -> f64 {
    let c = cutoff(lambda);
    if c == 0.0 {
        0.0
    } else {
        c * cheb_eval(k, lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    /// √(1-λ²)
    Sqrt,
    /// 1/√(1-λ²)
    InvSqrt,
}

pub const PV_TOL: f64 = 1e-12;

/// (1/π) P.V.∫_{-1}^{1} g(λ) w(λ)/(x − λ) dλ.
pub fn pv_hilbert_weighted(g: impl Fn(f64) -> f64, x: f64, weight: Weight) -> Result<f64> {
    pv_hilbert_weighted_tol(g, x, weight, PV_TOL)
}

pub fn pv_hilbert_weighted_tol(
    g: impl Fn(f64) -> f64,
    x: f64,
    weight: Weight,
    tol: f64,
) -> Result<f64> {
    if !(x > -1.0 && x < 1.0) {
        return domain(format!("P.V. point must lie in (-1,1), got {x}"));
    }
    let gx = g(x);
    let h = 1e-6;
    let slope = (g(x + h) - g(x - h)) / (2.0 * h);
    let quotient = |th: f64| {
        let lam = th.cos();
        if lam == x {
            -slope
        } else {
            (g(lam) - gx) / (x - lam)
        }
    };
    let integrand = |th: f64| match weight {
        Weight::Sqrt => {
            let s = th.sin();
            quotient(th) * s * s
        }
        Weight::InvSqrt => quotient(th),
    };
    let thx = x.acos();
    let i1 = integrate_adaptive(integrand, 0.0, thx, tol, "pv_hilbert_weighted")?;
    let i2 = integrate_adaptive(integrand, thx, PI, tol, "pv_hilbert_weighted")?;
    let pure = match weight {
        Weight::Sqrt => x,
        Weight::InvSqrt => 0.0,
    };
    Ok((i1 + i2) / PI + gx * pure)
}
