//! Equilibrium measures of polynomial external fields on [-1, 1]: density
//! inversion, the Euler–Lagrange constant, one-cut diagnostics and support
//! normalization.

use std::cell::RefCell;
use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::chebyshev::{cheb_fit, pv_hilbert_weighted, ChebSeries, Weight};
use crate::error::{domain, Error, Result};
use crate::quadrature::{gauss_legendre, integrate_adaptive};

/// Polynomial external field V(x) = Σ c_n x^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub monomial: Vec<f64>,
    pub description: String,
}

impl Potential {
    /// A confining polynomial: even degree ≥ 2 with positive leading coefficient.
    pub fn new(monomial: Vec<f64>, description: impl Into<String>) -> Result<Self> {
        let p = Potential::formal(monomial, description);
        let deg = p.degree();
        let lead = p.monomial.get(deg).copied().unwrap_or(0.0);
        if deg < 2 || deg % 2 == 1 || !(lead > 0.0) {
            return domain(format!(
                "potential '{}' does not grow at infinity (degree {deg}, leading coefficient {lead})",
                p.description
            ));
        }
        if p.monomial.iter().any(|c| !c.is_finite()) {
            return domain("potential coefficients must be finite");
        }
        Ok(p)
    }

    /// No growth check. Only for formula-level evaluation.
    pub fn formal(mut monomial: Vec<f64>, description: impl Into<String>) -> Self {
        while monomial.len() > 1 && *monomial.last().unwrap() == 0.0 {
            monomial.pop();
        }
        if monomial.is_empty() {
            monomial.push(0.0);
        }
        Potential {
            monomial,
            description: description.into(),
        }
    }

    pub fn from_chebyshev(coeffs: &[f64], description: impl Into<String>) -> Result<Self> {
        Potential::new(ChebSeries::new(coeffs.to_vec()).to_monomial(), description)
    }

    /// V(x) = 2x².
    pub fn gue() -> Self {
        Potential::formal(vec![0.0, 0.0, 2.0], "gue")
    }

    pub fn is_gue(&self) -> bool {
        self.monomial == [0.0, 0.0, 2.0]
    }

    pub fn degree(&self) -> usize {
        self.monomial.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.monomial.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn deriv(&self) -> Potential {
        let d: Vec<f64> = self
            .monomial
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, c)| n as f64 * c)
            .collect();
        Potential::formal(d, format!("({})'", self.description))
    }

    pub fn eval_deriv(&self, x: f64) -> f64 {
        let n = self.monomial.len();
        let mut acc = 0.0;
        for k in (1..n).rev() {
            acc = acc * x + k as f64 * self.monomial[k];
        }
        acc
    }

    pub fn chebyshev(&self) -> ChebSeries {
        ChebSeries::from_monomial(&self.monomial)
    }

    /// V_s = (1-s)·2x² + s·V, stored as 2x² + s(V − 2x²) so that the GUE is a
    /// fixed point for every s.
    pub fn homotopy(&self, s: f64) -> Potential {
        let g = Potential::gue();
        let n = self.monomial.len().max(3);
        let c = (0..n)
            .map(|k| {
                let gk = g.monomial.get(k).copied().unwrap_or(0.0);
                let vk = self.monomial.get(k).copied().unwrap_or(0.0);
                gk + s * (vk - gk)
            })
            .collect();
        Potential::formal(c, format!("homotopy({}, s={s})", self.description))
    }

    /// ∂_s V_s = V − 2x².
    pub fn homotopy_direction(&self) -> Potential {
        let n = self.monomial.len().max(3);
        let c = (0..n)
            .map(|k| {
                let gk = if k == 2 { 2.0 } else { 0.0 };
                self.monomial.get(k).copied().unwrap_or(0.0) - gk
            })
            .collect();
        Potential::formal(c, format!("{} - gue", self.description))
    }

    /// Global minimum over the real line (confining potentials only).
    pub fn global_min(&self) -> f64 {
        // Critical points lie within the Cauchy bound of V'.
        let d = self.deriv();
        let lead = d.monomial.last().copied().unwrap_or(0.0);
        let bound = if lead == 0.0 {
            1.0
        } else {
            1.0 + d
                .monomial
                .iter()
                .map(|c| (c / lead).abs())
                .fold(0.0, f64::max)
        };
        let n = 4000;
        let mut best = self.eval(0.0);
        let mut arg = 0.0;
        for i in 0..=n {
            let x = -bound + 2.0 * bound * i as f64 / n as f64;
            let v = self.eval(x);
            if v < best {
                best = v;
                arg = x;
            }
        }
        // Polish with a few Newton steps on V'.
        let d2 = d.deriv();
        let mut x = arg;
        for _ in 0..30 {
            let h = d2.eval(x);
            if h <= 0.0 {
                break;
            }
            x -= d.eval(x) / h;
        }
        best.min(self.eval(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneCutReport {
    pub density_positive: bool,
    pub min_density: f64,
    pub el2_strict: bool,
    /// Largest value of the outside residual (must be below −margin).
    pub el2_worst: f64,
    pub el2_worst_at: f64,
    pub support_normalized: bool,
    /// Mass of the bounded density part; 1 when the support is [-1, 1].
    pub mass: f64,
    pub diagnostics: Vec<String>,
}

impl OneCutReport {
    pub fn all_pass(&self) -> bool {
        self.density_positive && self.el2_strict && self.support_normalized
    }
}

/// The equilibrium measure in the form
/// dμ = [d_b(x) + (e_0 + e_1 x)/(2π(1-x²))] √(1-x²) dx,
/// where d_b is a polynomial and (e_0, e_1) is the edge defect, zero exactly
/// when [-1, 1] is the true support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumData {
    pub density_cheb: ChebSeries,
    pub edge_defect: [f64; 2],
    pub ell: f64,
    pub report: OneCutReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityResult {
    pub values: Vec<f64>,
    pub series: ChebSeries,
    pub edge_defect: [f64; 2],
}

const GRID_MARGIN: f64 = 1e-3;
pub const EL2_MARGIN: f64 = 1e-6;
pub const EL2_INNER: f64 = 1.02;
pub const EL2_OUTER: f64 = 5.0;
pub const CHECK_GRID: usize = 256;
const MASS_TOL: f64 = 1e-8;
const LOGPOT_TOL: f64 = 1e-13;

/// (1/π) P.V.∫ V'(λ)√(1-λ²)/(x − λ) dλ.
fn hilbert_of_deriv(v: &Potential, x: f64) -> Result<f64> {
    pv_hilbert_weighted(|l| v.eval_deriv(l), x, Weight::Sqrt)
}

/// Numerator n(x) with d(x) = n(x) / (2π(1-x²)).
fn numerator(v: &Potential, x: f64) -> Result<f64> {
    Ok(2.0 - hilbert_of_deriv(v, x)?)
}

/// Exact division n = (1-x²)q + (e_0 + e_1 x) in the Chebyshev basis.
fn divide_one_minus_x2(n: &ChebSeries) -> (ChebSeries, [f64; 2]) {
    // (1-x²)T_k = T_k/2 − T_{k+2}/4 − T_{|k-2|}/4 for k ≥ 1, and T_0/2 − T_2/2 for k = 0.
    let m = n.order();
    if m < 2 {
        return (ChebSeries::zero(), [n.coeff(0), n.coeff(1)]);
    }
    let mut q = vec![0.0; m - 1];
    // Match coefficients of T_j from the top; T_j receives q_j/2, −q_{j−2}/4, −q_{j+2}/4.
    for j in (2..=m).rev() {
        let qj = q.get(j).copied().unwrap_or(0.0);
        let qj2 = q.get(j + 2).copied().unwrap_or(0.0);
        let mut qm2 = 4.0 * (0.5 * qj - 0.25 * qj2 - n.coeff(j));
        if j == 2 {
            // q_0 contributes −q_0/2 to T_2.
            qm2 *= 0.5;
        }
        q[j - 2] = qm2;
    }
    let prod_coeff = |j: usize| -> f64 {
        let g = |k: usize| q.get(k).copied().unwrap_or(0.0);
        let mut c = 0.0;
        match j {
            0 => c += 0.5 * g(0) - 0.25 * g(2),
            1 => c += 0.5 * g(1) - 0.25 * g(1) - 0.25 * g(3),
            _ => {}
        }
        c
    };
    let e0 = n.coeff(0) - prod_coeff(0);
    let e1 = n.coeff(1) - prod_coeff(1);
    (ChebSeries::new(q), [e0, e1])
}

/// Chebyshev series of the bounded density part and the edge defect.
pub fn density_series(v: &Potential) -> Result<(ChebSeries, [f64; 2])> {
    let order = v.degree().max(2) + 4;
    let failure = RefCell::new(None);
    let num = cheb_fit(
        |x| match numerator(v, x) {
            Ok(y) => y,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        order as i64,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let scale = num.coeffs.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    let cleaned = ChebSeries::new(
        num.coeffs
            .iter()
            .map(|&c| if c.abs() < 1e-13 * scale { 0.0 } else { c })
            .collect(),
    );
    let (q, e) = divide_one_minus_x2(&cleaned);
    Ok((q.scaled(1.0 / (2.0 * PI)), e))
}

/// Pointwise density from the inversion formula; within GRID_MARGIN of ±1,
/// where the formula is 0/0, from the series instead.
pub fn density_from_potential(v: &Potential, grid: &[f64]) -> Result<DensityResult> {
    if let Some(&x) = grid.iter().find(|x| !(x.abs() < 1.0)) {
        return domain(format!("density grid point {x} must lie in (-1,1)"));
    }
    let (series, edge_defect) = density_series(v)?;
    let [e0, e1] = edge_defect;
    let values = grid
        .iter()
        .map(|&x| {
            if x.abs() <= 1.0 - GRID_MARGIN {
                Ok(numerator(v, x)? / (2.0 * PI * (1.0 - x * x)))
            } else {
                Ok(series.eval(x) + (e0 + e1 * x) / (2.0 * PI * (1.0 - x * x)))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityResult {
        values,
        series,
        edge_defect,
    })
}

/// ℓ_V = −2 log 2 − (1/π)∫ V(x)/√(1-x²) dx.
pub fn lagrange_constant(v: &Potential) -> Result<f64> {
    let mean = integrate_adaptive(|th: f64| v.eval(th.cos()), 0.0, PI, 1e-14, "lagrange_constant")?;
    Ok(-2.0 * LN_2 - mean / PI)
}

impl EquilibriumData {
    pub fn density(&self, x: f64) -> f64 {
        let [e0, e1] = self.edge_defect;
        let mut d = self.density_cheb.eval(x);
        if e0 != 0.0 || e1 != 0.0 {
            d += (e0 + e1 * x) / (2.0 * PI * (1.0 - x * x));
        }
        d
    }

    /// Density with respect to θ where x = cos θ: dμ = ρ(θ) dθ.
    fn theta_density(&self, th: f64) -> f64 {
        let x = th.cos();
        let s = th.sin();
        let [e0, e1] = self.edge_defect;
        self.density_cheb.eval(x) * s * s + (e0 + e1 * x) / (2.0 * PI)
    }

    /// ∫ g dμ.
    pub fn integrate(&self, g: impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
        integrate_adaptive(
            |th: f64| g(th.cos()) * self.theta_density(th),
            0.0,
            PI,
            tol,
            "equilibrium integral",
        )
    }

    pub fn total_mass(&self) -> f64 {
        self.density_cheb.semicircle_integral() + self.edge_defect[0] / 2.0
    }

    /// ∫ log|x − y| dμ(y).
    pub fn log_potential(&self, x: f64) -> Result<f64> {
        let f = |th: f64| {
            let d = (x - th.cos()).abs();
            if d == 0.0 {
                0.0
            } else {
                d.ln() * self.theta_density(th)
            }
        };
        if x.abs() < 1.0 {
            let thx = x.acos();
            Ok(integrate_adaptive(f, 0.0, thx, LOGPOT_TOL, "log potential")?
                + integrate_adaptive(f, thx, PI, LOGPOT_TOL, "log potential")?)
        } else {
            integrate_adaptive(f, 0.0, PI, LOGPOT_TOL, "log potential")
        }
    }
}

fn build_data(v: &Potential) -> Result<(ChebSeries, [f64; 2], f64)> {
    let (series, defect) = density_series(v)?;
    Ok((series, defect, lagrange_constant(v)?))
}

/// 2∫ log|x − y| dμ_V(y) − V(x) − ℓ_V.
pub fn eq_log_potential_residual(v: &Potential, x: f64) -> Result<f64> {
    let (series, defect, ell) = build_data(v)?;
    let data = EquilibriumData {
        density_cheb: series,
        edge_defect: defect,
        ell,
        report: empty_report(),
    };
    residual_with(&data, v, x)
}

fn residual_with(data: &EquilibriumData, v: &Potential, x: f64) -> Result<f64> {
    Ok(2.0 * data.log_potential(x)? - v.eval(x) - data.ell)
}

fn empty_report() -> OneCutReport {
    OneCutReport {
        density_positive: false,
        min_density: f64::NAN,
        el2_strict: false,
        el2_worst: f64::NAN,
        el2_worst_at: f64::NAN,
        support_normalized: false,
        mass: f64::NAN,
        diagnostics: vec![],
    }
}

fn report_for(data: &EquilibriumData, v: &Potential) -> OneCutReport {
    let mut r = empty_report();
    // (a) positivity of the bounded part on a dense grid including the edges
    let n = 4 * CHECK_GRID;
    r.min_density = (0..=n)
        .map(|i| data.density_cheb.eval(-1.0 + 2.0 * i as f64 / n as f64))
        .fold(f64::INFINITY, f64::min);
    r.density_positive = r.min_density > 0.0;
    // (c) mass
    r.mass = data.density_cheb.semicircle_integral();
    r.support_normalized = (r.mass - 1.0).abs() < MASS_TOL;
    // (b) strict inequality off the support
    let mut worst = f64::NEG_INFINITY;
    let mut worst_at = f64::NAN;
    let mut failed = None;
    let half = CHECK_GRID / 2;
    for side in [-1.0, 1.0] {
        for i in 0..half {
            let x = side * (EL2_INNER + (EL2_OUTER - EL2_INNER) * i as f64 / (half - 1) as f64);
            match residual_with(data, v, x) {
                Ok(res) if res > worst => {
                    worst = res;
                    worst_at = x;
                }
                Ok(_) => {}
                Err(e) => {
                    failed.get_or_insert(e);
                }
            }
        }
    }
    r.el2_worst = worst;
    r.el2_worst_at = worst_at;
    r.el2_strict = failed.is_none() && worst < -EL2_MARGIN;
    if let Some(e) = failed {
        r.diagnostics.push(format!("el2 quadrature: {e}"));
    }
    if !r.density_positive {
        r.diagnostics
            .push(format!("density changes sign (min {:.6e})", r.min_density));
    }
    if !r.support_normalized {
        r.diagnostics.push(format!(
            "support is not [-1,1]: bounded density mass {:.6} (edge defect {:?})",
            r.mass, data.edge_defect
        ));
    }
    r
}

pub fn check_one_cut(v: &Potential) -> OneCutReport {
    match equilibrium(v) {
        Ok(d) => d.report,
        Err(e) => {
            let mut r = empty_report();
            r.diagnostics.push(e.to_string());
            r
        }
    }
}

/// Density series, ℓ_V and the one-cut report in one record.
pub fn equilibrium(v: &Potential) -> Result<EquilibriumData> {
    let (series, defect, ell) = build_data(v)?;
    let mut data = EquilibriumData {
        density_cheb: series,
        edge_defect: defect,
        ell,
        report: empty_report(),
    };
    data.report = report_for(&data, v);
    Ok(data)
}

/// W(x) = V_raw((b−a)x/2 + (a+b)/2).
pub fn normalize_support(v_raw: &Potential, a: f64, b: f64) -> Result<Potential> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return domain(format!("support endpoints must satisfy a < b, got [{a}, {b}]"));
    }
    let h = 0.5 * (b - a);
    let c = 0.5 * (a + b);
    // Expand Σ v_n (h x + c)^n.
    let n = v_raw.monomial.len();
    let mut out = vec![0.0; n];
    let mut pow = vec![1.0]; // coefficients of (h x + c)^k
    for (k, &vk) in v_raw.monomial.iter().enumerate() {
        if k > 0 {
            let mut next = vec![0.0; pow.len() + 1];
            for (i, &p) in pow.iter().enumerate() {
                next[i] += c * p;
                next[i + 1] += h * p;
            }
            pow = next;
        }
        for (i, &p) in pow.iter().enumerate() {
            out[i] += vk * p;
        }
    }
    let desc = if a == -1.0 && b == 1.0 {
        v_raw.description.clone()
    } else {
        format!("{} on [{a}, {b}]", v_raw.description)
    };
    Potential::new(out, desc)
}

/// Endpoint conditions in centre/radius form:
/// F1 = ∫_0^π V'(c + h cos θ) dθ = 0, F2 = ∫_0^π (c + h cos θ) V'(c + h cos θ) dθ − 2π = 0.
fn endpoint_conditions(v: &Potential, c: f64, h: f64) -> [f64; 2] {
    let rule = gauss_legendre(96);
    let (mut f1, mut f2) = (0.0, 0.0);
    for (th, w) in rule.mapped(0.0, PI) {
        let l = c + h * th.cos();
        let d = v.eval_deriv(l);
        f1 += w * d;
        f2 += w * l * d;
    }
    [f1, f2 - 2.0 * PI]
}

/// Damped Newton solve of the one-cut endpoint conditions from seeds (a, b).
pub fn solve_support(v_raw: &Potential, a: f64, b: f64) -> Result<(f64, f64)> {
    if !(a < b) {
        return domain(format!("support seeds must satisfy a < b, got [{a}, {b}]"));
    }
    let mut c = 0.5 * (a + b);
    let mut h = 0.5 * (b - a);
    let norm = |f: [f64; 2]| f[0].hypot(f[1]);
    let mut f = endpoint_conditions(v_raw, c, h);
    for _ in 0..200 {
        if norm(f) < 1e-13 {
            return Ok((c - h, c + h));
        }
        let eps = 1e-7 * h.max(1e-3);
        let fc = endpoint_conditions(v_raw, c + eps, h);
        let fh = endpoint_conditions(v_raw, c, h + eps);
        let j = [
            [(fc[0] - f[0]) / eps, (fh[0] - f[0]) / eps],
            [(fc[1] - f[1]) / eps, (fh[1] - f[1]) / eps],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dc = (f[0] * j[1][1] - f[1] * j[0][1]) / det;
        let dh = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
        let mut step = 1.0;
        loop {
            let (nc, nh) = (c - step * dc, h - step * dh);
            if nh > 0.0 {
                let nf = endpoint_conditions(v_raw, nc, nh);
                if norm(nf) < norm(f) || step < 1e-6 {
                    c = nc;
                    h = nh;
                    f = nf;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-12 {
                return Err(Error::NoConvergence("support endpoint line search".into()));
            }
        }
    }
    if norm(f) < 1e-10 {
        return Ok((c - h, c + h));
    }
    Err(Error::NoConvergence(format!(
        "support endpoints for '{}' (residual {:.3e})",
        v_raw.description,
        norm(f)
    )))
}

/// Solve for the support from seeds and rescale it to [-1, 1].
pub fn normalize_support_solved(v_raw: &Potential, seed_a: f64, seed_b: f64) -> Result<Potential> {
    let (a, b) = solve_support(v_raw, seed_a, seed_b)?;
    normalize_support(v_raw, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_identity() {
        let n = ChebSeries::new(vec![0.3, -0.2, 1.5, 0.7, -0.4, 0.1]);
        let (q, e) = divide_one_minus_x2(&n);
        for x in [-0.8, -0.1, 0.4, 0.95] {
            let lhs = n.eval(x);
            let rhs = (1.0 - x * x) * q.eval(x) + e[0] + e[1] * x;
            assert!((lhs - rhs).abs() < 1e-13, "{lhs} {rhs}");
        }
    }

    #[test]
    fn gue_is_flat() {
        let grid: Vec<f64> = (0..100).map(|i| -0.99 + 1.98 * i as f64 / 99.0).collect();
        let d = density_from_potential(&Potential::gue(), &grid).unwrap();
        for v in &d.values {
            assert!((v - 2.0 / PI).abs() < 1e-10);
        }
        assert!((d.series.coeff(0) - 2.0 / PI).abs() < 1e-12);
        assert!(d.edge_defect[0].abs() < 1e-12);
        let ell = lagrange_constant(&Potential::gue()).unwrap();
        assert!((ell - (-1.0 - 2.0 * LN_2)).abs() < 1e-12);
    }

    #[test]
    fn homotopy_fixes_gue() {
        assert!(Potential::gue().homotopy(0.37).is_gue());
        let v = Potential::new(vec![0.0, 0.1, 1.0, 0.0, 0.5], "q").unwrap();
        assert_eq!(v.homotopy(1.0).monomial, v.monomial);
        assert!(v.homotopy(0.0).is_gue());
    }

    #[test]
    fn rejects_non_confining() {
        assert!(Potential::new(vec![0.0, 0.0, -1.0], "x").is_err());
        assert!(Potential::new(vec![0.0, 1.0, 0.0, 1.0], "x").is_err());
    }
}
