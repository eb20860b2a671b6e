//! Closed-form large-N predictions for log E ∏|λ_j − x|^β e^{𝒯(λ_j)} and the
//! chaos second-moment kernels.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::chebyshev::{cheb_all, pv_hilbert_weighted, ChebSeries, Weight};
use crate::equilibrium::{EquilibriumData, Potential};
use crate::error::{domain, Result};
use crate::hankel::{expectation_ratio_with, ExpectationOptions, FHSymbol};
use crate::quadrature::gauss_legendre;
use crate::specialfn::fh_constant;

pub const TERM_NAMES: [&str; 8] = [
    "fh_constants",
    "density_powers",
    "N_powers",
    "exponential_VN",
    "cross_terms",
    "linear_T_N",
    "linear_T_beta",
    "quadratic_T",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentPrediction {
    pub log_value: f64,
    pub term_breakdown: BTreeMap<String, f64>,
    #[serde(rename = "N")]
    pub n: usize,
    pub points: Vec<(f64, f64)>,
    pub smooth_part: ChebSeries,
    pub potential: String,
}

impl MomentPrediction {
    fn from_terms(terms: [f64; 8], n: usize, points: &[(f64, f64)], smooth: &ChebSeries, v: &str) -> Self {
        let term_breakdown: BTreeMap<String, f64> = TERM_NAMES
            .iter()
            .zip(terms)
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        MomentPrediction {
            log_value: terms.iter().sum(),
            term_breakdown,
            n,
            points: points.to_vec(),
            smooth_part: smooth.clone(),
            potential: v.to_string(),
        }
    }

    pub fn term(&self, name: &str) -> f64 {
        self.term_breakdown.get(name).copied().unwrap_or(0.0)
    }
}

fn validate_points(points: &[(f64, f64)]) -> Result<()> {
    // Same rules as a symbol: locations distinct in (-1,1), exponents ≥ 0.
    FHSymbol::from_points(points).map(|_| ())
}

fn cross_terms(points: &[(f64, f64)]) -> f64 {
    let mut s = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let (xi, bi) = points[i];
            let (xj, bj) = points[j];
            s -= 0.5 * bi * bj * (2.0 * (xi - xj)).abs().ln();
        }
    }
    s
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return domain("matrix size N must be >= 1");
    }
    Ok(())
}

/// GUE asymptotics with the breakdown of its four single-point terms and
/// the pairwise cross term.
pub fn krasovsky_prediction(points: &[(f64, f64)], n: usize) -> Result<MomentPrediction> {
    validate_points(points)?;
    check_n(n)?;
    let nf = n as f64;
    let mut t = [0.0; 8];
    for &(x, b) in points {
        t[0] += fh_constant(b)?.log_value;
        t[1] += b * b / 8.0 * (1.0 - x * x).ln();
        t[2] += b * b / 4.0 * (nf / 2.0).ln();
        t[3] += b / 2.0 * nf * (2.0 * x * x - 1.0 - 2.0 * LN_2);
    }
    t[4] = cross_terms(points);
    Ok(MomentPrediction::from_terms(t, n, points, &ChebSeries::zero(), "gue"))
}

pub fn krasovsky_log_moment(points: &[(f64, f64)], n: usize) -> Result<f64> {
    Ok(krasovsky_prediction(points, n)?.log_value)
}

fn onecut_terms(v: &Potential, eq: &EquilibriumData, points: &[(f64, f64)], n: usize) -> Result<[f64; 8]> {
    validate_points(points)?;
    check_n(n)?;
    let nf = n as f64;
    let mut t = [0.0; 8];
    for &(x, b) in points {
        let d = eq.density(x);
        if !(d > 0.0) {
            return domain(format!("equilibrium density is not positive at {x}"));
        }
        t[0] += fh_constant(b)?.log_value;
        t[1] += b * b / 4.0 * (d * PI / 2.0 * (1.0 - x * x).sqrt()).ln();
        t[2] += b * b / 4.0 * (nf / 2.0).ln();
        t[3] += b / 2.0 * nf * (v.eval(x) + eq.ell);
    }
    t[4] = cross_terms(points);
    Ok(t)
}

pub fn onecut_prediction(
    v: &Potential,
    eq: &EquilibriumData,
    points: &[(f64, f64)],
    n: usize,
) -> Result<MomentPrediction> {
    let t = onecut_terms(v, eq, points, n)?;
    Ok(MomentPrediction::from_terms(t, n, points, &ChebSeries::zero(), &v.description))
}

pub fn onecut_log_moment(v: &Potential, eq: &EquilibriumData, points: &[(f64, f64)], n: usize) -> Result<f64> {
    Ok(onecut_prediction(v, eq, points, n)?.log_value)
}

/// Q(𝒯) = (1/8) Σ_k k α_k².
pub fn quadratic_functional(t: &ChebSeries) -> f64 {
    t.coeffs
        .iter()
        .enumerate()
        .map(|(k, a)| k as f64 * a * a)
        .sum::<f64>()
        / 8.0
}

/// Q(𝒯) by nested quadrature: (1/4π) ∫_0^π 𝒯(cos θ) H(cos θ) dθ with
/// H(y) = (1/π) P.V.∫ 𝒯'(x)√(1-x²)/(y − x) dx.
pub fn quadratic_functional_quadrature(t: &ChebSeries) -> Result<f64> {
    if t.is_zero() {
        return Ok(0.0);
    }
    let d = t.derivative();
    let rule = gauss_legendre(2 * t.order() + 16);
    let mut acc = 0.0;
    for (th, w) in rule.mapped(0.0, PI) {
        let y = th.cos();
        let h = pv_hilbert_weighted(|x| d.eval(x), y, Weight::Sqrt)?;
        acc += w * t.eval(y) * h;
    }
    Ok(acc / (4.0 * PI))
}

/// (leading, subleading): leading = ∫𝒯 dμ_V, subleading =
/// Σ_j (β_j/2)[(1/π)∫𝒯/√(1-x²) dx − 𝒯(x_j)].
pub fn linear_functionals(t: &ChebSeries, eq: &EquilibriumData, points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if t.is_zero() {
        return Ok((0.0, 0.0));
    }
    let leading = eq.integrate(|x| t.eval(x), 1e-14)?;
    let mean = t.arcsine_mean();
    let sub = points.iter().map(|&(x, b)| b / 2.0 * (mean - t.eval(x))).sum();
    Ok((leading, sub))
}

/// Full prediction: one-cut part + N·leading + subleading + Q(𝒯).
pub fn fh_log_moment(
    v: &Potential,
    eq: &EquilibriumData,
    points: &[(f64, f64)],
    t: &ChebSeries,
    n: usize,
) -> Result<MomentPrediction> {
    let mut terms = onecut_terms(v, eq, points, n)?;
    let (lead, sub) = linear_functionals(t, eq, points)?;
    terms[5] = n as f64 * lead;
    terms[6] = sub;
    terms[7] = quadratic_functional(t);
    Ok(MomentPrediction::from_terms(terms, n, points, t, &v.description))
}

fn check_beta(beta: f64) -> Result<()> {
    if !(0.0..SQRT_2).contains(&beta) {
        return domain(format!("beta = {beta} outside the L2 phase [0, sqrt(2))"));
    }
    Ok(())
}

/// exp(β² Σ_{k≤M} T_k(x)T_k(y)/k) for Some(M); (2|x − y|)^{−β²/2} for None.
pub fn second_moment_kernel(x: f64, y: f64, beta: f64, m: Option<usize>) -> Result<f64> {
    check_beta(beta)?;
    match m {
        None => {
            if x == y {
                return domain("limit kernel is singular on the diagonal x = y");
            }
            Ok((2.0 * (x - y).abs()).powf(-beta * beta / 2.0))
        }
        Some(m) => {
            let (tx, ty) = (cheb_all(m, x), cheb_all(m, y));
            let s: f64 = (1..=m).map(|k| tx[k] * ty[k] / k as f64).sum();
            Ok((beta * beta * s).exp())
        }
    }
}

/// One row of an exact-versus-predicted comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub log_exact: f64,
    pub log_predicted: f64,
    pub diff: f64,
    pub config_id: String,
}

/// Exact log E ∏ f(λ_j) from Hankel determinants against the full
/// prediction, for each N.
pub fn compare_with_exact(
    v: &Potential,
    eq: &EquilibriumData,
    points: &[(f64, f64)],
    t: &ChebSeries,
    ns: &[usize],
    opts: &ExpectationOptions,
    config_id: &str,
) -> Result<Vec<ComparisonRow>> {
    let symbol = FHSymbol::from_points(points)?.with_smooth(t.clone(), 1.0)?;
    ns.iter()
        .map(|&n| {
            let exact = expectation_ratio_with(&symbol, v, n, opts)?;
            let pred = fh_log_moment(v, eq, points, t, n)?.log_value;
            Ok(ComparisonRow {
                n,
                log_exact: exact,
                log_predicted: pred,
                diff: (exact - pred).abs(),
                config_id: config_id.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_single() {
        assert_eq!(krasovsky_log_moment(&[], 16).unwrap(), 0.0);
        // β = 2: log C(2) + (4/4) log 8 + 16(−1 − 2 log 2)
        let v = krasovsky_log_moment(&[(0.0, 2.0)], 16).unwrap();
        let want = 4f64.ln() + 8f64.ln() + 16.0 * (-1.0 - 2.0 * LN_2);
        assert!((v - want).abs() < 1e-12);
        assert!(krasovsky_log_moment(&[(0.1, 1.0), (0.1, 1.0)], 8).is_err());
    }

    #[test]
    fn quadratic_closed_form() {
        assert_eq!(quadratic_functional(&ChebSeries::zero()), 0.0);
        assert!((quadratic_functional(&ChebSeries::single(1, 0.7)) - 0.49 / 8.0).abs() < 1e-15);
        assert!((quadratic_functional(&ChebSeries::single(2, 2.0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kernels() {
        for b in [0.0, 0.5, 1.3] {
            assert!((second_moment_kernel(0.25, -0.25, b, None).unwrap() - 1.0).abs() < 1e-15);
        }
        let k = second_moment_kernel(0.0, 0.0, 1.0, Some(3)).unwrap();
        assert!((k - 0.5f64.exp()).abs() < 1e-14);
        assert!(second_moment_kernel(0.1, 0.1, 1.0, None).is_err());
        assert!(second_moment_kernel(0.1, 0.2, 1.5, None).is_err());
    }
}
