//! Truncated log-correlated field G_M(x) = Σ_{j≤M} A_j T_j(x)/√j and its
//! chaos measure e^{βG_M − (β²/2)E G_M²} dx.

use std::f64::consts::SQRT_2;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chebyshev::cheb_eval;
use crate::error::{domain, Result};
use crate::quadrature::gauss_legendre;
use crate::rmt::{stream_rng, TestFunction};

pub const MASS_GRID: usize = 512;
const CHUNK: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GMCFieldSample {
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    #[serde(rename = "M")]
    pub m: usize,
    pub seed: Option<u64>,
}

impl GMCFieldSample {
    pub fn draw<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let a = (0..m).map(|_| rng.sample(StandardNormal)).collect();
        GMCFieldSample { a, m, seed: None }
    }

    pub fn zero(m: usize) -> Self {
        GMCFieldSample {
            a: vec![0.0; m],
            m,
            seed: None,
        }
    }
}

pub fn check_l2_phase(beta: f64) -> Result<()> {
    if !(beta.abs() < SQRT_2) {
        return domain(format!(
            "beta = {beta} is outside the L2 phase |beta| < sqrt(2); the second-moment construction does not apply"
        ));
    }
    Ok(())
}

pub fn field_eval(s: &GMCFieldSample, x: f64) -> f64 {
    // T_j by recurrence alongside the sum
    let (mut t0, mut t1) = (1.0, x);
    let mut acc = 0.0;
    for (j, a) in s.a.iter().enumerate() {
        let j = j + 1;
        let tj = if j == 1 {
            x
        } else {
            let t2 = 2.0 * x * t1 - t0;
            t0 = t1;
            t1 = t2;
            t2
        };
        acc += a * tj / (j as f64).sqrt();
    }
    acc
}

/// E G_M(x)² = Σ_{j≤M} T_j(x)²/j.
pub fn variance_profile(x: f64, m: usize) -> f64 {
    (1..=m).map(|j| cheb_eval(j, x).powi(2) / j as f64).sum()
}

/// E G_M(x)G_M(y) = Σ_{j≤M} T_j(x)T_j(y)/j.
pub fn covariance(x: f64, y: f64, m: usize) -> f64 {
    (1..=m).map(|j| cheb_eval(j, x) * cheb_eval(j, y) / j as f64).sum()
}

/// exp(β² E G_M(x)G_M(y)), the two-point function of the chaos measure.
pub fn chaos_kernel(x: f64, y: f64, beta: f64, m: usize) -> Result<f64> {
    check_l2_phase(beta)?;
    Ok((beta * beta * covariance(x, y, m)).exp())
}

/// Precomputed quadrature data for repeated mass evaluations.
pub struct MassEvaluator {
    m: usize,
    weights: Vec<f64>,
    /// basis[i][j] = T_{j+1}(x_i)/√(j+1)
    basis: Vec<Vec<f64>>,
    variance: Vec<f64>,
    nodes: Vec<f64>,
}

impl MassEvaluator {
    pub fn new(phi: &dyn TestFunction, m: usize) -> Self {
        let (a, b) = phi.support();
        let rule = gauss_legendre(MASS_GRID);
        let mut weights = Vec::with_capacity(MASS_GRID);
        let mut basis = Vec::with_capacity(MASS_GRID);
        let mut variance = Vec::with_capacity(MASS_GRID);
        let mut nodes = Vec::with_capacity(MASS_GRID);
        for (x, w) in rule.mapped(a, b) {
            weights.push(w * phi.eval(x));
            let row: Vec<f64> = (1..=m).map(|j| cheb_eval(j, x) / (j as f64).sqrt()).collect();
            variance.push(row.iter().map(|v| v * v).sum());
            basis.push(row);
            nodes.push(x);
        }
        MassEvaluator {
            m,
            weights,
            basis,
            variance,
            nodes,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn mass(&self, s: &GMCFieldSample, beta: f64) -> Result<f64> {
        check_l2_phase(beta)?;
        if s.a.len() != self.m {
            return domain(format!("sample order {} differs from evaluator order {}", s.a.len(), self.m));
        }
        let mut acc = 0.0;
        for i in 0..self.weights.len() {
            let g: f64 = self.basis[i].iter().zip(&s.a).map(|(t, a)| t * a).sum();
            acc += self.weights[i] * (beta * g - 0.5 * beta * beta * self.variance[i]).exp();
        }
        Ok(acc)
    }
}

/// μ_β^{(M)}(φ) = ∫φ(x) e^{βG_M(x) − (β²/2)E G_M(x)²} dx.
pub fn gmc_mass(s: &GMCFieldSample, phi: &dyn TestFunction, beta: f64) -> Result<f64> {
    MassEvaluator::new(phi, s.m).mass(s, beta)
}

/// E[μ_β^{(M)}(φ)²] = ∬ φ(x)φ(y) exp(β² Σ_{j≤M} T_j(x)T_j(y)/j) dx dy by a
/// tensor Gauss–Legendre rule.
pub fn second_moment_exact(m: usize, beta: f64, phi: &dyn TestFunction) -> Result<f64> {
    check_l2_phase(beta)?;
    let (a, b) = phi.support();
    let rule = gauss_legendre(256);
    let pts: Vec<(f64, f64, Vec<f64>)> = rule
        .mapped(a, b)
        .map(|(x, w)| {
            let t: Vec<f64> = (1..=m).map(|j| cheb_eval(j, x) / (j as f64).sqrt()).collect();
            (x, w * phi.eval(x), t)
        })
        .collect();
    let b2 = beta * beta;
    Ok(pts
        .par_iter()
        .map(|(_, wx, tx)| {
            pts.iter()
                .map(|(_, wy, ty)| {
                    let c: f64 = tx.iter().zip(ty).map(|(p, q)| p * q).sum();
                    wx * wy * (b2 * c).exp()
                })
                .sum::<f64>()
        })
        .sum())
}

/// ∬ φ(x)φ(y)(2|x − y|)^{−β²/2} dx dy. The diagonal singularity is removed
/// by s = (y − x)^{1−γ}, γ = β²/2, which makes the inner integrand bounded.
pub fn limit_second_moment(beta: f64, phi: &dyn TestFunction) -> Result<f64> {
    check_l2_phase(beta)?;
    let gamma = 0.5 * beta * beta;
    let (a, b) = phi.support();
    let p = 1.0 / (1.0 - gamma);
    let rule = gauss_legendre(256);
    let outer: Vec<(f64, f64)> = rule.mapped(a, b).collect();
    let inner_rule = gauss_legendre(256);
    let total: f64 = outer
        .par_iter()
        .map(|&(x, wx)| {
            let top = (b - x).powf(1.0 - gamma);
            let inner: f64 = inner_rule
                .mapped(0.0, top)
                .map(|(s, ws)| ws * phi.eval(x + s.powf(p)))
                .sum();
            wx * phi.eval(x) * inner
        })
        .sum();
    Ok(2.0 * total * 2f64.powf(-gamma) / (1.0 - gamma))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondMomentEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    pub mean: f64,
    pub mean_standard_error: f64,
    pub exact_formula_value: f64,
    pub masses: Vec<f64>,
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, (var / n).sqrt())
}

/// Masses of `n_samples` independent fields; sample i belongs to chunk
/// i / 1000, which draws from its own stream of the master seed.
pub fn sample_masses(m: usize, beta: f64, phi: &dyn TestFunction, n_samples: usize, seed: u64) -> Result<Vec<f64>> {
    check_l2_phase(beta)?;
    let ev = MassEvaluator::new(phi, m);
    let chunks = n_samples.div_ceil(CHUNK);
    let per: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let count = CHUNK.min(n_samples - c * CHUNK);
            (0..count)
                .map(|_| ev.mass(&GMCFieldSample::draw(m, &mut rng), beta))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per.into_iter().flatten().collect())
}

/// Monte Carlo E[μ_β^{(M)}(φ)²] with its standard error and the exact value.
pub fn second_moment_mc(
    m: usize,
    beta: f64,
    phi: &dyn TestFunction,
    n_samples: usize,
    seed: u64,
) -> Result<SecondMomentEstimate> {
    if n_samples < 2 {
        return domain("second_moment_mc needs at least two samples");
    }
    let masses = sample_masses(m, beta, phi, n_samples, seed)?;
    let sq: Vec<f64> = masses.iter().map(|v| v * v).collect();
    let (est, se) = mean_se(&sq);
    let (mean, mse) = mean_se(&masses);
    Ok(SecondMomentEstimate {
        estimate: est,
        standard_error: se,
        mean,
        mean_standard_error: mse,
        exact_formula_value: second_moment_exact(m, beta, phi)?,
        masses,
    })
}

/// Monte Carlo mean and SE of e^{βG_M(x) − (β²/2)E G_M(x)²} at each point.
pub fn pointwise_mean_one_mc(m: usize, beta: f64, xs: &[f64], n_samples: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    check_l2_phase(beta)?;
    let chunks = n_samples.div_ceil(CHUNK);
    let var: Vec<f64> = xs.iter().map(|&x| variance_profile(x, m)).collect();
    let per: Vec<Vec<Vec<f64>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let count = CHUNK.min(n_samples - c * CHUNK);
            (0..count)
                .map(|_| {
                    let s = GMCFieldSample::draw(m, &mut rng);
                    xs.iter()
                        .zip(&var)
                        .map(|(&x, v)| (beta * field_eval(&s, x) - 0.5 * beta * beta * v).exp())
                        .collect()
                })
                .collect()
        })
        .collect();
    let rows: Vec<Vec<f64>> = per.into_iter().flatten().collect();
    Ok((0..xs.len())
        .map(|i| {
            let col: Vec<f64> = rows.iter().map(|r| r[i]).collect();
            mean_se(&col)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmt::Bump;

    #[test]
    fn field_examples() {
        assert_eq!(field_eval(&GMCFieldSample::zero(5), 0.3), 0.0);
        let s = GMCFieldSample { a: vec![1.7], m: 1, seed: None };
        assert!((field_eval(&s, 0.4) - 1.7 * 0.4).abs() < 1e-15);
        assert!((variance_profile(0.0, 3) - 0.5).abs() < 1e-15);
        assert_eq!(variance_profile(0.3, 0), 0.0);
        let h10: f64 = (1..=10).map(|j| 1.0 / j as f64).sum();
        assert!((variance_profile(1.0, 10) - h10).abs() < 1e-14);
    }

    #[test]
    fn beta_zero_mass() {
        let phi = Bump::new(-0.5, 0.5).unwrap();
        let s = GMCFieldSample { a: vec![0.3, -1.0, 2.0], m: 3, seed: None };
        assert!((gmc_mass(&s, &phi, 0.0).unwrap() - phi.integral()).abs() < 1e-15);
        assert!(gmc_mass(&s, &phi, 1.5).is_err());
    }
}
