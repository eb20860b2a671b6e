use rayon::prelude::*;
use rug::Float;

use super::measure::{build_nodes, DiscreteMeasure, NodeSet};
use super::symbol::FHSymbol;
use super::{HankelResult, Method};
use crate::equilibrium::Potential;
use crate::error::{domain, Error, Result};

pub const ORTHO_TOL: f64 = 1e-8;

/// Orthonormal polynomials p_0..p_k of a discrete measure, tabulated at its
/// nodes, with their recurrence coefficients in working precision.
#[derive(Debug, Clone)]
pub struct OrthoSystem {
    pub measure: DiscreteMeasure,
    /// values[j][i] = p_j(x_i)
    pub values: Vec<Vec<Float>>,
    /// a_0..a_k
    pub a: Vec<Float>,
    /// b_0 = 0, b_1..b_k
    pub b: Vec<Float>,
    pub log_chi: Vec<f64>,
    /// log χ_j in working precision
    pub log_chi_mp: Vec<Float>,
    pub max_gram_offdiag: f64,
}

fn weighted_sum(w: &[Float], prec: u32, term: impl Fn(usize) -> Float + Sync) -> Float {
    let parts: Vec<Float> = (0..w.len())
        .into_par_iter()
        .map(|i| term(i) * &w[i])
        .collect();
    Float::with_val(prec, Float::sum(parts.iter()))
}

/// Stieltjes procedure on the measure.
pub fn stieltjes(measure: DiscreteMeasure, k: usize) -> Result<OrthoSystem> {
    let prec = measure.prec;
    let w = &measure.weights;
    let x = &measure.nodes;
    let m = x.len();
    let mu0 = Float::with_val(prec, Float::sum(w.iter()));
    if !mu0.is_sign_positive() || mu0.is_zero() {
        return domain("measure has no mass");
    }
    let chi0 = Float::with_val(prec, mu0.recip_ref()).sqrt();
    let mut log_chi_mp = vec![chi0.clone().ln()];
    let mut values: Vec<Vec<Float>> = vec![vec![chi0; m]];
    let mut a = Vec::with_capacity(k + 1);
    let mut b = vec![Float::with_val(prec, 0)];
    for j in 0..=k {
        let pj = &values[j];
        let aj = weighted_sum(w, prec, |i| Float::with_val(prec, &pj[i] * &pj[i]) * x[i]);
        if j == k {
            a.push(aj);
            break;
        }
        let prev = if j > 0 { Some(&values[j - 1]) } else { None };
        let bj = &b[j];
        let q: Vec<Float> = (0..m)
            .into_par_iter()
            .map(|i| {
                let mut t = Float::with_val(prec, x[i]);
                t -= &aj;
                t *= &pj[i];
                if let Some(p) = prev {
                    t -= Float::with_val(prec, bj * &p[i]);
                }
                t
            })
            .collect();
        let norm2 = weighted_sum(w, prec, |i| Float::with_val(prec, &q[i] * &q[i]));
        if !norm2.is_sign_positive() || norm2.is_zero() {
            return Err(Error::Orthogonality {
                offdiag: f64::INFINITY,
                tol: ORTHO_TOL,
            });
        }
        let bnext = norm2.sqrt();
        let next: Vec<Float> = q.into_par_iter().map(|t| t / &bnext).collect();
        let next_log = Float::with_val(prec, &log_chi_mp[j] - bnext.clone().ln());
        log_chi_mp.push(next_log);
        a.push(aj);
        b.push(bnext);
        values.push(next);
    }
    let max_gram_offdiag = gram_defect(&measure, &values);
    let log_chi = log_chi_mp.iter().map(|l| l.to_f64()).collect();
    Ok(OrthoSystem {
        measure,
        values,
        a,
        b,
        log_chi,
        log_chi_mp,
        max_gram_offdiag,
    })
}

/// max_{i,j} |⟨p_i, p_j⟩ − δ_ij| evaluated in double precision.
fn gram_defect(measure: &DiscreteMeasure, values: &[Vec<Float>]) -> f64 {
    let sw: Vec<Float> = measure
        .weights
        .iter()
        .map(|w| Float::with_val(measure.prec, w.sqrt_ref()))
        .collect();
    let u: Vec<Vec<f64>> = values
        .par_iter()
        .map(|p| p.iter().zip(&sw).map(|(v, s)| Float::with_val(53, v * s).to_f64()).collect())
        .collect();
    let n = u.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut worst = 0.0f64;
            for j in 0..=i {
                let g: f64 = u[i].iter().zip(&u[j]).map(|(a, b)| a * b).sum();
                let d = if i == j { g - 1.0 } else { g };
                worst = worst.max(d.abs());
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

impl OrthoSystem {
    pub fn degree(&self) -> usize {
        self.values.len() - 1
    }

    pub fn check(&self) -> Result<()> {
        if self.max_gram_offdiag > ORTHO_TOL || !self.max_gram_offdiag.is_finite() {
            return Err(Error::Orthogonality {
                offdiag: self.max_gram_offdiag,
                tol: ORTHO_TOL,
            });
        }
        Ok(())
    }

    pub fn log_det(&self, k: usize) -> f64 {
        self.log_det_mp(k).to_f64()
    }

    pub fn log_det_mp(&self, k: usize) -> Float {
        let s = Float::with_val(self.measure.prec, Float::sum(self.log_chi_mp[..=k].iter()));
        s * -2i32
    }

    /// p_j'(x_i) at all nodes for j = 0..=deg.
    pub fn derivatives(&self, deg: usize) -> Vec<Vec<Float>> {
        let prec = self.measure.prec;
        let m = self.measure.nodes.len();
        let mut d: Vec<Vec<Float>> = vec![vec![Float::with_val(prec, 0); m]];
        for j in 0..deg {
            // b_{j+1} p'_{j+1} = (x − a_j) p'_j + p_j − b_j p'_{j−1}
            let x = &self.measure.nodes;
            let (aj, bj, bn) = (&self.a[j], &self.b[j], &self.b[j + 1]);
            let dj = &d[j];
            let dprev = if j > 0 { Some(&d[j - 1]) } else { None };
            let pj = &self.values[j];
            let next: Vec<Float> = (0..m)
                .into_par_iter()
                .map(|i| {
                    let mut t = Float::with_val(prec, x[i]);
                    t -= aj;
                    t *= &dj[i];
                    t += &pj[i];
                    if let Some(p) = dprev {
                        t -= Float::with_val(prec, bj * &p[i]);
                    }
                    t / bn
                })
                .collect();
            d.push(next);
        }
        d
    }

    pub fn to_result(&self, f: &FHSymbol, n: usize, k: usize) -> HankelResult {
        let log_chi: Vec<f64> = self.log_chi[..=k].to_vec();
        HankelResult {
            method: Method::Recurrence,
            n,
            k,
            log_det: self.log_det(k),
            chi: log_chi.iter().map(|l| l.exp()).collect(),
            log_chi,
            recurrence: (0..=k).map(|j| (self.a[j].to_f64(), self.b[j].to_f64())).collect(),
            precision_bits: self.measure.prec,
            symbol: f.clone(),
        }
    }
}

/// Stieltjes procedure on a fixed node set.
pub fn orthopoly_on(
    set: &NodeSet,
    f: &FHSymbol,
    v: &Potential,
    n: usize,
    k: usize,
    prec: u32,
) -> Result<OrthoSystem> {
    let sys = stieltjes(DiscreteMeasure::symbol(set, f, v, n, prec), k)?;
    sys.check()?;
    Ok(sys)
}

/// Orthonormal polynomials p_0..p_k against f e^{−NV} and log D_k by the
/// telescoping product of leading coefficients.
pub fn orthopoly_recurrence(
    f: &FHSymbol,
    v: &Potential,
    n: usize,
    k: usize,
    prec: u32,
) -> Result<HankelResult> {
    if prec < 53 {
        return domain(format!("precision {prec} below 53 bits"));
    }
    let set = build_nodes(&f.points(), v, n, k + 1, prec)?;
    Ok(orthopoly_on(&set, f, v, n, k, prec)?.to_result(f, n, k))
}

/// p_0(x)..p_{m}(x) and derivatives from recurrence coefficients, where
/// m = rec.len() − 1 requires b_{j+1} for j < m.
fn eval_family(rec: &[(f64, f64)], b_last: Option<f64>, chi0: f64, x: f64) -> (Vec<f64>, Vec<f64>) {
    let k = rec.len() - 1;
    let mut p = vec![chi0];
    let mut d = vec![0.0];
    let top = if b_last.is_some() { k + 1 } else { k };
    for j in 0..top {
        let (aj, bj) = rec[j];
        let bn = if j + 1 <= k { rec[j + 1].1 } else { b_last.unwrap() };
        let pm = if j > 0 { p[j - 1] } else { 0.0 };
        let dm = if j > 0 { d[j - 1] } else { 0.0 };
        p.push(((x - aj) * p[j] - bj * pm) / bn);
        d.push(((x - aj) * d[j] + p[j] - bj * dm) / bn);
    }
    (p, d)
}

/// Σ_{l≤j} p_l(x)² − (χ_j/χ_{j+1})[p'_{j+1}(x)p_j(x) − p'_j(x)p_{j+1}(x)], with
/// the polynomials from `rec.recurrence` and the leading-coefficient ratio
/// taken from an independently computed `log_chi`.
pub fn cd_residual_from(rec: &HankelResult, log_chi: &[f64], j: usize, x: f64) -> Result<f64> {
    if j < 1 || rec.recurrence.len() < j + 2 || log_chi.len() < j + 2 {
        return domain(format!("Christoffel–Darboux residual at order {j} needs data through {}", j + 1));
    }
    let (p, d) = eval_family(&rec.recurrence[..=j + 1], None, rec.log_chi[0].exp(), x);
    let lhs: f64 = p[..=j].iter().map(|v| v * v).sum();
    let ratio = (log_chi[j] - log_chi[j + 1]).exp();
    let rhs = ratio * (d[j + 1] * p[j] - d[j] * p[j + 1]);
    Ok(lhs - rhs)
}
