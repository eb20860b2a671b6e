use rug::Float;

use super::measure::{build_nodes, DiscreteMeasure, NodeSet};
use super::symbol::FHSymbol;
use super::{HankelResult, Method, MAX_PRECISION};
use crate::equilibrium::Potential;
use crate::error::{domain, Error, Result};

const MIN_BITS_LEFT: f64 = 10.0;

/// log D_k of the discrete measure by symmetric Gaussian elimination of the
/// (k+1)×(k+1) moment matrix. Returns the pivots D_j/D_{j-1} as log χ_j
/// values and the estimated number of significant bits left.
fn eliminate(measure: &DiscreteMeasure, k: usize) -> Result<(Vec<f64>, f64)> {
    let prec = measure.prec;
    let mom = measure.moments(2 * k);
    let n = k + 1;
    let mut a: Vec<Vec<Float>> = (0..n)
        .map(|i| (0..n).map(|j| mom[i + j].clone()).collect())
        .collect();
    let diag_max = (0..n)
        .map(|i| a[i][i].to_f64_round(rug::float::Round::Nearest).abs().log2())
        .fold(f64::NEG_INFINITY, f64::max);
    let mut log_chi = Vec::with_capacity(n);
    let mut min_pivot_log2 = f64::INFINITY;
    for p in 0..n {
        let piv = a[p][p].clone();
        if !piv.is_sign_positive() || piv.is_zero() || !piv.is_finite() {
            return Err(Error::PrecisionExhausted {
                precision_bits: prec,
                cap_bits: MAX_PRECISION,
                bits_left: 0.0,
            });
        }
        let l2 = piv.clone().log2().to_f64();
        min_pivot_log2 = min_pivot_log2.min(l2);
        log_chi.push(-0.5 * piv.clone().ln().to_f64());
        for i in p + 1..n {
            let factor = Float::with_val(prec, &a[i][p] / &piv);
            for j in p + 1..n {
                let t = Float::with_val(prec, &factor * &a[p][j]);
                a[i][j] -= t;
            }
        }
    }
    let bits_lost = (diag_max - min_pivot_log2).max(0.0) + (n as f64).log2();
    Ok((log_chi, prec as f64 - bits_lost))
}

/// Direct determinant on a fixed node set; escalates precision when fewer
/// than ten significant bits would remain.
pub fn logdet_direct_on(
    set: &NodeSet,
    f: &FHSymbol,
    v: &Potential,
    n: usize,
    k: usize,
    prec: u32,
) -> Result<HankelResult> {
    let mut bits = prec;
    loop {
        let measure = DiscreteMeasure::symbol(set, f, v, n, bits);
        let attempt = eliminate(&measure, k);
        let (log_chi, left) = match attempt {
            Ok(r) => r,
            Err(_) => (vec![], 0.0),
        };
        if left >= MIN_BITS_LEFT && !log_chi.is_empty() {
            let log_det = -2.0 * log_chi.iter().sum::<f64>();
            return Ok(HankelResult {
                method: Method::Direct,
                n,
                k,
                log_det,
                chi: log_chi.iter().map(|l| l.exp()).collect(),
                log_chi,
                recurrence: vec![],
                precision_bits: bits,
                symbol: f.clone(),
            });
        }
        if bits >= MAX_PRECISION {
            return Err(Error::PrecisionExhausted {
                precision_bits: bits,
                cap_bits: MAX_PRECISION,
                bits_left: left,
            });
        }
        bits = (bits * 2).min(MAX_PRECISION);
    }
}

/// log D_k(f; V) with weight e^{−N V}.
pub fn hankel_logdet_direct(
    f: &FHSymbol,
    v: &Potential,
    n: usize,
    k: usize,
    prec: u32,
) -> Result<HankelResult> {
    if prec < 53 {
        return domain(format!("precision {prec} below 53 bits"));
    }
    let set = build_nodes(&f.points(), v, n, k, prec)?;
    logdet_direct_on(&set, f, v, n, k, prec)
}
