//! log Γ, log Barnes G and the Fisher–Hartwig constant
//! C(β) = 2^{β²/2} G(1+β/2)² / G(1+β).

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// ζ'(-1).
const ZETA_PRIME_M1: f64 = -0.165_421_143_700_450_93;
const SEED: f64 = 20.0;

/// log Γ(z) for z > 0 via Stirling's series at z ≥ 20 and upward shifts.
pub fn log_gamma(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return domain(format!("log_gamma requires finite z > 0, got {z}"));
    }
    let mut shift = 0.0;
    let mut w = z;
    while w < SEED {
        shift += w.ln();
        w += 1.0;
    }
    let w2 = w * w;
    let series = 1.0 / (12.0 * w)
        * (1.0 - 1.0 / (30.0 * w2) * (1.0 - 2.0 / (7.0 * w2) * (1.0 - 3.0 / (4.0 * w2))));
    Ok((w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series - shift)
}

/// log G(w + 1) from its large-w asymptotic expansion.
fn barnes_asymptotic(w: f64) -> f64 {
    let lw = w.ln();
    let iw2 = 1.0 / (w * w);
    // Σ B_{2k+2} / (4k(k+1) w^{2k})
    let tail = iw2
        * (-1.0 / 240.0
            + iw2
                * (1.0 / 1008.0
                    + iw2 * (-1.0 / 1440.0 + iw2 * (1.0 / 1056.0 - iw2 * 691.0 / 327_600.0))));
    0.5 * w * w * lw - 0.75 * w * w + 0.5 * w * (2.0 * PI).ln() - lw / 12.0 + ZETA_PRIME_M1 + tail
}

/// ζ(k) for integer k ≥ 2 from the alternating η series with Borwein's
/// acceleration.
fn zeta_int(k: u32) -> f64 {
    const TERMS: usize = 40;
    // d_j = n Σ_{i≤j} (n+i−1)! 4^i / ((n−i)! (2i)!)
    let n = TERMS as f64;
    let mut d = Vec::with_capacity(TERMS + 1);
    let mut term = 1.0 / n;
    let mut acc = 0.0;
    for i in 0..=TERMS {
        if i > 0 {
            let fi = i as f64;
            term *= 4.0 * (n + fi - 1.0) * (n - fi + 1.0) / ((2.0 * fi - 1.0) * (2.0 * fi));
        }
        acc += term;
        d.push(n * acc);
    }
    let dn = d[TERMS];
    let eta: f64 = -(0..TERMS)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * (d[j] - dn) / ((j + 1) as f64).powi(k as i32)
        })
        .sum::<f64>()
        / dn;
    eta / (1.0 - 2f64.powi(1 - k as i32))
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// log G(1 + x) for |x| ≤ 1/2 from its Maclaurin series.
fn barnes_taylor(x: f64) -> f64 {
    let mut sum = 0.5 * x * (2.0 * PI).ln() - 0.5 * (x + (1.0 + EULER_GAMMA) * x * x);
    let mut xk = x * x;
    for k in 3..80u32 {
        xk *= x;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let t = sign * zeta_int(k - 1) * xk / k as f64;
        sum += t;
        if t.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// log G(z) for z > 0.
pub fn barnes_g_log(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return domain(format!("barnes_g_log requires finite z > 0, got {z}"));
    }
    if z >= SEED + 1.0 {
        return Ok(barnes_asymptotic(z - 1.0));
    }
    // G(w + 1) = Γ(w) G(w) moves z into [1/2, 3/2]
    let mut w = z;
    let mut shift = 0.0;
    while w > 1.5 {
        w -= 1.0;
        shift += log_gamma(w)?;
    }
    if w < 0.5 {
        shift -= log_gamma(w)?;
        w += 1.0;
    }
    Ok(barnes_taylor(w - 1.0) + shift)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FHConstant {
    pub beta: f64,
    pub value: f64,
    pub log_value: f64,
}

pub fn fh_constant(beta: f64) -> Result<FHConstant> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return domain(format!("fh_constant requires beta >= 0, got {beta}"));
    }
    let log_value = 0.5 * beta * beta * LN_2 + 2.0 * barnes_g_log(1.0 + 0.5 * beta)?
        - barnes_g_log(1.0 + beta)?;
    Ok(FHConstant {
        beta,
        value: log_value.exp(),
        log_value,
    })
}
