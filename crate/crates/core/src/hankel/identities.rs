//! Andréief ratios, Christoffel–Darboux and the two differential identities
//! for log D_{N−1}, checked against central finite differences.

use rug::Float;
use serde::{Deserialize, Serialize};

use super::direct::logdet_direct_on;
use super::measure::{build_nodes, confinement_mp, dt_symbol_mp, potential_mp, singular_mp, smooth_mp, DiscreteMeasure, NodeSet};
use super::recurrence::{cd_residual_from, orthopoly_on, stieltjes, OrthoSystem};
use super::symbol::FHSymbol;
use super::{Method, DEFAULT_PRECISION};
use crate::equilibrium::Potential;
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectationOptions {
    pub precision_bits: u32,
    pub method: Method,
}

impl Default for ExpectationOptions {
    fn default() -> Self {
        ExpectationOptions {
            precision_bits: DEFAULT_PRECISION,
            method: Method::Recurrence,
        }
    }
}

/// log E ∏_{j=1}^{N} f(λ_j) = log D_{N−1}(f) − log D_{N−1}(1), both on one node set.
pub fn expectation_ratio(f: &FHSymbol, v: &Potential, n: usize) -> Result<f64> {
    expectation_ratio_with(f, v, n, &ExpectationOptions::default())
}

pub fn expectation_ratio_with(
    f: &FHSymbol,
    v: &Potential,
    n: usize,
    opts: &ExpectationOptions,
) -> Result<f64> {
    if n == 0 {
        return domain("expectation_ratio needs N >= 1");
    }
    let k = n - 1;
    let prec = opts.precision_bits;
    let set = build_nodes(&f.points(), v, n, n, prec)?;
    let one = FHSymbol::trivial();
    let logdet = |g: &FHSymbol| -> Result<f64> {
        match opts.method {
            Method::Direct => Ok(logdet_direct_on(&set, g, v, n, k, prec)?.log_det),
            Method::Recurrence => Ok(orthopoly_on(&set, g, v, n, k, prec)?.log_det(k)),
        }
    };
    Ok(logdet(f)? - logdet(&one)?)
}

/// Christoffel–Darboux residual at order j, with the polynomials from the
/// Stieltjes recurrence and χ_j/χ_{j+1} from the direct determinant pivots.
pub fn christoffel_darboux_residual(
    f: &FHSymbol,
    v: &Potential,
    n: usize,
    j: usize,
    x: f64,
    prec: u32,
) -> Result<f64> {
    if j < 1 {
        return domain("Christoffel–Darboux residual needs j >= 1");
    }
    let set = build_nodes(&f.points(), v, n, j + 2, prec)?;
    let rec = orthopoly_on(&set, f, v, n, j + 1, prec)?.to_result(f, n, j + 1);
    let direct = logdet_direct_on(&set, f, v, n, j + 1, prec)?;
    cd_residual_from(&rec, &direct.log_chi, j, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiResidual {
    pub h: f64,
    pub finite_difference: f64,
    pub identity: f64,
    /// |finite difference − identity| at step h
    pub residual: f64,
    /// the same at step h/2; ≈ residual/4 under O(h²) behaviour
    pub residual_half: f64,
}

impl DiResidual {
    pub fn step_ratio(&self) -> f64 {
        self.residual / self.residual_half
    }
}

/// Σ_i u_i · b_N (p_N' p_{N−1} − p_N p_{N−1}')(x_i), with u the weights of a
/// second measure on the same nodes.
fn kernel_integral(sys: &OrthoSystem, n: usize, other: &DiscreteMeasure) -> f64 {
    let prec = sys.measure.prec;
    let d = sys.derivatives(n);
    let (pn, pm) = (&sys.values[n], &sys.values[n - 1]);
    let (dn, dm) = (&d[n], &d[n - 1]);
    let mut acc = Float::with_val(prec, 0);
    for i in 0..pn.len() {
        let mut t = Float::with_val(prec, &dn[i] * &pm[i]);
        t -= Float::with_val(prec, &pn[i] * &dm[i]);
        t *= &other.weights[i];
        acc += t;
    }
    acc *= &sys.b[n];
    acc.to_f64()
}

fn logdet_on(set: &NodeSet, f: &FHSymbol, v: &Potential, n: usize, prec: u32) -> Result<Float> {
    Ok(orthopoly_on(set, f, v, n, n - 1, prec)?.log_det_mp(n - 1))
}

fn check_step(x: f64, h: f64, name: &str) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return domain(format!("{name} must lie in (0,1), got {x}"));
    }
    if !(h > 0.0) || x - h < 0.0 || x + h > 1.0 {
        return domain(format!("step h={h} leaves [0,1] around {name}={x}"));
    }
    Ok(())
}

/// ∂_t log D_{N−1}(f_t) by central differences versus the orthogonal
/// polynomial integral with weight ∂_t f_t e^{−NV}.
pub fn di1_residual(f: &FHSymbol, v: &Potential, n: usize, t: f64, h: f64, prec: u32) -> Result<DiResidual> {
    check_step(t, h, "t")?;
    if n == 0 {
        return domain("di1 needs N >= 1");
    }
    let set = build_nodes(&f.points(), v, n, n + 1, prec)?;
    let ft = f.with_t(t);
    let sys = stieltjes(DiscreteMeasure::symbol(&set, &ft, v, n, prec), n)?;
    sys.check()?;
    let dmeasure = DiscreteMeasure::from_density(&set, prec, |x| {
        dt_symbol_mp(f, x, prec) * confinement_mp(v, n, x, prec)
    });
    let identity = kernel_integral(&sys, n, &dmeasure);
    let fd = |hh: f64| -> Result<f64> {
        let up = logdet_on(&set, &f.with_t(t + hh), v, n, prec)?;
        let dn = logdet_on(&set, &f.with_t(t - hh), v, n, prec)?;
        Ok(Float::with_val(prec, up - dn).to_f64() / (2.0 * hh))
    };
    let d1 = fd(h)?;
    let d2 = fd(0.5 * h)?;
    Ok(DiResidual {
        h,
        finite_difference: d1,
        identity,
        residual: (d1 - identity).abs(),
        residual_half: (d2 - identity).abs(),
    })
}

/// ∂_s log D_{N−1}(f; V_s) by central differences versus −N times the
/// orthogonal polynomial integral with weight f ∂_sV_s e^{−N V_s}.
pub fn di2_residual(f: &FHSymbol, v: &Potential, n: usize, s: f64, h: f64, prec: u32) -> Result<DiResidual> {
    check_step(s, h, "s")?;
    if n == 0 {
        return domain("di2 needs N >= 1");
    }
    let vs = v.homotopy(s);
    let dv = v.homotopy_direction();
    let set = build_nodes(&f.points(), &vs, n, n + 1, prec)?;
    let sys = stieltjes(DiscreteMeasure::symbol(&set, f, &vs, n, prec), n)?;
    sys.check()?;
    let dmeasure = DiscreteMeasure::from_density(&set, prec, |x| {
        let xf = Float::with_val(prec, x);
        let mut w = potential_mp(&dv, &xf, prec);
        w *= confinement_mp(&vs, n, x, prec);
        w *= smooth_mp(f, x, prec);
        w *= singular_mp(f, x, prec);
        w
    });
    let identity = -(n as f64) * kernel_integral(&sys, n, &dmeasure);
    // V_s = 2x² + s(V − 2x²) evaluated in working precision so that the
    // finite difference sees the exact linear path.
    let gue = Potential::gue();
    let logdet_s = |ss: f64| -> Result<Float> {
        let m = DiscreteMeasure::from_density(&set, prec, |x| {
            let xf = Float::with_val(prec, x);
            let mut e = potential_mp(&dv, &xf, prec);
            e *= ss;
            e += potential_mp(&gue, &xf, prec);
            e *= n as u32;
            let mut w = (-e).exp();
            w *= smooth_mp(f, x, prec);
            w *= singular_mp(f, x, prec);
            w
        });
        let sys = stieltjes(m, n - 1)?;
        sys.check()?;
        Ok(sys.log_det_mp(n - 1))
    };
    let fd = |hh: f64| -> Result<f64> {
        let up = logdet_s(s + hh)?;
        let dn = logdet_s(s - hh)?;
        Ok(Float::with_val(prec, up - dn).to_f64() / (2.0 * hh))
    };
    let d1 = fd(h)?;
    let d2 = fd(0.5 * h)?;
    Ok(DiResidual {
        h,
        finite_difference: d1,
        identity,
        residual: (d1 - identity).abs(),
        residual_half: (d2 - identity).abs(),
    })
}
