//! Global parametrix of the orthogonal-polynomial Riemann–Hilbert problem and
//! numerical checks of its jump, normalization and endpoint behaviour.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chebyshev::{cheb_fit, ChebSeries};
use crate::error::{domain, Result};
use crate::hankel::FHSymbol;
use crate::quadrature::{gauss_legendre, integrate_piecewise};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const CAUCHY_TOL: f64 = 1e-13;
pub const JUMP_OFFSETS: [f64; 3] = [1e-4, 1e-5, 1e-6];
pub const ENDPOINT_OFFSET: f64 = 1e-6;

/// Side of the cut [-1,1] a boundary value is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Mat2([[o, z], [z, o]])
    }

    pub fn diag(a: Complex64, d: Complex64) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Mat2([[a, z], [z, d]])
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        let mut r = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(r)
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        let mut r = self.0;
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] -= o.0[i][j];
            }
        }
        Mat2(r)
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        let mut r = self.0;
        r.iter_mut().flatten().for_each(|v| *v *= s);
        Mat2(r)
    }

    /// Max-entry absolute value.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

fn on_cut(z: Complex64) -> bool {
    z.im == 0.0 && z.re.abs() <= 1.0
}

/// r(z) = (z−1)^{1/2}(z+1)^{1/2}, principal branches; on [-1,1] a side is
/// required and r_±(x) = ±i√(1−x²).
pub fn r_eval(z: Complex64, side: Option<Side>) -> Result<Complex64> {
    if on_cut(z) {
        let s = (1.0 - z.re * z.re).sqrt();
        return match side {
            Some(Side::Upper) => Ok(Complex64::new(0.0, s)),
            Some(Side::Lower) => Ok(Complex64::new(0.0, -s)),
            None => domain(format!("r evaluated on the cut at {} without a side", z.re)),
        };
    }
    Ok((z - 1.0).sqrt() * (z + 1.0).sqrt())
}

/// a(z) = ((z−1)/(z+1))^{1/4}, principal branch.
pub fn a_eval(z: Complex64, side: Option<Side>) -> Result<Complex64> {
    if on_cut(z) {
        if z.re.abs() == 1.0 {
            return domain("a is singular at the endpoints");
        }
        let m = ((1.0 - z.re) / (1.0 + z.re)).powf(0.25);
        let phase = match side {
            Some(Side::Upper) => PI / 4.0,
            Some(Side::Lower) => -PI / 4.0,
            None => return domain(format!("a evaluated on the cut at {} without a side", z.re)),
        };
        return Ok(Complex64::from_polar(m, phase));
    }
    Ok(((z - 1.0) / (z + 1.0)).powf(0.25))
}

/// Symbol and deformation parameter; 𝒯_t = log(1 − t + t e^{𝒯}).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParametrixConfig {
    pub symbol: FHSymbol,
    pub t: f64,
}

impl ParametrixConfig {
    pub fn new(symbol: FHSymbol, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return domain(format!("deformation parameter t={t} must lie in [0,1]"));
        }
        let symbol = symbol.with_t(t);
        Ok(ParametrixConfig { symbol, t })
    }

    pub fn a_total(&self) -> f64 {
        self.symbol.a_total()
    }

    pub fn smooth_t(&self, lambda: f64) -> f64 {
        (self.t * self.symbol.smooth_part.eval(lambda).exp_m1()).ln_1p()
    }

    fn smooth_t_derivative(&self, lambda: f64) -> f64 {
        if self.t == 0.0 {
            return 0.0;
        }
        let s = &self.symbol.smooth_part;
        let e = s.eval(lambda).exp();
        self.t * e * s.derivative().eval(lambda) / (1.0 - self.t + self.t * e)
    }

    /// f_t on (-1,1).
    pub fn jump_weight(&self, x: f64) -> f64 {
        self.smooth_t(x).exp() * self.symbol.singular_factor(x)
    }

    fn with_t(&self, t: f64) -> ParametrixConfig {
        ParametrixConfig {
            symbol: self.symbol.with_t(t),
            t,
        }
    }
}

/// (1/2π)∫ 𝒯_t(λ)/√(1−λ²) dλ.
pub fn szego_mean(cfg: &ParametrixConfig) -> f64 {
    let rule = gauss_legendre(256);
    rule.mapped(0.0, PI).map(|(th, w)| w * cfg.smooth_t(th.cos())).sum::<f64>() / (2.0 * PI)
}

/// q_Sz(z) = (r(z)/2π)∫ 𝒯_t(λ)/(√(1−λ²)(z−λ)) dλ. The Cauchy integral is done
/// in θ (λ = cos θ) after subtracting g0 + g1(λ−x0), whose integrals are
/// known in closed form; the constant part gives exactly 𝒯_t/2 at ±1.
pub fn q_sz(z: Complex64, cfg: &ParametrixConfig) -> Result<Complex64> {
    if cfg.t == 0.0 || cfg.symbol.smooth_part.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if z.im == 0.0 && z.re.abs() < 1.0 {
        return domain(format!("q_Sz evaluated on the cut at {}", z.re));
    }
    let r = r_eval(z, None)?;
    let x0 = z.re.clamp(-1.0, 1.0);
    let g0 = cfg.smooth_t(x0);
    let g1 = cfg.smooth_t_derivative(x0);
    let th0 = x0.acos();
    let mut breaks = vec![0.0];
    if th0 > 0.0 && th0 < PI {
        breaks.push(th0);
    }
    breaks.push(PI);
    let rem: Complex64 = integrate_piecewise(
        |th: f64| {
            let l = th.cos();
            let num = cfg.smooth_t(l) - g0 - g1 * (l - x0);
            if num == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            num / (z - l)
        },
        &breaks,
        CAUCHY_TOL,
        "Cauchy integral of the Szego exponent",
    )?;
    // ∫ dλ/((z−λ)√(1−λ²)) = π/r and ∫ (λ−x0)/((z−λ)√(1−λ²)) dλ = (z−x0)π/r − π
    Ok(0.5 * g0 + 0.5 * g1 * (z - x0) - 0.5 * g1 * r + r * rem / (2.0 * PI))
}

/// q_FH(z) = log[(z + r)^{−𝒜} ∏ (z − x_j)^{β_j/2}] with principal logs.
pub fn q_fh(z: Complex64, cfg: &ParametrixConfig) -> Result<Complex64> {
    let r = r_eval(z, None)?;
    let mut acc = -cfg.a_total() * (z + r).ln();
    for s in &cfg.symbol.singularities {
        acc += 0.5 * s.beta * (z - s.x).ln();
    }
    Ok(acc)
}

fn check_off_cut(z: Complex64) -> Result<()> {
    if z.im == 0.0 && z.re <= 1.0 {
        return domain(format!("Szego function evaluated on (-inf,1] at {}", z.re));
    }
    Ok(())
}

/// 𝒟_t(z) = (z + r)^{−𝒜} exp[q_Sz(z)] ∏ (z − x_j)^{β_j/2}.
pub fn szego_d(z: Complex64, cfg: &ParametrixConfig) -> Result<Complex64> {
    check_off_cut(z)?;
    let r = r_eval(z, None)?;
    let mut d = (z + r).powf(-cfg.a_total()) * q_sz(z, cfg)?.exp();
    for s in &cfg.symbol.singularities {
        d *= (z - s.x).powf(0.5 * s.beta);
    }
    Ok(d)
}

/// 𝒟_t(∞) = 2^{−𝒜} exp[(1/2π)∫ 𝒯_t/√(1−λ²)].
pub fn szego_at_infinity(cfg: &ParametrixConfig) -> f64 {
    2f64.powf(-cfg.a_total()) * szego_mean(cfg).exp()
}

fn pinf_from(a: Complex64, d: Complex64, d_inf: f64) -> Mat2 {
    let p = 0.5 * (a + 1.0 / a);
    let m = 0.5 * (a - 1.0 / a);
    Mat2([[p * d_inf / d, -I * m * d_inf * d], [I * m / (d_inf * d), p * d / d_inf]])
}

/// P^{(∞)}(z) = ½ 𝒟(∞)^{σ3} [[a+a⁻¹, −i(a−a⁻¹)], [i(a−a⁻¹), a+a⁻¹]] 𝒟(z)^{−σ3}.
pub fn pinf_eval(z: Complex64, cfg: &ParametrixConfig) -> Result<Mat2> {
    if z.im == 0.0 && z.re.abs() <= 1.0 {
        return domain(format!("P evaluated on the cut at {}", z.re));
    }
    Ok(pinf_from(a_eval(z, None)?, szego_d(z, cfg)?, szego_at_infinity(cfg)))
}

/// The same matrix through e^{cσ3} P^{(∞)}(z, 0) e^{−q_Sz(z)σ3}.
pub fn pinf_factorized(z: Complex64, cfg: &ParametrixConfig) -> Result<Mat2> {
    let c = szego_mean(cfg);
    let p0 = pinf_eval(z, &cfg.with_t(0.0))?;
    let q = q_sz(z, cfg)?;
    let left = Mat2::diag(Complex64::new(c.exp(), 0.0), Complex64::new((-c).exp(), 0.0));
    let right = Mat2::diag((-q).exp(), q.exp());
    Ok(left.mul(&p0).mul(&right))
}

/// |log(𝒟_t e^{−q_FH − q_Sz})|.
pub fn decomposition_residual(z: Complex64, cfg: &ParametrixConfig) -> Result<f64> {
    let d = szego_d(z, cfg)?;
    Ok((d * (-(q_fh(z, cfg)? + q_sz(z, cfg)?)).exp()).ln().norm())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpRow {
    pub x: f64,
    /// `None` marks the δ → 0 extrapolation.
    pub delta: Option<f64>,
    pub residual: f64,
    pub config_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpResidual {
    pub x: f64,
    pub offsets: Vec<f64>,
    pub residuals: Vec<f64>,
    pub extrapolated: f64,
}

impl JumpResidual {
    pub fn at(&self, delta: f64) -> Option<f64> {
        self.offsets.iter().position(|&d| d == delta).map(|i| self.residuals[i])
    }

    pub fn rows(&self, config_id: &str) -> Vec<JumpRow> {
        let mut rows: Vec<JumpRow> = self
            .offsets
            .iter()
            .zip(&self.residuals)
            .map(|(&d, &r)| JumpRow {
                x: self.x,
                delta: Some(d),
                residual: r,
                config_id: config_id.to_string(),
            })
            .collect();
        rows.push(JumpRow {
            x: self.x,
            delta: None,
            residual: self.extrapolated,
            config_id: config_id.to_string(),
        });
        rows
    }
}

fn jump_defect(x: f64, cfg: &ParametrixConfig, delta: f64, jump: &Mat2) -> Result<Mat2> {
    let up = pinf_eval(Complex64::new(x, delta), cfg)?;
    let down = pinf_eval(Complex64::new(x, -delta), cfg)?;
    Ok(up.sub(&down.mul(jump)))
}

/// ‖P(x+iδ) − P(x−iδ)J(x)‖ at each δ in `offsets` (decreasing), with a
/// first-order Richardson extrapolation from the two smallest offsets.
pub fn jump_residual_at(x: f64, cfg: &ParametrixConfig, offsets: &[f64]) -> Result<JumpResidual> {
    if !(x.abs() <= 1.0 - 1e-3) {
        return domain(format!("jump point {x} must be at least 1e-3 inside (-1,1)"));
    }
    if cfg.symbol.singularities.iter().any(|s| (x - s.x).abs() < 1e-3) {
        return domain(format!("jump point {x} is within 1e-3 of a singularity"));
    }
    if offsets.len() < 2 {
        return domain("at least two offsets are needed for extrapolation");
    }
    let f = cfg.jump_weight(x);
    let z = Complex64::new(0.0, 0.0);
    let jump = Mat2([[z, Complex64::new(f, 0.0)], [Complex64::new(-1.0 / f, 0.0), z]]);
    let defects: Vec<Mat2> = offsets
        .par_iter()
        .map(|&d| jump_defect(x, cfg, d, &jump))
        .collect::<Result<_>>()?;
    let n = offsets.len();
    let (d1, d2) = (offsets[n - 2], offsets[n - 1]);
    let extrap = defects[n - 1]
        .scale(d1 / (d1 - d2))
        .sub(&defects[n - 2].scale(d2 / (d1 - d2)));
    Ok(JumpResidual {
        x,
        offsets: offsets.to_vec(),
        residuals: defects.iter().map(Mat2::max_abs).collect(),
        extrapolated: extrap.max_abs(),
    })
}

pub fn jump_residual(x: f64, cfg: &ParametrixConfig) -> Result<JumpResidual> {
    jump_residual_at(x, cfg, &JUMP_OFFSETS)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointCheck {
    pub offset: f64,
    /// (endpoint, approach label, |q_Sz − 𝒯_t(endpoint)/2|)
    pub deviations: Vec<(f64, String, f64)>,
    pub max_deviation: f64,
}

/// q_Sz near ±1 from outside, above, below and diagonally over the cut. The
/// deviation scales like √offset.
pub fn szego_endpoint_check_at(cfg: &ParametrixConfig, offset: f64) -> Result<EndpointCheck> {
    let mut deviations = Vec::new();
    for e in [1.0f64, -1.0] {
        let target = 0.5 * cfg.smooth_t(e);
        let dirs = [
            ("outward", Complex64::new(e.signum() * offset, 0.0)),
            ("above", Complex64::new(0.0, offset)),
            ("below", Complex64::new(0.0, -offset)),
            ("inward-above", Complex64::new(-e.signum() * offset, offset)),
        ];
        for (label, d) in dirs {
            let q = q_sz(Complex64::new(e, 0.0) + d, cfg)?;
            deviations.push((e, label.to_string(), (q - target).norm()));
        }
    }
    let max_deviation = deviations.iter().map(|d| d.2).fold(0.0, f64::max);
    Ok(EndpointCheck {
        offset,
        deviations,
        max_deviation,
    })
}

pub fn szego_endpoint_check(cfg: &ParametrixConfig) -> Result<EndpointCheck> {
    szego_endpoint_check_at(cfg, ENDPOINT_OFFSET)
}

/// q_Sz from the Chebyshev coefficients c_k of 𝒯_t: ½ Σ c_k (z + r)^{−k}.
pub fn q_sz_chebyshev(z: Complex64, cfg: &ParametrixConfig, order: i64) -> Result<Complex64> {
    let c: ChebSeries = cheb_fit(|l| cfg.smooth_t(l), order)?;
    let w = 1.0 / (z + r_eval(z, None)?);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut p = Complex64::new(1.0, 0.0);
    for ck in &c.coeffs {
        acc += ck * p;
        p *= w;
    }
    Ok(0.5 * acc)
}

/// sup |q_Sz| over the boundary of the stadium at distance `dist` from [-1,1].
pub fn szego_contour_sup(cfg: &ParametrixConfig, dist: f64, n: usize) -> Result<f64> {
    let mut pts = Vec::with_capacity(2 * n + 2 * n);
    for i in 0..n {
        let x = -1.0 + 2.0 * (i as f64 + 0.5) / n as f64;
        pts.push(Complex64::new(x, dist));
        pts.push(Complex64::new(x, -dist));
        let th = PI * (i as f64 + 0.5) / n as f64 - PI / 2.0;
        pts.push(Complex64::new(1.0, 0.0) + Complex64::from_polar(dist, th));
        pts.push(Complex64::new(-1.0, 0.0) - Complex64::from_polar(dist, th));
    }
    let vals: Vec<f64> = pts
        .par_iter()
        .map(|&z| q_sz(z, cfg).map(|q| q.norm()))
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branches() {
        let r = r_eval(Complex64::new(2.0, 0.0), None).unwrap();
        assert!((r - Complex64::new(3f64.sqrt(), 0.0)).norm() < 1e-15);
        let rp = r_eval(Complex64::new(0.3, 0.0), Some(Side::Upper)).unwrap();
        assert!((rp - Complex64::new(0.0, (1.0 - 0.09f64).sqrt())).norm() < 1e-15);
        assert!(r_eval(Complex64::new(0.3, 0.0), None).is_err());
        let a = a_eval(Complex64::new(1e6, 1e6), None).unwrap();
        assert!((a - 1.0).norm() < 1e-5);
        // continuity across (-inf,-1)
        let up = r_eval(Complex64::new(-3.0, 1e-12), None).unwrap();
        let dn = r_eval(Complex64::new(-3.0, -1e-12), None).unwrap();
        assert!((up - dn).norm() < 1e-10);
    }

    #[test]
    fn trivial_szego() {
        let cfg = ParametrixConfig::new(FHSymbol::trivial(), 1.0).unwrap();
        let d = szego_d(Complex64::new(0.4, 0.7), &cfg).unwrap();
        assert!((d - 1.0).norm() < 1e-15);
        assert_eq!(szego_at_infinity(&cfg), 1.0);
    }
}
