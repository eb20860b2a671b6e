use serde::{Deserialize, Serialize};

use crate::chebyshev::ChebSeries;
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    pub x: f64,
    pub beta: f64,
}

/// f_t(λ) = [1 − t + t·e^{𝒯(λ)}] ∏ |λ − x_j|^{β_j}, with 𝒯 smoothly cut off
/// outside [-1-2ε, 1+2ε].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FHSymbol {
    pub singularities: Vec<Singularity>,
    pub smooth_part: ChebSeries,
    pub t: f64,
}

impl FHSymbol {
    pub fn new(singularities: Vec<Singularity>, smooth_part: ChebSeries, t: f64) -> Result<Self> {
        for s in &singularities {
            if !(s.x > -1.0 && s.x < 1.0) {
                return domain(format!("singularity location {} must lie in (-1,1)", s.x));
            }
            if !(s.beta >= 0.0) || !s.beta.is_finite() {
                return domain(format!("singularity exponent {} must be >= 0", s.beta));
            }
        }
        if singularities.windows(2).any(|w| !(w[0].x < w[1].x)) {
            return domain("singularity locations must be strictly increasing");
        }
        if !(0.0..=1.0).contains(&t) {
            return domain(format!("deformation parameter t={t} must lie in [0,1]"));
        }
        if smooth_part.coeffs.iter().any(|c| !c.is_finite()) {
            return domain("smooth part coefficients must be finite");
        }
        Ok(FHSymbol {
            singularities,
            smooth_part,
            t,
        })
    }

    /// f ≡ 1.
    pub fn trivial() -> Self {
        FHSymbol {
            singularities: vec![],
            smooth_part: ChebSeries::zero(),
            t: 0.0,
        }
    }

    /// ∏|λ − x_j|^{β_j} from (x, β) pairs, sorted by location.
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        let mut s: Vec<Singularity> = points.iter().map(|&(x, beta)| Singularity { x, beta }).collect();
        s.sort_by(|a, b| a.x.total_cmp(&b.x));
        FHSymbol::new(s, ChebSeries::zero(), 0.0)
    }

    pub fn with_smooth(mut self, smooth: ChebSeries, t: f64) -> Result<Self> {
        self.smooth_part = smooth;
        self.t = t;
        FHSymbol::new(self.singularities, self.smooth_part, self.t)
    }

    pub fn with_t(&self, t: f64) -> FHSymbol {
        FHSymbol {
            t,
            ..self.clone()
        }
    }

    /// 𝒜 = Σ β_j / 2.
    pub fn a_total(&self) -> f64 {
        self.singularities.iter().map(|s| s.beta).sum::<f64>() / 2.0
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.singularities.iter().map(|s| (s.x, s.beta)).collect()
    }

    /// 𝒯 with the smooth cutoff applied.
    pub fn smooth_cut(&self, lambda: f64) -> f64 {
        self.smooth_part.eval_cut(lambda)
    }

    /// 1 − t + t e^{𝒯}.
    pub fn smooth_factor(&self, lambda: f64) -> f64 {
        if self.t == 0.0 {
            return 1.0;
        }
        1.0 + self.t * self.smooth_cut(lambda).exp_m1()
    }

    /// 𝒯_t = log(1 − t + t e^{𝒯}).
    pub fn log_smooth_t(&self, lambda: f64) -> f64 {
        (self.t * self.smooth_cut(lambda).exp_m1()).ln_1p()
    }

    pub fn singular_factor(&self, lambda: f64) -> f64 {
        self.singularities
            .iter()
            .map(|s| (lambda - s.x).abs().powf(s.beta))
            .product()
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        self.smooth_factor(lambda) * self.singular_factor(lambda)
    }
}

/// Value of the symbol at λ.
pub fn symbol_eval(f: &FHSymbol, lambda: f64) -> f64 {
    f.eval(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chebyshev::ChebSeries;

    #[test]
    fn examples() {
        let s = FHSymbol::from_points(&[(0.0, 2.0)]).unwrap().with_smooth(ChebSeries::zero(), 1.0).unwrap();
        assert!((symbol_eval(&s, 0.5) - 0.25).abs() < 1e-15);
        let s = FHSymbol::new(vec![], ChebSeries::single(1, 1.0), 0.5).unwrap();
        assert!((symbol_eval(&s, 0.3) - (0.5 + 0.5 * 0.3f64.exp())).abs() < 1e-15);
        let s = FHSymbol::from_points(&[(-0.2, 1.0), (0.4, 0.5)])
            .unwrap()
            .with_smooth(ChebSeries::single(2, 3.0), 0.0)
            .unwrap();
        let want = 0.9f64.abs() * 0.3f64.sqrt();
        assert!((symbol_eval(&s, 0.7) - want).abs() < 1e-15);
        assert_eq!(s.a_total(), 0.75);
    }

    #[test]
    fn validation() {
        assert!(FHSymbol::from_points(&[(1.0, 1.0)]).is_err());
        assert!(FHSymbol::from_points(&[(0.1, -1.0)]).is_err());
        assert!(FHSymbol::from_points(&[(0.1, 1.0), (0.1, 2.0)]).is_err());
        assert!(FHSymbol::trivial().with_smooth(ChebSeries::zero(), 1.5).is_err());
    }
}
