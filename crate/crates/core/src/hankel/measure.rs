//! Discretisation of f(x) e^{-N V(x)} dx by composite Gauss–Legendre panels
//! with weights held in arbitrary precision.

use rayon::prelude::*;
use rug::ops::Pow;
use rug::Float;

use super::symbol::FHSymbol;
use crate::chebyshev::CUTOFF_EPS;
use crate::equilibrium::Potential;
use crate::error::{domain, Result};
use crate::quadrature::gauss_legendre;

pub const PANEL_ORDER: usize = 32;
const GRADING_RATIO: f64 = 0.1;
const GRADING_LEVELS: usize = 20;
const WIDTH_CONST: f64 = 6.0;

/// Quadrature nodes and plain Gauss–Legendre weights on ℝ.
#[derive(Debug, Clone)]
pub struct NodeSet {
    pub nodes: Vec<f64>,
    pub gl_weights: Vec<f64>,
    pub support: (f64, f64),
}

/// Parameters that fix a node set: it depends on the singularities, the
/// potential and the polynomial degrees it must resolve, never on t or s.
pub fn build_nodes(
    points: &[(f64, f64)],
    v: &Potential,
    n: usize,
    k: usize,
    prec: u32,
) -> Result<NodeSet> {
    if n == 0 {
        return domain("matrix size N must be >= 1");
    }
    if v.degree() < 2 || v.degree() % 2 == 1 || !(v.monomial[v.degree()] > 0.0) {
        return domain(format!("potential '{}' is not confining", v.description));
    }
    let nf = n as f64;
    let vmin = v.global_min();
    let beta_sum: f64 = points.iter().map(|p| p.1).sum();
    let budget = prec as f64 * std::f64::consts::LN_2 + 40.0;
    let negligible = |x: f64| {
        let ax = x.abs();
        nf * (v.eval(x) - vmin) - beta_sum * (ax + 1.0).ln() - 2.0 * k as f64 * ax.max(1.0).ln()
            > budget
    };
    let edge = 1.0 + 2.0 * CUTOFF_EPS + 0.1;
    let find = |dir: f64| {
        let mut x = edge;
        loop {
            if negligible(dir * x) && dir * v.eval_deriv(dir * x) > 0.0 {
                return x;
            }
            x += 0.05;
        }
    };
    let (lo, hi) = (-find(-1.0), find(1.0));

    let mut breaks = vec![
        lo,
        -1.0 - 2.0 * CUTOFF_EPS,
        -1.0 - CUTOFF_EPS,
        -1.0,
        1.0,
        1.0 + CUTOFF_EPS,
        1.0 + 2.0 * CUTOFF_EPS,
        hi,
    ];
    breaks.extend(points.iter().map(|p| p.0));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let h_max = (0.1f64).min(2.0 / (k as f64 + 1.0));
    let width_at = |x: f64| {
        let slope = nf * v.eval_deriv(x).abs() + 1.0;
        let curv = v.deriv().eval_deriv(x).abs();
        h_max
            .min(WIDTH_CONST / slope)
            .min(2.0 / (nf * curv + 1.0).sqrt())
    };
    let is_transition = |a: f64, b: f64| {
        let m = 0.5 * (a + b).abs();
        m > 1.0 + CUTOFF_EPS && m < 1.0 + 2.0 * CUTOFF_EPS
    };

    let mut panels: Vec<(f64, f64)> = Vec::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if is_transition(a, b) {
            let m = 8;
            for i in 0..m {
                panels.push((a + (b - a) * i as f64 / m as f64, a + (b - a) * (i + 1) as f64 / m as f64));
            }
            continue;
        }
        let mut p = a;
        while p < b {
            let h = width_at(p).min(width_at((p + h_max).min(b)));
            let mut q = p + h;
            if q > b || b - q < 0.25 * h {
                q = b;
            }
            panels.push((p, q));
            p = q;
        }
    }

    // Geometric grading into non-polynomial kinks |λ − x_j|^β.
    let graded: Vec<f64> = points
        .iter()
        .filter(|p| p.1 != p.1.round())
        .map(|p| p.0)
        .collect();
    let mut final_panels = Vec::with_capacity(panels.len() + 4 * GRADING_LEVELS);
    for (a, b) in panels {
        let touch_a = graded.contains(&a);
        let touch_b = graded.contains(&b);
        if !touch_a && !touch_b {
            final_panels.push((a, b));
            continue;
        }
        let mid = 0.5 * (a + b);
        let mut sub = Vec::new();
        if touch_a {
            sub.extend(grade(a, mid));
        } else {
            sub.push((a, mid));
        }
        if touch_b {
            sub.extend(grade(b, mid).into_iter().map(|(x, y)| (y, x)).rev());
        } else {
            sub.push((mid, b));
        }
        final_panels.extend(sub);
    }

    let rule = gauss_legendre(PANEL_ORDER);
    let mut nodes = Vec::with_capacity(final_panels.len() * PANEL_ORDER);
    let mut gl_weights = Vec::with_capacity(nodes.capacity());
    for (a, b) in final_panels {
        for (x, w) in rule.mapped(a, b) {
            nodes.push(x);
            gl_weights.push(w);
        }
    }
    Ok(NodeSet {
        nodes,
        gl_weights,
        support: (lo, hi),
    })
}

/// Panels from the singular point s toward m, shrinking geometrically at s.
fn grade(s: f64, m: f64) -> Vec<(f64, f64)> {
    let d = m - s;
    let mut out = Vec::with_capacity(GRADING_LEVELS + 1);
    let mut r = 1.0;
    for _ in 0..GRADING_LEVELS {
        let inner = r * GRADING_RATIO;
        out.push((s + d * inner, s + d * r));
        r = inner;
    }
    out.push((s, s + d * r));
    out.reverse();
    out
}

pub(crate) fn potential_mp(v: &Potential, x: &Float, prec: u32) -> Float {
    let mut acc = Float::with_val(prec, 0);
    for &c in v.monomial.iter().rev() {
        acc *= x;
        acc += c;
    }
    acc
}

/// ∏|x − x_j|^{β_j} in working precision.
pub(crate) fn singular_mp(f: &FHSymbol, x: f64, prec: u32) -> Float {
    let mut acc = Float::with_val(prec, 1);
    for s in &f.singularities {
        if s.beta == 0.0 {
            continue;
        }
        let mut d = Float::with_val(prec, x);
        d -= s.x;
        d.abs_mut();
        if s.beta == s.beta.round() && s.beta <= 64.0 {
            acc *= d.pow(s.beta as u32);
        } else {
            acc *= d.pow(s.beta);
        }
    }
    acc
}

/// e^{−N V(x)}.
pub(crate) fn confinement_mp(v: &Potential, n: usize, x: f64, prec: u32) -> Float {
    let xf = Float::with_val(prec, x);
    let mut e = potential_mp(v, &xf, prec);
    e *= n as u32;
    e = -e;
    e.exp()
}

/// 1 + t(e^{𝒯̃} − 1).
pub(crate) fn smooth_mp(f: &FHSymbol, x: f64, prec: u32) -> Float {
    if f.t == 0.0 {
        return Float::with_val(prec, 1);
    }
    let tt = f.smooth_cut(x);
    let mut e = Float::with_val(prec, tt);
    e.exp_m1_mut();
    e *= f.t;
    e += 1;
    e
}

/// ∂_t f_t = (e^{𝒯̃} − 1) ∏|x − x_j|^{β_j}.
pub(crate) fn dt_symbol_mp(f: &FHSymbol, x: f64, prec: u32) -> Float {
    let tt = f.smooth_cut(x);
    let mut e = Float::with_val(prec, tt);
    e.exp_m1_mut();
    e * singular_mp(f, x, prec)
}

/// Discrete measure Σ w_i δ_{x_i} approximating f e^{−NV} dx.
#[derive(Debug, Clone)]
pub struct DiscreteMeasure {
    pub nodes: Vec<f64>,
    pub weights: Vec<Float>,
    pub prec: u32,
}

impl DiscreteMeasure {
    /// Weights gl_i · g(x_i) for an arbitrary density g in working precision.
    pub fn from_density(
        set: &NodeSet,
        prec: u32,
        g: impl Fn(f64) -> Float + Sync,
    ) -> DiscreteMeasure {
        let weights = set
            .nodes
            .par_iter()
            .zip(&set.gl_weights)
            .map(|(&x, &w)| g(x) * w)
            .collect();
        DiscreteMeasure {
            nodes: set.nodes.clone(),
            weights,
            prec,
        }
    }

    pub fn symbol(set: &NodeSet, f: &FHSymbol, v: &Potential, n: usize, prec: u32) -> Self {
        DiscreteMeasure::from_density(set, prec, |x| {
            let mut w = confinement_mp(v, n, x, prec);
            w *= smooth_mp(f, x, prec);
            w *= singular_mp(f, x, prec);
            w
        })
    }

    /// μ_m = Σ w_i x_i^m for m = 0..=max_power.
    pub fn moments(&self, max_power: usize) -> Vec<Float> {
        let prec = self.prec;
        let zero = || vec![Float::with_val(prec, 0); max_power + 1];
        self.nodes
            .par_iter()
            .zip(&self.weights)
            .fold(zero, |mut acc, (&x, w)| {
                let mut term = w.clone();
                for a in acc.iter_mut() {
                    *a += &term;
                    term *= x;
                }
                acc
            })
            .reduce(zero, |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            })
    }
}

/// μ_m = ∫ x^m f(x) e^{−N V(x)} dx, m = 0..=max_power, at the given precision.
pub fn moments(
    f: &FHSymbol,
    v: &Potential,
    n: usize,
    max_power: usize,
    prec: u32,
) -> Result<Vec<Float>> {
    let set = build_nodes(&f.points(), v, n, max_power.div_ceil(2), prec)?;
    Ok(DiscreteMeasure::symbol(&set, f, v, n, prec).moments(max_power))
}
