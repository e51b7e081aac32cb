//! Minkowski dimension of the graph of an affine FIF.

use crate::system::FractalSystem;

/// The dimension equation only covers affine FIFs through non-collinear data;
/// callers are responsible for that hypothesis.
pub const FORMULA_DOMAIN: &str = "affine FIF";

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionReport {
    pub dimension: f64,
    pub sum_abs_alpha: f64,
    /// `Σ |α_i| a_i^{D-1} - 1` at the returned `D` (zero when `D = 1`).
    pub residual: f64,
    pub formula_domain: &'static str,
}

fn lhs(alpha: &[f64], a: &[f64], d: f64) -> f64 {
    alpha
        .iter()
        .zip(a)
        .map(|(al, ai)| al.abs() * ai.powf(d - 1.0))
        .sum::<f64>()
}

/// `D = 1` if `Σ|α_i| <= 1`, otherwise the root in `(1, 2)` of
/// `Σ |α_i| a_i^{D-1} = 1`, found by bisection (the left side decreases in `D`).
pub fn minkowski_report(sys: &FractalSystem) -> DimensionReport {
    let alpha = sys.alpha();
    let a = sys.partition().a();
    let sum_abs_alpha: f64 = alpha.iter().map(|x| x.abs()).sum();
    if sum_abs_alpha <= 1.0 {
        return DimensionReport {
            dimension: 1.0,
            sum_abs_alpha,
            residual: 0.0,
            formula_domain: FORMULA_DOMAIN,
        };
    }
    let (mut lo, mut hi) = (1.0_f64, 2.0_f64);
    let mut mid = 1.5;
    let mut g = lhs(alpha, a, mid) - 1.0;
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        g = lhs(alpha, a, mid) - 1.0;
        if g.abs() <= 1e-12 || hi - lo <= f64::EPSILON {
            break;
        }
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    DimensionReport {
        dimension: mid,
        sum_abs_alpha,
        residual: g,
        formula_domain: FORMULA_DOMAIN,
    }
}

pub fn minkowski_dimension(sys: &FractalSystem) -> f64 {
    minkowski_report(sys).dimension
}
