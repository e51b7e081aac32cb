//! Pointwise evaluation of the fixed point through address expansion.

use std::fmt;

use crate::error::Result;
use crate::system::FractalSystem;

/// Row cap for grids and panel sums, overridable through `FRACLIB_ROW_CAP`.
pub const DEFAULT_ROW_CAP: usize = 5_000_000;

pub fn row_cap() -> usize {
    std::env::var("FRACLIB_ROW_CAP")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_ROW_CAP)
}

/// Finite code `σ_1 … σ_k` selecting nested subintervals
/// `L_{σ_1} ∘ … ∘ L_{σ_k}(I)`. Digits are stored 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Address(Vec<u16>);

impl Address {
    pub fn new(digits: Vec<u16>) -> Self {
        Self(digits)
    }

    pub fn digits(&self) -> &[u16] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<usize> {
        self.0.first().map(|&d| d as usize)
    }

    /// Digit string with 1-based digits, e.g. `"121"`; digits are separated by
    /// `.` when `n > 9`.
    pub fn code_string(&self, n: usize) -> String {
        let sep = if n > 9 { "." } else { "" };
        self.0
            .iter()
            .map(|d| (d + 1).to_string())
            .collect::<Vec<_>>()
            .join(sep)
    }

    pub fn parse(code: &str, n: usize) -> Option<Self> {
        let digits: Option<Vec<u16>> = if n > 9 {
            code.split('.')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<u16>().ok().and_then(|d| d.checked_sub(1)))
                .collect()
        } else {
            code.chars()
                .map(|c| c.to_digit(10).and_then(|d| (d as u16).checked_sub(1)))
                .collect()
        };
        digits
            .filter(|d| d.iter().all(|&x| (x as usize) < n))
            .map(Self)
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wide = self.0.iter().any(|&d| d >= 9);
        write!(f, "{}", self.code_string(if wide { 10 } else { 9 }))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    /// Certified: `|f(x) - value| <= error_bound`.
    pub error_bound: f64,
    pub depth_used: usize,
    pub address: Address,
}

/// `B = max_i ‖q_i‖_∞ / (1 - ‖α‖_∞) >= sup |f|`.
pub fn sup_bound(sys: &FractalSystem) -> f64 {
    let qmax = sys
        .q()
        .iter()
        .map(|q| q.sup_abs())
        .fold(0.0, f64::max);
    qmax / (1.0 - sys.scales().inf_norm())
}

fn snap_to_knot(knots: &[f64], t: f64, tol: f64) -> Option<usize> {
    let k = knots.partition_point(|&v| v < t);
    [k.checked_sub(1), Some(k)]
        .into_iter()
        .flatten()
        .filter(|&j| j < knots.len())
        .find(|&j| (knots[j] - t).abs() <= tol)
}

/// Evaluate `f(x)` by following the address of `x` for up to `depth` steps.
///
/// `f(x) = α_{σ_1} f(t_1) + q_{σ_1}(t_1)` with `t_1 = L_{σ_1}^{-1}(x)`, and so
/// on. The innermost unknown is closed with 0, so the error is bounded by
/// `2 B Π |α_{σ_j}|`. Landing on a knot ends the recursion with an exact
/// knot value.
pub fn eval_at(sys: &FractalSystem, x: f64, depth: usize) -> Result<EvalResult> {
    let p = sys.partition();
    p.subinterval_of(x)?;
    let kv = sys.knot_values();
    let snap = 1e-13 * p.width();
    let (lo, hi) = (p.lo(), p.hi());
    let mut t = x;
    let mut coeff = 1.0;
    let mut acc = 0.0;
    let mut digits = Vec::new();
    for step in 0..=depth {
        if let Some(m) = snap_to_knot(p.knots(), t, snap) {
            return Ok(EvalResult {
                value: acc + coeff * kv[m],
                error_bound: 0.0,
                depth_used: step,
                address: Address(digits),
            });
        }
        if step == depth || coeff == 0.0 {
            break;
        }
        let i = p.subinterval_of(t)?;
        let s = p.inverse(i, t).clamp(lo, hi);
        acc += coeff * sys.q_eval(i, s);
        coeff *= sys.alpha()[i];
        digits.push(i as u16);
        t = s;
    }
    Ok(EvalResult {
        value: acc,
        error_bound: 2.0 * sup_bound(sys) * coeff.abs(),
        depth_used: digits.len(),
        address: Address(digits),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{PiecewisePolynomial, Polynomial};
    use crate::system::*;

    fn fif(alpha: f64) -> FractalSystem {
        let d = DataSet::new(vec![(0.0, 0.0), (0.5, 0.5), (1.0, 0.0)]).unwrap();
        build_affine_fif(&d, &ScaleFactors::uniform(alpha, 2).unwrap()).unwrap()
    }

    fn histopolant() -> FractalSystem {
        let p = make_partition(&[0.0, 0.5, 1.0]).unwrap();
        let q = vec![
            PiecewisePolynomial::single(Polynomial::linear(1.0, 0.25), 0.0, 1.0).unwrap(),
            PiecewisePolynomial::single(Polynomial::linear(2.0, 0.75), 0.0, 1.0).unwrap(),
        ];
        FractalSystem::new(p, ScaleFactors::uniform(0.5, 2).unwrap(), q, None, "t").unwrap()
    }

    #[test]
    fn sup_bound_examples() {
        assert!((sup_bound(&histopolant()) - 5.5).abs() < 1e-12);
        let zero = build_affine_fif(
            &DataSet::new(vec![(0.0, 0.0), (0.5, 0.0), (1.0, 0.0)]).unwrap(),
            &ScaleFactors::uniform(0.5, 2).unwrap(),
        )
        .unwrap();
        assert_eq!(sup_bound(&zero), 0.0);
    }

    #[test]
    fn one_step_to_knot() {
        let r = eval_at(&fif(0.75), 0.25, 2).unwrap();
        assert!((r.value - 0.625).abs() < 1e-15);
        assert_eq!(r.error_bound, 0.0);
        assert_eq!(r.depth_used, 1);
    }

    #[test]
    fn left_end_is_exact() {
        let r = eval_at(&histopolant(), 0.0, 7).unwrap();
        assert_eq!(r.value, 0.5);
        assert_eq!(r.error_bound, 0.0);
    }

    #[test]
    fn zero_scales_are_exact_after_one_step() {
        let r = eval_at(&fif(0.0), 0.3, 1).unwrap();
        assert!((r.value - 0.3).abs() < 1e-15);
        assert_eq!(r.error_bound, 0.0);
    }

    #[test]
    fn out_of_domain() {
        assert!(eval_at(&fif(0.5), 1.5, 3).is_err());
    }

    #[test]
    fn certificate_holds() {
        let sys = fif(0.75);
        for k in 0..40 {
            let x = (k as f64 * 0.618_033_988_7).fract();
            let coarse = eval_at(&sys, x, 6).unwrap();
            let fine = eval_at(&sys, x, 14).unwrap();
            assert!((coarse.value - fine.value).abs() <= coarse.error_bound + 1e-15);
        }
    }

    #[test]
    fn address_strings() {
        let a = Address::new(vec![0, 1, 0]);
        assert_eq!(a.code_string(2), "121");
        assert_eq!(Address::parse("121", 2), Some(a));
        assert_eq!(Address::parse("13", 2), None);
        assert_eq!(Address::new(vec![9, 0]).code_string(12), "10.1");
        assert_eq!(Address::parse("10.1", 12), Some(Address::new(vec![9, 0])));
    }
}
