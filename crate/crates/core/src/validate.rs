//! Structural classification of a [`FractalSystem`].

use crate::error::Result;
use crate::system::{derivative_system, DataSet, FractalSystem};

/// Largest smoothness order reported when every scale factor is zero.
pub const CK_ORDER_CAP: u32 = 32;

#[derive(Debug, Clone, PartialEq)]
pub enum Variant {
    /// Continuous and interpolating its data.
    ContinuousInterpolatory,
    /// Continuous; knot values deviate from the data by at most `epsilon`.
    ContinuousApproximant { epsilon: f64 },
    /// Interpolates its data with jumps at internal knots.
    InterpolatoryDiscontinuous,
    GeneralBounded,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::ContinuousInterpolatory => "continuous_interpolatory",
            Variant::ContinuousApproximant { .. } => "continuous_approximant",
            Variant::InterpolatoryDiscontinuous => "interpolatory_discontinuous",
            Variant::GeneralBounded => "general_bounded",
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(
            self,
            Variant::ContinuousInterpolatory | Variant::ContinuousApproximant { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VariantReport {
    pub variant: Variant,
    /// `|left - right|` at each internal knot.
    pub join_residuals: Vec<f64>,
    /// Knot value deviation from the data at `x_0` and `x_N` (zero without data).
    pub endpoint_residuals: [f64; 2],
    /// Largest `r` with `|alpha_i| < a_i^r` for all `i`, capped at [`CK_ORDER_CAP`].
    pub ck_order: u32,
    pub knot_values: Vec<f64>,
    /// Largest jump of any `q_i` at its own internal breakpoints.
    pub q_jump: f64,
}

impl VariantReport {
    pub fn max_join_residual(&self) -> f64 {
        self.join_residuals.iter().fold(0.0, |m, &r| m.max(r))
    }
}

/// One-sided values `(left, right)` of the fixed point at each internal knot.
pub fn join_values(sys: &FractalSystem, knot_values: &[f64]) -> Vec<(f64, f64)> {
    let n = sys.n();
    let xn = sys.partition().hi();
    let fxn = knot_values[n];
    (1..n)
        .map(|i| {
            let left = sys.alpha()[i - 1] * fxn + sys.q()[i - 1].eval_left(xn);
            (left, knot_values[i])
        })
        .collect()
}

fn ck_order(sys: &FractalSystem) -> u32 {
    let pairs: Vec<(f64, f64)> = sys
        .alpha()
        .iter()
        .zip(sys.partition().a())
        .map(|(&al, &a)| (al.abs(), a))
        .collect();
    (0..=CK_ORDER_CAP)
        .take_while(|&r| pairs.iter().all(|&(al, a)| al < a.powi(r as i32)))
        .last()
        .unwrap_or(0)
}

fn q_jump(sys: &FractalSystem) -> f64 {
    sys.q()
        .iter()
        .flat_map(|q| {
            let bps = q.breakpoints();
            bps[1..bps.len() - 1]
                .iter()
                .map(move |&t| (q.eval(t) - q.eval_left(t)).abs())
        })
        .fold(0.0, f64::max)
}

/// Classify against the system's own interpolation data, if any.
///
/// Without data a continuous system counts as interpolating its own knot
/// values and a discontinuous one is [`Variant::GeneralBounded`].
pub fn validate(sys: &FractalSystem, tol: f64) -> VariantReport {
    classify(sys, sys.data(), tol)
}

/// Classify against an explicit data set (e.g. the unperturbed data of an
/// approximant).
pub fn validate_against(sys: &FractalSystem, data: &DataSet, tol: f64) -> VariantReport {
    classify(sys, Some(data), tol)
}

fn classify(sys: &FractalSystem, data: Option<&DataSet>, tol: f64) -> VariantReport {
    let kv = sys.knot_values();
    let join_residuals: Vec<f64> = join_values(sys, &kv)
        .into_iter()
        .map(|(l, r)| (l - r).abs())
        .collect();
    let q_jump = q_jump(sys);
    let joined = join_residuals.iter().all(|&r| r <= tol) && q_jump <= tol;
    let n = sys.n();
    let (deviation, endpoint_residuals) = match data {
        Some(d) if d.len() == kv.len() => {
            let ys = d.ys();
            let dev = kv
                .iter()
                .zip(&ys)
                .map(|(v, y)| (v - y).abs())
                .fold(0.0, f64::max);
            (Some(dev), [(kv[0] - ys[0]).abs(), (kv[n] - ys[n]).abs()])
        }
        _ => (None, [0.0, 0.0]),
    };
    let variant = match (joined, deviation) {
        (true, None) => Variant::ContinuousInterpolatory,
        (true, Some(e)) if e <= tol => Variant::ContinuousInterpolatory,
        (true, Some(e)) => Variant::ContinuousApproximant { epsilon: e },
        (false, Some(e)) if e <= tol => Variant::InterpolatoryDiscontinuous,
        (false, _) => Variant::GeneralBounded,
    };
    VariantReport {
        variant,
        join_residuals,
        endpoint_residuals,
        ck_order: ck_order(sys),
        knot_values: kv,
        q_jump,
    }
}

/// Whether the `r`-th derivative system joins continuously at every
/// internal knot, i.e. left and right `r`-th derivative values agree.
pub fn ck_joins(sys: &FractalSystem, r: u32, tol: f64) -> Result<bool> {
    let d = derivative_system(sys, r)?;
    Ok(validate(&d, tol).max_join_residual() <= tol)
}
