//! Moment integrals `f_m = ∫ x^m f(x) dx` by the closed recursion, and a
//! panel-sum oracle that never touches the recursion.

use std::ops::Add;

use crate::error::{FracError, Result};
use crate::eval::{eval_at, row_cap, sup_bound};
use crate::poly::PiecewisePolynomial;
use crate::system::FractalSystem;

pub const MOMENT_CAP: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMethod {
    Recursion,
    Quadrature,
}

impl MomentMethod {
    pub fn name(&self) -> &'static str {
        match self {
            MomentMethod::Recursion => "recursion",
            MomentMethod::Quadrature => "quadrature",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    /// `f_0 … f_M`
    pub values: Vec<f64>,
    /// `Q_0 … Q_M`
    pub q_moments: Vec<f64>,
    pub method: MomentMethod,
}

/// Profile `Q(x) = q_i(L_i^{-1}(x))` on `I_i`, stitched over the mesh.
pub fn assemble_profile(sys: &FractalSystem) -> Result<PiecewisePolynomial> {
    let p = sys.partition();
    let knots = p.knots();
    let parts = (0..sys.n())
        .map(|i| {
            let (a, b) = (p.a()[i], p.b()[i]);
            let piece = sys.q()[i].compose_affine(1.0 / a, -b / a);
            let mut bps = piece.breakpoints().to_vec();
            bps[0] = knots[i];
            *bps.last_mut().unwrap() = knots[i + 1];
            PiecewisePolynomial::new(bps, piece.pieces().to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    PiecewisePolynomial::concat(&parts)
}

fn binomial(m: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (m - j) as f64 / (j + 1) as f64)
}

/// `α a^{k+1} b^{m-k}`, in log-magnitude form for high orders.
fn weighted_term(alpha: f64, a: f64, b: f64, k: usize, m: usize, guarded: bool) -> f64 {
    if !guarded || alpha == 0.0 || b == 0.0 {
        return alpha * a.powi(k as i32 + 1) * b.powi((m - k) as i32);
    }
    let sign = alpha.signum() * if (m - k) % 2 == 1 { b.signum() } else { 1.0 };
    let log = alpha.abs().ln() + (k as f64 + 1.0) * a.ln() + (m - k) as f64 * b.abs().ln();
    sign * log.exp()
}

/// `f_0 … f_M` from
/// `f_m = (Σ_{k<m} C(m,k) f_k Σ_i α_i a_i^{k+1} b_i^{m-k} + Q_m) / (1 - Σ_i α_i a_i^{m+1})`.
pub fn moments(sys: &FractalSystem, max_order: usize) -> Result<MomentTable> {
    if max_order > MOMENT_CAP {
        return Err(FracError::MomentOrderTooLarge {
            order: max_order,
            cap: MOMENT_CAP,
        });
    }
    let profile = assemble_profile(sys)?;
    let p = sys.partition();
    let alpha = sys.alpha();
    let guarded = max_order > 20;
    let q_moments: Vec<f64> = (0..=max_order).map(|m| profile.moment(m)).collect();
    let mut values: Vec<f64> = Vec::with_capacity(max_order + 1);
    for m in 0..=max_order {
        let mut num = q_moments[m];
        for (k, &fk) in values.iter().enumerate() {
            let inner: f64 = (0..sys.n())
                .map(|i| weighted_term(alpha[i], p.a()[i], p.b()[i], k, m, guarded))
                .sum();
            num += binomial(m, k) * fk * inner;
        }
        let denom = 1.0
            - (0..sys.n())
                .map(|i| alpha[i] * p.a()[i].powi(m as i32 + 1))
                .sum::<f64>();
        values.push(num / denom);
    }
    Ok(MomentTable {
        values,
        q_moments,
        method: MomentMethod::Recursion,
    })
}

/// Walk every depth-`k` cell `L_σ(I)` and fold `leaf(x_σ, f(x_σ), width_σ)`
/// where `x_σ = L_σ(start.0)` and `f` is propagated forward from
/// `start = (t, f(t))`. Children are summed in index order.
pub(crate) fn panel_fold<T, F>(sys: &FractalSystem, depth: u32, start: (f64, f64), leaf: &F) -> Result<T>
where
    T: Add<Output = T> + Copy,
    F: Fn(f64, f64, f64) -> T,
{
    let n = sys.n();
    let cap = row_cap();
    let panels = (n as u128).checked_pow(depth).unwrap_or(u128::MAX);
    if panels > cap as u128 {
        return Err(FracError::DepthTooLarge {
            depth,
            rows: panels,
            cap,
        });
    }
    fn walk<T, F>(sys: &FractalSystem, level: u32, x: f64, v: f64, w: f64, leaf: &F) -> T
    where
        T: Add<Output = T> + Copy,
        F: Fn(f64, f64, f64) -> T,
    {
        if level == 0 {
            return leaf(x, v, w);
        }
        let p = sys.partition();
        let mut acc: Option<T> = None;
        for i in 0..sys.n() {
            let child = walk(
                sys,
                level - 1,
                p.map(i, x),
                sys.alpha()[i] * v + sys.q_eval(i, x),
                w * p.a()[i],
                leaf,
            );
            acc = Some(match acc {
                None => child,
                Some(a) => a + child,
            });
        }
        acc.unwrap()
    }
    Ok(walk(sys, depth, start.0, start.1, sys.partition().width(), leaf))
}

/// Midpoint of `I` with a near-exact value of `f` there.
pub(crate) fn midpoint_sample(sys: &FractalSystem) -> Result<(f64, f64)> {
    let p = sys.partition();
    let mid = 0.5 * (p.lo() + p.hi());
    let alpha_inf = sys.scales().inf_norm();
    let scale = sup_bound(sys).max(f64::MIN_POSITIVE);
    let depth = if alpha_inf == 0.0 {
        1
    } else {
        ((1e-17 / scale).ln() / alpha_inf.ln()).ceil().clamp(1.0, 400.0) as usize
    };
    Ok((mid, eval_at(sys, mid, depth)?.value))
}

/// Composite midpoint sum of `x^m f(x)` over the depth-`k` address cells.
///
/// The cell midpoints are images of the midpoint of `I`, and their values are
/// carried forward exactly from `f(mid)`. The error decays like
/// `(Σ_i |α_i| a_i)^k`.
pub fn moment_oracle(sys: &FractalSystem, m: usize, depth: u32) -> Result<f64> {
    let start = midpoint_sample(sys)?;
    panel_fold(sys, depth, start, &|x: f64, v: f64, w: f64| {
        w * x.powi(m as i32) * v
    })
}

/// Aitken's Δ² on three consecutive terms of a geometrically converging
/// sequence; falls back to the last term when the differences are not
/// contracting.
pub fn aitken(s0: f64, s1: f64, s2: f64) -> f64 {
    let d1 = s1 - s0;
    let d2 = s2 - s1;
    let denom = d2 - d1;
    if d1 == 0.0 || denom == 0.0 || (d2 / d1).abs() >= 1.0 {
        return s2;
    }
    s2 - d2 * d2 / denom
}

/// [`moment_oracle`] at depths `k-2, k-1, k`, accelerated with [`aitken`].
pub fn moment_oracle_extrapolated(sys: &FractalSystem, m: usize, depth: u32) -> Result<f64> {
    if depth < 2 {
        return moment_oracle(sys, m, depth);
    }
    let s: Vec<f64> = (depth - 2..=depth)
        .map(|k| moment_oracle(sys, m, k))
        .collect::<Result<_>>()?;
    Ok(aitken(s[0], s[1], s[2]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Polynomial;
    use crate::system::*;

    fn histopolant() -> FractalSystem {
        let p = make_partition(&[0.0, 0.5, 1.0]).unwrap();
        let q = vec![
            PiecewisePolynomial::single(Polynomial::linear(1.0, 0.25), 0.0, 1.0).unwrap(),
            PiecewisePolynomial::single(Polynomial::linear(2.0, 0.75), 0.0, 1.0).unwrap(),
        ];
        FractalSystem::new(p, ScaleFactors::uniform(0.5, 2).unwrap(), q, None, "t").unwrap()
    }

    #[test]
    fn profile_of_histopolant() {
        let q = assemble_profile(&histopolant()).unwrap();
        assert_eq!(q.breakpoints(), &[0.0, 0.5, 1.0]);
        assert_eq!(q.pieces()[0].coeffs(), &[0.25, 2.0]);
        assert_eq!(q.pieces()[1].coeffs(), &[-1.25, 4.0]);
        assert!((q.integral() - 1.25).abs() < 1e-15);
    }

    #[test]
    fn constant_maps_give_constant_profile() {
        let p = make_partition(&[0.0, 0.3, 1.0]).unwrap();
        let c = PiecewisePolynomial::single(Polynomial::constant(2.0), 0.0, 1.0).unwrap();
        let sys = FractalSystem::new(
            p,
            ScaleFactors::new(vec![0.1, 0.2]).unwrap(),
            vec![c.clone(), c],
            None,
            "t",
        )
        .unwrap();
        let q = assemble_profile(&sys).unwrap();
        for x in [0.0, 0.2, 0.3, 0.9, 1.0] {
            assert!((q.eval(x) - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn histopolant_moments() {
        let t = moments(&histopolant(), 1).unwrap();
        assert!((t.values[0] - 2.5).abs() < 1e-14);
        assert!((t.q_moments[1] - 0.8125).abs() < 1e-14);
        assert!((t.values[1] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn zero_system_moments_vanish() {
        let sys = histopolant().scaled_q(0.0).unwrap();
        assert!(moments(&sys, 6).unwrap().values.iter().all(|&v| v == 0.0));
        assert_eq!(moment_oracle(&sys, 3, 5).unwrap(), 0.0);
    }

    #[test]
    fn order_cap() {
        assert!(matches!(
            moments(&histopolant(), 33),
            Err(FracError::MomentOrderTooLarge { .. })
        ));
        // guarded path agrees with the direct one where both apply
        let hi = moments(&histopolant(), 24).unwrap();
        let lo = moments(&histopolant(), 20).unwrap();
        for m in 0..=20 {
            assert!((hi.values[m] - lo.values[m]).abs() <= 1e-12 * lo.values[m].abs());
        }
    }

    #[test]
    fn raw_oracle_error_is_geometric() {
        // midpoint error is exactly (Σ α_i a_i)^k (f_0 - f(1/2)) here
        let sys = histopolant();
        for k in [4, 8, 12] {
            let err = moment_oracle(&sys, 0, k).unwrap() - 2.5;
            assert!((err + 0.5_f64.powi(k as i32) * 1.5).abs() < 1e-13);
        }
        let x = moment_oracle_extrapolated(&sys, 0, 12).unwrap();
        assert!((x - 2.5).abs() < 1e-12);
    }

    #[test]
    fn aitken_fallbacks() {
        assert_eq!(aitken(1.0, 1.0, 1.0), 1.0);
        assert_eq!(aitken(1.0, 2.0, 4.0), 4.0);
        assert!((aitken(1.5, 1.25, 1.125) - 1.0).abs() < 1e-15);
    }
}
