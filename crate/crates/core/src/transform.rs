//! Laplace, Stieltjes and Fourier transforms of a fractal function extended by
//! zero outside `I`.

use num_complex::Complex64;

use crate::error::{FracError, Result};
use crate::moments::{assemble_profile, midpoint_sample, panel_fold};
use crate::poly::PiecewisePolynomial;
use crate::quad::{adaptive_gauss, exp_piecewise_integral};
use crate::system::FractalSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    /// `K(x, s) = e^{-sx}`
    Laplace,
    /// `K(x, s) = 1/(s - x)`, `s` outside `I`
    Stieltjes,
    /// `K(x, s) = e^{jsx}`
    Fourier,
}

impl TransformKind {
    pub fn name(&self) -> &'static str {
        match self {
            TransformKind::Laplace => "laplace",
            TransformKind::Stieltjes => "stieltjes",
            TransformKind::Fourier => "fourier",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "laplace" => Some(TransformKind::Laplace),
            "stieltjes" => Some(TransformKind::Stieltjes),
            "fourier" => Some(TransformKind::Fourier),
            _ => None,
        }
    }

    pub fn kernel(&self, x: f64, s: f64) -> Complex64 {
        match self {
            TransformKind::Laplace => Complex64::new((-s * x).exp(), 0.0),
            TransformKind::Stieltjes => Complex64::new(1.0 / (s - x), 0.0),
            TransformKind::Fourier => Complex64::new(0.0, s * x).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformMethod {
    /// Panel sums over depth-`k` address cells, Aitken-accelerated over
    /// depths `k-2..=k`.
    Quadrature { depth: u32 },
    /// Equidistant-knot Fourier series truncated at `tol`.
    Series { tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformValue {
    pub value: Complex64,
    /// Series terms summed (0 for quadrature).
    pub terms: usize,
    /// Bound on the discarded series tail (0 for quadrature).
    pub tail_bound: f64,
}

fn check_pole(sys: &FractalSystem, kind: TransformKind, s: f64) -> Result<()> {
    let p = sys.partition();
    if kind == TransformKind::Stieltjes && (!s.is_finite() || p.contains(s)) {
        return Err(FracError::StieltjesPole {
            s,
            lo: p.lo(),
            hi: p.hi(),
        });
    }
    Ok(())
}

/// `Q̂(s)`: closed form for exponential kernels, adaptive Gauss panels for
/// the Stieltjes kernel.
pub fn profile_transform(profile: &PiecewisePolynomial, kind: TransformKind, s: f64) -> Complex64 {
    match kind {
        TransformKind::Laplace => exp_piecewise_integral(profile, Complex64::new(-s, 0.0)),
        TransformKind::Fourier => exp_piecewise_integral(profile, Complex64::new(0.0, s)),
        TransformKind::Stieltjes => {
            let total: f64 = profile
                .pieces()
                .iter()
                .zip(profile.breakpoints().windows(2))
                .map(|(p, w)| {
                    let scale = p.max_abs_on(w[0], w[1]) * (w[1] - w[0]);
                    adaptive_gauss(
                        &|x| p.eval(x) / (s - x),
                        w[0],
                        w[1],
                        1e-15 * scale.max(1e-300),
                    )
                })
                .sum();
            Complex64::new(total, 0.0)
        }
    }
}

/// Raw panel sum of `K(x, s) f(x)` over the depth-`k` cells.
pub fn panel_transform(sys: &FractalSystem, kind: TransformKind, s: f64, depth: u32) -> Result<Complex64> {
    check_pole(sys, kind, s)?;
    let start = midpoint_sample(sys)?;
    panel_fold(sys, depth, start, &|x: f64, v: f64, w: f64| {
        kind.kernel(x, s) * (w * v)
    })
}

fn aitken_complex(s0: Complex64, s1: Complex64, s2: Complex64) -> Complex64 {
    let d1 = s1 - s0;
    let d2 = s2 - s1;
    let denom = d2 - d1;
    if d1.norm() == 0.0 || denom.norm() == 0.0 || d2.norm() >= d1.norm() {
        return s2;
    }
    s2 - d2 * d2 / denom
}

fn quadrature(sys: &FractalSystem, kind: TransformKind, s: f64, depth: u32) -> Result<Complex64> {
    if depth < 2 {
        return panel_transform(sys, kind, s, depth);
    }
    let v: Vec<Complex64> = (depth - 2..=depth)
        .map(|k| panel_transform(sys, kind, s, k))
        .collect::<Result<_>>()?;
    Ok(aitken_complex(v[0], v[1], v[2]))
}

/// `f̂(s) = Σ_i [Π_{m=1}^{i} Λ(s/N^{m-1})] Q̂(s/N^i)` with
/// `Λ(s) = (1/N) Σ α_i e^{j s b_i}`, stopped once `‖α‖_∞^i M_Q <= tol`
/// where `M_Q = (x_N - x_0) max |Q|`.
fn fourier_series(sys: &FractalSystem, s: f64, tol: f64) -> Result<TransformValue> {
    let p = sys.partition();
    if !p.is_equidistant(1e-12) {
        return Err(FracError::SeriesNotApplicable(
            "series needs equidistant knots".into(),
        ));
    }
    let n = sys.n() as f64;
    let profile = assemble_profile(sys)?;
    let m_q = p.width() * profile.sup_abs();
    let alpha_inf = sys.scales().inf_norm();
    let lambda = |t: f64| -> Complex64 {
        sys.alpha()
            .iter()
            .zip(p.b())
            .map(|(&al, &b)| Complex64::new(0.0, t * b).exp() * al)
            .sum::<Complex64>()
            / n
    };
    let mut value = Complex64::new(0.0, 0.0);
    let mut prod = Complex64::new(1.0, 0.0);
    let mut arg = s;
    let mut terms = 0;
    loop {
        value += prod * profile_transform(&profile, TransformKind::Fourier, arg);
        terms += 1;
        let bound = alpha_inf.powi(terms as i32) * m_q;
        if bound <= tol || prod.norm() == 0.0 || terms >= 10_000 {
            let tail_bound = if alpha_inf < 1.0 {
                bound / (1.0 - alpha_inf)
            } else {
                f64::INFINITY
            };
            return Ok(TransformValue {
                value,
                terms,
                tail_bound,
            });
        }
        prod *= lambda(arg);
        arg /= n;
    }
}

/// `f̂(s)` by the chosen method.
pub fn transform(
    sys: &FractalSystem,
    kind: TransformKind,
    s: f64,
    method: TransformMethod,
) -> Result<TransformValue> {
    check_pole(sys, kind, s)?;
    match method {
        TransformMethod::Quadrature { depth } => Ok(TransformValue {
            value: quadrature(sys, kind, s, depth)?,
            terms: 0,
            tail_bound: 0.0,
        }),
        TransformMethod::Series { tol } => {
            if kind != TransformKind::Fourier {
                return Err(FracError::SeriesNotApplicable(format!(
                    "series is only available for the Fourier kernel, not {}",
                    kind.name()
                )));
            }
            fourier_series(sys, s, tol)
        }
    }
}

/// Fourier series truncated after exactly `terms` terms.
pub fn fourier_partial_sum(sys: &FractalSystem, s: f64, terms: usize) -> Result<Complex64> {
    let p = sys.partition();
    if !p.is_equidistant(1e-12) {
        return Err(FracError::SeriesNotApplicable(
            "series needs equidistant knots".into(),
        ));
    }
    let n = sys.n() as f64;
    let profile = assemble_profile(sys)?;
    let mut value = Complex64::new(0.0, 0.0);
    let mut prod = Complex64::new(1.0, 0.0);
    let mut arg = s;
    for _ in 0..terms {
        value += prod * profile_transform(&profile, TransformKind::Fourier, arg);
        let lam: Complex64 = sys
            .alpha()
            .iter()
            .zip(p.b())
            .map(|(&al, &b)| Complex64::new(0.0, arg * b).exp() * al)
            .sum::<Complex64>()
            / n;
        prod *= lam;
        arg /= n;
    }
    Ok(value)
}

/// Residual of the transform's functional equation with every `f̂` computed
/// by quadrature at `depth`:
///
/// * Laplace: `f̂(s) - Σ a_i α_i e^{-s b_i} f̂(a_i s) - Q̂(s)`
/// * Stieltjes: `f̂(s) - Σ α_i f̂((s - b_i)/a_i) - Q̂(s)`
/// * Fourier: `f̂(s) - Σ a_i α_i e^{j s b_i} f̂(a_i s) - Q̂(s)`
pub fn transform_residual(sys: &FractalSystem, kind: TransformKind, s: f64, depth: u32) -> Result<f64> {
    check_pole(sys, kind, s)?;
    let p = sys.partition();
    let profile = assemble_profile(sys)?;
    let lhs = quadrature(sys, kind, s, depth)?;
    let mut rhs = profile_transform(&profile, kind, s);
    for i in 0..sys.n() {
        let (a, b, al) = (p.a()[i], p.b()[i], sys.alpha()[i]);
        rhs += match kind {
            TransformKind::Laplace => {
                quadrature(sys, kind, a * s, depth)? * (a * al * (-s * b).exp())
            }
            TransformKind::Fourier => {
                quadrature(sys, kind, a * s, depth)? * Complex64::new(0.0, s * b).exp() * (a * al)
            }
            TransformKind::Stieltjes => {
                let shifted = (s - b) / a;
                check_pole(sys, kind, shifted)?;
                quadrature(sys, kind, shifted, depth)? * al
            }
        };
    }
    Ok((lhs - rhs).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::moments;
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
    fn zero_frequency_is_area() {
        let sys = histopolant();
        for kind in [TransformKind::Fourier, TransformKind::Laplace] {
            let v = transform(&sys, kind, 0.0, TransformMethod::Quadrature { depth: 10 }).unwrap();
            assert!((v.value.re - 2.5).abs() < 1e-10 && v.value.im.abs() < 1e-12);
        }
        let v = transform(
            &sys,
            TransformKind::Fourier,
            0.0,
            TransformMethod::Series { tol: 1e-14 },
        )
        .unwrap();
        assert!((v.value.re - moments(&sys, 0).unwrap().values[0]).abs() < 1e-12);
    }

    #[test]
    fn series_matches_quadrature() {
        let sys = histopolant();
        let q = transform(&sys, TransformKind::Fourier, 1.0, TransformMethod::Quadrature { depth: 12 })
            .unwrap();
        let s = transform(&sys, TransformKind::Fourier, 1.0, TransformMethod::Series { tol: 1e-12 })
            .unwrap();
        assert!((q.value - s.value).norm() < 1e-4);
    }

    #[test]
    fn errors() {
        let sys = histopolant();
        assert!(matches!(
            transform(&sys, TransformKind::Stieltjes, 0.5, TransformMethod::Quadrature { depth: 4 }),
            Err(FracError::StieltjesPole { .. })
        ));
        assert!(matches!(
            transform(&sys, TransformKind::Laplace, 1.0, TransformMethod::Series { tol: 1e-8 }),
            Err(FracError::SeriesNotApplicable(_))
        ));
        let d = DataSet::new(vec![(0.0, 0.0), (0.3, 0.5), (1.0, 0.0)]).unwrap();
        let uneven = build_affine_fif(&d, &ScaleFactors::uniform(0.5, 2).unwrap()).unwrap();
        assert!(matches!(
            transform(&uneven, TransformKind::Fourier, 1.0, TransformMethod::Series { tol: 1e-8 }),
            Err(FracError::SeriesNotApplicable(_))
        ));
    }

    #[test]
    fn conjugate_symmetry() {
        let sys = histopolant();
        let m = TransformMethod::Quadrature { depth: 8 };
        let a = transform(&sys, TransformKind::Fourier, 2.3, m).unwrap().value;
        let b = transform(&sys, TransformKind::Fourier, -2.3, m).unwrap().value;
        assert!((a - b.conj()).norm() <= 1e-10);
    }

    #[test]
    fn fourier_identity_at_zero() {
        assert!(transform_residual(&histopolant(), TransformKind::Fourier, 0.0, 10).unwrap() <= 1e-6);
    }

    #[test]
    fn stieltjes_profile_matches_closed_form() {
        // ∫_0^1 1/(3-x) dx = ln 1.5
        let one = PiecewisePolynomial::single(Polynomial::constant(1.0), 0.0, 1.0).unwrap();
        let v = profile_transform(&one, TransformKind::Stieltjes, 3.0);
        assert!((v.re - 1.5_f64.ln()).abs() < 1e-14);
    }
}
