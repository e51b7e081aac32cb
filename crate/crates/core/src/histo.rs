//! Fractal histopolation: fractal functions whose subinterval integrals match
//! a histogram.

use crate::error::{FracError, Result};
use crate::linsolve;
use crate::moments::moments;
use crate::poly::{PiecewisePolynomial, Polynomial};
use crate::system::{build_alpha_fractal, derivative_system, DataSet, FractalSystem, Partition, ScaleFactors};

/// Area residual accepted as a successful solve, relative to `max(1, |target|)`.
pub const SOLVE_TOL: f64 = 1e-10;

/// Knot-value tolerance for splines fed to [`histospline`].
pub const CUMULATIVE_TOL: f64 = 1e-8;

/// Frequencies `f_1..f_N` bound to a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    partition: Partition,
    frequencies: Vec<f64>,
}

impl Histogram {
    pub fn new(partition: Partition, frequencies: Vec<f64>) -> Result<Self> {
        if frequencies.len() != partition.len() {
            return Err(FracError::LengthMismatch {
                what: "frequencies",
                expected: partition.len(),
                got: frequencies.len(),
            });
        }
        if let Some(i) = frequencies.iter().position(|f| !f.is_finite()) {
            return Err(FracError::BadData(format!("frequency {i} is not finite")));
        }
        Ok(Self {
            partition,
            frequencies,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    /// `h_i f_i`
    pub fn targets(&self) -> Vec<f64> {
        self.partition
            .h()
            .iter()
            .zip(&self.frequencies)
            .map(|(h, f)| h * f)
            .collect()
    }

    /// `Σ h_i f_i`
    pub fn total(&self) -> f64 {
        self.targets().iter().sum()
    }
}

/// Solver metadata carried along with a solution.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    pub solver: &'static str,
    pub condition: Option<f64>,
    pub min_pivot: Option<f64>,
    pub y0: Option<f64>,
    pub y_n: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoSolution {
    /// `None` when the solve is infeasible.
    pub system: Option<FractalSystem>,
    pub alpha: Vec<f64>,
    pub areas: Vec<f64>,
    pub targets: Vec<f64>,
    pub area_residuals: Vec<f64>,
    pub feasible: bool,
    pub diagnostics: Diagnostics,
}

impl HistoSolution {
    pub fn max_residual(&self) -> f64 {
        self.area_residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    fn from_system(sys: FractalSystem, hist: &Histogram, diagnostics: Diagnostics) -> Result<Self> {
        let areas = areas(&sys)?;
        let targets = hist.targets();
        let area_residuals: Vec<f64> = areas.iter().zip(&targets).map(|(a, t)| a - t).collect();
        let feasible = area_residuals
            .iter()
            .zip(&targets)
            .all(|(r, t)| r.abs() <= SOLVE_TOL * t.abs().max(1.0));
        Ok(Self {
            alpha: sys.alpha().to_vec(),
            system: Some(sys),
            areas,
            targets,
            area_residuals,
            feasible,
            diagnostics,
        })
    }
}

fn check_partition(hist: &Histogram, partition: &Partition) -> Result<()> {
    let tol = partition.geometry_tol();
    let same = hist.partition().len() == partition.len()
        && hist
            .partition()
            .knots()
            .iter()
            .zip(partition.knots())
            .all(|(a, b)| (a - b).abs() <= tol);
    if same {
        Ok(())
    } else {
        Err(FracError::DomainMismatch(
            "histogram knots differ from the partition".into(),
        ))
    }
}

fn linear_q(partition: &Partition, slope: f64, intercept: f64) -> Result<PiecewisePolynomial> {
    PiecewisePolynomial::single(
        Polynomial::linear(slope, intercept),
        partition.lo(),
        partition.hi(),
    )
}

/// `∫_{I_i} f = α_i a_i f_0 + a_i ∫_I q_i`.
pub fn areas(sys: &FractalSystem) -> Result<Vec<f64>> {
    let f0 = moments(sys, 0)?.values[0];
    let a = sys.partition().a();
    Ok((0..sys.n())
        .map(|i| sys.alpha()[i] * a[i] * f0 + a[i] * sys.q()[i].integral())
        .collect())
}

/// Scales `α_i = (h_i f_i - a_i ∫_I q_i) / (a_i Σ h_j f_j)` for fixed maps.
/// An out-of-range scale makes the solution infeasible; no system is built.
pub fn solve_scales(partition: &Partition, hist: &Histogram, q: &[PiecewisePolynomial]) -> Result<HistoSolution> {
    check_partition(hist, partition)?;
    if q.len() != partition.len() {
        return Err(FracError::LengthMismatch {
            what: "q maps",
            expected: partition.len(),
            got: q.len(),
        });
    }
    let total = hist.total();
    if total == 0.0 {
        return Err(FracError::ZeroTotalArea);
    }
    let targets = hist.targets();
    let a = partition.a();
    let alpha: Vec<f64> = (0..partition.len())
        .map(|i| (targets[i] - a[i] * q[i].integral()) / (a[i] * total))
        .collect();
    let diagnostics = Diagnostics {
        solver: "scales",
        ..Default::default()
    };
    if alpha.iter().all(|v| v.abs() < 1.0) {
        let sys = FractalSystem::new(
            partition.clone(),
            ScaleFactors::new(alpha)?,
            q.to_vec(),
            None,
            "histo_scales",
        )?;
        return HistoSolution::from_system(sys, hist, diagnostics);
    }
    // areas of the formal solution; f_0 = Σ h_j f_j by construction
    let areas: Vec<f64> = (0..partition.len())
        .map(|i| alpha[i] * a[i] * total + a[i] * q[i].integral())
        .collect();
    let area_residuals = areas.iter().zip(&targets).map(|(x, t)| x - t).collect();
    Ok(HistoSolution {
        system: None,
        alpha,
        areas,
        targets,
        area_residuals,
        feasible: false,
        diagnostics,
    })
}

/// Affine maps `q_i(x) = q_{i0} x + q_{i1}` with prescribed slopes `q_{i0}`
/// and offsets
/// `q_{i1} = (h_i f_i - a_i α_i Σ h_j f_j) / (a_i (x_N - x_0)) - (q_{i0}/2)(x_N + x_0)`.
pub fn solve_offsets(
    partition: &Partition,
    hist: &Histogram,
    scales: &ScaleFactors,
    slopes: &[f64],
) -> Result<HistoSolution> {
    check_partition(hist, partition)?;
    let n = partition.len();
    for (what, len) in [("scale factors", scales.len()), ("slopes", slopes.len())] {
        if len != n {
            return Err(FracError::LengthMismatch {
                what,
                expected: n,
                got: len,
            });
        }
    }
    let total = hist.total();
    let targets = hist.targets();
    let (a, w) = (partition.a(), partition.width());
    let mid_sum = partition.hi() + partition.lo();
    let q = (0..n)
        .map(|i| {
            let offset = (targets[i] - a[i] * scales.values()[i] * total) / (a[i] * w)
                - 0.5 * slopes[i] * mid_sum;
            linear_q(partition, slopes[i], offset)
        })
        .collect::<Result<Vec<_>>>()?;
    let sys = FractalSystem::new(partition.clone(), scales.clone(), q, None, "histo_offsets")?;
    HistoSolution::from_system(
        sys,
        hist,
        Diagnostics {
            solver: "offsets",
            ..Default::default()
        },
    )
}

/// Continuous histopolant with affine maps, from the `2N+1` equations in
/// `(y_N, q_{10}, q_{11}, …, q_{N0}, q_{N1})` with `y_0` fixed.
pub fn solve_continuous(
    partition: &Partition,
    hist: &Histogram,
    scales: &ScaleFactors,
    y0: f64,
) -> Result<HistoSolution> {
    check_partition(hist, partition)?;
    let n = partition.len();
    if scales.len() != n {
        return Err(FracError::LengthMismatch {
            what: "scale factors",
            expected: n,
            got: scales.len(),
        });
    }
    let alpha = scales.values();
    let (x0, xn) = (partition.lo(), partition.hi());
    let (a, w) = (partition.a(), partition.width());
    let targets = hist.targets();
    let total = hist.total();
    let dim = 2 * n + 1;
    let slope = |i: usize| 1 + 2 * i;
    let offset = |i: usize| 2 + 2 * i;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(dim);
    let mut rhs: Vec<f64> = Vec::with_capacity(dim);

    // q_1(x_0) = y_0 (1 - α_1)
    let mut r = vec![0.0; dim];
    r[slope(0)] = x0;
    r[offset(0)] = 1.0;
    rows.push(r);
    rhs.push(y0 * (1.0 - alpha[0]));

    // q_N(x_N) - y_N (1 - α_N) = 0
    let mut r = vec![0.0; dim];
    r[0] = -(1.0 - alpha[n - 1]);
    r[slope(n - 1)] = xn;
    r[offset(n - 1)] = 1.0;
    rows.push(r);
    rhs.push(0.0);

    // α_{i+1} y_0 + q_{i+1}(x_0) = α_i y_N + q_i(x_N)
    for i in 0..n - 1 {
        let mut r = vec![0.0; dim];
        r[slope(i + 1)] = x0;
        r[offset(i + 1)] = 1.0;
        r[0] = -alpha[i];
        r[slope(i)] = -xn;
        r[offset(i)] = -1.0;
        rows.push(r);
        rhs.push(-alpha[i + 1] * y0);
    }

    // a_i W [q_{i0}(x_N + x_0)/2 + q_{i1}] = h_i f_i - α_i a_i Σ h_j f_j
    for i in 0..n {
        let mut r = vec![0.0; dim];
        r[slope(i)] = a[i] * w * 0.5 * (xn + x0);
        r[offset(i)] = a[i] * w;
        rows.push(r);
        rhs.push(targets[i] - alpha[i] * a[i] * total);
    }

    let sol = linsolve::solve(&rows, &rhs)?;
    let q = (0..n)
        .map(|i| linear_q(partition, sol.x[slope(i)], sol.x[offset(i)]))
        .collect::<Result<Vec<_>>>()?;
    let sys = FractalSystem::new(partition.clone(), scales.clone(), q, None, "histo_continuous")?;
    HistoSolution::from_system(
        sys,
        hist,
        Diagnostics {
            solver: "continuous",
            condition: Some(sol.condition),
            min_pivot: Some(sol.min_pivot),
            y0: Some(y0),
            y_n: Some(sol.x[0]),
        },
    )
}

/// `(x_i, y_i)` with `y_i = y_{i-1} + h_i f_i`.
pub fn cumulative_data(hist: &Histogram, y0: f64) -> Result<DataSet> {
    let knots = hist.partition().knots();
    let mut y = y0;
    let mut pts = vec![(knots[0], y0)];
    for (i, t) in hist.targets().iter().enumerate() {
        y += t;
        pts.push((knots[i + 1], y));
    }
    DataSet::new(pts)
}

/// Histopolant `g'` from a `C^1` fractal spline `g` through the cumulative
/// data of `hist` (with `y_0 = g(x_0)`).
pub fn histospline(spline: &FractalSystem, hist: &Histogram) -> Result<HistoSolution> {
    check_partition(hist, spline.partition())?;
    let kv = spline.knot_values();
    let data = cumulative_data(hist, kv[0])?;
    let scale = data.ys().iter().fold(1.0_f64, |m, y| m.max(y.abs()));
    let deviation = kv
        .iter()
        .zip(data.ys())
        .fold(0.0_f64, |m, (k, y)| m.max((k - y).abs()));
    if deviation > CUMULATIVE_TOL * scale {
        return Err(FracError::CumulativeMismatch { deviation });
    }
    let deriv = derivative_system(spline, 1)?;
    HistoSolution::from_system(
        deriv,
        hist,
        Diagnostics {
            solver: "spline",
            y0: Some(kv[0]),
            y_n: kv.last().copied(),
            ..Default::default()
        },
    )
}

/// Check of an α-fractal histopolant `q_i = g∘L_i - α_i b` built from an
/// externally supplied histopolant `g` and base `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaFractalCheck {
    /// `∫_{I_i} g - h_i f_i`
    pub g_residuals: Vec<f64>,
    /// `∫_I b - Σ h_j f_j`
    pub base_residual: f64,
    pub solution: HistoSolution,
}

pub fn check_alpha_fractal(
    g: &PiecewisePolynomial,
    base: &PiecewisePolynomial,
    hist: &Histogram,
    scales: &ScaleFactors,
    continuous: bool,
) -> Result<AlphaFractalCheck> {
    let partition = hist.partition();
    let knots = partition.knots();
    let targets = hist.targets();
    let g_residuals = (0..partition.len())
        .map(|i| Ok(g.restrict(knots[i], knots[i + 1])?.integral() - targets[i]))
        .collect::<Result<Vec<_>>>()?;
    let base_residual = base.integral() - hist.total();
    let sys = build_alpha_fractal(g, base, partition, scales, continuous)?;
    let solution = HistoSolution::from_system(
        sys,
        hist,
        Diagnostics {
            solver: "alpha_fractal",
            ..Default::default()
        },
    )?;
    Ok(AlphaFractalCheck {
        g_residuals,
        base_residual,
        solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::make_partition;
    use crate::validate::validate;

    fn half() -> Partition {
        make_partition(&[0.0, 0.5, 1.0]).unwrap()
    }

    fn example() -> Histogram {
        Histogram::new(half(), vec![2.0, 3.0]).unwrap()
    }

    fn lin(slope: f64, intercept: f64) -> PiecewisePolynomial {
        PiecewisePolynomial::single(Polynomial::linear(slope, intercept), 0.0, 1.0).unwrap()
    }

    #[test]
    fn histogram_basics() {
        let h = example();
        assert_eq!(h.targets(), vec![1.0, 1.5]);
        assert_eq!(h.total(), 2.5);
        assert!(Histogram::new(half(), vec![1.0]).is_err());
    }

    #[test]
    fn offsets_reproduce_worked_example() {
        let s = solve_offsets(
            &half(),
            &example(),
            &ScaleFactors::uniform(0.5, 2).unwrap(),
            &[1.0, 2.0],
        )
        .unwrap();
        let sys = s.system.as_ref().unwrap();
        assert_eq!(sys.q()[0].pieces()[0].coeffs(), &[0.25, 1.0]);
        assert_eq!(sys.q()[1].pieces()[0].coeffs(), &[0.75, 2.0]);
        assert!(s.feasible);
        assert!((s.areas[0] - 1.0).abs() < 1e-12 && (s.areas[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn zero_scales_give_step_function() {
        let s = solve_offsets(
            &half(),
            &example(),
            &ScaleFactors::uniform(0.0, 2).unwrap(),
            &[0.0, 0.0],
        )
        .unwrap();
        let sys = s.system.unwrap();
        assert!((sys.q()[0].eval(0.3) - 2.0).abs() < 1e-15);
        assert!((sys.q()[1].eval(0.3) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn scales_invert_the_example() {
        let s = solve_scales(&half(), &example(), &[lin(1.0, 0.25), lin(2.0, 0.75)]).unwrap();
        assert!(s.feasible);
        assert!((s.alpha[0] - 0.5).abs() < 1e-15 && (s.alpha[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn infeasible_scales() {
        let hist = Histogram::new(half(), vec![10.0, 0.1]).unwrap();
        let s = solve_scales(&half(), &hist, &[lin(0.0, 0.0), lin(0.0, 0.0)]).unwrap();
        assert!(!s.feasible && s.system.is_none());
        assert!((s.alpha[0] - 5.0 / 2.525).abs() < 1e-12);
        let zero = Histogram::new(half(), vec![1.0, -1.0]).unwrap();
        assert!(matches!(
            solve_scales(&half(), &zero, &[lin(0.0, 0.0), lin(0.0, 0.0)]),
            Err(FracError::ZeroTotalArea)
        ));
    }

    #[test]
    fn continuous_worked_example() {
        let s = solve_continuous(&half(), &example(), &ScaleFactors::uniform(0.5, 2).unwrap(), 0.0)
            .unwrap();
        let sys = s.system.as_ref().unwrap();
        let c0 = sys.q()[0].pieces()[0].coeffs().to_vec();
        let c1 = sys.q()[1].pieces()[0].coeffs().to_vec();
        assert!((c0[1] - 1.5).abs() < 1e-12 && c0.first().unwrap().abs() < 1e-12);
        assert!((c1[1] + 1.5).abs() < 1e-12 && (c1[0] - 2.5).abs() < 1e-12);
        assert!((s.diagnostics.y_n.unwrap() - 2.0).abs() < 1e-12);
        assert!(validate(sys, 1e-10).max_join_residual() <= 1e-10);
        assert!(sys.variant().is_continuous());
        assert!(s.max_residual() < 1e-12);
    }

    #[test]
    fn constant_histogram_continuous() {
        let hist = Histogram::new(half(), vec![4.0, 4.0]).unwrap();
        let s = solve_continuous(&half(), &hist, &ScaleFactors::uniform(0.0, 2).unwrap(), 4.0)
            .unwrap();
        let sys = s.system.unwrap();
        for q in sys.q() {
            for x in [0.0, 0.4, 1.0] {
                assert!((q.eval(x) - 4.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cumulative() {
        let d = cumulative_data(&example(), 0.0).unwrap();
        assert_eq!(d.points(), &[(0.0, 0.0), (0.5, 1.0), (1.0, 2.5)]);
        let shifted = cumulative_data(&example(), 3.0).unwrap();
        for (a, b) in d.ys().iter().zip(shifted.ys()) {
            assert_eq!(a + 3.0, b);
        }
    }

    fn spline(alpha: f64) -> FractalSystem {
        // h(x) = 1.5x + x^2 through (0,0), (1/2,1), (1,5/2); the base adds a
        // bump with zero value and slope at both ends
        let h = PiecewisePolynomial::single(Polynomial::new(vec![0.0, 1.5, 1.0]), 0.0, 1.0).unwrap();
        let bump = Polynomial::new(vec![0.0, 0.0, 1.0, -2.0, 1.0]).scale(0.7);
        let base =
            PiecewisePolynomial::single(h.pieces()[0].add(&bump), 0.0, 1.0).unwrap();
        build_alpha_fractal(&h, &base, &half(), &ScaleFactors::uniform(alpha, 2).unwrap(), true)
            .unwrap()
    }

    #[test]
    fn histospline_example() {
        let s = histospline(&spline(0.2), &example()).unwrap();
        assert!(s.alpha.iter().all(|a| (a - 0.4).abs() < 1e-15));
        assert!(s.max_residual() <= 1e-8);
        assert!(s.feasible);
        // with zero scales the histospline is h' itself
        let s = histospline(&spline(0.0), &example()).unwrap();
        let q = &s.system.unwrap();
        // q_1(x) = h'(x/2)
        assert!((q.q()[0].eval(0.5) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn histospline_rejects_wrong_data() {
        let hist = Histogram::new(half(), vec![2.0, 4.0]).unwrap();
        assert!(matches!(
            histospline(&spline(0.2), &hist),
            Err(FracError::CumulativeMismatch { .. })
        ));
        assert!(matches!(
            histospline(&spline(0.6), &example()),
            Err(FracError::DerivativeScaleViolation { .. })
        ));
    }

    #[test]
    fn alpha_fractal_check() {
        // g = step function of the histogram, b = constant with the same total
        let g = PiecewisePolynomial::new(
            vec![0.0, 0.5, 1.0],
            vec![Polynomial::constant(2.0), Polynomial::constant(3.0)],
        )
        .unwrap();
        let b = PiecewisePolynomial::single(Polynomial::constant(2.5), 0.0, 1.0).unwrap();
        let c = check_alpha_fractal(&g, &b, &example(), &ScaleFactors::uniform(0.3, 2).unwrap(), false)
            .unwrap();
        assert!(c.g_residuals.iter().all(|r| r.abs() < 1e-15));
        assert!(c.base_residual.abs() < 1e-15);
        assert!(c.solution.max_residual() < 1e-12);
    }
}
