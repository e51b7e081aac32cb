//! Affine iterated function systems on an interval.
//!
//! A [`FractalSystem`] holds the maps
//! `W_i(x, y) = (a_i x + b_i, alpha_i y + q_i(x))`, one per subinterval of a
//! [`Partition`]. Its attractor is the graph of the fractal function `f`
//! satisfying `f(L_i(x)) = alpha_i f(x) + q_i(x)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FracError, Result};
use crate::poly::{PiecewisePolynomial, Polynomial};
use crate::validate::{self, Variant};

/// Residual tolerance used for structural checks and default classification.
pub const DEFAULT_TOL: f64 = 1e-9;

const GEOMETRY_TOL: f64 = 1e-12;

/// Strictly increasing knots `x_0 < ... < x_N` with `N >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    knots: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    h: Vec<f64>,
}

impl Partition {
    pub fn new(knots: Vec<f64>) -> Result<Self> {
        if knots.len() < 3 {
            return Err(FracError::TooFewKnots { got: knots.len() });
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(FracError::BadData("non-finite knot".into()));
        }
        if let Some(k) = knots.windows(2).position(|w| w[1] <= w[0]) {
            return Err(FracError::NonMonotonicKnots { index: k + 1 });
        }
        let x0 = knots[0];
        let xn = *knots.last().unwrap();
        let width = xn - x0;
        let mut a = Vec::with_capacity(knots.len() - 1);
        let mut b = Vec::with_capacity(knots.len() - 1);
        let mut h = Vec::with_capacity(knots.len() - 1);
        for w in knots.windows(2) {
            a.push((w[1] - w[0]) / width);
            b.push((xn * w[0] - x0 * w[1]) / width);
            h.push(w[1] - w[0]);
        }
        Ok(Self { knots, a, b, h })
    }

    /// Number of subintervals `N`.
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn lo(&self) -> f64 {
        self.knots[0]
    }

    pub fn hi(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    pub fn width(&self) -> f64 {
        self.hi() - self.lo()
    }

    /// `L_i(x) = a_i x + b_i` (0-based `i`).
    pub fn map(&self, i: usize, x: f64) -> f64 {
        self.a[i] * x + self.b[i]
    }

    pub fn inverse(&self, i: usize, x: f64) -> f64 {
        (x - self.b[i]) / self.a[i]
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo() && x <= self.hi()
    }

    /// Subinterval owning `x` under the half-open convention (last closed).
    pub fn subinterval_of(&self, x: f64) -> Result<usize> {
        if !self.contains(x) {
            return Err(FracError::OutOfDomain {
                x,
                lo: self.lo(),
                hi: self.hi(),
            });
        }
        let n = self.len();
        Ok(self.knots[1..n].partition_point(|&k| k <= x).min(n - 1))
    }

    /// Equidistant mesh, `a_i = 1/N` up to rounding.
    pub fn is_equidistant(&self, tol: f64) -> bool {
        let target = 1.0 / self.len() as f64;
        self.a.iter().all(|a| (a - target).abs() <= tol)
    }

    pub(crate) fn geometry_tol(&self) -> f64 {
        GEOMETRY_TOL * self.width().max(1.0)
    }
}

/// Vertical scaling factors `alpha_i`, each strictly inside `(-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleFactors {
    alpha: Vec<f64>,
    alpha_inf: f64,
}

impl ScaleFactors {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        for (index, &value) in alpha.iter().enumerate() {
            if !value.is_finite() || value.abs() >= 1.0 {
                return Err(FracError::ScaleOutOfRange { index, value });
            }
        }
        let alpha_inf = alpha.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
        Ok(Self { alpha, alpha_inf })
    }

    pub fn uniform(value: f64, n: usize) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.alpha
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// `max_i |alpha_i|`
    pub fn inf_norm(&self) -> f64 {
        self.alpha_inf
    }
}

/// Interpolation data `(x_i, y_i)` with strictly increasing abscissae.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    points: Vec<(f64, f64)>,
}

impl DataSet {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(FracError::BadData("non-finite data point".into()));
        }
        if let Some(k) = points.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(FracError::BadData(format!(
                "abscissae not strictly increasing at index {}",
                k + 1
            )));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub(crate) fn check_against(&self, partition: &Partition) -> Result<()> {
        if self.len() != partition.knots().len() {
            return Err(FracError::LengthMismatch {
                what: "data points",
                expected: partition.knots().len(),
                got: self.len(),
            });
        }
        let tol = partition.geometry_tol();
        for (k, (&(x, _), &knot)) in self.points.iter().zip(partition.knots()).enumerate() {
            if (x - knot).abs() > tol {
                return Err(FracError::BadData(format!(
                    "data abscissa {x} does not match knot {k} = {knot}"
                )));
            }
        }
        Ok(())
    }
}

/// A validated affine IFS on a mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct FractalSystem {
    partition: Partition,
    scales: ScaleFactors,
    q: Vec<PiecewisePolynomial>,
    data: Option<DataSet>,
    variant: Variant,
    source: String,
}

impl FractalSystem {
    /// Assemble a system from its parts; `data`, when given, is the set the
    /// fixed point is meant to interpolate and drives classification.
    pub fn new(
        partition: Partition,
        scales: ScaleFactors,
        q: Vec<PiecewisePolynomial>,
        data: Option<DataSet>,
        source: impl Into<String>,
    ) -> Result<Self> {
        let n = partition.len();
        if scales.len() != n {
            return Err(FracError::LengthMismatch {
                what: "scale factors",
                expected: n,
                got: scales.len(),
            });
        }
        if q.len() != n {
            return Err(FracError::LengthMismatch {
                what: "q maps",
                expected: n,
                got: q.len(),
            });
        }
        let tol = partition.geometry_tol();
        for (i, qi) in q.iter().enumerate() {
            let (lo, hi) = qi.domain();
            if (lo - partition.lo()).abs() > tol || (hi - partition.hi()).abs() > tol {
                return Err(FracError::DomainMismatch(format!(
                    "q[{i}] is defined on [{lo}, {hi}], expected [{}, {}]",
                    partition.lo(),
                    partition.hi()
                )));
            }
        }
        if let Some(d) = &data {
            d.check_against(&partition)?;
        }
        let mut sys = Self {
            partition,
            scales,
            q,
            data,
            variant: Variant::GeneralBounded,
            source: source.into(),
        };
        sys.variant = validate::validate(&sys, DEFAULT_TOL).variant;
        Ok(sys)
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn scales(&self) -> &ScaleFactors {
        &self.scales
    }

    pub fn alpha(&self) -> &[f64] {
        self.scales.values()
    }

    pub fn q(&self) -> &[PiecewisePolynomial] {
        &self.q
    }

    pub fn data(&self) -> Option<&DataSet> {
        self.data.as_ref()
    }

    /// Classification computed at construction with [`DEFAULT_TOL`].
    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn n(&self) -> usize {
        self.partition.len()
    }

    /// `q_i(x)` with 0-based `i`.
    pub fn q_eval(&self, i: usize, x: f64) -> f64 {
        self.q[i].eval(x)
    }

    /// Fixed-point values at the knots.
    ///
    /// `f(x_0) = q_1(x_0)/(1 - alpha_1)`, `f(x_N) = q_N(x_N)/(1 - alpha_N)`
    /// and each internal knot takes its value from the subinterval on its
    /// right: `f(x_i) = alpha_{i+1} f(x_0) + q_{i+1}(x_0)`.
    pub fn knot_values(&self) -> Vec<f64> {
        let n = self.n();
        let alpha = self.alpha();
        let (x0, xn) = (self.partition.lo(), self.partition.hi());
        let f0 = self.q_eval(0, x0) / (1.0 - alpha[0]);
        let fn_ = self.q_eval(n - 1, xn) / (1.0 - alpha[n - 1]);
        let mut out = Vec::with_capacity(n + 1);
        out.push(f0);
        for i in 1..n {
            out.push(alpha[i] * f0 + self.q_eval(i, x0));
        }
        out.push(fn_);
        out
    }

    /// Same maps with every `q_i` multiplied by `c`.
    pub fn scaled_q(&self, c: f64) -> Result<Self> {
        Self::new(
            self.partition.clone(),
            self.scales.clone(),
            self.q.iter().map(|q| q.scale(c)).collect(),
            None,
            format!("{} scaled by {c}", self.source),
        )
    }
}

/// Coefficients `a_i`, `b_i`, `h_i` of the mesh maps.
pub fn make_partition(knots: &[f64]) -> Result<Partition> {
    Partition::new(knots.to_vec())
}

fn check_scales(scales: &ScaleFactors, n: usize) -> Result<()> {
    if scales.len() != n {
        return Err(FracError::LengthMismatch {
            what: "scale factors",
            expected: n,
            got: scales.len(),
        });
    }
    Ok(())
}

fn data_partition(data: &DataSet) -> Result<Partition> {
    if data.len() < 3 {
        return Err(FracError::BadData(format!(
            "need at least 3 data points, got {}",
            data.len()
        )));
    }
    Partition::new(data.xs())
}

/// Affine fractal interpolation function through `data`.
///
/// Each `q_i(x) = q_i0 x + q_i1` is fixed by the end point conditions
/// `W_i(x_0, y_0) = (x_{i-1}, y_{i-1})` and `W_i(x_N, y_N) = (x_i, y_i)`.
pub fn build_affine_fif(data: &DataSet, scales: &ScaleFactors) -> Result<FractalSystem> {
    let partition = data_partition(data)?;
    let n = partition.len();
    check_scales(scales, n)?;
    let ys = data.ys();
    let (x0, xn) = (partition.lo(), partition.hi());
    let (y0, yn) = (ys[0], ys[n]);
    let w = xn - x0;
    let q = (1..=n)
        .map(|i| {
            let alpha = scales.values()[i - 1];
            let slope = (ys[i] - ys[i - 1]) / w - alpha * (yn - y0) / w;
            let intercept =
                (xn * ys[i - 1] - x0 * ys[i]) / w - alpha * (xn * y0 - x0 * yn) / w;
            PiecewisePolynomial::single(Polynomial::linear(slope, intercept), x0, xn)
        })
        .collect::<Result<Vec<_>>>()?;
    FractalSystem::new(
        partition,
        scales.clone(),
        q,
        Some(data.clone()),
        "affine_fif",
    )
}

/// Data for a continuous ε-approximant: interior ordinates moved by a seeded
/// uniform draw from `[-ε, ε]`, end points kept.
pub fn perturb_data(data: &DataSet, epsilon: f64, seed: u64) -> Result<DataSet> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(FracError::BadData(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let last = data.len() - 1;
    let pts = data
        .points()
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            if i == 0 || i == last || epsilon == 0.0 {
                (x, y)
            } else {
                (x, y + rng.gen_range(-epsilon..=epsilon))
            }
        })
        .collect();
    DataSet::new(pts)
}

/// Alpha-fractal perturbation of `h` with base function `base`:
/// `q_i(x) = h(L_i(x)) - alpha_i base(x)`.
///
/// With `continuous` set, `base` must agree with `h` at both end points.
pub fn build_alpha_fractal(
    h: &PiecewisePolynomial,
    base: &PiecewisePolynomial,
    partition: &Partition,
    scales: &ScaleFactors,
    continuous: bool,
) -> Result<FractalSystem> {
    let n = partition.len();
    check_scales(scales, n)?;
    let tol = partition.geometry_tol();
    for (name, f) in [("h", h), ("base", base)] {
        let (lo, hi) = f.domain();
        if (lo - partition.lo()).abs() > tol || (hi - partition.hi()).abs() > tol {
            return Err(FracError::DomainMismatch(format!(
                "{name} is defined on [{lo}, {hi}], expected [{}, {}]",
                partition.lo(),
                partition.hi()
            )));
        }
    }
    let (x0, xn) = (partition.lo(), partition.hi());
    if continuous {
        let scale = 1.0 + h.sup_abs().max(base.sup_abs());
        for (at, hv, bv) in [
            (x0, h.eval(x0), base.eval(x0)),
            (xn, h.eval_left(xn), base.eval_left(xn)),
        ] {
            if (hv - bv).abs() > DEFAULT_TOL * scale {
                return Err(FracError::EndpointMismatch {
                    at,
                    base: bv,
                    height: hv,
                });
            }
        }
    }
    let knots = partition.knots();
    let q = (0..n)
        .map(|i| {
            let composed = h
                .restrict(knots[i], knots[i + 1])?
                .compose_affine(partition.a()[i], partition.b()[i]);
            // snap the mapped domain onto [x0, xN] exactly
            let mut bps = composed.breakpoints().to_vec();
            bps[0] = x0;
            *bps.last_mut().unwrap() = xn;
            let composed = PiecewisePolynomial::new(bps, composed.pieces().to_vec())?;
            composed.sub(&base.scale(scales.values()[i]))
        })
        .collect::<Result<Vec<_>>>()?;
    let data = if continuous {
        Some(DataSet::new(
            knots
                .iter()
                .enumerate()
                .map(|(k, &x)| (x, if k == n { h.eval_left(x) } else { h.eval(x) }))
                .collect(),
        )?)
    } else {
        None
    };
    FractalSystem::new(partition.clone(), scales.clone(), q, data, "alpha_fractal")
}

/// Bounded fractal function interpolating `data` with jumps allowed at the
/// internal knots.
///
/// `q_i(x_0) = y_{i-1} - alpha_i y_0` for every `i` and
/// `q_N(x_N) = y_N - alpha_N y_N`; the slopes of `q_1..q_{N-1}` come from
/// `free_slopes`. The last entry of `free_slopes` is ignored because `q_N`
/// is pinned at both ends.
pub fn build_interpolatory_discontinuous(
    data: &DataSet,
    scales: &ScaleFactors,
    free_slopes: &[f64],
) -> Result<FractalSystem> {
    let partition = data_partition(data)?;
    let n = partition.len();
    check_scales(scales, n)?;
    if free_slopes.len() != n {
        return Err(FracError::LengthMismatch {
            what: "free slopes",
            expected: n,
            got: free_slopes.len(),
        });
    }
    let ys = data.ys();
    let alpha = scales.values();
    let (x0, xn) = (partition.lo(), partition.hi());
    let mut q = Vec::with_capacity(n);
    for i in 0..n {
        let at_x0 = ys[i] - alpha[i] * ys[0];
        let slope = if i + 1 < n {
            free_slopes[i]
        } else {
            let at_xn = ys[n] - alpha[n - 1] * ys[n];
            (at_xn - at_x0) / (xn - x0)
        };
        q.push(PiecewisePolynomial::single(
            Polynomial::linear(slope, at_x0 - slope * x0),
            x0,
            xn,
        )?);
    }
    FractalSystem::new(
        partition,
        scales.clone(),
        q,
        Some(data.clone()),
        "interpolatory_discontinuous",
    )
}

/// System whose fixed point is `f^(r)` when `f` is `C^r`: scales
/// `alpha_i / a_i^r` and maps `q_i^(r) / a_i^r`.
pub fn derivative_system(sys: &FractalSystem, r: u32) -> Result<FractalSystem> {
    let partition = sys.partition();
    let mut alpha = Vec::with_capacity(sys.n());
    let mut q = Vec::with_capacity(sys.n());
    for (i, (&ai, &al)) in partition.a().iter().zip(sys.alpha()).enumerate() {
        let bound = ai.powi(r as i32);
        if al.abs() >= bound {
            return Err(FracError::DerivativeScaleViolation {
                order: r,
                index: i,
                value: al,
                bound,
            });
        }
        alpha.push(al / bound);
        q.push(sys.q()[i].nth_derivative(r).scale(1.0 / bound));
    }
    FractalSystem::new(
        partition.clone(),
        ScaleFactors::new(alpha)?,
        q,
        None,
        format!("derivative({r}) of {}", sys.source()),
    )
}
