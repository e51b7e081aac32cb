//! Dense univariate polynomials and piecewise polynomials in a global variable.
//!
//! Every map `q_i`, the profile `Q` and the height/base functions of an
//! alpha-fractal are represented as [`PiecewisePolynomial`]. Pieces are
//! selected with the half-open convention `[t_k, t_{k+1})`, the last piece
//! being closed.

use crate::error::{FracError, Result};

/// Relative tolerance used when merging nearly coincident breakpoints.
const BREAKPOINT_TOL: f64 = 1e-12;

/// Polynomial with coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::new(vec![0.0])
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `slope * x + intercept`
    pub fn linear(slope: f64, intercept: f64) -> Self {
        Self::new(vec![intercept, slope])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn nth_derivative(&self, r: u32) -> Self {
        (0..r).fold(self.clone(), |p, _| p.derivative())
    }

    /// Antiderivative vanishing at zero.
    pub fn antiderivative(&self) -> Self {
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(0.0);
        c.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, &v)| v / (k as f64 + 1.0)),
        );
        Self::new(c)
    }

    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        let anti = self.antiderivative();
        anti.eval(b) - anti.eval(a)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * factor).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(0.0)
                        + other.coeffs.get(k).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Multiply by `x^m`.
    pub fn shift_up(&self, m: usize) -> Self {
        let mut c = vec![0.0; m];
        c.extend_from_slice(&self.coeffs);
        Self::new(c)
    }

    /// Returns `x -> p(scale * x + shift)`.
    pub fn compose_affine(&self, scale: f64, shift: f64) -> Self {
        let inner = Self::linear(scale, shift);
        self.coeffs
            .iter()
            .rev()
            .fold(Self::zero(), |acc, &c| acc.mul(&inner).add(&Self::constant(c)))
    }

    /// Real roots inside `[lo, hi]`, sorted and deduplicated.
    ///
    /// Roots of the derivative split the interval into monotone segments and
    /// each sign change is then refined by bisection.
    pub fn real_roots_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        if self.is_zero() || hi < lo {
            return Vec::new();
        }
        match self.degree() {
            0 => Vec::new(),
            1 => {
                let r = -self.coeffs[0] / self.coeffs[1];
                if r >= lo && r <= hi {
                    vec![r]
                } else {
                    Vec::new()
                }
            }
            _ => {
                let mut marks = vec![lo];
                marks.extend(self.derivative().real_roots_in(lo, hi));
                marks.push(hi);
                let mut roots: Vec<f64> = Vec::new();
                for w in marks.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    let (fa, fb) = (self.eval(a), self.eval(b));
                    if fa == 0.0 {
                        roots.push(a);
                    } else if fb == 0.0 {
                        roots.push(b);
                    } else if fa.signum() != fb.signum() {
                        roots.push(bisect(|x| self.eval(x), a, b, fa));
                    }
                }
                roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
                roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
                roots
            }
        }
    }

    /// `max |p(x)|` over `[lo, hi]`, taken over endpoints and critical points.
    pub fn max_abs_on(&self, lo: f64, hi: f64) -> f64 {
        let mut m = self.eval(lo).abs().max(self.eval(hi).abs());
        for c in self.derivative().real_roots_in(lo, hi) {
            m = m.max(self.eval(c).abs());
        }
        m
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Piecewise polynomial over `[breakpoints[0], breakpoints[last]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePolynomial {
    breakpoints: Vec<f64>,
    pieces: Vec<Polynomial>,
}

impl PiecewisePolynomial {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Polynomial>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(FracError::InvalidPolynomial(
                "need at least two breakpoints".into(),
            ));
        }
        if pieces.len() != breakpoints.len() - 1 {
            return Err(FracError::LengthMismatch {
                what: "polynomial pieces",
                expected: breakpoints.len() - 1,
                got: pieces.len(),
            });
        }
        if breakpoints.iter().any(|b| !b.is_finite())
            || pieces.iter().flat_map(|p| p.coeffs()).any(|c| !c.is_finite())
        {
            return Err(FracError::InvalidPolynomial("non-finite value".into()));
        }
        if let Some(k) = breakpoints.windows(2).position(|w| w[1] <= w[0]) {
            return Err(FracError::InvalidPolynomial(format!(
                "breakpoints not strictly increasing at index {}",
                k + 1
            )));
        }
        Ok(Self { breakpoints, pieces })
    }

    /// From raw coefficient lists, as stored in system descriptors.
    pub fn from_coeffs(breakpoints: Vec<f64>, pieces: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(breakpoints, pieces.into_iter().map(Polynomial::new).collect())
    }

    pub fn single(poly: Polynomial, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo, hi], vec![poly])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Polynomial] {
        &self.pieces
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breakpoints[0], *self.breakpoints.last().unwrap())
    }

    pub fn max_degree(&self) -> usize {
        self.pieces.iter().map(Polynomial::degree).max().unwrap_or(0)
    }

    /// Index of the piece owning `x`; points outside the domain are clamped
    /// to the first or last piece.
    pub fn piece_index(&self, x: f64) -> usize {
        let n = self.pieces.len();
        // number of interior breakpoints <= x
        let k = self.breakpoints[1..n].partition_point(|&b| b <= x);
        k.min(n - 1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.pieces[self.piece_index(x)].eval(x)
    }

    /// Value from the left at `x` (uses the piece ending at `x`).
    pub fn eval_left(&self, x: f64) -> f64 {
        let n = self.pieces.len();
        let k = self.breakpoints[1..n].partition_point(|&b| b < x);
        self.pieces[k.min(n - 1)].eval(x)
    }

    pub fn integral(&self) -> f64 {
        self.pieces
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(p, w)| p.integrate(w[0], w[1]))
            .sum()
    }

    /// `∫ x^m p(x) dx` over the whole domain.
    pub fn moment(&self, m: usize) -> f64 {
        self.pieces
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(p, w)| p.shift_up(m).integrate(w[0], w[1]))
            .sum()
    }

    pub fn map_pieces(&self, f: impl Fn(&Polynomial) -> Polynomial) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(f).collect(),
        }
    }

    pub fn derivative(&self) -> Self {
        self.map_pieces(Polynomial::derivative)
    }

    pub fn nth_derivative(&self, r: u32) -> Self {
        self.map_pieces(|p| p.nth_derivative(r))
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map_pieces(|p| p.scale(factor))
    }

    /// `sup |p|` over the domain, computed from critical points of each piece.
    pub fn sup_abs(&self) -> f64 {
        self.pieces
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(p, w)| p.max_abs_on(w[0], w[1]))
            .fold(0.0, f64::max)
    }

    /// Returns `x -> p(scale * x + shift)` on the preimage of the domain.
    /// `scale` must be positive.
    pub fn compose_affine(&self, scale: f64, shift: f64) -> Self {
        assert!(scale > 0.0, "compose_affine needs an increasing map");
        Self {
            breakpoints: self
                .breakpoints
                .iter()
                .map(|b| (b - shift) / scale)
                .collect(),
            pieces: self
                .pieces
                .iter()
                .map(|p| p.compose_affine(scale, shift))
                .collect(),
        }
    }

    /// Restriction to `[lo, hi]`, which must lie inside the domain.
    pub fn restrict(&self, lo: f64, hi: f64) -> Result<Self> {
        let (d0, d1) = self.domain();
        let tol = BREAKPOINT_TOL * (d1 - d0).abs().max(1.0);
        if lo < d0 - tol || hi > d1 + tol || hi <= lo {
            return Err(FracError::DomainMismatch(format!(
                "cannot restrict [{d0}, {d1}] to [{lo}, {hi}]"
            )));
        }
        let mut bps = vec![lo];
        let mut pieces = Vec::new();
        let first = self.piece_index(lo);
        let n = self.pieces.len();
        for k in first..n {
            let right = self.breakpoints[k + 1];
            if k + 1 < n && right < hi - tol {
                if right > lo + tol {
                    bps.push(right);
                    pieces.push(self.pieces[k].clone());
                }
            } else {
                bps.push(hi);
                pieces.push(self.pieces[k].clone());
                break;
            }
        }
        Self::new(bps, pieces)
    }

    /// Sum of two piecewise polynomials on a common domain, on the merged
    /// breakpoint set.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let (a0, a1) = self.domain();
        let (b0, b1) = other.domain();
        let tol = BREAKPOINT_TOL * (a1 - a0).abs().max(1.0);
        if (a0 - b0).abs() > tol || (a1 - b1).abs() > tol {
            return Err(FracError::DomainMismatch(format!(
                "[{a0}, {a1}] vs [{b0}, {b1}]"
            )));
        }
        let mut merged: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(other.breakpoints.iter())
            .copied()
            .collect();
        merged.sort_by(|x, y| x.partial_cmp(y).unwrap());
        merged.dedup_by(|x, y| (*x - *y).abs() <= tol);
        *merged.first_mut().unwrap() = a0;
        *merged.last_mut().unwrap() = a1;
        let pieces = merged
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                self.pieces[self.piece_index(mid)].add(&other.pieces[other.piece_index(mid)])
            })
            .collect();
        Self::new(merged, pieces)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Join piecewise polynomials on adjacent domains into one.
    pub fn concat(parts: &[Self]) -> Result<Self> {
        let mut bps: Vec<f64> = Vec::new();
        let mut pieces = Vec::new();
        for part in parts {
            if let Some(&last) = bps.last() {
                let start = part.breakpoints[0];
                if (start - last).abs() > BREAKPOINT_TOL * last.abs().max(1.0) {
                    return Err(FracError::DomainMismatch(format!(
                        "gap between {last} and {start}"
                    )));
                }
                bps.extend_from_slice(&part.breakpoints[1..]);
            } else {
                bps.extend_from_slice(&part.breakpoints);
            }
            pieces.extend(part.pieces.iter().cloned());
        }
        Self::new(bps, pieces)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_and_calculus() {
        let p = Polynomial::new(vec![1.0, -2.0, 3.0]);
        assert_eq!(p.eval(2.0), 9.0);
        assert_eq!(p.derivative().coeffs(), &[-2.0, 6.0]);
        assert!((p.integrate(0.0, 1.0) - (1.0 - 1.0 + 1.0)).abs() < 1e-15);
        assert_eq!(Polynomial::new(vec![3.0, 0.0, 0.0]).degree(), 0);
    }

    #[test]
    fn affine_composition_matches_pointwise() {
        let p = Polynomial::new(vec![0.5, -1.0, 2.0, 0.25]);
        let q = p.compose_affine(0.5, 0.25);
        for &x in &[-1.0, 0.0, 0.3, 1.7] {
            assert!((q.eval(x) - p.eval(0.5 * x + 0.25)).abs() < 1e-13);
        }
    }

    #[test]
    fn roots_of_cubic() {
        // (x - 0.2)(x - 0.5)(x - 0.9)
        let p = Polynomial::linear(1.0, -0.2)
            .mul(&Polynomial::linear(1.0, -0.5))
            .mul(&Polynomial::linear(1.0, -0.9));
        let r = p.real_roots_in(0.0, 1.0);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([0.2, 0.5, 0.9]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(p.real_roots_in(0.95, 2.0).is_empty());
    }

    #[test]
    fn sup_uses_interior_extremum() {
        // 4x(1-x) peaks at 1 in the middle
        let p = Polynomial::new(vec![0.0, 4.0, -4.0]);
        assert!((p.max_abs_on(0.0, 1.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn piece_selection_is_half_open() {
        let pp = PiecewisePolynomial::from_coeffs(
            vec![0.0, 0.5, 1.0],
            vec![vec![1.0], vec![2.0]],
        )
        .unwrap();
        assert_eq!(pp.eval(0.0), 1.0);
        assert_eq!(pp.eval(0.5), 2.0);
        assert_eq!(pp.eval_left(0.5), 1.0);
        assert_eq!(pp.eval(1.0), 2.0);
        assert!((pp.integral() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn restrict_and_add() {
        let pp = PiecewisePolynomial::from_coeffs(
            vec![0.0, 0.5, 1.0],
            vec![vec![0.0, 1.0], vec![1.0, -1.0]],
        )
        .unwrap();
        let r = pp.restrict(0.25, 0.75).unwrap();
        assert_eq!(r.breakpoints(), &[0.25, 0.5, 0.75]);
        let whole = PiecewisePolynomial::single(Polynomial::constant(1.0), 0.0, 1.0).unwrap();
        let s = pp.add(&whole).unwrap();
        assert_eq!(s.eval(0.25), 1.25);
        assert_eq!(s.eval(0.75), 1.25);
        let r2 = pp.restrict(0.5, 1.0).unwrap();
        assert_eq!(r2.pieces().len(), 1);
    }

    #[test]
    fn rejects_bad_breakpoints() {
        assert!(PiecewisePolynomial::from_coeffs(vec![0.0, 0.0], vec![vec![1.0]]).is_err());
        assert!(PiecewisePolynomial::from_coeffs(vec![0.0, 1.0], vec![]).is_err());
    }
}
