//! Address-aligned sample grids, the Read–Bajraktarević operator on them,
//! and collage bounds.
//!
//! A depth-`k` grid holds `f` at every point `L_{σ_1} ∘ … ∘ L_{σ_k}(x_m)`.
//! Each row carries a code of length `k + 2`: the cell address `σ` followed
//! by two digits naming the knot inside the cell (`m+1, 1` for `x_m`, `m < N`,
//! and `N, N` for the right end). Dropping the first digit and repeating the
//! last yields the row's parent, so `f(row) = α_{σ_1} f(parent) + q_{σ_1}(parent.x)`
//! holds exactly on the grid.

use std::collections::HashMap;

use crate::error::{FracError, Result};
use crate::eval::{row_cap, sup_bound, Address};
use crate::system::{FractalSystem, DEFAULT_TOL};
use crate::validate::validate;

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRow {
    pub x: f64,
    pub value: f64,
    pub address: Address,
    /// Left-hand value at a cell junction of a discontinuous system.
    pub left_limit: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    rows: Vec<SampleRow>,
    depth: u32,
    duplicates_allowed: bool,
}

impl SampleSet {
    pub fn rows(&self) -> &[SampleRow] {
        &self.rows
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn duplicates_allowed(&self) -> bool {
        self.duplicates_allowed
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.x).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }

    /// Same grid carrying other values, e.g. a candidate function.
    pub fn with_values(&self, values: &[f64]) -> Result<Self> {
        if values.len() != self.rows.len() {
            return Err(FracError::GridMismatch(format!(
                "{} values for {} rows",
                values.len(),
                self.rows.len()
            )));
        }
        let mut out = self.clone();
        for (row, &v) in out.rows.iter_mut().zip(values) {
            row.value = v;
        }
        Ok(out)
    }

    /// Same grid with values `g(x)`.
    pub fn map_values(&self, g: impl Fn(&SampleRow) -> f64) -> Self {
        let mut out = self.clone();
        for row in out.rows.iter_mut() {
            row.value = g(row);
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| (a.value - b.value).abs())
            .fold(0.0, f64::max)
    }

    /// Distance from `y` to the band spanned by the grid values on the
    /// bracket `[x_lo, x_hi]` of adjacent abscissae containing `x`
    /// (duplicates at either end included).
    pub fn band_gap(&self, x: f64, y: f64) -> f64 {
        let n = self.rows.len();
        let k = self.rows.partition_point(|r| r.x < x);
        let (lo_x, hi_x) = if k < n && self.rows[k].x == x {
            (x, x)
        } else {
            let lo = self.rows[k.saturating_sub(1)].x;
            let hi = self.rows[k.min(n - 1)].x;
            (lo, hi)
        };
        let start = self.rows.partition_point(|r| r.x < lo_x);
        let (mut vmin, mut vmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for r in self.rows[start..].iter().take_while(|r| r.x <= hi_x) {
            vmin = vmin.min(r.value);
            vmax = vmax.max(r.value);
        }
        if y < vmin {
            vmin - y
        } else if y > vmax {
            y - vmax
        } else {
            0.0
        }
    }
}

fn has_jumps(sys: &FractalSystem) -> bool {
    validate(sys, DEFAULT_TOL).max_join_residual() > DEFAULT_TOL
}

/// Row count of a depth-`k` grid before duplicates.
pub fn grid_rows(n: usize, depth: u32) -> Option<u128> {
    (n as u128)
        .checked_pow(depth)
        .and_then(|c| c.checked_mul(n as u128))
        .map(|c| c + 1)
}

/// Exact samples of `f` on the depth-`k` grid, ordered by abscissa.
///
/// Values come from forward recursion starting at the knot values. For
/// systems with jumps at the internal knots, every cell junction carries a
/// left-limit row immediately before the right-hand row.
pub fn sample_grid(sys: &FractalSystem, depth: u32) -> Result<SampleSet> {
    let n = sys.n();
    let cap = row_cap();
    let rows_needed = grid_rows(n, depth).unwrap_or(u128::MAX);
    if rows_needed > cap as u128 {
        return Err(FracError::DepthTooLarge {
            depth,
            rows: rows_needed,
            cap,
        });
    }
    let jumps = has_jumps(sys);
    let p = sys.partition();
    let kv = sys.knot_values();
    let last = (n - 1) as u16;
    let mut rows: Vec<SampleRow> = (0..=n)
        .map(|m| SampleRow {
            x: p.knots()[m],
            value: kv[m],
            address: if m < n {
                Address::new(vec![m as u16, 0])
            } else {
                Address::new(vec![last, last])
            },
            left_limit: false,
        })
        .collect();
    for _ in 0..depth {
        let prev = std::mem::take(&mut rows);
        let plen = prev.len();
        rows.reserve(n * plen);
        for i in 0..n {
            let alpha = sys.alpha()[i];
            let q = &sys.q()[i];
            for (r, row) in prev.iter().enumerate() {
                let is_end = r + 1 == plen;
                if is_end && i + 1 < n && !jumps {
                    continue;
                }
                let qv = if row.left_limit || is_end {
                    q.eval_left(row.x)
                } else {
                    q.eval(row.x)
                };
                let mut digits = Vec::with_capacity(row.address.len() + 1);
                digits.push(i as u16);
                digits.extend_from_slice(row.address.digits());
                rows.push(SampleRow {
                    x: p.map(i, row.x),
                    value: alpha * row.value + qv,
                    address: Address::new(digits),
                    left_limit: row.left_limit || (is_end && i + 1 < n),
                });
            }
        }
        // duplicate abscissae must coincide exactly
        for k in 0..rows.len().saturating_sub(1) {
            if rows[k].left_limit {
                rows[k].x = rows[k + 1].x;
            }
        }
    }
    Ok(SampleSet {
        rows,
        depth,
        duplicates_allowed: jumps,
    })
}

/// Index of each row's parent inside the same grid.
pub fn parent_indices(set: &SampleSet) -> Result<Vec<usize>> {
    if set.depth == 0 {
        return Err(FracError::GridMismatch(
            "a depth-0 grid has no parent rows".into(),
        ));
    }
    let index: HashMap<&[u16], usize> = set
        .rows
        .iter()
        .enumerate()
        .map(|(k, r)| (r.address.digits(), k))
        .collect();
    let mut key = Vec::new();
    set.rows
        .iter()
        .map(|r| {
            let d = r.address.digits();
            key.clear();
            key.extend_from_slice(&d[1..]);
            key.push(*d.last().unwrap());
            index.get(key.as_slice()).copied().ok_or_else(|| {
                FracError::GridMismatch(format!("row {} has no parent", r.address))
            })
        })
        .collect()
}

fn check_aligned(sys: &FractalSystem, set: &SampleSet) -> Result<SampleSet> {
    let reference = sample_grid(sys, set.depth)?;
    if reference.len() != set.len() {
        return Err(FracError::GridMismatch(format!(
            "expected {} rows at depth {}, got {}",
            reference.len(),
            set.depth,
            set.len()
        )));
    }
    let tol = 1e-12 * sys.partition().width().max(1.0);
    for (a, b) in reference.rows.iter().zip(&set.rows) {
        if a.address != b.address || (a.x - b.x).abs() > tol {
            return Err(FracError::GridMismatch(format!(
                "row {} at x = {} does not match grid point {} at x = {}",
                b.address, b.x, a.address, a.x
            )));
        }
    }
    Ok(reference)
}

fn apply_with_parents(sys: &FractalSystem, set: &SampleSet, parents: &[usize]) -> SampleSet {
    let rows = set
        .rows
        .iter()
        .zip(parents)
        .map(|(row, &p)| {
            let parent = &set.rows[p];
            let i = row.address.first().unwrap();
            let is_end = parent.x >= sys.partition().hi();
            let qv = if parent.left_limit || is_end {
                sys.q()[i].eval_left(parent.x)
            } else {
                sys.q_eval(i, parent.x)
            };
            SampleRow {
                value: sys.alpha()[i] * parent.value + qv,
                ..row.clone()
            }
        })
        .collect();
    SampleSet {
        rows,
        depth: set.depth,
        duplicates_allowed: set.duplicates_allowed,
    }
}

/// Read–Bajraktarević operator on a grid function:
/// `(TΦ)(L_i(t)) = α_i Φ(t) + q_i(t)`.
pub fn rb_apply(sys: &FractalSystem, set: &SampleSet) -> Result<SampleSet> {
    check_aligned(sys, set)?;
    let parents = parent_indices(set)?;
    Ok(apply_with_parents(sys, set, &parents))
}

/// `n`-fold application of [`rb_apply`].
pub fn rb_iterate(sys: &FractalSystem, set: &SampleSet, n: usize) -> Result<SampleSet> {
    check_aligned(sys, set)?;
    let parents = parent_indices(set)?;
    let mut cur = set.clone();
    for _ in 0..n {
        cur = apply_with_parents(sys, &cur, &parents);
    }
    Ok(cur)
}

/// `max |Φ - TΦ|` over the grid.
pub fn grid_residual(sys: &FractalSystem, set: &SampleSet) -> Result<f64> {
    Ok(set.max_abs_diff(&rb_apply(sys, set)?))
}

/// Residual of the self-referential equation on exact depth-`k` samples.
pub fn self_residual(sys: &FractalSystem, depth: u32) -> Result<f64> {
    grid_residual(sys, &sample_grid(sys, depth.max(1))?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollageBound {
    pub collage_dist: f64,
    /// `collage_dist / (1 - ‖α‖_∞)`, bounding `‖Φ - f‖_∞` on the grid.
    pub fixed_point_bound: f64,
}

/// Collage distance of a candidate sampled on the address grid.
pub fn collage_bound(sys: &FractalSystem, candidate: &SampleSet) -> Result<CollageBound> {
    let collage_dist = grid_residual(sys, candidate)?;
    Ok(CollageBound {
        collage_dist,
        fixed_point_bound: collage_dist / (1.0 - sys.scales().inf_norm()),
    })
}

/// Vertical tolerance certified for points of the graph closure around a
/// depth-`k` grid of a system with affine maps: `2 B ‖α‖_∞^k`.
pub fn graph_tolerance(sys: &FractalSystem, depth: u32) -> f64 {
    2.0 * sup_bound(sys) * sys.scales().inf_norm().powi(depth as i32)
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
    fn depth_zero_is_knots() {
        let g = sample_grid(&histopolant(), 0).unwrap();
        assert_eq!(g.xs(), vec![0.0, 0.5, 1.0]);
        assert_eq!(g.values(), vec![0.5, 1.0, 5.5]);
    }

    #[test]
    fn depth_one_abscissae() {
        assert_eq!(
            sample_grid(&fif(0.75), 1).unwrap().xs(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        let g = sample_grid(&histopolant(), 1).unwrap();
        assert_eq!(g.xs(), vec![0.0, 0.25, 0.5, 0.5, 0.75, 1.0]);
        // left value before right value
        assert!(g.rows()[2].left_limit);
        assert!((g.rows()[2].value - 4.0).abs() < 1e-12);
        assert!((g.rows()[3].value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_rows_satisfy_recursion() {
        for sys in [fif(0.75), histopolant()] {
            let g = sample_grid(&sys, 8).unwrap();
            assert!(grid_residual(&sys, &g).unwrap() <= 1e-12);
            assert!(g.rows().windows(2).all(|w| w[0].x <= w[1].x));
        }
    }

    #[test]
    fn grid_matches_eval_at() {
        let sys = fif(0.75);
        let g = sample_grid(&sys, 6).unwrap();
        for row in g.rows() {
            let e = crate::eval::eval_at(&sys, row.x, 40).unwrap();
            assert!((e.value - row.value).abs() <= e.error_bound + 1e-12);
        }
    }

    #[test]
    fn depth_cap() {
        assert!(matches!(
            sample_grid(&fif(0.5), 40),
            Err(FracError::DepthTooLarge { .. })
        ));
    }

    #[test]
    fn perturbed_sample_residual() {
        let sys = fif(0.75);
        let g = sample_grid(&sys, 6).unwrap();
        let mut v = g.values();
        v[17] += 0.01;
        let r = grid_residual(&sys, &g.with_values(&v).unwrap()).unwrap();
        assert!(r >= 0.005 * (1.0 - 0.75));
    }

    #[test]
    fn self_residual_small() {
        assert!(self_residual(&fif(0.75), 10).unwrap() <= 1e-10);
        assert!(self_residual(&histopolant(), 10).unwrap() <= 1e-10);
        assert_eq!(self_residual(&fif(0.0).scaled_q(0.0).unwrap(), 5).unwrap(), 0.0);
    }

    #[test]
    fn collage_of_exact_samples() {
        let sys = histopolant();
        let g = sample_grid(&sys, 10).unwrap();
        let c = collage_bound(&sys, &g).unwrap();
        assert!(c.collage_dist <= 1e-12);
    }

    #[test]
    fn collage_of_shifted_samples() {
        let sys = fif(0.6);
        let g = sample_grid(&sys, 8).unwrap();
        let shifted = g.map_values(|r| r.value + 0.3);
        let c = collage_bound(&sys, &shifted).unwrap();
        assert!(c.collage_dist <= 0.3 * 1.6 + 1e-12);
        assert!(c.fixed_point_bound >= 0.3 - 1e-12);
    }

    #[test]
    fn collage_rejects_foreign_grid() {
        let sys = fif(0.5);
        let g = sample_grid(&histopolant(), 4).unwrap();
        assert!(matches!(
            collage_bound(&sys, &g),
            Err(FracError::GridMismatch(_))
        ));
    }

    #[test]
    fn band_gap_brackets() {
        let g = sample_grid(&fif(0.0), 1).unwrap();
        // polyline: values 0, 0.25, 0.5, 0.25, 0
        assert_eq!(g.band_gap(0.1, 0.1), 0.0);
        assert!((g.band_gap(0.1, 0.5) - 0.25).abs() < 1e-15);
        assert_eq!(g.band_gap(0.5, 0.5), 0.0);
    }
}
