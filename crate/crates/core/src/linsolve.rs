//! Small dense LU solver with partial pivoting.

use crate::error::{FracError, Result};

/// Solution of `A x = b` plus conditioning diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution {
    pub x: Vec<f64>,
    /// Smallest pivot magnitude met during elimination.
    pub min_pivot: f64,
    /// `‖A‖_1 ‖A^{-1}‖_1`.
    pub condition: f64,
}

struct Lu {
    lu: Vec<Vec<f64>>,
    perm: Vec<usize>,
    min_pivot: f64,
}

fn factor(a: &[Vec<f64>]) -> Lu {
    let n = a.len();
    let mut lu = a.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut min_pivot = f64::INFINITY;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| lu[i][k].abs().total_cmp(&lu[j][k].abs()))
            .unwrap();
        lu.swap(k, p);
        perm.swap(k, p);
        let piv = lu[k][k];
        min_pivot = min_pivot.min(piv.abs());
        if piv == 0.0 {
            continue;
        }
        for i in k + 1..n {
            let f = lu[i][k] / piv;
            lu[i][k] = f;
            for j in k + 1..n {
                lu[i][j] -= f * lu[k][j];
            }
        }
    }
    Lu { lu, perm, min_pivot }
}

fn back_substitute(f: &Lu, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut y: Vec<f64> = f.perm.iter().map(|&p| b[p]).collect();
    for i in 0..n {
        for j in 0..i {
            y[i] -= f.lu[i][j] * y[j];
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            y[i] -= f.lu[i][j] * y[j];
        }
        y[i] /= f.lu[i][i];
    }
    y
}

fn norm1(cols: impl Iterator<Item = f64>) -> f64 {
    cols.fold(0.0, f64::max)
}

/// Solve `A x = b`. Fails with `SingularSystem` when a pivot falls below
/// `1e-12` times the largest entry of `A`.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Result<LinearSolution> {
    let n = a.len();
    assert!(a.iter().all(|r| r.len() == n) && b.len() == n);
    let scale = a
        .iter()
        .flatten()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let f = factor(a);
    let a_norm = norm1((0..n).map(|j| a.iter().map(|r| r[j].abs()).sum()));
    if f.min_pivot < 1e-12 * scale {
        return Err(FracError::SingularSystem {
            pivot: f.min_pivot,
            condition: f64::INFINITY,
        });
    }
    let inv_norm = norm1((0..n).map(|j| {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        back_substitute(&f, &e).iter().map(|v| v.abs()).sum()
    }));
    Ok(LinearSolution {
        x: back_substitute(&f, b),
        min_pivot: f.min_pivot,
        condition: a_norm * inv_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_with_pivoting() {
        let a = vec![
            vec![0.0, 2.0, 1.0],
            vec![1.0, 1.0, 0.0],
            vec![3.0, 0.0, 1.0],
        ];
        let s = solve(&a, &[5.0, 3.0, 6.0]).unwrap();
        for (got, want) in s.x.iter().zip([1.4, 1.6, 1.8]) {
            assert!((got - want).abs() < 1e-14);
        }
        for (i, row) in a.iter().enumerate() {
            let lhs: f64 = row.iter().zip(&s.x).map(|(r, x)| r * x).sum();
            assert!((lhs - [5.0, 3.0, 6.0][i]).abs() < 1e-14);
        }
        assert!(s.condition >= 1.0);
    }

    #[test]
    fn identity_condition_is_one() {
        let a = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let s = solve(&a, &[2.0, -3.0]).unwrap();
        assert_eq!(s.x, vec![2.0, -3.0]);
        assert_eq!(s.condition, 1.0);
    }

    #[test]
    fn singular_is_rejected() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(matches!(
            solve(&a, &[1.0, 2.0]),
            Err(FracError::SingularSystem { .. })
        ));
    }
}
