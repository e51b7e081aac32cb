//! Quadrature helpers: Gauss–Legendre rules, adaptive panels, and closed-form
//! integrals of `p(x) e^{λx}` for polynomial `p`.

use num_complex::Complex64;

use crate::poly::{PiecewisePolynomial, Polynomial};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        // Chebyshev-like initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Adaptive Gauss–Legendre integration of a smooth integrand.
pub fn adaptive_gauss(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let rule = gauss_legendre(10);
    fn apply(rule: &[(f64, f64)], f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        h * rule.iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>()
    }
    fn recurse(
        rule: &[(f64, f64)],
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = apply(rule, f, a, m);
        let right = apply(rule, f, m, b);
        if depth == 0 || (left + right - whole).abs() <= tol {
            left + right
        } else {
            recurse(rule, f, a, m, left, 0.5 * tol, depth - 1)
                + recurse(rule, f, m, b, right, 0.5 * tol, depth - 1)
        }
    }
    let whole = apply(&rule, f, a, b);
    recurse(&rule, f, a, b, whole, tol, 40)
}

/// `∫_0^h u^n e^{λu} du` for `n = 0..=deg`.
fn local_exp_moments(lambda: Complex64, h: f64, deg: usize) -> Vec<Complex64> {
    let z = lambda * h;
    if z.norm() < 4.0 {
        // Taylor: Σ_j λ^j/j! · h^{n+j+1}/(n+j+1)
        (0..=deg)
            .map(|n| {
                let mut sum = Complex64::new(0.0, 0.0);
                let mut term = Complex64::new(h.powi(n as i32 + 1), 0.0); // (λh)^j/j! h^{n+1}
                for j in 0..200 {
                    let contrib = term / (n + j + 1) as f64;
                    sum += contrib;
                    if contrib.norm() <= 1e-18 * sum.norm().max(f64::MIN_POSITIVE) {
                        break;
                    }
                    term = term * z / (j + 1) as f64;
                }
                sum
            })
            .collect()
    } else {
        let e = (lambda * h).exp();
        let mut out = Vec::with_capacity(deg + 1);
        out.push((e - 1.0) / lambda);
        for n in 1..=deg {
            let prev = out[n - 1];
            out.push((e * h.powi(n as i32) - prev * n as f64) / lambda);
        }
        out
    }
}

/// `∫_a^b p(x) e^{λx} dx` in closed form, expanded around `a`.
pub fn exp_poly_integral(p: &Polynomial, lambda: Complex64, a: f64, b: f64) -> Complex64 {
    if lambda == Complex64::new(0.0, 0.0) {
        return Complex64::new(p.integrate(a, b), 0.0);
    }
    let local = p.compose_affine(1.0, a);
    let moments = local_exp_moments(lambda, b - a, local.degree());
    let sum: Complex64 = local
        .coeffs()
        .iter()
        .zip(&moments)
        .map(|(&c, &m)| m * c)
        .sum();
    (lambda * a).exp() * sum
}

/// `∫ p(x) e^{λx} dx` over the domain of a piecewise polynomial.
pub fn exp_piecewise_integral(pp: &PiecewisePolynomial, lambda: Complex64) -> Complex64 {
    pp.pieces()
        .iter()
        .zip(pp.breakpoints().windows(2))
        .map(|(p, w)| exp_poly_integral(p, lambda, w[0], w[1]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre(5);
        let wsum: f64 = rule.iter().map(|r| r.1).sum();
        assert!((wsum - 2.0).abs() < 1e-14);
        // exact up to degree 9
        let x8: f64 = rule.iter().map(|&(x, w)| w * x.powi(8)).sum();
        assert!((x8 - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_matches_log() {
        let v = adaptive_gauss(&|x| 1.0 / (3.0 - x), 0.0, 1.0, 1e-14);
        assert!((v - (1.5_f64).ln()).abs() < 1e-13);
    }

    #[test]
    fn exp_integral_small_and_large_lambda() {
        // ∫_0^1 x e^{λx} dx = e^λ(λ-1)/λ² + 1/λ²
        let p = Polynomial::linear(1.0, 0.0);
        for lam in [
            Complex64::new(0.3, 0.0),
            Complex64::new(0.0, 7.0),
            Complex64::new(-12.0, 0.0),
            Complex64::new(0.0, 1e-6),
        ] {
            let want = if lam.norm() < 1e-3 {
                lam * lam / 8.0 + lam / 3.0 + 0.5
            } else {
                ((lam.exp() * (lam - 1.0)) + 1.0) / (lam * lam)
            };
            let got = exp_poly_integral(&p, lam, 0.0, 1.0);
            assert!((got - want).norm() < 1e-10 * want.norm().max(1.0), "{lam}");
        }
    }

    #[test]
    fn exp_integral_matches_gauss() {
        let p = Polynomial::new(vec![0.5, -1.0, 2.0, 0.7]);
        for s in [0.0, 0.5, 3.0, 25.0] {
            let got = exp_poly_integral(&p, Complex64::new(0.0, s), 0.25, 0.9);
            let re = adaptive_gauss(&|x| p.eval(x) * (s * x).cos(), 0.25, 0.9, 1e-15);
            let im = adaptive_gauss(&|x| p.eval(x) * (s * x).sin(), 0.25, 0.9, 1e-15);
            assert!((got.re - re).abs() < 1e-12 && (got.im - im).abs() < 1e-12, "s = {s}");
        }
    }
}
