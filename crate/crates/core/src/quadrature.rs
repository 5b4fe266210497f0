//! Gauss–Legendre quadrature from the symmetric Jacobi matrix, used as an
//! independent route to Legendre coefficients.
//!
//! Nodes are the eigenvalues of the truncated symmetric Jacobi matrix and
//! weights are `2 φ_0²`, with `φ_0` the first component of each normalized
//! eigenvector. The eigen-solver is an implicit QL iteration that only
//! carries the first row of the eigenvector matrix, so it runs in any
//! [`Real`] precision.

use rayon::prelude::*;
use thiserror::Error;

use crate::basis::{BasisSpec, CoefficientVector, JacobiOperator};
use crate::scalar::Real;

const MAX_QL_SWEEPS: usize = 60;

#[derive(Debug, Error, PartialEq)]
pub enum QuadratureError {
    #[error("a quadrature rule needs at least one node")]
    EmptyRule,
    #[error("the quadrature oracle only covers the Legendre basis (d = 2), got d = {0}")]
    NotLegendre(u32),
    #[error("{got}-point rule is not exact for this integrand; need at least {needed} nodes")]
    InsufficientRule { needed: usize, got: usize },
    #[error("QL iteration did not converge for eigenvalue {0}")]
    NoConvergence(usize),
}

/// Eigenvalues of a symmetric tridiagonal matrix together with the first
/// component of each normalized eigenvector. `off[i]` couples rows `i` and
/// `i+1`. Output is in ascending eigenvalue order.
pub fn tridiagonal_eigen<R: Real>(diag: &[R], off: &[R]) -> Result<(Vec<R>, Vec<R>), QuadratureError> {
    let n = diag.len();
    if n == 0 {
        return Err(QuadratureError::EmptyRule);
    }
    assert_eq!(off.len() + 1, n, "off-diagonal must have n-1 entries");
    let ctx = diag[0].context();
    let zero = R::zero(ctx);
    let one = R::one(ctx);
    let two = R::from_int(2, ctx);
    let eps = R::epsilon(ctx);
    let hypot = |a: &R, b: &R| (a.clone() * a + &(b.clone() * b)).sqrt();

    let mut d = diag.to_vec();
    let mut e: Vec<R> = off.to_vec();
    e.push(zero.clone());
    let mut z = vec![zero.clone(); n];
    z[0] = one.clone();

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + &d[m + 1].abs();
                if e[m].abs() <= eps.clone() * &dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_QL_SWEEPS {
                return Err(QuadratureError::NoConvergence(l));
            }
            let mut g = (d[l + 1].clone() - &d[l]) / &(two.clone() * &e[l]);
            let mut r = hypot(&g, &one);
            let shift = if g.is_negative() { -r.clone() } else { r.clone() };
            g = d[m].clone() - &d[l] + &(e[l].clone() / &(g + &shift));
            let (mut s, mut c, mut p) = (one.clone(), one.clone(), zero.clone());
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s.clone() * &e[i];
                let b = c.clone() * &e[i];
                r = hypot(&f, &g);
                e[i + 1] = r.clone();
                if r.is_zero() {
                    d[i + 1] -= &p;
                    e[m] = zero.clone();
                    deflated = true;
                    break;
                }
                s = f / &r;
                c = g.clone() / &r;
                g = d[i + 1].clone() - &p;
                r = (d[i].clone() - &g) * &s + &(two.clone() * &c * &b);
                p = s.clone() * &r;
                d[i + 1] = g.clone() + &p;
                g = c.clone() * &r - &b;
                let f = z[i + 1].clone();
                z[i + 1] = s.clone() * &z[i] + &(c.clone() * &f);
                z[i] = c.clone() * &z[i] - &(s.clone() * &f);
            }
            if deflated {
                continue;
            }
            d[l] -= &p;
            e[l] = g;
            e[m] = zero.clone();
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("finite eigenvalues"));
    Ok((
        order.iter().map(|&i| d[i].clone()).collect(),
        order.iter().map(|&i| z[i].clone()).collect(),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<R> {
    pub nodes: Vec<R>,
    pub weights: Vec<R>,
}

impl<R: Real> QuadratureRule<R> {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&R) -> R) -> R {
        let ctx = self.nodes[0].context();
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(R::zero(ctx), |acc, (x, w)| acc + &(f(x) * w))
    }
}

/// `n`-point Gauss–Legendre rule (Golub–Welsch).
pub fn gauss_legendre_rule<R: Real>(n: usize, ctx: R::Ctx) -> Result<QuadratureRule<R>, QuadratureError> {
    if n == 0 {
        return Err(QuadratureError::EmptyRule);
    }
    let op = JacobiOperator::<R>::new(BasisSpec::legendre(), ctx);
    let (diag, off) = op.symmetric_truncation(n);
    let (nodes, first) = tridiagonal_eigen(&diag, &off)?;
    let two = R::from_int(2, ctx);
    let weights = first.into_iter().map(|v| v.clone() * &v * &two).collect();
    Ok(QuadratureRule { nodes, weights })
}

/// Legendre coefficients obtained from quadrature.
#[derive(Debug, Clone)]
pub struct QuadratureExpansion<R> {
    pub coefficients: CoefficientVector<R>,
    /// Whether the rule is known to integrate `f · P_n` exactly for all
    /// requested `n` (only decidable for polynomial integrands).
    pub exact: bool,
}

/// `a_n = (2n+1)/2 · Σ_i w_i f(x_i) P_n(x_i)` for `n = 0..=n_max`.
///
/// `poly_degree` is the degree of `f` when it is a polynomial; the rule
/// must then have at least `(deg f + n_max)/2 + 1` nodes.
pub fn coefficients_by_quadrature<R, F>(
    f: F,
    n_rule: usize,
    n_max: usize,
    basis: BasisSpec,
    poly_degree: Option<usize>,
    ctx: R::Ctx,
) -> Result<QuadratureExpansion<R>, QuadratureError>
where
    R: Real,
    F: Fn(&R) -> R + Sync,
{
    if !basis.is_legendre() {
        return Err(QuadratureError::NotLegendre(basis.dimension()));
    }
    if let Some(deg) = poly_degree {
        let needed = (deg + n_max) / 2 + 1;
        if n_rule < needed {
            return Err(QuadratureError::InsufficientRule { needed, got: n_rule });
        }
    }
    let rule = gauss_legendre_rule::<R>(n_rule, ctx)?;
    let weighted: Vec<R> = rule
        .nodes
        .par_iter()
        .zip(rule.weights.par_iter())
        .map(|(x, w)| f(x) * w)
        .collect();
    let mut coeffs = vec![R::zero(ctx); n_max + 1];
    for (x, fw) in rule.nodes.iter().zip(&weighted) {
        let mut prev = R::one(ctx);
        let mut cur = x.clone();
        for (n, a) in coeffs.iter_mut().enumerate() {
            let p_n = match n {
                0 => prev.clone(),
                1 => cur.clone(),
                _ => {
                    let k = n as i64 - 1;
                    let next = (cur.clone() * x * &R::from_int(2 * k + 1, ctx)
                        - &(prev.clone() * &R::from_int(k, ctx)))
                        / &R::from_int(k + 1, ctx);
                    prev = std::mem::replace(&mut cur, next);
                    cur.clone()
                }
            };
            *a += &(p_n * fw);
        }
    }
    for (n, a) in coeffs.iter_mut().enumerate() {
        *a *= &R::from_ratio(2 * n as i64 + 1, 2, ctx);
    }
    Ok(QuadratureExpansion {
        coefficients: CoefficientVector::new(basis, coeffs).expect("n_max + 1 entries"),
        exact: poly_degree.is_some(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::legendre;
    use crate::scalar::{Precision, Scalar};
    use rug::Float;

    #[test]
    fn one_and_two_point_rules() {
        let r = gauss_legendre_rule::<f64>(1, ()).unwrap();
        assert_eq!(r.nodes, vec![0.0]);
        assert!((r.weights[0] - 2.0).abs() < 1e-15);

        let r = gauss_legendre_rule::<f64>(2, ()).unwrap();
        let x = 1.0 / 3f64.sqrt();
        assert!((r.nodes[0] + x).abs() < 1e-15 && (r.nodes[1] - x).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15 && (r.weights[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn five_point_fourth_moment() {
        let r = gauss_legendre_rule::<f64>(5, ()).unwrap();
        let m4 = r.integrate(|x| x.powi(4));
        assert!((m4 - 0.4).abs() < 1e-12);
    }

    #[test]
    fn empty_rule_rejected() {
        assert_eq!(gauss_legendre_rule::<f64>(0, ()), Err(QuadratureError::EmptyRule));
    }

    #[test]
    fn recovers_p3() {
        let out = coefficients_by_quadrature(|x: &f64| legendre::eval(3, x), 8, 5, BasisSpec::legendre(), Some(3), ())
            .unwrap();
        for (n, a) in out.coefficients.coeffs().iter().enumerate() {
            let expected = if n == 3 { 1.0 } else { 0.0 };
            assert!((a - expected).abs() < 1e-14, "a_{n} = {a}");
        }
        assert!(out.exact);
    }

    #[test]
    fn x_squared() {
        let ctx = Precision::from_digits(50);
        let out =
            coefficients_by_quadrature(|x: &Float| x.clone() * x, 3, 2, BasisSpec::legendre(), Some(2), ctx).unwrap();
        let expected = [
            Float::from_ratio(1, 3, ctx),
            Float::zero(ctx),
            Float::from_ratio(2, 3, ctx),
        ];
        for (a, e) in out.coefficients.coeffs().iter().zip(&expected) {
            assert!((a.clone() - e).abs() < 1e-45);
        }
    }

    #[test]
    fn rejects_wrong_basis_and_small_rules() {
        let b3 = BasisSpec::new(3).unwrap();
        assert_eq!(
            coefficients_by_quadrature(|x: &f64| *x, 4, 2, b3, None, ()).unwrap_err(),
            QuadratureError::NotLegendre(3)
        );
        assert_eq!(
            coefficients_by_quadrature(|x: &f64| *x, 2, 6, BasisSpec::legendre(), Some(5), ()).unwrap_err(),
            QuadratureError::InsufficientRule { needed: 6, got: 2 }
        );
        let general = coefficients_by_quadrature(|x: &f64| x.exp(), 20, 4, BasisSpec::legendre(), None, ()).unwrap();
        assert!(!general.exact);
    }

    #[test]
    fn eigen_of_small_tridiagonal() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3 with eigenvectors (1,-1)/√2, (1,1)/√2.
        let (vals, first) = tridiagonal_eigen(&[2.0, 2.0], &[1.0]).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-15 && (vals[1] - 3.0).abs() < 1e-15);
        for v in first {
            assert!((v * v - 0.5).abs() < 1e-15);
        }
    }
}
