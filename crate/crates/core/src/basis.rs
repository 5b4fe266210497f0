//! Hyperspherical bases, coefficient vectors and the multiplication-by-x
//! operator.
//!
//! On `S^d` the zonal basis is the Gegenbauer family `C_n^λ` with
//! `λ = (d-1)/2`; standard normalization makes `C_n^{1/2} = P_n`, so the
//! Legendre case needs no rescaling. The recurrence
//!
//! ```text
//! x C_n = (n+1)/(2(n+λ)) C_{n+1} + (n+2λ-1)/(2(n+λ)) C_{n-1}
//! ```
//!
//! has integer-ratio coefficients `(n+1)/(2n+d-1)` and `(n+d-2)/(2n+d-1)`,
//! which keeps the exact mode exact.

use rug::Rational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{Real, Scalar};

#[derive(Debug, Error, PartialEq)]
pub enum BasisError {
    #[error("sphere dimension must be at least 2, got {0}")]
    InvalidDimension(u32),
    #[error("coefficient vector must hold at least one entry")]
    Empty,
    #[error("argument {0} lies outside [-1, 1]")]
    Domain(f64),
}

/// Sphere `S^d` whose zonal functions form the expansion basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct BasisSpec {
    d: u32,
}

impl BasisSpec {
    pub fn new(d: u32) -> Result<Self, BasisError> {
        if d < 2 {
            return Err(BasisError::InvalidDimension(d));
        }
        Ok(Self { d })
    }

    /// `S^2`, i.e. Legendre polynomials.
    pub const fn legendre() -> Self {
        Self { d: 2 }
    }

    pub fn dimension(&self) -> u32 {
        self.d
    }

    /// Dimension of the embedding space, `d + 1`.
    pub fn ambient_dimension(&self) -> usize {
        self.d as usize + 1
    }

    /// Gegenbauer index `(d-1)/2`.
    pub fn lambda(&self) -> Rational {
        Rational::from((self.d as i64 - 1, 2))
    }

    pub fn is_legendre(&self) -> bool {
        self.d == 2
    }

    /// Coefficient of `B_{n+1}` in `x B_n`.
    pub fn raising<S: Scalar>(&self, n: usize, ctx: S::Ctx) -> S {
        let n = n as i64;
        S::from_ratio(n + 1, 2 * n + self.d as i64 - 1, ctx)
    }

    /// Coefficient of `B_{n-1}` in `x B_n`.
    pub fn lowering<S: Scalar>(&self, n: usize, ctx: S::Ctx) -> S {
        let n = n as i64;
        S::from_ratio(n + self.d as i64 - 2, 2 * n + self.d as i64 - 1, ctx)
    }
}

impl TryFrom<u32> for BasisSpec {
    type Error = BasisError;

    fn try_from(d: u32) -> Result<Self, Self::Error> {
        Self::new(d)
    }
}

impl From<BasisSpec> for u32 {
    fn from(b: BasisSpec) -> u32 {
        b.d
    }
}

/// Finite expansion `f(x) = Σ a_n B_n(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector<S> {
    basis: BasisSpec,
    coeffs: Vec<S>,
}

impl<S: Scalar> CoefficientVector<S> {
    pub fn new(basis: BasisSpec, coeffs: Vec<S>) -> Result<Self, BasisError> {
        if coeffs.is_empty() {
            return Err(BasisError::Empty);
        }
        Ok(Self { basis, coeffs })
    }

    /// The basis vector `e_n` (the function `B_n`).
    pub fn unit(basis: BasisSpec, n: usize, ctx: S::Ctx) -> Self {
        let mut coeffs = vec![S::zero(ctx); n + 1];
        coeffs[n] = S::one(ctx);
        Self { basis, coeffs }
    }

    pub fn basis(&self) -> BasisSpec {
        self.basis
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn context(&self) -> S::Ctx {
        self.coeffs[0].context()
    }

    /// Index of the last nonzero coefficient; `None` for the zero function.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    /// Copy without trailing zeros (keeps at least one entry).
    pub fn trimmed(&self) -> Self {
        let keep = self.degree().map_or(1, |d| d + 1);
        Self {
            basis: self.basis,
            coeffs: self.coeffs[..keep].to_vec(),
        }
    }

    pub fn max_abs(&self) -> S {
        max_abs(&self.coeffs).abs()
    }

    pub fn eval(&self, z: &S) -> Result<S, BasisError> {
        eval_basis_series(&self.coeffs, z, self.basis)
    }
}

/// Tridiagonal action of multiplication by `x` in a basis.
///
/// The infinite matrix is never stored; only the two off-diagonals are
/// cached, and they grow on demand.
#[derive(Debug, Clone)]
pub struct JacobiOperator<S: Scalar> {
    basis: BasisSpec,
    ctx: S::Ctx,
    raising: Vec<S>,
    lowering: Vec<S>,
}

impl<S: Scalar> JacobiOperator<S> {
    pub fn new(basis: BasisSpec, ctx: S::Ctx) -> Self {
        Self {
            basis,
            ctx,
            raising: Vec::new(),
            lowering: Vec::new(),
        }
    }

    /// Operator with its diagonals precomputed for inputs of length `len`.
    pub fn with_capacity(basis: BasisSpec, len: usize, ctx: S::Ctx) -> Self {
        let mut op = Self::new(basis, ctx);
        op.reserve(len);
        op
    }

    pub fn basis(&self) -> BasisSpec {
        self.basis
    }

    pub fn reserve(&mut self, len: usize) {
        for n in self.raising.len()..len {
            self.raising.push(self.basis.raising(n, self.ctx));
            self.lowering.push(self.basis.lowering(n, self.ctx));
        }
    }

    /// Entry `X[n+1][n]`.
    pub fn raising(&self, n: usize) -> S {
        self.basis.raising(n, self.ctx)
    }

    /// Entry `X[n-1][n]`.
    pub fn lowering(&self, n: usize) -> S {
        self.basis.lowering(n, self.ctx)
    }

    /// Coefficients of `x f(x)`; output is one entry longer than the input.
    pub fn apply(&mut self, coeffs: &[S]) -> Vec<S> {
        let len = coeffs.len();
        self.reserve(len);
        let mut out = Vec::with_capacity(len + 1);
        for m in 0..=len {
            let mut acc = S::zero(self.ctx);
            if m >= 1 {
                let mut t = coeffs[m - 1].clone();
                t *= &self.raising[m - 1];
                acc += &t;
            }
            if m + 1 < len {
                let mut t = coeffs[m + 1].clone();
                t *= &self.lowering[m + 1];
                acc += &t;
            }
            out.push(acc);
        }
        out
    }

    /// Coefficients of `(a x + b) f(x)`.
    pub fn apply_linear(&mut self, coeffs: &[S], a: &S, b: &S) -> Vec<S> {
        let mut out = if a.is_zero() {
            vec![S::zero(self.ctx); coeffs.len() + 1]
        } else {
            let mut shifted = self.apply(coeffs);
            for c in &mut shifted {
                *c *= a;
            }
            shifted
        };
        if !b.is_zero() {
            for (o, c) in out.iter_mut().zip(coeffs) {
                let mut t = c.clone();
                t *= b;
                *o += &t;
            }
        }
        out
    }

    /// Diagonal and off-diagonal of the `size × size` symmetric Jacobi
    /// matrix similar to the truncated operator. The off-diagonal entry
    /// between `n-1` and `n` is `sqrt(X[n][n-1] · X[n-1][n])`.
    pub fn symmetric_truncation(&self, size: usize) -> (Vec<S>, Vec<S>)
    where
        S: Real,
    {
        let diag = vec![S::zero(self.ctx); size];
        let off = (1..size)
            .map(|n| (self.raising(n - 1) * &self.lowering(n)).sqrt())
            .collect();
        (diag, off)
    }
}

/// Coefficients of `x f(x)`.
pub fn apply_x<S: Scalar>(v: &CoefficientVector<S>) -> CoefficientVector<S> {
    let mut op = JacobiOperator::new(v.basis, v.context());
    CoefficientVector {
        basis: v.basis,
        coeffs: op.apply(&v.coeffs),
    }
}

/// Coefficients of `(a x + b) f(x)`.
pub fn apply_linear_factor<S: Scalar>(v: &CoefficientVector<S>, a: &S, b: &S) -> CoefficientVector<S> {
    let mut op = JacobiOperator::new(v.basis, v.context());
    CoefficientVector {
        basis: v.basis,
        coeffs: op.apply_linear(&v.coeffs, a, b),
    }
}

/// Entry of largest magnitude (first one on ties).
pub(crate) fn max_abs<S: Scalar>(coeffs: &[S]) -> &S {
    let mut best = &coeffs[0];
    for c in &coeffs[1..] {
        if c.cmp_abs(best) == std::cmp::Ordering::Greater {
            best = c;
        }
    }
    best
}

const DOMAIN_SLACK: f64 = 1e-12;

/// `Σ_k coeffs[k] C_k^λ(z)` by the forward three-term recurrence
/// `C_0 = 1`, `C_1 = 2λz`,
/// `C_{k+1} = (2(k+λ) z C_k - (k-1+2λ) C_{k-1}) / (k+1)`.
pub fn eval_basis_series<S: Scalar>(coeffs: &[S], z: &S, basis: BasisSpec) -> Result<S, BasisError> {
    if z.to_f64().abs() > 1.0 + DOMAIN_SLACK {
        return Err(BasisError::Domain(z.to_f64()));
    }
    let ctx = z.context();
    let Some(first) = coeffs.first() else {
        return Ok(S::zero(ctx));
    };
    let d = basis.d as i64;
    let mut prev = S::one(ctx);
    let mut cur = z.clone() * &S::from_int(d - 1, ctx);
    let mut sum = first.clone();
    for (k, c) in coeffs.iter().enumerate().skip(1) {
        if k > 1 {
            // cur holds C_{k-1}, prev holds C_{k-2}
            let j = k as i64 - 1;
            let mut next = cur.clone() * z;
            next *= &S::from_int(2 * j + d - 1, ctx);
            let mut back = prev;
            back *= &S::from_int(j + d - 2, ctx);
            next -= &back;
            next /= &S::from_int(j + 1, ctx);
            prev = cur;
            cur = next;
        }
        sum += &(cur.clone() * c);
    }
    Ok(sum)
}

/// `C_n^{(d-1)/2}(z) / d^n`, which tends to `z^n / n!` as `d → ∞`.
pub fn gegenbauer_limit_check<S: Scalar>(n: usize, z: &S, d: u32) -> Result<S, BasisError> {
    let basis = BasisSpec::new(d)?;
    let ctx = z.context();
    let e_n = CoefficientVector::unit(basis, n, ctx);
    let mut value = eval_basis_series(e_n.coeffs(), z, basis)?;
    let dim = S::from_int(d as i64, ctx);
    for _ in 0..n {
        value /= &dim;
    }
    Ok(value)
}

/// Dedicated Legendre routines, kept separate from the Gegenbauer path so
/// the two can be checked against each other.
pub mod legendre {
    use crate::scalar::Scalar;

    /// `x f(x)` via `x P_n = (n+1)/(2n+1) P_{n+1} + n/(2n+1) P_{n-1}`.
    pub fn apply_x<S: Scalar>(coeffs: &[S]) -> Vec<S> {
        let ctx = coeffs[0].context();
        let mut out = vec![S::zero(ctx); coeffs.len() + 1];
        for (n, a) in coeffs.iter().enumerate() {
            let n_i = n as i64;
            out[n + 1] += &(a.clone() * &S::from_ratio(n_i + 1, 2 * n_i + 1, ctx));
            if n > 0 {
                out[n - 1] += &(a.clone() * &S::from_ratio(n_i, 2 * n_i + 1, ctx));
            }
        }
        out
    }

    /// `P_n(x)` by Bonnet's recurrence `(k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}`.
    pub fn eval<S: Scalar>(n: usize, x: &S) -> S {
        let ctx = x.context();
        let mut prev = S::one(ctx);
        if n == 0 {
            return prev;
        }
        let mut cur = x.clone();
        for k in 1..n {
            let k = k as i64;
            let mut next = cur.clone() * x * &S::from_int(2 * k + 1, ctx);
            next -= &(prev * &S::from_int(k, ctx));
            next /= &S::from_int(k + 1, ctx);
            prev = cur;
            cur = next;
        }
        cur
    }

    /// `Σ c_n P_n(x)`, each `P_n` evaluated on its own.
    pub fn eval_series<S: Scalar>(coeffs: &[S], x: &S) -> S {
        let ctx = x.context();
        coeffs
            .iter()
            .enumerate()
            .fold(S::zero(ctx), |acc, (n, c)| acc + &(eval(n, x) * c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn x_times_p0_is_p1() {
        let b = BasisSpec::legendre();
        let v = CoefficientVector::<Rational>::unit(b, 0, ());
        assert_eq!(apply_x(&v).trimmed().coeffs(), &[q(0, 1), q(1, 1)]);
    }

    #[test]
    fn x_times_p1_legendre() {
        let b = BasisSpec::legendre();
        let v = CoefficientVector::<Rational>::unit(b, 1, ());
        assert_eq!(apply_x(&v).coeffs(), &[q(1, 3), q(0, 1), q(2, 3)]);
    }

    #[test]
    fn x_times_c1_on_s3() {
        let b = BasisSpec::new(3).unwrap();
        let v = CoefficientVector::<Rational>::unit(b, 1, ());
        assert_eq!(apply_x(&v).coeffs(), &[q(1, 2), q(0, 1), q(1, 2)]);
    }

    #[test]
    fn linear_factor_scalar_multiple() {
        let b = BasisSpec::new(4).unwrap();
        let v = CoefficientVector::new(b, vec![q(1, 2), q(-3, 7), q(2, 1)]).unwrap();
        let out = apply_linear_factor(&v, &q(0, 1), &q(5, 1));
        assert_eq!(out.len(), 4);
        let expected: Vec<_> = v.coeffs().iter().map(|c| c.clone() * q(5, 1)).collect();
        assert_eq!(out.trimmed().coeffs(), &expected[..]);
    }

    #[test]
    fn paper_two_factor_example() {
        let b = BasisSpec::legendre();
        let (x1, x2) = (q(3, 7), q(-5, 11));
        let e0 = CoefficientVector::<Rational>::unit(b, 0, ());
        let a1 = apply_linear_factor(&e0, &q(1, 1), &-x1.clone());
        assert_eq!(a1.coeffs(), &[-x1.clone(), q(1, 1)]);
        let a2 = apply_linear_factor(&a1, &q(1, 1), &-x2.clone());
        let expected = [x1.clone() * &x2 + q(1, 3), -(x1.clone() + &x2), q(2, 3)];
        assert_eq!(a2.coeffs(), &expected);
    }

    #[test]
    fn series_evaluation_examples() {
        let b3 = BasisSpec::new(3).unwrap();
        let v = eval_basis_series(&[q(0, 1), q(1, 1)], &q(1, 2), b3).unwrap();
        assert_eq!(v, q(1, 1));
        let v = eval_basis_series(&[q(0, 1), q(0, 1), q(1, 1)], &q(1, 1), b3).unwrap();
        assert_eq!(v, q(3, 1));
        let v = eval_basis_series(&[q(1, 1), q(0, 1), q(1, 1)], &q(0, 1), BasisSpec::legendre()).unwrap();
        assert_eq!(v, q(1, 2));
    }

    #[test]
    fn series_evaluation_rejects_outside_interval() {
        let err = eval_basis_series(&[1.0, 2.0], &1.5, BasisSpec::legendre()).unwrap_err();
        assert_eq!(err, BasisError::Domain(1.5));
        assert!(eval_basis_series(&[1.0, 2.0], &(1.0 + 1e-14), BasisSpec::legendre()).is_ok());
    }

    #[test]
    fn rejects_low_dimension() {
        assert_eq!(BasisSpec::new(1), Err(BasisError::InvalidDimension(1)));
        assert_eq!(BasisSpec::new(2).unwrap().lambda(), q(1, 2));
        assert_eq!(BasisSpec::new(5).unwrap().lambda(), q(2, 1));
    }

    #[test]
    fn degree_and_trim() {
        let b = BasisSpec::legendre();
        let v = CoefficientVector::new(b, vec![q(1, 1), q(0, 1), q(2, 1), q(0, 1)]).unwrap();
        assert_eq!(v.degree(), Some(2));
        assert_eq!(v.trimmed().len(), 3);
        let z = CoefficientVector::new(b, vec![q(0, 1), q(0, 1)]).unwrap();
        assert_eq!(z.degree(), None);
        assert_eq!(z.trimmed().len(), 1);
        assert!(CoefficientVector::<Rational>::new(b, vec![]).is_err());
    }

    #[test]
    fn limit_check_examples() {
        assert_eq!(gegenbauer_limit_check(0, &0.3, 17).unwrap(), 1.0);
        let v = gegenbauer_limit_check(1, &0.5, 1000).unwrap();
        assert!((v - 0.4995).abs() < 1e-15);
        let v = gegenbauer_limit_check(2, &1.0, 10_000).unwrap();
        assert!((v - 0.5).abs() < 1e-3);
    }

    #[test]
    fn symmetric_truncation_legendre_offdiagonal() {
        let op = JacobiOperator::<f64>::new(BasisSpec::legendre(), ());
        let (diag, off) = op.symmetric_truncation(5);
        assert!(diag.iter().all(|d| *d == 0.0));
        for (i, b) in off.iter().enumerate() {
            let n = (i + 1) as f64;
            assert!((b - n / (4.0 * n * n - 1.0).sqrt()).abs() < 1e-15);
        }
    }
}
