//! Expansion of polynomials into Legendre/Gegenbauer bases by recurrence,
//! positivity thresholds by bisection, a Gauss–Legendre cross-check and a
//! Monte-Carlo positive-definiteness test on spheres.

pub mod amplitude;
pub mod basis;
pub mod quadrature;
pub mod scalar;
pub mod schoenberg;
pub mod search;

pub use amplitude::{
    divisors, evaluate, expand_amplitude, factorize_term, min_coefficient, AmplitudeError, AmplitudeSpec,
    CoefficientStrategy, Expansion, MinCoefficient, TermFactorization,
};
pub use basis::{
    apply_linear_factor, apply_x, eval_basis_series, gegenbauer_limit_check, BasisError, BasisSpec, CoefficientVector,
    JacobiOperator,
};
pub use scalar::{parse_rational, Precision, Real, Scalar, ScalarError, ScalarMode};
