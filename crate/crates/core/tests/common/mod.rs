//! Reference implementations used to check the library independently of
//! its own recurrences.
#![allow(dead_code)]

use rug::{Float, Integer, Rational};

/// `C_n^λ(z)` from the explicit sum
/// `Σ_k (-1)^k (λ)_{n-k} / (k! (n-2k)!) (2z)^{n-2k}`, `λ = (d-1)/2`.
pub fn gegenbauer_explicit(n: usize, d: u32, z: &Rational) -> Rational {
    let lambda = Rational::from((i64::from(d) - 1, 2));
    let two_z = Rational::from(z * 2u32);
    let mut total = Rational::new();
    for k in 0..=n / 2 {
        let mut poch = Rational::from(1);
        for j in 0..(n - k) {
            poch *= Rational::from(&lambda + j as u32);
        }
        let denom = factorial(k) * factorial(n - 2 * k);
        let mut term = poch / Rational::from(denom);
        term *= power(&two_z, n - 2 * k);
        if k % 2 == 1 {
            term = -term;
        }
        total += term;
    }
    total
}

/// `P_n(x)` from Rodrigues-type explicit sum
/// `2^-n Σ_k (-1)^k C(n,k) C(2n-2k, n) x^{n-2k}`.
pub fn legendre_explicit(n: usize, x: &Rational) -> Rational {
    let mut total = Rational::new();
    for k in 0..=n / 2 {
        let c = Integer::from(Integer::binomial_u(n as u32, k as u32))
            * Integer::from(Integer::binomial_u((2 * n - 2 * k) as u32, n as u32));
        let mut term = Rational::from(c) * power(x, n - 2 * k);
        if k % 2 == 1 {
            term = -term;
        }
        total += term;
    }
    total / Rational::from(Integer::from(1) << n as u32)
}

pub fn factorial(n: usize) -> Integer {
    Integer::from(Integer::factorial(n as u32))
}

pub fn power(x: &Rational, n: usize) -> Rational {
    let mut out = Rational::from(1);
    for _ in 0..n {
        out *= x;
    }
    out
}

/// The four closed forms for `H(ℓ, d)` at `d = 2..=5`.
pub fn harmonic_closed_form(l: u64, d: u64) -> u128 {
    let l = l as u128;
    match d {
        2 => (l + 1) * (l + 1),
        3 => (l + 1) * (l + 2) * (2 * l + 3) / 6,
        4 => (l + 1) * (l + 2) * (l + 2) * (l + 3) / 12,
        5 => (l + 1) * (l + 2) * (l + 3) * (l + 4) * (2 * l + 5) / 120,
        _ => panic!("no closed form for d = {d}"),
    }
}

/// Roots of `P_n`, ascending. Each root is bracketed by the classical
/// angular bounds `(k - 1/2)π/(n + 1/2) < θ_k < kπ/(n + 1/2)` with
/// `x = cos θ`, then bisected on the power-basis form of `P_n` evaluated
/// in 256-bit floating point.
pub fn legendre_roots(n: usize) -> Vec<f64> {
    const BITS: u32 = 256;
    let coeffs = legendre_power_coefficients(n);
    let p = |x: f64| {
        let x = Float::with_val(BITS, x);
        coeffs
            .iter()
            .rev()
            .fold(Float::with_val(BITS, 0), |acc, c| acc * &x + c)
    };
    let h = std::f64::consts::PI / (n as f64 + 0.5);
    let mut roots: Vec<f64> = (1..=n)
        .map(|k| {
            let mut lo = (k as f64 * h).cos();
            let mut hi = ((k as f64 - 0.5) * h).cos();
            let lo_negative = p(lo).is_sign_negative();
            assert_ne!(
                lo_negative,
                p(hi).is_sign_negative(),
                "no sign change for root {k} of P_{n}"
            );
            loop {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break mid;
                }
                if p(mid).is_sign_negative() == lo_negative {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        })
        .collect();
    roots.sort_by(f64::total_cmp);
    roots
}

/// Exact power-basis coefficients of `P_n`.
fn legendre_power_coefficients(n: usize) -> Vec<Rational> {
    let mut out = vec![Rational::new(); n + 1];
    for k in 0..=n / 2 {
        let c = Integer::from(Integer::binomial_u(n as u32, k as u32))
            * Integer::from(Integer::binomial_u((2 * n - 2 * k) as u32, n as u32));
        let mut v = Rational::from(c) / Rational::from(Integer::from(1) << n as u32);
        if k % 2 == 1 {
            v = -v;
        }
        out[n - 2 * k] = v;
    }
    out
}
