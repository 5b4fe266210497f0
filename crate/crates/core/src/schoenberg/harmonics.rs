//! Counting (hyper)spherical harmonics on `S^d`.

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of linearly independent harmonics of degree exactly `l` on `S^d`:
/// `N(d, l) = (2l+d-1)/(l+d-1) · C(l+d-1, d-1)`.
pub fn harmonic_count_at_degree(l: u64, d: u64) -> u128 {
    assert!(d >= 2, "sphere dimension must be at least 2");
    let top = l + d - 1;
    (2 * l + d - 1) as u128 * binomial(top, d - 1) / top as u128
}

/// `H(l, d)`: harmonics of degree at most `l` on `S^d`.
pub fn harmonic_count(l: u64, d: u64) -> u128 {
    (0..=l).map(|m| harmonic_count_at_degree(m, d)).sum()
}
