//! Kernel matrices `F_ij = f(v_i · v_j)` for a zonal series `f`.

use nalgebra::DMatrix;

/// Entrywise `Σ_k coeffs[k] C_k^λ(z_ij)`, `λ = (d-1)/2`, by the forward
/// Gegenbauer recurrence; the result is symmetrized as `(F + Fᵀ)/2`.
pub fn series_kernel(coeffs: &[f64], d: u32, z: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(z.is_square(), "gram matrix must be square");
    let nu = 0.5 * (d as f64 - 1.0);
    let n = z.nrows();
    let mut f = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = z[(i, j)];
            let value = zonal_value(coeffs, nu, x);
            f[(i, j)] = value;
            f[(j, i)] = value;
        }
    }
    (&f + f.transpose()) * 0.5
}

fn zonal_value(coeffs: &[f64], nu: f64, z: f64) -> f64 {
    let Some((&c0, rest)) = coeffs.split_first() else {
        return 0.0;
    };
    let mut prev = 1.0;
    let mut cur = 2.0 * nu * z;
    let mut acc = c0 * prev;
    for (i, &c) in rest.iter().enumerate() {
        let k = (i + 1) as f64;
        acc += c * cur;
        let next = (2.0 * (k + nu) * z * cur - (k - 1.0 + 2.0 * nu) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    acc
}
