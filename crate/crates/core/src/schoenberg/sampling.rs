//! Random unit vectors and their Gram matrices.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Norms below this are resampled before normalization.
const MIN_NORM: f64 = 1e-150;

/// Independent generator for one Monte-Carlo sample: the master seed picks
/// the key, `(n, index)` picks the stream.
pub fn stream_rng(seed: u64, n: usize, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | index as u64);
    rng
}

/// `n` points uniform on the unit sphere of `R^ambient`, one per column,
/// by normalizing standard Gaussian vectors.
pub fn sample_unit_vectors<R: Rng + ?Sized>(n: usize, ambient: usize, rng: &mut R) -> DMatrix<f64> {
    assert!(n >= 1 && ambient >= 2, "need n >= 1 and ambient dimension >= 2");
    let mut v = DMatrix::zeros(ambient, n);
    for mut col in v.column_iter_mut() {
        loop {
            for x in col.iter_mut() {
                *x = rng.sample(StandardNormal);
            }
            let norm = col.norm();
            if norm > MIN_NORM {
                col /= norm;
                break;
            }
        }
    }
    v
}

/// `z_ij = v_i · v_j`, summed coordinate by coordinate in order, clamped to
/// `[-1, 1]`, with an exact unit diagonal and exact symmetry.
pub fn gram_matrix(vectors: &DMatrix<f64>) -> DMatrix<f64> {
    let n = vectors.ncols();
    let mut z = DMatrix::identity(n, n);
    for i in 0..n {
        let vi = vectors.column(i);
        for j in (i + 1)..n {
            let vj = vectors.column(j);
            let mut dot = 0.0;
            for (a, b) in vi.iter().zip(vj.iter()) {
                dot += a * b;
            }
            let dot = dot.clamp(-1.0, 1.0);
            z[(i, j)] = dot;
            z[(j, i)] = dot;
        }
    }
    z
}

/// Realizes the same points on a larger sphere by appending zero coordinates.
pub fn embed_vectors(vectors: &DMatrix<f64>, ambient: usize) -> DMatrix<f64> {
    assert!(ambient >= vectors.nrows(), "cannot embed into a smaller space");
    let mut out = DMatrix::zeros(ambient, vectors.ncols());
    out.rows_mut(0, vectors.nrows()).copy_from(vectors);
    out
}
