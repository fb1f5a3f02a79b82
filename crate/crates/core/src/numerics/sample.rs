//! Seeded random matrices for property tests, restarts and benchmarks.

use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::{GeneralMatrix, HermMatrix, C64};

pub fn random_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with iid standard complex Gaussian entries.
pub fn random_general<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> GeneralMatrix {
    GeneralMatrix::from_fn(rows, cols, |_, _| random_complex(rng))
}

/// GUE-style Hermitian matrix.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermMatrix {
    random_general(rng, n, n).hermitian_part()
}

/// Wishart-style PSD matrix `G G*` with rank `rank`, normalized to unit trace.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> HermMatrix {
    let g = random_general(rng, n, rank.max(1));
    let m = (&g * &g.adjoint()).hermitian_part();
    let tr = m.trace();
    m.scale(1.0 / tr)
}

/// Hermitian matrix with spectrum drawn uniformly from `[-1, 1]`.
pub fn random_contraction<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermMatrix {
    let spec = super::eigh(&random_hermitian(rng, n));
    let vals: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let u = &spec.eigenvectors;
    HermMatrix::diag(&vals).congruence(&u.adjoint())
}

/// Unit vector in `C^n`, uniform on the sphere.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| random_complex(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Random POVM effect pair `(E, I - E)` on `C^n`.
pub fn random_effect<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermMatrix {
    let c = random_contraction(rng, n);
    // (I + C)/2 has spectrum in [0, 1]
    c.shift(1.0).scale(0.5)
}
