//! Dense Hermitian linear algebra and the matrix-analytic primitives used by
//! the cone and box code: PSD tests and projections, numerical radius, Schur
//! products, Halmos dilations and block Schur complements.

mod eigen;
mod format;
mod matrix;
pub mod sample;

use thiserror::Error;

pub use eigen::{eigh, Spectrum};
pub use format::format_sig;
pub use matrix::{GeneralMatrix, HermMatrix, MatrixJson, C64, HERMITIAN_TOL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch { left: (usize, usize), right: (usize, usize) },
    #[error("rows have different lengths")]
    Ragged,
    #[error("empty matrix")]
    Empty,
    #[error("spectrum leaves [-1, 1] (min {min:e}, max {max:e})")]
    NotContraction { min: f64, max: f64 },
    #[error("block split ({p}, {q}) does not match dimension {dim}")]
    BadSplit { p: usize, q: usize, dim: usize },
}

/// Default margin for strict positivity (`λ_min ≥ δ`).
pub const DEFAULT_STRICT_DELTA: f64 = 1e-7;

/// True iff `λ_min(m) ≥ -tol`.
pub fn is_psd(m: &HermMatrix, tol: f64) -> bool {
    eigh(m).min() >= -tol
}

/// True iff `λ_min(m) ≥ delta`.
pub fn is_strictly_positive(m: &HermMatrix, delta: f64) -> bool {
    eigh(m).min() >= delta
}

/// Frobenius-nearest PSD matrix (negative eigenvalues clipped to zero).
pub fn psd_project(m: &HermMatrix) -> HermMatrix {
    psd_project_shifted(m, 0.0)
}

/// Frobenius-nearest point of `{X : X ⪰ floor·I}`.
pub fn psd_project_shifted(m: &HermMatrix, floor: f64) -> HermMatrix {
    let s = eigh(m);
    if s.min() >= floor {
        return m.clone();
    }
    s.map(|l| l.max(floor))
}

/// `Re(e^{iθ} T)`, the Hermitian part of the rotated matrix.
fn rotated_real_part(t: &GeneralMatrix, theta: f64) -> HermMatrix {
    t.scale(C64::from_polar(1.0, theta)).hermitian_part()
}

/// Numerical radius `w(T) = max_θ λ_max(Re(e^{iθ} T))`.
///
/// A 720-point scan over θ locates the candidate maxima, each of which is then
/// polished by golden-section search.
pub fn numerical_radius(t: &GeneralMatrix) -> Result<f64, NumericsError> {
    if !t.is_square() {
        return Err(NumericsError::NotSquare { rows: t.rows(), cols: t.cols() });
    }
    if t.rows() == 0 {
        return Err(NumericsError::Empty);
    }
    const GRID: usize = 720;
    const POLISH: usize = 4;
    let step = std::f64::consts::TAU / GRID as f64;
    let f = |theta: f64| rotated_real_part(t, theta).max_eigenvalue();
    let values: Vec<f64> = (0..GRID).map(|k| f(k as f64 * step)).collect();

    let mut peaks: Vec<usize> = (0..GRID)
        .filter(|&k| {
            let prev = values[(k + GRID - 1) % GRID];
            let next = values[(k + 1) % GRID];
            values[k] >= prev && values[k] >= next
        })
        .collect();
    peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    peaks.truncate(POLISH);

    let mut best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for k in peaks {
        let centre = k as f64 * step;
        best = best.max(golden_max(&f, centre - step, centre + step));
    }
    Ok(best.max(0.0))
}

fn golden_max(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > 1e-10 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        }
    }
    f1.max(f2)
}

/// Entrywise (Schur) product `[a_ij t_ij]`.
pub fn schur_product(a: &HermMatrix, t: &HermMatrix) -> Result<HermMatrix, NumericsError> {
    if a.dim() != t.dim() {
        return Err(NumericsError::DimensionMismatch {
            left: (a.dim(), a.dim()),
            right: (t.dim(), t.dim()),
        });
    }
    let n = a.dim();
    Ok(GeneralMatrix::from_fn(n, n, |i, j| a[(i, j)] * t[(i, j)]).hermitian_part())
}

/// Selfadjoint unitary `[[A, S], [S, -A]]` with `S = (I - A²)^{1/2}`.
pub fn halmos_dilation(a: &HermMatrix) -> Result<HermMatrix, NumericsError> {
    let spec = eigh(a);
    if spec.min() < -1.0 - 1e-10 || spec.max() > 1.0 + 1e-10 {
        return Err(NumericsError::NotContraction { min: spec.min(), max: spec.max() });
    }
    let s = spec.map(|l| (1.0 - l * l).max(0.0).sqrt());
    let neg_a = a.scale(-1.0);
    let block = GeneralMatrix::block2(
        a.as_general(),
        s.as_general(),
        s.as_general(),
        neg_a.as_general(),
    )?;
    Ok(block.hermitian_part())
}

/// Schur complement data for a block matrix `[[A, X], [X*, C]]`.
#[derive(Clone, Debug)]
pub struct SchurComplement {
    /// `C - X* A⁺ X`.
    pub complement: HermMatrix,
    pub top_left_psd: bool,
    /// `(I - A A⁺) X = 0`, i.e. the columns of `X` lie in the range of `A`.
    pub range_consistent: bool,
}

impl SchurComplement {
    /// The block is PSD (to `tol`) iff all three conditions hold.
    pub fn implies_psd(&self, tol: f64) -> bool {
        self.top_left_psd && self.range_consistent && is_psd(&self.complement, tol)
    }
}

/// Relative cut-off below which eigenvalues of `A` count as zero in `A⁺`.
pub const PINV_REL_THRESHOLD: f64 = 1e-10;

pub fn cholesky_complement(
    block: &HermMatrix,
    split: (usize, usize),
) -> Result<SchurComplement, NumericsError> {
    let (p, q) = split;
    if p + q != block.dim() || p == 0 || q == 0 {
        return Err(NumericsError::BadSplit { p, q, dim: block.dim() });
    }
    let g = block.as_general();
    let a = block.principal(0, p);
    let x = g.submatrix(0, p, p, q);
    let c = block.principal(p, q);

    let spec = eigh(&a);
    let scale = spec.eigenvalues.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    let cut = PINV_REL_THRESHOLD * scale;
    let pinv = spec.map(|l| if l.abs() > cut { 1.0 / l } else { 0.0 });
    let range_proj = spec.map(|l| if l.abs() > cut { 1.0 } else { 0.0 });

    let correction = (&(&x.adjoint() * pinv.as_general()) * &x).hermitian_part();
    let complement = &c - &correction;
    let residual = &x - &(range_proj.as_general() * &x);
    let range_consistent = residual.frobenius_norm() <= 1e-9 * (1.0 + x.frobenius_norm());
    Ok(SchurComplement {
        complement,
        top_left_psd: spec.min() >= -1e-12 * scale.max(1.0),
        range_consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::sample::*;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn real(rows: &[&[f64]]) -> HermMatrix {
        HermMatrix::from_real_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn close(a: &HermMatrix, b: &HermMatrix, tol: f64) -> bool {
        (a - b).frobenius_norm() <= tol
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = GeneralMatrix::from_real_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(HermMatrix::new(m), Err(NumericsError::NotHermitian { .. })));
        let m = GeneralMatrix::from_real_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
        assert!(matches!(HermMatrix::new(m), Err(NumericsError::NotSquare { .. })));
    }

    #[test]
    fn construction_symmetrizes_exactly() {
        let m = GeneralMatrix::from_rows(&[
            vec![C64::new(1.0, 1e-14), C64::new(2.0, 1.0)],
            vec![C64::new(2.0 + 1e-13, -1.0), C64::new(0.0, 0.0)],
        ])
        .unwrap();
        let h = HermMatrix::new(m).unwrap();
        assert_eq!(h[(0, 1)], h[(1, 0)].conj());
        assert_eq!(h[(0, 0)].im, 0.0);
    }

    #[test]
    fn psd_examples() {
        assert!(is_psd(&real(&[&[1.0, 1.0], &[1.0, 1.0]]), 0.0));
        assert!(!is_psd(&real(&[&[0.0, 1.0], &[1.0, 0.0]]), 0.0));
    }

    #[test]
    fn unimodular_three_by_three_is_psd() {
        // [[1, u, u], [u*, 1, 1], [u*, 1, 1]] for unimodular u
        for u in [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0)] {
            let one = C64::new(1.0, 0.0);
            let m = GeneralMatrix::from_rows(&[
                vec![one, u, u],
                vec![u.conj(), one, one],
                vec![u.conj(), one, one],
            ])
            .unwrap();
            let h = HermMatrix::new(m).unwrap();
            // spectrum is {0, 0, 3}; allow rounding below zero
            assert!(is_psd(&h, 1e-14), "u = {u}");
        }
    }

    #[test]
    fn projection_examples() {
        assert!(close(&psd_project(&HermMatrix::diag(&[2.0, -3.0])), &HermMatrix::diag(&[2.0, 0.0]), 1e-14));
        let swap = real(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let half = real(&[&[0.5, 0.5], &[0.5, 0.5]]);
        assert!(close(&psd_project(&swap), &half, 1e-14));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..6 {
            let p = random_psd(&mut rng, n, n);
            assert!(close(&psd_project(&p), &p, 1e-10));
        }
    }

    #[test]
    fn projection_idempotent_and_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for trial in 0..300 {
            let n = 1 + trial % 6;
            let a = random_hermitian(&mut rng, n);
            let b = random_hermitian(&mut rng, n);
            let pa = psd_project(&a);
            let pb = psd_project(&b);
            assert!(close(&psd_project(&pa), &pa, 1e-12));
            assert!((&pa - &pb).frobenius_norm() <= (&a - &b).frobenius_norm() + 1e-12);
            assert!(is_psd(&pa, 1e-12));
        }
    }

    #[test]
    fn nilpotent_jordan_cell_radius() {
        let e12 = GeneralMatrix::unit(2, 0, 1);
        assert!((numerical_radius(&e12).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hermitian_radius_is_spectral_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..6 {
            let h = random_hermitian(&mut rng, n);
            let s = eigh(&h);
            let rho = s.min().abs().max(s.max().abs());
            assert!((numerical_radius(h.as_general()).unwrap() - rho).abs() < 1e-9);
        }
    }

    #[test]
    fn radius_bounds_and_homogeneity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for trial in 0..40 {
            let n = 1 + trial % 5;
            let t = random_general(&mut rng, n, n);
            let w = numerical_radius(&t).unwrap();
            let norm = t.op_norm();
            assert!(w >= norm / 2.0 - 1e-9 && w <= norm + 1e-9);
            let c = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let wc = numerical_radius(&t.scale(c)).unwrap();
            assert!((wc - c.norm() * w).abs() < 1e-8, "{wc} vs {}", c.norm() * w);
        }
    }

    #[test]
    fn schur_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t = random_psd(&mut rng, 4, 4);
        let ones = HermMatrix::new(GeneralMatrix::from_fn(4, 4, |_, _| C64::new(1.0, 0.0))).unwrap();
        assert!(close(&schur_product(&ones, &t).unwrap(), &t, 0.0));
        let t2 = random_psd(&mut rng, 2, 2);
        let masked = schur_product(&HermMatrix::diag(&[1.0, 0.0]), &t2).unwrap();
        assert!(close(&masked, &HermMatrix::diag(&[t2[(0, 0)].re, 0.0]), 0.0));
        assert!(schur_product(&HermMatrix::identity(2), &HermMatrix::identity(3)).is_err());
    }

    #[test]
    fn halmos_examples() {
        let u = halmos_dilation(&HermMatrix::diag(&[1.0])).unwrap();
        assert!(close(&u, &HermMatrix::diag(&[1.0, -1.0]), 0.0));
        let u = halmos_dilation(&HermMatrix::diag(&[0.0])).unwrap();
        assert!(close(&u, &real(&[&[0.0, 1.0], &[1.0, 0.0]]), 0.0));
        assert!(halmos_dilation(&HermMatrix::diag(&[1.5])).is_err());
    }

    #[test]
    fn halmos_is_selfadjoint_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 1..=5 {
            let a = random_contraction(&mut rng, n);
            let u = halmos_dilation(&a).unwrap();
            let sq = u.as_general() * u.as_general();
            assert!((&sq - &GeneralMatrix::identity(2 * n)).frobenius_norm() <= 1e-8);
            assert_eq!(u.as_general().hermitian_defect(), 0.0);
        }
    }

    #[test]
    fn schur_complement_examples() {
        let sc = cholesky_complement(&real(&[&[1.0, 1.0], &[1.0, 1.0]]), (1, 1)).unwrap();
        assert!(sc.complement[(0, 0)].re.abs() < 1e-15);
        assert!(sc.implies_psd(1e-12));

        let sc = cholesky_complement(&real(&[&[1.0, 2.0], &[2.0, 1.0]]), (1, 1)).unwrap();
        assert!((sc.complement[(0, 0)].re + 3.0).abs() < 1e-15);
        assert!(!sc.implies_psd(1e-12));

        // singular A with X outside its range
        let sc = cholesky_complement(&real(&[&[0.0, 1.0], &[1.0, 5.0]]), (1, 1)).unwrap();
        assert!(!sc.range_consistent);
        assert!(cholesky_complement(&HermMatrix::identity(3), (1, 1)).is_err());
    }

    #[test]
    fn schur_complement_matches_psd_on_random_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for trial in 0..200 {
            let n = 2 + trial % 5;
            let p = 1 + trial % (n - 1);
            let m = if trial % 2 == 0 {
                random_psd(&mut rng, n, n)
            } else {
                random_hermitian(&mut rng, n).shift(1.0)
            };
            let sc = cholesky_complement(&m, (p, n - p)).unwrap();
            let min = m.min_eigenvalue();
            if min.abs() > 1e-6 {
                assert_eq!(sc.implies_psd(1e-9), min > 0.0, "trial {trial}");
            }
        }
    }
}
