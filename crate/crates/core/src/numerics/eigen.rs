//! Cyclic Jacobi eigensolver for dense Hermitian matrices.
//!
//! Every rotation is a 2×2 unitary `[[c, s·e], [-s·conj(e), c]]` acting on a
//! pivot pair `(p, q)`, where `e` is the phase of the pivot entry. Sweeps run
//! in fixed row-major pivot order, so results are bit-reproducible.

use super::matrix::{GeneralMatrix, HermMatrix, C64};

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `M = U diag(λ) U*` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors, in the order of `eigenvalues`.
    pub eigenvectors: GeneralMatrix,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("nonempty spectrum")
    }

    /// Reassembles `U diag(f(λ)) U*`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> HermMatrix {
        let u = &self.eigenvectors;
        let n = u.rows();
        let vals: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = GeneralMatrix::zeros(n, n);
        for (k, &lam) in vals.iter().enumerate() {
            if lam == 0.0 {
                continue;
            }
            for i in 0..n {
                let uik = u[(i, k)] * lam;
                for j in 0..n {
                    out[(i, j)] += uik * u[(j, k)].conj();
                }
            }
        }
        out.hermitian_part()
    }

    pub fn reconstruct(&self) -> HermMatrix {
        self.map(|l| l)
    }

    /// Column `k` of the eigenvector matrix.
    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.eigenvectors.rows()).map(|i| self.eigenvectors[(i, k)]).collect()
    }
}

pub fn eigh(m: &HermMatrix) -> Spectrum {
    let n = m.dim();
    let mut a = m.as_general().clone();
    let mut v = GeneralMatrix::identity(n);

    let scale = a.frobenius_norm();
    if scale > 0.0 && n > 1 {
        let threshold = (f64::EPSILON * scale).powi(2);
        for _ in 0..MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)].norm_sqr())
                .sum();
            if off <= threshold {
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = GeneralMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Spectrum { eigenvalues, eigenvectors }
}

fn rotate(a: &mut GeneralMatrix, v: &mut GeneralMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let n = a.rows();
    let phase = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;

    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.is_infinite() {
        1.0 / (2.0 * theta)
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // U restricted to (p, q): [[c, s·e], [-s·conj(e), c]].
    let u_pq = phase * s;
    let u_qp = -phase.conj() * s;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * c;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c + aqk * u_qp.conj();
        a[(q, k)] = apk * u_pq.conj() + aqk * c;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(app - t * mag, 0.0);
    a[(q, q)] = C64::new(aqq + t * mag, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::sample::random_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_has_unit_spectrum() {
        let s = eigh(&HermMatrix::identity(3));
        assert_eq!(s.eigenvalues, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_is_sorted() {
        let s = eigh(&HermMatrix::diag(&[3.0, -1.0]));
        assert_eq!(s.eigenvalues, vec![-1.0, 3.0]);
    }

    #[test]
    fn k_matrix_at_unit_point() {
        // characteristic polynomial λ² − (2 Re zw)² − 4 at z = w = 1
        let k = HermMatrix::from_real_rows(&[vec![2.0, 2.0], vec![2.0, -2.0]]).unwrap();
        let s = eigh(&k);
        let r = 8f64.sqrt();
        assert!((s.eigenvalues[0] + r).abs() < 1e-14);
        assert!((s.eigenvalues[1] - r).abs() < 1e-14);
    }

    #[test]
    fn complex_2x2() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2
        let m = HermMatrix::new(
            GeneralMatrix::from_rows(&[
                vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0)],
                vec![C64::new(0.0, -1.0), C64::new(1.0, 0.0)],
            ])
            .unwrap(),
        )
        .unwrap();
        let s = eigh(&m);
        assert!(s.eigenvalues[0].abs() < 1e-15);
        assert!((s.eigenvalues[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn reconstruction_and_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..1000 {
            let n = 1 + trial % 8;
            let m = random_hermitian(&mut rng, n);
            let s = eigh(&m);
            let err = (&s.reconstruct() - &m).frobenius_norm();
            assert!(err <= 1e-10 * (1.0 + m.frobenius_norm()), "dim {n}: err {err}");
            let u = &s.eigenvectors;
            let gram = &u.adjoint() * u;
            assert!((&gram - &GeneralMatrix::identity(n)).frobenius_norm() < 1e-12);
            assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_hermitian(&mut rng, 6);
        let a = eigh(&m);
        let b = eigh(&m);
        assert_eq!(a.eigenvalues, b.eigenvalues);
        assert_eq!(a.eigenvectors, b.eigenvectors);
    }
}
