use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::TensorError;
use crate::convex::{solve_feasibility, FeasibilityProblem, SolveReport, Window, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::numerics::{cholesky_complement, eigh, GeneralMatrix, HermMatrix, C64};

/// Decides whether `t0 = t0¹ + t0²` with `[[t0¹, t1], [t1*, t0²]] ⪰ δ`.
///
/// The 2n×2n block is the single PSD unknown `Z`; its diagonal blocks are
/// the two summands.
pub fn s1_max_split(t0: &HermMatrix, t1: &GeneralMatrix, delta: f64) -> Result<SolveReport, TensorError> {
    let n = t0.dim();
    if t1.rows() != n || t1.cols() != n {
        return Err(TensorError::Shape);
    }
    let mut b = FeasibilityProblem::builder();
    let z = b.psd_block("Z", 2 * n, delta);
    b.matrix_equation(&[Window::whole(z, 1.0), Window::at(z, n, n, C64::new(1.0, 0.0))], t0.as_general());
    b.matrix_equation(&[Window::at(z, 0, n, C64::new(1.0, 0.0))], t1);
    let problem = b.build().map_err(TensorError::Convex)?;
    Ok(solve_feasibility(&problem, DEFAULT_TOL, DEFAULT_MAX_ITER))
}

/// `(t0¹, t0²)` read off a feasible split report.
pub fn split_parts(report: &SolveReport) -> Option<(HermMatrix, HermMatrix)> {
    let z = report.block("Z")?;
    let n = z.dim() / 2;
    Some((z.principal(0, n), z.principal(n, n)))
}

/// The averaged matrix `b(α₁₁, α₂₂)`.
pub fn averaged_block(a11: f64, a22: f64) -> HermMatrix {
    HermMatrix::from_real_rows(&[
        vec![a11, 0.0, 1.0, 0.0],
        vec![0.0, a22, 2.0, -1.0],
        vec![1.0, 2.0, 3.0 - a11, 0.0],
        vec![0.0, -1.0, 0.0, 3.0 - a22],
    ])
    .expect("symmetric by construction")
}

/// `c(α₂₂) = [[α₂₂, 2, -1], [2, 1, 0], [-1, 0, 3 - α₂₂]]`.
pub fn reduced_block(a22: f64) -> HermMatrix {
    HermMatrix::from_real_rows(&[vec![a22, 2.0, -1.0], vec![2.0, 1.0, 0.0], vec![-1.0, 0.0, 3.0 - a22]])
        .expect("symmetric by construction")
}

/// Vertex of `a x² + b x + c` for `a < 0`, computed exactly.
pub fn parabola_max(a: Ratio<i64>, b: Ratio<i64>, c: Ratio<i64>) -> Option<(Ratio<i64>, Ratio<i64>)> {
    if a >= Ratio::from_integer(0) {
        return None;
    }
    let x = -b / (a * 2);
    Some((x, a * x * x + b * x + c))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    /// `(argmax, max)` of `det c(x) = -x² + 7x - 13`, as exact fractions.
    pub det_argmax: (i64, i64),
    pub det_max: (i64, i64),
    /// `det c` at the grid's centre `α₂₂ = 3/2`.
    pub det_at_centre: f64,
    /// Schur complement of `b(3/2, 3/2)` after its 1×1 corner.
    pub complement_min_eig: f64,
    pub grid: usize,
    pub delta: f64,
    /// Grid points `(α₁₁, α₂₂) ∈ [δ, 3-δ]²` where `b` came out PSD.
    pub psd_hits: usize,
    /// Smallest `λ_min(b)` met on the grid.
    pub grid_max_min_eig: f64,
    /// True when every piece above rules out positivity.
    pub certified: bool,
}

pub fn sone_obstruction(grid: usize, delta: f64) -> ObstructionReport {
    let r = |n: i64| Ratio::from_integer(n);
    let (x, m) = parabola_max(r(-1), r(7), r(-13)).expect("concave");
    let det_at = |x: f64| -x * x + 7.0 * x - 13.0;
    let centre = cholesky_complement(&averaged_block(1.5, 1.5), (1, 3)).expect("split fits");
    let complement_min_eig = eigh(&centre.complement).min();

    let steps = grid.max(2) - 1;
    let at = |k: usize| delta + (3.0 - 2.0 * delta) * k as f64 / steps as f64;
    let mut psd_hits = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..grid {
        for j in 0..grid {
            let l = eigh(&averaged_block(at(i), at(j))).min();
            best = best.max(l);
            if l >= 0.0 {
                psd_hits += 1;
            }
        }
    }
    let det_max = (*m.numer(), *m.denom());
    ObstructionReport {
        det_argmax: (*x.numer(), *x.denom()),
        det_max,
        det_at_centre: det_at(1.5),
        complement_min_eig,
        grid,
        delta,
        psd_hits,
        grid_max_min_eig: best,
        certified: m < r(0) && psd_hits == 0 && complement_min_eig < 0.0,
    }
}

/// Finite relaxation of the positivity of `h` in the max tensor product.
///
/// Unknowns: Hermitian `A₀` (2×2, block `A0`) and a complex 2×2 `A₁`,
/// stored as the upper-right window of a free 4×4 Hermitian block `F`.
/// For every point `w_k` a PSD block `X{k}` (strictness `delta`) is tied to
/// `[[A(w), C(w)], [C(w)*, 3I - A(w)]]` with `A(w) = A₀ + A₁w + A₁*w̄` and
/// `C(w) = [[w, 0], [2w̄, -w]]`.
pub fn sone_relaxation(points: &[C64], delta: f64) -> Result<FeasibilityProblem, TensorError> {
    if points.is_empty() {
        return Err(TensorError::EmptyGrid);
    }
    if let Some(z) = points.iter().find(|z| (z.norm() - 1.0).abs() > 1e-12) {
        return Err(TensorError::NotUnimodular(z.norm()));
    }
    let one = C64::new(1.0, 0.0);
    let mut b = FeasibilityProblem::builder();
    let a0 = b.free_block("A0", 2);
    let f = b.free_block("F", 4);
    for (k, &w) in points.iter().enumerate() {
        let x = b.psd_block(format!("X{k}"), 4, delta);
        let a_terms = |sign: f64| {
            [Window::at(a0, 0, 0, one * sign), Window::at(f, 0, 2, w * sign), Window::at(f, 2, 0, w.conj() * sign)]
        };
        // X[0..2, 0..2] - A(w) = 0
        let mut upper = vec![Window::at(x, 0, 0, one)];
        upper.extend(a_terms(-1.0));
        b.matrix_equation(&upper, &GeneralMatrix::zeros(2, 2));
        // X[2..4, 2..4] + A(w) = 3I
        let mut lower = vec![Window::at(x, 2, 2, one)];
        lower.extend(a_terms(1.0));
        b.matrix_equation(&lower, &GeneralMatrix::identity(2).scale_real(3.0));
        let c = GeneralMatrix::from_rows(&[vec![w, C64::new(0.0, 0.0)], vec![w.conj() * 2.0, -w]])
            .expect("2x2");
        b.matrix_equation(&[Window::at(x, 0, 2, one)], &c);
    }
    b.build().map_err(TensorError::Convex)
}

/// The `n`-th roots of unity `e^{2πik/n}`, `k = 0..n`.
pub fn roots_of_unity(n: usize) -> Vec<C64> {
    (0..n).map(|k| C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::SolveStatus;

    #[test]
    fn split_examples() {
        let id = HermMatrix::identity(2);
        let r = s1_max_split(&id.scale(2.0), id.as_general(), 0.0).unwrap();
        assert_eq!(r.status, SolveStatus::Feasible, "{r:?}");
        let (p, q) = split_parts(&r).unwrap();
        assert!((&p - &id).frobenius_norm() < 1e-3 && (&q - &id).frobenius_norm() < 1e-3);

        let r = s1_max_split(&id, id.as_general(), 0.0).unwrap();
        assert_eq!(r.status, SolveStatus::InfeasibleEvidence);

        let r = s1_max_split(&HermMatrix::diag(&[1.0]), &GeneralMatrix::from_real_rows(&[vec![0.5]]).unwrap(), 0.0)
            .unwrap();
        assert_eq!(r.status, SolveStatus::Feasible, "{r:?}");
        let (p, q) = split_parts(&r).unwrap();
        assert!((p[(0, 0)].re - 0.5).abs() < 1e-3 && (q[(0, 0)].re - 0.5).abs() < 1e-3);
    }

    #[test]
    fn parabola_vertex_is_exact() {
        let r = |n: i64| Ratio::from_integer(n);
        let (x, m) = parabola_max(r(-1), r(7), r(-13)).unwrap();
        assert_eq!((x, m), (Ratio::new(7, 2), Ratio::new(-3, 4)));
        assert!(parabola_max(r(1), r(0), r(0)).is_none());
    }

    #[test]
    fn centre_point_fails_cholesky() {
        let s = cholesky_complement(&averaged_block(1.5, 1.5), (1, 3)).unwrap();
        let expected = HermMatrix::from_real_rows(&[
            vec![1.5, 2.0, -1.0],
            vec![2.0, 3.0 - 1.5 - 1.0 / 1.5, 0.0],
            vec![-1.0, 0.0, 1.5],
        ])
        .unwrap();
        assert!((&s.complement - &expected).frobenius_norm() < 1e-14);
        assert!(!s.implies_psd(0.0));
        let det = |m: &HermMatrix| eigh(m).eigenvalues.iter().product::<f64>();
        assert!((det(&reduced_block(1.5)) + 4.75).abs() < 1e-12);
    }

    #[test]
    fn obstruction_report() {
        let r = sone_obstruction(100, 1e-3);
        assert_eq!(r.det_max, (-3, 4));
        assert_eq!(r.det_argmax, (7, 2));
        assert_eq!(r.psd_hits, 0);
        assert!(r.certified);
    }

    #[test]
    fn relaxation_verdicts() {
        let single = sone_relaxation(&[C64::new(1.0, 0.0)], 0.0).unwrap();
        assert!(solve_feasibility(&single, DEFAULT_TOL, DEFAULT_MAX_ITER).is_feasible());
        for n in [5, 10] {
            let p = sone_relaxation(&roots_of_unity(n), 0.0).unwrap();
            let r = solve_feasibility(&p, DEFAULT_TOL, DEFAULT_MAX_ITER);
            assert_eq!(r.status, SolveStatus::InfeasibleEvidence, "n = {n}: {r:?}");
            assert!(r.gap_estimate > 1e-4);
        }
        assert!(sone_relaxation(&[], 0.0).is_err());
        assert!(sone_relaxation(&[C64::new(2.0, 0.0)], 0.0).is_err());
    }
}
