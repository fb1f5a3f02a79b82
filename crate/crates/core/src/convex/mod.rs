//! Small dense convex feasibility engines: Dykstra alternating projections
//! for an affine slice intersected with PSD cones, and convex-hull
//! membership with separating-functional extraction.

mod hull;
mod problem;
mod solver;

use thiserror::Error;

pub use hull::{hull_membership, HullMembership, HullQuery};
pub use problem::{
    AffineConstraint, BlockId, BlockKind, BlockSpec, FeasibilityProblem, ProblemBuilder, Term,
    Window,
};
pub use solver::{
    distance_to_affine, dykstra_step, solve_feasibility, solve_from, solve_with_state, DykstraState, SolveReport,
    SolveStatus, DEFAULT_MAX_ITER, DEFAULT_TOL,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConvexError {
    #[error("block {0:?} has dimension 0")]
    EmptyBlock(String),
    #[error("block {block:?} has negative strictness {delta}")]
    NegativeDelta { block: String, delta: f64 },
    #[error("constraint {constraint} references unknown block {block}")]
    UnknownBlock { constraint: usize, block: usize },
    #[error("constraint {constraint} references ({row}, {col}) outside block {block:?}")]
    EntryOutOfRange { constraint: usize, block: String, row: usize, col: usize },
    #[error("constraint {constraint} contradicts earlier ones (residual {residual:e})")]
    InconsistentConstraints { constraint: usize, residual: f64 },
    #[error("point has {got} blocks, problem has {expected}")]
    PointShape { expected: usize, got: usize },
    #[error("block {block:?} expects dimension {expected}, got {got}")]
    BlockDim { block: String, expected: usize, got: usize },
    #[error("convex hull of an empty vertex list")]
    EmptyHull,
    #[error("vertex {vertex} has length {got}, target has {expected}")]
    HullDim { vertex: usize, expected: usize, got: usize },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{numerical_radius, GeneralMatrix, HermMatrix, C64};

    /// Ando split: Z = [[A, T], [T*, B]] ⪰ 0 with A + B = I.
    fn ando(t: &GeneralMatrix) -> FeasibilityProblem {
        let n = t.rows();
        let mut b = FeasibilityProblem::builder();
        let z = b.psd_block("Z", 2 * n, 0.0);
        b.matrix_equation(
            &[Window::whole(z, 1.0), Window::at(z, n, n, C64::new(1.0, 0.0))],
            &GeneralMatrix::identity(n),
        );
        b.matrix_equation(&[Window::at(z, 0, n, C64::new(1.0, 0.0))], t);
        b.build().unwrap()
    }

    #[test]
    fn scalar_strict_split() {
        // 1 + A ≥ δ and 1 - A ≥ δ, δ = 0.1
        let mut b = FeasibilityProblem::builder();
        let p = b.psd_block("P", 1, 0.1);
        let m = b.psd_block("M", 1, 0.1);
        let a = b.free_block("A", 1);
        let one = C64::new(1.0, 0.0);
        b.constrain(
            vec![Term { block: p, row: 0, col: 0, coef: one }, Term { block: a, row: 0, col: 0, coef: -one }],
            1.0,
        );
        b.constrain(
            vec![Term { block: m, row: 0, col: 0, coef: one }, Term { block: a, row: 0, col: 0, coef: one }],
            1.0,
        );
        let problem = b.build().unwrap();
        let r = solve_feasibility(&problem, DEFAULT_TOL, DEFAULT_MAX_ITER);
        assert_eq!(r.status, SolveStatus::Feasible);
        let a = r.block("A").unwrap()[(0, 0)].re;
        assert!(a.abs() <= 0.9 + 1e-8);
    }

    #[test]
    fn ando_split_for_jordan_cell() {
        let t = GeneralMatrix::unit(2, 0, 1);
        let problem = ando(&t);
        // known witness A = E11, B = E22
        let mut w = GeneralMatrix::zeros(4, 4);
        w[(0, 0)] = C64::new(1.0, 0.0);
        w[(0, 3)] = C64::new(1.0, 0.0);
        w[(3, 0)] = C64::new(1.0, 0.0);
        w[(3, 3)] = C64::new(1.0, 0.0);
        let witness = vec![HermMatrix::new(w).unwrap()];
        assert!(problem.constraint_residual(&witness) < 1e-15);
        assert!(problem.cone_margin(&witness) > -1e-15);
        assert!(distance_to_affine(&problem, &witness).unwrap() < 1e-15);

        let r = solve_feasibility(&problem, DEFAULT_TOL, DEFAULT_MAX_ITER);
        assert_eq!(r.status, SolveStatus::Feasible, "{r:?}");
        assert!(r.residual <= DEFAULT_TOL);
    }

    #[test]
    fn ando_split_rejects_large_radius() {
        let t = GeneralMatrix::unit(2, 0, 1).scale_real(1.2);
        assert!((numerical_radius(&t).unwrap() - 0.6).abs() < 1e-10);
        let r = solve_feasibility(&ando(&t), DEFAULT_TOL, DEFAULT_MAX_ITER);
        assert_eq!(r.status, SolveStatus::InfeasibleEvidence, "{r:?}");
        assert!(r.gap_estimate > 10.0 * DEFAULT_TOL);
    }

    #[test]
    fn affine_distance() {
        // A + B = I at A = B = I: distance |I|_F / √2
        let mut b = FeasibilityProblem::builder();
        let a = b.psd_block("A", 3, 0.0);
        let bb = b.psd_block("B", 3, 0.0);
        b.matrix_equation(&[Window::whole(a, 1.0), Window::whole(bb, 1.0)], &GeneralMatrix::identity(3));
        let problem = b.build().unwrap();
        let i = HermMatrix::identity(3);
        let d = distance_to_affine(&problem, &[i.clone(), i.clone()]).unwrap();
        assert!((d - 3f64.sqrt() / 2f64.sqrt()).abs() < 1e-14);
        let half = i.scale(0.5);
        assert!(distance_to_affine(&problem, &[half.clone(), half]).unwrap() < 1e-15);

        let mut b = FeasibilityProblem::builder();
        b.psd_block("A", 2, 0.0);
        let empty = b.build().unwrap();
        assert_eq!(distance_to_affine(&empty, &[HermMatrix::diag(&[4.0, -1.0])]).unwrap(), 0.0);
    }

    #[test]
    fn disjoint_toy_pair() {
        // x = -1 against x ≥ 0
        let mut b = FeasibilityProblem::builder();
        let x = b.psd_block("x", 1, 0.0);
        b.constrain(vec![Term { block: x, row: 0, col: 0, coef: C64::new(1.0, 0.0) }], -1.0);
        let problem = b.build().unwrap();
        let mut s = DykstraState::new(&problem);
        for _ in 0..20 {
            s = dykstra_step(&problem, s);
        }
        assert_eq!(s.affine_point, vec![-1.0]);
        assert_eq!(s.cone_point, vec![0.0]);
        assert_eq!(s.gap(), 1.0);
        let r = solve_feasibility(&problem, DEFAULT_TOL, DEFAULT_MAX_ITER);
        assert_eq!(r.status, SolveStatus::InfeasibleEvidence);
        assert!((r.gap_estimate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_point_is_unchanged() {
        let mut b = FeasibilityProblem::builder();
        let x = b.psd_block("x", 2, 0.0);
        b.matrix_equation(&[Window::whole(x, 1.0)], &GeneralMatrix::identity(2));
        let problem = b.build().unwrap();
        let start = problem.flatten(&[HermMatrix::identity(2)]).unwrap();
        let s0 = DykstraState::from_start(&problem, start.clone());
        let s1 = dykstra_step(&problem, s0);
        assert_eq!(s1.affine_point, start);
        assert_eq!(s1.cone_point, start);
    }

    #[test]
    fn builder_rejects_bad_shapes() {
        let mut b = FeasibilityProblem::builder();
        let x = b.psd_block("x", 2, 0.0);
        b.constrain(vec![Term { block: x, row: 2, col: 0, coef: C64::new(1.0, 0.0) }], 0.0);
        assert!(matches!(b.build(), Err(ConvexError::EntryOutOfRange { .. })));

        let mut b = FeasibilityProblem::builder();
        b.constrain(vec![Term { block: BlockId(3), row: 0, col: 0, coef: C64::new(1.0, 0.0) }], 0.0);
        assert!(matches!(b.build(), Err(ConvexError::UnknownBlock { .. })));

        let mut b = FeasibilityProblem::builder();
        let x = b.psd_block("x", 1, 0.0);
        let one = C64::new(1.0, 0.0);
        b.constrain(vec![Term { block: x, row: 0, col: 0, coef: one }], 1.0);
        b.constrain(vec![Term { block: x, row: 0, col: 0, coef: one * 2.0 }], 3.0);
        assert!(matches!(b.build(), Err(ConvexError::InconsistentConstraints { .. })));
    }

    #[test]
    fn coordinates_are_isometric() {
        use crate::numerics::sample::random_hermitian;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut b = FeasibilityProblem::builder();
        b.psd_block("x", 4, 0.0);
        b.free_block("y", 3);
        let problem = b.build().unwrap();
        let pt = vec![random_hermitian(&mut rng, 4), random_hermitian(&mut rng, 3)];
        let flat = problem.flatten(&pt).unwrap();
        let norm = flat.iter().map(|x| x * x).sum::<f64>().sqrt();
        let fro = (pt[0].frobenius_norm().powi(2) + pt[1].frobenius_norm().powi(2)).sqrt();
        assert!((norm - fro).abs() < 1e-12);
        let back = problem.unflatten(&flat);
        assert!((&back[0] - &pt[0]).frobenius_norm() < 1e-14);
    }
}
