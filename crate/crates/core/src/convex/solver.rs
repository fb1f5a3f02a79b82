use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::hull::gauss_solve;
use super::problem::{coords_to_herm, dist, dot, herm_to_coords, BlockKind, FeasibilityProblem};
use super::ConvexError;
use crate::numerics::{eigh, psd_project_shifted, HermMatrix};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 50_000;

/// Iterations between convergence checkpoints.
const CHECKPOINT_EVERY: usize = 50;
/// Consecutive stable checkpoints needed before reporting infeasibility.
const STABLE_CHECKPOINTS: usize = 3;
/// A checkpoint is stable when the gap moved by at most this fraction.
const STABLE_REL_CHANGE: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Feasible,
    /// The alternating-projection gap settled away from zero. This is
    /// numerical evidence, not a proof of emptiness.
    InfeasibleEvidence,
    Undecided,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// One matrix per block (by name), present when `status` is feasible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<BTreeMap<String, HermMatrix>>,
    /// Largest affine-constraint violation of the reported point (or of the
    /// final affine iterate when no point is reported).
    pub residual: f64,
    /// Distance between the last affine iterate and the last cone iterate.
    pub gap_estimate: f64,
    pub iterations: usize,
}

impl SolveReport {
    pub fn is_feasible(&self) -> bool {
        self.status == SolveStatus::Feasible
    }

    pub fn block(&self, name: &str) -> Option<&HermMatrix> {
        self.point.as_ref().and_then(|p| p.get(name))
    }
}

/// Iterate of Dykstra's alternating projections between the affine slice
/// and the product of shifted PSD cones.
#[derive(Clone, Debug)]
pub struct DykstraState {
    /// Last point produced by the affine projection.
    pub affine_point: Vec<f64>,
    /// Last point produced by the cone projection.
    pub cone_point: Vec<f64>,
    affine_correction: Vec<f64>,
    cone_correction: Vec<f64>,
    pub iterations: usize,
}

impl DykstraState {
    pub fn new(problem: &FeasibilityProblem) -> Self {
        Self::from_start(problem, vec![0.0; problem.real_len()])
    }

    pub fn from_start(problem: &FeasibilityProblem, start: Vec<f64>) -> Self {
        assert_eq!(start.len(), problem.real_len());
        let n = start.len();
        Self {
            affine_point: start.clone(),
            cone_point: start,
            affine_correction: vec![0.0; n],
            cone_correction: vec![0.0; n],
            iterations: 0,
        }
    }

    /// Distance between the two current iterates.
    pub fn gap(&self) -> f64 {
        dist(&self.affine_point, &self.cone_point)
    }
}

/// Projects block coordinates onto the product of cones, block by block.
fn project_cones(problem: &FeasibilityProblem, x: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    for (b, spec) in problem.blocks().iter().enumerate() {
        if let BlockKind::Psd { delta } = spec.kind {
            let range = problem.block_range(b);
            let m = coords_to_herm(&x[range.clone()], spec.dim);
            let p = psd_project_shifted(&m, delta);
            out[range].copy_from_slice(&herm_to_coords(&p));
        }
    }
    out
}

/// One Dykstra cycle: affine projection, then per-block cone projection,
/// each with its correction term.
pub fn dykstra_step(problem: &FeasibilityProblem, mut state: DykstraState) -> DykstraState {
    let shifted: Vec<f64> =
        state.cone_point.iter().zip(&state.affine_correction).map(|(x, p)| x + p).collect();
    let y = problem.affine().project(&shifted);
    for ((p, s), yi) in state.affine_correction.iter_mut().zip(&shifted).zip(&y) {
        *p = s - yi;
    }
    let shifted: Vec<f64> = y.iter().zip(&state.cone_correction).map(|(x, q)| x + q).collect();
    let x = project_cones(problem, &shifted);
    for ((q, s), xi) in state.cone_correction.iter_mut().zip(&shifted).zip(&x) {
        *q = s - xi;
    }
    state.affine_point = y;
    state.cone_point = x;
    state.iterations += 1;
    state
}

/// Least-squares distance from `point` to the affine slice.
pub fn distance_to_affine(
    problem: &FeasibilityProblem,
    point: &[HermMatrix],
) -> Result<f64, ConvexError> {
    let x = problem.flatten(point)?;
    Ok(dist(&x, &problem.affine().project(&x)))
}

pub fn solve_feasibility(problem: &FeasibilityProblem, tol: f64, max_iter: usize) -> SolveReport {
    solve_from(problem, DykstraState::new(problem), tol, max_iter)
}

pub fn solve_from(
    problem: &FeasibilityProblem,
    state: DykstraState,
    tol: f64,
    max_iter: usize,
) -> SolveReport {
    solve_with_state(problem, state, tol, max_iter).0
}

/// Like [`solve_from`], also returning the final iterate so that callers
/// can continue from it or use its cone point as an approximate solution.
pub fn solve_with_state(
    problem: &FeasibilityProblem,
    state: DykstraState,
    tol: f64,
    max_iter: usize,
) -> (SolveReport, DykstraState) {
    // Dykstra with an affine first set is the fixed-point iteration
    // u ↦ u + P_A(P_C u) - P_C u on the pre-projection point u = y + q.
    let mut u: Vec<f64> =
        state.affine_point.iter().zip(&state.cone_correction).map(|(y, q)| y + q).collect();
    let mut iterations = state.iterations;
    let mut anderson = Anderson::new(ANDERSON_MEMORY);
    let mut eval = evaluate(problem, &u);
    let mut history: Vec<f64> = Vec::new();
    let mut stable = 0;
    loop {
        let candidate = anderson.propose(&u, &eval.image);
        let mut next = candidate.map(|c| (evaluate(problem, &c), c));
        if let Some((e, _)) = &next {
            if e.residual_norm() > eval.residual_norm() * (1.0 + 1e-12) {
                anderson.reset();
                next = None;
            }
        }
        let (next_eval, next_u) = match next {
            Some(pair) => pair,
            None => {
                let plain = eval.image.clone();
                (evaluate(problem, &plain), plain)
            }
        };
        anderson.record(&u, &eval, &next_u, &next_eval);
        u = next_u;
        eval = next_eval;
        iterations += 1;

        let done = iterations >= max_iter;
        if !iterations.is_multiple_of(CHECKPOINT_EVERY) && !done && iterations > 1 {
            continue;
        }
        let snapshot = eval.state(&u, iterations);
        if let Some(report) = accept_affine_point(problem, &snapshot, tol) {
            return (report, snapshot);
        }
        let gap = snapshot.gap();
        if gap > 10.0 * tol && separates(problem, &snapshot, 10.0 * tol) {
            return (unresolved(problem, &snapshot, SolveStatus::InfeasibleEvidence), snapshot);
        }
        if let Some(&prev) = history.last() {
            let change = (prev - gap).abs();
            let settled = gap > 10.0 * tol && change <= STABLE_REL_CHANGE * gap;
            stable = if settled && limit_stays_positive(&history, gap) { stable + 1 } else { 0 };
        }
        history.push(gap);
        if stable >= STABLE_CHECKPOINTS {
            return (unresolved(problem, &snapshot, SolveStatus::InfeasibleEvidence), snapshot);
        }
        if done {
            return (unresolved(problem, &snapshot, SolveStatus::Undecided), snapshot);
        }
    }
}

const ANDERSON_MEMORY: usize = 5;

/// One application of the Dykstra map at `u`.
struct Evaluation {
    cone: Vec<f64>,
    affine: Vec<f64>,
    /// `T(u) = u + affine - cone`.
    image: Vec<f64>,
}

impl Evaluation {
    fn residual_norm(&self) -> f64 {
        dist(&self.affine, &self.cone)
    }

    fn state(&self, u: &[f64], iterations: usize) -> DykstraState {
        let n = u.len();
        DykstraState {
            affine_point: self.affine.clone(),
            cone_point: self.cone.clone(),
            affine_correction: vec![0.0; n],
            cone_correction: u.iter().zip(&self.cone).map(|(a, b)| a - b).collect(),
            iterations,
        }
    }
}

fn evaluate(problem: &FeasibilityProblem, u: &[f64]) -> Evaluation {
    let cone = project_cones(problem, u);
    let affine = problem.affine().project(&cone);
    let image = u.iter().zip(&affine).zip(&cone).map(|((u, a), c)| u + a - c).collect();
    Evaluation { cone, affine, image }
}

/// Type-II Anderson acceleration of the fixed-point map, with restarts
/// whenever an extrapolated step fails to shrink the residual.
struct Anderson {
    memory: usize,
    delta_f: Vec<Vec<f64>>,
    delta_g: Vec<Vec<f64>>,
    last_f: Option<Vec<f64>>,
}

impl Anderson {
    fn new(memory: usize) -> Self {
        Self { memory, delta_f: Vec::new(), delta_g: Vec::new(), last_f: None }
    }

    fn reset(&mut self) {
        self.delta_f.clear();
        self.delta_g.clear();
        self.last_f = None;
    }

    fn record(&mut self, u: &[f64], eval: &Evaluation, next_u: &[f64], next: &Evaluation) {
        let f0: Vec<f64> = eval.image.iter().zip(u).map(|(g, x)| g - x).collect();
        let f1: Vec<f64> = next.image.iter().zip(next_u).map(|(g, x)| g - x).collect();
        self.delta_f.push(f1.iter().zip(&f0).map(|(a, b)| a - b).collect());
        self.delta_g.push(next.image.iter().zip(&eval.image).map(|(a, b)| a - b).collect());
        if self.delta_f.len() > self.memory {
            self.delta_f.remove(0);
            self.delta_g.remove(0);
        }
        self.last_f = Some(f1);
    }

    fn propose(&self, _u: &[f64], image: &[f64]) -> Option<Vec<f64>> {
        let f = self.last_f.as_ref()?;
        let m = self.delta_f.len();
        if m == 0 {
            return None;
        }
        // normal equations (ΔFᵀΔF + εI) γ = ΔFᵀ f
        let mut a = vec![vec![0.0; m + 1]; m];
        let mut scale = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                a[i][j] = dot(&self.delta_f[i], &self.delta_f[j]);
            }
            scale = scale.max(a[i][i]);
            a[i][m] = dot(&self.delta_f[i], f);
        }
        if scale == 0.0 {
            return None;
        }
        for (i, row) in a.iter_mut().enumerate() {
            row[i] += 1e-10 * scale;
        }
        let gamma = gauss_solve(a)?;
        let mut out = image.to_vec();
        for (g, dg) in gamma.iter().zip(&self.delta_g) {
            out.iter_mut().zip(dg).for_each(|(o, d)| *o -= g * d);
        }
        out.iter().all(|x| x.is_finite()).then_some(out)
    }
}

/// Minimum ratio between the excluded radius and the iterate norm for a
/// separating functional to count as evidence.
const SEPARATION_RADIUS: f64 = 1e3;

/// Tests whether `W = cone - affine` approximately separates the two sets.
///
/// `W` is orthogonal to the affine directions by construction, so it is
/// constant (`beta`) on the slice. On the cones it is bounded below by
/// `Σ δ tr W⁺` minus a violation term from its non-PSD and free-block parts.
/// When that bound beats `beta`, every common point has norm at least
/// `margin / violation`, and the distance between the sets restricted to
/// that ball is at least `margin / |W|`.
fn separates(problem: &FeasibilityProblem, state: &DykstraState, min_gap: f64) -> bool {
    let w: Vec<f64> = state.cone_point.iter().zip(&state.affine_point).map(|(c, a)| c - a).collect();
    let beta = dot(&w, &state.affine_point);
    let mut floor = 0.0;
    let mut violation_sq = 0.0;
    for (b, spec) in problem.blocks().iter().enumerate() {
        let part = &w[problem.block_range(b)];
        match spec.kind {
            BlockKind::Free => violation_sq += dot(part, part),
            BlockKind::Psd { delta } => {
                let spectrum = eigh(&coords_to_herm(part, spec.dim));
                for &l in &spectrum.eigenvalues {
                    if l >= 0.0 {
                        floor += delta * l;
                    } else {
                        violation_sq += l * l;
                    }
                }
            }
        }
    }
    let margin = floor - beta;
    let norm = dot(&w, &w).sqrt();
    if margin <= 0.0 || margin < min_gap * norm {
        return false;
    }
    let scale = 1.0 + dot(&state.affine_point, &state.affine_point).sqrt();
    margin >= SEPARATION_RADIUS * scale * violation_sq.sqrt()
}

/// Geometric extrapolation of the gap sequence: rules out sequences that
/// are still shrinking towards zero, only slowly.
fn limit_stays_positive(history: &[f64], gap: f64) -> bool {
    let n = history.len();
    if n < 2 {
        return false;
    }
    let d1 = history[n - 1] - gap;
    let d0 = history[n - 2] - history[n - 1];
    if d1 <= 0.0 || d0 <= 0.0 {
        return true;
    }
    let ratio = (d1 / d0).min(0.999_999);
    let limit = gap - d1 * ratio / (1.0 - ratio);
    limit > 0.75 * gap
}

fn accept_affine_point(
    problem: &FeasibilityProblem,
    state: &DykstraState,
    tol: f64,
) -> Option<SolveReport> {
    let point = problem.unflatten(&state.affine_point);
    if problem.cone_margin(&point) < -tol {
        return None;
    }
    let residual = problem.constraint_residual(&point);
    if residual > tol {
        return None;
    }
    let named = problem.blocks().iter().map(|b| b.name.clone()).zip(point).collect();
    Some(SolveReport {
        status: SolveStatus::Feasible,
        point: Some(named),
        residual,
        gap_estimate: state.gap(),
        iterations: state.iterations,
    })
}

fn unresolved(problem: &FeasibilityProblem, state: &DykstraState, status: SolveStatus) -> SolveReport {
    let point = problem.unflatten(&state.affine_point);
    SolveReport {
        status,
        point: None,
        residual: problem.constraint_residual(&point),
        gap_estimate: state.gap(),
        iterations: state.iterations,
    }
}
