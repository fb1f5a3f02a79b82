//! Convex-hull membership for finitely many points via Wolfe's minimum-norm
//! point algorithm, an active-set least-squares method on the simplex.
//!
//! The nearest hull point to the target either coincides with it (weights
//! are returned) or yields the separating direction `target - nearest`.

use serde::{Deserialize, Serialize};

use super::problem::{dist, dot};
use super::ConvexError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullQuery {
    pub vertices: Vec<Vec<f64>>,
    pub target: Vec<f64>,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum HullMembership {
    /// Convex weights (one per vertex) reproducing the target within `tol`.
    Inside { weights: Vec<f64> },
    /// Unit vector `c` with `<c, target> - max_i <c, v_i> = gap > tol / 2`.
    Outside { separator: Vec<f64>, gap: f64 },
}

impl HullMembership {
    pub fn is_inside(&self) -> bool {
        matches!(self, HullMembership::Inside { .. })
    }
}

const MAX_MAJOR: usize = 10_000;
const WEIGHT_FLOOR: f64 = 1e-14;

pub fn hull_membership(query: &HullQuery) -> Result<HullMembership, ConvexError> {
    let HullQuery { vertices, target, tol } = query;
    if vertices.is_empty() {
        return Err(ConvexError::EmptyHull);
    }
    let d = target.len();
    if let Some(bad) = vertices.iter().position(|v| v.len() != d) {
        return Err(ConvexError::HullDim { vertex: bad, expected: d, got: vertices[bad].len() });
    }
    let shifted: Vec<Vec<f64>> =
        vertices.iter().map(|v| v.iter().zip(target).map(|(a, b)| a - b).collect()).collect();
    let scale = shifted.iter().map(|p| dot(p, p)).fold(0.0, f64::max).max(1e-300);

    let (support, lambda) = wolfe(&shifted, scale);
    let mut weights = vec![0.0; vertices.len()];
    for (&k, &l) in support.iter().zip(&lambda) {
        weights[k] = l;
    }
    let nearest: Vec<f64> = (0..d)
        .map(|c| weights.iter().zip(vertices).map(|(w, v)| w * v[c]).sum())
        .collect();
    let distance = dist(&nearest, target);

    if distance <= *tol {
        return Ok(HullMembership::Inside { weights });
    }
    let separator: Vec<f64> = target.iter().zip(&nearest).map(|(t, n)| (t - n) / distance).collect();
    let at_target = dot(&separator, target);
    let best_vertex = vertices.iter().map(|v| dot(&separator, v)).fold(f64::NEG_INFINITY, f64::max);
    Ok(HullMembership::Outside { gap: at_target - best_vertex, separator })
}

/// Returns the active set and its convex weights for the minimum-norm
/// point of `conv(points)`.
fn wolfe(points: &[Vec<f64>], scale: f64) -> (Vec<usize>, Vec<f64>) {
    let norms: Vec<f64> = points.iter().map(|p| dot(p, p)).collect();
    let first = argmin(&norms);
    let mut support = vec![first];
    let mut lambda = vec![1.0];

    for _ in 0..MAX_MAJOR {
        let x = combine(points, &support, &lambda);
        let xx = dot(&x, &x);
        if xx <= 1e-30 * scale {
            break;
        }
        let scores: Vec<f64> = points.iter().map(|p| dot(&x, p)).collect();
        let j = argmin(&scores);
        if xx - scores[j] <= 1e-12 * scale || support.contains(&j) {
            break;
        }
        support.push(j);
        lambda.push(0.0);

        loop {
            let mu = match affine_minimizer(points, &support) {
                Some(mu) => mu,
                None => break,
            };
            if mu.iter().all(|&m| m > WEIGHT_FLOOR) {
                lambda = mu;
                break;
            }
            let mut theta = 1.0f64;
            for (l, m) in lambda.iter().zip(&mu) {
                if *m <= WEIGHT_FLOOR {
                    theta = theta.min(l / (l - m));
                }
            }
            for (l, m) in lambda.iter_mut().zip(&mu) {
                *l = (1.0 - theta) * *l + theta * m;
            }
            let keep: Vec<bool> = lambda.iter().map(|&l| l > WEIGHT_FLOOR).collect();
            support = support.iter().zip(&keep).filter(|(_, &k)| k).map(|(&s, _)| s).collect();
            lambda = lambda.iter().zip(&keep).filter(|(_, &k)| k).map(|(&l, _)| l).collect();
            let total: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= total);
        }
    }
    (support, lambda)
}

fn combine(points: &[Vec<f64>], support: &[usize], lambda: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; points[0].len()];
    for (&k, &l) in support.iter().zip(lambda) {
        x.iter_mut().zip(&points[k]).for_each(|(xi, pi)| *xi += l * pi);
    }
    x
}

/// Lowest index attaining the minimum.
fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Minimizes `|Σ μ_k p_k|` subject to `Σ μ_k = 1` over the support.
fn affine_minimizer(points: &[Vec<f64>], support: &[usize]) -> Option<Vec<f64>> {
    let m = support.len();
    let n = m + 1;
    let mut a = vec![vec![0.0; n + 1]; n];
    for i in 0..m {
        for j in 0..m {
            a[i][j] = dot(&points[support[i]], &points[support[j]]);
        }
        a[i][m] = 1.0;
        a[m][i] = 1.0;
    }
    a[m][n] = 1.0;
    let sol = gauss_solve(a)?;
    Some(sol[..m].to_vec())
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
pub(crate) fn gauss_solve(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = a.len();
    let scale = a.iter().flat_map(|r| r[..n].iter()).fold(0.0f64, |m, x| m.max(x.abs()));
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= 1e-14 * scale.max(1e-300) {
            return None;
        }
        a.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..=n {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][n] - s) / a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn query(vertices: Vec<Vec<f64>>, target: Vec<f64>) -> HullQuery {
        HullQuery { vertices, target, tol: 1e-9 }
    }

    #[test]
    fn vertex_is_inside_with_unit_weight() {
        let q = query(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0]);
        match hull_membership(&q).unwrap() {
            HullMembership::Inside { weights } => assert_eq!(weights, vec![1.0, 0.0, 0.0]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn midpoint_weights() {
        let q = query(vec![vec![0.0, 0.0], vec![2.0, 2.0]], vec![1.0, 1.0]);
        match hull_membership(&q).unwrap() {
            HullMembership::Inside { weights } => {
                assert!((weights[0] - 0.5).abs() < 1e-12 && (weights[1] - 0.5).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn outside_point_separated() {
        let q = query(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]], vec![1.0, 1.0]);
        match hull_membership(&q).unwrap() {
            HullMembership::Outside { separator, gap } => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                assert!((separator[0] - s).abs() < 1e-12 && (separator[1] - s).abs() < 1e-12);
                assert!((gap - s).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn shape_errors() {
        assert!(hull_membership(&query(vec![], vec![1.0])).is_err());
        assert!(hull_membership(&query(vec![vec![1.0, 2.0]], vec![1.0])).is_err());
    }

    #[test]
    fn duplicate_vertices_tie_break_to_lowest_index() {
        let q = query(vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![3.0, 3.0]], vec![1.0, 1.0]);
        match hull_membership(&q).unwrap() {
            HullMembership::Inside { weights } => assert_eq!(weights, vec![1.0, 0.0, 0.0]),
            other => panic!("{other:?}"),
        }
    }
}
