use serde::{Deserialize, Serialize};

use super::{raw_matrix, table_from, BoxError, CorrelationBox};
use crate::convex::{hull_membership, HullMembership, HullQuery};
use crate::numerics::HermMatrix;
use crate::tensorlab::FactorWitness;

/// The 16 deterministic boxes, ordered lexicographically by
/// `(f(0), f(1), g(0), g(1))`.
pub fn deterministic_boxes() -> Vec<CorrelationBox> {
    (0..16).map(|k| CorrelationBox::deterministic([k >> 3 & 1, k >> 2 & 1], [k >> 1 & 1, k & 1])).collect()
}

const SIMPLEX_TOL: f64 = 1e-10;

/// Convex weights over [`deterministic_boxes`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalModel {
    weights: [f64; 16],
}

impl LocalModel {
    pub fn new(weights: [f64; 16]) -> Result<Self, BoxError> {
        if let Some(k) = weights.iter().position(|w| !w.is_finite() || *w < -SIMPLEX_TOL) {
            return Err(BoxError::Weights(format!("weight {k} = {}", weights[k])));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(BoxError::Weights(format!("weights sum to {total}")));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64; 16] {
        &self.weights
    }

    pub fn to_box(&self) -> CorrelationBox {
        let vertices = deterministic_boxes();
        let p = table_from(|a, b, x, y| {
            self.weights.iter().zip(&vertices).map(|(w, v)| w * v.prob(a, b, x, y)).sum::<f64>()
        });
        CorrelationBox { p }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LocalVerdict {
    Local(LocalModel),
    /// Functional on the matrix picture, shifted to vanish on the uniform
    /// box and scaled so that its maximum over local boxes is 2.
    NonLocal { functional: [[f64; 4]; 4], value: f64, local_max: f64, gap: f64 },
}

impl LocalVerdict {
    pub fn is_local(&self) -> bool {
        matches!(self, LocalVerdict::Local(_))
    }
}

pub fn local_membership(b: &CorrelationBox, tol: f64) -> LocalVerdict {
    let flat = |c: &CorrelationBox| raw_matrix(c.table()).iter().flatten().copied().collect::<Vec<f64>>();
    let vertices = deterministic_boxes();
    let query = HullQuery { vertices: vertices.iter().map(flat).collect(), target: flat(b), tol };
    match hull_membership(&query).expect("16 vertices of length 16") {
        HullMembership::Inside { weights } => {
            let clipped: Vec<f64> = weights.iter().map(|w| w.max(0.0)).collect();
            let total: f64 = clipped.iter().sum();
            let weights: [f64; 16] = std::array::from_fn(|k| clipped[k] / total);
            LocalVerdict::Local(LocalModel { weights })
        }
        HullMembership::Outside { separator, .. } => {
            let mut f = [[0.0; 4]; 4];
            for (k, v) in separator.iter().enumerate() {
                f[k / 4][k % 4] = *v;
            }
            // subtract each (x, y) block mean: a constant on normalized boxes
            for x in 0..2 {
                for y in 0..2 {
                    let cells = || (0..4).map(|k| (2 * x + k / 2, 2 * y + k % 2));
                    let mean = cells().map(|(i, j)| f[i][j]).sum::<f64>() / 4.0;
                    cells().for_each(|(i, j)| f[i][j] -= mean);
                }
            }
            let max = vertices.iter().map(|v| v.pair(&f)).fold(f64::NEG_INFINITY, f64::max);
            let scale = if max > 0.0 { 2.0 / max } else { 1.0 };
            let functional = f.map(|r| r.map(|v| v * scale));
            let local_max = max * scale;
            let value = b.pair(&functional);
            LocalVerdict::NonLocal { functional, value, local_max, gap: value - local_max }
        }
    }
}

/// Direct sum of the scalar witnesses of the deterministic boxes in `m`.
pub fn local_witness(m: &LocalModel) -> FactorWitness {
    let support: Vec<usize> = (0..16).filter(|&k| m.weights[k] > 0.0).collect();
    let fg = |k: usize| ([k >> 3 & 1, k >> 2 & 1], [k >> 1 & 1, k & 1]);
    let diag = |value: &dyn Fn(usize) -> f64| HermMatrix::diag(&support.iter().map(|&k| value(k)).collect::<Vec<_>>());
    let x = std::array::from_fn(|i| {
        let (x, a) = (i / 2, i % 2);
        diag(&|k| m.weights[k] * f64::from(u8::from(fg(k).0[x] == a)))
    });
    let y = std::array::from_fn(|j| {
        let (y, b) = (j / 2, j % 2);
        diag(&|k| f64::from(u8::from(fg(k).1[y] == b)))
    });
    FactorWitness::new(x, y).expect("deterministic witnesses are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::chsh_value;
    use crate::tensorlab::max_cone_construct;

    #[test]
    fn deterministic_vertices_are_local() {
        for (k, d) in deterministic_boxes().iter().enumerate() {
            match local_membership(d, 1e-9) {
                LocalVerdict::Local(m) => {
                    assert!((m.weights()[k] - 1.0).abs() < 1e-9);
                    assert!(chsh_value(d).abs() <= 2.0);
                }
                v => panic!("vertex {k}: {v:?}"),
            }
        }
        assert_eq!(deterministic_boxes()[6], CorrelationBox::deterministic([0, 1], [1, 0]));
    }

    #[test]
    fn uniform_is_local() {
        let v = local_membership(&CorrelationBox::uniform(), 1e-9);
        let LocalVerdict::Local(m) = v else { panic!("{v:?}") };
        let back = m.to_box();
        for (a, b) in back.table().iter().flatten().flatten().flatten().zip(CorrelationBox::uniform().table().iter().flatten().flatten().flatten()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn pr_is_nonlocal() {
        let LocalVerdict::NonLocal { value, local_max, gap, .. } = local_membership(&CorrelationBox::pr(), 1e-9) else {
            panic!("PR box declared local")
        };
        assert!((local_max - 2.0).abs() < 1e-12);
        assert!((value - 4.0).abs() < 1e-9, "{value}");
        assert!(gap >= 0.49);
    }

    #[test]
    fn local_witness_reproduces_box() {
        let m = LocalModel::new(std::array::from_fn(|k| if k % 5 == 0 { 0.25 } else { 0.0 })).unwrap();
        let q = max_cone_construct(&local_witness(&m)).unwrap();
        assert_eq!(q, m.to_box().to_matrix());
    }

    #[test]
    fn weights_validated() {
        assert!(LocalModel::new([0.1; 16]).is_err());
        let mut w = [0.0; 16];
        w[0] = 1.5;
        w[1] = -0.5;
        assert!(LocalModel::new(w).is_err());
    }
}
