//! Bipartite correlation boxes with two inputs and two outputs per party.
//!
//! A box `p(a, b | x, y)` sits in the 4×4 matrix picture as
//! `q[2x + a][2y + b]`, which is how it meets the tensor cones of
//! [`crate::tensorlab`]. Each `(x, y)` block of the matrix sums to one.

mod classify;
mod json;
mod local;
mod quantum;

pub use classify::{classify, classify_matrix, ClassReport, ClassifyOptions, QuantumVerdict};
pub use json::{read_box_json, write_box_json, BoxInput, InputForm};
pub use local::{deterministic_boxes, local_membership, local_witness, LocalModel, LocalVerdict};
pub use quantum::{
    chsh_functional, seesaw_maximize, strategy_to_box, strategy_witness, QuantumStrategy, SeesawResult,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensorlab::{BoxMatrix, TensorError};

pub const NEGATIVITY_TOL: f64 = 1e-12;
pub const NORMALIZATION_TOL: f64 = 1e-10;
pub const SIGNALING_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoxError {
    #[error("entries must be finite")]
    NonFinite,
    #[error("p[{a}][{b}][{x}][{y}] = {value} is negative")]
    Negative { a: usize, b: usize, x: usize, y: usize, value: f64 },
    #[error("block (x={x}, y={y}) sums to {sum}, expected 1")]
    Normalization { x: usize, y: usize, sum: f64 },
    #[error("party {party} signals: marginal for input {input}, outcome {outcome} changes by {defect:e}")]
    Signaling { party: char, input: usize, outcome: usize, defect: f64 },
    #[error("strategy invalid: {0}")]
    Strategy(String),
    #[error("local weights invalid: {0}")]
    Weights(String),
    #[error("invalid box JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// `p[a][b][x][y]`.
pub type Table = [[[[f64; 2]; 2]; 2]; 2];

/// Validated correlation box: nonnegative, normalized and non-signaling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Table", into = "Table")]
pub struct CorrelationBox {
    p: Table,
}

impl CorrelationBox {
    pub fn new(p: Table) -> Result<Self, BoxError> {
        validate(&p)?;
        Ok(Self { p })
    }

    pub fn table(&self) -> &Table {
        &self.p
    }

    pub fn prob(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.p[a][b][x][y]
    }

    /// `p = 1/2` iff `a ⊕ b = x·y`.
    pub fn pr() -> Self {
        Self { p: table_from(|a, b, x, y| if a ^ b == x & y { 0.5 } else { 0.0 }) }
    }

    pub fn uniform() -> Self {
        Self { p: [[[[0.25; 2]; 2]; 2]; 2] }
    }

    /// `a = f(x)`, `b = g(y)` with certainty.
    pub fn deterministic(f: [usize; 2], g: [usize; 2]) -> Self {
        Self { p: table_from(|a, b, x, y| f64::from(u8::from(a == f[x] && b == g[y]))) }
    }

    pub fn to_matrix(&self) -> BoxMatrix {
        BoxMatrix::new(raw_matrix(&self.p)).expect("non-signaling boxes are balanced")
    }

    /// Inverse of [`CorrelationBox::to_matrix`].
    pub fn from_matrix(q: &[[f64; 4]; 4]) -> Result<Self, BoxError> {
        Self::new(table_from(|a, b, x, y| q[2 * x + a][2 * y + b]))
    }

    /// Correlator `E(x, y) = Σ (-1)^{a⊕b} p(a, b | x, y)`.
    pub fn correlator(&self, x: usize, y: usize) -> f64 {
        let mut e = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                e += if a == b { 1.0 } else { -1.0 } * self.p[a][b][x][y];
            }
        }
        e
    }

    /// `Σ F_ij q_ij` for a functional on the matrix picture.
    pub fn pair(&self, functional: &[[f64; 4]; 4]) -> f64 {
        let q = raw_matrix(&self.p);
        q.iter().flatten().zip(functional.iter().flatten()).map(|(a, b)| a * b).sum()
    }
}

impl TryFrom<Table> for CorrelationBox {
    type Error = BoxError;

    fn try_from(p: Table) -> Result<Self, BoxError> {
        Self::new(p)
    }
}

impl From<CorrelationBox> for Table {
    fn from(b: CorrelationBox) -> Self {
        b.p
    }
}

pub fn box_to_matrix(b: &CorrelationBox) -> BoxMatrix {
    b.to_matrix()
}

pub fn matrix_to_box(q: &BoxMatrix) -> Result<CorrelationBox, BoxError> {
    CorrelationBox::from_matrix(q.entries())
}

/// `E(0,0) + E(0,1) + E(1,0) - E(1,1)`.
pub fn chsh_value(b: &CorrelationBox) -> f64 {
    b.correlator(0, 0) + b.correlator(0, 1) + b.correlator(1, 0) - b.correlator(1, 1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonSignaling {
    pub verdict: bool,
    /// Largest row or column imbalance `|q_i1 + q_i2 - q_i3 - q_i4|`.
    pub defect: f64,
    /// Least-squares balanced matrix, offered when `defect ≤ 10·tol`.
    pub repaired: Option<[[f64; 4]; 4]>,
}

/// Matrix-level non-signaling test: every row and column has
/// `q₁ + q₂ = q₃ + q₄`.
pub fn is_nonsignaling(q: &[[f64; 4]; 4], tol: f64) -> NonSignaling {
    let sign = [1.0, 1.0, -1.0, -1.0];
    let mut defect = 0f64;
    for i in 0..4 {
        let row: f64 = (0..4).map(|j| q[i][j] * sign[j]).sum();
        let col: f64 = (0..4).map(|j| q[j][i] * sign[j]).sum();
        defect = defect.max(row.abs()).max(col.abs());
    }
    let repaired = (defect <= 10.0 * tol).then(|| {
        // P q P with P = I - uuᵀ/4 is the orthogonal projection onto the balanced subspace
        let p = |i: usize, j: usize| f64::from(u8::from(i == j)) - sign[i] * sign[j] / 4.0;
        let mut out = [[0.0; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..4).flat_map(|k| (0..4).map(move |l| (k, l))).map(|(k, l)| p(i, k) * q[k][l] * p(l, j)).sum();
            }
        }
        out
    });
    NonSignaling { verdict: defect <= tol, defect, repaired }
}

pub(crate) fn table_from(f: impl Fn(usize, usize, usize, usize) -> f64) -> Table {
    let mut p = [[[[0.0; 2]; 2]; 2]; 2];
    for (a, pa) in p.iter_mut().enumerate() {
        for (b, pb) in pa.iter_mut().enumerate() {
            for (x, px) in pb.iter_mut().enumerate() {
                for (y, v) in px.iter_mut().enumerate() {
                    *v = f(a, b, x, y);
                }
            }
        }
    }
    p
}

pub(crate) fn raw_matrix(p: &Table) -> [[f64; 4]; 4] {
    let mut q = [[0.0; 4]; 4];
    for (i, row) in q.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = p[i % 2][j % 2][i / 2][j / 2];
        }
    }
    q
}

fn validate(p: &Table) -> Result<(), BoxError> {
    let idx = || (0..16).map(|k| (k >> 3 & 1, k >> 2 & 1, k >> 1 & 1, k & 1));
    if idx().any(|(a, b, x, y)| !p[a][b][x][y].is_finite()) {
        return Err(BoxError::NonFinite);
    }
    if let Some((a, b, x, y)) = idx().find(|&(a, b, x, y)| p[a][b][x][y] < -NEGATIVITY_TOL) {
        return Err(BoxError::Negative { a, b, x, y, value: p[a][b][x][y] });
    }
    for x in 0..2 {
        for y in 0..2 {
            let sum: f64 = (0..4).map(|k| p[k / 2][k % 2][x][y]).sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(BoxError::Normalization { x, y, sum });
            }
        }
    }
    for input in 0..2 {
        for outcome in 0..2 {
            let alice = |y: usize| p[outcome][0][input][y] + p[outcome][1][input][y];
            let defect = (alice(0) - alice(1)).abs();
            if defect > SIGNALING_TOL {
                return Err(BoxError::Signaling { party: 'A', input, outcome, defect });
            }
            let bob = |x: usize| p[0][outcome][x][input] + p[1][outcome][x][input];
            let defect = (bob(0) - bob(1)).abs();
            if defect > SIGNALING_TOL {
                return Err(BoxError::Signaling { party: 'B', input, outcome, defect });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Random non-signaling box as a mixture of random deterministic boxes
    /// and the PR box.
    pub(crate) fn random_box(rng: &mut ChaCha8Rng) -> CorrelationBox {
        let mut p = [[[[0.0; 2]; 2]; 2]; 2];
        let parts: Vec<(f64, CorrelationBox)> = (0..4)
            .map(|k| {
                let b = if k == 0 {
                    CorrelationBox::pr()
                } else {
                    CorrelationBox::deterministic([rng.gen_range(0..2), rng.gen_range(0..2)], [rng.gen_range(0..2), rng.gen_range(0..2)])
                };
                (rng.gen::<f64>(), b)
            })
            .collect();
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        for (w, b) in &parts {
            let t = table_from(|a, bb, x, y| w / total * b.prob(a, bb, x, y));
            p = table_from(|a, bb, x, y| p[a][bb][x][y] + t[a][bb][x][y]);
        }
        CorrelationBox::new(p).unwrap()
    }

    #[test]
    fn matrix_picture() {
        assert_eq!(CorrelationBox::uniform().to_matrix(), BoxMatrix::uniform());
        assert_eq!(CorrelationBox::pr().to_matrix(), BoxMatrix::pr().scale(0.5));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let b = random_box(&mut rng);
            assert_eq!(matrix_to_box(&box_to_matrix(&b)).unwrap(), b);
        }
    }

    #[test]
    fn validation_names_the_failure() {
        let mut p = *CorrelationBox::uniform().table();
        p[1][0][1][1] = -0.1;
        assert!(matches!(CorrelationBox::new(p), Err(BoxError::Negative { a: 1, b: 0, x: 1, y: 1, .. })));
        let mut p = *CorrelationBox::uniform().table();
        p[0][0][0][1] += 0.1;
        assert!(matches!(CorrelationBox::new(p), Err(BoxError::Normalization { x: 0, y: 1, .. })));
        let mut p = *CorrelationBox::uniform().table();
        p[0][0][0][0] += 0.1;
        p[0][1][0][0] -= 0.1;
        assert!(matches!(CorrelationBox::new(p), Err(BoxError::Signaling { party: 'B', .. })));
    }

    #[test]
    fn chsh_values() {
        assert_eq!(chsh_value(&CorrelationBox::pr()), 4.0);
        assert_eq!(chsh_value(&CorrelationBox::uniform()), 0.0);
        for d in deterministic_boxes() {
            assert_eq!(chsh_value(&d).abs(), 2.0);
        }
    }

    #[test]
    fn nonsignaling_matrix_check() {
        let det = CorrelationBox::deterministic([0, 1], [1, 1]).to_matrix();
        assert!(is_nonsignaling(det.entries(), 1e-12).verdict);
        assert!(is_nonsignaling(BoxMatrix::pr().scale(0.5).entries(), 1e-12).verdict);
        let mut q = *BoxMatrix::uniform().entries();
        q[0][0] += 1e-3;
        let r = is_nonsignaling(&q, 1e-6);
        assert!(!r.verdict && r.repaired.is_none());
        q[0][0] = 0.25 + 5e-6;
        let r = is_nonsignaling(&q, 1e-6);
        assert!(!r.verdict);
        let fixed = r.repaired.unwrap();
        assert!(is_nonsignaling(&fixed, 1e-15).verdict);
    }

    #[test]
    fn definitions_intertwine() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut signaling = 0;
        for _ in 0..200 {
            let mut p = *random_box(&mut rng).table();
            let (x, y) = (rng.gen_range(0..2), rng.gen_range(0..2));
            let (from, to) = (rng.gen_range(0..4), rng.gen_range(0..4));
            let eps = 1e-3f64.min(p[from / 2][from % 2][x][y]);
            p[from / 2][from % 2][x][y] -= eps;
            p[to / 2][to % 2][x][y] += eps;
            let box_level = validate(&p).is_ok();
            let matrix_level = is_nonsignaling(&raw_matrix(&p), SIGNALING_TOL).verdict;
            assert_eq!(box_level, matrix_level);
            signaling += usize::from(!box_level);
        }
        assert!(signaling > 50);
    }
}
