use serde::{Deserialize, Serialize};

use super::TensorError;

/// Row/column balance tolerance accepted (and then repaired) by [`BoxMatrix::new`].
pub const BALANCE_TOL: f64 = 1e-10;

/// Element of `V ⊗ V` as a 4×4 real matrix, `q[2x+a][2y+b]`.
///
/// Every row and every column satisfies `q₁ + q₂ = q₃ + q₄`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 4]; 4]", into = "[[f64; 4]; 4]")]
pub struct BoxMatrix {
    q: [[f64; 4]; 4],
}

const ROUNDING_ULPS: f64 = 8.0;

const BALANCE: [f64; 4] = [1.0, 1.0, -1.0, -1.0];

impl BoxMatrix {
    /// Accepts `q` if its row and column imbalances are within
    /// [`BALANCE_TOL`] (relative to the largest entry) and projects it onto
    /// the balanced subspace with `P q P`, `P = I - uuᵀ/4`, `u = (1,1,-1,-1)`.
    pub fn new(q: [[f64; 4]; 4]) -> Result<Self, TensorError> {
        if q.iter().flatten().any(|x| !x.is_finite()) {
            return Err(TensorError::NonFinite);
        }
        let scale = q.iter().flatten().fold(1f64, |m, x| m.max(x.abs()));
        let imbalance = max_imbalance(&q);
        if imbalance > BALANCE_TOL * scale {
            return Err(TensorError::Unbalanced { imbalance });
        }
        // rounding-level imbalance is left alone so conversions stay exact
        let repair = imbalance > ROUNDING_ULPS * f64::EPSILON * scale;
        Ok(Self { q: if repair { balance(&q) } else { q } })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, TensorError> {
        if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
            return Err(TensorError::Shape);
        }
        let mut q = [[0.0; 4]; 4];
        for (dst, src) in q.iter_mut().zip(rows) {
            dst.copy_from_slice(src);
        }
        Self::new(q)
    }

    pub fn entries(&self) -> &[[f64; 4]; 4] {
        &self.q
    }

    /// Entry with the 1-based indices used in the inequality statements.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.q[i - 1][j - 1]
    }

    pub fn scale(&self, t: f64) -> Self {
        Self { q: self.q.map(|r| r.map(|x| x * t)) }
    }

    pub fn total(&self) -> f64 {
        self.q.iter().flatten().sum()
    }

    /// Applies the index permutation `perm` to rows and columns alike.
    pub fn permuted(&self, perm: [usize; 4]) -> Self {
        let mut q = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                q[perm[i]][perm[j]] = self.q[i][j];
            }
        }
        Self { q }
    }

    /// The PR-box pattern `[[1,0,1,0],[0,1,0,1],[1,0,0,1],[0,1,1,0]]`.
    pub fn pr() -> Self {
        Self {
            q: [[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0], [1.0, 0.0, 0.0, 1.0], [0.0, 1.0, 1.0, 0.0]],
        }
    }

    /// `[[1,0,1,0],[0,1,0,1],[1,0,1,0],[0,1,0,1]]`, a max-cone element.
    pub fn perfect_correlation() -> Self {
        Self {
            q: [[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0], [1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]],
        }
    }

    pub fn uniform() -> Self {
        Self { q: [[0.25; 4]; 4] }
    }
}

impl TryFrom<[[f64; 4]; 4]> for BoxMatrix {
    type Error = TensorError;

    fn try_from(q: [[f64; 4]; 4]) -> Result<Self, TensorError> {
        Self::new(q)
    }
}

impl From<BoxMatrix> for [[f64; 4]; 4] {
    fn from(b: BoxMatrix) -> Self {
        b.q
    }
}

fn max_imbalance(q: &[[f64; 4]; 4]) -> f64 {
    let mut worst = 0f64;
    for i in 0..4 {
        let row: f64 = (0..4).map(|j| q[i][j] * BALANCE[j]).sum();
        let col: f64 = (0..4).map(|j| q[j][i] * BALANCE[j]).sum();
        worst = worst.max(row.abs()).max(col.abs());
    }
    worst
}

fn balance(q: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let p = |i: usize, j: usize| f64::from(u8::from(i == j)) - BALANCE[i] * BALANCE[j] / 4.0;
    let mut qp = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            qp[i][j] = (0..4).map(|k| q[i][k] * p(k, j)).sum();
        }
    }
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| p(i, k) * qp[k][j]).sum();
        }
    }
    out
}

pub fn min_cone_member(b: &BoxMatrix, tol: f64) -> bool {
    b.q.iter().flatten().all(|&x| x >= -tol)
}

/// All sums `Σ_{i=1,2} √q_{b+i,a+j} √q_{b+i,c+k}` for `a, b, c ∈ {0, 2}`
/// and `j, k ∈ {1, 2}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct STable {
    sums: [[[[[f64; 2]; 2]; 2]; 2]; 2],
}

impl STable {
    fn new(b: &BoxMatrix) -> Self {
        let r = b.q.map(|row| row.map(f64::sqrt));
        let mut sums = [[[[[0.0; 2]; 2]; 2]; 2]; 2];
        for (ai, a) in [0, 2].into_iter().enumerate() {
            for (ci, c) in [0, 2].into_iter().enumerate() {
                for (bi, bb) in [0, 2].into_iter().enumerate() {
                    for j in 0..2 {
                        for k in 0..2 {
                            sums[ai][ci][bi][j][k] =
                                (0..2).map(|i| r[bb + i][a + j] * r[bb + i][c + k]).sum();
                        }
                    }
                }
            }
        }
        Self { sums }
    }

    /// The sum for `b`, with `a, b, c ∈ {0, 2}` and 1-based `j, k`.
    pub fn term(&self, a: usize, c: usize, b: usize, j: usize, k: usize) -> f64 {
        self.sums[a / 2][c / 2][b / 2][j - 1][k - 1]
    }

    /// `S_{a,c}(j,k) = min_b` of [`STable::term`].
    pub fn s(&self, a: usize, c: usize, j: usize, k: usize) -> f64 {
        self.term(a, c, 0, j, k).min(self.term(a, c, 2, j, k))
    }

    /// `Σ_{j,k} S_{a,c}(j,k)`, the minimum over `b` taken per term.
    pub fn inner_min_sum(&self, a: usize, c: usize) -> f64 {
        (1..=2).flat_map(|j| (1..=2).map(move |k| (j, k))).map(|(j, k)| self.s(a, c, j, k)).sum()
    }

    /// `min_b Σ_{j,k}` of [`STable::term`], the minimum taken after summing.
    pub fn outer_min_sum(&self, a: usize, c: usize) -> f64 {
        [0, 2]
            .into_iter()
            .map(|b| {
                (1..=2).flat_map(|j| (1..=2).map(move |k| (j, k))).map(|(j, k)| self.term(a, c, b, j, k)).sum()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Both sides of the square-root Bell inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellValue {
    /// `Σ_{i,j=1,2} q_{d+i,d+j}` for `d = 0` and `d = 2`.
    pub lhs: [f64; 2],
    /// `min_{a,c} Σ_{j,k} S_{a,c}(j,k)` with the per-term minimum over `b`.
    pub rhs: f64,
    /// The minimizing `(a, c)` for `rhs` (lowest in lexicographic order).
    pub argmin: (usize, usize),
    /// Same with the minimum over `b` taken outside the sum over `(j, k)`.
    pub rhs_outer: f64,
    pub table: STable,
}

/// Slack in the violation test, relative to `max(1, lhs)`.
pub const VIOLATION_TOL: f64 = 1e-12;

impl BellValue {
    pub fn violated(&self, d: usize) -> bool {
        let lhs = self.lhs[d / 2];
        lhs > self.rhs + VIOLATION_TOL * lhs.max(1.0)
    }

    pub fn any_violated(&self) -> bool {
        self.violated(0) || self.violated(2)
    }

    pub fn outer_violated(&self, d: usize) -> bool {
        let lhs = self.lhs[d / 2];
        lhs > self.rhs_outer + VIOLATION_TOL * lhs.max(1.0)
    }
}

/// Entries down to this value are treated as zero instead of rejected.
const NEGATIVE_SLACK: f64 = 1e-12;

pub fn sqrt_bell_value(b: &BoxMatrix) -> Result<BellValue, TensorError> {
    let scale = b.q.iter().flatten().fold(1f64, |m, x| m.max(x.abs()));
    for (i, row) in b.q.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            if x < -NEGATIVE_SLACK * scale {
                return Err(TensorError::NegativeEntry { row: i, col: j, value: x });
            }
        }
    }
    let clipped = BoxMatrix { q: b.q.map(|r| r.map(|x| x.max(0.0))) };
    let table = STable::new(&clipped);
    let lhs = [0, 2].map(|d| (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| clipped.q[d + i][d + j]).sum());
    let mut rhs = f64::INFINITY;
    let mut argmin = (0, 0);
    let mut rhs_outer = f64::INFINITY;
    for a in [0, 2] {
        for c in [0, 2] {
            let v = table.inner_min_sum(a, c);
            if v < rhs {
                rhs = v;
                argmin = (a, c);
            }
            rhs_outer = rhs_outer.min(table.outer_min_sum(a, c));
        }
    }
    Ok(BellValue { lhs, rhs, argmin, rhs_outer, table })
}
