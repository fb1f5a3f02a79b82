use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use super::ConvexError;
use crate::numerics::{GeneralMatrix, HermMatrix, C64};

/// Index of a block inside a [`FeasibilityProblem`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BlockKind {
    /// Hermitian block constrained to `X ⪰ delta·I`.
    Psd { delta: f64 },
    /// Unconstrained Hermitian block (an auxiliary variable).
    Free,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub name: String,
    pub dim: usize,
    pub kind: BlockKind,
}

impl BlockSpec {
    /// Number of real coordinates of a Hermitian `dim × dim` block.
    pub fn real_len(&self) -> usize {
        self.dim * self.dim
    }
}

/// Contributes `Re(coef · X_block[row][col])` to a constraint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub block: BlockId,
    pub row: usize,
    pub col: usize,
    pub coef: C64,
}

/// `Σ terms = target`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineConstraint {
    pub terms: Vec<Term>,
    pub target: f64,
}

/// `coef · X_block[row0.., col0..]`, a rectangular window of a block scaled
/// by a complex number. Used by [`ProblemBuilder::matrix_equation`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub block: BlockId,
    pub row0: usize,
    pub col0: usize,
    pub coef: C64,
}

impl Window {
    pub fn whole(block: BlockId, coef: f64) -> Self {
        Self { block, row0: 0, col0: 0, coef: C64::new(coef, 0.0) }
    }

    pub fn at(block: BlockId, row0: usize, col0: usize, coef: C64) -> Self {
        Self { block, row0, col0, coef }
    }
}

/// Affine slice intersected with a product of (shifted) PSD cones.
///
/// Block entries are coordinatized isometrically: diagonal entries as they
/// are, each strictly-upper entry `x_ij` as `√2·(Re x_ij, Im x_ij)`, so the
/// Euclidean norm of the coordinate vector is the Frobenius norm.
#[derive(Clone, Debug)]
pub struct FeasibilityProblem {
    blocks: Vec<BlockSpec>,
    constraints: Vec<AffineConstraint>,
    offsets: Vec<usize>,
    affine: AffineProjector,
}

impl FeasibilityProblem {
    pub fn builder() -> ProblemBuilder {
        ProblemBuilder::default()
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn constraints(&self) -> &[AffineConstraint] {
        &self.constraints
    }

    pub fn block_id(&self, name: &str) -> Option<BlockId> {
        self.blocks.iter().position(|b| b.name == name).map(BlockId)
    }

    /// Total number of real coordinates.
    pub fn real_len(&self) -> usize {
        self.offsets.last().copied().unwrap_or(0)
            + self.blocks.last().map_or(0, BlockSpec::real_len)
    }

    /// Number of linearly independent affine constraints.
    pub fn constraint_rank(&self) -> usize {
        self.affine.rank()
    }

    pub(crate) fn affine(&self) -> &AffineProjector {
        &self.affine
    }

    pub(crate) fn block_range(&self, b: usize) -> std::ops::Range<usize> {
        let start = self.offsets[b];
        start..start + self.blocks[b].real_len()
    }

    /// Coordinates of a full assignment (one matrix per block).
    pub fn flatten(&self, point: &[HermMatrix]) -> Result<Vec<f64>, ConvexError> {
        if point.len() != self.blocks.len() {
            return Err(ConvexError::PointShape { expected: self.blocks.len(), got: point.len() });
        }
        let mut out = Vec::with_capacity(self.real_len());
        for (spec, m) in self.blocks.iter().zip(point) {
            if m.dim() != spec.dim {
                return Err(ConvexError::BlockDim {
                    block: spec.name.clone(),
                    expected: spec.dim,
                    got: m.dim(),
                });
            }
            out.extend(herm_to_coords(m));
        }
        Ok(out)
    }

    pub fn unflatten(&self, coords: &[f64]) -> Vec<HermMatrix> {
        (0..self.blocks.len())
            .map(|b| coords_to_herm(&coords[self.block_range(b)], self.blocks[b].dim))
            .collect()
    }

    /// Largest absolute violation of the affine constraints at `point`,
    /// evaluated directly from the constraint terms.
    pub fn constraint_residual(&self, point: &[HermMatrix]) -> f64 {
        self.constraints
            .iter()
            .map(|c| {
                let value: f64 = c
                    .terms
                    .iter()
                    .map(|t| (t.coef * point[t.block.0][(t.row, t.col)]).re)
                    .sum();
                (value - c.target).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Smallest value of `λ_min(X_b) - delta_b` over PSD blocks (`+∞` when
    /// there are none).
    pub fn cone_margin(&self, point: &[HermMatrix]) -> f64 {
        self.blocks
            .iter()
            .zip(point)
            .filter_map(|(spec, m)| match spec.kind {
                BlockKind::Psd { delta } => Some(m.min_eigenvalue() - delta),
                BlockKind::Free => None,
            })
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Default, Debug)]
pub struct ProblemBuilder {
    blocks: Vec<BlockSpec>,
    constraints: Vec<AffineConstraint>,
}

impl ProblemBuilder {
    pub fn psd_block(&mut self, name: impl Into<String>, dim: usize, delta: f64) -> BlockId {
        self.blocks.push(BlockSpec { name: name.into(), dim, kind: BlockKind::Psd { delta } });
        BlockId(self.blocks.len() - 1)
    }

    pub fn free_block(&mut self, name: impl Into<String>, dim: usize) -> BlockId {
        self.blocks.push(BlockSpec { name: name.into(), dim, kind: BlockKind::Free });
        BlockId(self.blocks.len() - 1)
    }

    pub fn constrain(&mut self, terms: Vec<Term>, target: f64) -> &mut Self {
        self.constraints.push(AffineConstraint { terms, target });
        self
    }

    /// Adds `Σ_k coef_k · X_{b_k}[window_k] = rhs` entrywise (real and
    /// imaginary parts). Windows take the shape of `rhs`.
    pub fn matrix_equation(&mut self, windows: &[Window], rhs: &GeneralMatrix) -> &mut Self {
        for i in 0..rhs.rows() {
            for j in 0..rhs.cols() {
                let re_terms = windows
                    .iter()
                    .map(|w| Term { block: w.block, row: w.row0 + i, col: w.col0 + j, coef: w.coef })
                    .collect();
                // Im(z) = Re(-i z)
                let im_terms = windows
                    .iter()
                    .map(|w| Term {
                        block: w.block,
                        row: w.row0 + i,
                        col: w.col0 + j,
                        coef: w.coef * C64::new(0.0, -1.0),
                    })
                    .collect();
                self.constrain(re_terms, rhs[(i, j)].re);
                self.constrain(im_terms, rhs[(i, j)].im);
            }
        }
        self
    }

    pub fn build(self) -> Result<FeasibilityProblem, ConvexError> {
        let mut offsets = Vec::with_capacity(self.blocks.len());
        let mut total = 0;
        for spec in &self.blocks {
            if spec.dim == 0 {
                return Err(ConvexError::EmptyBlock(spec.name.clone()));
            }
            if let BlockKind::Psd { delta } = spec.kind {
                if !(delta >= 0.0) {
                    return Err(ConvexError::NegativeDelta { block: spec.name.clone(), delta });
                }
            }
            offsets.push(total);
            total += spec.real_len();
        }
        let mut rows = Vec::with_capacity(self.constraints.len());
        for (k, c) in self.constraints.iter().enumerate() {
            let mut row = vec![0.0; total];
            for t in &c.terms {
                let spec = self
                    .blocks
                    .get(t.block.0)
                    .ok_or(ConvexError::UnknownBlock { constraint: k, block: t.block.0 })?;
                if t.row >= spec.dim || t.col >= spec.dim {
                    return Err(ConvexError::EntryOutOfRange {
                        constraint: k,
                        block: spec.name.clone(),
                        row: t.row,
                        col: t.col,
                    });
                }
                for (idx, w) in entry_functional(spec.dim, t.row, t.col, t.coef) {
                    row[offsets[t.block.0] + idx] += w;
                }
            }
            rows.push((row, c.target));
        }
        let affine = AffineProjector::new(total, rows)?;
        Ok(FeasibilityProblem { blocks: self.blocks, constraints: self.constraints, offsets, affine })
    }
}

/// Coordinate index of the diagonal entry `i` and of the pair for `i < j`.
fn diag_index(i: usize) -> usize {
    i
}

fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    // strictly-upper pairs enumerated row-major after the n diagonal slots
    let before: usize = (0..i).map(|r| n - 1 - r).sum();
    n + 2 * (before + (j - i - 1))
}

/// Real-linear functional `X ↦ Re(coef · X_ij)` in block coordinates.
fn entry_functional(n: usize, i: usize, j: usize, coef: C64) -> Vec<(usize, f64)> {
    use std::cmp::Ordering::*;
    match i.cmp(&j) {
        Equal => vec![(diag_index(i), coef.re)],
        Less => {
            let k = pair_index(n, i, j);
            vec![(k, coef.re * FRAC_1_SQRT_2), (k + 1, -coef.im * FRAC_1_SQRT_2)]
        }
        Greater => {
            let k = pair_index(n, j, i);
            vec![(k, coef.re * FRAC_1_SQRT_2), (k + 1, coef.im * FRAC_1_SQRT_2)]
        }
    }
}

pub(crate) fn herm_to_coords(m: &HermMatrix) -> Vec<f64> {
    let n = m.dim();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        out[diag_index(i)] = m[(i, i)].re;
        for j in i + 1..n {
            let k = pair_index(n, i, j);
            out[k] = m[(i, j)].re * std::f64::consts::SQRT_2;
            out[k + 1] = m[(i, j)].im * std::f64::consts::SQRT_2;
        }
    }
    out
}

pub(crate) fn coords_to_herm(coords: &[f64], n: usize) -> HermMatrix {
    let mut g = GeneralMatrix::zeros(n, n);
    for i in 0..n {
        g[(i, i)] = C64::new(coords[diag_index(i)], 0.0);
        for j in i + 1..n {
            let k = pair_index(n, i, j);
            let z = C64::new(coords[k], coords[k + 1]) * FRAC_1_SQRT_2;
            g[(i, j)] = z;
            g[(j, i)] = z.conj();
        }
    }
    HermMatrix::new(g).expect("assembled Hermitian")
}

/// Orthogonal projector onto `{x : A x = b}`, held as an orthonormal basis of
/// the row space of `A` (modified Gram–Schmidt with one reorthogonalization
/// pass) together with the transformed targets.
#[derive(Clone, Debug)]
pub(crate) struct AffineProjector {
    basis: Vec<Vec<f64>>,
    targets: Vec<f64>,
}

const DEPENDENT_REL: f64 = 1e-10;
const INCONSISTENT_REL: f64 = 1e-9;

impl AffineProjector {
    fn new(len: usize, rows: Vec<(Vec<f64>, f64)>) -> Result<Self, ConvexError> {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut targets = Vec::new();
        for (k, (row, target)) in rows.into_iter().enumerate() {
            debug_assert_eq!(row.len(), len);
            let norm0 = dot(&row, &row).sqrt();
            let mut r = row;
            let mut t = target;
            for _ in 0..2 {
                for (q, tau) in basis.iter().zip(&targets) {
                    let alpha = dot(q, &r);
                    axpy(-alpha, q, &mut r);
                    t -= alpha * tau;
                }
            }
            let norm = dot(&r, &r).sqrt();
            if norm <= DEPENDENT_REL * norm0.max(1e-300) || norm0 == 0.0 {
                if t.abs() > INCONSISTENT_REL * (1.0 + target.abs()) {
                    return Err(ConvexError::InconsistentConstraints { constraint: k, residual: t });
                }
                continue;
            }
            r.iter_mut().for_each(|x| *x /= norm);
            basis.push(r);
            targets.push(t / norm);
        }
        Ok(Self { basis, targets })
    }

    pub(crate) fn rank(&self) -> usize {
        self.basis.len()
    }

    pub(crate) fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        for (q, tau) in self.basis.iter().zip(&self.targets) {
            let excess = dot(q, x) - tau;
            axpy(-excess, q, &mut out);
        }
        out
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
