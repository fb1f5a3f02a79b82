//! Coefficient models of small operator systems: ℓ∞ vectors, the NC(2)
//! dual space `V`, the direct-sum model `W` of NC(n)^d, tridiagonal
//! matrices with their quotient onto `S_{k-1}`, and trigonometric
//! polynomials of degree one on the circle.
//!
//! Generators are never materialized as operators. Elements live as
//! coefficient tuples and states act through explicit pairings.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::convex::{solve_feasibility, FeasibilityProblem, SolveReport, Window, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::numerics::{is_psd, GeneralMatrix, HermMatrix, C64};

/// Tolerance for the `a + b = c + d` constraint on [`VVec`].
pub const V_CONSTRAINT_TOL: f64 = 1e-10;
/// Tolerance for `|z| = 1` in [`s1_eval`].
pub const UNIMODULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpsysError {
    #[error("expected a vector of length {expected}, got {got}")]
    Length { expected: usize, got: usize },
    #[error("a + b - c - d = {residual:e} violates the V constraint")]
    VConstraint { residual: f64 },
    #[error("coefficients have dimensions {dims:?}")]
    DimensionMismatch { dims: Vec<usize> },
    #[error("|z| = {modulus} is not 1")]
    NotUnimodular { modulus: f64 },
    #[error("W needs n >= 2 blocks, got {0}")]
    TooFewBlocks(usize),
    #[error("tridiagonal of size {k} needs {expected} super-diagonal entries, got {got}")]
    SuperLength { k: usize, expected: usize, got: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LInfVec {
    pub values: Vec<f64>,
}

impl LInfVec {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_positive(&self) -> bool {
        self.values.iter().all(|&x| x >= 0.0)
    }
}

/// Coordinates `(f(p₁), f(q₁), f(p₂), f(q₂))` of a functional on NC(2).
/// Only `a, b, c` are stored; `d = a + b - c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VVec {
    a: f64,
    b: f64,
    c: f64,
}

impl VVec {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, OpsysError> {
        let residual = a + b - c - d;
        let scale = 1f64.max(a.abs()).max(b.abs()).max(c.abs()).max(d.abs());
        if residual.abs() > V_CONSTRAINT_TOL * scale {
            return Err(OpsysError::VConstraint { residual });
        }
        Ok(Self { a, b, c })
    }

    pub fn from_free(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d()]
    }

    pub fn d(&self) -> f64 {
        self.a + self.b - self.c
    }

    pub fn is_positive(&self) -> bool {
        self.entries().iter().all(|&x| x >= 0.0)
    }
}

/// `C₀ ⊗ 1 + C₁ ⊗ h₁ + C₂ ⊗ h₂` with Hermitian coefficients of a common size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NC2Coeff {
    c0: HermMatrix,
    c1: HermMatrix,
    c2: HermMatrix,
}

impl NC2Coeff {
    pub fn new(c0: HermMatrix, c1: HermMatrix, c2: HermMatrix) -> Result<Self, OpsysError> {
        let dims = vec![c0.dim(), c1.dim(), c2.dim()];
        if dims.iter().any(|&d| d != dims[0]) {
            return Err(OpsysError::DimensionMismatch { dims });
        }
        Ok(Self { c0, c1, c2 })
    }

    pub fn scalar(c0: f64, c1: f64, c2: f64) -> Self {
        Self { c0: HermMatrix::diag(&[c0]), c1: HermMatrix::diag(&[c1]), c2: HermMatrix::diag(&[c2]) }
    }

    pub fn dim(&self) -> usize {
        self.c0.dim()
    }

    pub fn coefficients(&self) -> [&HermMatrix; 3] {
        [&self.c0, &self.c1, &self.c2]
    }

    /// `(c0, c1, c2)` when the coefficients are 1×1.
    pub fn as_scalar(&self) -> Option<[f64; 3]> {
        (self.dim() == 1).then(|| [self.c0[(0, 0)].re, self.c1[(0, 0)].re, self.c2[(0, 0)].re])
    }
}

/// `⊕_k [[a, o_k], [o_k, a]]`, one 2×2 block per off-diagonal value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WElem {
    pub diag: f64,
    offdiags: Vec<f64>,
}

impl WElem {
    pub fn new(diag: f64, offdiags: Vec<f64>) -> Result<Self, OpsysError> {
        if offdiags.len() < 2 {
            return Err(OpsysError::TooFewBlocks(offdiags.len()));
        }
        Ok(Self { diag, offdiags })
    }

    pub fn n(&self) -> usize {
        self.offdiags.len()
    }

    pub fn offdiags(&self) -> &[f64] {
        &self.offdiags
    }

    pub fn is_positive(&self) -> bool {
        self.offdiags.iter().all(|o| self.diag >= o.abs())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriDiag {
    diagonal: Vec<C64>,
    upper: Vec<C64>,
}

impl TriDiag {
    pub fn new(diagonal: Vec<C64>, upper: Vec<C64>) -> Result<Self, OpsysError> {
        let k = diagonal.len();
        if k == 0 || upper.len() != k - 1 {
            return Err(OpsysError::SuperLength { k, expected: k.saturating_sub(1), got: upper.len() });
        }
        Ok(Self { diagonal, upper })
    }

    pub fn k(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[C64] {
        &self.diagonal
    }

    pub fn upper(&self) -> &[C64] {
        &self.upper
    }

    /// The k×k matrix with sub-diagonal `conj(upper)`.
    pub fn to_matrix(&self) -> GeneralMatrix {
        let k = self.k();
        GeneralMatrix::from_fn(k, k, |i, j| match (i, j) {
            _ if i == j => self.diagonal[i],
            _ if j == i + 1 => self.upper[i],
            _ if i == j + 1 => self.upper[j].conj(),
            _ => C64::new(0.0, 0.0),
        })
    }
}

/// Image of a tridiagonal matrix in `S_{k-1}`: `c0·1 + Σ c_j u_j + h.c.`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SCoeffs {
    pub c0: C64,
    pub c: Vec<C64>,
}

/// `α₀ + α₁ z + α₁* z̄` on the unit circle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct S1Elem {
    coeff0: HermMatrix,
    coeff1: GeneralMatrix,
}

impl S1Elem {
    pub fn new(coeff0: HermMatrix, coeff1: GeneralMatrix) -> Result<Self, OpsysError> {
        if coeff1.rows() != coeff0.dim() || coeff1.cols() != coeff0.dim() {
            return Err(OpsysError::DimensionMismatch { dims: vec![coeff0.dim(), coeff1.rows(), coeff1.cols()] });
        }
        Ok(Self { coeff0, coeff1 })
    }

    pub fn scalar(b0: f64, b1: C64) -> Self {
        Self { coeff0: HermMatrix::diag(&[b0]), coeff1: GeneralMatrix::from_fn(1, 1, |_, _| b1) }
    }

    pub fn coeff0(&self) -> &HermMatrix {
        &self.coeff0
    }

    pub fn coeff1(&self) -> &GeneralMatrix {
        &self.coeff1
    }
}

/// `γ(x) = ½[x₁p₁ + x₂q₁ + x₃p₂ + x₄q₂]` written in the basis `1, h₁, h₂`.
pub fn gamma_quotient(x: &LInfVec) -> Result<NC2Coeff, OpsysError> {
    let [a1, a2, a3, a4] = <[f64; 4]>::try_from(x.values.as_slice())
        .map_err(|_| OpsysError::Length { expected: 4, got: x.len() })?;
    Ok(NC2Coeff::scalar((a1 + a2 + a3 + a4) / 4.0, (a1 - a2) / 4.0, (a3 - a4) / 4.0))
}

/// Spanning vector of `ker γ`.
pub const GAMMA_KERNEL: [f64; 4] = [1.0, 1.0, -1.0, -1.0];

/// `f(c0·1 + c1 h₁ + c2 h₂)` for the functional with coordinates `v`.
pub fn nc2_pairing(v: &VVec, c: [f64; 3]) -> f64 {
    let [a, b, cc, d] = v.entries();
    c[0] * (a + b) + c[1] * (a - b) + c[2] * (cc - d)
}

/// Feasibility of `C₀/2 ± C₁ + A ⪰ δ` and `C₀/2 ± C₂ - A ⪰ δ` over Hermitian `A`.
///
/// Blocks `P1..P4` hold the four shifted matrices and `A` is free.
pub fn nc2_positivity(c: &NC2Coeff, delta: f64) -> SolveReport {
    solve_feasibility(&nc2_problem(c, delta), DEFAULT_TOL, DEFAULT_MAX_ITER)
}

pub fn nc2_problem(c: &NC2Coeff, delta: f64) -> FeasibilityProblem {
    let n = c.dim();
    let half = c.c0.scale(0.5);
    let rhs = [
        &half + &c.c1,
        &half - &c.c1,
        &half + &c.c2,
        &half - &c.c2,
    ];
    let mut b = FeasibilityProblem::builder();
    let blocks: Vec<_> = (1..=4).map(|k| b.psd_block(format!("P{k}"), n, delta)).collect();
    let a = b.free_block("A", n);
    // P1 - A = C0/2 + C1, P2 - A = C0/2 - C1, P3 + A = C0/2 + C2, P4 + A = C0/2 - C2
    for (k, (&p, r)) in blocks.iter().zip(&rhs).enumerate() {
        let sign = if k < 2 { -1.0 } else { 1.0 };
        b.matrix_equation(&[Window::whole(p, 1.0), Window::whole(a, sign)], r.as_general());
    }
    b.build().expect("shapes are consistent by construction")
}

pub fn v_from_functional(values: [f64; 4]) -> Result<VVec, OpsysError> {
    let [a, b, c, d] = values;
    VVec::new(a, b, c, d)
}

pub fn w_dual_embed(e: &WElem) -> Vec<HermMatrix> {
    e.offdiags
        .iter()
        .map(|&o| HermMatrix::from_real_rows(&[vec![e.diag, o], vec![o, e.diag]]).expect("symmetric"))
        .collect()
}

/// Positivity of `e` via its 2×2 blocks.
pub fn w_is_positive(e: &WElem, tol: f64) -> bool {
    w_dual_embed(e).iter().all(|b| is_psd(b, tol))
}

/// `φ_k(E_ii) = 1/k`, `φ_k(E_{j,j+1}) = u_j / k`.
pub fn phi_k_apply(t: &TriDiag) -> SCoeffs {
    let k = t.k() as f64;
    SCoeffs {
        c0: t.diagonal.iter().sum::<C64>() / k,
        c: t.upper.iter().map(|u| u / k).collect(),
    }
}

pub fn s1_eval(e: &S1Elem, z: C64) -> Result<HermMatrix, OpsysError> {
    let modulus = z.norm();
    if (modulus - 1.0).abs() > UNIMODULAR_TOL {
        return Err(OpsysError::NotUnimodular { modulus });
    }
    let term = e.coeff1.scale(z);
    let value = &(e.coeff0.as_general() + &term) + &term.adjoint();
    Ok(value.hermitian_part())
}

/// Scalar positivity on the circle: `b₀ ≥ 2|b₁|`.
pub fn s1_scalar_positive(b0: f64, b1: C64) -> bool {
    b0 >= 2.0 * b1.norm()
}

/// Ando split of `t`: `Z = [[A, T], [T*, B]] ⪰ 0` with `A + B = I`. It is
/// feasible iff the numerical radius of `t` is at most 1/2.
pub fn ando_problem(t: &GeneralMatrix) -> Result<FeasibilityProblem, OpsysError> {
    let n = t.rows();
    if n == 0 || !t.is_square() {
        return Err(OpsysError::DimensionMismatch { dims: vec![t.rows(), t.cols()] });
    }
    let mut b = FeasibilityProblem::builder();
    let z = b.psd_block("Z", 2 * n, 0.0);
    let one = C64::new(1.0, 0.0);
    b.matrix_equation(&[Window::whole(z, 1.0), Window::at(z, n, n, one)], &GeneralMatrix::identity(n));
    b.matrix_equation(&[Window::at(z, 0, n, one)], t);
    Ok(b.build().expect("well-formed by construction"))
}

pub fn ando_split(t: &GeneralMatrix) -> Result<SolveReport, OpsysError> {
    Ok(solve_feasibility(&ando_problem(t)?, DEFAULT_TOL, DEFAULT_MAX_ITER))
}
