use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::NumericsError;

pub type C64 = Complex64;

/// Tolerance applied when a caller hands in a matrix that is supposed to be
/// Hermitian. Scaled by the largest entry modulus (at least 1).
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Dense complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct GeneralMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl GeneralMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row slices. All rows must have the same length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self, NumericsError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(NumericsError::Ragged);
        }
        Ok(Self { rows: r, cols: c, data: rows.iter().flatten().copied().collect() })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self, NumericsError> {
        let rows: Vec<Vec<C64>> =
            rows.iter().map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// The matrix unit `E_{ij}` of size `n`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m[(i, j)] = C64::new(1.0, 0.0);
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * c).collect() }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * c).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Largest deviation `|m_ij - conj(m_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(M + M*) / 2`.
    pub fn hermitian_part(&self) -> HermMatrix {
        assert!(self.is_square(), "hermitian part of a non-square matrix");
        let n = self.rows;
        let m = Self::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(self[(i, i)].re, 0.0)
            } else {
                (self[(i, j)] + self[(j, i)].conj()) * 0.5
            }
        });
        HermMatrix(m)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, NumericsError> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, NumericsError> {
        self.check_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, NumericsError> {
        if self.cols != other.rows {
            return Err(NumericsError::DimensionMismatch {
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r1, c1, r2, c2) = (self.rows, self.cols, other.rows, other.cols);
        Self::from_fn(r1 * r2, c1 * c2, |i, j| self[(i / r2, j / c2)] * other[(i % r2, j % c2)])
    }

    /// Copies the `rows × cols` window starting at `(r0, c0)`.
    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Assembles `[[a, b], [c, d]]` from four blocks of compatible shape.
    pub fn block2(a: &Self, b: &Self, c: &Self, d: &Self) -> Result<Self, NumericsError> {
        if a.rows != b.rows || c.rows != d.rows || a.cols != c.cols || b.cols != d.cols {
            return Err(NumericsError::DimensionMismatch {
                left: (a.rows, a.cols),
                right: (d.rows, d.cols),
            });
        }
        let (r, c0) = (a.rows, a.cols);
        Ok(Self::from_fn(a.rows + c.rows, a.cols + b.cols, |i, j| match (i < r, j < c0) {
            (true, true) => a[(i, j)],
            (true, false) => b[(i, j - c0)],
            (false, true) => c[(i - r, j)],
            (false, false) => d[(i - r, j - c0)],
        }))
    }

    /// Operator (spectral) norm, via the spectrum of `M* M`.
    pub fn op_norm(&self) -> f64 {
        let gram = self.adjoint().try_mul(self).expect("shapes agree").hermitian_part();
        super::eigh(&gram).max().max(0.0).sqrt()
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), NumericsError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(NumericsError::DimensionMismatch {
                left: (self.rows, self.cols),
                right: (other.rows, other.cols),
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

impl Index<(usize, usize)> for GeneralMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for GeneralMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for GeneralMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "GeneralMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Add for &GeneralMatrix {
    type Output = GeneralMatrix;
    fn add(self, rhs: Self) -> GeneralMatrix {
        self.try_add(rhs).expect("matrix add: shape mismatch")
    }
}

impl Sub for &GeneralMatrix {
    type Output = GeneralMatrix;
    fn sub(self, rhs: Self) -> GeneralMatrix {
        self.try_sub(rhs).expect("matrix sub: shape mismatch")
    }
}

impl Mul for &GeneralMatrix {
    type Output = GeneralMatrix;
    fn mul(self, rhs: Self) -> GeneralMatrix {
        self.try_mul(rhs).expect("matrix mul: shape mismatch")
    }
}

impl Neg for &GeneralMatrix {
    type Output = GeneralMatrix;
    fn neg(self) -> GeneralMatrix {
        self.scale_real(-1.0)
    }
}

/// Dense complex Hermitian matrix. Construction checks the Hermitian
/// defect and then symmetrizes exactly, so `m[(i,j)] == conj(m[(j,i)])`
/// holds bit-for-bit and diagonal entries are real.
#[derive(Clone, PartialEq)]
pub struct HermMatrix(GeneralMatrix);

impl HermMatrix {
    pub fn new(m: GeneralMatrix) -> Result<Self, NumericsError> {
        if !m.is_square() {
            return Err(NumericsError::NotSquare { rows: m.rows, cols: m.cols });
        }
        if m.rows == 0 {
            return Err(NumericsError::Empty);
        }
        let defect = m.hermitian_defect();
        if defect > HERMITIAN_TOL * m.max_abs().max(1.0) {
            return Err(NumericsError::NotHermitian { defect });
        }
        Ok(m.hermitian_part())
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self, NumericsError> {
        Self::new(GeneralMatrix::from_real_rows(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        Self(GeneralMatrix::identity(n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(GeneralMatrix::zeros(n, n))
    }

    pub fn diag(values: &[f64]) -> Self {
        Self(GeneralMatrix::diag_real(values))
    }

    /// Rank-one projector-like matrix `v v*`.
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        GeneralMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj()).hermitian_part()
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn as_general(&self) -> &GeneralMatrix {
        &self.0
    }

    pub fn into_general(self) -> GeneralMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    /// Real inner product `Re Tr(self · other)` (both Hermitian, so this is
    /// the Frobenius inner product).
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.0.data.iter().zip(&other.0.data).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(self.0.scale_real(c))
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, NumericsError> {
        Ok(Self(self.0.try_add(&other.0)?))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, NumericsError> {
        Ok(Self(self.0.try_sub(&other.0)?))
    }

    /// `self + c·I`.
    pub fn shift(&self, c: f64) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.rows {
            m[(i, i)].re += c;
        }
        Self(m)
    }

    /// Unitary (or any) congruence `U* self U`.
    pub fn congruence(&self, u: &GeneralMatrix) -> Self {
        (&(&u.adjoint() * &self.0) * u).hermitian_part()
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kron(&other.0))
    }

    /// Hermitian principal window `[r0, r0+n) × [r0, r0+n)`.
    pub fn principal(&self, r0: usize, n: usize) -> Self {
        Self(self.0.submatrix(r0, r0, n, n))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        super::eigh(self).min()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        super::eigh(self).max()
    }
}

impl Index<(usize, usize)> for HermMatrix {
    type Output = C64;

    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl fmt::Debug for HermMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Herm{:?}", self.0)
    }
}

impl Add for &HermMatrix {
    type Output = HermMatrix;
    fn add(self, rhs: Self) -> HermMatrix {
        HermMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &HermMatrix {
    type Output = HermMatrix;
    fn sub(self, rhs: Self) -> HermMatrix {
        HermMatrix(&self.0 - &rhs.0)
    }
}

impl From<HermMatrix> for GeneralMatrix {
    fn from(m: HermMatrix) -> Self {
        m.0
    }
}

/// JSON shape for matrices: separate real and imaginary row arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl From<&GeneralMatrix> for MatrixJson {
    fn from(m: &GeneralMatrix) -> Self {
        let re = (0..m.rows).map(|i| (0..m.cols).map(|j| m[(i, j)].re).collect()).collect();
        let has_im = m.data.iter().any(|z| z.im != 0.0);
        let im = has_im
            .then(|| (0..m.rows).map(|i| (0..m.cols).map(|j| m[(i, j)].im).collect()).collect());
        Self { re, im }
    }
}

impl TryFrom<&MatrixJson> for GeneralMatrix {
    type Error = NumericsError;

    fn try_from(j: &MatrixJson) -> Result<Self, NumericsError> {
        let re = GeneralMatrix::from_real_rows(&j.re)?;
        match &j.im {
            None => Ok(re),
            Some(im) => {
                let im = GeneralMatrix::from_real_rows(im)?;
                re.check_same_shape(&im)?;
                Ok(re.zip_with(&im, |a, b| C64::new(a.re, b.re)))
            }
        }
    }
}

impl Serialize for GeneralMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for GeneralMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        GeneralMatrix::try_from(&j).map_err(serde::de::Error::custom)
    }
}

impl Serialize for HermMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let m = GeneralMatrix::deserialize(d)?;
        HermMatrix::new(m).map_err(serde::de::Error::custom)
    }
}
