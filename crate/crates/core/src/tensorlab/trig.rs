use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TensorError;
use crate::numerics::{eigh, GeneralMatrix, HermMatrix, C64};

/// Matrix-valued trigonometric polynomial of degree at most one in each of
/// one or two variables on the torus, `Σ_k C_k z^{k₁} w^{k₂}` with
/// `z^{-1} = z̄`. Symmetry `C_{-k} = C_k*` makes every value Hermitian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatTrigPoly {
    vars: usize,
    dim: usize,
    coeffs: BTreeMap<Vec<i8>, GeneralMatrix>,
}

/// Tolerance for `C_{-k} = C_k*`.
const SYMMETRY_TOL: f64 = 1e-12;

impl MatTrigPoly {
    pub fn new(vars: usize, coeffs: BTreeMap<Vec<i8>, GeneralMatrix>) -> Result<Self, TensorError> {
        if !(1..=2).contains(&vars) {
            return Err(TensorError::Vars(vars));
        }
        let dim = coeffs.values().next().map_or(1, GeneralMatrix::rows);
        for (k, c) in &coeffs {
            if k.len() != vars || k.iter().any(|e| !(-1..=1).contains(e)) {
                return Err(TensorError::Exponent(k.clone()));
            }
            if c.rows() != dim || c.cols() != dim {
                return Err(TensorError::Shape);
            }
            let mirror: Vec<i8> = k.iter().map(|e| -e).collect();
            let partner = coeffs.get(&mirror).map(GeneralMatrix::adjoint).unwrap_or_else(|| GeneralMatrix::zeros(dim, dim));
            let scale = c.max_abs().max(1.0);
            if (c - &partner).max_abs() > SYMMETRY_TOL * scale {
                return Err(TensorError::NotSymmetric(k.clone()));
            }
        }
        Ok(Self { vars, dim, coeffs })
    }

    pub fn constant(m: &HermMatrix) -> Self {
        let vars = 1;
        Self { vars, dim: m.dim(), coeffs: BTreeMap::from([(vec![0], m.as_general().clone())]) }
    }

    /// `h(z, w) = [[3 + 2Re(zw), 2z̄w], [2zw̄, 3 - 2Re(zw)]]`.
    pub fn h() -> Self {
        let m = |rows: [[f64; 2]; 2]| GeneralMatrix::from_real_rows(&rows.map(|r| r.to_vec())).expect("2x2");
        let coeffs = BTreeMap::from([
            (vec![0, 0], m([[3.0, 0.0], [0.0, 3.0]])),
            (vec![1, 1], m([[1.0, 0.0], [0.0, -1.0]])),
            (vec![-1, -1], m([[1.0, 0.0], [0.0, -1.0]])),
            (vec![-1, 1], m([[0.0, 2.0], [0.0, 0.0]])),
            (vec![1, -1], m([[0.0, 0.0], [2.0, 0.0]])),
        ]);
        Self::new(2, coeffs).expect("h is symmetric")
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coefficient(&self, k: &[i8]) -> Option<&GeneralMatrix> {
        self.coeffs.get(k)
    }

    pub fn eval(&self, point: &[C64]) -> Result<HermMatrix, TensorError> {
        if point.len() != self.vars {
            return Err(TensorError::Vars(point.len()));
        }
        let mut acc = GeneralMatrix::zeros(self.dim, self.dim);
        for (k, c) in &self.coeffs {
            let mono: C64 = k
                .iter()
                .zip(point)
                .map(|(&e, z)| match e {
                    1 => *z,
                    -1 => z.conj(),
                    _ => C64::new(1.0, 0.0),
                })
                .product();
            acc = &acc + &c.scale(mono);
        }
        Ok(acc.hermitian_part())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusMin {
    pub value: f64,
    /// Grid indices `k` of the minimizer, the point being `e^{2πik/n}`.
    pub index: Vec<usize>,
    pub point: Vec<C64>,
}

/// Minimum of `λ_min(f)` over the uniform `grid_n^vars` torus grid.
///
/// Rows of the grid are scanned in parallel. Ties resolve to the smallest
/// grid index in lexicographic order.
pub fn torus_min_eig(f: &MatTrigPoly, grid_n: usize) -> Result<TorusMin, TensorError> {
    if grid_n == 0 {
        return Err(TensorError::EmptyGrid);
    }
    let root = |k: usize| C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / grid_n as f64);
    let rows = if f.vars == 1 { 1 } else { grid_n };
    let best = (0..rows)
        .into_par_iter()
        .map(|r| {
            let mut best = (f64::INFINITY, 0usize);
            for k in 0..grid_n {
                let point: Vec<C64> = if f.vars == 1 { vec![root(k)] } else { vec![root(r), root(k)] };
                let value = eigh(&f.eval(&point).expect("arity checked")).min();
                if value < best.0 {
                    best = (value, k);
                }
            }
            (best.0, r, best.1)
        })
        .reduce(
            || (f64::INFINITY, usize::MAX, usize::MAX),
            |a, b| if b.0 < a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)) { b } else { a },
        );
    let index = if f.vars == 1 { vec![best.2] } else { vec![best.1, best.2] };
    let point = index.iter().map(|&k| root(k)).collect();
    Ok(TorusMin { value: best.0, index, point })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_identity() {
        let f = MatTrigPoly::constant(&HermMatrix::identity(3));
        assert_eq!(torus_min_eig(&f, 16).unwrap().value, 1.0);
    }

    #[test]
    fn h_matches_closed_form() {
        let h = MatTrigPoly::h();
        let (z, w) = (C64::from_polar(1.0, 0.3), C64::from_polar(1.0, -1.1));
        let v = h.eval(&[z, w]).unwrap();
        let zw = z * w;
        assert!((v[(0, 0)].re - (3.0 + 2.0 * zw.re)).abs() < 1e-14);
        assert!((v[(1, 1)].re - (3.0 - 2.0 * zw.re)).abs() < 1e-14);
        assert!((v[(0, 1)] - z.conj() * w * 2.0).norm() < 1e-14);
        assert!((v[(1, 0)] - z * w.conj() * 2.0).norm() < 1e-14);
    }

    #[test]
    fn h_minimum_on_grid() {
        let r = torus_min_eig(&MatTrigPoly::h(), 360).unwrap();
        let bound = 3.0 - 2.0 * 2f64.sqrt();
        assert!(r.value >= bound - 1e-9 && r.value <= bound + 1e-4);
        let zw = r.point[0] * r.point[1];
        assert!((zw.re.abs() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn scalar_cosine() {
        let one = GeneralMatrix::identity(1);
        let f = MatTrigPoly::new(1, BTreeMap::from([(vec![0], one.clone()), (vec![1], one.clone()), (vec![-1], one)]))
            .unwrap();
        let r = torus_min_eig(&f, 360).unwrap();
        assert!((r.value + 1.0).abs() < 1e-12);
        assert_eq!(r.index, vec![180]);
    }

    #[test]
    fn rejects_asymmetric_coefficients() {
        let one = GeneralMatrix::identity(1);
        let f = MatTrigPoly::new(1, BTreeMap::from([(vec![1], one)]));
        assert!(matches!(f, Err(TensorError::NotSymmetric(_))));
        let f = MatTrigPoly::new(3, BTreeMap::new());
        assert!(matches!(f, Err(TensorError::Vars(3))));
    }
}
