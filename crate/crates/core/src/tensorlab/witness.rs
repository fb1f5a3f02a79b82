use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::boxmatrix::{sqrt_bell_value, BoxMatrix};
use super::TensorError;
use crate::numerics::sample::{random_effect, random_general};
use crate::numerics::{eigh, is_psd, GeneralMatrix, HermMatrix};

/// Tolerance for the witness invariants.
pub const WITNESS_TOL: f64 = 1e-9;

/// Matrices with `q_ij = Tr(X_i Y_j)`: all eight PSD, `X₁ + X₂ = X₃ + X₄`
/// and `Y₁ + Y₂ = Y₃ + Y₄ = I`.
///
/// `y` holds the matrices that pair with `x` under the plain trace; any
/// transpose from the tensor identification is already applied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorWitness {
    x: [HermMatrix; 4],
    y: [HermMatrix; 4],
}

impl FactorWitness {
    pub fn new(x: [HermMatrix; 4], y: [HermMatrix; 4]) -> Result<Self, TensorError> {
        let p = x[0].dim();
        if x.iter().chain(&y).any(|m| m.dim() != p) {
            return Err(TensorError::Shape);
        }
        let scale = x.iter().fold(1f64, |s, m| s.max(m.as_general().max_abs()));
        for (k, m) in x.iter().enumerate() {
            if !is_psd(m, WITNESS_TOL * scale) {
                return Err(TensorError::WitnessNotPsd { side: 'X', index: k + 1 });
            }
        }
        for (k, m) in y.iter().enumerate() {
            if !is_psd(m, WITNESS_TOL) {
                return Err(TensorError::WitnessNotPsd { side: 'Y', index: k + 1 });
            }
        }
        let xs = (&(&x[0] + &x[1]) - &(&x[2] + &x[3])).as_general().max_abs();
        if xs > WITNESS_TOL * scale {
            return Err(TensorError::WitnessSums { defect: xs });
        }
        let id = HermMatrix::identity(p);
        for pair in [(&y[0], &y[1]), (&y[2], &y[3])] {
            let defect = (&(pair.0 + pair.1) - &id).as_general().max_abs();
            if defect > WITNESS_TOL {
                return Err(TensorError::WitnessSums { defect });
            }
        }
        Ok(Self { x, y })
    }

    /// Scalar witness: the product box `q_ij = x_i y_j`.
    pub fn scalar(x: [f64; 4], y: [f64; 4]) -> Result<Self, TensorError> {
        Self::new(x.map(|v| HermMatrix::diag(&[v])), y.map(|v| HermMatrix::diag(&[v])))
    }

    pub fn p(&self) -> usize {
        self.x[0].dim()
    }

    pub fn x(&self) -> &[HermMatrix; 4] {
        &self.x
    }

    pub fn y(&self) -> &[HermMatrix; 4] {
        &self.y
    }

    fn scaled(self, t: f64) -> Self {
        Self { x: self.x.map(|m| m.scale(t)), y: self.y }
    }
}

fn pair_matrix(x: &[HermMatrix; 4], y: &[HermMatrix; 4]) -> [[f64; 4]; 4] {
    let mut q = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            q[i][j] = x[i].inner(&y[j]);
        }
    }
    q
}

pub fn max_cone_construct(w: &FactorWitness) -> Result<BoxMatrix, TensorError> {
    BoxMatrix::new(pair_matrix(&w.x, &w.y))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceInequality {
    /// `Tr(X₁ + X₂)`.
    pub trace: f64,
    /// Right-hand side with the minimum over `b` inside the sum.
    pub rhs: f64,
    /// Right-hand side with the minimum over `b` outside the sum.
    pub rhs_outer: f64,
    pub holds: bool,
}

pub fn trace_inequality_check(w: &FactorWitness) -> Result<TraceInequality, TensorError> {
    let b = max_cone_construct(w)?;
    let v = sqrt_bell_value(&b)?;
    let trace = w.x[0].trace() + w.x[1].trace();
    let slack = WITNESS_TOL * trace.abs().max(1.0);
    Ok(TraceInequality { trace, rhs: v.rhs, rhs_outer: v.rhs_outer, holds: trace <= v.rhs + slack })
}

/// Gradient iterations per restart.
const SEARCH_ITER: usize = 20_000;
/// A restart succeeds once the normalized residual norm falls below this.
const SEARCH_STOP: f64 = 1e-9;
/// A restart is abandoned when the loss improves by less than this factor
/// over [`STALL_WINDOW`] iterations.
const STALL_RATIO: f64 = 0.99;
const STALL_WINDOW: usize = 500;
/// Largest Frobenius mismatch accepted for a returned witness.
pub const SEARCH_MATCH_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SearchOutcome {
    Found { witness: FactorWitness, restart: usize },
    /// No witness found. This says nothing about membership.
    NotFound,
}

/// Least-squares search for a [`FactorWitness`] of size `p` reproducing `b`.
///
/// The box is first normalized to `Tr(X₁ + X₂) = 1`. Witnesses are
/// parametrized as `X = R (E, I-E, F, I-F) R*` and `Y = (G, I-G, H, I-H)`
/// with effects `E, F, G, H`, so every iterate satisfies the witness
/// invariants exactly. Each restart runs accelerated projected gradient on
/// `Σ (Tr(X_i Y_j) - q_ij)²` from a random start. Restarts run in parallel
/// and the lowest successful restart index wins.
pub fn max_cone_search(b: &BoxMatrix, p: usize, restarts: usize, seed: u64) -> SearchOutcome {
    if p == 0 || b.entries().iter().flatten().any(|&x| x < 0.0) {
        return SearchOutcome::NotFound;
    }
    let q = b.entries();
    let scale: f64 = q[0][0] + q[0][1] + q[1][0] + q[1][1];
    if scale <= 0.0 {
        return match zero_witness(b, p) {
            Some(witness) => SearchOutcome::Found { witness, restart: 0 },
            None => SearchOutcome::NotFound,
        };
    }
    let normalized = b.scale(1.0 / scale);
    let found = (0..restarts).into_par_iter().find_map_first(|r| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
        least_squares(&normalized, p, &mut rng).map(|w| (r, w.scaled(scale)))
    });
    match found {
        Some((restart, witness)) if reproduces(&witness, b) => SearchOutcome::Found { witness, restart },
        _ => SearchOutcome::NotFound,
    }
}

fn reproduces(w: &FactorWitness, b: &BoxMatrix) -> bool {
    let q = pair_matrix(&w.x, &w.y);
    let err: f64 = q.iter().flatten().zip(b.entries().iter().flatten()).map(|(a, c)| (a - c).powi(2)).sum();
    err.sqrt() <= SEARCH_MATCH_TOL * b.total().abs().max(1.0)
}

/// Balanced nonnegative boxes with a zero upper-left block vanish entirely.
fn zero_witness(b: &BoxMatrix, p: usize) -> Option<FactorWitness> {
    if b.entries().iter().flatten().any(|&x| x != 0.0) {
        return None;
    }
    let zero = HermMatrix::zeros(p);
    let half = HermMatrix::identity(p).scale(0.5);
    FactorWitness::new([(); 4].map(|_| zero.clone()), [(); 4].map(|_| half.clone())).ok()
}

fn least_squares(q: &BoxMatrix, p: usize, rng: &mut ChaCha8Rng) -> Option<FactorWitness> {
    let q = q.entries();
    let mut x = Params::random(rng, p);
    let mut prev = x.clone();
    let mut fx = loss_and_grad(q, &x, false).0;
    let mut step = 1.0;
    let mut momentum = 0usize;
    let mut checkpoint = fx;
    for it in 1..=SEARCH_ITER {
        let beta = momentum as f64 / (momentum as f64 + 3.0);
        let y = x.combine(1.0 + beta, &prev, -beta);
        let (fy, gy) = loss_and_grad(q, &y, true);
        let mut accepted = None;
        for _ in 0..60 {
            let z = y.combine(1.0, &gy, -step).project();
            let d = z.combine(1.0, &y, -1.0);
            let fz = loss_and_grad(q, &z, false).0;
            if fz <= fy + gy.dot(&d) + d.dot(&d) / (2.0 * step) {
                accepted = Some((z, fz));
                break;
            }
            step *= 0.5;
        }
        let (z, fz) = accepted?;
        if fz > fx {
            momentum = 0;
            prev = x.clone();
            continue;
        }
        prev = std::mem::replace(&mut x, z);
        fx = fz;
        momentum += 1;
        step *= 1.1;
        if fx.sqrt() < SEARCH_STOP {
            break;
        }
        if it % STALL_WINDOW == 0 {
            if fx > STALL_RATIO * checkpoint {
                break;
            }
            checkpoint = fx;
        }
    }
    let (xs, ys) = x.witness_parts();
    FactorWitness::new(xs, ys).ok()
}

/// Effects `[E, F, G, H]` and the scale factor `R`.
#[derive(Clone, Debug)]
struct Params {
    effects: [HermMatrix; 4],
    r: GeneralMatrix,
}

impl Params {
    fn random(rng: &mut ChaCha8Rng, p: usize) -> Self {
        let effects = [(); 4].map(|_| random_effect(rng, p));
        let r = random_general(rng, p, p);
        let norm = r.frobenius_norm();
        Self { effects, r: r.scale_real(1.0 / norm) }
    }

    /// `a·self + b·other`.
    fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        let mut effects = self.effects.clone();
        for (e, o) in effects.iter_mut().zip(&other.effects) {
            *e = &e.scale(a) + &o.scale(b);
        }
        Self { effects, r: &self.r.scale_real(a) + &other.r.scale_real(b) }
    }

    fn dot(&self, other: &Self) -> f64 {
        let e: f64 = self.effects.iter().zip(&other.effects).map(|(a, b)| a.inner(b)).sum();
        let r: f64 = self.r.as_slice().iter().zip(other.r.as_slice()).map(|(a, b)| (a.conj() * b).re).sum();
        e + r
    }

    fn project(self) -> Self {
        Self { effects: self.effects.map(|e| eigh(&e).map(|l| l.clamp(0.0, 1.0))), r: self.r }
    }

    /// The four `X`-side effects `(E, I-E, F, I-F)` and the four `Y`s.
    fn split(&self) -> ([HermMatrix; 4], [HermMatrix; 4]) {
        let id = HermMatrix::identity(self.r.rows());
        let [e, f, g, h] = &self.effects;
        ([e.clone(), &id - e, f.clone(), &id - f], [g.clone(), &id - g, h.clone(), &id - h])
    }

    fn witness_parts(&self) -> ([HermMatrix; 4], [HermMatrix; 4]) {
        let (inner, y) = self.split();
        let r_adj = self.r.adjoint();
        (inner.map(|e| e.congruence(&r_adj)), y)
    }
}

/// Loss `Σ (Tr(X_i Y_j) - q_ij)²` and, if asked, its gradient.
fn loss_and_grad(q: &[[f64; 4]; 4], s: &Params, with_grad: bool) -> (f64, Params) {
    let (inner, y) = s.split();
    let (x, _) = s.witness_parts();
    let mut res = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            res[i][j] = x[i].inner(&y[j]) - q[i][j];
        }
    }
    let loss = res.iter().flatten().map(|v| v * v).sum();
    if !with_grad {
        return (loss, s.clone());
    }
    let p = s.r.rows();
    // R* Y_j R
    let pulled: Vec<HermMatrix> = y.iter().map(|m| m.congruence(&s.r)).collect();
    let weighted = |coef: &dyn Fn(usize) -> f64, mats: &[HermMatrix]| {
        mats.iter().enumerate().fold(HermMatrix::zeros(p), |acc, (k, m)| &acc + &m.scale(2.0 * coef(k)))
    };
    let ge = weighted(&|j| res[0][j] - res[1][j], &pulled);
    let gf = weighted(&|j| res[2][j] - res[3][j], &pulled);
    let gg = weighted(&|i| res[i][0] - res[i][1], &x);
    let gh = weighted(&|i| res[i][2] - res[i][3], &x);
    let mut gr = GeneralMatrix::zeros(p, p);
    for (j, yj) in y.iter().enumerate() {
        let mix = inner.iter().enumerate().fold(HermMatrix::zeros(p), |acc, (i, e)| &acc + &e.scale(res[i][j]));
        gr = &gr + &(&(yj.as_general() * &s.r) * mix.as_general()).scale_real(4.0);
    }
    (loss, Params { effects: [ge, gf, gg, gh], r: gr })
}
