use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{table_from, BoxError, CorrelationBox};
use crate::numerics::sample::random_hermitian;
use crate::numerics::{eigh, is_psd, GeneralMatrix, HermMatrix, C64};
use crate::tensorlab::FactorWitness;

const STRATEGY_TOL: f64 = 1e-9;

/// State `rho` on `C^dim ⊗ C^dim` with two-outcome measurements
/// `a[x][a]` for Alice and `b[y][b]` for Bob.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumStrategy {
    dim: usize,
    rho: HermMatrix,
    a: [[HermMatrix; 2]; 2],
    b: [[HermMatrix; 2]; 2],
}

impl QuantumStrategy {
    pub fn new(rho: HermMatrix, a: [[HermMatrix; 2]; 2], b: [[HermMatrix; 2]; 2]) -> Result<Self, BoxError> {
        let bad = |msg: String| Err(BoxError::Strategy(msg));
        let dim = a[0][0].dim();
        if rho.dim() != dim * dim {
            return bad(format!("state has dimension {}, expected {}", rho.dim(), dim * dim));
        }
        if !is_psd(&rho, STRATEGY_TOL) || (rho.trace() - 1.0).abs() > STRATEGY_TOL {
            return bad("state is not a density matrix".into());
        }
        let id = HermMatrix::identity(dim);
        for (party, ops) in [('A', &a), ('B', &b)] {
            for (input, pair) in ops.iter().enumerate() {
                if pair.iter().any(|m| m.dim() != dim) {
                    return bad(format!("{party}{input} has the wrong dimension"));
                }
                if let Some(k) = pair.iter().position(|m| !is_psd(m, STRATEGY_TOL)) {
                    return bad(format!("{party}{input}^{k} is not PSD"));
                }
                let defect = (&(&pair[0] + &pair[1]) - &id).as_general().max_abs();
                if defect > STRATEGY_TOL {
                    return bad(format!("{party}{input} is incomplete by {defect:e}"));
                }
            }
        }
        Ok(Self { dim, rho, a, b })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rho(&self) -> &HermMatrix {
        &self.rho
    }

    pub fn alice(&self) -> &[[HermMatrix; 2]; 2] {
        &self.a
    }

    pub fn bob(&self) -> &[[HermMatrix; 2]; 2] {
        &self.b
    }

    /// Maximally entangled qubits with projective measurements at
    /// polarizer angles `θ` (Bloch vector at `2θ` in the x-z plane).
    pub fn qubit_angles(alice: [f64; 2], bob: [f64; 2]) -> Self {
        let phi = [C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)];
        let rho = HermMatrix::outer(&phi);
        let proj = |t: f64| {
            let (c, s) = ((2.0 * t).cos(), (2.0 * t).sin());
            let plus = HermMatrix::from_real_rows(&[vec![(1.0 + c) / 2.0, s / 2.0], vec![s / 2.0, (1.0 - c) / 2.0]]).expect("2x2");
            let minus = &HermMatrix::identity(2) - &plus;
            [plus, minus]
        };
        Self::new(rho, alice.map(proj), bob.map(proj)).expect("valid by construction")
    }
}

pub fn strategy_to_box(s: &QuantumStrategy) -> Result<CorrelationBox, BoxError> {
    let p = table_from(|a, b, x, y| s.rho.inner(&s.a[x][a].kron(&s.b[y][b])));
    CorrelationBox::new(p)
}

/// Max-cone witness for the box of `s`.
///
/// Each eigenpair `(λ, ψ)` of the state contributes `X = λ Ψ* A Ψ` and
/// `Y = Bᵀ`, where `Ψ` is `ψ` reshaped to a `dim × dim` matrix, so that
/// `Tr(X Y) = λ ⟨ψ| A ⊗ B |ψ⟩`. The blocks are stacked as a direct sum.
pub fn strategy_witness(s: &QuantumStrategy) -> FactorWitness {
    let d = s.dim;
    let spec = eigh(&s.rho);
    let cut = 1e-12 * spec.max().max(1.0);
    let parts: Vec<(f64, GeneralMatrix)> = (0..d * d)
        .filter(|&k| spec.eigenvalues[k] > cut)
        .map(|k| {
            let v = spec.vector(k);
            (spec.eigenvalues[k], GeneralMatrix::from_fn(d, d, |i, l| v[i * d + l]))
        })
        .collect();
    let x = std::array::from_fn(|i| {
        let blocks: Vec<HermMatrix> = parts.iter().map(|(l, psi)| s.a[i / 2][i % 2].congruence(psi).scale(*l)).collect();
        direct_sum(&blocks)
    });
    let y = std::array::from_fn(|j| {
        let bt = HermMatrix::new(s.b[j / 2][j % 2].as_general().transpose()).expect("transpose of Hermitian");
        direct_sum(&vec![bt; parts.len()])
    });
    FactorWitness::new(x, y).expect("strategies give valid witnesses")
}

fn direct_sum(blocks: &[HermMatrix]) -> HermMatrix {
    let n: usize = blocks.iter().map(HermMatrix::dim).sum();
    let mut g = GeneralMatrix::zeros(n, n);
    let mut off = 0;
    for blk in blocks {
        for i in 0..blk.dim() {
            for j in 0..blk.dim() {
                g[(off + i, off + j)] = blk[(i, j)];
            }
        }
        off += blk.dim();
    }
    HermMatrix::new(g).expect("blocks are Hermitian")
}

/// CHSH as a functional on the matrix picture: `F[2x+a][2y+b] = ±1`.
pub fn chsh_functional() -> [[f64; 4]; 4] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let (x, a, y, b) = (i / 2, i % 2, j / 2, j % 2);
            let sign = if a == b { 1.0 } else { -1.0 };
            if x == 1 && y == 1 { -sign } else { sign }
        })
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeesawResult {
    pub value: f64,
    pub strategy: QuantumStrategy,
    pub restart: usize,
    /// Value after each half-step of the winning restart.
    pub history: Vec<f64>,
}

const SEESAW_ITER: usize = 300;
const SEESAW_STOP: f64 = 1e-13;

/// Seesaw maximization of `Σ F_ij q_ij` over strategies of local dimension
/// `dim`: alternately the best pure state for fixed measurements, then the
/// best projective measurements for each party. Restarts run in parallel;
/// the highest value wins, ties going to the lowest restart index.
pub fn seesaw_maximize(functional: &[[f64; 4]; 4], dim: usize, restarts: usize, seed: u64) -> Result<SeesawResult, BoxError> {
    if dim < 2 {
        return Err(BoxError::Strategy(format!("dimension {dim} < 2")));
    }
    if restarts == 0 {
        return Err(BoxError::Strategy("no restarts".into()));
    }
    let best = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
            (r, seesaw_run(functional, dim, &mut rng))
        })
        .reduce_with(|x, y| if y.1 .0 > x.1 .0 || (y.1 .0 == x.1 .0 && y.0 < x.0) { y } else { x })
        .expect("at least one restart");
    let (restart, (value, strategy, history)) = best;
    Ok(SeesawResult { value, strategy, restart, history })
}

fn seesaw_run(f: &[[f64; 4]; 4], d: usize, rng: &mut ChaCha8Rng) -> (f64, QuantumStrategy, Vec<f64>) {
    let id = HermMatrix::identity(d);
    let mut random_pair = || {
        let p = eigh(&random_hermitian(rng, d)).map(|l| f64::from(u8::from(l > 0.0)));
        [p.clone(), &id - &p]
    };
    let mut a = [random_pair(), random_pair()];
    let mut b = [random_pair(), random_pair()];
    let mut history = Vec::new();
    let mut rho = best_state(f, &a, &b, &mut history);
    for _ in 0..SEESAW_ITER {
        let before = *history.last().expect("state step recorded");
        a = best_measurements(f, &rho, &b, Side::Alice, &mut history);
        b = best_measurements(f, &rho, &a, Side::Bob, &mut history);
        rho = best_state(f, &a, &b, &mut history);
        if *history.last().expect("recorded") - before < SEESAW_STOP {
            break;
        }
    }
    let value = *history.last().expect("recorded");
    let strategy = QuantumStrategy::new(rho, a, b).expect("seesaw keeps strategies valid");
    (value, strategy, history)
}

fn bell_operator(f: &[[f64; 4]; 4], a: &[[HermMatrix; 2]; 2], b: &[[HermMatrix; 2]; 2]) -> HermMatrix {
    let n = a[0][0].dim() * b[0][0].dim();
    let mut g = HermMatrix::zeros(n);
    for i in 0..4 {
        for j in 0..4 {
            if f[i][j] != 0.0 {
                g = &g + &a[i / 2][i % 2].kron(&b[j / 2][j % 2]).scale(f[i][j]);
            }
        }
    }
    g
}

fn best_state(f: &[[f64; 4]; 4], a: &[[HermMatrix; 2]; 2], b: &[[HermMatrix; 2]; 2], history: &mut Vec<f64>) -> HermMatrix {
    let spec = eigh(&bell_operator(f, a, b));
    let top = spec.eigenvalues.len() - 1;
    history.push(spec.max());
    HermMatrix::outer(&spec.vector(top))
}

#[derive(Clone, Copy)]
enum Side {
    Alice,
    Bob,
}

/// Best projective measurements for one party with the state and the other
/// party's measurements fixed.
fn best_measurements(
    f: &[[f64; 4]; 4],
    rho: &HermMatrix,
    other: &[[HermMatrix; 2]; 2],
    side: Side,
    history: &mut Vec<f64>,
) -> [[HermMatrix; 2]; 2] {
    let d = other[0][0].dim();
    let id = HermMatrix::identity(d);
    let mut total = 0.0;
    let ops = [0, 1].map(|input| {
        // K_o = partial trace of rho against Σ F · (other party's effects)
        let k = [0, 1].map(|outcome| {
            let mut m = HermMatrix::zeros(d);
            for (oi, pair) in other.iter().enumerate() {
                for (oo, e) in pair.iter().enumerate() {
                    let coef = match side {
                        Side::Alice => f[2 * input + outcome][2 * oi + oo],
                        Side::Bob => f[2 * oi + oo][2 * input + outcome],
                    };
                    m = &m + &e.scale(coef);
                }
            }
            reduce(rho, &m, d, side)
        });
        let diff = &k[0] - &k[1];
        let p0 = eigh(&diff).map(|l| f64::from(u8::from(l > 0.0)));
        total += p0.inner(&k[0]) + (&id - &p0).inner(&k[1]);
        [p0.clone(), &id - &p0]
    });
    history.push(total);
    ops
}

/// `K` with `Tr(E K) = Tr(rho (E ⊗ M))` (Alice) or `Tr(rho (M ⊗ E))` (Bob).
fn reduce(rho: &HermMatrix, m: &HermMatrix, d: usize, side: Side) -> HermMatrix {
    let r = |i: usize, l: usize, j: usize, k: usize| rho[(i * d + l, j * d + k)];
    let g = GeneralMatrix::from_fn(d, d, |row, col| {
        let mut acc = C64::new(0.0, 0.0);
        for s in 0..d {
            for t in 0..d {
                acc += match side {
                    // K_{row,col} = Σ rho_{(row,s),(col,t)} M_{t,s}
                    Side::Alice => r(row, s, col, t) * m[(t, s)],
                    // K_{row,col} = Σ rho_{(s,row),(t,col)} M_{t,s}
                    Side::Bob => r(s, row, t, col) * m[(t, s)],
                };
            }
        }
        acc
    });
    g.hermitian_part()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{chsh_value, local_membership};
    use crate::numerics::sample::{random_effect, random_psd};
    use crate::tensorlab::max_cone_construct;
    use rand::Rng;

    fn random_strategy(rng: &mut ChaCha8Rng, d: usize) -> QuantumStrategy {
        let rank = rng.gen_range(1..=d * d);
        let rho = random_psd(rng, d * d, rank);
        let rho = rho.scale(1.0 / rho.trace());
        let id = HermMatrix::identity(d);
        let mut pair = || {
            let e = random_effect(rng, d);
            [e.clone(), &id - &e]
        };
        let a = [pair(), pair()];
        let b = [pair(), pair()];
        QuantumStrategy::new(rho, a, b).unwrap()
    }

    #[test]
    fn trivial_measurements_are_deterministic() {
        let rho = HermMatrix::identity(4).scale(0.25);
        let ops = || [(); 2].map(|_| [HermMatrix::identity(2), HermMatrix::zeros(2)]);
        let s = QuantumStrategy::new(rho, ops(), ops()).unwrap();
        assert_eq!(strategy_to_box(&s).unwrap(), CorrelationBox::deterministic([0, 0], [0, 0]));
    }

    #[test]
    fn optimal_angles_reach_tsirelson() {
        use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};
        let s = QuantumStrategy::qubit_angles([0.0, FRAC_PI_4], [FRAC_PI_8, -FRAC_PI_8]);
        let b = strategy_to_box(&s).unwrap();
        assert!((chsh_value(&b) - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!(!local_membership(&b, 1e-9).is_local());
    }

    #[test]
    fn product_strategies_are_local() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let s = random_strategy(&mut rng, 2);
            let psi_a = crate::numerics::sample::random_unit_vector(&mut rng, 2);
            let psi_b = crate::numerics::sample::random_unit_vector(&mut rng, 2);
            let rho = HermMatrix::outer(&psi_a).kron(&HermMatrix::outer(&psi_b));
            let product = QuantumStrategy::new(rho, s.a.clone(), s.b.clone()).unwrap();
            assert!(local_membership(&strategy_to_box(&product).unwrap(), 1e-8).is_local());
        }
    }

    #[test]
    fn random_strategies_give_boxes_and_witnesses() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for k in 0..100 {
            let s = random_strategy(&mut rng, 2 + k % 2);
            let b = strategy_to_box(&s).unwrap();
            let q = max_cone_construct(&strategy_witness(&s)).unwrap();
            for (u, v) in q.entries().iter().flatten().zip(b.to_matrix().entries().iter().flatten()) {
                assert!((u - v).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn seesaw_values() {
        let r = seesaw_maximize(&chsh_functional(), 2, 20, 0).unwrap();
        assert!((r.value - 2.0 * 2f64.sqrt()).abs() < 1e-6, "{}", r.value);
        assert!(r.history.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        let b = strategy_to_box(&r.strategy).unwrap();
        assert!((chsh_value(&b) - r.value).abs() < 1e-9);

        let mut indicator = [[0.0; 4]; 4];
        indicator[0][0] = 1.0;
        assert!((seesaw_maximize(&indicator, 2, 4, 0).unwrap().value - 1.0).abs() < 1e-12);
        assert!(seesaw_maximize(&[[0.0; 4]; 4], 2, 4, 0).unwrap().value.abs() < 1e-15);
        let again = seesaw_maximize(&chsh_functional(), 2, 20, 0).unwrap();
        assert_eq!(again, r);
        assert!(seesaw_maximize(&chsh_functional(), 1, 1, 0).is_err());
    }
}
