use serde::{Deserialize, Serialize};

use super::json::common_block_sum;
use super::local::{local_membership, local_witness, LocalVerdict};
use super::{chsh_value, CorrelationBox};
use crate::numerics::format_sig;
use crate::tensorlab::{max_cone_search, min_cone_member, sqrt_bell_value, BellValue, BoxMatrix, FactorWitness, SearchOutcome};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Hull-membership tolerance for the local test.
    pub tol: f64,
    /// Largest witness size tried by the max-cone search.
    pub dim: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { tol: 1e-9, dim: 2, restarts: 20, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum QuantumVerdict {
    /// Max-cone witness of size `p`, from the local model or from search.
    Witness { p: usize, source: String },
    /// The square-root Bell inequality fails at offset `d`.
    Violated { d: usize, lhs: f64, rhs: f64 },
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub nonsignaling: bool,
    pub invalid_reason: Option<String>,
    pub local: Option<LocalVerdict>,
    pub chsh: Option<f64>,
    /// Square-root Bell values for the matrix as supplied.
    pub bell: Option<BellValue>,
    pub quantum: Option<QuantumVerdict>,
    pub witness: Option<FactorWitness>,
}

impl ClassReport {
    fn invalid(reason: String) -> Self {
        Self { nonsignaling: false, invalid_reason: Some(reason), local: None, chsh: None, bell: None, quantum: None, witness: None }
    }

    pub fn is_local(&self) -> Option<bool> {
        self.local.as_ref().map(LocalVerdict::is_local)
    }

    /// One-line verdict such as `P:yes L:no Q:no(sqrt-Bell violated, lhs 2 rhs 0)`.
    pub fn summary(&self) -> String {
        let s = |x: f64| format_sig(x, 12);
        let p = match &self.invalid_reason {
            None => "P:yes".to_string(),
            Some(r) => format!("P:no({r})"),
        };
        let l = match self.is_local() {
            Some(true) => "L:yes",
            Some(false) => "L:no",
            None => "L:n/a",
        };
        let q = match &self.quantum {
            Some(QuantumVerdict::Witness { p, source }) => format!("Q:yes(witness p={p}, {source})"),
            Some(QuantumVerdict::Violated { lhs, rhs, .. }) => {
                format!("Q:no(sqrt-Bell violated, lhs {} rhs {})", s(*lhs), s(*rhs))
            }
            Some(QuantumVerdict::Undecided) => "Q:undecided".to_string(),
            None => "Q:n/a".to_string(),
        };
        format!("{p} {l} {q}")
    }
}

pub fn classify(b: &CorrelationBox, opts: &ClassifyOptions) -> ClassReport {
    classify_matrix(b.to_matrix().entries(), opts)
}

/// Classifies a matrix whose four `(x, y)` blocks share a positive sum.
///
/// The box is the matrix divided by that sum; Bell values are reported for
/// the matrix as given.
pub fn classify_matrix(q: &[[f64; 4]; 4], opts: &ClassifyOptions) -> ClassReport {
    let scale = match common_block_sum(q) {
        Ok(s) => s,
        Err(e) => return ClassReport::invalid(e.to_string()),
    };
    let b = match CorrelationBox::from_matrix(&q.map(|r| r.map(|v| v / scale))) {
        Ok(b) => b,
        Err(e) => return ClassReport::invalid(e.to_string()),
    };
    let matrix = match BoxMatrix::new(*q) {
        Ok(m) => m,
        Err(e) => return ClassReport::invalid(e.to_string()),
    };
    debug_assert!(min_cone_member(&matrix, 1e-12 * scale));
    let local = local_membership(&b, opts.tol);
    let bell = sqrt_bell_value(&matrix).ok();
    let mut witness = None;
    let quantum = if let LocalVerdict::Local(model) = &local {
        let w = local_witness(model);
        let p = w.p();
        witness = Some(w);
        QuantumVerdict::Witness { p, source: "local model".into() }
    } else if let Some(v) = bell.as_ref().filter(|v| v.any_violated()) {
        let d = if v.violated(0) { 0 } else { 2 };
        QuantumVerdict::Violated { d, lhs: v.lhs[d / 2], rhs: v.rhs }
    } else {
        let found = (1..=opts.dim).find_map(|p| match max_cone_search(&matrix, p, opts.restarts, opts.seed) {
            SearchOutcome::Found { witness, .. } => Some(witness),
            SearchOutcome::NotFound => None,
        });
        match found {
            Some(w) => {
                let p = w.p();
                witness = Some(w);
                QuantumVerdict::Witness { p, source: "search".into() }
            }
            None => QuantumVerdict::Undecided,
        }
    };
    ClassReport {
        nonsignaling: true,
        invalid_reason: None,
        chsh: Some(chsh_value(&b)),
        local: Some(local),
        bell,
        quantum: Some(quantum),
        witness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxes::{strategy_to_box, QuantumStrategy};
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    #[test]
    fn uniform_box() {
        let r = classify(&CorrelationBox::uniform(), &ClassifyOptions::default());
        assert!(r.summary().starts_with("P:yes L:yes Q:yes"), "{}", r.summary());
    }

    #[test]
    fn pr_box() {
        let r = classify(&CorrelationBox::pr(), &ClassifyOptions::default());
        assert_eq!(r.summary(), "P:yes L:no Q:no(sqrt-Bell violated, lhs 1 rhs 0)");
        let r = classify_matrix(BoxMatrix::pr().entries(), &ClassifyOptions::default());
        assert_eq!(r.summary(), "P:yes L:no Q:no(sqrt-Bell violated, lhs 2 rhs 0)");
    }

    #[test]
    fn tsirelson_box() {
        let s = QuantumStrategy::qubit_angles([0.0, FRAC_PI_4], [FRAC_PI_8, -FRAC_PI_8]);
        let r = classify(&strategy_to_box(&s).unwrap(), &ClassifyOptions::default());
        assert_eq!(r.is_local(), Some(false));
        assert!(matches!(r.quantum, Some(QuantumVerdict::Witness { .. })), "{}", r.summary());
    }

    #[test]
    fn invalid_input() {
        let mut q = *BoxMatrix::uniform().entries();
        q[0][0] = -0.25;
        q[0][1] = 0.75;
        q[1][0] = 0.75;
        q[1][1] = -0.25;
        let r = classify_matrix(&q, &ClassifyOptions::default());
        assert!(!r.nonsignaling);
        assert!(r.summary().starts_with("P:no("));
    }
}
