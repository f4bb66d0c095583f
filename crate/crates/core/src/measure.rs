//! Complexity measures on symbol words, their extension to expression
//! sequences and trees, the limited-measure axioms, and the description
//! complexity of a problem.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::structure::{Expression, Problem};
use crate::tree::ComputationTree;

/// A complexity measure. `WeightedDepth` charges each symbol its positive
/// weight and the empty word 0. `Zero` is the identically-zero table
/// measure (not limited; it exists to realize degenerate bound profiles).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Measure {
    WeightedDepth { weights: BTreeMap<String, u64> },
    Zero,
}

impl Measure {
    /// Depth: every symbol in `symbols` has weight 1.
    pub fn depth<I: IntoIterator<Item = S>, S: Into<String>>(symbols: I) -> Self {
        Measure::WeightedDepth {
            weights: symbols.into_iter().map(|s| (s.into(), 1)).collect(),
        }
    }

    pub fn weighted<I: IntoIterator<Item = (S, u64)>, S: Into<String>>(weights: I) -> Self {
        Measure::WeightedDepth {
            weights: weights.into_iter().map(|(s, w)| (s.into(), w)).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Measure::WeightedDepth { weights } = self {
            if let Some((name, _)) = weights.iter().find(|(_, &w)| w == 0) {
                return Err(Error::InvalidStructure(format!(
                    "weight of `{name}` must be positive"
                )));
            }
        }
        Ok(())
    }

    pub fn weight(&self, symbol: &str) -> Result<u64> {
        match self {
            Measure::WeightedDepth { weights } => weights
                .get(symbol)
                .copied()
                .ok_or_else(|| Error::UnknownSymbol(symbol.to_string())),
            Measure::Zero => Ok(0),
        }
    }
}

/// The measure of a word of symbol names; the empty word costs 0.
pub fn measure_word(psi: &Measure, word: &[&str]) -> Result<u64> {
    word.iter().try_fold(0, |acc, s| Ok(acc + psi.weight(s)?))
}

/// The measure of an expression sequence: each expression contributes its
/// symbol.
pub fn measure_sequence(psi: &Measure, seq: &[Expression]) -> Result<u64> {
    seq.iter()
        .try_fold(0, |acc, e| Ok(acc + psi.weight(e.symbol())?))
}

/// The measure of a tree: the maximum over all complete paths (including
/// paths with empty areas) of the measure of the path's sequence.
pub fn measure_tree(psi: &Measure, tree: &ComputationTree) -> Result<u64> {
    let mut max = 0;
    for path in tree.complete_paths()? {
        max = max.max(measure_sequence(psi, &path.seq)?);
    }
    Ok(max)
}

/// Description complexity: the measure of the problem's own sequence.
pub fn psi_i(psi: &Measure, z: &Problem) -> Result<u64> {
    measure_sequence(psi, &z.seq)
}

/// Outcome of sampling the three limited-measure axioms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LimitedReport {
    pub pass: bool,
    pub trials: usize,
    pub counterexample: Option<LimitedCounterexample>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LimitedCounterexample {
    pub axiom: &'static str,
    pub words: Vec<Vec<String>>,
}

/// Test the limited-measure axioms on sampled word triples:
/// subadditivity psi(a1 a2) <= psi(a1) + psi(a2), monotonicity under
/// deleting a middle segment psi(a1 a2 a3) >= psi(a1 a3), and
/// psi(a) >= |a|. `cost` is the word-cost function under test and
/// `sample` produces one word per call.
pub fn check_limited(
    cost: impl Fn(&[String]) -> u64,
    mut sample: impl FnMut() -> Vec<String>,
    trials: usize,
) -> LimitedReport {
    let concat = |parts: &[&[String]]| -> Vec<String> {
        parts.iter().flat_map(|p| p.iter().cloned()).collect()
    };
    for _ in 0..trials {
        let a1 = sample();
        let a2 = sample();
        let a3 = sample();
        if cost(&concat(&[&a1, &a2])) > cost(&a1) + cost(&a2) {
            return LimitedReport {
                pass: false,
                trials,
                counterexample: Some(LimitedCounterexample {
                    axiom: "subadditivity",
                    words: vec![a1, a2],
                }),
            };
        }
        if cost(&concat(&[&a1, &a2, &a3])) < cost(&concat(&[&a1, &a3])) {
            return LimitedReport {
                pass: false,
                trials,
                counterexample: Some(LimitedCounterexample {
                    axiom: "deletion monotonicity",
                    words: vec![a1, a2, a3],
                }),
            };
        }
        if cost(&a1) < a1.len() as u64 {
            return LimitedReport {
                pass: false,
                trials,
                counterexample: Some(LimitedCounterexample {
                    axiom: "length lower bound",
                    words: vec![a1],
                }),
            };
        }
    }
    LimitedReport {
        pass: true,
        trials,
        counterexample: None,
    }
}

/// The word cost of a measure value, for use with `check_limited`.
pub fn word_cost(psi: &Measure) -> impl Fn(&[String]) -> u64 + '_ {
    move |word: &[String]| {
        let refs: Vec<&str> = word.iter().map(String::as_str).collect();
        measure_word(psi, &refs).expect("sample alphabet known to the measure")
    }
}
