//! Type letters of partial functions on the naturals, the five-letter
//! duality, the stored upper/lower/paired type tables, the order and Hasse
//! diagram on upper tables, admissible monotone table words, and
//! predicted-versus-observed consistency reports.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{FnProfile, Param, ProfileValue};
use crate::zoo::TauSequence;

/// Coarse shape of a partial function on the naturals: bounded with
/// infinite domain, eventually below the diagonal, straddling, eventually
/// above, or finite domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TypeLetter {
    Alpha,
    Beta,
    Gamma,
    Delta,
    Epsilon,
}

use TypeLetter::{Alpha, Beta, Delta, Epsilon, Gamma};

impl fmt::Display for TypeLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Alpha => 'α',
            Beta => 'β',
            Gamma => 'γ',
            Delta => 'δ',
            Epsilon => 'ε',
        };
        write!(f, "{c}")
    }
}

/// The letter duality: swaps bounded with finite-domain and below with
/// above; an involution fixing the straddling letter.
pub fn rho(x: TypeLetter) -> TypeLetter {
    match x {
        Alpha => Epsilon,
        Beta => Delta,
        Gamma => Gamma,
        Delta => Beta,
        Epsilon => Alpha,
    }
}

/// A 3x3 letter table, rows and columns indexed i, d, a.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TypeTable(pub [[TypeLetter; 3]; 3]);

impl TypeTable {
    pub fn get(&self, b: Param, c: Param) -> TypeLetter {
        self.0[param_idx(b)][param_idx(c)]
    }

    /// Aligned text rendering with row/column labels.
    pub fn render(&self) -> String {
        let mut out = String::from("    i  d  a\n");
        for (ri, row) in self.0.iter().enumerate() {
            out.push_str(&format!(
                "{}   {}  {}  {}\n",
                Param::ALL[ri].letter(),
                row[0],
                row[1],
                row[2]
            ));
        }
        out
    }
}

pub fn param_idx(p: Param) -> usize {
    match p {
        Param::I => 0,
        Param::D => 1,
        Param::A => 2,
    }
}

/// The seven upper tables, index k-1 holding table k.
pub const UPPER_TABLES: [TypeTable; 7] = [
    TypeTable([[Alpha; 3]; 3]),
    TypeTable([
        [Gamma, Epsilon, Epsilon],
        [Alpha, Alpha, Alpha],
        [Alpha, Alpha, Alpha],
    ]),
    TypeTable([
        [Gamma, Epsilon, Epsilon],
        [Beta, Gamma, Epsilon],
        [Alpha, Alpha, Alpha],
    ]),
    TypeTable([
        [Gamma, Epsilon, Epsilon],
        [Gamma, Gamma, Epsilon],
        [Alpha, Alpha, Alpha],
    ]),
    TypeTable([
        [Gamma, Epsilon, Epsilon],
        [Gamma, Gamma, Gamma],
        [Gamma, Gamma, Gamma],
    ]),
    TypeTable([
        [Gamma, Epsilon, Epsilon],
        [Gamma, Gamma, Delta],
        [Gamma, Gamma, Gamma],
    ]),
    TypeTable([
        [Gamma, Epsilon, Epsilon],
        [Gamma, Gamma, Epsilon],
        [Gamma, Gamma, Gamma],
    ]),
];

/// The seven lower tables.
pub const LOWER_TABLES: [TypeTable; 7] = [
    TypeTable([[Epsilon; 3]; 3]),
    TypeTable([
        [Gamma, Epsilon, Epsilon],
        [Alpha, Epsilon, Epsilon],
        [Alpha, Epsilon, Epsilon],
    ]),
    TypeTable([
        [Gamma, Delta, Epsilon],
        [Alpha, Gamma, Epsilon],
        [Alpha, Alpha, Epsilon],
    ]),
    TypeTable([
        [Gamma, Gamma, Epsilon],
        [Alpha, Gamma, Epsilon],
        [Alpha, Alpha, Epsilon],
    ]),
    TypeTable([
        [Gamma, Gamma, Gamma],
        [Alpha, Gamma, Gamma],
        [Alpha, Gamma, Gamma],
    ]),
    TypeTable([
        [Gamma, Gamma, Gamma],
        [Alpha, Gamma, Gamma],
        [Alpha, Beta, Gamma],
    ]),
    TypeTable([
        [Gamma, Gamma, Gamma],
        [Alpha, Gamma, Gamma],
        [Alpha, Alpha, Gamma],
    ]),
];

pub type PairTable = [[(TypeLetter, TypeLetter); 3]; 3];

/// The seven paired tables, each cell holding (lower letter, upper letter).
pub const PAIRED_TABLES: [PairTable; 7] = [
    [[(Epsilon, Alpha); 3]; 3],
    [
        [(Gamma, Gamma), (Epsilon, Epsilon), (Epsilon, Epsilon)],
        [(Alpha, Alpha), (Epsilon, Alpha), (Epsilon, Alpha)],
        [(Alpha, Alpha), (Epsilon, Alpha), (Epsilon, Alpha)],
    ],
    [
        [(Gamma, Gamma), (Delta, Epsilon), (Epsilon, Epsilon)],
        [(Alpha, Beta), (Gamma, Gamma), (Epsilon, Epsilon)],
        [(Alpha, Alpha), (Alpha, Alpha), (Epsilon, Alpha)],
    ],
    [
        [(Gamma, Gamma), (Gamma, Epsilon), (Epsilon, Epsilon)],
        [(Alpha, Gamma), (Gamma, Gamma), (Epsilon, Epsilon)],
        [(Alpha, Alpha), (Alpha, Alpha), (Epsilon, Alpha)],
    ],
    [
        [(Gamma, Gamma), (Gamma, Epsilon), (Gamma, Epsilon)],
        [(Alpha, Gamma), (Gamma, Gamma), (Gamma, Gamma)],
        [(Alpha, Gamma), (Gamma, Gamma), (Gamma, Gamma)],
    ],
    [
        [(Gamma, Gamma), (Gamma, Epsilon), (Gamma, Epsilon)],
        [(Alpha, Gamma), (Gamma, Gamma), (Gamma, Delta)],
        [(Alpha, Gamma), (Beta, Gamma), (Gamma, Gamma)],
    ],
    [
        [(Gamma, Gamma), (Gamma, Epsilon), (Gamma, Epsilon)],
        [(Alpha, Gamma), (Gamma, Gamma), (Gamma, Epsilon)],
        [(Alpha, Gamma), (Alpha, Gamma), (Gamma, Gamma)],
    ],
];

/// Cellwise comparison under the letter order.
pub fn table_leq(a: &TypeTable, b: &TypeTable) -> bool {
    a.0.iter()
        .zip(b.0.iter())
        .all(|(ra, rb)| ra.iter().zip(rb.iter()).all(|(x, y)| x <= y))
}

/// Covering edges of the order on the seven upper tables, as 1-based index
/// pairs (lower, upper), sorted.
pub fn hasse_diagram() -> Vec<(usize, usize)> {
    let n = UPPER_TABLES.len();
    let leq = |i: usize, j: usize| table_leq(&UPPER_TABLES[i], &UPPER_TABLES[j]);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || !leq(i, j) {
                continue;
            }
            let covered = (0..n).any(|k| k != i && k != j && leq(i, k) && leq(k, j));
            if !covered {
                edges.push((i + 1, j + 1));
            }
        }
    }
    edges.sort();
    edges
}

/// The seven admissible shapes of upper dynamic types: each is a chain of
/// block indices; a word conforms when its values come from one shape and
/// appear in shape order.
pub const DELTA_U_SHAPES: [&[u8]; 7] = [
    &[2],
    &[2, 3],
    &[2, 3, 4],
    &[2, 3, 4, 7],
    &[2, 5],
    &[2, 5, 6],
    &[2, 5, 6, 7],
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeltaUVerdict {
    Consistent { shapes: Vec<Vec<u8>> },
    Rejected { reason: String },
}

/// Check whether a finite word of table indices extends to an admissible
/// upper dynamic type, reporting every matching shape.
pub fn delta_u_membership(prefix: &[u8]) -> DeltaUVerdict {
    if let Some(&bad) = prefix.iter().find(|v| !(2..=7).contains(*v)) {
        return DeltaUVerdict::Rejected {
            reason: format!("index {bad} is not an admissible block (2..=7)"),
        };
    }
    for w in prefix.windows(2) {
        if !table_leq(
            &UPPER_TABLES[(w[0] - 1) as usize],
            &UPPER_TABLES[(w[1] - 1) as usize],
        ) {
            return DeltaUVerdict::Rejected {
                reason: format!("table {} does not precede table {}", w[0], w[1]),
            };
        }
    }
    let shapes: Vec<Vec<u8>> = DELTA_U_SHAPES
        .iter()
        .filter(|shape| conforms(prefix, shape))
        .map(|shape| shape.to_vec())
        .collect();
    if shapes.is_empty() {
        DeltaUVerdict::Rejected {
            reason: "no admissible family mixes these blocks".into(),
        }
    } else {
        DeltaUVerdict::Consistent { shapes }
    }
}

fn conforms(word: &[u8], shape: &[u8]) -> bool {
    let mut at = 0;
    'next: for &v in word {
        while at < shape.len() {
            if shape[at] == v {
                continue 'next;
            }
            at += 1;
        }
        return false;
    }
    true
}

/// External knowledge about the function behind a finite profile, sourced
/// from family-level facts rather than the window itself.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hints {
    pub domain_infinite: Option<bool>,
    pub bounded: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Evidence {
    pub defined: usize,
    pub dom_plus: usize,
    pub dom_minus: usize,
    pub infinity_observed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TypeVerdict {
    pub consistent: BTreeSet<TypeLetter>,
    pub evidence: Evidence,
}

/// Letters not refuted by a finite profile window plus hints. An observed
/// infinite value pins the finite-domain letter. Otherwise the growth
/// letter is read off the last two defined points (above the diagonal,
/// below it, or both), and the bounded and finite-domain letters stay
/// consistent unless a hint rules them out. With both hints the verdict is
/// a singleton.
pub fn classify_profile(p: &FnProfile, hints: Hints) -> Result<TypeVerdict> {
    let defined: Vec<(u64, u64)> = p
        .values
        .iter()
        .enumerate()
        .filter_map(|(m, v)| match v {
            ProfileValue::Defined(x) => Some((m as u64, *x)),
            _ => None,
        })
        .collect();
    let infinity_observed = p.values.iter().any(|v| *v == ProfileValue::Infinity);
    let evidence = Evidence {
        defined: defined.len(),
        dom_plus: defined.iter().filter(|&&(m, g)| g >= m).count(),
        dom_minus: defined.iter().filter(|&&(m, g)| g <= m).count(),
        infinity_observed,
    };
    if infinity_observed {
        if hints.bounded == Some(true) {
            return Err(Error::ContradictoryHints(
                "profile reaches an infinite value but is hinted bounded".into(),
            ));
        }
        return Ok(TypeVerdict {
            consistent: [Epsilon].into_iter().collect(),
            evidence,
        });
    }
    let mut letters = BTreeSet::new();
    if hints.domain_infinite != Some(true) {
        letters.insert(Epsilon);
    }
    if hints.bounded != Some(false) {
        letters.insert(Alpha);
    }
    if hints.bounded != Some(true) {
        // Growth letter from the last two defined points: touching both
        // sides of the diagonal (or sitting on it) straddles; strictly one
        // side is the above/below letter.
        let tail = &defined[defined.len().saturating_sub(2)..];
        if !tail.is_empty() {
            let growth = match (
                tail.iter().any(|&(m, g)| g >= m),
                tail.iter().any(|&(m, g)| g <= m),
            ) {
                (true, true) => Gamma,
                (true, false) => Delta,
                (false, true) => Beta,
                (false, false) => unreachable!("every value compares to its argument"),
            };
            letters.insert(growth);
        }
    }
    if letters.is_empty() {
        return Err(Error::ContradictoryHints(
            "hints exclude every letter the window allows".into(),
        ));
    }
    Ok(TypeVerdict {
        consistent: letters,
        evidence,
    })
}

/// The predicted upper, lower, and paired tables for a tau word at input
/// count n: those of the block active at n.
pub fn predicted_table(tau: &TauSequence, n: u32) -> (u8, TypeTable, TypeTable, PairTable) {
    let k = tau.active_family(n);
    let idx = (k - 1) as usize;
    (k, UPPER_TABLES[idx], LOWER_TABLES[idx], PAIRED_TABLES[idx])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CellReport {
    pub upper: bool,
    pub b: Param,
    pub c: Param,
    pub predicted: TypeLetter,
    pub verdict: TypeVerdict,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    pub family_index: u8,
    pub n: u32,
    pub cells: Vec<CellReport>,
    pub duality_ok: bool,
    pub all_consistent: bool,
}

/// Classify each supplied profile (with its hints) and check the predicted
/// table letter lies in its verdict; also audit the prediction's duality.
pub fn observed_consistency(
    tau: &TauSequence,
    n: u32,
    profiles: &[(FnProfile, Hints)],
) -> Result<ConsistencyReport> {
    let (k, t_pred, l_pred, _) = predicted_table(tau, n);
    let mut cells = Vec::with_capacity(profiles.len());
    for (p, hints) in profiles {
        let predicted = if p.upper {
            t_pred.get(p.b, p.c)
        } else {
            l_pred.get(p.b, p.c)
        };
        let verdict = classify_profile(p, *hints)?;
        let consistent = verdict.consistent.contains(&predicted);
        cells.push(CellReport {
            upper: p.upper,
            b: p.b,
            c: p.c,
            predicted,
            verdict,
            consistent,
        });
    }
    let duality_ok = Param::ALL.iter().all(|&b| {
        Param::ALL
            .iter()
            .all(|&c| l_pred.get(b, c) == rho(t_pred.get(c, b)))
    });
    let all_consistent = duality_ok && cells.iter().all(|c| c.consistent);
    Ok(ConsistencyReport {
        family_index: k,
        n,
        cells,
        duality_ok,
        all_consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_is_the_stated_involution() {
        assert_eq!(rho(Alpha), Epsilon);
        assert_eq!(rho(Beta), Delta);
        assert_eq!(rho(Gamma), Gamma);
        for x in [Alpha, Beta, Gamma, Delta, Epsilon] {
            assert_eq!(rho(rho(x)), x);
        }
    }

    #[test]
    fn pairing_law_holds_verbatim() {
        for k in 0..7 {
            for b in 0..3 {
                for c in 0..3 {
                    assert_eq!(
                        PAIRED_TABLES[k][b][c],
                        (LOWER_TABLES[k].0[b][c], UPPER_TABLES[k].0[b][c]),
                        "table {} cell ({b},{c})",
                        k + 1
                    );
                }
            }
        }
    }

    #[test]
    fn duality_law_holds_on_all_63_cells() {
        for k in 0..7 {
            for b in 0..3 {
                for c in 0..3 {
                    assert_eq!(
                        LOWER_TABLES[k].0[b][c],
                        rho(UPPER_TABLES[k].0[c][b]),
                        "table {} cell ({b},{c})",
                        k + 1
                    );
                }
            }
        }
    }

    #[test]
    fn order_facts() {
        let leq = |i: usize, j: usize| table_leq(&UPPER_TABLES[i - 1], &UPPER_TABLES[j - 1]);
        for k in 1..=7 {
            assert!(leq(1, k), "t_1 below t_{k}");
        }
        assert!(leq(3, 4));
        assert!(!leq(4, 5));
        assert!(!leq(3, 5) && !leq(5, 3));
        // Exactly the two chains (reflexive-transitively closed) over t_1.
        let expected: BTreeSet<(usize, usize)> = {
            let mut s = BTreeSet::new();
            for chain in [[2usize, 3, 4, 7], [2, 5, 6, 7]] {
                for i in 0..4 {
                    for j in i..4 {
                        s.insert((chain[i], chain[j]));
                    }
                }
            }
            for k in 1..=7 {
                s.insert((1, k));
                s.insert((k, k));
            }
            s
        };
        for i in 1..=7 {
            for j in 1..=7 {
                assert_eq!(leq(i, j), expected.contains(&(i, j)), "({i},{j})");
            }
        }
    }

    #[test]
    fn hasse_diagram_is_the_two_chains() {
        assert_eq!(
            hasse_diagram(),
            vec![(1, 2), (2, 3), (2, 5), (3, 4), (4, 7), (5, 6), (6, 7)]
        );
    }

    #[test]
    fn delta_u_prefixes() {
        match delta_u_membership(&[2, 2, 3]) {
            DeltaUVerdict::Consistent { shapes } => {
                assert_eq!(
                    shapes,
                    vec![vec![2, 3], vec![2, 3, 4], vec![2, 3, 4, 7]]
                );
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            delta_u_membership(&[3, 2]),
            DeltaUVerdict::Rejected { .. }
        ));
        assert!(matches!(
            delta_u_membership(&[2, 5, 4]),
            DeltaUVerdict::Rejected { .. }
        ));
        assert!(matches!(
            delta_u_membership(&[1, 2]),
            DeltaUVerdict::Rejected { .. }
        ));
    }

    #[test]
    fn monotone_words_equal_family_prefixes() {
        // Every nondecreasing word over {2..7} of length <= 6 matches some
        // shape, and vice versa.
        let leq = |i: u8, j: u8| {
            table_leq(
                &UPPER_TABLES[(i - 1) as usize],
                &UPPER_TABLES[(j - 1) as usize],
            )
        };
        let mut words: Vec<Vec<u8>> = vec![vec![]];
        for _ in 0..6 {
            let mut next = Vec::new();
            for w in &words {
                for v in 2..=7u8 {
                    if w.last().map_or(true, |&l| leq(l, v)) {
                        let mut w = w.clone();
                        w.push(v);
                        next.push(w);
                    }
                }
            }
            for w in next {
                words.push(w);
            }
        }
        for w in words.iter().filter(|w| !w.is_empty()) {
            let monotone = w.windows(2).all(|p| leq(p[0], p[1]));
            let member = matches!(
                delta_u_membership(w),
                DeltaUVerdict::Consistent { .. }
            );
            assert_eq!(monotone, member, "{w:?}");
        }
    }

    fn profile(upper: bool, values: Vec<ProfileValue>) -> FnProfile {
        FnProfile {
            upper,
            b: Param::D,
            c: Param::I,
            family: "test".into(),
            values,
        }
    }

    #[test]
    fn infinity_forces_finite_domain_letter() {
        let p = profile(
            true,
            vec![ProfileValue::Defined(0), ProfileValue::Infinity],
        );
        let v = classify_profile(
            &p,
            Hints {
                domain_infinite: Some(false),
                bounded: None,
            },
        )
        .unwrap();
        assert_eq!(v.consistent, [Epsilon].into_iter().collect());
        assert!(matches!(
            classify_profile(
                &p,
                Hints {
                    domain_infinite: None,
                    bounded: Some(true)
                }
            ),
            Err(Error::ContradictoryHints(_))
        ));
    }

    #[test]
    fn identity_profile_with_hints_is_straddling() {
        let p = profile(
            true,
            (0..=5).map(ProfileValue::Defined).collect(),
        );
        let v = classify_profile(
            &p,
            Hints {
                domain_infinite: Some(true),
                bounded: Some(false),
            },
        )
        .unwrap();
        assert_eq!(v.consistent, [Gamma].into_iter().collect());
    }

    #[test]
    fn zero_profile_with_bounded_hint() {
        let p = profile(true, vec![ProfileValue::Defined(0); 6]);
        let v = classify_profile(
            &p,
            Hints {
                domain_infinite: Some(true),
                bounded: Some(true),
            },
        )
        .unwrap();
        assert_eq!(v.consistent, [Alpha].into_iter().collect());
    }

    #[test]
    fn unhinted_verdicts_stay_broad() {
        // Growth strictly above the diagonal on the tail.
        let p = profile(
            true,
            (0..=4).map(|m| ProfileValue::Defined(2 * m + 1)).collect(),
        );
        let v = classify_profile(&p, Hints::default()).unwrap();
        assert_eq!(
            v.consistent,
            [Alpha, Delta, Epsilon].into_iter().collect()
        );
    }

    #[test]
    fn predicted_tables_follow_the_active_block() {
        let tau = TauSequence::parse("2:1,3:inf").unwrap();
        assert_eq!(predicted_table(&tau, 1).0, 2);
        assert_eq!(predicted_table(&tau, 5).0, 3);
        assert_eq!(predicted_table(&tau, 5).1, UPPER_TABLES[2]);
        let tau5 = TauSequence::parse("5:inf").unwrap();
        assert_eq!(predicted_table(&tau5, 1).0, 5);
    }

    #[test]
    fn table_rendering_is_aligned() {
        let s = UPPER_TABLES[1].render();
        assert!(s.starts_with("    i  d  a\n"));
        assert!(s.contains("i   γ  ε  ε"));
    }
}
