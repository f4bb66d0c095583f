//! The witness constructions: the six named structure/measure families,
//! finite truncations of their infinite carriers, the one-predicate-per-level
//! lifting, direct sums, tau-indexed sums, and the named witness problems.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::structure::{
    table_index, Atom, Expression, Nu, PredicateSym, Problem, StructureInstance,
};

/// Finite stand-in bounds for an infinite family: the largest predicate
/// index materialized and the inclusive span of base carrier values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationParams {
    pub max_index: u32,
    pub span_lo: i64,
    pub span_hi: i64,
}

impl TruncationParams {
    pub fn new(max_index: u32, span_lo: i64, span_hi: i64) -> Result<Self> {
        if span_lo > span_hi {
            return Err(Error::BadTruncation(format!(
                "empty carrier span {span_lo}..{span_hi}"
            )));
        }
        Ok(TruncationParams {
            max_index,
            span_lo,
            span_hi,
        })
    }

    fn span(&self) -> impl Iterator<Item = i64> {
        self.span_lo..=self.span_hi
    }

    fn span_len(&self) -> usize {
        (self.span_hi - self.span_lo + 1) as usize
    }
}

/// The escalating weight schedule c_0 = 1, c_i = i * (c_0 + ... + c_{i-1}) + 2.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CiSchedule {
    pub values: Vec<u64>,
}

pub fn ci_schedule(t: u32) -> CiSchedule {
    let mut values = vec![1u64];
    let mut sum = 1u64;
    for i in 1..=t as u64 {
        let c = i * sum + 2;
        values.push(c);
        sum += c;
    }
    CiSchedule { values }
}

fn unary_predicate(
    name: String,
    span: impl Iterator<Item = i64>,
    holds: impl Fn(i64) -> bool,
) -> PredicateSym {
    PredicateSym {
        name,
        arity: 1,
        table: span.map(|j| holds(j) as u8).collect(),
    }
}

/// Materialize one of the six base families at a truncation. Family 2 is
/// the one-point structure with an identically-0 predicate; 3 is thresholds
/// over an initial segment of the naturals; 4 is every 0/1 column over the
/// span; 5 is point predicates with the escalating weight schedule; 6 is
/// point/pair predicates q_{2i}, q_{2i+1}, p_{2i} of weight i; 7 is
/// thresholds of weight 1 plus negative point predicates q_{-k} of weight k
/// over an integer span.
pub fn build_pi(r: u8, trunc: &TruncationParams) -> Result<(StructureInstance, Measure)> {
    let need_nonneg = |t: &TruncationParams| -> Result<()> {
        if t.span_lo < 0 {
            Err(Error::BadTruncation(format!(
                "family {r} lives on the naturals; span starts at {}",
                t.span_lo
            )))
        } else {
            Ok(())
        }
    };
    let mut predicates = Vec::new();
    let mut weights: Vec<(String, u64)> = Vec::new();
    let carrier: Vec<Atom>;
    match r {
        2 => {
            carrier = vec![Atom::base(0)];
            predicates.push(unary_predicate("q_1".into(), 0..=0, |_| false));
            weights.push(("q_1".into(), 1));
        }
        3 => {
            need_nonneg(trunc)?;
            carrier = trunc.span().map(Atom::base).collect();
            for i in 0..=trunc.max_index as i64 {
                let name = format!("l_{i}");
                predicates.push(unary_predicate(name.clone(), trunc.span(), |j| j > i));
                weights.push((name, 1));
            }
        }
        4 => {
            need_nonneg(trunc)?;
            if trunc.span_len() > 6 {
                return Err(Error::BadTruncation(
                    "family 4 materializes 2^|span| predicates; span must have at most 6 values"
                        .into(),
                ));
            }
            carrier = trunc.span().map(Atom::base).collect();
            for idx in 0..1u32 << trunc.span_len() {
                let name = format!("g_{idx}");
                predicates.push(PredicateSym {
                    name: name.clone(),
                    arity: 1,
                    table: (0..trunc.span_len()).map(|pos| (idx >> pos & 1) as u8).collect(),
                });
                weights.push((name, 1));
            }
        }
        5 => {
            need_nonneg(trunc)?;
            carrier = trunc.span().map(Atom::base).collect();
            let schedule = ci_schedule(trunc.max_index);
            for i in 0..=trunc.max_index as i64 {
                let name = format!("q_{i}");
                predicates.push(unary_predicate(name.clone(), trunc.span(), |j| j == i));
                weights.push((name, schedule.values[i as usize]));
            }
        }
        6 => {
            need_nonneg(trunc)?;
            carrier = trunc.span().map(Atom::base).collect();
            for i in 1..=trunc.max_index as i64 {
                if 2 * i < trunc.span_lo || 2 * i + 1 > trunc.span_hi {
                    continue;
                }
                let defs: [(String, Box<dyn Fn(i64) -> bool>); 3] = [
                    (format!("q_{}", 2 * i), Box::new(move |j| j == 2 * i)),
                    (format!("q_{}", 2 * i + 1), Box::new(move |j| j == 2 * i + 1)),
                    (
                        format!("p_{}", 2 * i),
                        Box::new(move |j| j == 2 * i || j == 2 * i + 1),
                    ),
                ];
                for (name, holds) in defs {
                    predicates.push(unary_predicate(name.clone(), trunc.span(), &holds));
                    weights.push((name, i as u64));
                }
            }
            if predicates.is_empty() {
                return Err(Error::BadTruncation(
                    "family 6 truncation materializes no predicates".into(),
                ));
            }
        }
        7 => {
            carrier = trunc.span().map(Atom::base).collect();
            for i in 0..=trunc.max_index as i64 {
                let name = format!("l_{i}");
                predicates.push(unary_predicate(name.clone(), trunc.span(), |j| j > i));
                weights.push((name, 1));
            }
            for k in 1..=trunc.max_index as i64 {
                let name = format!("q_-{k}");
                predicates.push(unary_predicate(name.clone(), trunc.span(), |j| j == -k));
                weights.push((name, k as u64));
            }
        }
        _ => {
            return Err(Error::BadTruncation(format!(
                "family index {r} is not in 2..=7"
            )))
        }
    }
    let u = StructureInstance::new(carrier, Vec::new(), predicates)?;
    Ok((u, Measure::weighted(weights)))
}

fn lifted_name(base: &str, level: u32) -> String {
    format!("{base}@{level}")
}

/// Lift a base (level-free, unary-predicate) instance to level n: carrier
/// becomes the level-n copies of its atoms plus n marker atoms, and every
/// predicate becomes n-ary, returning its base value exactly on tuples of
/// the form (marker 1, ..., marker n-1, level-n atom) and 0 elsewhere.
/// Weights carry over; predicate names gain an `@n` suffix.
pub fn lift_structure(
    u: &StructureInstance,
    psi: &Measure,
    n: u32,
) -> Result<(StructureInstance, Measure)> {
    if n == 0 {
        return Err(Error::BadTruncation("lift level must be positive".into()));
    }
    let base_values: Vec<i64> = u
        .carrier
        .iter()
        .map(|a| match a {
            Atom::Base { v } => Ok(*v),
            other => Err(Error::BadTruncation(format!(
                "cannot lift an already-lifted carrier (found {other})"
            ))),
        })
        .collect::<Result<_>>()?;
    let mut carrier: Vec<Atom> = base_values.iter().map(|&v| Atom::lifted(v, n)).collect();
    carrier.extend((0..n).map(|i| Atom::marker(i, n)));
    carrier.sort();

    let card = carrier.len();
    if card.pow(n).checked_mul(u.predicates.len().max(1)).map_or(true, |x| x > 2_000_000) {
        return Err(Error::BadTruncation(format!(
            "lifted tables would hold {card}^{n} entries per predicate"
        )));
    }
    // Position of each source atom's level-n copy in the new carrier, and
    // the index expected at each prefix slot.
    let lifted_pos: BTreeMap<usize, usize> = base_values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let pos = carrier.binary_search(&Atom::lifted(v, n)).expect("present");
            (pos, i)
        })
        .collect();
    let marker_pos: Vec<usize> = (0..n)
        .map(|i| carrier.binary_search(&Atom::marker(i, n)).expect("present"))
        .collect();

    let mut predicates = Vec::with_capacity(u.predicates.len());
    let mut weights = Vec::with_capacity(u.predicates.len());
    for p in &u.predicates {
        if p.arity != 1 {
            return Err(Error::BadTruncation(format!(
                "lifting expects unary base predicates, `{}` has arity {}",
                p.name, p.arity
            )));
        }
        let mut table = vec![0u8; card.pow(n)];
        for (idx, slot) in table.iter_mut().enumerate() {
            let args = crate::structure::decode_index(idx, card, n as usize);
            let prefix_ok = (1..n as usize).all(|i| args[i - 1] == marker_pos[i]);
            if prefix_ok {
                if let Some(&base_idx) = lifted_pos.get(&args[n as usize - 1]) {
                    *slot = p.table[base_idx];
                }
            }
        }
        let name = lifted_name(&p.name, n);
        weights.push((name.clone(), psi.weight(&p.name)?));
        predicates.push(PredicateSym {
            name,
            arity: n as usize,
            table,
        });
    }
    let lifted = StructureInstance::new(carrier, Vec::new(), predicates)?;
    Ok((lifted, Measure::weighted(weights)))
}

fn level_of(u: &StructureInstance) -> Result<u32> {
    let mut level = None;
    for a in &u.carrier {
        let n = match a {
            Atom::Lifted { n, .. } | Atom::Marker { n, .. } => *n,
            Atom::Base { .. } => {
                return Err(Error::BadTruncation(
                    "direct sum blocks must be lifted instances".into(),
                ))
            }
        };
        match level {
            None => level = Some(n),
            Some(l) if l != n => {
                return Err(Error::BadTruncation(
                    "block mixes atoms of different levels".into(),
                ))
            }
            _ => {}
        }
    }
    level.ok_or_else(|| Error::BadTruncation("empty block".into()))
}

/// Disjoint union of lifted instances with pairwise distinct levels: the
/// carrier is the union, and each block's predicates extend by 0 on tuples
/// containing any atom from outside the block.
pub fn direct_sum(blocks: &[(StructureInstance, Measure)]) -> Result<(StructureInstance, Measure)> {
    if blocks.is_empty() {
        return Err(Error::BadTruncation("direct sum of no blocks".into()));
    }
    let mut seen_levels = BTreeSet::new();
    for (u, _) in blocks {
        let lvl = level_of(u)?;
        if !seen_levels.insert(lvl) {
            return Err(Error::DuplicateLevels(lvl as usize));
        }
    }
    let mut carrier: Vec<Atom> = blocks
        .iter()
        .flat_map(|(u, _)| u.carrier.iter().copied())
        .collect();
    carrier.sort();
    carrier.dedup();
    let card = carrier.len();

    let mut predicates = Vec::new();
    let mut weights = Vec::new();
    for (u, psi) in blocks {
        // Map combined carrier positions back into the block, if present.
        let block_pos: Vec<Option<usize>> = carrier
            .iter()
            .map(|a| u.carrier.binary_search(a).ok())
            .collect();
        for p in &u.predicates {
            if card.pow(p.arity as u32) > 2_000_000 {
                return Err(Error::BadTruncation(format!(
                    "summed table for `{}` would hold {card}^{} entries",
                    p.name, p.arity
                )));
            }
            let mut table = vec![0u8; card.pow(p.arity as u32)];
            for (idx, slot) in table.iter_mut().enumerate() {
                let args = crate::structure::decode_index(idx, card, p.arity);
                let inner: Option<Vec<usize>> =
                    args.iter().map(|&a| block_pos[a]).collect();
                if let Some(inner) = inner {
                    *slot = p.table[table_index(&inner, u.card())];
                }
            }
            weights.push((p.name.clone(), psi.weight(&p.name)?));
            predicates.push(PredicateSym {
                name: p.name.clone(),
                arity: p.arity,
                table,
            });
        }
    }
    let sum = StructureInstance::new(carrier, Vec::new(), predicates)?;
    Ok((sum, Measure::weighted(weights)))
}

/// A tau word: blocks (v_j, w_j) with pairwise distinct v in 2..=7 and the
/// final width infinite (None).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauSequence {
    pub blocks: Vec<(u8, Option<u64>)>,
}

impl TauSequence {
    pub fn new(blocks: Vec<(u8, Option<u64>)>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidTau("tau must have at least one block".into()));
        }
        let mut seen = BTreeSet::new();
        for (j, (v, w)) in blocks.iter().enumerate() {
            if !(2..=7).contains(v) {
                return Err(Error::InvalidTau(format!("block index {v} not in 2..=7")));
            }
            if !seen.insert(*v) {
                return Err(Error::InvalidTau(format!("block index {v} repeats")));
            }
            let last = j + 1 == blocks.len();
            match (last, w) {
                (true, None) => {}
                (true, Some(_)) => {
                    return Err(Error::InvalidTau("last block width must be inf".into()))
                }
                (false, Some(w)) if *w >= 1 => {}
                (false, _) => {
                    return Err(Error::InvalidTau(
                        "inner block widths must be positive integers".into(),
                    ))
                }
            }
        }
        Ok(TauSequence { blocks })
    }

    /// Parse "2:1,3:inf" style words.
    pub fn parse(s: &str) -> Result<Self> {
        let mut blocks = Vec::new();
        for part in s.split(',') {
            let (v, w) = part
                .split_once(':')
                .ok_or_else(|| Error::InvalidTau(format!("bad block `{part}`")))?;
            let v: u8 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidTau(format!("bad block index `{v}`")))?;
            let w = match w.trim() {
                "inf" => None,
                other => Some(
                    other
                        .parse::<u64>()
                        .map_err(|_| Error::InvalidTau(format!("bad width `{other}`")))?,
                ),
            };
            blocks.push((v, w));
        }
        TauSequence::new(blocks)
    }

    /// Levels n_1 = 1, n_{j+1} = w_1 + ... + w_j + 1.
    pub fn levels(&self) -> Vec<u32> {
        let mut levels = vec![1u32];
        let mut acc = 0u64;
        for (_, w) in &self.blocks[..self.blocks.len() - 1] {
            acc += w.expect("inner widths finite");
            levels.push(acc as u32 + 1);
        }
        levels
    }

    /// The family index active at input count n: the last block whose level
    /// does not exceed n.
    pub fn active_family(&self, n: u32) -> u8 {
        let levels = self.levels();
        let mut active = self.blocks[0].0;
        for (j, &lvl) in levels.iter().enumerate() {
            if lvl <= n {
                active = self.blocks[j].0;
            }
        }
        active
    }
}

/// Build (U_tau, psi_tau): the direct sum of each block's family lifted to
/// its level. Returns the instance, measure, and the (level, family) map.
pub fn build_tau_pair(
    tau: &TauSequence,
    trunc: &TruncationParams,
) -> Result<(StructureInstance, Measure, Vec<(u32, u8)>)> {
    let levels = tau.levels();
    let mut blocks = Vec::new();
    let mut block_map = Vec::new();
    for (j, &(v, _)) in tau.blocks.iter().enumerate() {
        let (u, psi) = build_pi(v, trunc)?;
        blocks.push(lift_structure(&u, &psi, levels[j])?);
        block_map.push((levels[j], v));
    }
    let (u, psi) = direct_sum(&blocks)?;
    Ok((u, psi, block_map))
}

/// The named witness problem families. Each takes the index parameter from
/// its defining construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WitnessKind {
    /// One point predicate q_i; answers 0/1.
    Z5 { i: u32 },
    /// q_{2m}, q_{2m+1}, p_{2m}; answer 1 at 2m, 2 at 2m+1, else 0.
    Z6 { m: u32 },
    /// One negative point predicate q_{-i}; answers 0/1.
    Eta7 { i: u32 },
    /// Thresholds l_1..l_t with pairwise disjoint answers.
    Zt7 { t: u32 },
    /// Thresholds l_1..l_q with pairwise disjoint answers.
    Zbin3 { q: u32 },
}

/// Build a witness problem over a hosting structure. `level` selects the
/// lifted copies (predicates named with an `@level` suffix, applied to that
/// many input variables); None uses the unlifted unary names on x_1.
pub fn witness_problem(
    u: &StructureInstance,
    kind: WitnessKind,
    level: Option<u32>,
) -> Result<Problem> {
    let arity = level.unwrap_or(1) as usize;
    let input_vars: BTreeSet<usize> = (1..=arity).collect();
    let args: Vec<usize> = (1..=arity).collect();
    let expr = |base: &str| -> Result<Expression> {
        let name = match level {
            Some(lvl) => lifted_name(base, lvl),
            None => base.to_string(),
        };
        if u.predicate(&name).is_err() {
            return Err(Error::MissingPredicate(name));
        }
        Ok(Expression::predicate(&name, &args))
    };
    let (seq, nu) = match kind {
        WitnessKind::Z5 { i } => (
            vec![expr(&format!("q_{i}"))?],
            Nu::distinct_singletons(1, 0),
        ),
        WitnessKind::Z6 { m } => {
            let seq = vec![
                expr(&format!("q_{}", 2 * m))?,
                expr(&format!("q_{}", 2 * m + 1))?,
                expr(&format!("p_{}", 2 * m))?,
            ];
            let mut nu = Nu::constant(3, [0].into_iter().collect());
            nu.set(&[1, 0, 1], [1].into_iter().collect());
            nu.set(&[0, 1, 1], [2].into_iter().collect());
            (seq, nu)
        }
        WitnessKind::Eta7 { i } => (
            vec![expr(&format!("q_-{i}"))?],
            Nu::distinct_singletons(1, 0),
        ),
        WitnessKind::Zt7 { t } | WitnessKind::Zbin3 { q: t } => {
            let seq: Vec<Expression> = (1..=t)
                .map(|i| expr(&format!("l_{i}")))
                .collect::<Result<_>>()?;
            (seq, Nu::distinct_singletons(t as usize, 0))
        }
    };
    Problem::new(input_vars, nu, seq)
}

/// Every predicate applied to every injective tuple of the input variables
/// whose length matches its arity — the full expression pool over Y.
pub fn pool_expressions(u: &StructureInstance, input_vars: &BTreeSet<usize>) -> Vec<Expression> {
    let vars: Vec<usize> = input_vars.iter().copied().collect();
    let mut out = Vec::new();
    for p in &u.predicates {
        if p.arity > vars.len() {
            continue;
        }
        let mut tuple: Vec<usize> = Vec::new();
        injective_tuples(&vars, p.arity, &mut tuple, &mut |args| {
            out.push(Expression::predicate(&p.name, args));
        });
    }
    out
}

fn injective_tuples(
    vars: &[usize],
    len: usize,
    tuple: &mut Vec<usize>,
    emit: &mut impl FnMut(&[usize]),
) {
    if tuple.len() == len {
        emit(tuple);
        return;
    }
    for &v in vars {
        if !tuple.contains(&v) {
            tuple.push(v);
            injective_tuples(vars, len, tuple, emit);
            tuple.pop();
        }
    }
}

/// Drop pool expressions whose symbols weigh more than the budget: a tree
/// of cost at most the budget can never use them.
pub fn prune_expressions(
    exprs: &[Expression],
    psi: &Measure,
    budget: u64,
) -> Result<Vec<Expression>> {
    let mut out = Vec::new();
    for e in exprs {
        if psi.weight(e.symbol())? <= budget {
            out.push(e.clone());
        }
    }
    Ok(out)
}

/// The fixtures used throughout the test suites.
pub mod fixtures {
    use super::*;

    /// Thresholds l_0, l_1, l_2 over carrier {0, 1, 2, 3}.
    pub fn s1() -> StructureInstance {
        build_pi(3, &TruncationParams::new(2, 0, 3).unwrap())
            .unwrap()
            .0
    }

    /// Depth over the s1 symbols.
    pub fn s1_depth() -> Measure {
        build_pi(3, &TruncationParams::new(2, 0, 3).unwrap())
            .unwrap()
            .1
    }

    /// Y = {x_1}, sequence l_0(x_1), l_1(x_1), answers 10/11/12/13 keyed by
    /// signature: (0,0) -> 10, (1,0) -> 11, (1,1) -> 12, (0,1) -> 13.
    pub fn z1() -> Problem {
        let mut nu = Nu::constant(2, [10].into_iter().collect());
        nu.set(&[0, 0], [10].into_iter().collect());
        nu.set(&[1, 0], [11].into_iter().collect());
        nu.set(&[1, 1], [12].into_iter().collect());
        nu.set(&[0, 1], [13].into_iter().collect());
        Problem::new(
            [1].into_iter().collect(),
            nu,
            vec![
                Expression::predicate("l_0", &[1]),
                Expression::predicate("l_1", &[1]),
            ],
        )
        .unwrap()
    }
}
