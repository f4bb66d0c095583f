//! Exact minimal tree complexities over a declared attribute pool, for
//! structures with no function symbols, plus an independent brute-force
//! oracle used to cross-check the solvers.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::Measure;
use crate::structure::{
    all_tuples, problem_value, run_registers, Expression, Problem, StructureInstance,
};
use crate::tree::{ComputationTree, Edge, NodeKind, TreeNode};

/// One attribute: a predicate expression over the input variables, its
/// weight under the measure, and its 0/1 column over carrier^n in tuple
/// order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Attribute {
    pub expr: Expression,
    pub weight: u64,
    pub column: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttributePool {
    pub attributes: Vec<Attribute>,
}

impl AttributePool {
    /// Evaluate each predicate expression on every input tuple and attach
    /// the measure's weight for its symbol.
    pub fn build(
        u: &StructureInstance,
        input_vars: &BTreeSet<usize>,
        exprs: &[Expression],
        psi: &Measure,
    ) -> Result<Self> {
        if exprs.is_empty() {
            return Err(Error::EmptyPool);
        }
        let mut seen = BTreeSet::new();
        let n = input_vars.len();
        let mut attributes = Vec::with_capacity(exprs.len());
        for e in exprs {
            if !e.is_predicate() {
                return Err(Error::InvalidProblem(format!(
                    "pool attribute `{e}` is not a predicate expression"
                )));
            }
            if !seen.insert(e.clone()) {
                return Err(Error::InvalidProblem(format!(
                    "duplicate pool attribute `{e}`"
                )));
            }
            let weight = psi.weight(e.symbol())?;
            let mut column = Vec::with_capacity(u.card().pow(n as u32));
            for tuple in all_tuples(u.card(), n) {
                let run = run_registers(u, input_vars, std::slice::from_ref(e), &tuple)?;
                column.push(run.predicate_values[0]);
            }
            attributes.push(Attribute {
                expr: e.clone(),
                weight,
                column,
            });
        }
        Ok(AttributePool { attributes })
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    fn contains(&self, e: &Expression) -> bool {
        self.attributes.iter().any(|a| &a.expr == e)
    }
}

/// One class of input tuples sharing a full-pool signature. Members are
/// tuple indices in carrier-order; classes are ordered by smallest member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientClass {
    pub signature: Vec<u8>,
    pub members: Vec<usize>,
}

/// Partition carrier^n by full-pool signature.
pub fn quotient_classes(
    u: &StructureInstance,
    input_vars: &BTreeSet<usize>,
    pool: &AttributePool,
) -> Result<Vec<QuotientClass>> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    let n_tuples = u.card().pow(input_vars.len() as u32);
    let mut by_sig: HashMap<Vec<u8>, Vec<usize>> = HashMap::new();
    let mut order: Vec<Vec<u8>> = Vec::new();
    for t in 0..n_tuples {
        let sig: Vec<u8> = pool.attributes.iter().map(|a| a.column[t]).collect();
        by_sig
            .entry(sig.clone())
            .or_insert_with(|| {
                order.push(sig);
                Vec::new()
            })
            .push(t);
    }
    Ok(order
        .into_iter()
        .map(|sig| {
            let members = by_sig.remove(&sig).expect("inserted above");
            QuotientClass {
                signature: sig,
                members,
            }
        })
        .collect())
}

/// Shared preprocessing for both solvers: quotient classes together with
/// each class's common answer set.
struct Instance {
    classes: Vec<QuotientClass>,
    /// Intersection of z(a) over the class's members; nonempty by the
    /// sufficiency check.
    answers: Vec<BTreeSet<u64>>,
}

fn prepare(
    u: &StructureInstance,
    z: &Problem,
    pool: &AttributePool,
    psi: &Measure,
) -> Result<Instance> {
    if let Some(f) = u.functions.first() {
        return Err(Error::NotAttributeStructure(f.name.clone()));
    }
    z.validate(u)?;
    psi.validate()?;
    for e in z.seq.iter().filter(|e| e.is_predicate()) {
        if !pool.contains(e) {
            return Err(Error::InvalidProblem(format!(
                "pool does not contain the problem's expression `{e}`"
            )));
        }
    }
    let classes = quotient_classes(u, &z.input_vars, pool)?;
    if classes.len() > 64 {
        return Err(Error::InvalidProblem(format!(
            "{} quotient classes exceed the solver limit of 64",
            classes.len()
        )));
    }
    let values: Vec<BTreeSet<u64>> = all_tuples(u.card(), z.n())
        .map(|tuple| problem_value(u, z, &tuple))
        .collect::<Result<_>>()?;
    let mut answers = Vec::with_capacity(classes.len());
    for (ci, class) in classes.iter().enumerate() {
        let mut common = values[class.members[0]].clone();
        for &t in &class.members[1..] {
            common = common.intersection(&values[t]).copied().collect();
        }
        if common.is_empty() {
            return Err(Error::InsufficientPool { class: ci });
        }
        answers.push(common);
    }
    Ok(Instance { classes, answers })
}

fn class_attr_value(inst: &Instance, pool: &AttributePool, ci: usize, ai: usize) -> u8 {
    pool.attributes[ai].column[inst.classes[ci].members[0]]
}

fn common_answer(inst: &Instance, state: u64) -> Option<u64> {
    let mut iter = (0..inst.classes.len()).filter(|ci| state >> ci & 1 == 1);
    let first = iter.next()?;
    let mut common = inst.answers[first].clone();
    for ci in iter {
        common = common.intersection(&inst.answers[ci]).copied().collect();
        if common.is_empty() {
            return None;
        }
    }
    common.first().copied()
}

/// Minimal deterministic tree complexity relative to the pool, with an
/// optimal tree. Min-max dynamic program over sets of quotient classes:
/// a set with a common answer costs 0; otherwise the cheapest attribute
/// split, charging the attribute's weight plus the worse branch.
pub fn psi_d_exact(
    u: &StructureInstance,
    z: &Problem,
    pool: &AttributePool,
    psi: &Measure,
) -> Result<(u64, ComputationTree)> {
    let inst = prepare(u, z, pool, psi)?;
    let full: u64 = if inst.classes.len() == 64 {
        u64::MAX
    } else {
        (1 << inst.classes.len()) - 1
    };
    let mut memo: HashMap<u64, (u64, Option<usize>)> = HashMap::new();
    let value = dp_cost(&inst, pool, full, &mut memo);
    let mut nodes = vec![TreeNode {
        kind: NodeKind::Root,
        children: Vec::new(),
    }];
    dp_tree(&inst, pool, full, &memo, &mut nodes, 0, None);
    let tree = ComputationTree::new(z.input_vars.clone(), nodes)?;
    Ok((value, tree))
}

fn dp_cost(
    inst: &Instance,
    pool: &AttributePool,
    state: u64,
    memo: &mut HashMap<u64, (u64, Option<usize>)>,
) -> u64 {
    if let Some(&(v, _)) = memo.get(&state) {
        return v;
    }
    if common_answer(inst, state).is_some() {
        memo.insert(state, (0, None));
        return 0;
    }
    let mut best = u64::MAX;
    let mut best_attr = None;
    for ai in 0..pool.len() {
        let mut s0 = 0u64;
        let mut s1 = 0u64;
        for ci in 0..inst.classes.len() {
            if state >> ci & 1 == 1 {
                if class_attr_value(inst, pool, ci, ai) == 0 {
                    s0 |= 1 << ci;
                } else {
                    s1 |= 1 << ci;
                }
            }
        }
        if s0 == 0 || s1 == 0 {
            continue;
        }
        let w = pool.attributes[ai].weight;
        if w >= best {
            continue;
        }
        let cost = w + dp_cost(inst, pool, s0, memo).max(dp_cost(inst, pool, s1, memo));
        if cost < best {
            best = cost;
            best_attr = Some(ai);
        }
    }
    debug_assert!(best < u64::MAX, "distinct classes are always separable");
    memo.insert(state, (best, best_attr));
    best
}

fn dp_tree(
    inst: &Instance,
    pool: &AttributePool,
    state: u64,
    memo: &HashMap<u64, (u64, Option<usize>)>,
    nodes: &mut Vec<TreeNode>,
    parent: usize,
    label: Option<u8>,
) {
    let id = nodes.len();
    match memo[&state] {
        (0, None) => {
            let answer = common_answer(inst, state).expect("zero-cost state");
            nodes.push(TreeNode {
                kind: NodeKind::Terminal { label: answer },
                children: Vec::new(),
            });
            nodes[parent].children.push(Edge { label, to: id });
        }
        (_, Some(ai)) => {
            nodes.push(TreeNode {
                kind: NodeKind::Predicate {
                    expr: pool.attributes[ai].expr.clone(),
                },
                children: Vec::new(),
            });
            nodes[parent].children.push(Edge { label, to: id });
            let mut s0 = 0u64;
            let mut s1 = 0u64;
            for ci in 0..inst.classes.len() {
                if state >> ci & 1 == 1 {
                    if class_attr_value(inst, pool, ci, ai) == 0 {
                        s0 |= 1 << ci;
                    } else {
                        s1 |= 1 << ci;
                    }
                }
            }
            dp_tree(inst, pool, s0, memo, nodes, id, Some(0));
            dp_tree(inst, pool, s1, memo, nodes, id, Some(1));
        }
        _ => unreachable!("memoized state has cost 0 or a splitting attribute"),
    }
}

/// One certificate: attribute/value literals whose satisfying classes share
/// a common answer.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Certificate {
    pub literals: Vec<(usize, u8)>,
    pub cost: u64,
    pub answer: u64,
}

/// Minimal nondeterministic tree complexity relative to the pool, with a
/// witness tree: one root-attached path per distinct minimal certificate.
/// The value is the maximum over quotient classes of the cheapest
/// certificate the class satisfies.
pub fn psi_a_exact(
    u: &StructureInstance,
    z: &Problem,
    pool: &AttributePool,
    psi: &Measure,
) -> Result<(u64, ComputationTree)> {
    let inst = prepare(u, z, pool, psi)?;
    // Attribute order for the search: cheap attributes first, then by id,
    // so returned certificates are independent of thread schedule.
    let mut attr_order: Vec<usize> = (0..pool.len()).collect();
    attr_order.sort_by_key(|&ai| (pool.attributes[ai].weight, ai));

    let certs: Vec<Certificate> = (0..inst.classes.len())
        .into_par_iter()
        .map(|ci| min_certificate(&inst, pool, &attr_order, ci))
        .collect();

    let value = certs.iter().map(|c| c.cost).max().unwrap_or(0);

    let mut distinct: Vec<&Certificate> = Vec::new();
    for c in &certs {
        if !distinct.contains(&c) {
            distinct.push(c);
        }
    }
    let mut nodes = vec![TreeNode {
        kind: NodeKind::Root,
        children: Vec::new(),
    }];
    for cert in &distinct {
        let mut parent = 0;
        let mut label = None;
        for &(ai, v) in &cert.literals {
            let id = nodes.len();
            nodes.push(TreeNode {
                kind: NodeKind::Predicate {
                    expr: pool.attributes[ai].expr.clone(),
                },
                children: Vec::new(),
            });
            nodes[parent].children.push(Edge { label, to: id });
            parent = id;
            label = Some(v);
        }
        let id = nodes.len();
        nodes.push(TreeNode {
            kind: NodeKind::Terminal {
                label: cert.answer,
            },
            children: Vec::new(),
        });
        nodes[parent].children.push(Edge { label, to: id });
    }
    let tree = ComputationTree::new(z.input_vars.clone(), nodes)?;
    Ok((value, tree))
}

/// Cheapest valid certificate satisfied by class `ci`. Literal values are
/// forced by the class's signature, so the search is over attribute
/// subsets; validity is monotone under adding literals, which makes plain
/// branch-and-bound exact.
fn min_certificate(
    inst: &Instance,
    pool: &AttributePool,
    attr_order: &[usize],
    ci: usize,
) -> Certificate {
    let mut best: Option<Certificate> = None;
    let mut chosen: Vec<usize> = Vec::new();
    search_certificate(inst, pool, attr_order, ci, 0, 0, &mut chosen, &mut best);
    best.expect("the full signature is always a valid certificate")
}

fn certificate_answer(inst: &Instance, ci: usize, chosen: &[usize], pool: &AttributePool) -> Option<u64> {
    let mut satisfying = 0u64;
    for cj in 0..inst.classes.len() {
        if chosen
            .iter()
            .all(|&ai| class_attr_value(inst, pool, cj, ai) == class_attr_value(inst, pool, ci, ai))
        {
            satisfying |= 1 << cj;
        }
    }
    common_answer(inst, satisfying)
}

fn search_certificate(
    inst: &Instance,
    pool: &AttributePool,
    attr_order: &[usize],
    ci: usize,
    next: usize,
    cost: u64,
    chosen: &mut Vec<usize>,
    best: &mut Option<Certificate>,
) {
    if best.as_ref().is_some_and(|b| cost >= b.cost) {
        return;
    }
    if let Some(answer) = certificate_answer(inst, ci, chosen, pool) {
        let mut literals: Vec<(usize, u8)> = chosen
            .iter()
            .map(|&ai| (ai, class_attr_value(inst, pool, ci, ai)))
            .collect();
        literals.sort();
        *best = Some(Certificate {
            literals,
            cost,
            answer,
        });
        return;
    }
    for i in next..attr_order.len() {
        let ai = attr_order[i];
        let w = pool.attributes[ai].weight;
        if let Some(b) = best {
            if cost + w >= b.cost {
                // attr_order is sorted by weight, so later ones cost no less.
                break;
            }
        }
        chosen.push(ai);
        search_certificate(inst, pool, attr_order, ci, i + 1, cost + w, chosen, best);
        chosen.pop();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Deterministic,
    Nondeterministic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BruteForceOutcome {
    Value(u64),
    NoTreeWithinBudget,
}

/// Independent oracle: exhaustive search over raw input tuples with no
/// quotient construction and no memoization. Deterministic mode enumerates
/// attribute splits recursively; nondeterministic mode enumerates literal
/// sets per tuple and takes the worst tuple's cheapest valid set.
pub fn brute_force_psi(
    u: &StructureInstance,
    z: &Problem,
    pool: &AttributePool,
    psi: &Measure,
    budget: u64,
    mode: SearchMode,
) -> Result<BruteForceOutcome> {
    if let Some(f) = u.functions.first() {
        return Err(Error::NotAttributeStructure(f.name.clone()));
    }
    z.validate(u)?;
    psi.validate()?;
    let usable: Vec<usize> = (0..pool.len())
        .filter(|&ai| pool.attributes[ai].weight <= budget)
        .collect();
    if usable.len() > 16 {
        return Err(Error::BudgetTooLargeForEnumeration {
            budget,
            pool: usable.len(),
        });
    }
    let n_tuples = u.card().pow(z.n() as u32);
    let values: Vec<BTreeSet<u64>> = all_tuples(u.card(), z.n())
        .map(|tuple| problem_value(u, z, &tuple))
        .collect::<Result<_>>()?;
    match mode {
        SearchMode::Deterministic => {
            let all: Vec<usize> = (0..n_tuples).collect();
            match det_search(pool, &values, &usable, &all, 0, budget) {
                Some(v) => Ok(BruteForceOutcome::Value(v)),
                None => Ok(BruteForceOutcome::NoTreeWithinBudget),
            }
        }
        SearchMode::Nondeterministic => {
            let mut worst = 0u64;
            for t in 0..n_tuples {
                match cheapest_literal_set(pool, &values, &usable, t, budget) {
                    Some(c) => worst = worst.max(c),
                    None => return Ok(BruteForceOutcome::NoTreeWithinBudget),
                }
            }
            Ok(BruteForceOutcome::Value(worst))
        }
    }
}

fn det_search(
    pool: &AttributePool,
    values: &[BTreeSet<u64>],
    usable: &[usize],
    tuples: &[usize],
    used_mask: u32,
    budget: u64,
) -> Option<u64> {
    let mut common = values[tuples[0]].clone();
    for &t in &tuples[1..] {
        common = common.intersection(&values[t]).copied().collect();
        if common.is_empty() {
            break;
        }
    }
    if !common.is_empty() {
        return Some(0);
    }
    let mut best: Option<u64> = None;
    for (i, &ai) in usable.iter().enumerate() {
        if used_mask >> i & 1 == 1 {
            continue;
        }
        let w = pool.attributes[ai].weight;
        if w > budget {
            continue;
        }
        let (zeros, ones): (Vec<usize>, Vec<usize>) = tuples
            .iter()
            .partition(|&&t| pool.attributes[ai].column[t] == 0);
        if zeros.is_empty() || ones.is_empty() {
            continue;
        }
        let sub = budget - w;
        let c0 = det_search(pool, values, usable, &zeros, used_mask | 1 << i, sub);
        let c1 = det_search(pool, values, usable, &ones, used_mask | 1 << i, sub);
        if let (Some(c0), Some(c1)) = (c0, c1) {
            let cost = w + c0.max(c1);
            if best.map_or(true, |b| cost < b) {
                best = Some(cost);
            }
        }
    }
    best
}

fn cheapest_literal_set(
    pool: &AttributePool,
    values: &[BTreeSet<u64>],
    usable: &[usize],
    t: usize,
    budget: u64,
) -> Option<u64> {
    let mut best: Option<u64> = None;
    for mask in 0u32..1 << usable.len() {
        let mut cost = 0;
        for (i, &ai) in usable.iter().enumerate() {
            if mask >> i & 1 == 1 {
                cost += pool.attributes[ai].weight;
            }
        }
        if cost > budget || best.is_some_and(|b| cost >= b) {
            continue;
        }
        // Tuples satisfying every chosen literal at t's values.
        let mut common: Option<BTreeSet<u64>> = None;
        for s in 0..values.len() {
            let satisfies = usable.iter().enumerate().all(|(i, &ai)| {
                mask >> i & 1 == 0 || pool.attributes[ai].column[s] == pool.attributes[ai].column[t]
            });
            if satisfies {
                common = Some(match common {
                    None => values[s].clone(),
                    Some(c) => c.intersection(&values[s]).copied().collect(),
                });
                if common.as_ref().is_some_and(|c| c.is_empty()) {
                    break;
                }
            }
        }
        if common.is_some_and(|c| !c.is_empty()) {
            best = Some(cost);
        }
    }
    best
}
