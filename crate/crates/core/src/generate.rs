//! Seeded random structures and problems for property tests. All sampling
//! is deterministic given the seed.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::measure::Measure;
use crate::solver::AttributePool;
use crate::structure::{
    Atom, Expression, FunctionSym, Nu, PredicateSym, Problem, StructureInstance,
};
use crate::zoo;

#[derive(Debug, Clone, Copy)]
pub struct GenParams {
    pub max_carrier: usize,
    pub max_predicates: usize,
    pub max_functions: usize,
    pub max_arity: usize,
    pub max_vars: usize,
    pub max_r: usize,
    pub max_functional_steps: usize,
    pub max_weight: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            max_carrier: 6,
            max_predicates: 5,
            max_functions: 0,
            max_arity: 2,
            max_vars: 2,
            max_r: 3,
            max_functional_steps: 2,
            max_weight: 3,
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gen_structure(rng: &mut ChaCha8Rng, p: &GenParams) -> StructureInstance {
    let card = rng.gen_range(2..=p.max_carrier.max(2));
    let carrier: Vec<Atom> = (0..card as i64).map(Atom::base).collect();
    let n_preds = rng.gen_range(1..=p.max_predicates.max(1));
    let predicates = (0..n_preds)
        .map(|i| {
            let arity = rng.gen_range(1..=p.max_arity.max(1));
            PredicateSym {
                name: format!("p_{i}"),
                arity,
                table: (0..card.pow(arity as u32)).map(|_| rng.gen_range(0..=1)).collect(),
            }
        })
        .collect();
    let functions = (0..p.max_functions.min(rng.gen_range(0..=p.max_functions.max(1))))
        .map(|i| {
            let arity = rng.gen_range(0..=p.max_arity.max(1));
            FunctionSym {
                name: format!("f_{i}"),
                arity,
                table: (0..card.pow(arity as u32))
                    .map(|_| rng.gen_range(0..card as u32))
                    .collect(),
            }
        })
        .collect();
    StructureInstance::new(carrier, functions, predicates).expect("generated tables are total")
}

/// A positive-weight measure over all of the structure's symbols.
pub fn gen_measure(rng: &mut ChaCha8Rng, u: &StructureInstance, p: &GenParams) -> Measure {
    let names = u
        .predicates
        .iter()
        .map(|q| q.name.clone())
        .chain(u.functions.iter().map(|f| f.name.clone()));
    Measure::weighted(names.map(|n| (n, rng.gen_range(1..=p.max_weight.max(1)))))
}

/// A random problem over the structure: input variables x_1..x_n, a
/// sequence interleaving functional steps (when functions exist) with 1..=r
/// predicate expressions, and either distinct-singleton or random nonempty
/// answer sets.
pub fn gen_problem(rng: &mut ChaCha8Rng, u: &StructureInstance, p: &GenParams) -> Problem {
    let n = rng.gen_range(1..=p.max_vars.max(1));
    let input_vars: BTreeSet<usize> = (1..=n).collect();
    // Variables the sequence may mention: the inputs plus one scratch slot
    // (reads of the scratch slot before a write see the least input).
    let vars: Vec<usize> = (1..=n + 1).collect();
    let r = rng.gen_range(1..=p.max_r.max(1));
    let mut seq = Vec::new();
    let mut predicates_left = r;
    let mut functional_left = if u.functions.is_empty() {
        0
    } else {
        rng.gen_range(0..=p.max_functional_steps)
    };
    while predicates_left > 0 || functional_left > 0 {
        let pick_fn = functional_left > 0 && (predicates_left == 0 || rng.gen_bool(0.4));
        if pick_fn {
            let f = &u.functions[rng.gen_range(0..u.functions.len())];
            let args: Vec<usize> = (0..f.arity)
                .map(|_| vars[rng.gen_range(0..vars.len())])
                .collect();
            let target = vars[rng.gen_range(0..vars.len())];
            seq.push(Expression::functional(target, &f.name, &args));
            functional_left -= 1;
        } else {
            let q = &u.predicates[rng.gen_range(0..u.predicates.len())];
            let args: Vec<usize> = (0..q.arity)
                .map(|_| vars[rng.gen_range(0..vars.len())])
                .collect();
            seq.push(Expression::predicate(&q.name, &args));
            predicates_left -= 1;
        }
    }
    let nu = if rng.gen_bool(0.5) {
        Nu::distinct_singletons(r, 0)
    } else {
        let table = (0..1usize << r)
            .map(|_| {
                let mut s = BTreeSet::new();
                s.insert(rng.gen_range(0..4u64));
                if rng.gen_bool(0.4) {
                    s.insert(rng.gen_range(0..4u64));
                }
                s
            })
            .collect();
        Nu::explicit(r, table).expect("table sized to r")
    };
    Problem::new(input_vars, nu, seq).expect("generated problem is well-formed")
}

/// A full solver instance with no function symbols: structure, problem,
/// the pool of the problem's own predicate expressions padded with extra
/// pool attributes, and a measure covering everything.
pub fn gen_attribute_instance(
    seed: u64,
    p: &GenParams,
) -> (StructureInstance, Problem, AttributePool, Measure) {
    let mut rng = rng(seed);
    let p = GenParams {
        max_functions: 0,
        ..*p
    };
    let u = gen_structure(&mut rng, &p);
    let psi = gen_measure(&mut rng, &u, &p);
    let z = gen_problem(&mut rng, &u, &p);
    // Pool: the problem's own expressions plus every unary placement, capped.
    let mut exprs: Vec<Expression> = z.seq.iter().filter(|e| e.is_predicate()).cloned().collect();
    exprs.sort();
    exprs.dedup();
    for e in zoo::pool_expressions(&u, &z.input_vars) {
        if exprs.len() >= 5 {
            break;
        }
        if !exprs.contains(&e) {
            exprs.push(e);
        }
    }
    let pool = AttributePool::build(&u, &z.input_vars, &exprs, &psi)
        .expect("generated pool builds");
    (u, z, pool, psi)
}
