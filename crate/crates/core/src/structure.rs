//! Finite presentations of structures, expression sequences, the register
//! semantics that turns a sequence into predicate functions, and problems.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A carrier element. `Base` atoms stand in for ordinary ground elements,
/// `Lifted` atoms are pairs (value, level) produced by lifting, and `Marker`
/// atoms are the auxiliary prefix symbols, distinct from every lifted atom.
///
/// Ordering is Base < Lifted < Marker, then lexicographic on fields, so all
/// carrier iteration and tie-breaking is deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "t", rename_all = "snake_case")]
pub enum Atom {
    Base { v: i64 },
    Lifted { v: i64, n: u32 },
    Marker { i: u32, n: u32 },
}

impl Atom {
    pub fn base(v: i64) -> Self {
        Atom::Base { v }
    }
    pub fn lifted(v: i64, n: u32) -> Self {
        Atom::Lifted { v, n }
    }
    pub fn marker(i: u32, n: u32) -> Self {
        Atom::Marker { i, n }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Base { v } => write!(f, "{v}"),
            Atom::Lifted { v, n } => write!(f, "({v},{n})"),
            Atom::Marker { i, n } => write!(f, "k{i}^({n})"),
        }
    }
}

/// A predicate symbol with a total value table over `carrier^arity`,
/// stored densely in row-major carrier order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateSym {
    pub name: String,
    pub arity: usize,
    pub table: Vec<u8>,
}

/// A function symbol with a total value table over `carrier^arity`; entries
/// are carrier indices. Arity 0 is a constant (table of length 1).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionSym {
    pub name: String,
    pub arity: usize,
    pub table: Vec<u32>,
}

/// Row-major index of an argument tuple into a dense table over a carrier of
/// cardinality `card`.
pub fn table_index(args: &[usize], card: usize) -> usize {
    let mut idx = 0;
    for &a in args {
        debug_assert!(a < card);
        idx = idx * card + a;
    }
    idx
}

/// Decode a row-major index back into an argument tuple.
pub fn decode_index(mut idx: usize, card: usize, arity: usize) -> Vec<usize> {
    let mut out = vec![0; arity];
    for slot in out.iter_mut().rev() {
        *slot = idx % card;
        idx /= card;
    }
    out
}

/// A finite structure: ordered carrier, function symbols, predicate symbols.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureInstance {
    pub carrier: Vec<Atom>,
    pub functions: Vec<FunctionSym>,
    pub predicates: Vec<PredicateSym>,
}

impl StructureInstance {
    pub fn new(
        carrier: Vec<Atom>,
        functions: Vec<FunctionSym>,
        predicates: Vec<PredicateSym>,
    ) -> Result<Self> {
        let s = StructureInstance {
            carrier,
            functions,
            predicates,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.carrier.is_empty() {
            return Err(Error::InvalidStructure("carrier is empty".into()));
        }
        if self.predicates.is_empty() {
            return Err(Error::InvalidStructure(
                "predicate set must be nonempty".into(),
            ));
        }
        if self.carrier.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidStructure(
                "carrier must be strictly sorted".into(),
            ));
        }
        let card = self.carrier.len();
        let mut names = BTreeSet::new();
        for p in &self.predicates {
            if p.arity == 0 {
                return Err(Error::InvalidStructure(format!(
                    "predicate `{}` must have arity >= 1",
                    p.name
                )));
            }
            if p.table.len() != card.pow(p.arity as u32) {
                return Err(Error::InvalidStructure(format!(
                    "predicate `{}` table is not total",
                    p.name
                )));
            }
            if p.table.iter().any(|&v| v > 1) {
                return Err(Error::InvalidStructure(format!(
                    "predicate `{}` has a non-boolean entry",
                    p.name
                )));
            }
            if !names.insert(p.name.clone()) {
                return Err(Error::InvalidStructure(format!(
                    "duplicate symbol name `{}`",
                    p.name
                )));
            }
        }
        for f in &self.functions {
            if f.table.len() != card.pow(f.arity as u32) {
                return Err(Error::InvalidStructure(format!(
                    "function `{}` table is not total",
                    f.name
                )));
            }
            if f.table.iter().any(|&v| v as usize >= card) {
                return Err(Error::InvalidStructure(format!(
                    "function `{}` is not closed over the carrier",
                    f.name
                )));
            }
            if !names.insert(f.name.clone()) {
                return Err(Error::InvalidStructure(format!(
                    "duplicate symbol name `{}`",
                    f.name
                )));
            }
        }
        Ok(())
    }

    pub fn card(&self) -> usize {
        self.carrier.len()
    }

    pub fn atom_index(&self, a: &Atom) -> Result<usize> {
        self.carrier
            .binary_search(a)
            .map_err(|_| Error::AtomNotInCarrier(a.to_string()))
    }

    pub fn predicate(&self, name: &str) -> Result<&PredicateSym> {
        self.predicates
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    pub fn function(&self, name: &str) -> Result<&FunctionSym> {
        self.functions
            .iter()
            .find(|f| f.name == name)
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    pub fn eval_predicate(&self, name: &str, args: &[usize]) -> Result<u8> {
        let p = self.predicate(name)?;
        if args.len() != p.arity {
            return Err(Error::ArityMismatch {
                name: name.to_string(),
                expected: p.arity,
                got: args.len(),
            });
        }
        Ok(p.table[table_index(args, self.card())])
    }

    pub fn eval_function(&self, name: &str, args: &[usize]) -> Result<usize> {
        let f = self.function(name)?;
        if args.len() != f.arity {
            return Err(Error::ArityMismatch {
                name: name.to_string(),
                expected: f.arity,
                got: args.len(),
            });
        }
        Ok(f.table[table_index(args, self.card())] as usize)
    }
}

/// A functional or predicate expression over a structure. Variable indices
/// refer to the ambient variable set X = {x_i : i in omega}.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expression {
    /// x_target <= f(x_args...)
    Functional {
        target: usize,
        name: String,
        args: Vec<usize>,
    },
    /// p(x_args...)
    Predicate { name: String, args: Vec<usize> },
}

impl Expression {
    pub fn functional(target: usize, name: &str, args: &[usize]) -> Self {
        Expression::Functional {
            target,
            name: name.to_string(),
            args: args.to_vec(),
        }
    }

    pub fn predicate(name: &str, args: &[usize]) -> Self {
        Expression::Predicate {
            name: name.to_string(),
            args: args.to_vec(),
        }
    }

    pub fn is_predicate(&self) -> bool {
        matches!(self, Expression::Predicate { .. })
    }

    /// Symbol name this expression contributes to a measured word.
    pub fn symbol(&self) -> &str {
        match self {
            Expression::Functional { name, .. } => name,
            Expression::Predicate { name, .. } => name,
        }
    }

    /// Every variable index occurring in the expression (including the
    /// target of a functional expression).
    pub fn variables(&self) -> Vec<usize> {
        match self {
            Expression::Functional { target, args, .. } => {
                let mut v = vec![*target];
                v.extend_from_slice(args);
                v
            }
            Expression::Predicate { args, .. } => args.clone(),
        }
    }

    fn check(&self, u: &StructureInstance) -> Result<()> {
        match self {
            Expression::Functional { name, args, .. } => {
                let f = u.function(name)?;
                if args.len() != f.arity {
                    return Err(Error::ArityMismatch {
                        name: name.clone(),
                        expected: f.arity,
                        got: args.len(),
                    });
                }
            }
            Expression::Predicate { name, args } => {
                let p = u.predicate(name)?;
                if args.len() != p.arity {
                    return Err(Error::ArityMismatch {
                        name: name.clone(),
                        expected: p.arity,
                        got: args.len(),
                    });
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Functional { target, name, args } => {
                let args: Vec<String> = args.iter().map(|a| format!("x{a}")).collect();
                write!(f, "x{target} <= {name}({})", args.join(","))
            }
            Expression::Predicate { name, args } => {
                let args: Vec<String> = args.iter().map(|a| format!("x{a}")).collect();
                write!(f, "{name}({})", args.join(","))
            }
        }
    }
}

/// The answer map nu: E_2^r -> S(omega), stored as an explicit table over all
/// 2^r signatures. Index convention: bit i of the table index is the value of
/// the (i+1)-st predicate expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nu {
    pub r: usize,
    pub table: Vec<BTreeSet<u64>>,
}

impl Nu {
    /// nu identically equal to a single answer set.
    pub fn constant(r: usize, values: BTreeSet<u64>) -> Self {
        Nu {
            r,
            table: vec![values; 1 << r],
        }
    }

    /// Pairwise disjoint singleton answers: signature with index s maps to
    /// {start + s}.
    pub fn distinct_singletons(r: usize, start: u64) -> Self {
        Nu {
            r,
            table: (0..1u64 << r)
                .map(|s| std::iter::once(start + s).collect())
                .collect(),
        }
    }

    pub fn explicit(r: usize, table: Vec<BTreeSet<u64>>) -> Result<Self> {
        if table.len() != 1 << r {
            return Err(Error::InvalidProblem(format!(
                "nu table must have 2^{r} entries"
            )));
        }
        Ok(Nu { r, table })
    }

    /// Overwrite the entry for one explicit signature.
    pub fn set(&mut self, signature: &[u8], values: BTreeSet<u64>) {
        let idx = Self::signature_index(signature);
        self.table[idx] = values;
    }

    pub fn signature_index(signature: &[u8]) -> usize {
        signature
            .iter()
            .enumerate()
            .map(|(i, &b)| (b as usize) << i)
            .sum()
    }

    pub fn lookup(&self, signature: &[u8]) -> &BTreeSet<u64> {
        &self.table[Self::signature_index(signature)]
    }
}

impl Serialize for Nu {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        // (bitstring, sorted value list) pairs in signature order; bitstring
        // character i is the value of the (i+1)-st predicate expression.
        let rows: Vec<(String, Vec<u64>)> = (0..self.table.len())
            .map(|idx| {
                let bits: String = (0..self.r)
                    .map(|i| if idx >> i & 1 == 1 { '1' } else { '0' })
                    .collect();
                (bits, self.table[idx].iter().copied().collect())
            })
            .collect();
        rows.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Nu {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let rows: Vec<(String, Vec<u64>)> = Vec::deserialize(de)?;
        if rows.is_empty() {
            return Err(D::Error::custom("nu table is empty"));
        }
        let r = rows[0].0.len();
        if rows.len() != 1 << r {
            return Err(D::Error::custom("nu table must have 2^r entries"));
        }
        let mut table = vec![BTreeSet::new(); 1 << r];
        for (bits, values) in rows {
            if bits.len() != r || bits.chars().any(|c| c != '0' && c != '1') {
                return Err(D::Error::custom(format!("bad signature `{bits}`")));
            }
            let sig: Vec<u8> = bits.chars().map(|c| (c == '1') as u8).collect();
            table[Nu::signature_index(&sig)] = values.into_iter().collect();
        }
        Ok(Nu { r, table })
    }
}

/// A problem z = (Y, nu, beta_1..beta_m).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Problem {
    pub input_vars: BTreeSet<usize>,
    pub nu: Nu,
    pub seq: Vec<Expression>,
}

impl Problem {
    pub fn new(input_vars: BTreeSet<usize>, nu: Nu, seq: Vec<Expression>) -> Result<Self> {
        let z = Problem {
            input_vars,
            nu,
            seq,
        };
        z.validate_shape()?;
        Ok(z)
    }

    /// Shape checks that do not need a structure.
    pub fn validate_shape(&self) -> Result<()> {
        if self.input_vars.is_empty() {
            return Err(Error::InvalidProblem("Y must be nonempty".into()));
        }
        if self.seq.is_empty() {
            return Err(Error::InvalidProblem(
                "expression sequence must be nonempty".into(),
            ));
        }
        let r = self.seq.iter().filter(|e| e.is_predicate()).count();
        if r == 0 {
            return Err(Error::InvalidProblem(
                "sequence must contain at least one predicate expression".into(),
            ));
        }
        if r != self.nu.r {
            return Err(Error::InvalidProblem(format!(
                "nu is over E_2^{}, sequence has {r} predicate expressions",
                self.nu.r
            )));
        }
        if self.nu.table.iter().any(|s| s.is_empty()) {
            return Err(Error::InvalidProblem(
                "every value of nu must be a nonempty set".into(),
            ));
        }
        Ok(())
    }

    pub fn validate(&self, u: &StructureInstance) -> Result<()> {
        self.validate_shape()?;
        for e in &self.seq {
            e.check(u)?;
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.input_vars.len()
    }

    pub fn r(&self) -> usize {
        self.nu.r
    }

    /// The minimal s such that all variables of Y and of the sequence lie in
    /// {x_0, ..., x_s}.
    pub fn covering_index(&self) -> usize {
        covering_index(&self.input_vars, &self.seq)
    }
}

pub fn covering_index(input_vars: &BTreeSet<usize>, seq: &[Expression]) -> usize {
    let mut s = *input_vars.iter().max().expect("Y nonempty");
    for e in seq {
        for v in e.variables() {
            s = s.max(v);
        }
    }
    s
}

/// Register snapshots for one input tuple: `snapshots[i][j]` is the carrier
/// index held by register j after the first i steps; `predicate_values` are
/// the alpha values read at the predicate steps, in order.
#[derive(Debug, Clone)]
pub struct RegisterRun {
    pub s: usize,
    pub snapshots: Vec<Vec<usize>>,
    pub predicate_values: Vec<u8>,
}

/// Run the register semantics of a sequence on one input tuple. `assignment`
/// lists carrier indices for the variables of `input_vars` in sorted order.
pub fn run_registers(
    u: &StructureInstance,
    input_vars: &BTreeSet<usize>,
    seq: &[Expression],
    assignment: &[usize],
) -> Result<RegisterRun> {
    if assignment.len() != input_vars.len() {
        return Err(Error::InvalidProblem(format!(
            "assignment covers {} variables, Y has {}",
            assignment.len(),
            input_vars.len()
        )));
    }
    if input_vars.is_empty() {
        return Err(Error::InvalidProblem("Y must be nonempty".into()));
    }
    for e in seq {
        e.check(u)?;
    }
    let values: BTreeMap<usize, usize> = input_vars.iter().copied().zip(assignment.iter().copied()).collect();
    let s = covering_index(input_vars, seq);
    let w = *input_vars.iter().next().expect("Y nonempty");

    // t_{0j} = x_j for x_j in Y, and x_w (minimum-index input) otherwise.
    let mut regs: Vec<usize> = (0..=s).map(|j| *values.get(&j).unwrap_or(&values[&w])).collect();
    let mut snapshots = vec![regs.clone()];
    let mut predicate_values = Vec::new();

    for e in seq {
        match e {
            Expression::Functional { target, name, args } => {
                let argv: Vec<usize> = args.iter().map(|&a| regs[a]).collect();
                regs[*target] = u.eval_function(name, &argv)?;
            }
            Expression::Predicate { name, args } => {
                let argv: Vec<usize> = args.iter().map(|&a| regs[a]).collect();
                predicate_values.push(u.eval_predicate(name, &argv)?);
            }
        }
        snapshots.push(regs.clone());
    }
    Ok(RegisterRun {
        s,
        snapshots,
        predicate_values,
    })
}

/// The tuple (alpha_1(a), ..., alpha_r(a)) for a problem's sequence.
pub fn alpha_values(u: &StructureInstance, z: &Problem, assignment: &[usize]) -> Result<Vec<u8>> {
    let run = run_registers(u, &z.input_vars, &z.seq, assignment)?;
    Ok(run.predicate_values)
}

/// z(a) = nu(alpha_1(a), ..., alpha_r(a)).
pub fn problem_value(
    u: &StructureInstance,
    z: &Problem,
    assignment: &[usize],
) -> Result<BTreeSet<u64>> {
    let alpha = alpha_values(u, z, assignment)?;
    Ok(z.nu.lookup(&alpha).clone())
}

/// Extend z by one fresh input variable x_{s+1}; the answer function ignores
/// the new coordinate.
pub fn lift_problem(z: &Problem) -> Problem {
    let s = z.covering_index();
    let mut input_vars = z.input_vars.clone();
    input_vars.insert(s + 1);
    Problem {
        input_vars,
        nu: z.nu.clone(),
        seq: z.seq.clone(),
    }
}

/// Iterate over all assignments of carrier indices to an n-variable tuple.
pub fn all_tuples(card: usize, n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..card.pow(n as u32)).map(move |idx| decode_index(idx, card, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::fixtures;

    #[test]
    fn predicate_steps_leave_registers_unchanged() {
        let s1 = fixtures::s1();
        let y: BTreeSet<usize> = [1].into_iter().collect();
        let seq = vec![Expression::predicate("l_0", &[1])];
        let a2 = s1.atom_index(&Atom::base(2)).unwrap();
        let run = run_registers(&s1, &y, &seq, &[a2]).unwrap();
        assert_eq!(run.snapshots[0], run.snapshots[1]);
        assert_eq!(run.predicate_values, vec![1]);
    }

    #[test]
    fn functional_step_overwrites_exactly_one_register() {
        // succ3(j) = (j+1) mod 3 and p_pos(j) = [j > 0] on carrier {0,1,2}.
        let carrier: Vec<Atom> = (0..3).map(Atom::base).collect();
        let succ3 = FunctionSym {
            name: "succ3".into(),
            arity: 1,
            table: vec![1, 2, 0],
        };
        let p_pos = PredicateSym {
            name: "p_pos".into(),
            arity: 1,
            table: vec![0, 1, 1],
        };
        let u = StructureInstance::new(carrier, vec![succ3], vec![p_pos]).unwrap();
        let y: BTreeSet<usize> = [1].into_iter().collect();
        let seq = vec![
            Expression::functional(2, "succ3", &[1]),
            Expression::predicate("p_pos", &[2]),
        ];
        let run = run_registers(&u, &y, &seq, &[2]).unwrap();
        // After step 1, register 2 holds succ3(2) = 0; the predicate reads 0.
        assert_eq!(run.snapshots[1][2], 0);
        assert_eq!(run.snapshots[1][1], 2);
        assert_eq!(run.predicate_values, vec![0]);
    }

    #[test]
    fn untouched_registers_initialize_to_minimum_input() {
        // Y = {x_1, x_3}, the sequence reads x_2 which is not in Y, so
        // register 2 starts at the value of x_1.
        let s1 = fixtures::s1();
        let y: BTreeSet<usize> = [1, 3].into_iter().collect();
        let seq = vec![Expression::predicate("l_0", &[2])];
        let run = run_registers(&s1, &y, &seq, &[1, 2]).unwrap();
        // l_0 reads the value of x_1 = carrier index 1 (atom 1), l_0(1) = 1.
        assert_eq!(run.predicate_values, vec![1]);
    }

    #[test]
    fn z1_alpha_and_values() {
        let s1 = fixtures::s1();
        let z1 = fixtures::z1();
        assert_eq!(alpha_values(&s1, &z1, &[2]).unwrap(), vec![1, 1]);
        assert_eq!(alpha_values(&s1, &z1, &[0]).unwrap(), vec![0, 0]);
        let expect = |v: u64| std::iter::once(v).collect::<BTreeSet<u64>>();
        assert_eq!(problem_value(&s1, &z1, &[3]).unwrap(), expect(12));
        assert_eq!(problem_value(&s1, &z1, &[1]).unwrap(), expect(11));
        assert_eq!(problem_value(&s1, &z1, &[0]).unwrap(), expect(10));
    }

    #[test]
    fn constant_nu_is_constant() {
        let s1 = fixtures::s1();
        let z = Problem::new(
            [1].into_iter().collect(),
            Nu::constant(1, [0].into_iter().collect()),
            vec![Expression::predicate("l_1", &[1])],
        )
        .unwrap();
        for a in 0..4 {
            assert_eq!(
                problem_value(&s1, &z, &[a]).unwrap(),
                [0].into_iter().collect()
            );
        }
    }

    #[test]
    fn lift_preserves_problem_value() {
        let s1 = fixtures::s1();
        let z1 = fixtures::z1();
        let lifted = lift_problem(&z1);
        assert_eq!(
            lifted.input_vars,
            [1, 2].into_iter().collect::<BTreeSet<usize>>()
        );
        for a in 0..4 {
            let base = problem_value(&s1, &z1, &[a]).unwrap();
            for b in 0..4 {
                assert_eq!(problem_value(&s1, &lifted, &[a, b]).unwrap(), base);
            }
        }
        // Lifting twice adds fresh variables with strictly increasing indices.
        let twice = lift_problem(&lifted);
        assert_eq!(
            twice.input_vars,
            [1, 2, 3].into_iter().collect::<BTreeSet<usize>>()
        );
    }

    #[test]
    fn nu_round_trips_through_json() {
        let z1 = fixtures::z1();
        let json = serde_json::to_string(&z1).unwrap();
        let back: Problem = serde_json::from_str(&json).unwrap();
        assert_eq!(back, z1);
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }
}
