//! Exact upper/lower bound profiles relating two complexity parameters over
//! an enumerated finite family of problems.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{psi_i, Measure};
use crate::solver::{psi_a_exact, psi_d_exact, AttributePool};
use crate::structure::{Problem, StructureInstance};

/// The three complexity parameters a profile can relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    I,
    D,
    A,
}

impl Param {
    pub const ALL: [Param; 3] = [Param::I, Param::D, Param::A];

    pub fn letter(self) -> char {
        match self {
            Param::I => 'i',
            Param::D => 'd',
            Param::A => 'a',
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ProfileValue {
    Defined(u64),
    Infinity,
    Undefined,
}

/// Exact values of one bound function on {0..M}. `values[m]` is the value
/// at argument m.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FnProfile {
    pub upper: bool,
    pub b: Param,
    pub c: Param,
    pub family: String,
    pub values: Vec<ProfileValue>,
}

impl FnProfile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("m,value\n");
        for (m, v) in self.values.iter().enumerate() {
            let cell = match v {
                ProfileValue::Defined(x) => x.to_string(),
                ProfileValue::Infinity => "INF".to_string(),
                ProfileValue::Undefined => "UNDEF".to_string(),
            };
            out.push_str(&format!("{m},{cell}\n"));
        }
        out
    }
}

/// An enumerated universe of problems over one structure/pool/measure,
/// together with the costs up to which the enumeration is complete and any
/// cells known to be infinite beyond the enumeration.
#[derive(Debug, Clone)]
pub struct Family {
    pub name: String,
    pub structure: StructureInstance,
    pub pool: AttributePool,
    pub measure: Measure,
    pub problems: Vec<Problem>,
    /// Per parameter, the largest m for which every problem in the universe
    /// with that parameter's cost <= m is present in `problems`.
    pub covered: BTreeMap<Param, u64>,
    /// (b, c, from_m): the upper bound of b against c is infinite for every
    /// m >= from_m. A family-level fact (e.g. unbounded description padding
    /// at fixed tree cost), not computable from the finite enumeration.
    pub infinity: Vec<(Param, Param, u64)>,
}

impl Family {
    pub fn covered_cost(&self, c: Param) -> u64 {
        self.covered.get(&c).copied().unwrap_or(0)
    }
}

/// psi^b, psi^d, psi^a of every problem in a family, in family order.
pub fn family_costs(family: &Family) -> Result<Vec<BTreeMap<Param, u64>>> {
    family
        .problems
        .iter()
        .map(|z| {
            let mut m = BTreeMap::new();
            m.insert(Param::I, psi_i(&family.measure, z)?);
            m.insert(
                Param::D,
                psi_d_exact(&family.structure, z, &family.pool, &family.measure)?.0,
            );
            m.insert(
                Param::A,
                psi_a_exact(&family.structure, z, &family.pool, &family.measure)?.0,
            );
            Ok(m)
        })
        .collect()
}

fn check_window(family: &Family, c: Param, m_max: u64) -> Result<()> {
    let covered = family.covered_cost(c);
    if m_max > covered {
        return Err(Error::FamilyNotCostClosed {
            family: family.name.clone(),
            requested: m_max,
            covered,
        });
    }
    Ok(())
}

/// Unimprovable upper bound: for each m <= M, the maximum of psi^b over
/// enumerated problems with psi^c <= m; Undefined where no problem
/// qualifies; Infinity where the family flags the cell unbounded.
pub fn u_profile(family: &Family, b: Param, c: Param, m_max: u64) -> Result<FnProfile> {
    check_window(family, c, m_max)?;
    let costs = family_costs(family)?;
    let inf_from = family
        .infinity
        .iter()
        .find(|&&(fb, fc, _)| fb == b && fc == c)
        .map(|&(_, _, from)| from);
    let values = (0..=m_max)
        .map(|m| {
            if inf_from.is_some_and(|from| m >= from) {
                return ProfileValue::Infinity;
            }
            costs
                .iter()
                .filter(|cost| cost[&c] <= m)
                .map(|cost| cost[&b])
                .max()
                .map_or(ProfileValue::Undefined, ProfileValue::Defined)
        })
        .collect();
    Ok(FnProfile {
        upper: true,
        b,
        c,
        family: family.name.clone(),
        values,
    })
}

/// Unimprovable lower bound: for each m <= M, the minimum of psi^b over
/// enumerated problems with psi^c >= m; Undefined where the family proves
/// no such problem exists in its universe.
pub fn l_profile(family: &Family, b: Param, c: Param, m_max: u64) -> Result<FnProfile> {
    check_window(family, c, m_max)?;
    let costs = family_costs(family)?;
    let values = (0..=m_max)
        .map(|m| {
            costs
                .iter()
                .filter(|cost| cost[&c] >= m)
                .map(|cost| cost[&b])
                .min()
                .map_or(ProfileValue::Undefined, ProfileValue::Defined)
        })
        .collect();
    Ok(FnProfile {
        upper: false,
        b,
        c,
        family: family.name.clone(),
        values,
    })
}
