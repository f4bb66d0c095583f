//! Exact analysis of computation trees over finite-presentation structures.
//!
//! The crate evaluates problems given by expression sequences over a finite
//! structure, builds and checks computation trees (deterministic and
//! nondeterministic), computes the three complexity parameters of a problem
//! exactly at desk scale, reconstructs the witness structure families, and
//! verifies the type tables, their lattice, and the duality map.

pub mod error;
pub mod generate;
pub mod measure;
pub mod profile;
pub mod solver;
pub mod structure;
pub mod tree;
pub mod typelab;
pub mod zoo;

pub use error::Error;
pub use measure::Measure;
pub use structure::{Atom, Expression, FunctionSym, Nu, PredicateSym, Problem, StructureInstance};
pub use tree::ComputationTree;
