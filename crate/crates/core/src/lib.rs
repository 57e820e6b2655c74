//! Skolem function synthesis for factored propositional formulas
//! `∃X. f¹(X,Y) ∧ … ∧ fʳ(X,Y)`.
//!
//! Two engines are provided: a monolithic cofactor-composition baseline
//! ([`skolem::mono_skolem`]) and a counterexample-guided abstraction
//! refinement engine ([`skolem::cegar_skolem`]) that works factor by factor
//! and consults a SAT oracle for counterexamples. [`verify`] holds the
//! independent checks used to certify their output.

pub mod aig;
mod assignment;
pub mod bench;
pub mod frontend;
pub mod gen;
pub mod sat;
pub mod skolem;
pub mod verify;

pub use aig::{AigManager, NodeRef, VarId};
pub use assignment::Assignment;
pub use frontend::{FactoredSpec, ParseError};
