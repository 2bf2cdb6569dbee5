//! Finite universal algebra and constraint satisfaction toolkit.
//!
//! The crate provides:
//!
//! * a data model for finite operations, relations, algebras and
//!   constraint languages ([`model`]);
//! * subalgebra generation, pp-formula evaluation and polymorphism
//!   search ([`closure`]);
//! * congruence enumeration and detectors for binary absorbing,
//!   central, projective and PC subuniverses plus p-affine quotients
//!   ([`structure`]);
//! * WNU-blocker enumeration and the three WNU-existence tests
//!   ([`wnu`]);
//! * the cycle-consistency solver (`CheckCC`/`Solve`) with a
//!   brute-force oracle ([`solver`]);
//! * core reduction, constants restoration, the NAE hardness gadget
//!   and the linear counterexample generator ([`transform`]).
//!
//! Everything operates on explicit tables over domains `0..k-1`, sized
//! for desk-scale experiments (`k <= 5` or so). Decision procedures
//! that rely on a generation budget report three-valued outcomes
//! instead of guessing when the budget runs out.

pub mod cli;
pub mod closure;
pub mod model;
pub mod report;
pub mod solver;
pub mod structure;
pub mod transform;
pub mod wnu;

pub use model::{Algebra, ConstraintLanguage, Domain, Operation, PPFormula, Relation};
