//! LPO termination proving through partial-order constraints and SAT.
//!
//! A rewrite system is unfolded into a constraint over precedence atoms
//! `(f>g)` and `(f=g)` ([`lpo`]), the constraint is encoded
//! propositionally ([`encode`]), converted to CNF and solved ([`sat`]), and
//! a satisfying assignment is decoded into a precedence. [`pipeline`] wires
//! the stages together.

pub mod encode;
pub mod lpo;
pub mod pipeline;
pub mod poc;
pub mod sat;
pub mod trs;

pub use encode::{precedence_of, Precedence};
pub use lpo::{lpo_gt, trs_constraint, OrderVariant};
pub use pipeline::{batch, prove_file, prove_text, ProveOptions, ProveReport, Verdict};
pub use poc::{PoRef, PoStore, Solution};
pub use sat::{solve, tseitin, CnfInstance, Literal, SatResult};
pub use trs::{parse_trs, Term, Trs};
