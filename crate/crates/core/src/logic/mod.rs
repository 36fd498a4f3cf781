//! Epistemic formulas over `ip_a^v` atoms with `K_a` and `D_A` modalities,
//! their syntactic classes and degree, and the model checker.

mod eval;
mod formula;
pub mod sexp;

use thiserror::Error;

pub use eval::Checker;
pub use formula::{AtomicProp, FormulaClass, FormulaId, Formulas, Node, ValueId};

#[derive(Debug, Error)]
pub enum LogicError {
    #[error("empty `{0}` is not a formula")]
    EmptyConnective(&'static str),
    #[error("atom of agent {} and value {} is outside the workspace", .0.agent, .0.value)]
    UnknownAtom(AtomicProp),
    #[error("agent {0} is outside the workspace")]
    UnknownAgent(usize),
    #[error("facet index {0} out of range")]
    FacetOutOfRange(usize),
    #[error("formula parse error (line {line}): {msg}")]
    Parse { line: usize, msg: String },
    #[error("expanded formula has {size} nodes, above the limit of {limit}")]
    TooLarge { size: u64, limit: u64 },
}
