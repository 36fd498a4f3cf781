//! Logical obstructions to distributed task solvability.
//!
//! Protocols and tasks are finite simplicial models. A task is solvable by a
//! protocol only if the protocol's model maps onto the task's model, and a
//! positive epistemic formula true in the task but false somewhere in the
//! protocol rules that out. This crate computes the maximum K- and
//! D-simulations between two models by fixpoint iteration and, when the
//! maximum simulation is not total, synthesizes such a formula.

pub mod case_is2;
pub mod complex;
pub mod generators;
pub mod io;
pub mod logic;
pub mod model;
pub mod obstruction;
pub mod simulation;

pub use complex::{AgentId, AgentSet, ChromaticComplex, Vertex};
pub use logic::{AtomicProp, Checker, FormulaClass, FormulaId, Formulas, ValueId};
pub use model::{ActionModel, Morphism, SimplicialModel, Workspace};
pub use obstruction::{decide_obstruction, ObstructionVerdict};
pub use simulation::{Mode, Relation, Simulation};
