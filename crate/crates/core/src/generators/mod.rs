//! Protocol and task constructors.

mod is;
mod knowall;
mod partition;
mod sa;
mod staircase;
mod views;

pub use is::{build_iis, gen_is_protocol, truncation_morphism, IsFacet, IsProtocol};
pub use knowall::{
    build_knowall, compose, compose_rounds, gen_knowall_protocol, DiGraph, GraphError,
    KnowAllProtocol,
};
pub use partition::{ordered_partitions, OrderedPartition};
pub use sa::{build_sa, explicit_k_relation, gen_sa_task, SaTask};
pub use staircase::{gen_staircase_task, gen_trivial_protocol, staircase_workspace, Staircase};
pub use views::{compute_views, View, ViewArena, ViewId};

use crate::complex::AgentId;
use crate::logic::ValueId;
use crate::model::{product_update, ActionModel, ModelError, SimplicialModel};

/// An action vertex `(a, i_a, v_a)` of a full-information protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ViewVertex {
    pub agent: AgentId,
    pub input: ValueId,
    pub view: ViewId,
}

/// A generated action model together with `input[action]` and its provenance.
#[derive(Clone, Debug)]
pub struct Instance<T> {
    pub model: SimplicialModel,
    /// (input facet, action facet) per facet of `model`.
    pub facet_sources: Vec<(usize, usize)>,
    /// (input vertex, action vertex) per vertex of `model`.
    pub vertex_sources: Vec<(usize, usize)>,
    pub source: T,
}

impl<T> Instance<T> {
    pub fn apply(
        input: &SimplicialModel,
        action: &ActionModel,
        source: T,
    ) -> Result<Instance<T>, ModelError> {
        let up = product_update(input, action)?;
        Ok(Instance {
            model: up.model,
            facet_sources: up.facet_sources,
            vertex_sources: up.vertex_sources,
            source,
        })
    }

    pub fn action_facet(&self, x: usize) -> usize {
        self.facet_sources[x].1
    }

    pub fn action_vertex(&self, v: usize) -> usize {
        self.vertex_sources[v].1
    }

    /// The action vertex behind the `a`-colored vertex of facet `x`.
    pub fn action_vertex_at(&self, x: usize, a: AgentId) -> usize {
        self.action_vertex(self.model.complex().facet(x).vertex(a))
    }
}

/// Per-facet `ip_a^{i_a}` conjunctions, keyed by input assignment.
fn input_conjunction(
    formulas: &mut crate::logic::Formulas,
    inputs: &[ValueId],
) -> Result<crate::logic::FormulaId, ModelError> {
    let atoms = inputs
        .iter()
        .enumerate()
        .map(|(a, v)| formulas.atom(crate::logic::AtomicProp::new(a, v.0)))
        .collect();
    Ok(formulas.and(atoms)?)
}

/// Input assignments of every facet of an input model.
fn input_facets(input: &SimplicialModel) -> Result<Vec<Vec<ValueId>>, ModelError> {
    (0..input.facet_count())
        .map(|x| {
            input.facet_inputs(x).ok_or_else(|| {
                ModelError::Usage(format!(
                    "facet {x} is not an input facet (one atom per vertex)"
                ))
            })
        })
        .collect()
}
