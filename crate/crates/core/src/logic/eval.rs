use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use crate::complex::AgentSet;
use crate::logic::{FormulaId, Formulas, LogicError, Node};
use crate::model::SimplicialModel;

/// Model checker for one model and one formula arena.
///
/// Truth sets are computed bottom-up over the formula DAG and cached per node,
/// so every (node, facet) pair is decided at most once per checker.
pub struct Checker<'a> {
    model: &'a SimplicialModel,
    formulas: &'a Formulas,
    cache: HashMap<FormulaId, FixedBitSet>,
}

impl<'a> Checker<'a> {
    pub fn new(model: &'a SimplicialModel, formulas: &'a Formulas) -> Checker<'a> {
        Checker {
            model,
            formulas,
            cache: HashMap::new(),
        }
    }

    /// `M, X ⊨ φ`.
    pub fn eval(&mut self, facet: usize, phi: FormulaId) -> Result<bool, LogicError> {
        if facet >= self.model.facet_count() {
            return Err(LogicError::FacetOutOfRange(facet));
        }
        Ok(self.truth_set(phi)?.contains(facet))
    }

    /// `M ⊨ φ`.
    pub fn holds_everywhere(&mut self, phi: FormulaId) -> Result<bool, LogicError> {
        let n = self.model.facet_count();
        Ok(self.truth_set(phi)?.count_ones(..) == n)
    }

    /// Lowest-index facet refuting `phi`, if any.
    pub fn first_refuting(&mut self, phi: FormulaId) -> Result<Option<usize>, LogicError> {
        let n = self.model.facet_count();
        let set = self.truth_set(phi)?;
        Ok((0..n).find(|&x| !set.contains(x)))
    }

    /// Facets at which `phi` holds.
    pub fn truth_set(&mut self, phi: FormulaId) -> Result<&FixedBitSet, LogicError> {
        if !self.cache.contains_key(&phi) {
            let pending: Vec<FormulaId> = self
                .formulas
                .reachable(phi)
                .into_iter()
                .filter(|id| !self.cache.contains_key(id))
                .collect();
            for id in pending {
                let set = self.compute(id)?;
                self.cache.insert(id, set);
            }
        }
        Ok(&self.cache[&phi])
    }

    fn compute(&self, id: FormulaId) -> Result<FixedBitSet, LogicError> {
        let model = self.model;
        let complex = model.complex();
        let n = complex.facet_count();
        let n_agents = complex.n_agents();
        let mut out = FixedBitSet::with_capacity(n);
        match self.formulas.node(id) {
            Node::Atom(p) => {
                if p.agent.0 >= n_agents || p.value.0 >= model.workspace().values.len() {
                    return Err(LogicError::UnknownAtom(*p));
                }
                for x in 0..n {
                    if model.facet_has_atom(x, *p) {
                        out.insert(x);
                    }
                }
            }
            Node::Not(c) => {
                out = self.cache[c].clone();
                out.toggle_range(..);
            }
            Node::And(cs) => {
                out.insert_range(..);
                for c in cs {
                    out.intersect_with(&self.cache[c]);
                }
            }
            Node::Or(cs) => {
                for c in cs {
                    out.union_with(&self.cache[c]);
                }
            }
            Node::K(a, c) => {
                if a.0 >= n_agents {
                    return Err(LogicError::UnknownAgent(a.0));
                }
                let sub = &self.cache[c];
                for x in 0..n {
                    let all = complex
                        .neighbors(x)
                        .iter()
                        .filter(|nb| nb.shared.contains(*a))
                        .all(|nb| sub.contains(nb.facet));
                    out.set(x, all);
                }
            }
            Node::D(set, c) => {
                if !set.is_subset(AgentSet::full(n_agents)) {
                    return Err(LogicError::UnknownAgent(
                        set.iter().find(|a| a.0 >= n_agents).map_or(0, |a| a.0),
                    ));
                }
                let sub = &self.cache[c];
                if set.is_empty() {
                    // every facet is reachable through the empty group
                    if sub.count_ones(..) == n {
                        out.insert_range(..);
                    }
                } else {
                    for x in 0..n {
                        let all = complex
                            .neighbors(x)
                            .iter()
                            .filter(|nb| set.is_subset(nb.shared))
                            .all(|nb| sub.contains(nb.facet));
                        out.set(x, all);
                    }
                }
            }
        }
        Ok(out)
    }
}
