//! Synthesis of the formulas `Φ^K(n, X)` / `Φ^D(n, X)` and the decision
//! procedure built on the maximum simulation.
//!
//! `Φ(n, X)` is refuted at `X′` exactly when `X S_n X′` fails to hold, so a
//! facet `X` left without partners in the fixpoint yields a positive formula
//! that holds throughout the task and fails at `X` in the protocol.

use thiserror::Error;

use crate::logic::{Checker, FormulaClass, FormulaId, Formulas, LogicError};
use crate::model::SimplicialModel;
use crate::simulation::{Fixpoint, Mode, Simulation, SimulationError};

#[derive(Debug, Error)]
pub enum ObstructionError {
    #[error(transparent)]
    Simulation(#[from] SimulationError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("the workspace has no atomic propositions")]
    NoAtoms,
    #[error("obstruction candidates must be positive, got a formula of class {0}")]
    NotPositive(FormulaClass),
    #[error(
        "synthesized formula failed verification at facet {witness} \
         (task models it: {task_models_phi}, protocol refutes it: {protocol_refutes_phi})"
    )]
    Inconsistent {
        witness: usize,
        task_models_phi: bool,
        protocol_refutes_phi: bool,
    },
}

/// `Φ(k, X)` for every facet `X` of `m` and every `k ≤ n`; entry `[k][x]`.
pub fn build_phi_levels(
    store: &mut Formulas,
    m: &SimplicialModel,
    mode: Mode,
    n: usize,
) -> Result<Vec<Vec<FormulaId>>, ObstructionError> {
    let atoms = m.workspace().atoms();
    if atoms.is_empty() {
        return Err(ObstructionError::NoAtoms);
    }
    let c = m.complex();
    let mut base = Vec::with_capacity(m.facet_count());
    for x in 0..m.facet_count() {
        let label = m.facet_label(x);
        let parts = atoms
            .iter()
            .map(|&p| {
                let a = store.atom(p);
                if label.binary_search(&p).is_ok() {
                    store.not(a)
                } else {
                    a
                }
            })
            .collect();
        base.push(store.or(parts)?);
    }
    let mut levels = vec![base];
    for _ in 0..n {
        let prev = levels.last().expect("base level");
        let mut next = Vec::with_capacity(prev.len());
        for x in 0..m.facet_count() {
            let mut parts = Vec::new();
            match mode {
                Mode::K => {
                    parts.push(levels[0][x]);
                    for nb in c.neighbors(x) {
                        for a in nb.shared.iter() {
                            parts.push(store.k(a, prev[nb.facet]));
                        }
                    }
                }
                Mode::D => {
                    for (y, &phi_y) in prev.iter().enumerate() {
                        parts.push(store.d(c.shared_colors(x, y), phi_y));
                    }
                }
            }
            next.push(store.or(parts)?);
        }
        levels.push(next);
    }
    Ok(levels)
}

/// `Φ(n, X)` in `store`.
pub fn build_phi(
    store: &mut Formulas,
    m: &SimplicialModel,
    mode: Mode,
    n: usize,
    x: usize,
) -> Result<FormulaId, ObstructionError> {
    if x >= m.facet_count() {
        return Err(LogicError::FacetOutOfRange(x).into());
    }
    Ok(build_phi_levels(store, m, mode, n)?[n][x])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ObstructionCheck {
    pub task_models_phi: bool,
    /// A task facet refuting the formula, when there is one.
    pub task_counterexample: Option<usize>,
    /// The lowest-index protocol facet refuting the formula.
    pub protocol_countermodel: Option<usize>,
}

impl ObstructionCheck {
    pub fn is_obstruction(&self) -> bool {
        self.task_models_phi && self.protocol_countermodel.is_some()
    }
}

/// Evaluates a positive formula on both models with the model checker alone.
pub fn verify_obstruction(
    store: &Formulas,
    phi: FormulaId,
    task: &SimplicialModel,
    protocol: &SimplicialModel,
) -> Result<ObstructionCheck, ObstructionError> {
    let class = store.classify(phi);
    if !class.is_positive() {
        return Err(ObstructionError::NotPositive(class));
    }
    let (t, p) = rayon::join(
        || Checker::new(task, store).first_refuting(phi),
        || Checker::new(protocol, store).first_refuting(phi),
    );
    let task_counterexample = t?;
    Ok(ObstructionCheck {
        task_models_phi: task_counterexample.is_none(),
        task_counterexample,
        protocol_countermodel: p?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Verification {
    pub task_models_phi: bool,
    pub protocol_refutes_phi: bool,
}

#[derive(Clone, Debug)]
pub struct ObstructionVerdict {
    pub exists: bool,
    pub mode: Mode,
    /// Stabilization step of the simulation chain.
    pub n: usize,
    pub witness: Option<usize>,
    pub phi: Option<FormulaId>,
    pub formulas: Formulas,
    pub verification: Option<Verification>,
    /// Whether `S_k` is total, for each step `k ≤ n`.
    pub step_totality: Vec<bool>,
    pub fixpoint: Fixpoint,
}

/// Runs the simulation chain to its fixpoint and, if it is not total, builds
/// and checks `Φ(N, X)` for the lowest-index facet `X` without a partner.
pub fn decide_obstruction(
    protocol: &SimplicialModel,
    task: &SimplicialModel,
    mode: Mode,
) -> Result<ObstructionVerdict, ObstructionError> {
    let sim = Simulation::new(protocol, task)?;
    let fixpoint = sim.max_simulation(mode);
    let n = fixpoint.stabilized_at();
    let step_totality = fixpoint.chain.iter().map(|r| r.is_total()).collect();
    let mut formulas = Formulas::new();
    let Some(&witness) = fixpoint.relation().totality_witnesses().first() else {
        return Ok(ObstructionVerdict {
            exists: false,
            mode,
            n,
            witness: None,
            phi: None,
            formulas,
            verification: None,
            step_totality,
            fixpoint,
        });
    };
    let phi = build_phi(&mut formulas, protocol, mode, n, witness)?;
    let check = verify_obstruction(&formulas, phi, task, protocol)?;
    let protocol_refutes_phi = !Checker::new(protocol, &formulas).eval(witness, phi)?;
    if !check.task_models_phi || !protocol_refutes_phi {
        return Err(ObstructionError::Inconsistent {
            witness,
            task_models_phi: check.task_models_phi,
            protocol_refutes_phi,
        });
    }
    Ok(ObstructionVerdict {
        exists: true,
        mode,
        n,
        witness: Some(witness),
        phi: Some(phi),
        formulas,
        verification: Some(Verification {
            task_models_phi: true,
            protocol_refutes_phi: true,
        }),
        step_totality,
        fixpoint,
    })
}

/// A pair where `S_n` membership and refutation of `Φ(n, X)` disagree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DualityMismatch {
    pub n: usize,
    pub x: usize,
    pub x_prime: usize,
    pub in_s_n: bool,
}

/// Compares `S_n` with the refutation sets of `Φ(n, X)` for every step up to
/// the fixpoint and every facet pair.
pub fn duality_mismatches(
    m: &SimplicialModel,
    target: &SimplicialModel,
    mode: Mode,
) -> Result<Vec<DualityMismatch>, ObstructionError> {
    let fix = Simulation::new(m, target)?.max_simulation(mode);
    let mut store = Formulas::new();
    let levels = build_phi_levels(&mut store, m, mode, fix.stabilized_at())?;
    let mut checker = Checker::new(target, &store);
    let mut out = Vec::new();
    for (n, s_n) in fix.chain.iter().enumerate() {
        for x in 0..m.facet_count() {
            let truth = checker.truth_set(levels[n][x])?;
            for xp in 0..target.facet_count() {
                let in_s_n = s_n.contains(x, xp);
                if in_s_n == truth.contains(xp) {
                    out.push(DualityMismatch {
                        n,
                        x,
                        x_prime: xp,
                        in_s_n,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{build_iis, build_sa};
    use crate::logic::{sexp, AtomicProp};
    use crate::model::{build_input_model, build_input_model_on, Workspace};
    use crate::ValueId;

    #[test]
    fn base_case_lists_missing_and_present_atoms() {
        let ws = Workspace::numbered(2, 2);
        let input = build_input_model_on(&ws, &[vec![ValueId(0), ValueId(1)]]).unwrap();
        let mut store = Formulas::new();
        let phi = build_phi(&mut store, &input, Mode::K, 0, 0).unwrap();
        let expected = sexp::parse_formula(
            "(or (not (atom 0 0)) (not (atom 1 1)) (atom 0 1) (atom 1 0))",
            &ws,
            &mut store,
        )
        .unwrap();
        assert_eq!(phi, expected);
    }

    #[test]
    fn d_step_includes_full_and_empty_groups() {
        let ws = Workspace::numbered(2, 2);
        let input = build_input_model(&ws).unwrap();
        let mut store = Formulas::new();
        let levels = build_phi_levels(&mut store, &input, Mode::D, 1).unwrap();
        // facet 0 = (0, 0) and facet 3 = (1, 1) share no vertex
        let full = store.d(crate::AgentSet::full(2), levels[0][0]);
        let empty = store.d(crate::AgentSet::EMPTY, levels[0][3]);
        let children = store.node(levels[1][0]).children().to_vec();
        assert!(children.contains(&full) && children.contains(&empty));
    }

    #[test]
    fn consensus_has_a_verified_obstruction() {
        let ws = Workspace::numbered(2, 2);
        let input = build_input_model(&ws).unwrap();
        let iis = build_iis(1, &input).unwrap();
        let sa = build_sa(1, &input).unwrap();
        let v = decide_obstruction(&iis.model, &sa.model, Mode::K).unwrap();
        assert!(v.exists);
        let phi = v.phi.unwrap();
        assert_eq!(v.formulas.classify(phi), FormulaClass::PositiveK);
        let check = verify_obstruction(&v.formulas, phi, &sa.model, &iis.model).unwrap();
        assert!(check.is_obstruction());
    }

    #[test]
    fn verify_rejects_negative_formulas_and_tautologies_are_not_obstructions() {
        let ws = Workspace::numbered(2, 2);
        let input = build_input_model(&ws).unwrap();
        let mut store = Formulas::new();
        let p = store.atom(AtomicProp::new(0, 0));
        let not_p = store.not(p);
        let k = store.k(crate::AgentId(0), not_p);
        let negated_k = store.not(k);
        assert!(verify_obstruction(&store, negated_k, &input, &input).is_err());
        let top = store.top();
        let check = verify_obstruction(&store, top, &input, &input).unwrap();
        assert!(check.task_models_phi && check.protocol_countermodel.is_none());
    }

    #[test]
    fn duality_on_the_consensus_pair() {
        let ws = Workspace::numbered(2, 2);
        let input = build_input_model(&ws).unwrap();
        let iis = build_iis(1, &input).unwrap();
        let sa = build_sa(1, &input).unwrap();
        for mode in [Mode::K, Mode::D] {
            assert!(duality_mismatches(&iis.model, &sa.model, mode)
                .unwrap()
                .is_empty());
        }
    }
}
