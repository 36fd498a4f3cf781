use crate::complex::{AgentId, ChromaticComplex, Vertex};
use crate::logic::{AtomicProp, Formulas};
use crate::model::{ActionModel, ModelError, Workspace};

/// Two agents with binary inputs.
pub fn staircase_workspace() -> Workspace {
    Workspace::numbered(2, 2)
}

/// The two-agent task whose decisions differ by at most one step
/// (`decide(0) − decide(1) ∈ {0, 1}`), cut off at `max_decision`.
#[derive(Clone, Debug)]
pub struct Staircase {
    pub max_decision: usize,
    pub action: ActionModel,
    /// `(decide(0), decide(1))` per action facet, in path order.
    pub decisions: Vec<(usize, usize)>,
}

pub fn gen_staircase_task(max_decision: usize) -> Result<Staircase, ModelError> {
    if max_decision == 0 {
        return Err(ModelError::Usage(
            "the staircase needs max decision ≥ 1".into(),
        ));
    }
    let ws = staircase_workspace();
    let d = max_decision + 1;
    // vertex (a, v) has id a * d + v
    let vertices = (0..2)
        .flat_map(|a| {
            (0..d).map(move |v| Vertex::new(AgentId(a), Vec::new()).named(format!("{a}:{v}")))
        })
        .collect();
    let mut decisions = Vec::new();
    for d0 in 0..d {
        for d1 in [d0.wrapping_sub(1), d0] {
            if d1 < d && d0 >= d1 {
                decisions.push((d0, d1));
            }
        }
    }
    let mut formulas = Formulas::new();
    let mut pre = Vec::new();
    let mut facets = Vec::new();
    for &(d0, d1) in &decisions {
        let p0 = formulas.atom(AtomicProp::new(0, d0 % 2));
        let p1 = formulas.atom(AtomicProp::new(1, d1 % 2));
        pre.push(formulas.and(vec![p0, p1])?);
        facets.push(vec![d0, d + d1]);
    }
    let complex = ChromaticComplex::new(2, vertices, facets)?;
    Ok(Staircase {
        max_decision,
        action: ActionModel::new(ws, complex, formulas, pre)?,
        decisions,
    })
}

/// One action per agent forming a single facet, with precondition `⊤`.
pub fn gen_trivial_protocol(ws: &Workspace) -> Result<ActionModel, ModelError> {
    let n = ws.n_agents();
    if n == 0 || ws.n_values() == 0 {
        return Err(ModelError::Usage(
            "the workspace needs agents and values".into(),
        ));
    }
    let vertices = (0..n)
        .map(|a| Vertex::new(AgentId(a), Vec::new()).named(ws.agents[a].clone()))
        .collect();
    let complex = ChromaticComplex::new(n, vertices, vec![(0..n).collect()])?;
    let mut formulas = Formulas::new();
    let top = formulas.top();
    ActionModel::new(ws.clone(), complex, formulas, vec![top])
}
