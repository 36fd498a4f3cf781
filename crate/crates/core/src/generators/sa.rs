use std::collections::HashMap;

use crate::complex::{AgentId, ChromaticComplex, Vertex};
use crate::generators::{Instance, IsProtocol};
use crate::logic::{AtomicProp, Formulas, ValueId};
use crate::model::{all_assignments, ActionModel, ModelError, SimplicialModel, Workspace};
use crate::simulation::Relation;

/// The `k`-set agreement task: every decision map with at most `k` distinct
/// decisions, each decision being someone's input.
#[derive(Clone, Debug)]
pub struct SaTask {
    pub k: usize,
    pub values: Vec<ValueId>,
    pub action: ActionModel,
    /// `(agent, decision)` per action vertex.
    pub vertices: Vec<(AgentId, ValueId)>,
    /// Decision of every agent, per action facet.
    pub decisions: Vec<Vec<ValueId>>,
}

/// `SA_k` with decisions drawn from `values` (all workspace values by default).
pub fn gen_sa_task(
    k: usize,
    ws: &Workspace,
    values: Option<&[ValueId]>,
) -> Result<SaTask, ModelError> {
    let n = ws.n_agents();
    if k == 0 || k > n {
        return Err(ModelError::Usage(format!("k must lie in 1..={n}, got {k}")));
    }
    let values: Vec<ValueId> = match values {
        Some(vs) => vs.to_vec(),
        None => (0..ws.n_values()).map(ValueId).collect(),
    };
    if values.is_empty() || values.iter().any(|v| v.0 >= ws.n_values()) {
        return Err(ModelError::Usage(
            "decision values must be workspace values".into(),
        ));
    }
    let mut formulas = Formulas::new();
    let mut some_has: HashMap<ValueId, crate::logic::FormulaId> = HashMap::new();
    for &d in &values {
        let atoms = (0..n)
            .map(|b| formulas.atom(AtomicProp::new(b, d.0)))
            .collect();
        some_has.insert(d, formulas.or(atoms)?);
    }
    let mut vertices = Vec::new();
    let mut cvertices = Vec::new();
    let mut ids = HashMap::new();
    let mut facets = Vec::new();
    let mut decisions = Vec::new();
    let mut pre = Vec::new();
    for choice in all_assignments(n, values.len()) {
        let decide: Vec<ValueId> = choice.iter().map(|c| values[c.0]).collect();
        let mut image = decide.clone();
        image.sort_unstable();
        image.dedup();
        if image.len() > k {
            continue;
        }
        let facet = (0..n)
            .map(|a| {
                let key = (AgentId(a), decide[a]);
                *ids.entry(key).or_insert_with(|| {
                    vertices.push(key);
                    cvertices.push(
                        Vertex::new(AgentId(a), Vec::new())
                            .named(format!("{}:{}", ws.agents[a], ws.values[decide[a].0])),
                    );
                    vertices.len() - 1
                })
            })
            .collect();
        let parts = decide.iter().map(|d| some_has[d]).collect();
        pre.push(formulas.and(parts)?);
        facets.push(facet);
        decisions.push(decide);
    }
    let complex = ChromaticComplex::new(n, cvertices, facets)?;
    let action = ActionModel::new(ws.clone(), complex, formulas, pre)?;
    Ok(SaTask {
        k,
        values,
        action,
        vertices,
        decisions,
    })
}

/// `I[SA_k]` with the default decision values.
pub fn build_sa(k: usize, input: &SimplicialModel) -> Result<Instance<SaTask>, ModelError> {
    let task = gen_sa_task(k, input.workspace(), None)?;
    let action = task.action.clone();
    Instance::apply(input, &action, task)
}

impl Instance<SaTask> {
    pub fn decisions(&self, x: usize) -> &[ValueId] {
        &self.source.decisions[self.action_facet(x)]
    }
}

/// Pairs `(I[γ…], X′)` with equal inputs where every agent's decision in `X′`
/// is an input value visible in that agent's flattened view.
pub fn explicit_k_relation(iis: &Instance<IsProtocol>, sa: &Instance<SaTask>) -> Relation {
    let n = iis.model.workspace().n_agents();
    let arena = &iis.source.arena;
    let seen: Vec<Vec<Vec<ValueId>>> = (0..iis.model.facet_count())
        .map(|x| {
            (0..n)
                .map(|a| {
                    let v = iis.model.complex().facet(x).vertex(AgentId(a));
                    arena
                        .car(iis.view_vertex(v).view)
                        .into_iter()
                        .map(|(_, val)| val)
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut r = Relation::empty(iis.model.facet_count(), sa.model.facet_count());
    for x in 0..iis.model.facet_count() {
        for y in 0..sa.model.facet_count() {
            if iis.model.facet_label(x) != sa.model.facet_label(y) {
                continue;
            }
            let d = sa.decisions(y);
            if (0..n).all(|a| seen[x][a].contains(&d[a])) {
                r.insert(x, y);
            }
        }
    }
    r
}
