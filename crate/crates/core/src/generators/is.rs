use std::collections::HashMap;

use crate::complex::{AgentId, ChromaticComplex, Vertex};
use crate::generators::{
    compute_views, input_conjunction, input_facets, ordered_partitions, Instance, OrderedPartition,
    ViewArena, ViewVertex,
};
use crate::logic::{Formulas, ValueId};
use crate::model::{ActionModel, ModelError, Morphism, SimplicialModel};

/// One facet of `IS^r`: an input assignment and every γ-sequence producing it.
#[derive(Clone, Debug)]
pub struct IsFacet {
    pub inputs: Vec<ValueId>,
    /// Indices into `IsProtocol::partitions`, one per round; ascending.
    pub gammas: Vec<Vec<usize>>,
}

/// The `r`-round iterated immediate snapshot action model.
#[derive(Clone, Debug)]
pub struct IsProtocol {
    pub rounds: usize,
    pub partitions: Vec<OrderedPartition>,
    pub arena: ViewArena,
    pub action: ActionModel,
    pub vertices: Vec<ViewVertex>,
    pub facets: Vec<IsFacet>,
}

impl IsProtocol {
    /// γ-sequences that landed on an already generated facet.
    pub fn collisions(&self) -> usize {
        self.facets.iter().map(|f| f.gammas.len() - 1).sum()
    }

    pub fn partition_sequence(&self, facet: usize) -> Vec<&OrderedPartition> {
        self.facets[facet].gammas[0]
            .iter()
            .map(|&g| &self.partitions[g])
            .collect()
    }
}

fn gamma_sequences(n_partitions: usize, rounds: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..rounds {
        out = out
            .into_iter()
            .flat_map(|seq| {
                (0..n_partitions).map(move |g| {
                    let mut s = seq.clone();
                    s.push(g);
                    s
                })
            })
            .collect();
    }
    out
}

/// `IS^r` over the facets of `input`. Facets with identical view tuples are
/// merged, keeping every γ-sequence that yields them.
pub fn gen_is_protocol(rounds: usize, input: &SimplicialModel) -> Result<IsProtocol, ModelError> {
    if rounds == 0 {
        return Err(ModelError::Usage(
            "immediate snapshot needs at least one round".into(),
        ));
    }
    let ws = input.workspace().clone();
    let n = ws.n_agents();
    let partitions = ordered_partitions(n);
    let seqs = gamma_sequences(partitions.len(), rounds);
    let mut arena = ViewArena::new();
    let mut formulas = Formulas::new();
    let mut vertex_ids: HashMap<ViewVertex, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut cvertices = Vec::new();
    let mut facet_ids: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut facets: Vec<IsFacet> = Vec::new();
    let mut facet_lists = Vec::new();
    let mut pre = Vec::new();
    for inputs in input_facets(input)? {
        let cond = input_conjunction(&mut formulas, &inputs)?;
        for seq in &seqs {
            let gammas: Vec<OrderedPartition> =
                seq.iter().map(|&g| partitions[g].clone()).collect();
            let views = compute_views(&mut arena, &inputs, &gammas);
            let facet: Vec<usize> = (0..n)
                .map(|a| {
                    let vv = ViewVertex {
                        agent: AgentId(a),
                        input: inputs[a],
                        view: views[a],
                    };
                    *vertex_ids.entry(vv).or_insert_with(|| {
                        vertices.push(vv);
                        cvertices.push(
                            Vertex::new(AgentId(a), Vec::new())
                                .named(format!("{}#{}", ws.agents[a], vv.view.0)),
                        );
                        vertices.len() - 1
                    })
                })
                .collect();
            match facet_ids.get(&facet) {
                Some(&i) => facets[i].gammas.push(seq.clone()),
                None => {
                    facet_ids.insert(facet.clone(), facets.len());
                    facets.push(IsFacet {
                        inputs: inputs.clone(),
                        gammas: vec![seq.clone()],
                    });
                    facet_lists.push(facet);
                    pre.push(cond);
                }
            }
        }
    }
    let complex = ChromaticComplex::new(n, cvertices, facet_lists)?;
    let action = ActionModel::new(ws, complex, formulas, pre)?;
    Ok(IsProtocol {
        rounds,
        partitions,
        arena,
        action,
        vertices,
        facets,
    })
}

/// `IIS^r = I[IS^r]`.
pub fn build_iis(
    rounds: usize,
    input: &SimplicialModel,
) -> Result<Instance<IsProtocol>, ModelError> {
    let protocol = gen_is_protocol(rounds, input)?;
    let action = protocol.action.clone();
    Instance::apply(input, &action, protocol)
}

impl Instance<IsProtocol> {
    pub fn view_vertex(&self, v: usize) -> &ViewVertex {
        &self.source.vertices[self.action_vertex(v)]
    }

    pub fn facet_spec(&self, x: usize) -> &IsFacet {
        &self.source.facets[self.action_facet(x)]
    }
}

/// The map `I[γ_1, …, γ_r] ↦ I[γ_1, …, γ_s]` from a longer run onto a shorter
/// one over the same input model.
pub fn truncation_morphism(
    long: &Instance<IsProtocol>,
    short: &Instance<IsProtocol>,
) -> Result<Morphism, ModelError> {
    let s = short.source.rounds;
    if s > long.source.rounds {
        return Err(ModelError::Usage(format!(
            "cannot truncate {} rounds to {s}",
            long.source.rounds
        )));
    }
    if long.model.workspace() != short.model.workspace() {
        return Err(ModelError::WorkspaceMismatch);
    }
    let mut by_key: HashMap<(Vec<ValueId>, Vec<usize>), usize> = HashMap::new();
    for y in 0..short.model.facet_count() {
        let spec = short.facet_spec(y);
        for seq in &spec.gammas {
            by_key.insert((spec.inputs.clone(), seq.clone()), y);
        }
    }
    let n = long.model.workspace().n_agents();
    let mut vmap = vec![usize::MAX; long.model.complex().vertices().len()];
    for x in 0..long.model.facet_count() {
        let spec = long.facet_spec(x);
        let key = (spec.inputs.clone(), spec.gammas[0][..s].to_vec());
        let y = *by_key
            .get(&key)
            .ok_or_else(|| ModelError::Usage(format!("facet {x} has no truncated image")))?;
        for a in (0..n).map(AgentId) {
            let v = long.model.complex().facet(x).vertex(a);
            let w = short.model.complex().facet(y).vertex(a);
            if vmap[v] != usize::MAX && vmap[v] != w {
                return Err(ModelError::Usage(format!(
                    "vertex {v} has two truncated images"
                )));
            }
            vmap[v] = w;
        }
    }
    let f = Morphism { vmap };
    f.check(&long.model, &short.model)
        .map_err(|e| ModelError::Usage(e.to_string()))?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_input_model, build_input_model_on, Workspace};

    #[test]
    fn single_round_two_agents() {
        let ws = Workspace::numbered(2, 2);
        let input = build_input_model(&ws).unwrap();
        let iis = build_iis(1, &input).unwrap();
        assert_eq!(iis.model.facet_count(), 12);
        assert_eq!(iis.source.collisions(), 0);
    }

    #[test]
    fn single_input_counts() {
        let ws = Workspace::numbered(3, 3);
        let input = build_input_model_on(&ws, &[vec![ValueId(0); 3]]).unwrap();
        assert_eq!(build_iis(1, &input).unwrap().model.facet_count(), 13);
        let two = build_iis(2, &input).unwrap();
        assert_eq!(two.model.facet_count(), 169);
        assert_eq!(two.source.collisions(), 0);
    }

    #[test]
    fn three_round_truncation_is_a_morphism() {
        let ws = Workspace::numbered(2, 2);
        let input = build_input_model(&ws).unwrap();
        let long = build_iis(3, &input).unwrap();
        let short = build_iis(2, &input).unwrap();
        let f = truncation_morphism(&long, &short).unwrap();
        assert!(f.check(&long.model, &short.model).is_ok());
    }
}
