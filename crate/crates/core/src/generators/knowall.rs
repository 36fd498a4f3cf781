use std::collections::HashMap;

use thiserror::Error;

use crate::complex::{AgentId, AgentSet, ChromaticComplex, Vertex};
use crate::generators::{input_conjunction, input_facets, Instance, ViewArena, ViewVertex};
use crate::logic::Formulas;
use crate::model::{ActionModel, ModelError, SimplicialModel};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("a graph needs at least one node")]
    Empty,
    #[error("graphs over {0} nodes are not supported")]
    TooLarge(usize),
    #[error("edge ({0}, {1}) leaves the node set")]
    NodeOutOfRange(usize, usize),
    #[error("node {0} has no self-loop")]
    MissingSelfLoop(usize),
    #[error("graphs have {0} and {1} nodes")]
    SizeMismatch(usize, usize),
}

/// A directed graph on the agents, with every self-loop present.
///
/// `row[p]` holds `{q | (p, q) ∈ E}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiGraph {
    row: Vec<AgentSet>,
}

impl DiGraph {
    /// Rejects graphs lacking a self-loop.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<DiGraph, GraphError> {
        let g = DiGraph::raw(n, edges)?;
        if let Some(p) = (0..n).find(|&p| !g.has_edge(p, p)) {
            return Err(GraphError::MissingSelfLoop(p));
        }
        Ok(g)
    }

    /// Adds missing self-loops and returns the nodes that received one.
    pub fn with_self_loops(
        n: usize,
        edges: &[(usize, usize)],
    ) -> Result<(DiGraph, Vec<usize>), GraphError> {
        let mut g = DiGraph::raw(n, edges)?;
        let mut added = Vec::new();
        for p in 0..n {
            if !g.has_edge(p, p) {
                g.row[p] = g.row[p].with(AgentId(p));
                added.push(p);
            }
        }
        Ok((g, added))
    }

    fn raw(n: usize, edges: &[(usize, usize)]) -> Result<DiGraph, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if n > crate::complex::MAX_AGENTS {
            return Err(GraphError::TooLarge(n));
        }
        let mut row = vec![AgentSet::EMPTY; n];
        for &(p, q) in edges {
            if p >= n || q >= n {
                return Err(GraphError::NodeOutOfRange(p, q));
            }
            row[p] = row[p].with(AgentId(q));
        }
        Ok(DiGraph { row })
    }

    pub fn self_loops(n: usize) -> DiGraph {
        DiGraph {
            row: (0..n).map(|p| AgentSet::singleton(AgentId(p))).collect(),
        }
    }

    pub fn complete(n: usize) -> DiGraph {
        DiGraph {
            row: vec![AgentSet::full(n); n],
        }
    }

    pub fn node_count(&self) -> usize {
        self.row.len()
    }

    pub fn has_edge(&self, p: usize, q: usize) -> bool {
        self.row[p].contains(AgentId(q))
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.row.len())
            .flat_map(|p| self.row[p].iter().map(move |q| (p, q.0)))
            .collect()
    }

    /// `In(p, G) = {q | (p, q) ∈ E}`.
    pub fn in_set(&self, p: usize) -> AgentSet {
        self.row[p]
    }

    /// `Out(p, G) = {q | (q, p) ∈ E}`.
    pub fn out_set(&self, p: usize) -> AgentSet {
        AgentSet::from_agents(
            (0..self.row.len())
                .filter(|&q| self.has_edge(q, p))
                .map(AgentId),
        )
    }

    pub fn out_of(&self, ps: AgentSet) -> AgentSet {
        ps.iter()
            .fold(AgentSet::EMPTY, |acc, p| acc.union(self.out_set(p.0)))
    }

    /// Smallest `|P|` with `Out(P, G) = Π`, by trying subsets in order of size.
    pub fn domination_number(&self) -> usize {
        let n = self.row.len();
        let full = AgentSet::full(n);
        for size in 1..=n {
            // Gosper's hack: all n-bit masks with `size` ones, ascending
            let mut m: u64 = u64::MAX >> (64 - size);
            while m & !full.0 == 0 {
                if self.out_of(AgentSet(m)) == full {
                    return size;
                }
                let c = m & m.wrapping_neg();
                let Some(r) = m.checked_add(c) else { break };
                m = (((r ^ m) >> 2) / c) | r;
            }
        }
        n
    }
}

/// `H ∘ G`: `(p, q)` is an edge iff `Out(p, G) ∩ In(q, H) ≠ ∅`.
pub fn compose(h: &DiGraph, g: &DiGraph) -> Result<DiGraph, GraphError> {
    let n = g.node_count();
    if h.node_count() != n {
        return Err(GraphError::SizeMismatch(h.node_count(), n));
    }
    let mut row = vec![AgentSet::EMPTY; n];
    for p in 0..n {
        let out = g.out_set(p);
        for q in 0..n {
            if !out.intersection(h.in_set(q)).is_empty() {
                row[p] = row[p].with(AgentId(q));
            }
        }
    }
    Ok(DiGraph { row })
}

/// `G_{≤r} = G_r ∘ (… ∘ (G_2 ∘ G_1))` for the first `r` graphs.
pub fn compose_rounds(gs: &[DiGraph], r: usize) -> Result<DiGraph, GraphError> {
    let mut acc = gs.first().ok_or(GraphError::Empty)?.clone();
    for g in &gs[1..r.min(gs.len())] {
        acc = compose(g, &acc)?;
    }
    Ok(acc)
}

/// The know-all protocol after `r` rounds: each agent learns the inputs of
/// `In(a, G_{≤r})`.
#[derive(Clone, Debug)]
pub struct KnowAllProtocol {
    pub rounds: usize,
    pub graph: DiGraph,
    pub arena: ViewArena,
    pub action: ActionModel,
    pub vertices: Vec<ViewVertex>,
}

pub fn gen_knowall_protocol(
    gs: &[DiGraph],
    rounds: usize,
    input: &SimplicialModel,
) -> Result<KnowAllProtocol, ModelError> {
    let ws = input.workspace().clone();
    let n = ws.n_agents();
    if rounds == 0 || gs.len() < rounds {
        return Err(ModelError::Usage(format!(
            "{rounds} rounds requested but {} graphs given",
            gs.len()
        )));
    }
    if let Some(g) = gs.iter().find(|g| g.node_count() != n) {
        return Err(ModelError::Usage(format!(
            "graph has {} nodes, workspace has {n} agents",
            g.node_count()
        )));
    }
    let graph = compose_rounds(gs, rounds).map_err(|e| ModelError::Usage(e.to_string()))?;
    let mut arena = ViewArena::new();
    let mut formulas = Formulas::new();
    let mut ids: HashMap<ViewVertex, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut cvertices = Vec::new();
    let mut facets = Vec::new();
    let mut pre = Vec::new();
    for inputs in input_facets(input)? {
        pre.push(input_conjunction(&mut formulas, &inputs)?);
        let facet = (0..n)
            .map(|a| {
                let entries = graph
                    .in_set(a)
                    .iter()
                    .map(|p| {
                        let leaf = arena.input(inputs[p.0]);
                        (p, leaf)
                    })
                    .collect();
                let vv = ViewVertex {
                    agent: AgentId(a),
                    input: inputs[a],
                    view: arena.set(entries),
                };
                *ids.entry(vv).or_insert_with(|| {
                    vertices.push(vv);
                    cvertices.push(
                        Vertex::new(AgentId(a), Vec::new())
                            .named(format!("{}#{}", ws.agents[a], vv.view.0)),
                    );
                    vertices.len() - 1
                })
            })
            .collect();
        facets.push(facet);
    }
    let complex = ChromaticComplex::new(n, cvertices, facets)?;
    let action = ActionModel::new(ws, complex, formulas, pre)?;
    Ok(KnowAllProtocol {
        rounds,
        graph,
        arena,
        action,
        vertices,
    })
}

/// `I[G_{≤r}]`.
pub fn build_knowall(
    gs: &[DiGraph],
    rounds: usize,
    input: &SimplicialModel,
) -> Result<Instance<KnowAllProtocol>, ModelError> {
    let protocol = gen_knowall_protocol(gs, rounds, input)?;
    let action = protocol.action.clone();
    Instance::apply(input, &action, protocol)
}
