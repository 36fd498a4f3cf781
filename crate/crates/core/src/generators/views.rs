use std::collections::HashMap;

use crate::complex::{AgentId, AgentSet};
use crate::generators::OrderedPartition;
use crate::logic::ValueId;
use crate::model::Workspace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ViewId(pub u32);

/// A round-0 view is an input value; a round-(r+1) view is a set of
/// `(agent, round-r view)` pairs, stored sorted by agent.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum View {
    Input(ValueId),
    Set(Vec<(AgentId, ViewId)>),
}

/// Hash-consed views: structurally equal views share one id.
#[derive(Clone, Debug, Default)]
pub struct ViewArena {
    views: Vec<View>,
    index: HashMap<View, ViewId>,
}

impl ViewArena {
    pub fn new() -> ViewArena {
        ViewArena::default()
    }

    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }

    fn intern(&mut self, v: View) -> ViewId {
        if let Some(&id) = self.index.get(&v) {
            return id;
        }
        let id = ViewId(self.views.len() as u32);
        self.views.push(v.clone());
        self.index.insert(v, id);
        id
    }

    pub fn input(&mut self, v: ValueId) -> ViewId {
        self.intern(View::Input(v))
    }

    pub fn set(&mut self, mut entries: Vec<(AgentId, ViewId)>) -> ViewId {
        entries.sort_unstable();
        entries.dedup();
        self.intern(View::Set(entries))
    }

    /// The id of `v` if it has been interned.
    pub fn lookup(&self, v: &View) -> Option<ViewId> {
        self.index.get(v).copied()
    }

    pub fn get(&self, id: ViewId) -> &View {
        &self.views[id.0 as usize]
    }

    /// Number of communication rounds folded into the view.
    pub fn depth(&self, id: ViewId) -> usize {
        match self.get(id) {
            View::Input(_) => 0,
            View::Set(es) => 1 + es.first().map_or(0, |&(_, c)| self.depth(c)),
        }
    }

    /// Flattens a view to the `(agent, input)` pairs it carries.
    pub fn car(&self, id: ViewId) -> Vec<(AgentId, ValueId)> {
        let mut out = Vec::new();
        self.car_into(id, &mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn car_into(&self, id: ViewId, out: &mut Vec<(AgentId, ValueId)>) {
        if let View::Set(es) = self.get(id) {
            for &(p, child) in es {
                match self.get(child) {
                    View::Input(v) => out.push((p, *v)),
                    View::Set(_) => self.car_into(child, out),
                }
            }
        }
    }

    /// Agents appearing in `car(id)`: `q ∈ view(x)`.
    pub fn car_agents(&self, id: ViewId) -> AgentSet {
        AgentSet::from_agents(self.car(id).into_iter().map(|(a, _)| a))
    }

    /// The entry for `a` at the top level of a set view.
    pub fn entry(&self, id: ViewId, a: AgentId) -> Option<ViewId> {
        match self.get(id) {
            View::Input(_) => None,
            View::Set(es) => es.iter().find(|e| e.0 == a).map(|e| e.1),
        }
    }

    pub fn render(&self, id: ViewId, ws: &Workspace) -> String {
        match self.get(id) {
            View::Input(v) => ws.values[v.0].clone(),
            View::Set(es) => {
                let parts: Vec<String> = es
                    .iter()
                    .map(|&(p, c)| format!("({} {})", ws.agents[p.0], self.render(c, ws)))
                    .collect();
                format!("{{{}}}", parts.join(" "))
            }
        }
    }
}

/// `view^r_a(I, γ_1, …, γ_r)` for every agent `a`, where `inputs[a] = i_a`.
pub fn compute_views(
    arena: &mut ViewArena,
    inputs: &[ValueId],
    gammas: &[OrderedPartition],
) -> Vec<ViewId> {
    let mut cur: Vec<ViewId> = inputs.iter().map(|&v| arena.input(v)).collect();
    for gamma in gammas {
        cur = (0..inputs.len())
            .map(|a| {
                let seen = gamma.seen_by(AgentId(a));
                arena.set(seen.iter().map(|p| (p, cur[p.0])).collect())
            })
            .collect();
    }
    cur
}
