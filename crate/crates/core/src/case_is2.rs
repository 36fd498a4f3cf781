//! Two-round immediate snapshot against 2-set agreement for three agents.
//!
//! `R^{p,q}` relates pairs of vertices of `IIS²` whose joint decisions
//! `(i_p, i_q)` must be excluded; the explicit relation built from it is a
//! total D-simulation of `IIS²` by `I[SA_2]`.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::complex::{AgentId, AgentSet};
use crate::generators::{build_iis, build_sa, Instance, IsProtocol, SaTask, View, ViewId};
use crate::logic::ValueId;
use crate::model::{
    build_input_model, build_input_model_on, ModelError, SimplicialModel, Workspace,
};
use crate::simulation::Relation;

/// Per-vertex agent, input and flattened-view agent set of an `IIS²` model.
#[derive(Clone, Debug)]
pub struct VertexViewIndex {
    pub agent: Vec<AgentId>,
    pub input: Vec<ValueId>,
    /// Agents `q` with `q ∈ view(x)`.
    pub sees: Vec<AgentSet>,
}

impl VertexViewIndex {
    pub fn new(iis: &Instance<IsProtocol>) -> VertexViewIndex {
        let n = iis.model.complex().vertices().len();
        let mut idx = VertexViewIndex {
            agent: Vec::with_capacity(n),
            input: Vec::with_capacity(n),
            sees: Vec::with_capacity(n),
        };
        for v in 0..n {
            let vv = iis.view_vertex(v);
            idx.agent.push(vv.agent);
            idx.input.push(vv.input);
            idx.sees.push(iis.source.arena.car_agents(vv.view));
        }
        idx
    }
}

/// Ordered vertex pairs `(x, y)` spanning an edge of some facet.
fn ordered_edges(m: &SimplicialModel) -> Vec<(usize, usize)> {
    let mut set = HashSet::new();
    for f in m.complex().facets() {
        for &x in f.vertices() {
            for &y in f.vertices() {
                if x != y {
                    set.insert((x, y));
                }
            }
        }
    }
    let mut out: Vec<_> = set.into_iter().collect();
    out.sort_unstable();
    out
}

/// The layers `R_0 ⊆ R_1 ⊆ … ⊆ R_N` (with `R_{N+1} = R_N`) and `R = R_N ∖ R_0`.
#[derive(Clone, Debug, Serialize)]
pub struct RpqRelation {
    pub p: usize,
    pub q: usize,
    pub layers: Vec<Vec<(usize, usize)>>,
    #[serde(rename = "final")]
    pub result: Vec<(usize, usize)>,
}

impl RpqRelation {
    /// Step at which the layers stop growing.
    pub fn stabilized_at(&self) -> usize {
        self.layers.len() - 1
    }

    /// Pairs added by each layer; entry 0 is `|R_0|`.
    pub fn additions(&self) -> Vec<usize> {
        let mut prev = 0;
        self.layers
            .iter()
            .map(|l| {
                let d = l.len() - prev;
                prev = l.len();
                d
            })
            .collect()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.result.binary_search(&(x, y)).is_ok()
    }
}

/// Builds `R^{p,q}` for two distinct agents. For 3 agents every 2-simplex is
/// a facet, so the witness `z` of a new pair `(x, y)` is the third vertex of
/// a facet containing both.
pub fn build_rpq(
    iis: &Instance<IsProtocol>,
    index: &VertexViewIndex,
    p: usize,
    q: usize,
) -> Result<RpqRelation, ModelError> {
    let n = iis.model.workspace().n_agents();
    if n != 3 || iis.source.rounds != 2 {
        return Err(ModelError::Usage(
            "R^{p,q} is defined on two-round runs of three agents".into(),
        ));
    }
    if p == q || p >= n || q >= n {
        return Err(ModelError::Usage(format!(
            "need two distinct agents, got {p} and {q}"
        )));
    }
    let (pa, qa) = (AgentId(p), AgentId(q));
    let mut current: HashSet<(usize, usize)> = ordered_edges(&iis.model)
        .into_iter()
        .filter(|&(x, y)| !index.sees[x].contains(pa) || !index.sees[y].contains(qa))
        .collect();
    let sorted = |s: &HashSet<(usize, usize)>| {
        let mut v: Vec<_> = s.iter().copied().collect();
        v.sort_unstable();
        v
    };
    let r0 = current.clone();
    let mut layers = vec![sorted(&current)];
    let facets = iis.model.complex().facets();
    loop {
        let added: HashSet<(usize, usize)> = facets
            .par_iter()
            .flat_map_iter(|f| {
                let vs = f.vertices();
                let mut out = Vec::new();
                for i in 0..3 {
                    for j in 0..3 {
                        if i == j {
                            continue;
                        }
                        let (x, y, z) = (vs[i], vs[j], vs[3 - i - j]);
                        if !current.contains(&(x, y))
                            && current.contains(&(x, z))
                            && current.contains(&(z, y))
                        {
                            out.push((x, y));
                        }
                    }
                }
                out
            })
            .collect();
        if added.is_empty() {
            break;
        }
        current.extend(added);
        layers.push(sorted(&current));
    }
    let mut result: Vec<_> = current.difference(&r0).copied().collect();
    result.sort_unstable();
    Ok(RpqRelation {
        p,
        q,
        layers,
        result,
    })
}

/// Facets of `IIS²_a`: those whose first-round first block contains `a`.
pub fn agent_subcomplex(iis: &Instance<IsProtocol>, a: AgentId) -> Vec<usize> {
    (0..iis.model.facet_count())
        .filter(|&x| {
            iis.facet_spec(x)
                .gammas
                .iter()
                .any(|seq| iis.source.partitions[seq[0]].first_block().contains(a))
        })
        .collect()
}

/// Pairs of `R^{p,q}` lying on an edge of `IIS²_p` or `IIS²_q`; empty when the
/// location property holds.
pub fn location_violations(iis: &Instance<IsProtocol>, rpq: &RpqRelation) -> Vec<(usize, usize)> {
    let mut edges = HashSet::new();
    for a in [rpq.p, rpq.q] {
        for x in agent_subcomplex(iis, AgentId(a)) {
            let vs = iis.model.complex().facet(x).vertices();
            for &u in vs {
                for &w in vs {
                    edges.insert((u, w));
                }
            }
        }
    }
    rpq.result
        .iter()
        .copied()
        .filter(|e| edges.contains(e))
        .collect()
}

/// The explicit relation between `IIS²` and `I[SA_2]`: equal inputs, every
/// decision visible in the decider's view and, when all inputs differ, no
/// `R^{p,q}`-related pair deciding `(i_p, i_q)`.
pub fn explicit_sa2_relation(
    iis: &Instance<IsProtocol>,
    sa: &Instance<SaTask>,
    rpqs: &[RpqRelation],
    with_exclusion: bool,
) -> Result<Relation, ModelError> {
    let ws = iis.model.workspace();
    if ws.n_agents() != 3 || ws.n_values() != 3 || sa.source.k != 2 {
        return Err(ModelError::Usage(
            "the explicit relation is defined for three agents, three values and k = 2".into(),
        ));
    }
    let index = VertexViewIndex::new(iis);
    let mut by_label: HashMap<&[crate::logic::AtomicProp], Vec<usize>> = HashMap::new();
    for y in 0..sa.model.facet_count() {
        by_label.entry(sa.model.facet_label(y)).or_default().push(y);
    }
    let arena = &iis.source.arena;
    let rows: Vec<Vec<usize>> = (0..iis.model.facet_count())
        .into_par_iter()
        .map(|x| {
            let verts = iis.model.complex().facet(x).vertices();
            let inputs: Vec<ValueId> = verts.iter().map(|&v| index.input[v]).collect();
            let seen: Vec<Vec<ValueId>> = verts
                .iter()
                .map(|&v| {
                    arena
                        .car(iis.view_vertex(v).view)
                        .into_iter()
                        .map(|(_, i)| i)
                        .collect()
                })
                .collect();
            let distinct =
                inputs[0] != inputs[1] && inputs[1] != inputs[2] && inputs[0] != inputs[2];
            let mut related = Vec::new();
            for &y in by_label
                .get(iis.model.facet_label(x))
                .map_or(&[][..], |v| v)
            {
                let d = sa.decisions(y);
                if !(0..3).all(|a| seen[a].contains(&d[a])) {
                    continue;
                }
                let excluded = with_exclusion
                    && distinct
                    && rpqs.iter().any(|r| {
                        (0..3).any(|a| {
                            (0..3).any(|b| {
                                a != b
                                    && r.contains(verts[a], verts[b])
                                    && d[a] == inputs[r.p]
                                    && d[b] == inputs[r.q]
                            })
                        })
                    });
                if !excluded {
                    related.push(y);
                }
            }
            related
        })
        .collect();
    let mut rel = Relation::empty(iis.model.facet_count(), sa.model.facet_count());
    for (x, ys) in rows.into_iter().enumerate() {
        for y in ys {
            rel.insert(x, y);
        }
    }
    Ok(rel)
}

/// Facets `X ∈ IIS²_p` that are not related to the facet where everyone
/// decides `p`'s input.
pub fn totality_construction_failures(
    iis: &Instance<IsProtocol>,
    sa: &Instance<SaTask>,
    s: &Relation,
) -> Vec<(usize, usize)> {
    let mut by_decisions: HashMap<(Vec<ValueId>, Vec<ValueId>), usize> = HashMap::new();
    for y in 0..sa.model.facet_count() {
        let inputs = sa.model.facet_inputs(y).expect("input labels");
        by_decisions.insert((inputs, sa.decisions(y).to_vec()), y);
    }
    let mut out = Vec::new();
    for p in 0..iis.model.workspace().n_agents() {
        for x in agent_subcomplex(iis, AgentId(p)) {
            let inputs = iis.model.facet_inputs(x).expect("input labels");
            let key = (inputs.clone(), vec![inputs[p]; inputs.len()]);
            match by_decisions.get(&key) {
                Some(&y) if s.contains(x, y) => {}
                _ => out.push((p, x)),
            }
        }
    }
    out
}

/// The automorphism of a single-input `IIS²` with inputs `i_a = a` that swaps
/// agents `p` and `q` (and the matching values), as a vertex map.
pub fn swap_automorphism(
    iis: &Instance<IsProtocol>,
    p: usize,
    q: usize,
) -> Result<Vec<usize>, ModelError> {
    let sigma = |a: usize| {
        if a == p {
            q
        } else if a == q {
            p
        } else {
            a
        }
    };
    let arena = &iis.source.arena;
    let mut memo: HashMap<ViewId, Option<ViewId>> = HashMap::new();
    fn permute(
        arena: &crate::generators::ViewArena,
        id: ViewId,
        sigma: &dyn Fn(usize) -> usize,
        memo: &mut HashMap<ViewId, Option<ViewId>>,
    ) -> Option<ViewId> {
        if let Some(&r) = memo.get(&id) {
            return r;
        }
        let image = match arena.get(id) {
            View::Input(v) => Some(View::Input(ValueId(sigma(v.0)))),
            View::Set(es) => es
                .iter()
                .map(|&(a, c)| permute(arena, c, sigma, memo).map(|c2| (AgentId(sigma(a.0)), c2)))
                .collect::<Option<Vec<_>>>()
                .map(|mut es| {
                    es.sort_unstable();
                    View::Set(es)
                }),
        };
        let r = image.and_then(|v| arena.lookup(&v));
        memo.insert(id, r);
        r
    }
    let mut by_view: HashMap<(AgentId, ViewId), usize> = HashMap::new();
    let nv = iis.model.complex().vertices().len();
    for v in 0..nv {
        let vv = iis.view_vertex(v);
        by_view.insert((vv.agent, vv.view), v);
    }
    let mut map = Vec::with_capacity(nv);
    for v in 0..nv {
        let vv = iis.view_vertex(v);
        let image = permute(arena, vv.view, &sigma, &mut memo)
            .and_then(|w| by_view.get(&(AgentId(sigma(vv.agent.0)), w)).copied())
            .ok_or_else(|| {
                ModelError::Usage(format!(
                    "vertex {v} has no image under the swap of {p} and {q}"
                ))
            })?;
        map.push(image);
    }
    for x in 0..iis.model.facet_count() {
        let image: Vec<usize> = iis
            .model
            .complex()
            .facet(x)
            .vertices()
            .iter()
            .map(|&v| map[v])
            .collect();
        if iis.model.complex().find_facet(&image).is_none() {
            return Err(ModelError::Usage(format!(
                "facet {x} is not mapped onto a facet"
            )));
        }
    }
    Ok(map)
}

/// Pairs where `R^{p,q}(x, y)` and `R^{q,p}(σx, σy)` disagree.
pub fn swap_symmetry_mismatches(
    iis: &Instance<IsProtocol>,
    index: &VertexViewIndex,
    p: usize,
    q: usize,
) -> Result<Vec<(usize, usize)>, ModelError> {
    let sigma = swap_automorphism(iis, p, q)?;
    let forward = build_rpq(iis, index, p, q)?;
    let backward = build_rpq(iis, index, q, p)?;
    let mapped: HashSet<(usize, usize)> = forward
        .result
        .iter()
        .map(|&(x, y)| (sigma[x], sigma[y]))
        .collect();
    let other: HashSet<(usize, usize)> = backward.result.iter().copied().collect();
    let mut out: Vec<_> = mapped.symmetric_difference(&other).copied().collect();
    out.sort_unstable();
    Ok(out)
}

/// The three-agent, three-value workspace with `V^in = Π`.
pub fn case_workspace() -> Workspace {
    Workspace::numbered(3, 3)
}

/// `IIS²` and `I[SA_2]`, on all 27 input facets or on the single input `i_a = a`.
pub fn build_case(
    single_input: bool,
) -> Result<(Instance<IsProtocol>, Instance<SaTask>), ModelError> {
    let ws = case_workspace();
    let input = if single_input {
        build_input_model_on(&ws, &[(0..3).map(ValueId).collect()])?
    } else {
        build_input_model(&ws)?
    };
    Ok((build_iis(2, &input)?, build_sa(2, &input)?))
}

/// All `R^{p,q}` with `p < q`.
pub fn all_rpq(iis: &Instance<IsProtocol>) -> Result<Vec<RpqRelation>, ModelError> {
    let index = VertexViewIndex::new(iis);
    let n = iis.model.workspace().n_agents();
    let mut out = Vec::new();
    for p in 0..n {
        for q in p + 1..n {
            out.push(build_rpq(iis, &index, p, q)?);
        }
    }
    Ok(out)
}
