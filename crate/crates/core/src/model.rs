//! Simplicial models, action models, product update and morphisms.

use std::collections::HashMap;

use thiserror::Error;

use crate::complex::{AgentId, ChromaticComplex, ComplexError, Vertex};
use crate::logic::{AtomicProp, Checker, FormulaId, Formulas, LogicError, ValueId};
use crate::simulation::Relation;

/// The agent set Π and input values V^in shared by every model of one analysis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Workspace {
    pub agents: Vec<String>,
    pub values: Vec<String>,
}

impl Workspace {
    pub fn new(agents: Vec<String>, values: Vec<String>) -> Workspace {
        Workspace { agents, values }
    }

    /// Agents `0..n_agents` and values `0..n_values`, named by their indices.
    pub fn numbered(n_agents: usize, n_values: usize) -> Workspace {
        Workspace {
            agents: (0..n_agents).map(|i| i.to_string()).collect(),
            values: (0..n_values).map(|i| i.to_string()).collect(),
        }
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn n_values(&self) -> usize {
        self.values.len()
    }

    pub fn agent_index(&self, name: &str) -> Option<usize> {
        self.agents.iter().position(|a| a == name)
    }

    pub fn value_index(&self, name: &str) -> Option<usize> {
        self.values.iter().position(|v| v == name)
    }

    /// All atoms `ip_a^v`, ordered by agent then value.
    pub fn atoms(&self) -> Vec<AtomicProp> {
        let mut out = Vec::with_capacity(self.n_agents() * self.n_values());
        for a in 0..self.n_agents() {
            for v in 0..self.n_values() {
                out.push(AtomicProp::new(a, v));
            }
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("{0}")]
    Usage(String),
    #[error("models are over different workspaces")]
    WorkspaceMismatch,
    #[error("precondition of action {0} uses distributed knowledge and is outside L_K")]
    PreconditionOutsideLk(usize),
}

/// A pure chromatic complex whose vertices carry input atoms of their own color.
#[derive(Clone, Debug)]
pub struct SimplicialModel {
    workspace: Workspace,
    complex: ChromaticComplex,
    labels: Vec<Vec<AtomicProp>>,
}

impl SimplicialModel {
    pub fn new(
        workspace: Workspace,
        complex: ChromaticComplex,
    ) -> Result<SimplicialModel, ModelError> {
        if complex.n_agents() != workspace.n_agents() {
            return Err(ModelError::Usage(format!(
                "complex has {} colors but the workspace has {} agents",
                complex.n_agents(),
                workspace.n_agents()
            )));
        }
        for (i, v) in complex.vertices().iter().enumerate() {
            if let Some(p) = v.atoms.iter().find(|p| p.value.0 >= workspace.n_values()) {
                return Err(ModelError::Usage(format!(
                    "vertex {i}: atom value {} is not a workspace value",
                    p.value
                )));
            }
        }
        let labels = complex
            .facets()
            .iter()
            .map(|f| {
                let mut l: Vec<AtomicProp> = f
                    .vertices()
                    .iter()
                    .flat_map(|&v| complex.vertex(v).atoms.iter().copied())
                    .collect();
                l.sort();
                l
            })
            .collect();
        Ok(SimplicialModel {
            workspace,
            complex,
            labels,
        })
    }

    pub fn workspace(&self) -> &Workspace {
        &self.workspace
    }

    pub fn complex(&self) -> &ChromaticComplex {
        &self.complex
    }

    pub fn facet_count(&self) -> usize {
        self.complex.facet_count()
    }

    /// l(X), sorted.
    pub fn facet_label(&self, x: usize) -> &[AtomicProp] {
        &self.labels[x]
    }

    pub fn facet_has_atom(&self, x: usize, p: AtomicProp) -> bool {
        let v = self.complex.facet(x).vertex(p.agent);
        self.complex.vertex(v).atoms.binary_search(&p).is_ok()
    }

    /// The unique input value of each agent in facet `x`, when every vertex
    /// carries exactly one atom.
    pub fn facet_inputs(&self, x: usize) -> Option<Vec<ValueId>> {
        self.complex
            .facet(x)
            .vertices()
            .iter()
            .map(|&v| match self.complex.vertex(v).atoms.as_slice() {
                [p] => Some(p.value),
                _ => None,
            })
            .collect()
    }
}

/// A chromatic complex of actions with a precondition per facet.
#[derive(Clone, Debug)]
pub struct ActionModel {
    workspace: Workspace,
    complex: ChromaticComplex,
    formulas: Formulas,
    pre: Vec<FormulaId>,
}

impl ActionModel {
    pub fn new(
        workspace: Workspace,
        complex: ChromaticComplex,
        formulas: Formulas,
        pre: Vec<FormulaId>,
    ) -> Result<ActionModel, ModelError> {
        if complex.n_agents() != workspace.n_agents() {
            return Err(ModelError::Usage(
                "action complex colors do not match the workspace agents".into(),
            ));
        }
        if pre.len() != complex.facet_count() {
            return Err(ModelError::Usage(format!(
                "{} preconditions for {} actions",
                pre.len(),
                complex.facet_count()
            )));
        }
        if let Some(i) = complex.vertices().iter().position(|v| !v.atoms.is_empty()) {
            return Err(ModelError::Usage(format!(
                "action vertex {i} carries atoms"
            )));
        }
        if let Some(i) = pre
            .iter()
            .position(|&p| !formulas.classify(p).is_k_language())
        {
            return Err(ModelError::PreconditionOutsideLk(i));
        }
        Ok(ActionModel {
            workspace,
            complex,
            formulas,
            pre,
        })
    }

    pub fn workspace(&self) -> &Workspace {
        &self.workspace
    }

    pub fn complex(&self) -> &ChromaticComplex {
        &self.complex
    }

    pub fn formulas(&self) -> &Formulas {
        &self.formulas
    }

    pub fn pre(&self, action: usize) -> FormulaId {
        self.pre[action]
    }

    pub fn facet_count(&self) -> usize {
        self.complex.facet_count()
    }
}

/// The input model over `agents × values`: all color-complete selections.
pub fn build_input_model(workspace: &Workspace) -> Result<SimplicialModel, ModelError> {
    let n = workspace.n_agents();
    let m = workspace.n_values();
    if n == 0 || m == 0 {
        return Err(ModelError::Usage(
            "an input model needs at least one agent and one value".into(),
        ));
    }
    let assignments = all_assignments(n, m);
    build_input_model_on(workspace, &assignments)
}

/// An input model restricted to the given input assignments (one value per agent).
pub fn build_input_model_on(
    workspace: &Workspace,
    assignments: &[Vec<ValueId>],
) -> Result<SimplicialModel, ModelError> {
    let n = workspace.n_agents();
    let m = workspace.n_values();
    if n == 0 || m == 0 {
        return Err(ModelError::Usage(
            "an input model needs at least one agent and one value".into(),
        ));
    }
    let mut ids: HashMap<(usize, ValueId), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut facets = Vec::with_capacity(assignments.len());
    for inputs in assignments {
        if inputs.len() != n || inputs.iter().any(|v| v.0 >= m) {
            return Err(ModelError::Usage(format!(
                "input assignment {inputs:?} does not fit the workspace"
            )));
        }
        let facet = inputs
            .iter()
            .enumerate()
            .map(|(a, &v)| {
                *ids.entry((a, v)).or_insert_with(|| {
                    vertices.push(
                        Vertex::new(AgentId(a), vec![AtomicProp::new(a, v.0)])
                            .named(format!("{}:{}", workspace.agents[a], workspace.values[v.0])),
                    );
                    vertices.len() - 1
                })
            })
            .collect();
        facets.push(facet);
    }
    let complex = ChromaticComplex::new(n, vertices, facets)?;
    SimplicialModel::new(workspace.clone(), complex)
}

/// Every map `agents → values`, in lexicographic order (agent 0 most significant).
pub fn all_assignments(n_agents: usize, n_values: usize) -> Vec<Vec<ValueId>> {
    let mut out = Vec::new();
    let mut cur = vec![ValueId(0); n_agents];
    loop {
        out.push(cur.clone());
        let mut i = n_agents;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i].0 += 1;
            if cur[i].0 < n_values {
                break;
            }
            cur[i].0 = 0;
        }
    }
}

/// Result of a product update with provenance.
#[derive(Clone, Debug)]
pub struct ProductUpdate {
    pub model: SimplicialModel,
    /// For each output facet, its (model facet, action facet) pair.
    pub facet_sources: Vec<(usize, usize)>,
    /// For each output vertex, its (model vertex, action vertex) pair.
    pub vertex_sources: Vec<(usize, usize)>,
}

/// `M[A]`: facets `X ×_Π T` for every pair with `M, X ⊨ pre(T)`.
pub fn product_update(m: &SimplicialModel, a: &ActionModel) -> Result<ProductUpdate, ModelError> {
    if m.workspace() != a.workspace() {
        return Err(ModelError::WorkspaceMismatch);
    }
    let n = m.workspace().n_agents();
    let mut checker = Checker::new(m, a.formulas());
    let mut truth = Vec::with_capacity(a.facet_count());
    for t in 0..a.facet_count() {
        truth.push(checker.truth_set(a.pre(t))?.clone());
    }
    let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut vertex_sources = Vec::new();
    let mut facets = Vec::new();
    let mut facet_sources = Vec::new();
    for x in 0..m.facet_count() {
        let fx = m.complex().facet(x);
        for (t, set) in truth.iter().enumerate() {
            if !set.contains(x) {
                continue;
            }
            let ft = a.complex().facet(t);
            let facet: Vec<usize> = (0..n)
                .map(|c| {
                    let key = (fx.vertex(AgentId(c)), ft.vertex(AgentId(c)));
                    *ids.entry(key).or_insert_with(|| {
                        let src = m.complex().vertex(key.0);
                        let mut v = Vertex::new(src.color, src.atoms.clone());
                        let act = a.complex().vertex(key.1);
                        v.name = match (&src.name, &act.name) {
                            (Some(s), Some(t)) => Some(format!("{s}|{t}")),
                            (Some(s), None) => Some(s.clone()),
                            (None, Some(t)) => Some(t.clone()),
                            (None, None) => None,
                        };
                        vertices.push(v);
                        vertex_sources.push(key);
                        vertices.len() - 1
                    })
                })
                .collect();
            facets.push(facet);
            facet_sources.push((x, t));
        }
    }
    let complex = ChromaticComplex::new(n, vertices, facets)?;
    Ok(ProductUpdate {
        model: SimplicialModel::new(m.workspace().clone(), complex)?,
        facet_sources,
        vertex_sources,
    })
}

/// A vertex map between two simplicial models.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morphism {
    pub vmap: Vec<usize>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MorphismError {
    #[error("vertex map covers {got} vertices, the source has {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("vertex {0} is mapped outside the target")]
    OutOfRange(usize),
    #[error("vertex {0} changes color")]
    Color(usize),
    #[error("vertex {0} changes label")]
    Label(usize),
    #[error("facet {0} is not mapped onto a facet")]
    Facet(usize),
    #[error("models are over different workspaces")]
    Workspace,
}

impl Morphism {
    /// Checks that the map preserves colors, labels and facets.
    pub fn check(
        &self,
        m: &SimplicialModel,
        target: &SimplicialModel,
    ) -> Result<(), MorphismError> {
        if m.workspace() != target.workspace() {
            return Err(MorphismError::Workspace);
        }
        let (src, dst) = (m.complex(), target.complex());
        if self.vmap.len() != src.vertices().len() {
            return Err(MorphismError::WrongLength {
                expected: src.vertices().len(),
                got: self.vmap.len(),
            });
        }
        for (v, &w) in self.vmap.iter().enumerate() {
            if w >= dst.vertices().len() {
                return Err(MorphismError::OutOfRange(v));
            }
            if src.vertex(v).color != dst.vertex(w).color {
                return Err(MorphismError::Color(v));
            }
            if src.vertex(v).atoms != dst.vertex(w).atoms {
                return Err(MorphismError::Label(v));
            }
        }
        for x in 0..src.facet_count() {
            if self.image_facet(m, target, x).is_none() {
                return Err(MorphismError::Facet(x));
            }
        }
        Ok(())
    }

    /// Index of f(X) in the target, if it is a facet.
    pub fn image_facet(
        &self,
        m: &SimplicialModel,
        target: &SimplicialModel,
        x: usize,
    ) -> Option<usize> {
        let image: Vec<usize> = m
            .complex()
            .facet(x)
            .vertices()
            .iter()
            .map(|&v| self.vmap[v])
            .collect();
        target.complex().find_facet(&image)
    }

    pub fn identity(m: &SimplicialModel) -> Morphism {
        Morphism {
            vmap: (0..m.complex().vertices().len()).collect(),
        }
    }
}

/// `graph(f) = {(X, f(X))}`.
pub fn graph_of_morphism(
    m: &SimplicialModel,
    target: &SimplicialModel,
    f: &Morphism,
) -> Result<Relation, MorphismError> {
    f.check(m, target)?;
    let mut r = Relation::empty(m.facet_count(), target.facet_count());
    for x in 0..m.facet_count() {
        let y = f.image_facet(m, target, x).ok_or(MorphismError::Facet(x))?;
        r.insert(x, y);
    }
    Ok(r)
}

/// Searches for a morphism `m → target` by backtracking over facet images.
///
/// Each step picks the open facet (one with an unassigned vertex) that has the
/// fewest target facets consistent with the current partial map, so dead ends
/// are found as soon as some facet runs out of candidates. Returns `None` only
/// after the search space is exhausted.
pub fn find_morphism(
    m: &SimplicialModel,
    target: &SimplicialModel,
) -> Result<Option<Morphism>, ModelError> {
    if m.workspace() != target.workspace() {
        return Err(ModelError::WorkspaceMismatch);
    }
    let (src, dst) = (m.complex(), target.complex());
    let key = |c: &ChromaticComplex, x: usize| -> Vec<Vec<AtomicProp>> {
        c.facet(x)
            .vertices()
            .iter()
            .map(|&v| c.vertex(v).atoms.clone())
            .collect()
    };
    let mut by_key: HashMap<Vec<Vec<AtomicProp>>, Vec<usize>> = HashMap::new();
    for y in 0..dst.facet_count() {
        by_key.entry(key(dst, y)).or_default().push(y);
    }
    let mut candidates = Vec::with_capacity(src.facet_count());
    for x in 0..src.facet_count() {
        match by_key.get(&key(src, x)) {
            Some(c) => candidates.push(c.clone()),
            None => return Ok(None),
        }
    }
    let mut search = Search {
        src,
        dst,
        candidates,
        vmap: vec![None; src.vertices().len()],
        assigned: vec![0; src.facet_count()],
    };
    if search.run() {
        Ok(Some(Morphism {
            vmap: search
                .vmap
                .into_iter()
                .map(|v| v.expect("complete"))
                .collect(),
        }))
    } else {
        Ok(None)
    }
}

struct Search<'a> {
    src: &'a ChromaticComplex,
    dst: &'a ChromaticComplex,
    candidates: Vec<Vec<usize>>,
    vmap: Vec<Option<usize>>,
    /// Number of assigned vertices per source facet.
    assigned: Vec<usize>,
}

impl Search<'_> {
    fn consistent(&self, x: usize, y: usize) -> bool {
        let fx = self.src.facet(x).vertices();
        let fy = self.dst.facet(y).vertices();
        fx.iter()
            .zip(fy)
            .all(|(&v, &w)| self.vmap[v].is_none_or(|img| img == w))
    }

    fn run(&mut self) -> bool {
        let n = self.src.n_agents();
        // (facet, consistent candidates); ties go to the facet with more assigned vertices
        let mut best: Option<(usize, usize)> = None;
        for x in 0..self.src.facet_count() {
            if self.assigned[x] == n {
                continue;
            }
            let count = self.candidates[x]
                .iter()
                .filter(|&&y| self.consistent(x, y))
                .count();
            if best.is_none_or(|(b, c)| {
                count < c || (count == c && self.assigned[x] > self.assigned[b])
            }) {
                best = Some((x, count));
            }
            if count == 0 {
                return false;
            }
        }
        let Some((x, _)) = best else {
            return true;
        };
        let options: Vec<usize> = self.candidates[x]
            .iter()
            .copied()
            .filter(|&y| self.consistent(x, y))
            .collect();
        for y in options {
            let newly: Vec<(usize, usize)> = self
                .src
                .facet(x)
                .vertices()
                .iter()
                .zip(self.dst.facet(y).vertices())
                .filter(|(&v, _)| self.vmap[v].is_none())
                .map(|(&v, &w)| (v, w))
                .collect();
            for &(v, w) in &newly {
                self.vmap[v] = Some(w);
                for &g in self.src.facets_of_vertex(v) {
                    self.assigned[g] += 1;
                }
            }
            // facets closed by this step must land on target facets
            let closed_ok = newly.iter().all(|&(v, _)| {
                self.src.facets_of_vertex(v).iter().all(|&g| {
                    self.assigned[g] < n || {
                        let image: Vec<usize> = self
                            .src
                            .facet(g)
                            .vertices()
                            .iter()
                            .map(|&u| self.vmap[u].expect("assigned"))
                            .collect();
                        self.dst.find_facet(&image).is_some()
                    }
                })
            });
            if closed_ok && self.run() {
                return true;
            }
            for &(v, _) in &newly {
                self.vmap[v] = None;
                for &g in self.src.facets_of_vertex(v) {
                    self.assigned[g] -= 1;
                }
            }
        }
        false
    }
}
