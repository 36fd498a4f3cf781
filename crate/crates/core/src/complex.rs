//! Chromatic simplicial complexes.
//!
//! Only facets are stored. Every facet of a well-formed complex holds exactly
//! one vertex per color, sorted by color, so `facet.vertex(c)` is the vertex of
//! color `c`. Lower-dimensional simplices are the subsets of facets and are
//! never materialized.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::logic::AtomicProp;

/// Index of an agent (a color) in the workspace agent list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub usize);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Largest agent count supported by [`AgentSet`].
pub const MAX_AGENTS: usize = 64;

/// A set of agents, stored as a bitmask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentSet(pub u64);

impl AgentSet {
    pub const EMPTY: AgentSet = AgentSet(0);

    pub fn full(n: usize) -> AgentSet {
        debug_assert!(n <= MAX_AGENTS);
        if n == MAX_AGENTS {
            AgentSet(u64::MAX)
        } else {
            AgentSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(a: AgentId) -> AgentSet {
        AgentSet(1u64 << a.0)
    }

    pub fn from_agents<I: IntoIterator<Item = AgentId>>(agents: I) -> AgentSet {
        agents.into_iter().fold(AgentSet::EMPTY, |s, a| s.with(a))
    }

    pub fn with(self, a: AgentId) -> AgentSet {
        AgentSet(self.0 | (1u64 << a.0))
    }

    pub fn contains(self, a: AgentId) -> bool {
        a.0 < MAX_AGENTS && self.0 & (1u64 << a.0) != 0
    }

    pub fn is_subset(self, other: AgentSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: AgentSet) -> AgentSet {
        AgentSet(self.0 | other.0)
    }

    pub fn intersection(self, other: AgentSet) -> AgentSet {
        AgentSet(self.0 & other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = AgentId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(AgentId(i))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub color: AgentId,
    /// Sorted, duplicate-free.
    pub atoms: Vec<AtomicProp>,
    /// Free-form tag used for diagnostics and file output.
    pub name: Option<String>,
}

impl Vertex {
    pub fn new(color: AgentId, mut atoms: Vec<AtomicProp>) -> Vertex {
        atoms.sort();
        atoms.dedup();
        Vertex {
            color,
            atoms,
            name: None,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Vertex {
        self.name = Some(name.into());
        self
    }
}

/// Vertex ids of a facet, ordered by color.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Facet(Vec<usize>);

impl Facet {
    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    /// The vertex of color `a`. Only meaningful for facets of a validated complex.
    pub fn vertex(&self, a: AgentId) -> usize {
        self.0[a.0]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A facet sharing at least one vertex with another one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Neighbor {
    pub facet: usize,
    pub shared: AgentSet,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    ColorOutOfRange { vertex: usize, color: AgentId },
    ForeignAtom { vertex: usize, atom: AtomicProp },
    UnknownVertex { facet: usize, vertex: usize },
    DuplicateColor { facet: usize, color: AgentId },
    Impure { facet: usize, size: usize },
    DuplicateFacet { facet: usize, first: usize },
    OrphanVertex { vertex: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ColorOutOfRange { vertex, color } => {
                write!(f, "vertex {vertex}: color {color} is not an agent")
            }
            Violation::ForeignAtom { vertex, atom } => write!(
                f,
                "vertex {vertex}: atom of agent {} on a vertex of another color",
                atom.agent
            ),
            Violation::UnknownVertex { facet, vertex } => {
                write!(f, "facet {facet}: unknown vertex {vertex}")
            }
            Violation::DuplicateColor { facet, color } => {
                write!(f, "facet {facet}: color {color} appears more than once")
            }
            Violation::Impure { facet, size } => {
                write!(f, "facet {facet}: has {size} vertices")
            }
            Violation::DuplicateFacet { facet, first } => {
                write!(f, "facet {facet}: duplicates facet {first}")
            }
            Violation::OrphanVertex { vertex } => {
                write!(f, "vertex {vertex}: not contained in any facet")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("malformed complex: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("facet index {0} out of range")]
    FacetOutOfRange(usize),
    #[error("agent count {0} exceeds the supported maximum of {MAX_AGENTS}")]
    TooManyAgents(usize),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Checks every structural invariant of a chromatic complex given as raw parts.
///
/// Facets are taken as listed (any order of vertex ids).
pub fn validate_complex(
    n_agents: usize,
    vertices: &[Vertex],
    facets: &[Vec<usize>],
) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, v) in vertices.iter().enumerate() {
        if v.color.0 >= n_agents {
            out.push(Violation::ColorOutOfRange {
                vertex: i,
                color: v.color,
            });
        }
        for atom in &v.atoms {
            if atom.agent != v.color {
                out.push(Violation::ForeignAtom {
                    vertex: i,
                    atom: *atom,
                });
            }
        }
    }
    let mut covered = vec![false; vertices.len()];
    let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
    for (fi, facet) in facets.iter().enumerate() {
        let mut colors = AgentSet::EMPTY;
        let mut ok = true;
        for &v in facet {
            let Some(vertex) = vertices.get(v) else {
                out.push(Violation::UnknownVertex {
                    facet: fi,
                    vertex: v,
                });
                ok = false;
                continue;
            };
            covered[v] = true;
            if vertex.color.0 < n_agents {
                if colors.contains(vertex.color) {
                    out.push(Violation::DuplicateColor {
                        facet: fi,
                        color: vertex.color,
                    });
                    ok = false;
                }
                colors = colors.with(vertex.color);
            }
        }
        if facet.len() != n_agents {
            out.push(Violation::Impure {
                facet: fi,
                size: facet.len(),
            });
            ok = false;
        }
        if ok {
            let mut key = facet.clone();
            key.sort_unstable();
            if let Some(&first) = seen.get(&key) {
                out.push(Violation::DuplicateFacet { facet: fi, first });
            } else {
                seen.insert(key, fi);
            }
        }
    }
    for (i, c) in covered.iter().enumerate() {
        if !c {
            out.push(Violation::OrphanVertex { vertex: i });
        }
    }
    out
}

/// A pure chromatic simplicial complex of dimension `n_agents - 1`.
#[derive(Clone, Debug)]
pub struct ChromaticComplex {
    n_agents: usize,
    vertices: Vec<Vertex>,
    facets: Vec<Facet>,
    facet_index: HashMap<Facet, usize>,
    vertex_facets: Vec<Vec<usize>>,
    adjacency: Vec<Vec<Neighbor>>,
}

impl ChromaticComplex {
    /// Builds a complex, rejecting it if any invariant fails.
    pub fn new(
        n_agents: usize,
        vertices: Vec<Vertex>,
        facets: Vec<Vec<usize>>,
    ) -> Result<ChromaticComplex, ComplexError> {
        if n_agents > MAX_AGENTS {
            return Err(ComplexError::TooManyAgents(n_agents));
        }
        let violations = validate_complex(n_agents, &vertices, &facets);
        if !violations.is_empty() {
            return Err(ComplexError::Invalid(violations));
        }
        let facets: Vec<Facet> = facets
            .into_iter()
            .map(|mut f| {
                f.sort_by_key(|&v| vertices[v].color);
                Facet(f)
            })
            .collect();
        let facet_index = facets
            .iter()
            .enumerate()
            .map(|(i, f)| (f.clone(), i))
            .collect();
        let mut vertex_facets = vec![Vec::new(); vertices.len()];
        for (i, f) in facets.iter().enumerate() {
            for &v in f.vertices() {
                vertex_facets[v].push(i);
            }
        }
        let mut complex = ChromaticComplex {
            n_agents,
            vertices,
            facets,
            facet_index,
            vertex_facets,
            adjacency: Vec::new(),
        };
        complex.adjacency = complex.build_adjacency();
        Ok(complex)
    }

    fn build_adjacency(&self) -> Vec<Vec<Neighbor>> {
        let mut adjacency = Vec::with_capacity(self.facets.len());
        let mut shared: HashMap<usize, AgentSet> = HashMap::new();
        for f in &self.facets {
            shared.clear();
            for (c, &v) in f.vertices().iter().enumerate() {
                for &g in &self.vertex_facets[v] {
                    let e = shared.entry(g).or_default();
                    *e = e.with(AgentId(c));
                }
            }
            let mut row: Vec<Neighbor> = shared
                .iter()
                .map(|(&facet, &shared)| Neighbor { facet, shared })
                .collect();
            row.sort_by_key(|n| n.facet);
            adjacency.push(row);
        }
        adjacency
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    pub fn agents(&self) -> AgentSet {
        AgentSet::full(self.n_agents)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &Vertex {
        &self.vertices[v]
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn facet(&self, i: usize) -> &Facet {
        &self.facets[i]
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    /// Index of the facet with exactly these vertices, in any order.
    pub fn find_facet(&self, vertices: &[usize]) -> Option<usize> {
        let mut f: Vec<usize> = vertices.to_vec();
        if f.iter().any(|&v| v >= self.vertices.len()) {
            return None;
        }
        f.sort_by_key(|&v| self.vertices[v].color);
        self.facet_index.get(&Facet(f)).copied()
    }

    /// Facets containing vertex `v`.
    pub fn facets_of_vertex(&self, v: usize) -> &[usize] {
        &self.vertex_facets[v]
    }

    /// Facets sharing at least one vertex with facet `x`, including `x` itself,
    /// sorted by facet index.
    pub fn neighbors(&self, x: usize) -> &[Neighbor] {
        &self.adjacency[x]
    }

    /// χ(X ∩ Y) for two facets of this complex.
    pub fn intersection_colors(&self, x: usize, y: usize) -> Result<AgentSet, ComplexError> {
        if x >= self.facets.len() {
            return Err(ComplexError::FacetOutOfRange(x));
        }
        if y >= self.facets.len() {
            return Err(ComplexError::FacetOutOfRange(y));
        }
        Ok(self.shared_colors(x, y))
    }

    /// Unchecked variant of [`intersection_colors`](Self::intersection_colors).
    pub fn shared_colors(&self, x: usize, y: usize) -> AgentSet {
        let (fx, fy) = (&self.facets[x], &self.facets[y]);
        let mut s = AgentSet::EMPTY;
        for c in 0..self.n_agents {
            if fx.0[c] == fy.0[c] {
                s = s.with(AgentId(c));
            }
        }
        s
    }

    /// `X ~_a Y`.
    pub fn indistinguishable(&self, a: AgentId, x: usize, y: usize) -> bool {
        self.facets[x].0[a.0] == self.facets[y].0[a.0]
    }

    /// Re-runs [`validate_complex`] on this complex's parts.
    pub fn validate(&self) -> Vec<Violation> {
        let raw: Vec<Vec<usize>> = self.facets.iter().map(|f| f.0.clone()).collect();
        validate_complex(self.n_agents, &self.vertices, &raw)
    }

    /// Raw parts, facets as vertex-id lists ordered by color.
    pub fn facet_lists(&self) -> Vec<Vec<usize>> {
        self.facets.iter().map(|f| f.0.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: usize) -> Vertex {
        Vertex::new(AgentId(c), vec![])
    }

    #[test]
    fn minimal_complex_is_valid() {
        assert!(validate_complex(2, &[v(0), v(1)], &[vec![0, 1]]).is_empty());
    }

    #[test]
    fn duplicated_color_is_reported() {
        let out = validate_complex(2, &[v(0), v(0)], &[vec![0, 1]]);
        assert_eq!(
            out,
            vec![Violation::DuplicateColor {
                facet: 0,
                color: AgentId(0)
            }]
        );
    }

    #[test]
    fn dimension_deficit_is_reported() {
        let out = validate_complex(2, &[v(0)], &[vec![0]]);
        assert_eq!(out, vec![Violation::Impure { facet: 0, size: 1 }]);
    }

    #[test]
    fn orphans_and_foreign_atoms() {
        let bad = Vertex::new(
            AgentId(0),
            vec![AtomicProp {
                agent: AgentId(1),
                value: crate::logic::ValueId(0),
            }],
        );
        let out = validate_complex(2, &[bad, v(1), v(1)], &[vec![0, 1]]);
        assert!(out.contains(&Violation::OrphanVertex { vertex: 2 }));
        assert!(matches!(out[0], Violation::ForeignAtom { vertex: 0, .. }));
    }

    #[test]
    fn facets_are_sorted_by_color() {
        let c = ChromaticComplex::new(2, vec![v(1), v(0)], vec![vec![0, 1]]).unwrap();
        assert_eq!(c.facet(0).vertices(), &[1, 0]);
        assert_eq!(c.find_facet(&[0, 1]), Some(0));
    }

    #[test]
    fn intersection_colors_basics() {
        // square: 0-1-2-3-0 with colors 0,1,0,1
        let c = ChromaticComplex::new(
            2,
            vec![v(0), v(1), v(0), v(1)],
            vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![3, 0]],
        )
        .unwrap();
        assert_eq!(c.intersection_colors(0, 0).unwrap(), AgentSet::full(2));
        assert_eq!(c.intersection_colors(0, 2).unwrap(), AgentSet::EMPTY);
        assert_eq!(
            c.intersection_colors(0, 1).unwrap(),
            AgentSet::singleton(AgentId(1))
        );
        assert!(c.intersection_colors(0, 9).is_err());
        for x in 0..4 {
            for y in 0..4 {
                assert_eq!(c.shared_colors(x, y), c.shared_colors(y, x));
                assert_eq!(c.shared_colors(x, y).len() == 2, x == y);
            }
        }
        let n: Vec<usize> = c.neighbors(0).iter().map(|n| n.facet).collect();
        assert_eq!(n, vec![0, 1, 3]);
    }

    #[test]
    fn agent_set_ops() {
        let s = AgentSet::from_agents([AgentId(0), AgentId(2)]);
        assert_eq!(s.len(), 2);
        assert!(s.contains(AgentId(2)) && !s.contains(AgentId(1)));
        assert!(s.is_subset(AgentSet::full(3)));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![AgentId(0), AgentId(2)]);
        assert_eq!(AgentSet::full(64).len(), 64);
    }
}
