//! K- and D-simulations between the facets of two simplicial models.
//!
//! `S_0` pairs facets with equal labels. The K chain is
//! `S_{n+1} = S_0 ∩ f^K(S_n)` and the D chain is `S_{n+1} = f^D(S_n)`. Both
//! descend and, on finite models, stop at the maximum simulation.

use std::fmt;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use thiserror::Error;

use crate::complex::{AgentId, AgentSet, ChromaticComplex};
use crate::model::SimplicialModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    K,
    D,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::K => "K",
            Mode::D => "D",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Mode, String> {
        match s {
            "K" | "k" => Ok(Mode::K),
            "D" | "d" => Ok(Mode::D),
            other => Err(format!("unknown mode `{other}` (expected K or D)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("models are over different workspaces")]
    WorkspaceMismatch,
    #[error("relation has dimensions {got:?}, expected {expected:?}")]
    Dimensions {
        expected: (usize, usize),
        got: (usize, usize),
    },
}

/// A set of (facet of M, facet of M′) pairs stored as one bit row per facet of M.
#[derive(Clone, PartialEq, Eq)]
pub struct Relation {
    cols: usize,
    rows: Vec<FixedBitSet>,
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Relation")
            .field("dims", &self.dims())
            .field("pairs", &self.pairs())
            .finish()
    }
}

impl Relation {
    pub fn empty(rows: usize, cols: usize) -> Relation {
        Relation {
            cols,
            rows: vec![FixedBitSet::with_capacity(cols); rows],
        }
    }

    pub fn full(rows: usize, cols: usize) -> Relation {
        let mut row = FixedBitSet::with_capacity(cols);
        row.insert_range(..);
        Relation {
            cols,
            rows: vec![row; rows],
        }
    }

    pub fn identity(n: usize) -> Relation {
        let mut r = Relation::empty(n, n);
        for i in 0..n {
            r.insert(i, i);
        }
        r
    }

    pub fn from_pairs(rows: usize, cols: usize, pairs: &[(usize, usize)]) -> Option<Relation> {
        let mut r = Relation::empty(rows, cols);
        for &(x, y) in pairs {
            if x >= rows || y >= cols {
                return None;
            }
            r.insert(x, y);
        }
        Some(r)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows.len(), self.cols)
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.rows[x].contains(y)
    }

    pub fn insert(&mut self, x: usize, y: usize) {
        self.rows[x].insert(y);
    }

    pub fn remove(&mut self, x: usize, y: usize) {
        self.rows[x].set(y, false);
    }

    pub fn row(&self, x: usize) -> &FixedBitSet {
        &self.rows[x]
    }

    /// Number of pairs.
    pub fn len(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones(..)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|r| r.is_clear())
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.dims() == other.dims()
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| a.is_subset(b))
    }

    pub fn intersection(&self, other: &Relation) -> Relation {
        let mut out = self.clone();
        for (a, b) in out.rows.iter_mut().zip(&other.rows) {
            a.intersect_with(b);
        }
        out
    }

    /// Facets of M with no partner; empty iff the relation is total.
    pub fn totality_witnesses(&self) -> Vec<usize> {
        (0..self.rows.len())
            .filter(|&x| self.rows[x].is_clear())
            .collect()
    }

    pub fn is_total(&self) -> bool {
        self.rows.iter().all(|r| !r.is_clear())
    }

    /// Pairs in lexicographic order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(x, r)| r.ones().map(move |y| (x, y)))
            .collect()
    }
}

/// Pairs with equal labels, `S_0`.
pub fn initial_relation(
    m: &SimplicialModel,
    target: &SimplicialModel,
) -> Result<Relation, SimulationError> {
    if m.workspace() != target.workspace() {
        return Err(SimulationError::WorkspaceMismatch);
    }
    let mut by_label: std::collections::HashMap<&[crate::logic::AtomicProp], Vec<usize>> =
        std::collections::HashMap::new();
    for y in 0..target.facet_count() {
        by_label.entry(target.facet_label(y)).or_default().push(y);
    }
    let mut r = Relation::empty(m.facet_count(), target.facet_count());
    for x in 0..m.facet_count() {
        if let Some(ys) = by_label.get(m.facet_label(x)) {
            for &y in ys {
                r.insert(x, y);
            }
        }
    }
    Ok(r)
}

/// The descending chain `S_0 ⊇ S_1 ⊇ … ⊇ S_N` with `S_{N+1} = S_N`.
#[derive(Clone, Debug)]
pub struct Fixpoint {
    pub mode: Mode,
    pub chain: Vec<Relation>,
}

impl Fixpoint {
    /// The step `N` at which the chain stabilizes.
    pub fn stabilized_at(&self) -> usize {
        self.chain.len() - 1
    }

    /// The maximum simulation.
    pub fn relation(&self) -> &Relation {
        self.chain.last().expect("chain holds S_0")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    Atom,
    Forth,
}

/// A pair `(X, X′)` of the relation and, for Forth failures, the facet `Y`
/// (and agent, in K mode) for which no matching `Y′` exists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub kind: ViolationKind,
    pub x: usize,
    pub x_prime: usize,
    pub y: Option<usize>,
    pub agent: Option<AgentId>,
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub mode: Mode,
    pub atom_ok: bool,
    pub forth_ok: bool,
    pub total: bool,
    pub violations: usize,
    pub counterexamples: Vec<Counterexample>,
    pub non_total: Vec<usize>,
}

impl VerificationReport {
    pub fn is_simulation(&self) -> bool {
        self.atom_ok && self.forth_ok
    }

    pub fn is_total_simulation(&self) -> bool {
        self.is_simulation() && self.total
    }
}

/// Simulation engine for one (protocol model, task model) pair.
pub struct Simulation<'a> {
    m: &'a SimplicialModel,
    target: &'a SimplicialModel,
    s0: Relation,
}

impl<'a> Simulation<'a> {
    pub fn new(
        m: &'a SimplicialModel,
        target: &'a SimplicialModel,
    ) -> Result<Simulation<'a>, SimulationError> {
        let s0 = initial_relation(m, target)?;
        Ok(Simulation { m, target, s0 })
    }

    pub fn protocol(&self) -> &'a SimplicialModel {
        self.m
    }

    pub fn task(&self) -> &'a SimplicialModel {
        self.target
    }

    pub fn s0(&self) -> &Relation {
        &self.s0
    }

    fn check_dims(&self, r: &Relation) -> Result<(), SimulationError> {
        let expected = self.s0.dims();
        if r.dims() != expected {
            return Err(SimulationError::Dimensions {
                expected,
                got: r.dims(),
            });
        }
        Ok(())
    }

    /// Whether `(x, x_prime)` is in `f^mode(r)`. `r_total` must equal `r.is_total()`.
    fn forth_at(&self, r: &Relation, r_total: bool, mode: Mode, x: usize, x_prime: usize) -> bool {
        let (src, dst) = (self.m.complex(), self.target.complex());
        match mode {
            Mode::K => src.neighbors(x).iter().all(|nb| {
                let row = r.row(nb.facet);
                let covered = dst
                    .neighbors(x_prime)
                    .iter()
                    .filter(|nb2| row.contains(nb2.facet))
                    .fold(AgentSet::EMPTY, |acc, nb2| acc.union(nb2.shared));
                nb.shared.is_subset(covered)
            }),
            Mode::D => {
                // facets sharing no color with x only need some partner at all
                r_total
                    && src.neighbors(x).iter().all(|nb| {
                        let row = r.row(nb.facet);
                        dst.neighbors(x_prime)
                            .iter()
                            .any(|nb2| nb.shared.is_subset(nb2.shared) && row.contains(nb2.facet))
                    })
            }
        }
    }

    /// `f^mode(r)` over all pairs.
    pub fn forth(&self, r: &Relation, mode: Mode) -> Result<Relation, SimulationError> {
        self.check_dims(r)?;
        let total = r.is_total();
        let cols = self.target.facet_count();
        let rows = (0..self.m.facet_count())
            .into_par_iter()
            .map(|x| {
                let mut row = FixedBitSet::with_capacity(cols);
                for y in 0..cols {
                    if self.forth_at(r, total, mode, x, y) {
                        row.insert(y);
                    }
                }
                row
            })
            .collect();
        Ok(Relation { cols, rows })
    }

    /// One chain step: `S_0 ∩ f^K(r)` in K mode, `f^D(r)` in D mode.
    pub fn refine(&self, r: &Relation, mode: Mode) -> Result<Relation, SimulationError> {
        self.check_dims(r)?;
        let total = r.is_total();
        let cols = self.target.facet_count();
        // f^D(r) ⊆ r: take Y = X, which forces Y′ = X′.
        let candidates = match mode {
            Mode::K => &self.s0,
            Mode::D => r,
        };
        let rows = (0..self.m.facet_count())
            .into_par_iter()
            .map(|x| {
                let mut row = FixedBitSet::with_capacity(cols);
                if mode == Mode::D && !total {
                    return row;
                }
                for y in candidates.row(x).ones() {
                    if self.forth_at(r, total, mode, x, y) {
                        row.insert(y);
                    }
                }
                row
            })
            .collect();
        Ok(Relation { cols, rows })
    }

    /// Iterates from `S_0` until the chain stops changing.
    pub fn max_simulation(&self, mode: Mode) -> Fixpoint {
        let mut chain = vec![self.s0.clone()];
        loop {
            let cur = chain.last().expect("nonempty");
            let next = self.refine(cur, mode).expect("dimensions match");
            assert!(next.is_subset(cur), "simulation chain must descend");
            if &next == cur {
                return Fixpoint { mode, chain };
            }
            chain.push(next);
        }
    }

    /// Checks `r ⊆ S_0` and `r ⊆ f^mode(r)`, keeping up to `limit` counterexamples.
    pub fn verify(
        &self,
        r: &Relation,
        mode: Mode,
        limit: usize,
    ) -> Result<VerificationReport, SimulationError> {
        self.check_dims(r)?;
        let non_total = r.totality_witnesses();
        let mut report = VerificationReport {
            mode,
            atom_ok: true,
            forth_ok: true,
            total: non_total.is_empty(),
            violations: 0,
            counterexamples: Vec::new(),
            non_total,
        };
        let push = |report: &mut VerificationReport, c: Counterexample| {
            match c.kind {
                ViolationKind::Atom => report.atom_ok = false,
                ViolationKind::Forth => report.forth_ok = false,
            }
            report.violations += 1;
            if report.counterexamples.len() < limit {
                report.counterexamples.push(c);
            }
        };
        let (src, dst) = (self.m.complex(), self.target.complex());
        for (x, x_prime) in r.pairs() {
            if !self.s0.contains(x, x_prime) {
                push(
                    &mut report,
                    Counterexample {
                        kind: ViolationKind::Atom,
                        x,
                        x_prime,
                        y: None,
                        agent: None,
                    },
                );
            }
            match mode {
                Mode::K => {
                    for nb in src.neighbors(x) {
                        for a in nb.shared.iter() {
                            let ok = dst.neighbors(x_prime).iter().any(|nb2| {
                                nb2.shared.contains(a) && r.contains(nb.facet, nb2.facet)
                            });
                            if !ok {
                                push(
                                    &mut report,
                                    Counterexample {
                                        kind: ViolationKind::Forth,
                                        x,
                                        x_prime,
                                        y: Some(nb.facet),
                                        agent: Some(a),
                                    },
                                );
                            }
                        }
                    }
                }
                Mode::D => {
                    let mut failed = Vec::new();
                    for nb in src.neighbors(x) {
                        let ok = dst.neighbors(x_prime).iter().any(|nb2| {
                            nb.shared.is_subset(nb2.shared) && r.contains(nb.facet, nb2.facet)
                        });
                        if !ok {
                            failed.push(nb.facet);
                        }
                    }
                    for &y in &report.non_total {
                        if !failed.contains(&y) {
                            failed.push(y);
                        }
                    }
                    failed.sort_unstable();
                    for y in failed {
                        push(
                            &mut report,
                            Counterexample {
                                kind: ViolationKind::Forth,
                                x,
                                x_prime,
                                y: Some(y),
                                agent: None,
                            },
                        );
                    }
                }
            }
        }
        Ok(report)
    }
}

/// Facet-adjacency lookups used by callers that need `χ(X ∩ Y)` for arbitrary pairs.
pub fn shared_colors(c: &ChromaticComplex, x: usize, y: usize) -> AgentSet {
    c.shared_colors(x, y)
}
