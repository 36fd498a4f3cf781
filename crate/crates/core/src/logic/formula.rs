use std::collections::HashMap;
use std::fmt;

use crate::complex::{AgentId, AgentSet};
use crate::logic::LogicError;

/// Index of an input value in the workspace value list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ValueId(pub usize);

impl fmt::Display for ValueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The atomic proposition `ip_a^v`: agent `a` has input `v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomicProp {
    pub agent: AgentId,
    pub value: ValueId,
}

impl AtomicProp {
    pub fn new(agent: usize, value: usize) -> AtomicProp {
        AtomicProp {
            agent: AgentId(agent),
            value: ValueId(value),
        }
    }
}

/// Handle of an interned formula node inside a [`Formulas`] arena.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FormulaId(pub(crate) u32);

impl FormulaId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Atom(AtomicProp),
    Not(FormulaId),
    /// Children sorted and duplicate-free, at least two.
    And(Vec<FormulaId>),
    /// Children sorted and duplicate-free, at least two.
    Or(Vec<FormulaId>),
    K(AgentId, FormulaId),
    D(AgentSet, FormulaId),
}

impl Node {
    pub fn children(&self) -> &[FormulaId] {
        match self {
            Node::Atom(_) => &[],
            Node::Not(c) | Node::K(_, c) | Node::D(_, c) => std::slice::from_ref(c),
            Node::And(cs) | Node::Or(cs) => cs,
        }
    }
}

/// Syntactic class of a formula, tightest first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormulaClass {
    /// Positive, modalities are `K_a` or `D_{a}`.
    PositiveK,
    /// Positive, uses `D_A` with `|A| != 1`.
    PositiveD,
    /// Negation above a non-atom, no proper `D_A`.
    K,
    /// Negation above a non-atom, uses proper `D_A`.
    D,
}

impl FormulaClass {
    pub fn is_positive(self) -> bool {
        matches!(self, FormulaClass::PositiveK | FormulaClass::PositiveD)
    }

    /// Expressible without distributed knowledge over sets other than singletons.
    pub fn is_k_language(self) -> bool {
        matches!(self, FormulaClass::PositiveK | FormulaClass::K)
    }
}

impl fmt::Display for FormulaClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FormulaClass::PositiveK => "L_K+",
            FormulaClass::PositiveD => "L_D+",
            FormulaClass::K => "L_K",
            FormulaClass::D => "L_D",
        })
    }
}

#[derive(Clone, Copy, Debug)]
struct Meta {
    degree: u32,
    positive: bool,
    proper_d: bool,
    tree_size: u64,
}

/// Hash-consed formula arena. Structurally equal formulas get the same id, and
/// a node's children always have smaller ids than the node.
#[derive(Clone, Debug, Default)]
pub struct Formulas {
    nodes: Vec<Node>,
    meta: Vec<Meta>,
    index: HashMap<Node, FormulaId>,
}

impl Formulas {
    pub fn new() -> Formulas {
        Formulas::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: FormulaId) -> &Node {
        &self.nodes[id.index()]
    }

    fn intern(&mut self, node: Node) -> FormulaId {
        if let Some(&id) = self.index.get(&node) {
            return id;
        }
        let meta = self.compute_meta(&node);
        let id = FormulaId(u32::try_from(self.nodes.len()).expect("formula arena overflow"));
        self.nodes.push(node.clone());
        self.meta.push(meta);
        self.index.insert(node, id);
        id
    }

    fn compute_meta(&self, node: &Node) -> Meta {
        let child = |c: &FormulaId| self.meta[c.index()];
        match node {
            Node::Atom(_) => Meta {
                degree: 0,
                positive: true,
                proper_d: false,
                tree_size: 1,
            },
            Node::Not(c) => {
                let m = child(c);
                Meta {
                    degree: m.degree,
                    positive: matches!(self.nodes[c.index()], Node::Atom(_)),
                    proper_d: m.proper_d,
                    tree_size: m.tree_size.saturating_add(1),
                }
            }
            Node::And(cs) | Node::Or(cs) => {
                let mut out = Meta {
                    degree: 0,
                    positive: true,
                    proper_d: false,
                    tree_size: 1,
                };
                for c in cs {
                    let m = child(c);
                    out.degree = out.degree.max(m.degree);
                    out.positive &= m.positive;
                    out.proper_d |= m.proper_d;
                    out.tree_size = out.tree_size.saturating_add(m.tree_size);
                }
                out
            }
            Node::K(_, c) => {
                let m = child(c);
                Meta {
                    degree: m.degree + 1,
                    tree_size: m.tree_size.saturating_add(1),
                    ..m
                }
            }
            Node::D(set, c) => {
                let m = child(c);
                Meta {
                    degree: m.degree + 1,
                    positive: m.positive,
                    proper_d: m.proper_d || set.len() != 1,
                    tree_size: m.tree_size.saturating_add(1),
                }
            }
        }
    }

    pub fn atom(&mut self, p: AtomicProp) -> FormulaId {
        self.intern(Node::Atom(p))
    }

    pub fn not(&mut self, f: FormulaId) -> FormulaId {
        self.intern(Node::Not(f))
    }

    pub fn neg_atom(&mut self, p: AtomicProp) -> FormulaId {
        let a = self.atom(p);
        self.not(a)
    }

    fn connective(
        &mut self,
        mut children: Vec<FormulaId>,
        and: bool,
    ) -> Result<FormulaId, LogicError> {
        if children.is_empty() {
            return Err(LogicError::EmptyConnective(if and { "and" } else { "or" }));
        }
        children.sort_unstable();
        children.dedup();
        if children.len() == 1 {
            return Ok(children[0]);
        }
        Ok(self.intern(if and {
            Node::And(children)
        } else {
            Node::Or(children)
        }))
    }

    /// Conjunction; an empty list is rejected and a single child is returned as is.
    pub fn and(&mut self, children: Vec<FormulaId>) -> Result<FormulaId, LogicError> {
        self.connective(children, true)
    }

    /// Disjunction; an empty list is rejected and a single child is returned as is.
    pub fn or(&mut self, children: Vec<FormulaId>) -> Result<FormulaId, LogicError> {
        self.connective(children, false)
    }

    pub fn k(&mut self, a: AgentId, f: FormulaId) -> FormulaId {
        self.intern(Node::K(a, f))
    }

    pub fn d(&mut self, agents: AgentSet, f: FormulaId) -> FormulaId {
        self.intern(Node::D(agents, f))
    }

    /// `p ∨ ¬p` over the atom of agent 0 and value 0.
    pub fn top(&mut self) -> FormulaId {
        let p = AtomicProp::new(0, 0);
        let a = self.atom(p);
        let n = self.not(a);
        self.intern(Node::Or(if a < n { vec![a, n] } else { vec![n, a] }))
    }

    /// Maximum nesting depth of modal operators.
    pub fn degree(&self, id: FormulaId) -> usize {
        self.meta[id.index()].degree as usize
    }

    pub fn classify(&self, id: FormulaId) -> FormulaClass {
        let m = self.meta[id.index()];
        match (m.positive, m.proper_d) {
            (true, false) => FormulaClass::PositiveK,
            (true, true) => FormulaClass::PositiveD,
            (false, false) => FormulaClass::K,
            (false, true) => FormulaClass::D,
        }
    }

    /// Node count of the fully expanded tree (saturating).
    pub fn tree_size(&self, id: FormulaId) -> u64 {
        self.meta[id.index()].tree_size
    }

    /// Ids reachable from `root`, ascending (children before parents).
    pub fn reachable(&self, root: FormulaId) -> Vec<FormulaId> {
        let mut seen = vec![false; root.index() + 1];
        let mut stack = vec![root];
        let mut out = Vec::new();
        while let Some(id) = stack.pop() {
            if seen[id.index()] {
                continue;
            }
            seen[id.index()] = true;
            out.push(id);
            stack.extend_from_slice(self.node(id).children());
        }
        out.sort_unstable();
        out
    }

    /// Copies the sub-DAG rooted at `id` in `other` into this arena.
    pub fn import(&mut self, other: &Formulas, id: FormulaId) -> FormulaId {
        let mut map: HashMap<FormulaId, FormulaId> = HashMap::new();
        for n in other.reachable(id) {
            let mapped = match other.node(n) {
                Node::Atom(p) => Node::Atom(*p),
                Node::Not(c) => Node::Not(map[c]),
                Node::And(cs) | Node::Or(cs) => {
                    let mut v: Vec<FormulaId> = cs.iter().map(|c| map[c]).collect();
                    v.sort_unstable();
                    v.dedup();
                    if v.len() == 1 {
                        map.insert(n, v[0]);
                        continue;
                    }
                    if matches!(other.node(n), Node::And(_)) {
                        Node::And(v)
                    } else {
                        Node::Or(v)
                    }
                }
                Node::K(a, c) => Node::K(*a, map[c]),
                Node::D(s, c) => Node::D(*s, map[c]),
            };
            let new = self.intern(mapped);
            map.insert(n, new);
        }
        map[&id]
    }
}
