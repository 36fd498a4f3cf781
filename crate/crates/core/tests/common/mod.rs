//! Oracles shared by the integration and acceptance tests. They work from the
//! raw facet lists and the textbook definitions, not from the adjacency index,
//! the bitset checker or the optimized refinement.
#![allow(dead_code)]

use epiobs::generators::{
    build_iis, build_sa, gen_staircase_task, gen_trivial_protocol, staircase_workspace,
};
use epiobs::logic::{AtomicProp, FormulaId, Formulas, Node};
use epiobs::model::{build_input_model, build_input_model_on, product_update, Workspace};
use epiobs::{AgentId, AgentSet, Mode, SimplicialModel, ValueId};
use rand::Rng;

pub fn shares(m: &SimplicialModel, x: usize, y: usize, a: usize) -> bool {
    let c = m.complex();
    c.facet(x).vertex(AgentId(a)) == c.facet(y).vertex(AgentId(a))
}

pub fn shared(m: &SimplicialModel, x: usize, y: usize) -> AgentSet {
    AgentSet::from_agents(
        (0..m.workspace().n_agents())
            .filter(|&a| shares(m, x, y, a))
            .map(AgentId),
    )
}

/// Tree-walking evaluation with no caching.
pub fn naive_eval(m: &SimplicialModel, f: &Formulas, phi: FormulaId, x: usize) -> bool {
    let facets = 0..m.facet_count();
    match f.node(phi) {
        Node::Atom(p) => m.facet_label(x).contains(p),
        Node::Not(c) => !naive_eval(m, f, *c, x),
        Node::And(cs) => cs.iter().all(|&c| naive_eval(m, f, c, x)),
        Node::Or(cs) => cs.iter().any(|&c| naive_eval(m, f, c, x)),
        Node::K(a, c) => facets
            .filter(|&y| shares(m, x, y, a.0))
            .all(|y| naive_eval(m, f, *c, y)),
        Node::D(group, c) => facets
            .filter(|&y| group.is_subset(shared(m, x, y)))
            .all(|y| naive_eval(m, f, *c, y)),
    }
}

/// [`naive_eval`] with a memo table, for deep formulas with heavy sharing.
pub struct MemoEval<'a> {
    m: &'a SimplicialModel,
    f: &'a Formulas,
    memo: std::collections::HashMap<(FormulaId, usize), bool>,
}

impl<'a> MemoEval<'a> {
    pub fn new(m: &'a SimplicialModel, f: &'a Formulas) -> MemoEval<'a> {
        MemoEval {
            m,
            f,
            memo: Default::default(),
        }
    }

    pub fn eval(&mut self, phi: FormulaId, x: usize) -> bool {
        if let Some(&b) = self.memo.get(&(phi, x)) {
            return b;
        }
        let (m, facets) = (self.m, 0..self.m.facet_count());
        let b = match self.f.node(phi).clone() {
            Node::Atom(p) => m.facet_label(x).contains(&p),
            Node::Not(c) => !self.eval(c, x),
            Node::And(cs) => cs.iter().all(|&c| self.eval(c, x)),
            Node::Or(cs) => cs.iter().any(|&c| self.eval(c, x)),
            Node::K(a, c) => facets
                .filter(|&y| shares(m, x, y, a.0))
                .all(|y| self.eval(c, y)),
            Node::D(group, c) => facets
                .filter(|&y| group.is_subset(shared(m, x, y)))
                .all(|y| self.eval(c, y)),
        };
        self.memo.insert((phi, x), b);
        b
    }
}

pub type Matrix = Vec<Vec<bool>>;

pub fn matrix_len(s: &Matrix) -> usize {
    s.iter().flatten().filter(|&&b| b).count()
}

/// The simulation chain `S_0, S_1, …` up to the first repeat, computed from
/// the definitions with boolean matrices.
pub fn brute_chain(m: &SimplicialModel, t: &SimplicialModel, mode: Mode) -> Vec<Matrix> {
    let (fm, ft) = (m.facet_count(), t.facet_count());
    let n = m.workspace().n_agents();
    let s0: Matrix = (0..fm)
        .map(|x| {
            (0..ft)
                .map(|xp| m.facet_label(x) == t.facet_label(xp))
                .collect()
        })
        .collect();
    let mut chain = vec![s0.clone()];
    loop {
        let r = chain.last().unwrap();
        let next: Matrix = (0..fm)
            .map(|x| {
                (0..ft)
                    .map(|xp| match mode {
                        Mode::K => {
                            s0[x][xp]
                                && (0..n).all(|a| {
                                    (0..fm)
                                        .filter(|&y| shares(m, x, y, a))
                                        .all(|y| (0..ft).any(|yp| shares(t, xp, yp, a) && r[y][yp]))
                                })
                        }
                        Mode::D => (0..fm).all(|y| {
                            let need = shared(m, x, y);
                            (0..ft).any(|yp| need.is_subset(shared(t, xp, yp)) && r[y][yp])
                        }),
                    })
                    .collect()
            })
            .collect();
        if &next == r {
            return chain;
        }
        chain.push(next);
    }
}

/// First color- and label-preserving vertex map sending facets to facets,
/// by plain enumeration of the candidate product.
pub fn brute_morphism(m: &SimplicialModel, t: &SimplicialModel) -> Option<Vec<usize>> {
    let (cm, ct) = (m.complex(), t.complex());
    let candidates: Vec<Vec<usize>> = cm
        .vertices()
        .iter()
        .map(|v| {
            ct.vertices()
                .iter()
                .enumerate()
                .filter(|(_, w)| w.color == v.color && w.atoms == v.atoms)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    if candidates.iter().any(|c| c.is_empty()) {
        return None;
    }
    let targets: std::collections::HashSet<Vec<usize>> = (0..ct.facet_count())
        .map(|y| ct.facet(y).vertices().to_vec())
        .collect();
    let mut choice = vec![0usize; candidates.len()];
    loop {
        let vmap: Vec<usize> = choice.iter().zip(&candidates).map(|(&i, c)| c[i]).collect();
        let ok = (0..cm.facet_count()).all(|x| {
            // vertices are stored sorted by color, and so are their images
            let image: Vec<usize> = cm.facet(x).vertices().iter().map(|&v| vmap[v]).collect();
            targets.contains(&image)
        });
        if ok {
            return Some(vmap);
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == choice.len() {
                return None;
            }
            choice[i] += 1;
            if choice[i] < candidates[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// A random formula over the workspace atoms. `positive` keeps negation on
/// atoms only.
pub fn random_formula<R: Rng>(
    rng: &mut R,
    f: &mut Formulas,
    ws: &Workspace,
    depth: usize,
    positive: bool,
) -> FormulaId {
    let (n, v) = (ws.n_agents(), ws.n_values());
    let atom = |rng: &mut R, f: &mut Formulas| {
        let a = f.atom(AtomicProp::new(rng.gen_range(0..n), rng.gen_range(0..v)));
        if rng.gen_bool(0.3) {
            f.not(a)
        } else {
            a
        }
    };
    if depth == 0 || rng.gen_bool(0.2) {
        return atom(rng, f);
    }
    match rng.gen_range(0..5) {
        0 if !positive => {
            let c = random_formula(rng, f, ws, depth - 1, positive);
            f.not(c)
        }
        0 | 1 => {
            let k = rng.gen_range(2..4);
            let cs = (0..k)
                .map(|_| random_formula(rng, f, ws, depth - 1, positive))
                .collect();
            f.and(cs).unwrap()
        }
        2 => {
            let k = rng.gen_range(2..4);
            let cs = (0..k)
                .map(|_| random_formula(rng, f, ws, depth - 1, positive))
                .collect();
            f.or(cs).unwrap()
        }
        3 => {
            let c = random_formula(rng, f, ws, depth - 1, positive);
            f.k(AgentId(rng.gen_range(0..n)), c)
        }
        _ => {
            let c = random_formula(rng, f, ws, depth - 1, positive);
            let group = AgentSet(rng.gen_range(0..(1u64 << n)));
            f.d(group, c)
        }
    }
}

/// Protocol/task pairs with at most ten facets per side.
pub fn small_pairs() -> Vec<(&'static str, SimplicialModel, SimplicialModel)> {
    let ws = Workspace::numbered(2, 2);
    let input = build_input_model(&ws).unwrap();
    let consensus = build_sa(1, &input).unwrap().model;
    let one_input = build_input_model_on(&ws, &[vec![ValueId(0), ValueId(1)]]).unwrap();
    let two_inputs = build_input_model_on(
        &ws,
        &[vec![ValueId(0), ValueId(0)], vec![ValueId(0), ValueId(1)]],
    )
    .unwrap();
    let iis_one = build_iis(1, &one_input).unwrap().model;
    let iis_two = build_iis(1, &two_inputs).unwrap().model;
    let sa_one = build_sa(1, &one_input).unwrap().model;
    let sa2_two = build_sa(2, &two_inputs).unwrap().model;
    let (trivial, stairs) = staircase_pair(4);
    let pairs = vec![
        ("input vs consensus", input, consensus),
        ("IIS1 on one input vs consensus on it", iis_one, sa_one),
        ("IIS1 on two inputs vs SA2 on them", iis_two, sa2_two),
        ("trivial protocol vs staircase", trivial, stairs),
    ];
    for (name, m, t) in &pairs {
        assert!(
            m.facet_count() <= 10 && t.facet_count() <= 10,
            "{name} is too large"
        );
    }
    pairs
}

/// The one-facet-per-input protocol and the staircase task over the binary inputs.
pub fn staircase_pair(max_decision: usize) -> (SimplicialModel, SimplicialModel) {
    let input = build_input_model(&staircase_workspace()).unwrap();
    let p = product_update(
        &input,
        &gen_trivial_protocol(&staircase_workspace()).unwrap(),
    )
    .unwrap();
    let t = product_update(&input, &gen_staircase_task(max_decision).unwrap().action).unwrap();
    (p.model, t.model)
}
