use std::fmt;

use crate::complex::{AgentId, AgentSet};

/// A chain `C_1 ⊊ C_2 ⊊ … ⊊ C_l = Π` with `C_1` nonempty.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrderedPartition {
    chain: Vec<AgentSet>,
}

impl OrderedPartition {
    pub fn new(n_agents: usize, chain: Vec<AgentSet>) -> Option<OrderedPartition> {
        let full = AgentSet::full(n_agents);
        let first_ok = chain.first().is_some_and(|c| !c.is_empty());
        let strict = chain
            .windows(2)
            .all(|w| w[0].is_subset(w[1]) && w[0] != w[1]);
        (first_ok && strict && chain.last() == Some(&full)).then_some(OrderedPartition { chain })
    }

    pub fn chain(&self) -> &[AgentSet] {
        &self.chain
    }

    pub fn first_block(&self) -> AgentSet {
        self.chain[0]
    }

    /// `C_j` for the least `j` with `a ∈ C_j`: the agents whose writes `a` sees.
    pub fn seen_by(&self, a: AgentId) -> AgentSet {
        *self
            .chain
            .iter()
            .find(|c| c.contains(a))
            .expect("the last block is all agents")
    }
}

impl fmt::Display for OrderedPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.chain.iter().enumerate() {
            if i > 0 {
                f.write_str(" < ")?;
            }
            let names: Vec<String> = c.iter().map(|a| a.0.to_string()).collect();
            write!(f, "{{{}}}", names.join(","))?;
        }
        Ok(())
    }
}

/// Every ordered partition of `n_agents` agents; blocks are added in
/// ascending bitmask order, so the output order is deterministic.
pub fn ordered_partitions(n_agents: usize) -> Vec<OrderedPartition> {
    fn extend(full: u64, chain: &mut Vec<AgentSet>, out: &mut Vec<OrderedPartition>) {
        let cur = chain.last().map_or(0, |c| c.0);
        if cur == full {
            out.push(OrderedPartition {
                chain: chain.clone(),
            });
            return;
        }
        let rest = full & !cur;
        // nonempty submasks of `rest`, ascending
        let mut sub = rest & rest.wrapping_neg();
        let mut subs = Vec::new();
        loop {
            subs.push(sub);
            if sub == rest {
                break;
            }
            sub = (sub.wrapping_sub(rest)) & rest;
        }
        for add in subs {
            chain.push(AgentSet(cur | add));
            extend(full, chain, out);
            chain.pop();
        }
    }
    let mut out = Vec::new();
    if n_agents == 0 {
        return out;
    }
    extend(AgentSet::full(n_agents).0, &mut Vec::new(), &mut out);
    out
}
