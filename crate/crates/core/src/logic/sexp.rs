//! S-expression syntax for formulas.
//!
//! ```text
//! (atom a v)  (not F)  (and F...)  (or F...)  (K a F)  (D (a...) F)
//! (let ((x F) (y G) ...) H)
//! ```
//!
//! `let` bindings are sequential: each bound formula may refer to earlier names.
//! Names are bare symbols; agents and values are referred to by their workspace
//! names.

use std::collections::HashMap;
use std::fmt::Write;

use crate::complex::{AgentId, AgentSet};
use crate::logic::{AtomicProp, FormulaId, Formulas, LogicError, Node};
use crate::model::Workspace;

#[derive(Debug, Clone, PartialEq)]
enum Sexp {
    Symbol(String),
    List(Vec<Sexp>),
}

fn tokenize(src: &str) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut start = 0;
    let mut line = 1;
    for ch in src.chars() {
        match ch {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push((std::mem::take(&mut cur), start));
                }
                out.push((ch.to_string(), line));
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push((std::mem::take(&mut cur), start));
                }
            }
            c => {
                if cur.is_empty() {
                    start = line;
                }
                cur.push(c);
            }
        }
        if ch == '\n' {
            line += 1;
        }
    }
    if !cur.is_empty() {
        out.push((cur, start));
    }
    out
}

fn read(tokens: &[(String, usize)], pos: &mut usize) -> Result<Sexp, LogicError> {
    let Some((tok, line)) = tokens.get(*pos) else {
        return Err(LogicError::Parse {
            line: tokens.last().map_or(1, |t| t.1),
            msg: "unexpected end of input".into(),
        });
    };
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos) {
                    None => {
                        return Err(LogicError::Parse {
                            line: *line,
                            msg: "unclosed '('".into(),
                        })
                    }
                    Some((t, _)) if t == ")" => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    Some(_) => items.push(read(tokens, pos)?),
                }
            }
        }
        ")" => Err(LogicError::Parse {
            line: *line,
            msg: "unexpected ')'".into(),
        }),
        s => Ok(Sexp::Symbol(s.to_string())),
    }
}

/// Parses a formula into `store`.
pub fn parse_formula(
    src: &str,
    ws: &Workspace,
    store: &mut Formulas,
) -> Result<FormulaId, LogicError> {
    let tokens = tokenize(src);
    let mut pos = 0;
    let sexp = read(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(LogicError::Parse {
            line: tokens[pos].1,
            msg: "trailing input after formula".into(),
        });
    }
    let mut env = HashMap::new();
    Builder { ws, store }.build(&sexp, &mut env)
}

struct Builder<'a> {
    ws: &'a Workspace,
    store: &'a mut Formulas,
}

fn err(msg: impl Into<String>) -> LogicError {
    LogicError::Parse {
        line: 0,
        msg: msg.into(),
    }
}

impl Builder<'_> {
    fn symbol<'s>(&self, s: &'s Sexp) -> Result<&'s str, LogicError> {
        match s {
            Sexp::Symbol(x) => Ok(x),
            Sexp::List(_) => Err(err("expected a symbol")),
        }
    }

    fn agent(&self, s: &Sexp) -> Result<AgentId, LogicError> {
        let name = self.symbol(s)?;
        self.ws
            .agent_index(name)
            .map(AgentId)
            .ok_or_else(|| err(format!("unknown agent `{name}`")))
    }

    fn build(
        &mut self,
        s: &Sexp,
        env: &mut HashMap<String, FormulaId>,
    ) -> Result<FormulaId, LogicError> {
        let items = match s {
            Sexp::Symbol(name) => {
                return env
                    .get(name)
                    .copied()
                    .ok_or_else(|| err(format!("unbound name `{name}`")))
            }
            Sexp::List(items) => items,
        };
        let Some((head, rest)) = items.split_first() else {
            return Err(err("empty list"));
        };
        let head = self.symbol(head)?;
        match (head, rest) {
            ("atom", [a, v]) => {
                let agent = self.agent(a)?;
                let vname = self.symbol(v)?;
                let value = self
                    .ws
                    .value_index(vname)
                    .ok_or_else(|| err(format!("unknown value `{vname}`")))?;
                Ok(self.store.atom(AtomicProp::new(agent.0, value)))
            }
            ("not", [f]) => {
                let f = self.build(f, env)?;
                Ok(self.store.not(f))
            }
            ("and" | "or", fs) => {
                let mut children = Vec::with_capacity(fs.len());
                for f in fs {
                    children.push(self.build(f, env)?);
                }
                if head == "and" {
                    self.store.and(children)
                } else {
                    self.store.or(children)
                }
            }
            ("K", [a, f]) => {
                let a = self.agent(a)?;
                let f = self.build(f, env)?;
                Ok(self.store.k(a, f))
            }
            ("D", [Sexp::List(agents), f]) => {
                let mut set = AgentSet::EMPTY;
                for a in agents {
                    set = set.with(self.agent(a)?);
                }
                let f = self.build(f, env)?;
                Ok(self.store.d(set, f))
            }
            ("let", [Sexp::List(bindings), body]) => {
                let mut shadowed = Vec::new();
                for b in bindings {
                    let Sexp::List(pair) = b else {
                        return Err(err("let binding must be a list"));
                    };
                    let [name, f] = pair.as_slice() else {
                        return Err(err("let binding must be (name formula)"));
                    };
                    let name = self.symbol(name)?.to_string();
                    let id = self.build(f, env)?;
                    shadowed.push((name.clone(), env.insert(name, id)));
                }
                let out = self.build(body, env);
                for (name, old) in shadowed.into_iter().rev() {
                    match old {
                        Some(id) => env.insert(name, id),
                        None => env.remove(&name),
                    };
                }
                out
            }
            (h, _) => Err(err(format!("malformed `{h}` form"))),
        }
    }
}

/// Prints `root` as a tree. Fails if the expansion exceeds `limit` nodes.
pub fn print_expanded(
    store: &Formulas,
    ws: &Workspace,
    root: FormulaId,
    limit: u64,
) -> Result<String, LogicError> {
    let size = store.tree_size(root);
    if size > limit {
        return Err(LogicError::TooLarge { size, limit });
    }
    let mut out = String::new();
    write_tree(store, ws, root, &HashMap::new(), &mut out);
    Ok(out)
}

/// Prints `root`, binding every node with more than one parent in a leading
/// `let` so the output stays proportional to the DAG size.
pub fn print_shared(store: &Formulas, ws: &Workspace, root: FormulaId) -> String {
    let reach = store.reachable(root);
    let mut parents: HashMap<FormulaId, usize> = HashMap::new();
    for &id in &reach {
        for &c in store.node(id).children() {
            *parents.entry(c).or_default() += 1;
        }
    }
    let shared: Vec<FormulaId> = reach
        .iter()
        .copied()
        .filter(|id| {
            id != &root
                && parents.get(id).copied().unwrap_or(0) > 1
                && !matches!(store.node(*id), Node::Atom(_))
        })
        .collect();
    let mut names: HashMap<FormulaId, String> = HashMap::new();
    let mut out = String::new();
    if shared.is_empty() {
        write_tree(store, ws, root, &names, &mut out);
        return out;
    }
    out.push_str("(let (");
    for (i, &id) in shared.iter().enumerate() {
        if i > 0 {
            out.push_str("\n      ");
        }
        let name = format!("${i}");
        let _ = write!(out, "({name} ");
        write_tree(store, ws, id, &names, &mut out);
        out.push(')');
        names.insert(id, name);
    }
    out.push_str(")\n  ");
    write_tree(store, ws, root, &names, &mut out);
    out.push(')');
    out
}

fn write_tree(
    store: &Formulas,
    ws: &Workspace,
    id: FormulaId,
    names: &HashMap<FormulaId, String>,
    out: &mut String,
) {
    if let Some(n) = names.get(&id) {
        out.push_str(n);
        return;
    }
    match store.node(id) {
        Node::Atom(p) => {
            let _ = write!(
                out,
                "(atom {} {})",
                ws.agents[p.agent.0], ws.values[p.value.0]
            );
        }
        Node::Not(c) => {
            out.push_str("(not ");
            write_tree(store, ws, *c, names, out);
            out.push(')');
        }
        Node::And(cs) | Node::Or(cs) => {
            out.push_str(if matches!(store.node(id), Node::And(_)) {
                "(and"
            } else {
                "(or"
            });
            for c in cs {
                out.push(' ');
                write_tree(store, ws, *c, names, out);
            }
            out.push(')');
        }
        Node::K(a, c) => {
            let _ = write!(out, "(K {} ", ws.agents[a.0]);
            write_tree(store, ws, *c, names, out);
            out.push(')');
        }
        Node::D(set, c) => {
            out.push_str("(D (");
            let names_of: Vec<&str> = set.iter().map(|a| ws.agents[a.0].as_str()).collect();
            out.push_str(&names_of.join(" "));
            out.push_str(") ");
            write_tree(store, ws, *c, names, out);
            out.push(')');
        }
    }
}
