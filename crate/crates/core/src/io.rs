//! JSON file formats for models, action models, relations, provenance, graphs
//! and verdicts. Formulas inside action files use the S-expression syntax of
//! [`crate::logic::sexp`].

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::complex::{AgentId, ChromaticComplex, Vertex};
use crate::generators::{DiGraph, GraphError};
use crate::logic::{sexp, AtomicProp, Formulas};
use crate::model::{ActionModel, SimplicialModel, Workspace};
use crate::obstruction::ObstructionVerdict;
use crate::simulation::Relation;

/// An error tied to an input file, with the line when one is known.
#[derive(Debug)]
pub struct FormatError {
    pub file: Option<PathBuf>,
    pub line: Option<usize>,
    pub msg: String,
}

impl FormatError {
    fn new(msg: impl Into<String>) -> FormatError {
        FormatError {
            file: None,
            line: None,
            msg: msg.into(),
        }
    }

    fn in_file(mut self, path: &Path) -> FormatError {
        self.file.get_or_insert_with(|| path.to_path_buf());
        self
    }
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.file, self.line) {
            (Some(p), Some(l)) => write!(f, "{}:{l}: {}", p.display(), self.msg),
            (Some(p), None) => write!(f, "{}: {}", p.display(), self.msg),
            (None, Some(l)) => write!(f, "line {l}: {}", self.msg),
            (None, None) => f.write_str(&self.msg),
        }
    }
}

impl std::error::Error for FormatError {}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> FormatError {
        FormatError {
            file: None,
            line: (e.line() > 0).then_some(e.line()),
            msg: e.to_string(),
        }
    }
}

impl From<std::io::Error> for FormatError {
    fn from(e: std::io::Error) -> FormatError {
        FormatError::new(e.to_string())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct VertexJson {
    id: usize,
    color: usize,
    #[serde(default)]
    atoms: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelJson {
    agents: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<String>>,
    vertices: Vec<VertexJson>,
    facets: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "pre_map")]
    pre: Option<Vec<(String, String)>>,
}

/// `pre` as a JSON object whose keys keep the facet order on output.
mod pre_map {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        v: &Option<Vec<(String, String)>>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        match v {
            Some(entries) => s.collect_map(entries.iter().map(|(k, v)| (k, v))),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<Option<Vec<(String, String)>>, D::Error> {
        let m: Option<BTreeMap<String, String>> = Option::deserialize(d)?;
        Ok(m.map(|m| m.into_iter().collect()))
    }
}

fn model_json(ws: &Workspace, c: &ChromaticComplex) -> ModelJson {
    ModelJson {
        agents: ws.agents.clone(),
        values: Some(ws.values.clone()),
        vertices: c
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, v)| VertexJson {
                id: i,
                color: v.color.0,
                atoms: v
                    .atoms
                    .iter()
                    .map(|p| (ws.agents[p.agent.0].clone(), ws.values[p.value.0].clone()))
                    .collect(),
                name: v.name.clone(),
            })
            .collect(),
        facets: c.facet_lists(),
        pre: None,
    }
}

/// Builds the workspace and complex of a parsed file. `values` defaults to the
/// atom values in order of first appearance.
fn complex_from_json(doc: &ModelJson) -> Result<(Workspace, ChromaticComplex), FormatError> {
    let values = match &doc.values {
        Some(v) => v.clone(),
        None => {
            let mut seen = Vec::new();
            for v in &doc.vertices {
                for (_, val) in &v.atoms {
                    if !seen.contains(val) {
                        seen.push(val.clone());
                    }
                }
            }
            seen
        }
    };
    let ws = Workspace::new(doc.agents.clone(), values);
    let mut index = HashMap::new();
    let mut vertices = Vec::with_capacity(doc.vertices.len());
    for (i, v) in doc.vertices.iter().enumerate() {
        if index.insert(v.id, i).is_some() {
            return Err(FormatError::new(format!(
                "vertices[{i}]: duplicate id {}",
                v.id
            )));
        }
        let mut atoms = Vec::with_capacity(v.atoms.len());
        for (a, val) in &v.atoms {
            let agent = ws
                .agent_index(a)
                .ok_or_else(|| FormatError::new(format!("vertices[{i}]: unknown agent `{a}`")))?;
            let value = ws
                .value_index(val)
                .ok_or_else(|| FormatError::new(format!("vertices[{i}]: unknown value `{val}`")))?;
            atoms.push(AtomicProp::new(agent, value));
        }
        let mut vx = Vertex::new(AgentId(v.color), atoms);
        vx.name = v.name.clone();
        vertices.push(vx);
    }
    let mut facets = Vec::with_capacity(doc.facets.len());
    for (j, f) in doc.facets.iter().enumerate() {
        let ids =
            f.iter()
                .map(|id| {
                    index.get(id).copied().ok_or_else(|| {
                        FormatError::new(format!("facets[{j}]: unknown vertex id {id}"))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
        facets.push(ids);
    }
    let c = ChromaticComplex::new(ws.n_agents(), vertices, facets)
        .map_err(|e| FormatError::new(e.to_string()))?;
    Ok((ws, c))
}

pub fn model_to_json(m: &SimplicialModel) -> String {
    to_pretty(&model_json(m.workspace(), m.complex()))
}

pub fn model_from_json(src: &str) -> Result<SimplicialModel, FormatError> {
    let doc: ModelJson = serde_json::from_str(src)?;
    if doc.pre.is_some() {
        return Err(FormatError::new(
            "this is an action model (it has `pre`), expected a simplicial model",
        ));
    }
    let (ws, c) = complex_from_json(&doc)?;
    SimplicialModel::new(ws, c).map_err(|e| FormatError::new(e.to_string()))
}

pub fn action_to_json(a: &ActionModel) -> String {
    let mut doc = model_json(a.workspace(), a.complex());
    doc.pre = Some(
        (0..a.facet_count())
            .map(|t| {
                (
                    t.to_string(),
                    sexp::print_shared(a.formulas(), a.workspace(), a.pre(t)),
                )
            })
            .collect(),
    );
    to_pretty(&doc)
}

pub fn action_from_json(src: &str) -> Result<ActionModel, FormatError> {
    let doc: ModelJson = serde_json::from_str(src)?;
    let (ws, c) = complex_from_json(&doc)?;
    let pre_map = doc
        .pre
        .as_ref()
        .ok_or_else(|| FormatError::new("action model has no `pre` map"))?;
    let mut formulas = Formulas::new();
    let mut pre = vec![None; c.facet_count()];
    for (k, text) in pre_map {
        let t: usize = k
            .parse()
            .ok()
            .filter(|&t| t < c.facet_count())
            .ok_or_else(|| FormatError::new(format!("pre: `{k}` is not a facet index")))?;
        let id = sexp::parse_formula(text, &ws, &mut formulas)
            .map_err(|e| FormatError::new(format!("pre[{k}]: {e}")))?;
        pre[t] = Some(id);
    }
    let pre = pre
        .into_iter()
        .enumerate()
        .map(|(t, p)| {
            p.ok_or_else(|| FormatError::new(format!("pre: facet {t} has no precondition")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    ActionModel::new(ws, c, formulas, pre).map_err(|e| FormatError::new(e.to_string()))
}

#[derive(Debug, Serialize, Deserialize)]
struct RelationJson {
    dims: [usize; 2],
    pairs: Vec<[usize; 2]>,
}

pub fn relation_to_json(r: &Relation) -> String {
    let (m, n) = r.dims();
    let doc = RelationJson {
        dims: [m, n],
        pairs: r.pairs().into_iter().map(|(x, y)| [x, y]).collect(),
    };
    serde_json::to_string(&doc).expect("serializable") + "\n"
}

pub fn relation_from_json(src: &str) -> Result<Relation, FormatError> {
    let doc: RelationJson = serde_json::from_str(src)?;
    let pairs: Vec<(usize, usize)> = doc.pairs.iter().map(|p| (p[0], p[1])).collect();
    Relation::from_pairs(doc.dims[0], doc.dims[1], &pairs)
        .ok_or_else(|| FormatError::new("relation pair outside `dims`"))
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ProvenanceEntry {
    pub facet: usize,
    pub source: usize,
    pub action: usize,
}

pub fn provenance_to_json(facet_sources: &[(usize, usize)]) -> String {
    let entries: Vec<ProvenanceEntry> = facet_sources
        .iter()
        .enumerate()
        .map(|(facet, &(source, action))| ProvenanceEntry {
            facet,
            source,
            action,
        })
        .collect();
    to_pretty(&entries)
}

#[derive(Debug, Deserialize)]
struct GraphJson {
    edges: Vec<(usize, usize)>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GraphsJson {
    One(GraphJson),
    Many(Vec<GraphJson>),
}

/// Reads one graph or a list of graphs, adding missing self-loops. Returns the
/// graphs and, per graph, the nodes whose self-loop was added.
pub fn graphs_from_json(
    src: &str,
    n: usize,
) -> Result<(Vec<DiGraph>, Vec<Vec<usize>>), FormatError> {
    let doc: GraphsJson = serde_json::from_str(src)?;
    let list = match doc {
        GraphsJson::One(g) => vec![g],
        GraphsJson::Many(gs) => gs,
    };
    let mut graphs = Vec::new();
    let mut added = Vec::new();
    for (i, g) in list.iter().enumerate() {
        let (graph, loops) = DiGraph::with_self_loops(n, &g.edges)
            .map_err(|e: GraphError| FormatError::new(format!("graph {i}: {e}")))?;
        graphs.push(graph);
        added.push(loops);
    }
    Ok((graphs, added))
}

#[derive(Debug, Serialize)]
struct VerifiedJson {
    task_models_phi: bool,
    protocol_refutes_phi: bool,
}

#[derive(Debug, Serialize)]
struct VerdictJson<'a> {
    exists: bool,
    mode: String,
    n: usize,
    witness: Option<usize>,
    phi_file: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi: Option<String>,
    verified: Option<VerifiedJson>,
    step_totality: &'a [bool],
    chain_sizes: Vec<usize>,
}

/// The verdict, pointing at `phi_file` for the formula when given.
pub fn verdict_to_json(v: &ObstructionVerdict, phi_file: Option<&str>) -> String {
    verdict_json(v, phi_file, None)
}

/// The verdict with the formula inlined in shared S-expression form.
pub fn verdict_to_json_inline(v: &ObstructionVerdict, ws: &Workspace) -> String {
    let phi = v.phi.map(|phi| sexp::print_shared(&v.formulas, ws, phi));
    verdict_json(v, None, phi)
}

fn verdict_json(v: &ObstructionVerdict, phi_file: Option<&str>, phi: Option<String>) -> String {
    to_pretty(&VerdictJson {
        exists: v.exists,
        mode: v.mode.to_string(),
        n: v.n,
        witness: v.witness,
        phi_file,
        phi,
        verified: v.verification.map(|c| VerifiedJson {
            task_models_phi: c.task_models_phi,
            protocol_refutes_phi: c.protocol_refutes_phi,
        }),
        step_totality: &v.step_totality,
        chain_sizes: v.fixpoint.chain.iter().map(|r| r.len()).collect(),
    })
}

pub fn to_pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

pub fn read_file(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|e| FormatError::from(e).in_file(path))
}

pub fn load_model(path: &Path) -> Result<SimplicialModel, FormatError> {
    model_from_json(&read_file(path)?).map_err(|e| e.in_file(path))
}

pub fn load_action(path: &Path) -> Result<ActionModel, FormatError> {
    action_from_json(&read_file(path)?).map_err(|e| e.in_file(path))
}

pub fn load_relation(path: &Path) -> Result<Relation, FormatError> {
    relation_from_json(&read_file(path)?).map_err(|e| e.in_file(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_sa_task, gen_staircase_task};
    use crate::model::build_input_model;

    #[test]
    fn model_round_trip() {
        let ws = Workspace::numbered(3, 2);
        let m = build_input_model(&ws).unwrap();
        let text = model_to_json(&m);
        let back = model_from_json(&text).unwrap();
        assert_eq!(back.complex().facet_lists(), m.complex().facet_lists());
        assert_eq!(model_to_json(&back), text);
    }

    #[test]
    fn action_round_trip() {
        let ws = Workspace::numbered(3, 3);
        let a = gen_sa_task(2, &ws, None).unwrap();
        let text = action_to_json(&a.action);
        let back = action_from_json(&text).unwrap();
        assert_eq!(action_to_json(&back), text);
        let st = gen_staircase_task(4).unwrap();
        let text = action_to_json(&st.action);
        assert_eq!(action_to_json(&action_from_json(&text).unwrap()), text);
    }

    #[test]
    fn errors_carry_lines() {
        let err = model_from_json("{\n  \"agents\": [\"a\"],\n  \"vertices\": 3\n}").unwrap_err();
        assert_eq!(err.line, Some(3));
        let bad = r#"{"agents":["a"],"vertices":[{"id":0,"color":0,"atoms":[["b","0"]]}],"facets":[[0]]}"#;
        assert!(model_from_json(bad)
            .unwrap_err()
            .msg
            .contains("unknown agent"));
    }

    #[test]
    fn relation_round_trip() {
        let r = Relation::from_pairs(2, 3, &[(0, 2), (1, 0)]).unwrap();
        assert_eq!(
            relation_to_json(&r),
            "{\"dims\":[2,3],\"pairs\":[[0,2],[1,0]]}\n"
        );
        assert_eq!(relation_from_json(&relation_to_json(&r)).unwrap(), r);
        assert!(relation_from_json("{\"dims\":[1,1],\"pairs\":[[0,1]]}").is_err());
    }

    #[test]
    fn graphs_gain_self_loops() {
        let (gs, added) =
            graphs_from_json(r#"[{"edges":[[0,1]]},{"edges":[[0,0],[1,1]]}]"#, 2).unwrap();
        assert_eq!(gs.len(), 2);
        assert_eq!(added, vec![vec![0, 1], vec![]]);
    }
}
