use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use epiobs::case_is2;
use epiobs::generators::{
    build_knowall, gen_is_protocol, gen_knowall_protocol, gen_sa_task, gen_staircase_task,
    gen_trivial_protocol, staircase_workspace, DiGraph,
};
use epiobs::io::{self, FormatError};
use epiobs::logic::{sexp, Checker, Formulas, ValueId};
use epiobs::model::{
    build_input_model, find_morphism, graph_of_morphism, product_update, ModelError, Workspace,
};
use epiobs::obstruction::{decide_obstruction, ObstructionError};
use epiobs::simulation::{Mode, Simulation};

const EXPAND_LIMIT: u64 = 10_000_000;

#[derive(Parser)]
#[command(
    name = "epiobs",
    version,
    about = "Simulations and logical obstructions for distributed tasks"
)]
struct Cli {
    /// Worker threads for simulation and verification (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Directory that relative file paths are resolved against.
    #[arg(long, global = true, env = "EPIOBS_WORKSPACE")]
    workspace: Option<PathBuf>,
    /// Reserved; no code path is randomized.
    #[arg(long, global = true, hide = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate input models, protocols and tasks.
    #[command(subcommand)]
    Gen(Gen),
    /// Product update of an input model with an action model.
    Update {
        /// Action model file, or `-` for stdin.
        #[arg(long, default_value = "-")]
        action: String,
        /// `default` for all input assignments over the action's workspace, or a model file.
        #[arg(long, default_value = "default")]
        input: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Also write the (facet, source, action) provenance triples.
        #[arg(long)]
        provenance: Option<PathBuf>,
    },
    /// Compute the maximum K- or D-simulation.
    Simulate {
        #[command(flatten)]
        pair: ModelPair,
        /// Write the maximum simulation.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Write every relation of the chain as `S_<n>.json` into this directory.
        #[arg(long)]
        chain_dir: Option<PathBuf>,
    },
    /// Decide whether a logical obstruction exists and emit it.
    Obstruct {
        #[command(flatten)]
        pair: ModelPair,
        /// Write the obstruction formula here.
        #[arg(long)]
        phi_out: Option<PathBuf>,
        /// Write the formula as a tree instead of with `let` sharing.
        #[arg(long)]
        expand: bool,
        /// Write the verdict here instead of stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a formula or verify a candidate simulation.
    #[command(subcommand)]
    Check(Check),
    /// Search for a morphism between two simplicial models.
    Morphism {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run the two-round, three-agent 2-set agreement case study.
    CaseIs2 {
        /// Restrict to the single input facet where agent a has input a.
        #[arg(long)]
        single_input: bool,
        /// Write R^{p,q} dumps and relations here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ModelPair {
    #[arg(long)]
    protocol: String,
    #[arg(long)]
    task: String,
    #[arg(long, default_value = "K")]
    mode: Mode,
}

#[derive(Args)]
struct WorkspaceArgs {
    #[arg(long, default_value_t = 2)]
    agents: usize,
    #[arg(long, default_value_t = 2)]
    values: usize,
    /// Comma-separated agent names (default 0, 1, ...).
    #[arg(long, value_delimiter = ',')]
    agent_names: Vec<String>,
    /// Comma-separated value names (default 0, 1, ...).
    #[arg(long, value_delimiter = ',')]
    value_names: Vec<String>,
}

impl WorkspaceArgs {
    fn build(&self) -> Result<Workspace, Failure> {
        let mut ws = Workspace::numbered(self.agents, self.values);
        if !self.agent_names.is_empty() {
            if self.agent_names.len() != self.agents {
                return Err(Failure::Usage("--agent-names must name every agent".into()));
            }
            ws.agents = self.agent_names.clone();
        }
        if !self.value_names.is_empty() {
            if self.value_names.len() != self.values {
                return Err(Failure::Usage("--value-names must name every value".into()));
            }
            ws.values = self.value_names.clone();
        }
        Ok(ws)
    }
}

#[derive(Subcommand)]
enum Gen {
    /// The input model: every assignment of values to agents.
    Input {
        #[command(flatten)]
        ws: WorkspaceArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// The iterated immediate snapshot protocol.
    Is {
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        #[command(flatten)]
        ws: WorkspaceArgs,
        /// Generate over this input model instead of all assignments.
        #[arg(long)]
        input: Option<String>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// The k-set agreement task.
    Sa {
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        ws: WorkspaceArgs,
        /// Comma-separated decision values (default: all values).
        #[arg(long, value_delimiter = ',')]
        decisions: Vec<String>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// A know-all protocol from a sequence of communication graphs.
    Knowall {
        #[arg(long, default_value_t = 1)]
        rounds: usize,
        #[command(flatten)]
        ws: WorkspaceArgs,
        /// JSON file with `{"edges": [[p, q], ...]}` or a list of such objects.
        #[arg(long, conflicts_with_all = ["self_loops_only", "complete"])]
        graphs: Option<String>,
        /// Every round uses the graph with only self-loops.
        #[arg(long)]
        self_loops_only: bool,
        /// Every round uses the complete graph.
        #[arg(long)]
        complete: bool,
        /// Print the composed graph and its domination number to stderr.
        #[arg(long)]
        report: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// The two-agent staircase task cut off at a maximum decision.
    Staircase {
        #[arg(long, default_value_t = 4)]
        max_decision: usize,
        /// Emit the one-facet protocol with precondition ⊤ instead.
        #[arg(long)]
        protocol: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Check {
    /// Evaluate a formula on a model.
    Formula {
        #[arg(long)]
        model: String,
        /// The formula as an S-expression.
        #[arg(long, conflicts_with = "formula_file")]
        formula: Option<String>,
        #[arg(long)]
        formula_file: Option<String>,
        /// Report only this facet.
        #[arg(long)]
        facet: Option<usize>,
    },
    /// Verify that a relation is a (total) simulation.
    Relation {
        #[command(flatten)]
        pair: ModelPair,
        #[arg(long)]
        relation: String,
        /// Counterexamples to print.
        #[arg(long, default_value_t = 10)]
        limit: usize,
    },
}

enum Failure {
    Usage(String),
    Inconsistent(String),
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Failure {
        Failure::Usage(e.to_string())
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Failure {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Usage(e.to_string())
    }
}

impl From<ObstructionError> for Failure {
    fn from(e: ObstructionError) -> Failure {
        match e {
            ObstructionError::Inconsistent { .. } => Failure::Inconsistent(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

struct Ctx {
    dir: Option<PathBuf>,
}

impl Ctx {
    fn path(&self, p: &Path) -> PathBuf {
        match &self.dir {
            Some(d) if p.is_relative() => d.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn read(&self, p: &str) -> Result<(String, PathBuf), Failure> {
        if p == "-" {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            return Ok((s, PathBuf::from("<stdin>")));
        }
        let path = self.path(Path::new(p));
        Ok((io::read_file(&path)?, path))
    }

    fn model(&self, p: &str) -> Result<epiobs::SimplicialModel, Failure> {
        let (text, path) = self.read(p)?;
        Ok(io::model_from_json(&text).map_err(|e| with_file(e, &path))?)
    }

    fn action(&self, p: &str) -> Result<epiobs::ActionModel, Failure> {
        let (text, path) = self.read(p)?;
        Ok(io::action_from_json(&text).map_err(|e| with_file(e, &path))?)
    }

    fn write(&self, out: Option<&Path>, content: &str) -> Result<(), Failure> {
        match out {
            Some(p) => {
                let path = self.path(p);
                if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(parent)?;
                }
                std::fs::write(&path, content)
                    .map_err(|e| usage(format!("{}: {e}", path.display())))
            }
            None => {
                print!("{content}");
                Ok(())
            }
        }
    }
}

fn with_file(mut e: FormatError, path: &Path) -> FormatError {
    e.file.get_or_insert_with(|| path.to_path_buf());
    e
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let ctx = Ctx { dir: cli.workspace };
    match run(&ctx, cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Inconsistent(msg)) => {
            eprintln!("internal consistency failure: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(ctx: &Ctx, cmd: Command) -> Result<u8, Failure> {
    match cmd {
        Command::Gen(g) => run_gen(ctx, g),
        Command::Update {
            action,
            input,
            out,
            provenance,
        } => {
            let a = ctx.action(&action)?;
            let m = if input == "default" {
                build_input_model(a.workspace())?
            } else {
                ctx.model(&input)?
            };
            let up = product_update(&m, &a)?;
            ctx.write(out.as_deref(), &io::model_to_json(&up.model))?;
            if let Some(p) = provenance {
                ctx.write(Some(&p), &io::provenance_to_json(&up.facet_sources))?;
            }
            Ok(0)
        }
        Command::Simulate {
            pair,
            out,
            chain_dir,
        } => {
            let (m, t) = (ctx.model(&pair.protocol)?, ctx.model(&pair.task)?);
            let sim = Simulation::new(&m, &t).map_err(usage)?;
            let fix = sim.max_simulation(pair.mode);
            if let Some(dir) = chain_dir {
                for (n, r) in fix.chain.iter().enumerate() {
                    ctx.write(
                        Some(&dir.join(format!("S_{n}.json"))),
                        &io::relation_to_json(r),
                    )?;
                }
            }
            if let Some(p) = out {
                ctx.write(Some(&p), &io::relation_to_json(fix.relation()))?;
            }
            let summary = json!({
                "mode": pair.mode.to_string(),
                "stabilized_at": fix.stabilized_at(),
                "chain_sizes": fix.chain.iter().map(|r| r.len()).collect::<Vec<_>>(),
                "step_totality": fix.chain.iter().map(|r| r.is_total()).collect::<Vec<_>>(),
                "total": fix.relation().is_total(),
                "non_total": fix.relation().totality_witnesses(),
            });
            ctx.write(None, &io::to_pretty(&summary))?;
            Ok(0)
        }
        Command::Obstruct {
            pair,
            phi_out,
            expand,
            out,
        } => {
            let (m, t) = (ctx.model(&pair.protocol)?, ctx.model(&pair.task)?);
            let verdict = decide_obstruction(&m, &t, pair.mode)?;
            let mut phi_name = None;
            if let (Some(phi), Some(p)) = (verdict.phi, &phi_out) {
                let text = if expand {
                    sexp::print_expanded(&verdict.formulas, m.workspace(), phi, EXPAND_LIMIT)
                        .map_err(usage)?
                } else {
                    sexp::print_shared(&verdict.formulas, m.workspace(), phi)
                };
                ctx.write(Some(p), &(text + "\n"))?;
                phi_name = Some(p.display().to_string());
            }
            ctx.write(
                out.as_deref(),
                &io::verdict_to_json(&verdict, phi_name.as_deref()),
            )?;
            Ok(if verdict.exists { 1 } else { 0 })
        }
        Command::Check(Check::Formula {
            model,
            formula,
            formula_file,
            facet,
        }) => {
            let m = ctx.model(&model)?;
            let text = match (formula, formula_file) {
                (Some(f), _) => f,
                (None, Some(p)) => ctx.read(&p)?.0,
                (None, None) => return Err(usage("give --formula or --formula-file")),
            };
            let mut store = Formulas::new();
            let phi = sexp::parse_formula(&text, m.workspace(), &mut store).map_err(usage)?;
            let mut checker = Checker::new(&m, &store);
            let report = match facet {
                Some(x) => json!({
                    "class": store.classify(phi).to_string(),
                    "degree": store.degree(phi),
                    "facet": x,
                    "holds": checker.eval(x, phi).map_err(usage)?,
                }),
                None => {
                    let set = checker.truth_set(phi).map_err(usage)?.clone();
                    let refuted: Vec<usize> =
                        (0..m.facet_count()).filter(|&x| !set.contains(x)).collect();
                    json!({
                        "class": store.classify(phi).to_string(),
                        "degree": store.degree(phi),
                        "holds_everywhere": refuted.is_empty(),
                        "refuted_at": refuted,
                    })
                }
            };
            ctx.write(None, &io::to_pretty(&report))?;
            Ok(0)
        }
        Command::Check(Check::Relation {
            pair,
            relation,
            limit,
        }) => {
            let (m, t) = (ctx.model(&pair.protocol)?, ctx.model(&pair.task)?);
            let (text, path) = ctx.read(&relation)?;
            let r = io::relation_from_json(&text).map_err(|e| with_file(e, &path))?;
            let sim = Simulation::new(&m, &t).map_err(usage)?;
            let rep = sim.verify(&r, pair.mode, limit).map_err(usage)?;
            let cx: Vec<_> = rep
                .counterexamples
                .iter()
                .map(|c| {
                    json!({
                        "kind": format!("{:?}", c.kind),
                        "x": c.x,
                        "x_prime": c.x_prime,
                        "y": c.y,
                        "agent": c.agent.map(|a| a.0),
                    })
                })
                .collect();
            let report = json!({
                "mode": pair.mode.to_string(),
                "atom_ok": rep.atom_ok,
                "forth_ok": rep.forth_ok,
                "total": rep.total,
                "violations": rep.violations,
                "non_total": rep.non_total,
                "counterexamples": cx,
            });
            ctx.write(None, &io::to_pretty(&report))?;
            Ok(0)
        }
        Command::Morphism { from, to, out } => {
            let (m, t) = (ctx.model(&from)?, ctx.model(&to)?);
            let found = find_morphism(&m, &t)?;
            let report = match &found {
                None => json!({ "found": false }),
                Some(f) => {
                    let g = graph_of_morphism(&m, &t, f).map_err(usage)?;
                    let sim = Simulation::new(&m, &t).map_err(usage)?;
                    let k = sim
                        .verify(&g, Mode::K, 0)
                        .map_err(usage)?
                        .is_total_simulation();
                    let d = sim
                        .verify(&g, Mode::D, 0)
                        .map_err(usage)?
                        .is_total_simulation();
                    json!({
                        "found": true,
                        "vmap": f.vmap,
                        "graph_is_k_simulation": k,
                        "graph_is_d_simulation": d,
                    })
                }
            };
            ctx.write(out.as_deref(), &io::to_pretty(&report))?;
            Ok(0)
        }
        Command::CaseIs2 {
            single_input,
            out_dir,
        } => run_case(ctx, single_input, out_dir),
    }
}

fn run_gen(ctx: &Ctx, g: Gen) -> Result<u8, Failure> {
    match g {
        Gen::Input { ws, out } => {
            let m = build_input_model(&ws.build()?)?;
            ctx.write(out.as_deref(), &io::model_to_json(&m))?;
        }
        Gen::Is {
            rounds,
            ws,
            input,
            out,
        } => {
            let input = match input {
                Some(p) => ctx.model(&p)?,
                None => build_input_model(&ws.build()?)?,
            };
            let p = gen_is_protocol(rounds, &input)?;
            if p.collisions() > 0 {
                eprintln!(
                    "note: {} γ-sequences produced duplicate facets",
                    p.collisions()
                );
            }
            ctx.write(out.as_deref(), &io::action_to_json(&p.action))?;
        }
        Gen::Sa {
            k,
            ws,
            decisions,
            out,
        } => {
            let ws = ws.build()?;
            let values = decisions
                .iter()
                .map(|d| {
                    ws.value_index(d)
                        .map(ValueId)
                        .ok_or_else(|| usage(format!("unknown decision value `{d}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let task = gen_sa_task(k, &ws, (!values.is_empty()).then_some(&values[..]))?;
            ctx.write(out.as_deref(), &io::action_to_json(&task.action))?;
        }
        Gen::Knowall {
            rounds,
            ws,
            graphs,
            self_loops_only,
            complete,
            report,
            out,
        } => {
            let ws = ws.build()?;
            let n = ws.n_agents();
            let gs = match graphs {
                Some(p) => {
                    let (text, path) = ctx.read(&p)?;
                    let (gs, added) =
                        io::graphs_from_json(&text, n).map_err(|e| with_file(e, &path))?;
                    for (i, loops) in added.iter().enumerate().filter(|(_, l)| !l.is_empty()) {
                        eprintln!("note: graph {i}: added self-loops at nodes {loops:?}");
                    }
                    if gs.len() == 1 {
                        vec![gs[0].clone(); rounds]
                    } else {
                        gs
                    }
                }
                None if complete => vec![DiGraph::complete(n); rounds],
                None if self_loops_only => vec![DiGraph::self_loops(n); rounds],
                None => return Err(usage("give --graphs, --self-loops-only or --complete")),
            };
            let input = build_input_model(&ws)?;
            let p = gen_knowall_protocol(&gs, rounds, &input)?;
            if report {
                eprintln!(
                    "G_<=r edges {:?}, domination number {}",
                    p.graph.edges(),
                    p.graph.domination_number()
                );
            }
            // building the product validates the protocol against its input model
            build_knowall(&gs, rounds, &input)?;
            ctx.write(out.as_deref(), &io::action_to_json(&p.action))?;
        }
        Gen::Staircase {
            max_decision,
            protocol,
            out,
        } => {
            let a = if protocol {
                gen_trivial_protocol(&staircase_workspace())?
            } else {
                gen_staircase_task(max_decision)?.action
            };
            ctx.write(out.as_deref(), &io::action_to_json(&a))?;
        }
    }
    Ok(0)
}

fn run_case(ctx: &Ctx, single_input: bool, out_dir: Option<PathBuf>) -> Result<u8, Failure> {
    let (iis, sa) = case_is2::build_case(single_input)?;
    let rpqs = case_is2::all_rpq(&iis)?;
    let index = case_is2::VertexViewIndex::new(&iis);
    let mut ok = true;
    let mut layers = Vec::new();
    for r in &rpqs {
        let violations = case_is2::location_violations(&iis, r);
        ok &= violations.is_empty();
        let mut entry = json!({
            "p": r.p,
            "q": r.q,
            "stabilized_at": r.stabilized_at(),
            "additions": r.additions(),
            "final_size": r.result.len(),
            "location_violations": violations.len(),
        });
        if single_input {
            let mismatches = case_is2::swap_symmetry_mismatches(&iis, &index, r.p, r.q)?;
            ok &= mismatches.is_empty();
            entry["swap_symmetry_mismatches"] = json!(mismatches.len());
        }
        layers.push(entry);
        if let Some(dir) = &out_dir {
            ctx.write(
                Some(&dir.join(format!("rpq_{}_{}.json", r.p, r.q))),
                &io::to_pretty(r),
            )?;
        }
    }
    let s = case_is2::explicit_sa2_relation(&iis, &sa, &rpqs, true)?;
    let loose = case_is2::explicit_sa2_relation(&iis, &sa, &rpqs, false)?;
    let sim = Simulation::new(&iis.model, &sa.model).map_err(usage)?;
    let rep = sim.verify(&s, Mode::D, 5).map_err(usage)?;
    let totality = case_is2::totality_construction_failures(&iis, &sa, &s);
    let verdict = decide_obstruction(&iis.model, &sa.model, Mode::D)?;
    let contained = s.is_subset(verdict.fixpoint.relation());
    ok &= rep.is_total_simulation() && totality.is_empty() && !verdict.exists && contained;
    if let Some(dir) = &out_dir {
        ctx.write(
            Some(&dir.join("explicit_relation.json")),
            &io::relation_to_json(&s),
        )?;
        ctx.write(
            Some(&dir.join("max_simulation.json")),
            &io::relation_to_json(verdict.fixpoint.relation()),
        )?;
    }
    let summary = json!({
        "single_input": single_input,
        "iis2_facets": iis.model.facet_count(),
        "isa2_facets": sa.model.facet_count(),
        "rpq": layers,
        "explicit_relation": {
            "pairs": s.len(),
            "pairs_without_exclusion": loose.len(),
            "atom_ok": rep.atom_ok,
            "forth_ok": rep.forth_ok,
            "total": rep.total,
            "totality_construction_failures": totality.len(),
            "contained_in_max_simulation": contained,
        },
        "max_simulation": {
            "stabilized_at": verdict.n,
            "total": !verdict.exists,
        },
        "obstruction_exists": verdict.exists,
        "all_checks_pass": ok,
    });
    ctx.write(None, &io::to_pretty(&summary))?;
    if ok {
        Ok(0)
    } else {
        Err(Failure::Inconsistent(
            "case study checks failed; see the summary".into(),
        ))
    }
}
