//! Command-line front end: every subcommand reads JSON artifacts and prints a
//! [`CommandResult`] envelope; the exit code mirrors its status.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::engine::{
    back_and_forth, build_generic_tower, clique_fiber_subtower, extend_tower, extension_witness,
    open_tower_map, triangle_persistence, verify_openness_claim, EnumerationBudget, DEFAULT_SIZE_CAP,
};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::io::{
    from_value, graph_to_dot, parse, to_string, ChainDoc, ComplexDoc, CylinderDoc, GraphDoc, HomologyDoc, IntertwinerDoc,
    LocalRefinementDoc, MorphismDoc, OpenMapDoc, PullbackDoc, SimplicialMapDoc, SquareDoc, TowerDoc, WitnessDoc,
};
use crate::ops::{
    amalgamate, collapse_map, cylinder_extension, is_exact, is_structurally_exact, local_refinement,
    mapping_cylinder, minimal_amalgam, subdivide_edges, Side,
};
use crate::simplicial::{
    acyclic_map_violation, amalgamate_acyclic, boundary, in_class_acyclic, is_n_acyclic, reduced_homology,
    simplicial_pullback, solve_boundary,
};

/// Environment variable overriding the default tower size cap.
pub const SIZE_CAP_ENV: &str = "FRAISSE_SIZE_CAP";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    ContractViolation,
    WitnessNotFound,
    ResourceLimit,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::ContractViolation => 2,
            Status::WitnessNotFound => 3,
            Status::ResourceLimit => 4,
        }
    }

    fn of(e: &Error) -> Status {
        match e {
            Error::WitnessNotFound(_) => Status::WitnessNotFound,
            Error::ResourceLimit(_) => Status::ResourceLimit,
            _ => Status::ContractViolation,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommandResult {
    pub status: Status,
    pub payload: Value,
    pub diagnostics: Vec<String>,
}

impl CommandResult {
    fn ok(payload: Value) -> Self {
        CommandResult {
            status: Status::Ok,
            payload,
            diagnostics: Vec::new(),
        }
    }

    fn failed(e: &Error, payload: Value) -> Self {
        CommandResult {
            status: Status::of(e),
            payload,
            diagnostics: vec![e.to_string()],
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }
}

#[derive(Parser, Debug)]
#[command(name = "fraisse", version, about = "Connected-epimorphism graphs, generic towers and acyclic complexes")]
pub struct Cli {
    /// Compact JSON output (the default).
    #[arg(long, global = true, conflicts_with = "pretty")]
    pub json: bool,
    /// Indented JSON output.
    #[arg(long, global = true)]
    pub pretty: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Whether a morphism is a connected epimorphism.
    CheckEpi { morphism: PathBuf },
    /// Amalgam of two morphisms with a common target.
    Amalgamate {
        f: PathBuf,
        g: PathBuf,
        /// Thin the fiber product to a vertex-minimal amalgam.
        #[arg(long)]
        minimal: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Whether a square hits every compatible pair.
    CheckExact { square: PathBuf },
    /// Structural exactness of a square on one or both sides.
    CheckStructural {
        square: PathBuf,
        #[arg(long, value_enum, default_value_t = SideArg::Both)]
        side: SideArg,
    },
    /// Mapping cylinder of `alpha: X -> A` with its retraction.
    Cylinder { alpha: PathBuf },
    /// Extension of `g` to the mapping cylinders of `beta` and `alpha`.
    CylinderExt {
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        beta: PathBuf,
        #[arg(long)]
        alpha: PathBuf,
    },
    /// Subdivide every edge `times` times; with `--gamma`, also the collapse map.
    Subdivide {
        graph: PathBuf,
        #[arg(long, default_value_t = 1)]
        times: usize,
        /// JSON list of `{"edge": [a, b], "threshold": k}`.
        #[arg(long)]
        gamma: Option<PathBuf>,
    },
    /// Local refinement of `f` along the embedding `i`.
    LocalRefine { f: PathBuf, i: PathBuf },
    /// Generic towers and the maps between them.
    #[command(subcommand)]
    Tower(TowerCommand),
    /// Simplicial complexes, chains and acyclicity.
    #[command(subcommand)]
    Sx(SxCommand),
    /// DOT rendering of a graph without loops.
    ExportDot {
        graph: PathBuf,
        #[arg(long, default_value = "G")]
        name: String,
        /// Also write the DOT text to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    F,
    G,
    Both,
}

#[derive(Args, Debug, Clone)]
pub struct BudgetArgs {
    #[arg(long, default_value_t = 3)]
    pub max_vertices: usize,
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Absolute vertex cap per level; defaults to the environment override or 60.
    #[arg(long)]
    pub size_cap: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum TowerCommand {
    /// Build a generic tower.
    Build(BudgetArgs),
    /// Add stages to a stored tower.
    Extend {
        tower: PathBuf,
        #[arg(long)]
        depth: usize,
    },
    /// Smallest level carrying a lift of `f` through `g`.
    Witness {
        tower: PathBuf,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
    },
    /// Back-and-forth maps between two towers.
    Zigzag {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, default_value_t = 1)]
        rounds: usize,
    },
    /// Count 3-cliques of a deep level that project onto 3-cliques.
    Triangles {
        tower: PathBuf,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
    },
    /// Coherent maps from a source tower onto a target tower.
    Openmap { source: PathBuf, target: PathBuf },
    /// Subtower over a thread of cliques of the target.
    Fiber {
        source: PathBuf,
        target: PathBuf,
        /// Output of `tower openmap`.
        map: PathBuf,
        /// JSON list, per target level, of the clique's vertex names.
        #[arg(long)]
        thread: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
pub enum SxCommand {
    /// Normalize a complex and list its faces.
    Closure { complex: PathBuf },
    Skeleton {
        complex: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        dim: isize,
    },
    Pullback { f: PathBuf, g: PathBuf },
    Boundary { chain: PathBuf },
    /// Some chain whose boundary is the given cycle.
    Solve { complex: PathBuf, chain: PathBuf },
    Homology {
        complex: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        degree: isize,
    },
    Acyclic {
        complex: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        n: isize,
    },
    AcyclicMap {
        map: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        m: isize,
    },
    Amalgamate {
        f: PathBuf,
        g: PathBuf,
        #[arg(long)]
        n: isize,
    },
}

fn read_text(path: &Path) -> Result<String> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Error::contract(format!("reading stdin: {e}")))?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| Error::contract(format!("reading {}: {e}", path.display())))?
    };
    Ok(text)
}

/// Reads a document, or the payload of a saved result envelope.
fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    let value: Value = parse(&text).map_err(within_file(path))?;
    let value = match value {
        Value::Object(mut obj) if obj.contains_key("status") && obj.contains_key("payload") => {
            obj.remove("payload").expect("checked")
        }
        other => other,
    };
    from_value(value).map_err(within_file(path))
}

fn within_file(path: &Path) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::MalformedInput { path: p, message } => Error::MalformedInput {
            path: format!("{}#{p}", path.display()),
            message,
        },
        other => other,
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn size_cap(flag: Option<usize>) -> Result<usize> {
    if let Some(cap) = flag {
        return Ok(cap);
    }
    match std::env::var(SIZE_CAP_ENV) {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| Error::contract(format!("{SIZE_CAP_ENV}={text:?} is not a vertex count"))),
        Err(_) => Ok(DEFAULT_SIZE_CAP),
    }
}

#[derive(Deserialize)]
struct GammaEntry {
    edge: [String; 2],
    threshold: usize,
}

/// Parses arguments and runs the command; returns the envelope and exit code.
pub fn run<I, T>(args: I) -> (CommandResult, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let result = CommandResult {
                status: Status::ContractViolation,
                payload: Value::Null,
                diagnostics: vec![e.to_string()],
            };
            return (result, 2);
        }
    };
    let result = match dispatch(&cli.command) {
        Ok(result) => result,
        Err(e) => CommandResult::failed(&e, Value::Null),
    };
    let code = result.exit_code();
    (result, code)
}

/// Runs the process: prints the envelope and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let pretty = args.iter().any(|a| a == "--pretty");
    let wants_help = args.iter().any(|a| a == "--help" || a == "-h" || a == "--version" || a == "-V");
    if wants_help {
        if let Err(e) = Cli::try_parse_from(&args) {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    }
    let (result, code) = run(args);
    println!("{}", to_string(&result, pretty));
    code
}

fn dispatch(command: &Command) -> Result<CommandResult> {
    Ok(match command {
        Command::CheckEpi { morphism } => {
            let m = load::<MorphismDoc>(morphism)?.to_morphism()?;
            let mut result = CommandResult::ok(json!({ "connected_epi": m.is_connected_epi() }));
            if !m.is_homomorphism() {
                result.diagnostics.push("map is not a graph homomorphism".into());
            }
            result
        }
        Command::Amalgamate { f, g, minimal, seed } => {
            let f = load::<MorphismDoc>(f)?.to_morphism()?;
            let g = load::<MorphismDoc>(g)?.to_morphism()?;
            let sq = if *minimal {
                use rand::SeedableRng;
                minimal_amalgam(&f, &g, &mut rand_chacha::ChaCha8Rng::seed_from_u64(*seed))?
            } else {
                amalgamate(&f, &g)?
            };
            CommandResult::ok(to_value(&SquareDoc::from_square(&sq)))
        }
        Command::CheckExact { square } => {
            let sq = load::<SquareDoc>(square)?.to_square()?;
            if !sq.commutes() {
                return Err(Error::contract("square does not commute"));
            }
            CommandResult::ok(json!({ "exact": is_exact(&sq) }))
        }
        Command::CheckStructural { square, side } => {
            let sq = load::<SquareDoc>(square)?.to_square()?;
            let mut out = serde_json::Map::new();
            if matches!(side, SideArg::F | SideArg::Both) {
                out.insert("f".into(), Value::Bool(is_structurally_exact(&sq, Side::F)?));
            }
            if matches!(side, SideArg::G | SideArg::Both) {
                out.insert("g".into(), Value::Bool(is_structurally_exact(&sq, Side::G)?));
            }
            CommandResult::ok(Value::Object(out))
        }
        Command::Cylinder { alpha } => {
            let alpha = load::<MorphismDoc>(alpha)?.to_morphism()?;
            CommandResult::ok(to_value(&CylinderDoc::from_result(&mapping_cylinder(&alpha)?)))
        }
        Command::CylinderExt { g, beta, alpha } => {
            let g = load::<MorphismDoc>(g)?.to_morphism()?;
            let beta = load::<MorphismDoc>(beta)?.to_morphism()?;
            let alpha = load::<MorphismDoc>(alpha)?.to_morphism()?;
            let ext = cylinder_extension(&g, &beta, &alpha)?;
            CommandResult::ok(to_value(&MorphismDoc::from_morphism(&ext)))
        }
        Command::Subdivide { graph, times, gamma } => {
            let a = load::<GraphDoc>(graph)?.to_graph()?;
            let sub = subdivide_edges(&a, *times)?;
            let mut payload = json!({ "graph": GraphDoc::from_graph(&sub) });
            if let Some(path) = gamma {
                let entries: Vec<GammaEntry> = load(path)?;
                let thresholds = gamma_by_edge(&a, &entries)?;
                let collapse = collapse_map(&a, *times, &thresholds)?;
                payload["collapse"] = to_value(&MorphismDoc::from_morphism(&collapse));
            }
            CommandResult::ok(payload)
        }
        Command::LocalRefine { f, i } => {
            let f = load::<MorphismDoc>(f)?.to_morphism()?;
            let i = load::<MorphismDoc>(i)?.to_morphism()?;
            CommandResult::ok(to_value(&LocalRefinementDoc::from_result(&local_refinement(&f, &i)?)))
        }
        Command::Tower(t) => dispatch_tower(t)?,
        Command::Sx(s) => dispatch_sx(s)?,
        Command::ExportDot { graph, name, out } => {
            let g = load::<GraphDoc>(graph)?.to_graph()?;
            let dot = graph_to_dot(&g, name);
            if let Some(path) = out {
                fs::write(path, &dot).map_err(|e| Error::contract(format!("writing {}: {e}", path.display())))?;
            }
            CommandResult::ok(json!({ "dot": dot }))
        }
    })
}

fn gamma_by_edge(a: &Graph, entries: &[GammaEntry]) -> Result<Vec<usize>> {
    let mut by_edge = BTreeMap::new();
    for (k, e) in entries.iter().enumerate() {
        let path = format!("/{k}/edge");
        let u = a
            .index_of(&e.edge[0])
            .ok_or_else(|| Error::malformed(&path, format!("unknown vertex {:?}", e.edge[0])))?;
        let v = a
            .index_of(&e.edge[1])
            .ok_or_else(|| Error::malformed(&path, format!("unknown vertex {:?}", e.edge[1])))?;
        if !a.has_edge(u, v) {
            return Err(Error::malformed(&path, "not an edge"));
        }
        // Thresholds count from the endpoint listed first in the edge order.
        let (key, threshold) = if u < v { ((u, v), e.threshold) } else { ((v, u), e.threshold) };
        if by_edge.insert(key, threshold).is_some() {
            return Err(Error::malformed(&path, "edge listed twice"));
        }
    }
    a.edges()
        .into_iter()
        .map(|e| {
            by_edge
                .get(&e)
                .copied()
                .ok_or_else(|| Error::malformed("/", format!("no threshold for edge {:?}", (a.name(e.0), a.name(e.1)))))
        })
        .collect()
}

fn load_tower(path: &Path) -> Result<crate::engine::Tower> {
    load::<TowerDoc>(path)?.to_tower()
}

fn dispatch_tower(command: &TowerCommand) -> Result<CommandResult> {
    Ok(match command {
        TowerCommand::Build(b) => {
            let budget = EnumerationBudget::new(b.max_vertices, b.depth, b.seed).with_size_cap(size_cap(b.size_cap)?);
            let t = build_generic_tower(&budget)?;
            let mut result = CommandResult::ok(to_value(&TowerDoc::from_tower(&t)));
            for s in t.log.iter().filter(|s| s.truncated) {
                result.diagnostics.push(format!(
                    "stage {}: size cap left {} of {} obligations undischarged",
                    s.level,
                    s.obligations.len() - s.discharged(),
                    s.obligations.len()
                ));
            }
            result
        }
        TowerCommand::Extend { tower, depth } => {
            let t = extend_tower(load_tower(tower)?, *depth)?;
            CommandResult::ok(to_value(&TowerDoc::from_tower(&t)))
        }
        TowerCommand::Witness { tower, level, f, g } => {
            let t = load_tower(tower)?;
            let f = load::<MorphismDoc>(f)?.to_morphism()?;
            let g = load::<MorphismDoc>(g)?.to_morphism()?;
            let w = extension_witness(&t, *level, &f, &g)?;
            CommandResult::ok(to_value(&WitnessDoc::from_witness(&w)))
        }
        TowerCommand::Zigzag { first, second, rounds } => {
            let (t1, t2) = (load_tower(first)?, load_tower(second)?);
            match back_and_forth(&t1, &t2, *rounds) {
                Ok(i) => {
                    let mut payload = to_value(&IntertwinerDoc::from_intertwiner(&i));
                    payload["verified"] = Value::Bool(i.verify(&t1, &t2));
                    CommandResult::ok(payload)
                }
                Err(p) => CommandResult::failed(&p.error, to_value(&IntertwinerDoc::from_intertwiner(&p.partial))),
            }
        }
        TowerCommand::Triangles { tower, from, to } => {
            let t = load_tower(tower)?;
            CommandResult::ok(json!({ "count": triangle_persistence(&t, *from, *to)? }))
        }
        TowerCommand::Openmap { source, target } => {
            let (s, t) = (load_tower(source)?, load_tower(target)?);
            match open_tower_map(&s, &t) {
                Ok(m) => {
                    let mut payload = to_value(&OpenMapDoc::from_map(&m));
                    payload["coherent"] = Value::Bool(m.is_coherent(&s, &t));
                    payload["openness"] =
                        Value::from((0..m.squares.len()).map(|i| verify_openness_claim(&s, &t, &m, i)).collect::<Vec<_>>());
                    CommandResult::ok(payload)
                }
                Err(p) => CommandResult::failed(&p.error, to_value(&OpenMapDoc::from_map(&p.partial))),
            }
        }
        TowerCommand::Fiber { source, target, map, thread } => {
            let (s, t) = (load_tower(source)?, load_tower(target)?);
            let m = load::<OpenMapDoc>(map)?.to_map()?;
            let names: Vec<Vec<String>> = load(thread)?;
            let mut indices = Vec::with_capacity(names.len());
            for (i, q) in names.iter().enumerate() {
                let level = t.level(i)?;
                indices.push(
                    q.iter()
                        .map(|n| {
                            level
                                .index_of(n)
                                .ok_or_else(|| Error::malformed(format!("/{i}"), format!("unknown vertex {n:?}")))
                        })
                        .collect::<Result<Vec<_>>>()?,
                );
            }
            let sub = clique_fiber_subtower(&s, &t, &m, &indices)?;
            CommandResult::ok(to_value(&TowerDoc::from_tower(&sub)))
        }
    })
}

fn dispatch_sx(command: &SxCommand) -> Result<CommandResult> {
    Ok(match command {
        SxCommand::Closure { complex } => {
            let c = load::<ComplexDoc>(complex)?.to_complex()?;
            CommandResult::ok(to_value(&ComplexDoc::with_summary(&c)))
        }
        SxCommand::Skeleton { complex, dim } => {
            if *dim < -1 {
                return Err(Error::contract("skeleton dimension must be at least -1"));
            }
            let c = load::<ComplexDoc>(complex)?.to_complex()?;
            CommandResult::ok(to_value(&ComplexDoc::from_complex(&c.skeleton(*dim))))
        }
        SxCommand::Pullback { f, g } => {
            let f = load::<SimplicialMapDoc>(f)?.to_map()?;
            let g = load::<SimplicialMapDoc>(g)?.to_map()?;
            CommandResult::ok(to_value(&PullbackDoc::from_pullback(&simplicial_pullback(&f, &g)?)))
        }
        SxCommand::Boundary { chain } => {
            let z = load::<ChainDoc>(chain)?.to_chain()?;
            CommandResult::ok(to_value(&ChainDoc::from_chain(&boundary(&z))))
        }
        SxCommand::Solve { complex, chain } => {
            let c = load::<ComplexDoc>(complex)?.to_complex()?;
            let z = load::<ChainDoc>(chain)?.to_chain()?;
            match solve_boundary(&c, &z)? {
                Some(eta) => CommandResult::ok(json!({ "solution": ChainDoc::from_chain(&eta) })),
                None => CommandResult::ok(json!({ "solution": null })),
            }
        }
        SxCommand::Homology { complex, degree } => {
            let c = load::<ComplexDoc>(complex)?.to_complex()?;
            CommandResult::ok(to_value(&HomologyDoc::from_report(&reduced_homology(&c, *degree)?)))
        }
        SxCommand::Acyclic { complex, n } => {
            let c = load::<ComplexDoc>(complex)?.to_complex()?;
            CommandResult::ok(json!({
                "acyclic": is_n_acyclic(&c, *n),
                "in_class": in_class_acyclic(&c, *n + 1),
            }))
        }
        SxCommand::AcyclicMap { map, m } => {
            let f = load::<SimplicialMapDoc>(map)?.to_map()?;
            let violation = acyclic_map_violation(&f, *m);
            CommandResult::ok(json!({
                "acyclic_map": violation.is_none(),
                "violation": violation.map(|(face, degree)| json!({ "face": face, "degree": degree })),
            }))
        }
        SxCommand::Amalgamate { f, g, n } => {
            let f = load::<SimplicialMapDoc>(f)?.to_map()?;
            let g = load::<SimplicialMapDoc>(g)?.to_map()?;
            CommandResult::ok(to_value(&PullbackDoc::from_pullback(&amalgamate_acyclic(&f, &g, *n)?)))
        }
    })
}
