//! JSON documents for every artifact and DOT export.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::engine::{
    EnumerationBudget, Intertwiner, Obligation, OpenTowerMap, StageLog, SubdivisionStep, Tower, Witness,
};
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphMorphism};
use crate::ops::{AmalgamSquare, CylinderResult, LocalRefinement};
use crate::simplicial::{Chain, HomologyReport, Pullback, SimplicialComplex, SimplicialMap};

/// Parses `text`, reporting the JSON path of the first mismatch.
pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(path_error)
}

/// Like [`parse`] for an already decoded value.
pub fn from_value<T: DeserializeOwned>(value: Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(path_error)
}

fn path_error(e: serde_path_to_error::Error<serde_json::Error>) -> Error {
    let path = e.path().to_string();
    Error::malformed(
        if path == "." { "/".to_string() } else { format!("/{}", path.replace('.', "/")) },
        e.into_inner().to_string(),
    )
}

pub fn to_string<T: Serialize>(value: &T, pretty: bool) -> String {
    if pretty {
        serde_json::to_string_pretty(value).expect("serializable")
    } else {
        serde_json::to_string(value).expect("serializable")
    }
}

/// Prefixes the path of a malformed-input error.
fn within(prefix: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::MalformedInput { path, message } => Error::MalformedInput {
            path: format!("{prefix}{path}"),
            message,
        },
        other => Error::malformed(prefix, other.to_string()),
    }
}

type NameMap = BTreeMap<String, String>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub vertices: Vec<String>,
    pub edges: Vec<[String; 2]>,
}

impl GraphDoc {
    pub fn from_graph(g: &Graph) -> Self {
        let mut edges: Vec<[String; 2]> = g
            .edges()
            .into_iter()
            .map(|(u, v)| {
                let (a, b) = (g.name(u).to_string(), g.name(v).to_string());
                if a <= b {
                    [a, b]
                } else {
                    [b, a]
                }
            })
            .collect();
        edges.sort();
        GraphDoc {
            vertices: g.names().to_vec(),
            edges,
        }
    }

    pub fn to_graph(&self) -> Result<Graph> {
        let pairs: Vec<(&str, &str)> = self.edges.iter().map(|[a, b]| (a.as_str(), b.as_str())).collect();
        Graph::new(&self.vertices, &pairs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDoc {
    pub source: GraphDoc,
    pub target: GraphDoc,
    pub map: NameMap,
}

impl MorphismDoc {
    pub fn from_morphism(m: &GraphMorphism) -> Self {
        MorphismDoc {
            source: GraphDoc::from_graph(m.source()),
            target: GraphDoc::from_graph(m.target()),
            map: m.assignment(),
        }
    }

    pub fn to_morphism(&self) -> Result<GraphMorphism> {
        let source = Arc::new(self.source.to_graph().map_err(within("/source"))?);
        let target = Arc::new(self.target.to_graph().map_err(within("/target"))?);
        GraphMorphism::from_names(source, target, &self.map)
    }
}

/// A map between graphs known from context, stored by vertex names.
fn map_between(source: &Arc<Graph>, target: &Arc<Graph>, map: &NameMap, path: &str) -> Result<GraphMorphism> {
    GraphMorphism::from_names(source.clone(), target.clone(), map).map_err(within(path))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareDoc {
    pub apex: GraphDoc,
    pub f: MorphismDoc,
    pub g: MorphismDoc,
    pub f_prime: NameMap,
    pub g_prime: NameMap,
}

impl SquareDoc {
    pub fn from_square(sq: &AmalgamSquare) -> Self {
        SquareDoc {
            apex: GraphDoc::from_graph(sq.apex()),
            f: MorphismDoc::from_morphism(&sq.f),
            g: MorphismDoc::from_morphism(&sq.g),
            f_prime: sq.f_prime.assignment(),
            g_prime: sq.g_prime.assignment(),
        }
    }

    pub fn to_square(&self) -> Result<AmalgamSquare> {
        let apex = Arc::new(self.apex.to_graph().map_err(within("/apex"))?);
        let f = self.f.to_morphism().map_err(within("/f"))?;
        let g = self.g.to_morphism().map_err(within("/g"))?;
        let f_prime = map_between(&apex, f.source(), &self.f_prime, "/f_prime")?;
        let g_prime = map_between(&apex, g.source(), &self.g_prime, "/g_prime")?;
        Ok(AmalgamSquare { f, g, f_prime, g_prime })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CylinderDoc {
    pub cylinder: GraphDoc,
    pub include_a: NameMap,
    pub include_x: NameMap,
    pub retraction: MorphismDoc,
}

impl CylinderDoc {
    pub fn from_result(c: &CylinderResult) -> Self {
        CylinderDoc {
            cylinder: GraphDoc::from_graph(&c.cylinder),
            include_a: c.include_a.assignment(),
            include_x: c.include_x.assignment(),
            retraction: MorphismDoc::from_morphism(&c.retraction),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalRefinementDoc {
    pub graph: GraphDoc,
    pub embedding: MorphismDoc,
    pub map: MorphismDoc,
}

impl LocalRefinementDoc {
    pub fn from_result(r: &LocalRefinement) -> Self {
        LocalRefinementDoc {
            graph: GraphDoc::from_graph(&r.graph),
            embedding: MorphismDoc::from_morphism(&r.embedding),
            map: MorphismDoc::from_morphism(&r.map),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetDoc {
    pub max_vertices: usize,
    pub max_depth: usize,
    pub seed: u64,
    pub size_cap: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObligationDoc {
    /// Vertex map from the stage apex onto the scheduled target.
    pub demand: NameMap,
    /// Vertex map from the new level onto the scheduled source.
    pub witness: Option<NameMap>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubdivisionDoc {
    pub level: usize,
    pub collapse: MorphismDoc,
    pub demand: NameMap,
    pub witness: NameMap,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageDoc {
    pub level: usize,
    pub structure: usize,
    pub morphism: usize,
    pub scheduled: MorphismDoc,
    pub apex: GraphDoc,
    pub joint: NameMap,
    pub onto_structure: MorphismDoc,
    pub refinement: NameMap,
    pub obligations: Vec<ObligationDoc>,
    pub subdivision: Option<SubdivisionDoc>,
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerDoc {
    pub budget: Option<BudgetDoc>,
    pub levels: Vec<GraphDoc>,
    /// `bonds[n]` maps level `n + 1` onto level `n`.
    pub bonds: Vec<NameMap>,
    #[serde(default)]
    pub log: Vec<StageDoc>,
}

impl TowerDoc {
    pub fn from_tower(t: &Tower) -> Self {
        TowerDoc {
            budget: t.budget.map(|b| BudgetDoc {
                max_vertices: b.max_vertices,
                max_depth: b.max_depth,
                seed: b.seed,
                size_cap: b.size_cap,
            }),
            levels: t.levels.iter().map(|l| GraphDoc::from_graph(l)).collect(),
            bonds: t.bonds.iter().map(GraphMorphism::assignment).collect(),
            log: t
                .log
                .iter()
                .map(|s| StageDoc {
                    level: s.level,
                    structure: s.structure,
                    morphism: s.morphism,
                    scheduled: MorphismDoc::from_morphism(&s.scheduled),
                    apex: GraphDoc::from_graph(s.joint.source()),
                    joint: s.joint.assignment(),
                    onto_structure: MorphismDoc::from_morphism(&s.onto_structure),
                    refinement: s.refinement.assignment(),
                    obligations: s
                        .obligations
                        .iter()
                        .map(|o| ObligationDoc {
                            demand: o.demand.assignment(),
                            witness: o.witness.as_ref().map(GraphMorphism::assignment),
                        })
                        .collect(),
                    subdivision: s.subdivision.as_ref().map(|d| SubdivisionDoc {
                        level: d.level,
                        collapse: MorphismDoc::from_morphism(&d.collapse),
                        demand: d.demand.assignment(),
                        witness: d.witness.assignment(),
                    }),
                    truncated: s.truncated,
                })
                .collect(),
        }
    }

    /// Rebuilds the tower and checks that it is valid and its log sound.
    pub fn to_tower(&self) -> Result<Tower> {
        if self.levels.is_empty() {
            return Err(Error::malformed("/levels", "a tower needs at least one level"));
        }
        if self.bonds.len() + 1 != self.levels.len() {
            return Err(Error::malformed(
                "/bonds",
                format!("{} bonds for {} levels", self.bonds.len(), self.levels.len()),
            ));
        }
        let levels = self
            .levels
            .iter()
            .enumerate()
            .map(|(i, l)| l.to_graph().map(Arc::new).map_err(within(&format!("/levels/{i}"))))
            .collect::<Result<Vec<_>>>()?;
        let bonds = self
            .bonds
            .iter()
            .enumerate()
            .map(|(n, b)| map_between(&levels[n + 1], &levels[n], b, &format!("/bonds/{n}")))
            .collect::<Result<Vec<_>>>()?;
        let mut log = Vec::with_capacity(self.log.len());
        for (i, s) in self.log.iter().enumerate() {
            let path = format!("/log/{i}");
            let at = |field: &str| format!("{path}/{field}");
            if s.level == 0 || s.level >= levels.len() {
                return Err(Error::malformed(at("level"), "stage level out of range"));
            }
            let scheduled = s.scheduled.to_morphism().map_err(within(&at("scheduled")))?;
            let apex = Arc::new(s.apex.to_graph().map_err(within(&at("apex")))?);
            let joint = map_between(&apex, &levels[s.level - 1], &s.joint, &at("joint"))?;
            let onto_structure = s.onto_structure.to_morphism().map_err(within(&at("onto_structure")))?;
            let refinement = map_between(&levels[s.level], &apex, &s.refinement, &at("refinement"))?;
            let mut obligations = Vec::with_capacity(s.obligations.len());
            for (k, o) in s.obligations.iter().enumerate() {
                let demand = map_between(&apex, scheduled.target(), &o.demand, &at(&format!("obligations/{k}/demand")))?;
                let witness = match &o.witness {
                    Some(w) => Some(map_between(
                        &levels[s.level],
                        scheduled.source(),
                        w,
                        &at(&format!("obligations/{k}/witness")),
                    )?),
                    None => None,
                };
                obligations.push(Obligation { demand, witness });
            }
            let subdivision = match &s.subdivision {
                None => None,
                Some(d) => {
                    if d.level >= levels.len() {
                        return Err(Error::malformed(at("subdivision/level"), "level out of range"));
                    }
                    let collapse = d.collapse.to_morphism().map_err(within(&at("subdivision/collapse")))?;
                    Some(SubdivisionStep {
                        level: d.level,
                        demand: map_between(&apex, &levels[d.level], &d.demand, &at("subdivision/demand"))?,
                        witness: map_between(&levels[s.level], collapse.source(), &d.witness, &at("subdivision/witness"))?,
                        collapse,
                    })
                }
            };
            log.push(StageLog {
                level: s.level,
                structure: s.structure,
                morphism: s.morphism,
                scheduled,
                joint,
                onto_structure,
                refinement,
                obligations,
                subdivision,
                truncated: s.truncated,
            });
        }
        let tower = Tower {
            budget: self.budget.map(|b| EnumerationBudget {
                max_vertices: b.max_vertices,
                max_depth: b.max_depth,
                seed: b.seed,
                size_cap: b.size_cap,
            }),
            levels,
            bonds,
            log,
        };
        if !tower.is_valid() {
            return Err(Error::malformed("/bonds", "some bond is not a connected epimorphism"));
        }
        if !tower.log_is_sound() {
            return Err(Error::malformed("/log", "saturation log does not re-verify"));
        }
        Ok(tower)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub level: usize,
    pub map: MorphismDoc,
}

impl WitnessDoc {
    pub fn from_witness(w: &Witness) -> Self {
        WitnessDoc {
            level: w.level,
            map: MorphismDoc::from_morphism(&w.map),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntertwinerDoc {
    pub maps: Vec<MorphismDoc>,
    pub first_anchors: Vec<usize>,
    pub second_anchors: Vec<usize>,
}

impl IntertwinerDoc {
    pub fn from_intertwiner(i: &Intertwiner) -> Self {
        IntertwinerDoc {
            maps: i.maps.iter().map(MorphismDoc::from_morphism).collect(),
            first_anchors: i.first_anchors.clone(),
            second_anchors: i.second_anchors.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenMapDoc {
    pub anchors: Vec<usize>,
    pub maps: Vec<MorphismDoc>,
    pub squares: Vec<SquareDoc>,
    pub lifts: Vec<MorphismDoc>,
}

impl OpenMapDoc {
    pub fn from_map(m: &OpenTowerMap) -> Self {
        OpenMapDoc {
            anchors: m.anchors.clone(),
            maps: m.maps.iter().map(MorphismDoc::from_morphism).collect(),
            squares: m.squares.iter().map(SquareDoc::from_square).collect(),
            lifts: m.lifts.iter().map(MorphismDoc::from_morphism).collect(),
        }
    }

    pub fn to_map(&self) -> Result<OpenTowerMap> {
        let list = |docs: &[MorphismDoc], name: &str| {
            docs.iter()
                .enumerate()
                .map(|(i, d)| d.to_morphism().map_err(within(&format!("/{name}/{i}"))))
                .collect::<Result<Vec<_>>>()
        };
        Ok(OpenTowerMap {
            anchors: self.anchors.clone(),
            maps: list(&self.maps, "maps")?,
            squares: self
                .squares
                .iter()
                .enumerate()
                .map(|(i, s)| s.to_square().map_err(within(&format!("/squares/{i}"))))
                .collect::<Result<_>>()?,
            lifts: list(&self.lifts, "lifts")?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDoc {
    pub maximal_faces: Vec<Vec<String>>,
    /// Optional summary written by `sx closure`; checked when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<isize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub face_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub faces: Option<Vec<Vec<String>>>,
}

impl ComplexDoc {
    pub fn from_complex(c: &SimplicialComplex) -> Self {
        ComplexDoc {
            maximal_faces: c.maximal_faces_named(),
            dim: None,
            face_count: None,
            faces: None,
        }
    }

    /// The document with every face listed, empty face first.
    pub fn with_summary(c: &SimplicialComplex) -> Self {
        let faces: Vec<Vec<String>> = c.all_faces().iter().map(|f| c.names_of(f)).collect();
        ComplexDoc {
            dim: Some(c.dim()),
            face_count: Some(faces.len()),
            faces: Some(faces),
            ..ComplexDoc::from_complex(c)
        }
    }

    pub fn to_complex(&self) -> Result<SimplicialComplex> {
        for (i, face) in self.maximal_faces.iter().enumerate() {
            let mut sorted = face.clone();
            sorted.sort();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::malformed(format!("/maximal_faces/{i}"), "face repeats a vertex"));
            }
        }
        let c = SimplicialComplex::closure(&self.maximal_faces);
        if self.dim.is_some_and(|d| d != c.dim()) {
            return Err(Error::malformed("/dim", format!("the faces have dimension {}", c.dim())));
        }
        if self.face_count.is_some_and(|n| n != c.face_count()) {
            return Err(Error::malformed("/face_count", format!("the closure has {} faces", c.face_count())));
        }
        if let Some(listed) = &self.faces {
            let mut listed: Vec<Vec<String>> = listed
                .iter()
                .map(|f| {
                    let mut f = f.clone();
                    f.sort();
                    f
                })
                .collect();
            listed.sort();
            let mut actual: Vec<Vec<String>> = c.all_faces().iter().map(|f| c.names_of(f)).collect();
            actual.sort();
            if listed != actual {
                return Err(Error::malformed("/faces", "face list differs from the closure"));
            }
        }
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimplicialMapDoc {
    pub source: ComplexDoc,
    pub target: ComplexDoc,
    pub map: NameMap,
}

impl SimplicialMapDoc {
    pub fn from_map(m: &SimplicialMap) -> Self {
        SimplicialMapDoc {
            source: ComplexDoc::from_complex(m.source()),
            target: ComplexDoc::from_complex(m.target()),
            map: m.assignment(),
        }
    }

    pub fn to_map(&self) -> Result<SimplicialMap> {
        let source = Arc::new(self.source.to_complex().map_err(within("/source"))?);
        let target = Arc::new(self.target.to_complex().map_err(within("/target"))?);
        SimplicialMap::from_names(source, target, &self.map).map_err(|e| match e {
            Error::ContractViolation(m) => Error::malformed("/map", m),
            other => other,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PullbackDoc {
    pub complex: ComplexDoc,
    pub first: NameMap,
    pub second: NameMap,
}

impl PullbackDoc {
    pub fn from_pullback(p: &Pullback) -> Self {
        PullbackDoc {
            complex: ComplexDoc::from_complex(&p.complex),
            first: p.first.assignment(),
            second: p.second.assignment(),
        }
    }
}

/// Integers that fit in 64 bits are written as JSON numbers, others as
/// decimal strings; both forms are accepted on input.
fn bigint_to_value(n: &BigInt) -> Value {
    match i64::try_from(n) {
        Ok(small) => Value::from(small),
        Err(_) => Value::String(n.to_string()),
    }
}

fn bigint_from_value(v: &Value, path: &str) -> Result<BigInt> {
    match v {
        Value::Number(n) if n.is_i64() => Ok(BigInt::from(n.as_i64().expect("checked"))),
        Value::Number(n) if n.is_u64() => Ok(BigInt::from(n.as_u64().expect("checked"))),
        Value::String(s) => s
            .parse()
            .map_err(|_| Error::malformed(path, format!("{s:?} is not an integer"))),
        other => Err(Error::malformed(path, format!("expected an integer, found {other}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub face: Vec<String>,
    pub coeff: Value,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainDoc {
    pub terms: Vec<TermDoc>,
}

impl ChainDoc {
    pub fn from_chain(c: &Chain) -> Self {
        ChainDoc {
            terms: c
                .terms()
                .iter()
                .map(|(face, coeff)| TermDoc {
                    face: face.clone(),
                    coeff: bigint_to_value(coeff),
                })
                .collect(),
        }
    }

    pub fn to_chain(&self) -> Result<Chain> {
        let terms = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| Ok((t.face.clone(), bigint_from_value(&t.coeff, &format!("/terms/{i}/coeff"))?)))
            .collect::<Result<Vec<_>>>()?;
        for (i, t) in self.terms.iter().enumerate() {
            let mut sorted = t.face.clone();
            sorted.sort();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::malformed(format!("/terms/{i}/face"), "face repeats a vertex"));
            }
        }
        Chain::from_terms(terms)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyDoc {
    pub rank: usize,
    pub torsion: Vec<Value>,
}

impl HomologyDoc {
    pub fn from_report(h: &HomologyReport) -> Self {
        HomologyDoc {
            rank: h.rank,
            torsion: h.torsion.iter().map(bigint_to_value).collect(),
        }
    }
}

/// Undirected DOT without loops, vertices labelled by their names.
pub fn graph_to_dot(g: &Graph, name: &str) -> String {
    let quote = |s: &str| format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""));
    let mut out = format!("graph {} {{\n", quote(name));
    for v in g.names() {
        out.push_str(&format!("  {} [label={}];\n", quote(v), quote(v)));
    }
    for (u, v) in g.edges() {
        out.push_str(&format!("  {} -- {};\n", quote(g.name(u)), quote(g.name(v))));
    }
    out.push_str("}\n");
    out
}
