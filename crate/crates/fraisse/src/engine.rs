//! Bounded Fraïssé machinery: enumeration of the class up to isomorphism, the
//! generic tower with its saturation log, extension witnesses, back-and-forth
//! intertwiners and open maps onto target towers.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{automorphisms, canonical_form, canonical_key, same_graph, Graph, GraphMorphism};
use crate::ops::{amalgamate, collapse_map, is_exact, minimal_amalgam, AmalgamSquare};

/// Default absolute cap on the vertex count of any tower level.
pub const DEFAULT_SIZE_CAP: usize = 60;
/// Largest `max_vertices` accepted by the exhaustive enumerations.
pub const ENUMERATION_LIMIT: usize = 6;
/// Largest number of vertex maps scanned when listing morphisms.
pub const MORPHISM_SCAN_LIMIT: u64 = 5_000_000;
/// A level feeds saturation demands only if it has at most this many vertex
/// maps into the scheduled target.
pub const DEMAND_SCAN_LIMIT: u64 = 1 << 16;
/// Default node budget of one lifting search.
pub const DEFAULT_SEARCH_BUDGET: u64 = 2_000_000;
/// Node budget for trying to factor a demand through the scheduled morphism
/// before falling back to an amalgam.
const FACTOR_SEARCH_BUDGET: u64 = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub max_vertices: usize,
    pub max_depth: usize,
    pub seed: u64,
    pub size_cap: usize,
}

impl EnumerationBudget {
    pub fn new(max_vertices: usize, max_depth: usize, seed: u64) -> Self {
        EnumerationBudget {
            max_vertices,
            max_depth,
            seed,
            size_cap: DEFAULT_SIZE_CAP,
        }
    }

    pub fn with_size_cap(mut self, size_cap: usize) -> Self {
        self.size_cap = size_cap;
        self
    }

    fn check(&self) -> Result<()> {
        if self.max_vertices < 1 {
            return Err(Error::contract("budget: max_vertices must be at least 1"));
        }
        if self.max_vertices > ENUMERATION_LIMIT {
            return Err(Error::ResourceLimit(format!(
                "exhaustive enumeration supports max_vertices <= {ENUMERATION_LIMIT}, got {}",
                self.max_vertices
            )));
        }
        Ok(())
    }
}

/// Connected graphs with at most `max_vertices` vertices, one canonical form
/// per isomorphism class, ordered by vertex count and then adjacency bits.
pub fn enumerate_graphs(budget: &EnumerationBudget) -> Result<Vec<Arc<Graph>>> {
    budget.check()?;
    let mut classes: BTreeMap<(usize, Vec<bool>), Graph> = BTreeMap::new();
    for n in 1..=budget.max_vertices {
        let slots: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        for bits in 0u64..(1u64 << slots.len()) {
            let edges = slots
                .iter()
                .enumerate()
                .filter(|(k, _)| bits >> k & 1 == 1)
                .map(|(_, &e)| e);
            let names = (0..n).map(|i| i.to_string()).collect();
            let g = Graph::from_index_edges(names, edges)?;
            if !g.is_connected() {
                continue;
            }
            let key = canonical_key(&g)?;
            if !classes.contains_key(&key) {
                classes.insert(key, canonical_form(&g)?.graph);
            }
        }
    }
    Ok(classes.into_values().map(Arc::new).collect())
}

/// Connected epimorphisms between the enumerated graphs, one per class under
/// pre- and post-composition with automorphisms. Ordered by source index,
/// target index and then the lexicographically least map of the class, which
/// is the representative returned.
pub fn enumerate_morphisms(budget: &EnumerationBudget) -> Result<Vec<GraphMorphism>> {
    let graphs = enumerate_graphs(budget)?;
    morphisms_between(&graphs)
}

pub fn morphisms_between(graphs: &[Arc<Graph>]) -> Result<Vec<GraphMorphism>> {
    let mut scan: u64 = 0;
    for src in graphs {
        for tgt in graphs.iter().filter(|t| t.len() <= src.len()) {
            scan = scan.saturating_add((tgt.len() as u64).saturating_pow(src.len() as u32));
        }
    }
    if scan > MORPHISM_SCAN_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "listing morphisms would scan {scan} vertex maps (limit {MORPHISM_SCAN_LIMIT})"
        )));
    }
    let autos: Vec<Vec<Vec<usize>>> = graphs
        .iter()
        .map(|g| automorphisms(g))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (si, src) in graphs.iter().enumerate() {
        for (ti, tgt) in graphs.iter().enumerate() {
            if tgt.len() > src.len() {
                continue;
            }
            let mut classes = BTreeSet::new();
            for map in all_maps(src.len(), tgt.len()) {
                let m = GraphMorphism::new(src.clone(), tgt.clone(), map.clone())?;
                if !m.is_connected_epi() {
                    continue;
                }
                classes.insert(least_in_class(&map, &autos[si], &autos[ti]));
            }
            for map in classes {
                out.push(GraphMorphism::new(src.clone(), tgt.clone(), map)?);
            }
        }
    }
    Ok(out)
}

fn all_maps(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = (k as u64).pow(n as u32);
    (0..if k == 0 && n > 0 { 0 } else { total }).map(move |mut code| {
        let mut map = vec![0; n];
        for slot in map.iter_mut() {
            *slot = (code % k as u64) as usize;
            code /= k as u64;
        }
        map
    })
}

fn least_in_class(map: &[usize], source_autos: &[Vec<usize>], target_autos: &[Vec<usize>]) -> Vec<usize> {
    let mut best = map.to_vec();
    for phi in source_autos {
        for psi in target_autos {
            let candidate: Vec<usize> = (0..map.len()).map(|v| psi[map[phi[v]]]).collect();
            if candidate < best {
                best = candidate;
            }
        }
    }
    best
}

/// One saturation demand `s: H -> B` of a stage and, once discharged, the
/// map `d: L_{n+1} -> C` with `s ∘ refinement = e ∘ d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obligation {
    pub demand: GraphMorphism,
    pub witness: Option<GraphMorphism>,
}

/// `collapse: δ¹L_level -> L_level` with `collapse ∘ witness = demand ∘
/// refinement`. Afterwards no 3-clique of a deeper level maps onto a 3-clique
/// of `L_level` or of any level below it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubdivisionStep {
    pub level: usize,
    pub collapse: GraphMorphism,
    /// `H -> L_level`.
    pub demand: GraphMorphism,
    pub witness: GraphMorphism,
}

/// Record of the stage that produced level `level`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageLog {
    pub level: usize,
    /// Index of the structure `A` in the enumerated graph list.
    pub structure: usize,
    /// Index of the scheduled morphism `e: C -> B` in the morphism list.
    pub morphism: usize,
    pub scheduled: GraphMorphism,
    /// `H -> L_{level-1}` from the joint projection.
    pub joint: GraphMorphism,
    /// `H -> A` from the joint projection.
    pub onto_structure: GraphMorphism,
    /// `L_level -> H`.
    pub refinement: GraphMorphism,
    pub obligations: Vec<Obligation>,
    /// Extension along an edge-subdivision collapse of an earlier level.
    pub subdivision: Option<SubdivisionStep>,
    /// Set when the size cap forced the stage to be skipped or an obligation
    /// to be deferred.
    pub truncated: bool,
}

impl StageLog {
    pub fn discharged(&self) -> usize {
        self.obligations.iter().filter(|o| o.witness.is_some()).count()
    }
}

/// Finite inverse sequence `L_0 <- L_1 <- ... <- L_d` with its saturation log.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tower {
    pub budget: Option<EnumerationBudget>,
    pub levels: Vec<Arc<Graph>>,
    /// `bonds[n]: L_{n+1} -> L_n`.
    pub bonds: Vec<GraphMorphism>,
    pub log: Vec<StageLog>,
}

impl Tower {
    /// A tower without saturation log, e.g. a target for [`open_tower_map`].
    pub fn from_bonds(base: Arc<Graph>, bonds: Vec<GraphMorphism>) -> Result<Self> {
        let mut levels = vec![base];
        for (n, bond) in bonds.iter().enumerate() {
            if !same_graph(bond.target(), &levels[n]) {
                return Err(Error::contract(format!("bond {n} does not land in level {n}")));
            }
            levels.push(bond.source().clone());
        }
        Ok(Tower {
            budget: None,
            levels,
            bonds,
            log: Vec::new(),
        })
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> Result<&Arc<Graph>> {
        self.levels.get(n).ok_or(Error::LevelOutOfRange {
            level: n,
            depth: self.depth(),
        })
    }

    /// Composite bond `L_m -> L_n` for `n <= m`.
    pub fn bond(&self, m: usize, n: usize) -> Result<GraphMorphism> {
        self.level(m)?;
        if n > m {
            return Err(Error::contract(format!("bond({m}, {n}) needs n <= m")));
        }
        let mut out = GraphMorphism::identity(self.levels[m].clone());
        for k in (n..m).rev() {
            out = self.bonds[k].compose(&out)?;
        }
        Ok(out)
    }

    /// All bonds are connected epimorphisms between consecutive levels.
    pub fn is_valid(&self) -> bool {
        self.bonds.len() + 1 == self.levels.len()
            && self.bonds.iter().enumerate().all(|(n, b)| {
                same_graph(b.target(), &self.levels[n])
                    && same_graph(b.source(), &self.levels[n + 1])
                    && b.is_connected_epi()
            })
    }

    /// Re-checks every log entry: bonds factor as `joint ∘ refinement`, and
    /// each discharged demand satisfies `s ∘ refinement = e ∘ d` with `d` a
    /// connected epimorphism.
    pub fn log_is_sound(&self) -> bool {
        self.log.iter().all(|entry| {
            let n = entry.level;
            if n == 0 || n > self.depth() {
                return false;
            }
            let bond_ok = entry
                .joint
                .compose(&entry.refinement)
                .map(|b| b == self.bonds[n - 1])
                .unwrap_or(false);
            bond_ok
                && entry.onto_structure.is_connected_epi()
                && entry.subdivision.as_ref().map_or(true, |sub| {
                    sub.witness.is_connected_epi()
                        && same_graph(sub.witness.source(), &self.levels[n])
                        && matches!(
                            (sub.demand.compose(&entry.refinement), sub.collapse.compose(&sub.witness)),
                            (Ok(lhs), Ok(rhs)) if lhs == rhs
                        )
                })
                && entry.obligations.iter().all(|o| match &o.witness {
                    None => true,
                    Some(d) => {
                        o.demand.is_connected_epi()
                            && d.is_connected_epi()
                            && same_graph(d.source(), &self.levels[n])
                            && matches!(
                                (o.demand.compose(&entry.refinement), entry.scheduled.compose(d)),
                                (Ok(lhs), Ok(rhs)) if lhs == rhs
                            )
                    }
                })
        })
    }
}

fn stage_rng(seed: u64, level: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(level as u64);
    rng
}

fn point() -> Arc<Graph> {
    Arc::new(Graph::path(1))
}

/// Generic tower of depth `budget.max_depth`. Stage `n + 1` first takes a
/// joint projection of `L_n` and the next enumerated structure (a thinned
/// amalgam over the one-vertex graph), then discharges the scheduled morphism
/// `e: C -> B` against every demand `s: H -> B` obtained by composing a
/// connected epimorphism from a small enough earlier level (or `H` itself) with
/// the bonds down to it.
pub fn build_generic_tower(budget: &EnumerationBudget) -> Result<Tower> {
    let graphs = enumerate_graphs(budget)?;
    let morphisms = morphisms_between(&graphs)?;
    let tower = Tower {
        budget: Some(*budget),
        levels: vec![graphs[0].clone()],
        bonds: Vec::new(),
        log: Vec::new(),
    };
    extend_with(tower, &graphs, &morphisms, budget.max_depth)
}

/// Adds stages until the tower has depth `target_depth`. Each stage draws its
/// randomness from the seed and its own index, so extending a stored tower
/// reproduces a fresh build exactly.
pub fn extend_tower(tower: Tower, target_depth: usize) -> Result<Tower> {
    let budget = tower
        .budget
        .ok_or_else(|| Error::contract("extend_tower: tower has no enumeration budget"))?;
    let graphs = enumerate_graphs(&budget)?;
    let morphisms = morphisms_between(&graphs)?;
    let mut tower = extend_with(tower, &graphs, &morphisms, target_depth)?;
    if let Some(b) = tower.budget.as_mut() {
        b.max_depth = b.max_depth.max(target_depth);
    }
    Ok(tower)
}

fn extend_with(
    mut tower: Tower,
    graphs: &[Arc<Graph>],
    morphisms: &[GraphMorphism],
    target_depth: usize,
) -> Result<Tower> {
    let budget = tower.budget.expect("generic towers carry a budget");
    while tower.depth() < target_depth {
        let level = tower.depth() + 1;
        let (stage, new_level, bond) = build_stage(&tower, graphs, morphisms, &budget, level)?;
        tower.levels.push(new_level);
        tower.bonds.push(bond);
        tower.log.push(stage);
    }
    Ok(tower)
}

fn build_stage(
    tower: &Tower,
    graphs: &[Arc<Graph>],
    morphisms: &[GraphMorphism],
    budget: &EnumerationBudget,
    level: usize,
) -> Result<(StageLog, Arc<Graph>, GraphMorphism)> {
    let mut rng = stage_rng(budget.seed, level);
    let prev = tower.levels[level - 1].clone();
    let structure = level % graphs.len();
    let morphism = (level - 1) % morphisms.len();
    let a = graphs[structure].clone();
    let e = morphisms[morphism].clone();
    let pt = point();

    let to_point = GraphMorphism::constant(prev.clone(), pt.clone(), 0)?;
    let a_to_point = GraphMorphism::constant(a.clone(), pt, 0)?;
    let joint_sq = minimal_amalgam(&to_point, &a_to_point, &mut rng)?;
    let h = joint_sq.apex().clone();
    if h.len() > budget.size_cap {
        // Too large to even take the joint projection: repeat the level.
        let id = GraphMorphism::identity(prev.clone());
        let stage = StageLog {
            level,
            structure,
            morphism,
            scheduled: e,
            joint: id.clone(),
            onto_structure: GraphMorphism::constant(prev.clone(), prev.clone(), 0)?,
            refinement: id.clone(),
            obligations: Vec::new(),
            subdivision: None,
            truncated: true,
        };
        return Ok((stage, prev, id));
    }
    let joint = joint_sq.f_prime.clone();
    let onto_structure = joint_sq.g_prime.clone();

    let demands = stage_demands(tower, &joint, &e)?;
    let mut current = h.clone();
    let mut refinement = GraphMorphism::identity(h.clone());
    let mut witnesses: Vec<Option<GraphMorphism>> = Vec::with_capacity(demands.len());
    let mut truncated = false;
    for s in &demands {
        let s_here = s.compose(&refinement)?;
        let mut nodes = FACTOR_SEARCH_BUDGET;
        let domains = lift_domains(&s_here, &e);
        if let Ok(Some(map)) = search_lift(&current, e.source(), &domains, &mut nodes) {
            witnesses.push(Some(GraphMorphism::new(current.clone(), e.source().clone(), map)?));
            continue;
        }
        let sq = minimal_amalgam(&s_here, &e, &mut rng)?;
        if sq.apex().len() > budget.size_cap {
            truncated = true;
            witnesses.push(None);
            continue;
        }
        for w in witnesses.iter_mut().flatten() {
            *w = w.compose(&sq.f_prime)?;
        }
        refinement = refinement.compose(&sq.f_prime)?;
        current = sq.apex().clone();
        witnesses.push(Some(sq.g_prime.clone()));
    }
    let mut subdivision = None;
    for j in (triangle_free_through(tower).map_or(0, |k| k + 1)..level).rev() {
        let lower = &tower.levels[j];
        let gamma: Vec<usize> = (0..lower.edge_count()).map(|_| rng.gen_range(0..=1)).collect();
        let collapse = collapse_map(lower, 1, &gamma)?;
        let demand = tower.bond(level - 1, j)?.compose(&joint)?;
        let sq = minimal_amalgam(&demand.compose(&refinement)?, &collapse, &mut rng)?;
        if sq.apex().len() > budget.size_cap {
            continue;
        }
        for w in witnesses.iter_mut().flatten() {
            *w = w.compose(&sq.f_prime)?;
        }
        refinement = refinement.compose(&sq.f_prime)?;
        current = sq.apex().clone();
        subdivision = Some(SubdivisionStep {
            level: j,
            collapse,
            demand,
            witness: sq.g_prime.clone(),
        });
        break;
    }
    let bond = joint.compose(&refinement)?;
    let obligations = demands
        .into_iter()
        .zip(witnesses)
        .map(|(demand, witness)| Obligation { demand, witness })
        .collect();
    let stage = StageLog {
        level,
        structure,
        morphism,
        scheduled: e,
        joint,
        onto_structure,
        refinement,
        obligations,
        subdivision,
        truncated,
    };
    Ok((stage, current, bond))
}

/// Demands for the scheduled `e: C -> B`: every connected epimorphism onto `B`
/// from a level (or from `H`) small enough to scan, pulled back to `H`.
/// Highest level `j` below which no 3-clique can persist: either `L_j` is
/// triangle-free or an earlier stage extended along a subdivision of `L_j`.
fn triangle_free_through(tower: &Tower) -> Option<usize> {
    let bare = (0..tower.levels.len()).filter(|&j| tower.levels[j].triangles().is_empty());
    let subdivided = tower.log.iter().filter_map(|s| s.subdivision.as_ref().map(|d| d.level));
    bare.chain(subdivided).max()
}

fn stage_demands(tower: &Tower, joint: &GraphMorphism, e: &GraphMorphism) -> Result<Vec<GraphMorphism>> {
    let h = joint.source().clone();
    let b = e.target().clone();
    let top = tower.depth();
    let mut sources: Vec<GraphMorphism> = Vec::new();
    for j in 0..=top {
        sources.push(tower.bond(top, j)?.compose(joint)?);
    }
    sources.push(GraphMorphism::identity(h.clone()));
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for down in sources {
        let src = down.target().clone();
        let scan = (b.len() as u64).checked_pow(src.len() as u32);
        if scan.map_or(true, |s| s > DEMAND_SCAN_LIMIT) {
            continue;
        }
        for map in all_maps(src.len(), b.len()) {
            let s0 = GraphMorphism::new(src.clone(), b.clone(), map)?;
            if !s0.is_connected_epi() {
                continue;
            }
            let s = s0.compose(&down)?;
            if seen.insert(s.map().to_vec()) {
                out.push(s);
            }
        }
    }
    Ok(out)
}

/// For each vertex `v` of the domain of `q`, the vertices of `g`'s domain
/// lying over `q(v)`.
fn lift_domains(q: &GraphMorphism, g: &GraphMorphism) -> Vec<Vec<usize>> {
    let over = g.fibers();
    q.map().iter().map(|&a| over[a].clone()).collect()
}

const UNSET: usize = usize::MAX;

struct LiftSearch<'a> {
    source: &'a Graph,
    target: &'a Graph,
    domains: &'a [Vec<usize>],
    target_edges: Vec<(usize, usize)>,
    assign: Vec<usize>,
    nodes: &'a mut u64,
}

impl LiftSearch<'_> {
    fn allowed(&self, v: usize, b: usize) -> bool {
        if self.assign[v] != UNSET {
            return self.assign[v] == b;
        }
        self.domains[v].contains(&b)
            && self.source.neighbors(v).iter().all(|&w| {
                self.assign[w] == UNSET || self.target.adjacent(self.assign[w], b)
            })
    }

    /// Necessary conditions for completing the partial assignment: every
    /// unassigned vertex keeps a value, every target vertex and edge can still
    /// be hit, and each partial fiber lies in one component of its potential
    /// fiber.
    fn feasible(&self) -> bool {
        let n = self.source.len();
        let k = self.target.len();
        let mut potential = vec![vec![false; n]; k];
        for v in 0..n {
            let mut any = false;
            for &b in &self.domains[v] {
                if self.allowed(v, b) {
                    potential[b][v] = true;
                    any = true;
                }
            }
            if !any {
                return false;
            }
        }
        for (b, pot) in potential.iter().enumerate() {
            let Some(start) = (0..n).find(|&v| pot[v]) else {
                return false;
            };
            let anchor = (0..n).find(|&v| self.assign[v] == b).unwrap_or(start);
            let mut seen = vec![false; n];
            let mut stack = vec![anchor];
            seen[anchor] = true;
            while let Some(u) = stack.pop() {
                for &w in self.source.neighbors(u) {
                    if pot[w] && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            if (0..n).any(|v| self.assign[v] == b && !seen[v]) {
                return false;
            }
        }
        self.target_edges.iter().all(|&(b, c)| {
            (0..n).any(|u| {
                (potential[b][u] || potential[c][u])
                    && self.source.neighbors(u).iter().any(|&w| {
                        (potential[b][u] && potential[c][w]) || (potential[c][u] && potential[b][w])
                    })
            })
        })
    }

    fn run(&mut self, v: usize) -> std::result::Result<bool, ()> {
        if v == self.source.len() {
            return Ok(true);
        }
        for idx in 0..self.domains[v].len() {
            let b = self.domains[v][idx];
            if !self.allowed(v, b) {
                continue;
            }
            if *self.nodes == 0 {
                return Err(());
            }
            *self.nodes -= 1;
            self.assign[v] = b;
            if self.feasible() && self.run(v + 1)? {
                return Ok(true);
            }
            self.assign[v] = UNSET;
        }
        Ok(false)
    }
}

/// Lexicographically least connected epimorphism `source -> target` with
/// `h(v) ∈ domains[v]`, vertices taken in index order and values ascending.
/// `Err(())` when the node budget runs out first.
fn search_lift(
    source: &Graph,
    target: &Graph,
    domains: &[Vec<usize>],
    nodes: &mut u64,
) -> std::result::Result<Option<Vec<usize>>, ()> {
    if source.is_empty() {
        return Ok(target.is_empty().then(Vec::new));
    }
    let mut search = LiftSearch {
        source,
        target,
        domains,
        target_edges: target.edges(),
        assign: vec![UNSET; source.len()],
        nodes,
    };
    if !search.feasible() {
        return Ok(None);
    }
    Ok(search.run(0)?.then(|| search.assign.clone()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub level: usize,
    pub map: GraphMorphism,
}

/// Smallest `m >= n` with a connected epimorphism `h: L_m -> B` satisfying
/// `g ∘ h = f ∘ t^m_n`, searched exhaustively at each level.
pub fn extension_witness(
    t: &Tower,
    n: usize,
    f: &GraphMorphism,
    g: &GraphMorphism,
) -> Result<Witness> {
    extension_witness_budgeted(t, n, f, g, DEFAULT_SEARCH_BUDGET)
}

pub fn extension_witness_budgeted(
    t: &Tower,
    n: usize,
    f: &GraphMorphism,
    g: &GraphMorphism,
    node_budget: u64,
) -> Result<Witness> {
    let level = t.level(n)?.clone();
    if !same_graph(f.source(), &level) {
        return Err(Error::contract(format!("extension_witness: f is not defined on level {n}")));
    }
    if !same_graph(f.target(), g.target()) {
        return Err(Error::contract("extension_witness: f and g have different targets"));
    }
    if !f.is_connected_epi() || !g.is_connected_epi() {
        return Err(Error::contract(
            "extension_witness: f and g must be connected epimorphisms",
        ));
    }
    for m in n..=t.depth() {
        let q = f.compose(&t.bond(m, n)?)?;
        let domains = lift_domains(&q, g);
        let mut nodes = node_budget;
        match search_lift(&t.levels[m], g.source(), &domains, &mut nodes) {
            Ok(Some(map)) => {
                let h = GraphMorphism::new(t.levels[m].clone(), g.source().clone(), map)?;
                return Ok(Witness { level: m, map: h });
            }
            Ok(None) => {}
            Err(()) => {
                return Err(Error::ResourceLimit(format!(
                    "extension_witness: search at level {m} exceeded {node_budget} nodes"
                )))
            }
        }
    }
    let stages: Vec<usize> = t
        .log
        .iter()
        .filter(|s| s.scheduled == *g)
        .map(|s| s.level)
        .collect();
    let note = if stages.is_empty() {
        "g was never scheduled in this tower".to_string()
    } else {
        format!("g was scheduled at stages {stages:?}")
    };
    Err(Error::WitnessNotFound(format!(
        "no lift from levels {n}..={}; {note}",
        t.depth()
    )))
}

/// A failed multi-step construction together with what it built so far.
#[derive(Clone, Debug)]
pub struct Partial<T> {
    pub partial: T,
    pub error: Error,
}

/// Alternating maps between two towers. `maps[2i]: M_{l_i} -> L_{k_i}` and
/// `maps[2i+1]: L_{k_{i+1}} -> M_{l_i}`, where `L` is the first tower and `M`
/// the second.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Intertwiner {
    pub maps: Vec<GraphMorphism>,
    pub first_anchors: Vec<usize>,
    pub second_anchors: Vec<usize>,
}

impl Intertwiner {
    /// Checks `h_{2i} ∘ h_{2i+1} = t^{k_{i+1}}_{k_i}`, `h_{2i+1} ∘ h_{2i+2} =
    /// u^{l_{i+1}}_{l_i}`, strict growth of the anchors and membership of every
    /// map in the class.
    pub fn verify(&self, first: &Tower, second: &Tower) -> bool {
        let (k, l) = (&self.first_anchors, &self.second_anchors);
        if k.windows(2).any(|w| w[0] >= w[1]) || l.windows(2).any(|w| w[0] >= w[1]) {
            return false;
        }
        if !self.maps.iter().all(GraphMorphism::is_connected_epi) {
            return false;
        }
        for j in 0..self.maps.len().saturating_sub(1) {
            let i = j / 2;
            let expected = if j % 2 == 0 {
                k.get(i + 1).and_then(|&hi| first.bond(hi, k[i]).ok())
            } else {
                l.get(i + 1).and_then(|&hi| second.bond(hi, l[i]).ok())
            };
            match (expected, self.maps[j].compose(&self.maps[j + 1])) {
                (Some(bond), Ok(composite)) if bond == composite => {}
                _ => return false,
            }
        }
        true
    }
}

/// Builds `2 * rounds` maps by alternating extension witnesses against the two
/// towers, starting from the bottom levels.
pub fn back_and_forth(
    first: &Tower,
    second: &Tower,
    rounds: usize,
) -> std::result::Result<Intertwiner, Partial<Intertwiner>> {
    let mut out = Intertwiner::default();
    if rounds == 0 {
        return Ok(out);
    }
    let fail = |out: &Intertwiner, error: Error| Partial {
        partial: out.clone(),
        error,
    };
    let pt = point();
    let base_first = first.levels[0].clone();
    let start = (|| -> Result<Witness> {
        let f = GraphMorphism::constant(second.levels[0].clone(), pt.clone(), 0)?;
        let g = GraphMorphism::constant(base_first.clone(), pt.clone(), 0)?;
        extension_witness(second, 0, &f, &g)
    })();
    let h0 = start.map_err(|e| fail(&out, e))?;
    out.first_anchors.push(0);
    out.second_anchors.push(h0.level);
    out.maps.push(h0.map);
    for step in 1..2 * rounds {
        let last = out.maps.last().expect("at least one map").clone();
        let (tower, anchors) = if step % 2 == 1 {
            (first, &out.first_anchors)
        } else {
            (second, &out.second_anchors)
        };
        let from = *anchors.last().expect("anchor recorded");
        let found = (|| -> Result<Witness> {
            let f = tower.bond(from + 1, from)?;
            extension_witness(tower, from + 1, &f, &last)
        })();
        let w = found.map_err(|e| fail(&out, e))?;
        if step % 2 == 1 {
            out.first_anchors.push(w.level);
        } else {
            out.second_anchors.push(w.level);
        }
        out.maps.push(w.map);
    }
    Ok(out)
}

/// 3-cliques of `L_m` whose image under `t^m_n` is a 3-clique of `L_n`.
pub fn triangle_persistence(t: &Tower, n: usize, m: usize) -> Result<usize> {
    let bond = t.bond(m, n)?;
    let below = t.level(n)?;
    Ok(t.levels[m]
        .triangles()
        .into_iter()
        .filter(|tri| {
            let [a, b, c] = tri.map(|v| bond.apply(v));
            a != b && b != c && a != c && below.has_edge(a, b) && below.has_edge(b, c) && below.has_edge(a, c)
        })
        .count())
}

/// Coherent maps `h_i: L_{n(i)} -> K_i` from a source tower onto a target
/// tower, with the amalgam square and lift used at each step.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OpenTowerMap {
    pub anchors: Vec<usize>,
    pub maps: Vec<GraphMorphism>,
    /// `squares[i]` amalgamates `h_i` with the target bond `K_{i+1} -> K_i`.
    pub squares: Vec<AmalgamSquare>,
    /// `lifts[i]: L_{n(i+1)} -> D_i` with `f' ∘ p` the source bond.
    pub lifts: Vec<GraphMorphism>,
}

impl OpenTowerMap {
    /// `g^{i+1}_i ∘ h_{i+1} = h_i ∘ t^{n(i+1)}_{n(i)}` for every stage, and all
    /// maps connected epimorphisms.
    pub fn is_coherent(&self, source: &Tower, target: &Tower) -> bool {
        self.maps.iter().all(GraphMorphism::is_connected_epi)
            && self.anchors.windows(2).all(|w| w[0] < w[1])
            && (0..self.maps.len().saturating_sub(1)).all(|i| {
                let lhs = target.bonds[i].compose(&self.maps[i + 1]);
                let rhs = source
                    .bond(self.anchors[i + 1], self.anchors[i])
                    .and_then(|b| self.maps[i].compose(&b));
                matches!((lhs, rhs), (Ok(a), Ok(b)) if a == b)
            })
    }
}

/// Each step amalgamates `h_i` with the next target bond, lifts the source
/// bond through the amalgam's first projection with an extension witness, and
/// sets `h_{i+1} = g' ∘ p`.
pub fn open_tower_map(
    source: &Tower,
    target: &Tower,
) -> std::result::Result<OpenTowerMap, Partial<OpenTowerMap>> {
    let mut out = OpenTowerMap::default();
    let fail = |out: &OpenTowerMap, error: Error| Partial {
        partial: out.clone(),
        error,
    };
    let pt = point();
    let first = (|| -> Result<Witness> {
        let f = GraphMorphism::constant(source.levels[0].clone(), pt.clone(), 0)?;
        let g = GraphMorphism::constant(target.levels[0].clone(), pt.clone(), 0)?;
        extension_witness(source, 0, &f, &g)
    })();
    let h0 = first.map_err(|e| fail(&out, e))?;
    out.anchors.push(h0.level);
    out.maps.push(h0.map);
    for i in 0..target.bonds.len() {
        let step = (|| -> Result<(AmalgamSquare, Witness)> {
            let n = out.anchors[i];
            let sq = amalgamate(&out.maps[i], &target.bonds[i])?;
            let bond = source.bond(n + 1, n)?;
            let w = extension_witness(source, n + 1, &bond, &sq.f_prime)?;
            Ok((sq, w))
        })();
        let (sq, w) = step.map_err(|e| fail(&out, e))?;
        let h = sq.g_prime.compose(&w.map).map_err(|e| fail(&out, e))?;
        out.anchors.push(w.level);
        out.maps.push(h);
        out.lifts.push(w.map);
        out.squares.push(sq);
    }
    Ok(out)
}

/// The stage-`i` square is exact, has `h_i` and the target bond as its cospan,
/// and the recorded lift satisfies `f' ∘ p = t^{n(i+1)}_{n(i)}` and
/// `g' ∘ p = h_{i+1}`.
pub fn verify_openness_claim(source: &Tower, target: &Tower, map: &OpenTowerMap, i: usize) -> bool {
    let (Some(sq), Some(p)) = (map.squares.get(i), map.lifts.get(i)) else {
        return false;
    };
    let Ok(bond) = source.bond(map.anchors[i + 1], map.anchors[i]) else {
        return false;
    };
    sq.f == map.maps[i]
        && target.bonds.get(i) == Some(&sq.g)
        && sq.commutes()
        && is_exact(sq)
        && sq.f_prime.compose(p).ok() == Some(bond)
        && sq.g_prime.compose(p).ok().as_ref() == map.maps.get(i + 1)
}

/// Preimages `h_i^{-1}(Q_i)` of a thread of cliques with the restricted source
/// bonds, each checked to be a connected epimorphism.
pub fn clique_fiber_subtower(
    source: &Tower,
    target: &Tower,
    map: &OpenTowerMap,
    thread: &[Vec<usize>],
) -> Result<Tower> {
    if thread.len() != map.maps.len() {
        return Err(Error::contract(format!(
            "clique thread has {} entries for {} maps",
            thread.len(),
            map.maps.len()
        )));
    }
    let mut sets: Vec<Vec<usize>> = Vec::with_capacity(thread.len());
    for (i, q) in thread.iter().enumerate() {
        let k = target.level(i)?;
        let mut q = q.clone();
        q.sort_unstable();
        q.dedup();
        if q.is_empty() || q.iter().any(|&v| v >= k.len()) {
            return Err(Error::contract(format!("thread entry {i} is not a vertex set of K_{i}")));
        }
        if q.iter().any(|&u| q.iter().any(|&v| !k.adjacent(u, v))) {
            return Err(Error::contract(format!("thread entry {i} is not a clique")));
        }
        if i > 0 {
            let mut image: Vec<usize> = q.iter().map(|&v| target.bonds[i - 1].apply(v)).collect();
            image.sort_unstable();
            image.dedup();
            if image != sets[i - 1] {
                return Err(Error::contract(format!(
                    "bond {} does not carry thread entry {i} onto entry {}",
                    i - 1,
                    i - 1
                )));
            }
        }
        sets.push(q);
    }
    let members: Vec<Vec<usize>> = sets
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let mut mask = vec![false; target.levels[i].len()];
            for &v in q {
                mask[v] = true;
            }
            map.maps[i].preimage(&mask)
        })
        .collect();
    let base = Arc::new(source.level(map.anchors[0])?.induced(&members[0]));
    let mut levels = vec![base];
    let mut bonds = Vec::new();
    for i in 0..members.len() - 1 {
        let full = source.bond(map.anchors[i + 1], map.anchors[i])?;
        let lower = &members[i];
        let upper = Arc::new(source.levels[map.anchors[i + 1]].induced(&members[i + 1]));
        let position: BTreeMap<usize, usize> = lower.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let mut assignment = Vec::with_capacity(members[i + 1].len());
        for &v in &members[i + 1] {
            let image = full.apply(v);
            let k = position.get(&image).ok_or_else(|| {
                Error::VerificationFailed(format!("bond {i} leaves the clique fiber"))
            })?;
            assignment.push(*k);
        }
        let restricted = GraphMorphism::new(upper.clone(), levels[i].clone(), assignment)?;
        if !restricted.is_connected_epi() {
            return Err(Error::VerificationFailed(format!(
                "restricted bond {i} is not a connected epimorphism"
            )));
        }
        bonds.push(restricted);
        levels.push(upper);
    }
    Ok(Tower {
        budget: None,
        levels,
        bonds,
        log: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::subdivide_edges;

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_graphs(&EnumerationBudget::new(1, 0, 0)).unwrap().len(), 1);
        assert_eq!(enumerate_graphs(&EnumerationBudget::new(3, 0, 0)).unwrap().len(), 4);
        assert_eq!(enumerate_graphs(&EnumerationBudget::new(4, 0, 0)).unwrap().len(), 10);
        assert!(matches!(
            enumerate_graphs(&EnumerationBudget::new(7, 0, 0)),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn morphism_list_for_three_vertices() {
        let ms = enumerate_morphisms(&EnumerationBudget::new(3, 0, 0)).unwrap();
        assert_eq!(ms.len(), 9);
        assert!(ms.iter().all(GraphMorphism::is_connected_epi));
        let point_to_point = ms
            .iter()
            .filter(|m| m.source().len() == 1 && m.target().len() == 1)
            .count();
        assert_eq!(point_to_point, 1);
    }

    #[test]
    fn depth_zero_tower_is_the_first_graph() {
        let t = build_generic_tower(&EnumerationBudget::new(3, 0, 0)).unwrap();
        assert_eq!(t.depth(), 0);
        assert_eq!(t.levels[0].len(), 1);
    }

    #[test]
    fn identity_extension_returns_f() {
        let t = build_generic_tower(&EnumerationBudget::new(2, 2, 1)).unwrap();
        let f = GraphMorphism::identity(t.levels[1].clone());
        let w = extension_witness(&t, 1, &f, &f).unwrap();
        assert_eq!(w.level, 1);
        assert_eq!(w.map, f);
    }

    #[test]
    fn triangle_count_on_identity_bond() {
        let k3 = Arc::new(Graph::complete(3));
        let t = Tower::from_bonds(k3, vec![]).unwrap();
        assert_eq!(triangle_persistence(&t, 0, 0).unwrap(), 1);
        assert!(matches!(
            triangle_persistence(&t, 0, 1),
            Err(Error::LevelOutOfRange { .. })
        ));
    }

    #[test]
    fn subdivided_level_kills_triangles() {
        let k3 = Graph::complete(3);
        let bond = collapse_map(&k3, 1, &[0, 1, 1]).unwrap();
        let t = Tower::from_bonds(bond.target().clone(), vec![bond.clone()]).unwrap();
        assert_eq!(*t.levels[1], subdivide_edges(&k3, 1).unwrap());
        assert_eq!(triangle_persistence(&t, 0, 1).unwrap(), 0);
    }

    #[test]
    fn zero_rounds_is_empty() {
        let t = build_generic_tower(&EnumerationBudget::new(2, 1, 0)).unwrap();
        let i = back_and_forth(&t, &t, 0).unwrap();
        assert!(i.maps.is_empty());
    }

    #[test]
    fn constant_target_gives_constant_maps() {
        let t = build_generic_tower(&EnumerationBudget::new(3, 4, 3)).unwrap();
        let pt = point();
        let bonds = vec![
            GraphMorphism::identity(pt.clone()),
            GraphMorphism::identity(pt.clone()),
        ];
        let target = Tower::from_bonds(pt, bonds).unwrap();
        let m = open_tower_map(&t, &target).unwrap();
        assert!(m.is_coherent(&t, &target));
        for i in 0..2 {
            assert!(verify_openness_claim(&t, &target, &m, i));
        }
    }
}
