//! Constructions on graphs: fiber-product amalgams and their exactness checks,
//! mapping cylinders, subdivisions with collapse maps, clique products and
//! local refinements.

use std::collections::HashSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{same_graph, Graph, GraphMorphism};

/// Default bound on `|B|` for the exhaustive structural-exactness check.
pub const STRUCTURAL_BOUND: usize = 10;

/// Name of the product vertex over `b` and `c`.
pub fn pair_name(b: &str, c: &str) -> String {
    format!("({b}|{c})")
}

/// A commuting square `f ∘ f_prime = g ∘ g_prime` over the cospan `B -f-> A <-g- C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmalgamSquare {
    pub f: GraphMorphism,
    pub g: GraphMorphism,
    pub f_prime: GraphMorphism,
    pub g_prime: GraphMorphism,
}

impl AmalgamSquare {
    pub fn apex(&self) -> &Arc<Graph> {
        self.f_prime.source()
    }

    /// Shapes match and both composites agree as vertex maps.
    pub fn commutes(&self) -> bool {
        same_graph(self.f.target(), self.g.target())
            && same_graph(self.f_prime.target(), self.f.source())
            && same_graph(self.g_prime.target(), self.g.source())
            && same_graph(self.f_prime.source(), self.g_prime.source())
            && (0..self.apex().len()).all(|d| {
                self.f.apply(self.f_prime.apply(d)) == self.g.apply(self.g_prime.apply(d))
            })
    }

    /// Commutes and all four maps are connected epimorphisms.
    pub fn is_well_formed(&self) -> bool {
        self.commutes()
            && [&self.f, &self.g, &self.f_prime, &self.g_prime]
                .iter()
                .all(|m| m.is_connected_epi())
    }
}

/// Compatible pairs `(b, c)` with `f(b) = g(c)` in lexicographic order, and the
/// product graph on them.
fn fiber_product(f: &GraphMorphism, g: &GraphMorphism) -> Result<(Graph, Vec<(usize, usize)>)> {
    if !same_graph(f.target(), g.target()) {
        return Err(Error::contract("amalgamate: f and g have different targets"));
    }
    let (b, c) = (f.source(), g.source());
    let over = g.fibers();
    let mut pairs = Vec::new();
    for x in 0..b.len() {
        for &y in &over[f.apply(x)] {
            pairs.push((x, y));
        }
    }
    let mut edges = Vec::new();
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            let ((x, y), (x2, y2)) = (pairs[i], pairs[j]);
            if b.adjacent(x, x2) && c.adjacent(y, y2) {
                edges.push((i, j));
            }
        }
    }
    let names = pairs
        .iter()
        .map(|&(x, y)| pair_name(b.name(x), c.name(y)))
        .collect();
    let graph = disambiguated(names, edges)?;
    Ok((graph, pairs))
}

pub(crate) fn disambiguated(mut names: Vec<String>, edges: Vec<(usize, usize)>) -> Result<Graph> {
    let mut seen = HashSet::new();
    for name in names.iter_mut() {
        while !seen.insert(name.clone()) {
            name.push('\'');
        }
    }
    Graph::from_index_edges(names, edges)
}

fn square_from_pairs(
    f: &GraphMorphism,
    g: &GraphMorphism,
    graph: Graph,
    pairs: &[(usize, usize)],
) -> AmalgamSquare {
    let apex = Arc::new(graph);
    let f_prime = GraphMorphism::new(
        apex.clone(),
        f.source().clone(),
        pairs.iter().map(|p| p.0).collect(),
    )
    .expect("projection lands in B");
    let g_prime = GraphMorphism::new(apex, g.source().clone(), pairs.iter().map(|p| p.1).collect())
        .expect("projection lands in C");
    AmalgamSquare {
        f: f.clone(),
        g: g.clone(),
        f_prime,
        g_prime,
    }
}

/// The amalgam on all compatible pairs, with `(b, c) ~ (b', c')` when both
/// coordinates are adjacent or equal.
pub fn amalgamate(f: &GraphMorphism, g: &GraphMorphism) -> Result<AmalgamSquare> {
    if !same_graph(f.target(), g.target()) {
        return Err(Error::contract("amalgamate: f and g have different targets"));
    }
    if !f.is_connected_epi() {
        return Err(Error::contract("amalgamate: f is not a connected epimorphism"));
    }
    if !g.is_connected_epi() {
        return Err(Error::contract("amalgamate: g is not a connected epimorphism"));
    }
    let (graph, pairs) = fiber_product(f, g)?;
    Ok(square_from_pairs(f, g, graph, &pairs))
}

/// The fiber-product amalgam thinned to an induced sub-amalgam that is minimal
/// for single-vertex deletion: vertices are visited in a random order and
/// dropped whenever both projections stay connected epimorphisms.
pub fn minimal_amalgam<R: Rng + ?Sized>(
    f: &GraphMorphism,
    g: &GraphMorphism,
    rng: &mut R,
) -> Result<AmalgamSquare> {
    let full = amalgamate(f, g)?;
    let (b, c) = (f.source(), g.source());
    let pairs: Vec<(usize, usize)> = (0..full.apex().len())
        .map(|d| (full.f_prime.apply(d), full.g_prime.apply(d)))
        .collect();
    let mut thinning = Thinning::new(b, c, &pairs);
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.shuffle(rng);
    loop {
        let mut changed = false;
        for &d in &order {
            if thinning.alive[d] && thinning.removable(d) {
                thinning.alive[d] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let kept: Vec<usize> = (0..pairs.len()).filter(|&d| thinning.alive[d]).collect();
    let graph = full.apex().induced(&kept);
    let kept_pairs: Vec<(usize, usize)> = kept.iter().map(|&d| pairs[d]).collect();
    Ok(square_from_pairs(f, g, graph, &kept_pairs))
}

struct Thinning<'a> {
    b: &'a Graph,
    c: &'a Graph,
    pairs: &'a [(usize, usize)],
    over_b: Vec<Vec<usize>>,
    over_c: Vec<Vec<usize>>,
    alive: Vec<bool>,
}

impl<'a> Thinning<'a> {
    fn new(b: &'a Graph, c: &'a Graph, pairs: &'a [(usize, usize)]) -> Self {
        let mut over_b = vec![Vec::new(); b.len()];
        let mut over_c = vec![Vec::new(); c.len()];
        for (d, &(x, y)) in pairs.iter().enumerate() {
            over_b[x].push(d);
            over_c[y].push(d);
        }
        Thinning {
            b,
            c,
            pairs,
            over_b,
            over_c,
            alive: vec![true; pairs.len()],
        }
    }

    fn live(&self, list: &[usize], skip: usize) -> Vec<usize> {
        list.iter().copied().filter(|&d| d != skip && self.alive[d]).collect()
    }

    fn connected_by(&self, members: &[usize], adjacent: impl Fn(usize, usize) -> bool) -> bool {
        if members.is_empty() {
            return false;
        }
        let mut seen = vec![false; members.len()];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for j in 0..members.len() {
                if !seen[j] && adjacent(members[i], members[j]) {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count == members.len()
    }

    /// Whether deleting `d` keeps both projections connected epimorphisms. Only
    /// the two fibers through `d` and the edges at its coordinates can change.
    fn removable(&self, d: usize) -> bool {
        let (x, y) = self.pairs[d];
        let fiber_b = self.live(&self.over_b[x], d);
        if !self.connected_by(&fiber_b, |p, q| self.c.adjacent(self.pairs[p].1, self.pairs[q].1)) {
            return false;
        }
        let fiber_c = self.live(&self.over_c[y], d);
        if !self.connected_by(&fiber_c, |p, q| self.b.adjacent(self.pairs[p].0, self.pairs[q].0)) {
            return false;
        }
        for &x2 in self.b.neighbors(x) {
            let other = self.live(&self.over_b[x2], d);
            let covered = fiber_b.iter().any(|&p| {
                other
                    .iter()
                    .any(|&q| self.c.adjacent(self.pairs[p].1, self.pairs[q].1))
            });
            if !covered {
                return false;
            }
        }
        for &y2 in self.c.neighbors(y) {
            let other = self.live(&self.over_c[y2], d);
            let covered = fiber_c.iter().any(|&p| {
                other
                    .iter()
                    .any(|&q| self.b.adjacent(self.pairs[p].0, self.pairs[q].0))
            });
            if !covered {
                return false;
            }
        }
        true
    }
}

/// Every compatible pair `(b, c)` is the image of some apex vertex.
pub fn is_exact(square: &AmalgamSquare) -> bool {
    let hit: HashSet<(usize, usize)> = (0..square.apex().len())
        .map(|d| (square.f_prime.apply(d), square.g_prime.apply(d)))
        .collect();
    let over = square.g.fibers();
    (0..square.f.source().len()).all(|x| {
        let a = square.f.apply(x);
        over[a].iter().all(|&y| hit.contains(&(x, y)))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    F,
    G,
}

pub fn is_structurally_exact(square: &AmalgamSquare, side: Side) -> Result<bool> {
    is_structurally_exact_bounded(square, side, STRUCTURAL_BOUND)
}

/// For every connected induced `B₀` of the chosen leg's domain on which the
/// leg restricts to a connected epimorphism onto the induced image, the apex
/// part over `B₀` is connected and the other projection restricts to a
/// connected epimorphism onto its induced image.
pub fn is_structurally_exact_bounded(
    square: &AmalgamSquare,
    side: Side,
    bound: usize,
) -> Result<bool> {
    let (leg, over, across) = match side {
        Side::F => (&square.f, &square.f_prime, &square.g_prime),
        Side::G => (&square.g, &square.g_prime, &square.f_prime),
    };
    let domain = leg.source();
    if domain.len() > bound {
        return Err(Error::ResourceLimit(format!(
            "structural exactness enumerates subsets of at most {bound} vertices, got {}",
            domain.len()
        )));
    }
    let n = domain.len();
    for bits in 1u64..(1u64 << n) {
        let members: Vec<usize> = (0..n).filter(|&v| bits >> v & 1 == 1).collect();
        if !domain.is_connected_set(&members) || !leg.restrict(&members).is_connected_epi() {
            continue;
        }
        let mut mask = vec![false; n];
        for &v in &members {
            mask[v] = true;
        }
        let part = over.preimage(&mask);
        if !square.apex().is_connected_set(&part) || !across.restrict(&part).is_connected_epi() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Mapping cylinder of `alpha: X -> A` with its retraction onto `A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CylinderResult {
    pub cylinder: Arc<Graph>,
    pub include_a: GraphMorphism,
    pub include_x: GraphMorphism,
    pub retraction: GraphMorphism,
}

/// Gives each name in `names` a spelling not in `taken`, by prefixing with
/// `prefix` until fresh, and records the result in `taken`.
fn fresh_names(names: &[String], prefix: &str, taken: &mut HashSet<String>) -> Vec<String> {
    names
        .iter()
        .map(|name| {
            let mut candidate = name.clone();
            while taken.contains(&candidate) {
                candidate = format!("{prefix}{candidate}");
            }
            taken.insert(candidate.clone());
            candidate
        })
        .collect()
}

/// The cylinder lives on the `A` vertices followed by the `X` vertices. `X`
/// keeps its own edges and `x` is joined to `a` whenever `a = alpha(x')` for
/// some `x'` adjacent or equal to `x`. Colliding `X` names get an `x:` prefix.
pub fn mapping_cylinder(alpha: &GraphMorphism) -> Result<CylinderResult> {
    let (x_graph, a_graph) = (alpha.source(), alpha.target());
    if !a_graph.is_connected() {
        return Err(Error::contract("mapping_cylinder: A is not connected"));
    }
    if !alpha.is_homomorphism() {
        return Err(Error::contract("mapping_cylinder: alpha is not a homomorphism"));
    }
    let na = a_graph.len();
    let mut taken: HashSet<String> = a_graph.names().iter().cloned().collect();
    let mut names = a_graph.names().to_vec();
    names.extend(fresh_names(x_graph.names(), "x:", &mut taken));
    let mut edges = a_graph.edges();
    edges.extend(x_graph.edges().into_iter().map(|(u, v)| (na + u, na + v)));
    for x in 0..x_graph.len() {
        edges.push((na + x, alpha.apply(x)));
        for &x2 in x_graph.neighbors(x) {
            edges.push((na + x, alpha.apply(x2)));
        }
    }
    let cylinder = Arc::new(Graph::from_index_edges(names, edges)?);
    let include_a = GraphMorphism::new(a_graph.clone(), cylinder.clone(), (0..na).collect())?;
    let include_x = GraphMorphism::new(
        x_graph.clone(),
        cylinder.clone(),
        (0..x_graph.len()).map(|x| na + x).collect(),
    )?;
    let mut retract: Vec<usize> = (0..na).collect();
    retract.extend(alpha.map().iter().copied());
    let retraction = GraphMorphism::new(cylinder.clone(), a_graph.clone(), retract)?;
    Ok(CylinderResult {
        cylinder,
        include_a,
        include_x,
        retraction,
    })
}

/// The map between cylinders acting as `g` on the base and as the identity on
/// the `X` part, for `g ∘ beta = alpha`.
pub fn cylinder_extension(
    g: &GraphMorphism,
    beta: &GraphMorphism,
    alpha: &GraphMorphism,
) -> Result<GraphMorphism> {
    if !g.is_connected_epi() {
        return Err(Error::contract("cylinder_extension: g is not a connected epimorphism"));
    }
    if !same_graph(beta.source(), alpha.source()) {
        return Err(Error::contract("cylinder_extension: beta and alpha have different domains"));
    }
    if g.compose(beta)? != *alpha {
        return Err(Error::contract("cylinder_extension: g ∘ beta differs from alpha"));
    }
    let over_b = mapping_cylinder(beta)?;
    let over_a = mapping_cylinder(alpha)?;
    let (nb, na) = (g.source().len(), g.target().len());
    let mut map: Vec<usize> = g.map().to_vec();
    map.extend((0..beta.source().len()).map(|x| na + x));
    debug_assert_eq!(map.len(), nb + beta.source().len());
    GraphMorphism::new(over_b.cylinder, over_a.cylinder, map)
}

/// Replaces every edge `{v, v'}` (with `v` before `v'`) by the path
/// `v, v_1, ..., v_n, v'`. The new vertices follow the originals, grouped by edge
/// in edge order, and are named `v~v'#m`.
pub fn subdivide_edges(a: &Graph, n: usize) -> Result<Graph> {
    if n < 1 {
        return Err(Error::contract("subdivide_edges: n must be at least 1"));
    }
    let mut names = a.names().to_vec();
    let mut taken: HashSet<String> = names.iter().cloned().collect();
    let mut edges = Vec::new();
    for (u, v) in a.edges() {
        let mut prev = u;
        for m in 1..=n {
            let base = format!("{}~{}#{m}", a.name(u), a.name(v));
            let name = fresh_names(&[base], "_", &mut taken).remove(0);
            names.push(name);
            let id = names.len() - 1;
            edges.push((prev, id));
            prev = id;
        }
        edges.push((prev, v));
    }
    Graph::from_index_edges(names, edges)
}

/// Collapse of the `n`-fold subdivision onto `a`: the `m`-th interior vertex of
/// edge `e = {v, v'}` goes to `v'` when `m > gamma[e]` and to `v` otherwise.
/// `gamma` is indexed by the edge order of [`Graph::edges`].
pub fn collapse_map(a: &Graph, n: usize, gamma: &[usize]) -> Result<GraphMorphism> {
    let edges = a.edges();
    if gamma.len() != edges.len() {
        return Err(Error::contract(format!(
            "collapse_map: {} thresholds for {} edges",
            gamma.len(),
            edges.len()
        )));
    }
    if let Some(bad) = gamma.iter().find(|&&t| t > n) {
        return Err(Error::contract(format!(
            "collapse_map: threshold {bad} outside 0..={n}"
        )));
    }
    let sub = subdivide_edges(a, n)?;
    let mut map: Vec<usize> = (0..a.len()).collect();
    for (&(u, v), &t) in edges.iter().zip(gamma) {
        map.extend((1..=n).map(|m| if m > t { v } else { u }));
    }
    GraphMorphism::new(Arc::new(sub), Arc::new(a.clone()), map)
}

/// `b` times the complete graph on `size` vertices, with the projection onto `b`.
pub fn clique_product(b: &Graph, size: usize) -> Result<(Arc<Graph>, GraphMorphism)> {
    if size < 1 {
        return Err(Error::contract("clique_product: clique size must be at least 1"));
    }
    let cells: Vec<(usize, usize)> = (0..b.len())
        .flat_map(|x| (0..size).map(move |i| (x, i)))
        .collect();
    let names = cells
        .iter()
        .map(|&(x, i)| pair_name(b.name(x), &i.to_string()))
        .collect();
    let mut edges = Vec::new();
    for p in 0..cells.len() {
        for q in p + 1..cells.len() {
            if b.adjacent(cells[p].0, cells[q].0) {
                edges.push((p, q));
            }
        }
    }
    let product = Arc::new(disambiguated(names, edges)?);
    let projection = GraphMorphism::new(
        product.clone(),
        Arc::new(b.clone()),
        cells.iter().map(|c| c.0).collect(),
    )?;
    Ok((product, projection))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalRefinement {
    pub graph: Arc<Graph>,
    /// `j: B₀ -> B`.
    pub embedding: GraphMorphism,
    /// `g: B -> A` with `g ∘ j = i ∘ f`.
    pub map: GraphMorphism,
}

/// Extends `f: B₀ -> A₀` along an induced embedding `i: A₀ -> A`. The new graph
/// is `B₀` followed by the vertices of `A` outside `i(A₀)`; a vertex `b` of `B₀`
/// is joined to such an `a` when `i(f(b))` and `a` are adjacent in `A`.
pub fn local_refinement(f: &GraphMorphism, i: &GraphMorphism) -> Result<LocalRefinement> {
    if !same_graph(f.target(), i.source()) {
        return Err(Error::contract("local_refinement: f's target is not i's domain"));
    }
    if !f.is_connected_epi() {
        return Err(Error::contract("local_refinement: f is not a connected epimorphism"));
    }
    let (a0, a) = (i.source(), i.target());
    if !a.is_connected() {
        return Err(Error::contract("local_refinement: A is not connected"));
    }
    let mut in_image = vec![false; a.len()];
    for &w in i.map() {
        if in_image[w] {
            return Err(Error::contract("local_refinement: i is not injective"));
        }
        in_image[w] = true;
    }
    for u in 0..a0.len() {
        for v in u + 1..a0.len() {
            if a0.has_edge(u, v) != a.has_edge(i.apply(u), i.apply(v)) {
                return Err(Error::contract("local_refinement: i is not an induced embedding"));
            }
        }
    }
    let b0 = f.source();
    let outside: Vec<usize> = (0..a.len()).filter(|&w| !in_image[w]).collect();
    let nb = b0.len();
    let mut taken: HashSet<String> = b0.names().iter().cloned().collect();
    let mut names = b0.names().to_vec();
    let outside_names: Vec<String> = outside.iter().map(|&w| a.name(w).to_string()).collect();
    names.extend(fresh_names(&outside_names, "a:", &mut taken));
    let mut edges = b0.edges();
    for (p, &w) in outside.iter().enumerate() {
        for (q, &w2) in outside.iter().enumerate().skip(p + 1) {
            if a.has_edge(w, w2) {
                edges.push((nb + p, nb + q));
            }
        }
        for x in 0..nb {
            if a.has_edge(i.apply(f.apply(x)), w) {
                edges.push((x, nb + p));
            }
        }
    }
    let graph = Arc::new(Graph::from_index_edges(names, edges)?);
    let embedding = GraphMorphism::new(b0.clone(), graph.clone(), (0..nb).collect())?;
    let mut assignment: Vec<usize> = (0..nb).map(|x| i.apply(f.apply(x))).collect();
    assignment.extend(outside.iter().copied());
    let map = GraphMorphism::new(graph.clone(), a.clone(), assignment)?;
    Ok(LocalRefinement {
        graph,
        embedding,
        map,
    })
}
