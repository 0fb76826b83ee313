//! Finite reflexive graphs and vertex maps between them.
//!
//! Loops are implicit: every vertex is adjacent to itself and no loop is ever
//! stored. Vertices are addressed by index internally and by name at the edges
//! of the API.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Default vertex bound for brute-force canonical forms.
pub const CANONICAL_BOUND: usize = 8;

#[derive(Clone)]
pub struct Graph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    nbrs: Vec<Vec<usize>>,
    matrix: Vec<bool>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.nbrs == other.nbrs
    }
}

impl Eq for Graph {}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<(&str, &str)> = self
            .edges()
            .into_iter()
            .map(|(u, v)| (self.name(u), self.name(v)))
            .collect();
        f.debug_struct("Graph")
            .field("vertices", &self.names)
            .field("edges", &edges)
            .finish()
    }
}

impl Graph {
    /// Builds a graph from vertex names and named edges. Duplicate names, unknown
    /// endpoints and loops are rejected.
    pub fn new<V, A, B>(vertices: &[V], edges: &[(A, B)]) -> Result<Self>
    where
        V: AsRef<str>,
        A: AsRef<str>,
        B: AsRef<str>,
    {
        let names: Vec<String> = vertices.iter().map(|v| v.as_ref().to_string()).collect();
        let index = build_index(&names)?;
        let mut pairs = Vec::with_capacity(edges.len());
        for (k, (a, b)) in edges.iter().enumerate() {
            let (a, b) = (a.as_ref(), b.as_ref());
            let lookup = |name: &str| {
                index.get(name).copied().ok_or_else(|| {
                    Error::malformed(format!("edges[{k}]"), format!("unknown vertex {name:?}"))
                })
            };
            let (u, v) = (lookup(a)?, lookup(b)?);
            if u == v {
                return Err(Error::malformed(
                    format!("edges[{k}]"),
                    format!("loop on {a:?}; loops are implicit and must not be listed"),
                ));
            }
            pairs.push((u, v));
        }
        Ok(Self::assemble(names, index, pairs))
    }

    /// Graph with the given vertices and no edges besides the implicit loops.
    pub fn discrete<V: AsRef<str>>(vertices: &[V]) -> Result<Self> {
        Self::new::<V, &str, &str>(vertices, &[])
    }

    /// Builds a graph from names and index pairs. Pairs `(v, v)` are ignored, so
    /// constructions may pass an "edge or loop" relation directly.
    pub fn from_index_edges(
        names: Vec<String>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let index = build_index(&names)?;
        let n = names.len();
        let mut pairs = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::contract(format!(
                    "edge ({u}, {v}) out of range for {n} vertices"
                )));
            }
            if u != v {
                pairs.push((u, v));
            }
        }
        Ok(Self::assemble(names, index, pairs))
    }

    fn assemble(names: Vec<String>, index: HashMap<String, usize>, pairs: Vec<(usize, usize)>) -> Self {
        let n = names.len();
        let mut matrix = vec![false; n * n];
        let mut nbrs = vec![Vec::new(); n];
        for (u, v) in pairs {
            if !matrix[u * n + v] {
                matrix[u * n + v] = true;
                matrix[v * n + u] = true;
                nbrs[u].push(v);
                nbrs[v].push(u);
            }
        }
        for list in &mut nbrs {
            list.sort_unstable();
        }
        Graph {
            names,
            index,
            nbrs,
            matrix,
        }
    }

    /// Path `0 - 1 - ... - (n-1)` with numeric names.
    pub fn path(n: usize) -> Self {
        let edges = (1..n).map(|i| (i - 1, i));
        Self::from_index_edges(numeric_names(n), edges).expect("numeric names are unique")
    }

    /// Cycle on `n >= 3` vertices with numeric names.
    pub fn cycle(n: usize) -> Self {
        let edges = (0..n).map(|i| (i, (i + 1) % n));
        Self::from_index_edges(numeric_names(n), edges).expect("numeric names are unique")
    }

    /// Complete graph with numeric names.
    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        Self::from_index_edges(numeric_names(n), edges).expect("numeric names are unique")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Stored neighbours of `v`, ascending, never including `v` itself.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.nbrs[v]
    }

    /// Adjacency in the reflexive sense: true when `u == v`.
    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        u == v || self.matrix[u * self.len() + v]
    }

    /// True only for stored (non-loop) edges.
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.matrix[u * self.len() + v]
    }

    /// Stored edges as index pairs `(u, v)` with `u < v`, ascending.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, list) in self.nbrs.iter().enumerate() {
            out.extend(list.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.nbrs.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Subgraph induced on `members`, whose vertex `k` is `members[k]`.
    pub fn induced(&self, members: &[usize]) -> Graph {
        let names = members.iter().map(|&v| self.names[v].clone()).collect();
        let mut edges = Vec::new();
        for (i, &u) in members.iter().enumerate() {
            for (j, &v) in members.iter().enumerate().skip(i + 1) {
                if self.has_edge(u, v) {
                    edges.push((i, j));
                }
            }
        }
        Graph::from_index_edges(names, edges).expect("members are distinct vertices")
    }

    /// Path-connectivity of the subgraph induced on the vertices flagged in
    /// `mask`. The empty set is not connected.
    pub fn is_connected_mask(&self, mask: &[bool]) -> bool {
        let Some(start) = mask.iter().position(|&m| m) else {
            return false;
        };
        let total = mask.iter().filter(|&&m| m).count();
        self.reach_within(start, mask) == total
    }

    /// Path-connectivity of the subgraph induced on `members`.
    pub fn is_connected_set(&self, members: &[usize]) -> bool {
        let mut mask = vec![false; self.len()];
        for &v in members {
            mask[v] = true;
        }
        self.is_connected_mask(&mask)
    }

    pub fn is_connected(&self) -> bool {
        self.is_connected_mask(&vec![true; self.len()])
    }

    fn reach_within(&self, start: usize, mask: &[bool]) -> usize {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        let mut count = 0;
        while let Some(u) = queue.pop_front() {
            count += 1;
            for &w in &self.nbrs[u] {
                if mask[w] && !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        count
    }

    /// Connected components, each ascending, ordered by least member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut label = vec![usize::MAX; self.len()];
        let mut blocks = Vec::new();
        for s in 0..self.len() {
            if label[s] != usize::MAX {
                continue;
            }
            let id = blocks.len();
            let mut block = vec![s];
            label[s] = id;
            let mut head = 0;
            while head < block.len() {
                let u = block[head];
                head += 1;
                for &w in &self.nbrs[u] {
                    if label[w] == usize::MAX {
                        label[w] = id;
                        block.push(w);
                    }
                }
            }
            block.sort_unstable();
            blocks.push(block);
        }
        blocks
    }

    /// All 3-cliques `[a, b, c]` with `a < b < c`.
    pub fn triangles(&self) -> Vec<[usize; 3]> {
        let mut out = Vec::new();
        for (a, b) in self.edges() {
            for &c in &self.nbrs[b] {
                if c > b && self.has_edge(a, c) {
                    out.push([a, b, c]);
                }
            }
        }
        out
    }
}

fn numeric_names(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

fn build_index(names: &[String]) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(names.len());
    for (i, name) in names.iter().enumerate() {
        if index.insert(name.clone(), i).is_some() {
            return Err(Error::malformed(
                format!("vertices[{i}]"),
                format!("duplicate vertex {name:?}"),
            ));
        }
    }
    Ok(index)
}

/// A set of vertices of a fixed ambient graph.
#[derive(Clone, Debug)]
pub struct VertexSubset<'g> {
    ambient: &'g Graph,
    members: Vec<usize>,
}

impl<'g> VertexSubset<'g> {
    pub fn new<S: AsRef<str>>(ambient: &'g Graph, names: &[S]) -> Result<Self> {
        let mut members = Vec::with_capacity(names.len());
        for (k, name) in names.iter().enumerate() {
            let name = name.as_ref();
            let v = ambient.index_of(name).ok_or_else(|| {
                Error::malformed(format!("members[{k}]"), format!("{name:?} is not a vertex"))
            })?;
            members.push(v);
        }
        Ok(Self::from_indices(ambient, members))
    }

    pub fn from_indices(ambient: &'g Graph, mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        VertexSubset { ambient, members }
    }

    pub fn ambient(&self) -> &'g Graph {
        self.ambient
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn is_connected(&self) -> bool {
        self.ambient.is_connected_set(&self.members)
    }
}

pub fn is_connected_subset(s: &VertexSubset<'_>) -> bool {
    s.is_connected()
}

pub fn connected_components(g: &Graph) -> Vec<Vec<usize>> {
    g.components()
}

/// A total vertex map between two graphs.
#[derive(Clone, PartialEq, Eq)]
pub struct GraphMorphism {
    source: Arc<Graph>,
    target: Arc<Graph>,
    map: Vec<usize>,
}

impl fmt::Debug for GraphMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let assignment: BTreeMap<&str, &str> = self
            .map
            .iter()
            .enumerate()
            .map(|(v, &w)| (self.source.name(v), self.target.name(w)))
            .collect();
        f.debug_struct("GraphMorphism")
            .field("source", &self.source)
            .field("target", &self.target)
            .field("map", &assignment)
            .finish()
    }
}

impl GraphMorphism {
    pub fn new(source: Arc<Graph>, target: Arc<Graph>, map: Vec<usize>) -> Result<Self> {
        if map.len() != source.len() {
            return Err(Error::malformed(
                "map",
                format!("assigns {} of {} source vertices", map.len(), source.len()),
            ));
        }
        if let Some((v, &w)) = map.iter().enumerate().find(|(_, &w)| w >= target.len()) {
            return Err(Error::malformed(
                format!("map.{}", source.name(v)),
                format!("target index {w} out of range"),
            ));
        }
        Ok(GraphMorphism { source, target, map })
    }

    pub fn from_names(
        source: Arc<Graph>,
        target: Arc<Graph>,
        assignment: &BTreeMap<String, String>,
    ) -> Result<Self> {
        let mut map = Vec::with_capacity(source.len());
        for name in source.names() {
            let image = assignment
                .get(name)
                .ok_or_else(|| Error::malformed(format!("map.{name}"), "vertex is not assigned"))?;
            let w = target.index_of(image).ok_or_else(|| {
                Error::malformed(format!("map.{name}"), format!("{image:?} is not a target vertex"))
            })?;
            map.push(w);
        }
        if let Some(extra) = assignment.keys().find(|k| source.index_of(k).is_none()) {
            return Err(Error::malformed(format!("map.{extra}"), "not a source vertex"));
        }
        Ok(GraphMorphism { source, target, map })
    }

    pub fn identity(g: Arc<Graph>) -> Self {
        let map = (0..g.len()).collect();
        GraphMorphism {
            source: g.clone(),
            target: g,
            map,
        }
    }

    pub fn constant(source: Arc<Graph>, target: Arc<Graph>, value: usize) -> Result<Self> {
        let map = vec![value; source.len()];
        Self::new(source, target, map)
    }

    pub fn source(&self) -> &Arc<Graph> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Graph> {
        &self.target
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, v: usize) -> usize {
        self.map[v]
    }

    /// Named assignment, source name to target name.
    pub fn assignment(&self) -> BTreeMap<String, String> {
        self.map
            .iter()
            .enumerate()
            .map(|(v, &w)| (self.source.name(v).to_string(), self.target.name(w).to_string()))
            .collect()
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &GraphMorphism) -> Result<GraphMorphism> {
        if !same_graph(&inner.target, &self.source) {
            return Err(Error::contract(
                "composition: inner target differs from outer source",
            ));
        }
        let map = inner.map.iter().map(|&v| self.map[v]).collect();
        Ok(GraphMorphism {
            source: inner.source.clone(),
            target: self.target.clone(),
            map,
        })
    }

    /// Edges and loops go to edges or loops.
    pub fn is_homomorphism(&self) -> bool {
        self.source
            .edges()
            .into_iter()
            .all(|(u, v)| self.target.adjacent(self.map[u], self.map[v]))
    }

    fn covers_vertices(&self) -> bool {
        let mut hit = vec![false; self.target.len()];
        for &w in &self.map {
            hit[w] = true;
        }
        hit.into_iter().all(|h| h)
    }

    fn covers_edges(&self) -> bool {
        let n = self.target.len();
        let mut hit = vec![false; n * n];
        for (u, v) in self.source.edges() {
            let (a, b) = (self.map[u], self.map[v]);
            hit[a * n + b] = true;
            hit[b * n + a] = true;
        }
        self.target.edges().into_iter().all(|(a, b)| hit[a * n + b])
    }

    /// Surjective on vertices and on stored edges. Requires a homomorphism.
    pub fn is_epimorphism(&self) -> Result<bool> {
        if !self.is_homomorphism() {
            return Err(Error::contract("is_epimorphism: map is not a homomorphism"));
        }
        Ok(self.covers_vertices() && self.covers_edges())
    }

    /// An epimorphism all of whose point fibers are connected; false for maps
    /// that are not homomorphisms.
    pub fn is_connected_epi(&self) -> bool {
        if !self.is_homomorphism() || !self.covers_vertices() || !self.covers_edges() {
            return false;
        }
        self.fibers()
            .iter()
            .all(|fiber| self.source.is_connected_set(fiber))
    }

    pub fn fiber(&self, w: usize) -> Vec<usize> {
        (0..self.map.len()).filter(|&v| self.map[v] == w).collect()
    }

    /// All point fibers, indexed by target vertex.
    pub fn fibers(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.target.len()];
        for (v, &w) in self.map.iter().enumerate() {
            out[w].push(v);
        }
        out
    }

    /// Source vertices whose image is flagged in `mask`.
    pub fn preimage(&self, mask: &[bool]) -> Vec<usize> {
        (0..self.map.len()).filter(|&v| mask[self.map[v]]).collect()
    }

    /// Restriction to the induced subgraph on `members`, as a map onto the
    /// subgraph of the target induced on the image.
    pub fn restrict(&self, members: &[usize]) -> GraphMorphism {
        let mut image: Vec<usize> = members.iter().map(|&v| self.map[v]).collect();
        image.sort_unstable();
        image.dedup();
        let position: HashMap<usize, usize> =
            image.iter().enumerate().map(|(k, &w)| (w, k)).collect();
        let map = members.iter().map(|&v| position[&self.map[v]]).collect();
        GraphMorphism {
            source: Arc::new(self.source.induced(members)),
            target: Arc::new(self.target.induced(&image)),
            map,
        }
    }
}

pub(crate) fn same_graph(a: &Arc<Graph>, b: &Arc<Graph>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Canonically relabelled copy of a graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    /// Graph on vertices `"0".."n-1"`.
    pub graph: Graph,
    /// `relabel[v]` is the canonical position of original vertex `v`.
    pub relabel: Vec<usize>,
}

struct LabelSearch<'a> {
    g: &'a Graph,
    best: Option<Vec<bool>>,
    optimal: Vec<Vec<usize>>,
    order: Vec<usize>,
    used: Vec<bool>,
    bits: Vec<bool>,
    collect_all: bool,
}

impl LabelSearch<'_> {
    fn run(&mut self) {
        let n = self.g.len();
        let k = self.order.len();
        if k == n {
            match self.best.as_ref().map(|b| self.bits.cmp(b)) {
                None | Some(Ordering::Less) => {
                    self.best = Some(self.bits.clone());
                    self.optimal = vec![self.order.clone()];
                }
                Some(Ordering::Equal) if self.collect_all => self.optimal.push(self.order.clone()),
                _ => {}
            }
            return;
        }
        for v in 0..n {
            if self.used[v] {
                continue;
            }
            let mark = self.bits.len();
            for i in 0..k {
                self.bits.push(self.g.has_edge(self.order[i], v));
            }
            // Prefix comparison against the best complete labelling so far.
            let keep = match &self.best {
                None => true,
                Some(best) => match self.bits[..].cmp(&best[..self.bits.len()]) {
                    Ordering::Less => true,
                    Ordering::Equal => true,
                    Ordering::Greater => false,
                },
            };
            if keep {
                self.used[v] = true;
                self.order.push(v);
                self.run();
                self.order.pop();
                self.used[v] = false;
            }
            self.bits.truncate(mark);
        }
    }
}

fn optimal_labellings(g: &Graph, collect_all: bool) -> (Vec<bool>, Vec<Vec<usize>>) {
    let mut search = LabelSearch {
        g,
        best: None,
        optimal: Vec::new(),
        order: Vec::with_capacity(g.len()),
        used: vec![false; g.len()],
        bits: Vec::new(),
        collect_all,
    };
    search.run();
    (search.best.unwrap_or_default(), search.optimal)
}

fn check_bound(g: &Graph, bound: usize) -> Result<()> {
    if g.len() > bound {
        return Err(Error::ResourceLimit(format!(
            "canonical form needs at most {bound} vertices, graph has {}",
            g.len()
        )));
    }
    Ok(())
}

/// Relabelling that minimises the adjacency bit string over all vertex orders.
pub fn canonical_form(g: &Graph) -> Result<CanonicalForm> {
    canonical_form_bounded(g, CANONICAL_BOUND)
}

pub fn canonical_form_bounded(g: &Graph, bound: usize) -> Result<CanonicalForm> {
    check_bound(g, bound)?;
    let (_, optimal) = optimal_labellings(g, false);
    let order = optimal.into_iter().next().unwrap_or_default();
    let mut relabel = vec![0; g.len()];
    for (k, &v) in order.iter().enumerate() {
        relabel[v] = k;
    }
    let edges = g.edges().into_iter().map(|(u, v)| (relabel[u], relabel[v]));
    let graph = Graph::from_index_edges(numeric_names(g.len()), edges)
        .expect("numeric names are unique");
    Ok(CanonicalForm { graph, relabel })
}

/// Canonical adjacency bits; equal keys on equal vertex counts mean isomorphic.
pub fn canonical_key(g: &Graph) -> Result<(usize, Vec<bool>)> {
    check_bound(g, CANONICAL_BOUND)?;
    let (bits, _) = optimal_labellings(g, false);
    Ok((g.len(), bits))
}

/// Automorphisms of `g` as permutations `p` with `p[v]` the image of `v`.
pub fn automorphisms(g: &Graph) -> Result<Vec<Vec<usize>>> {
    check_bound(g, CANONICAL_BOUND)?;
    let (_, optimal) = optimal_labellings(g, true);
    let Some(first) = optimal.first() else {
        return Ok(vec![Vec::new()]);
    };
    // Two optimal orders `o`, `o'` yield the automorphism `o[k] -> o'[k]`.
    let mut out: Vec<Vec<usize>> = optimal
        .iter()
        .map(|other| {
            let mut p = vec![0; g.len()];
            for k in 0..g.len() {
                p[first[k]] = other[k];
            }
            p
        })
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

pub fn is_isomorphic(g: &Graph, h: &Graph) -> Result<bool> {
    check_bound(g, CANONICAL_BOUND)?;
    check_bound(h, CANONICAL_BOUND)?;
    if g.len() != h.len() || g.edge_count() != h.edge_count() {
        return Ok(false);
    }
    Ok(canonical_key(g)? == canonical_key(h)?)
}

/// Size of the largest set of pairwise adjacent vertices.
pub fn max_clique_size(g: &Graph) -> Result<usize> {
    if g.is_empty() {
        return Err(Error::EmptyInput("max_clique_size of the empty graph".into()));
    }
    let mut best = 1;
    let all: Vec<usize> = (0..g.len()).collect();
    extend_clique(g, 0, &all, &mut best);
    Ok(best)
}

fn extend_clique(g: &Graph, size: usize, candidates: &[usize], best: &mut usize) {
    if candidates.is_empty() {
        *best = (*best).max(size);
        return;
    }
    for (i, &v) in candidates.iter().enumerate() {
        if size + candidates.len() - i <= *best {
            return;
        }
        let next: Vec<usize> = candidates[i + 1..]
            .iter()
            .copied()
            .filter(|&w| g.has_edge(v, w))
            .collect();
        extend_clique(g, size + 1, &next, best);
    }
}
