//! Finite simplicial complexes, integral chains, boundary and induced chain
//! maps, reduced homology and the acyclic-map class with its pullback amalgam.
//!
//! Every complex carries the empty face, so chains live in the augmented complex
//! and `∂` of a vertex is the empty face.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphMorphism};
use crate::ops::pair_name;
use crate::snf::{invariant_factors, smith_normal_form, Matrix};

/// Downward-closed family of vertex sets stored by its maximal faces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialComplex {
    /// Sorted; vertex indices follow this order.
    vertices: Vec<String>,
    /// Sorted index vectors, none contained in another.
    maximal: Vec<Vec<usize>>,
}

impl SimplicialComplex {
    /// Downward closure of the given faces. Repeated vertices within a face
    /// are merged.
    pub fn closure<S: AsRef<str>>(faces: &[Vec<S>]) -> SimplicialComplex {
        let vertices: Vec<String> = faces
            .iter()
            .flatten()
            .map(|v| v.as_ref().to_string())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: HashMap<&str, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        let sets = faces.iter().map(|f| {
            f.iter()
                .map(|v| index[v.as_ref()])
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect::<Vec<_>>()
        });
        SimplicialComplex {
            maximal: maximal_only(sets),
            vertices,
        }
    }

    fn from_parts(vertices: Vec<String>, faces: impl IntoIterator<Item = Vec<usize>>) -> Self {
        SimplicialComplex::closure(
            &faces
                .into_iter()
                .map(|f| f.into_iter().map(|v| vertices[v].clone()).collect())
                .collect::<Vec<Vec<String>>>(),
        )
    }

    /// Vertices and edges of a graph.
    pub fn from_graph(g: &Graph) -> SimplicialComplex {
        let mut faces: Vec<Vec<&str>> = g.edges().iter().map(|&(u, v)| vec![g.name(u), g.name(v)]).collect();
        faces.extend((0..g.len()).filter(|&v| g.neighbors(v).is_empty()).map(|v| vec![g.name(v)]));
        SimplicialComplex::closure(&faces)
    }

    /// The full simplex on `n` vertices named `"0".."n-1"`.
    pub fn simplex(n: usize) -> SimplicialComplex {
        SimplicialComplex::closure(&[(0..n).map(|i| i.to_string()).collect::<Vec<_>>()])
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vertices.binary_search_by(|v| v.as_str().cmp(name)).ok()
    }

    pub fn maximal_faces(&self) -> &[Vec<usize>] {
        &self.maximal
    }

    pub fn maximal_faces_named(&self) -> Vec<Vec<String>> {
        self.maximal.iter().map(|f| self.names_of(f)).collect()
    }

    pub fn names_of(&self, face: &[usize]) -> Vec<String> {
        face.iter().map(|&v| self.vertices[v].clone()).collect()
    }

    /// Only the empty face.
    pub fn is_void(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Largest face dimension; `-1` for the complex with only the empty face.
    pub fn dim(&self) -> isize {
        self.maximal.iter().map(|f| f.len() as isize - 1).max().unwrap_or(-1)
    }

    /// `face` is sorted and lies in some maximal face.
    pub fn contains_face(&self, face: &[usize]) -> bool {
        face.windows(2).all(|w| w[0] < w[1])
            && (face.is_empty() || self.maximal.iter().any(|m| is_subset(face, m)))
    }

    /// Faces of dimension `k`, sorted; `k = -1` yields the empty face.
    pub fn faces(&self, k: isize) -> Vec<Vec<usize>> {
        if k < -1 {
            return Vec::new();
        }
        if k == -1 {
            return vec![Vec::new()];
        }
        let size = (k + 1) as usize;
        let mut out = BTreeSet::new();
        for m in &self.maximal {
            if m.len() >= size {
                for_each_subset(m, size, &mut |s| {
                    out.insert(s.to_vec());
                });
            }
        }
        out.into_iter().collect()
    }

    /// Every face, the empty one included, by dimension.
    pub fn all_faces(&self) -> Vec<Vec<usize>> {
        (-1..=self.dim()).flat_map(|k| self.faces(k)).collect()
    }

    pub fn face_count(&self) -> usize {
        (-1..=self.dim()).map(|k| self.faces(k).len()).sum()
    }

    /// Faces of dimension at most `n`.
    pub fn skeleton(&self, n: isize) -> SimplicialComplex {
        if n < 0 {
            return SimplicialComplex::closure::<String>(&[]);
        }
        let size = (n + 1) as usize;
        let mut faces = Vec::new();
        for m in &self.maximal {
            if m.len() <= size {
                faces.push(m.clone());
            } else {
                for_each_subset(m, size, &mut |s| faces.push(s.to_vec()));
            }
        }
        SimplicialComplex::from_parts(self.vertices.clone(), faces)
    }

    /// Faces contained in the vertex set `members`.
    pub fn induced(&self, members: &[usize]) -> SimplicialComplex {
        let keep: HashSet<usize> = members.iter().copied().collect();
        let faces = self
            .maximal
            .iter()
            .map(|m| m.iter().copied().filter(|v| keep.contains(v)).collect::<Vec<_>>())
            .filter(|f| !f.is_empty());
        SimplicialComplex::from_parts(self.vertices.clone(), faces.collect::<Vec<_>>())
    }

    fn face_from_names(&self, names: &[String]) -> Result<Vec<usize>> {
        let face = names
            .iter()
            .map(|n| {
                self.index_of(n)
                    .ok_or_else(|| Error::contract(format!("unknown vertex {n:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if !self.contains_face(&face) {
            return Err(Error::contract(format!("{names:?} is not a face of the complex")));
        }
        Ok(face)
    }
}

fn maximal_only(sets: impl IntoIterator<Item = Vec<usize>>) -> Vec<Vec<usize>> {
    let mut sets: Vec<Vec<usize>> = sets.into_iter().filter(|s| !s.is_empty()).collect();
    sets.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    sets.dedup();
    let mut kept: Vec<Vec<usize>> = Vec::new();
    for s in sets {
        if !kept.iter().any(|k| is_subset(&s, k)) {
            kept.push(s);
        }
    }
    kept.sort();
    kept
}

fn is_subset(small: &[usize], big: &[usize]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.any(|y| y == x))
}

fn for_each_subset(items: &[usize], size: usize, visit: &mut impl FnMut(&[usize])) {
    fn go(items: &[usize], size: usize, start: usize, acc: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
        if acc.len() == size {
            visit(acc);
            return;
        }
        for i in start..items.len() {
            if items.len() - i < size - acc.len() {
                break;
            }
            acc.push(items[i]);
            go(items, size, i + 1, acc, visit);
            acc.pop();
        }
    }
    go(items, size, 0, &mut Vec::with_capacity(size), visit);
}

/// Vertex map carrying faces to faces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialMap {
    source: Arc<SimplicialComplex>,
    target: Arc<SimplicialComplex>,
    map: Vec<usize>,
}

impl SimplicialMap {
    pub fn new(
        source: Arc<SimplicialComplex>,
        target: Arc<SimplicialComplex>,
        map: Vec<usize>,
    ) -> Result<Self> {
        if map.len() != source.vertex_count() {
            return Err(Error::contract(format!(
                "simplicial map has {} images for {} vertices",
                map.len(),
                source.vertex_count()
            )));
        }
        if let Some(v) = map.iter().position(|&w| w >= target.vertex_count()) {
            return Err(Error::contract(format!(
                "image of {:?} is not a target vertex",
                source.vertices[v]
            )));
        }
        let m = SimplicialMap { source, target, map };
        for face in &m.source.maximal {
            if !m.target.contains_face(&m.image(face)) {
                return Err(Error::contract(format!(
                    "image of face {:?} is not a face of the target",
                    m.source.names_of(face)
                )));
            }
        }
        Ok(m)
    }

    pub fn from_names(
        source: Arc<SimplicialComplex>,
        target: Arc<SimplicialComplex>,
        assignment: &BTreeMap<String, String>,
    ) -> Result<Self> {
        let mut map = Vec::with_capacity(source.vertex_count());
        for v in source.vertices() {
            let w = assignment
                .get(v)
                .ok_or_else(|| Error::malformed(format!("/map/{v}"), "vertex has no image"))?;
            let i = target
                .index_of(w)
                .ok_or_else(|| Error::malformed(format!("/map/{v}"), format!("unknown target vertex {w:?}")))?;
            map.push(i);
        }
        if let Some(extra) = assignment.keys().find(|k| source.index_of(k).is_none()) {
            return Err(Error::malformed(format!("/map/{extra}"), "not a source vertex"));
        }
        SimplicialMap::new(source, target, map)
    }

    /// The graph morphism seen on vertices and edges.
    pub fn from_graph_morphism(m: &GraphMorphism) -> Result<Self> {
        let source = Arc::new(SimplicialComplex::from_graph(m.source()));
        let target = Arc::new(SimplicialComplex::from_graph(m.target()));
        SimplicialMap::from_names(source, target, &m.assignment())
    }

    pub fn identity(c: Arc<SimplicialComplex>) -> Self {
        let map = (0..c.vertex_count()).collect();
        SimplicialMap {
            source: c.clone(),
            target: c,
            map,
        }
    }

    pub fn source(&self) -> &Arc<SimplicialComplex> {
        &self.source
    }

    pub fn target(&self) -> &Arc<SimplicialComplex> {
        &self.target
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn assignment(&self) -> BTreeMap<String, String> {
        self.map
            .iter()
            .enumerate()
            .map(|(v, &w)| (self.source.vertices[v].clone(), self.target.vertices[w].clone()))
            .collect()
    }

    /// Image vertex set, sorted.
    pub fn image(&self, face: &[usize]) -> Vec<usize> {
        face.iter()
            .map(|&v| self.map[v])
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    pub fn compose(&self, inner: &SimplicialMap) -> Result<SimplicialMap> {
        if *inner.target != *self.source {
            return Err(Error::contract("compose: inner target differs from outer source"));
        }
        let map = inner.map.iter().map(|&v| self.map[v]).collect();
        Ok(SimplicialMap {
            source: inner.source.clone(),
            target: self.target.clone(),
            map,
        })
    }

    /// Every target face is the image of a source face.
    pub fn is_face_surjective(&self) -> bool {
        let images: HashSet<Vec<usize>> = self.source.all_faces().iter().map(|f| self.image(f)).collect();
        self.target.all_faces().iter().all(|f| images.contains(f))
    }

    /// Source faces whose image lies in `rho`.
    pub fn preimage_of_face(&self, rho: &[usize]) -> SimplicialComplex {
        let members: Vec<usize> = (0..self.map.len()).filter(|&v| rho.contains(&self.map[v])).collect();
        self.source.induced(&members)
    }

    /// Source faces whose image is a face of `sub`, a subcomplex of the target
    /// given by index faces.
    pub fn preimage_of_subcomplex(&self, sub_faces: &HashSet<Vec<usize>>) -> SimplicialComplex {
        let faces: Vec<Vec<usize>> = self
            .source
            .all_faces()
            .into_iter()
            .filter(|f| !f.is_empty() && sub_faces.contains(&self.image(f)))
            .collect();
        SimplicialComplex::from_parts(self.source.vertices.clone(), faces)
    }
}

/// Integral chain with faces in ascending name order and orientation signs
/// folded into the coefficients. Zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Chain {
    terms: BTreeMap<Vec<String>, BigInt>,
}

impl Chain {
    pub fn zero() -> Self {
        Chain::default()
    }

    /// Sum of oriented faces. Each face is sorted and the sign of the sorting
    /// permutation applied; a face with a repeated vertex is rejected.
    pub fn from_terms<I, S>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<S>, BigInt)>,
        S: Into<String>,
    {
        let mut out = Chain::zero();
        for (face, coeff) in terms {
            let face: Vec<String> = face.into_iter().map(Into::into).collect();
            match orient(face) {
                Some((sorted, sign)) => out.add_term(sorted, if sign { -coeff } else { coeff }),
                None => return Err(Error::contract("oriented face repeats a vertex")),
            }
        }
        Ok(out)
    }

    pub fn single<S: Into<String>>(face: Vec<S>, coeff: i64) -> Result<Self> {
        Chain::from_terms([(face, BigInt::from(coeff))])
    }

    pub fn terms(&self) -> &BTreeMap<Vec<String>, BigInt> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `face` must already be in ascending order.
    fn add_term(&mut self, face: Vec<String>, coeff: BigInt) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(face).or_insert_with(BigInt::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn add(&self, other: &Chain) -> Chain {
        let mut out = self.clone();
        for (f, c) in &other.terms {
            out.add_term(f.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, k: &BigInt) -> Chain {
        let mut out = Chain::zero();
        for (f, c) in &self.terms {
            out.add_term(f.clone(), c * k);
        }
        out
    }

    /// Dimension shared by all terms, `None` for the zero chain or a mixed one.
    pub fn degree(&self) -> Option<isize> {
        let mut dims = self.terms.keys().map(|f| f.len() as isize - 1);
        let first = dims.next()?;
        dims.all(|d| d == first).then_some(first)
    }
}

/// Sorted copy and whether the sorting permutation is odd; `None` on repeats.
fn orient(mut face: Vec<String>) -> Option<(Vec<String>, bool)> {
    let mut odd = false;
    for i in 1..face.len() {
        let mut j = i;
        while j > 0 && face[j - 1] > face[j] {
            face.swap(j - 1, j);
            odd = !odd;
            j -= 1;
        }
    }
    face.windows(2).all(|w| w[0] < w[1]).then_some((face, odd))
}

fn sign(i: usize) -> BigInt {
    if i % 2 == 0 {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

/// Alternating-sign face deletion, extended linearly; the empty face has zero
/// boundary.
pub fn boundary(z: &Chain) -> Chain {
    let mut out = Chain::zero();
    for (face, c) in &z.terms {
        for i in 0..face.len() {
            let mut rest = face.clone();
            rest.remove(i);
            out.add_term(rest, c * sign(i));
        }
    }
    out
}

/// Induced chain map: a face whose image has fewer vertices goes to zero.
pub fn chain_map(f: &SimplicialMap, z: &Chain) -> Result<Chain> {
    let mut out = Chain::zero();
    for (face, c) in &z.terms {
        let idx = f.source.face_from_names(face)?;
        let image: Vec<String> = idx.iter().map(|&v| f.target.vertices[f.map[v]].clone()).collect();
        if let Some((sorted, odd)) = orient(image) {
            out.add_term(sorted, if odd { -c } else { c.clone() });
        }
    }
    Ok(out)
}

/// `∂_k` as a matrix from `k`-faces (columns) to `(k-1)`-faces (rows), with
/// face lists sorted as in [`SimplicialComplex::faces`].
pub fn boundary_matrix(c: &SimplicialComplex, k: isize) -> (Matrix, usize, usize) {
    let rows = c.faces(k - 1);
    let cols = c.faces(k);
    let row_index: HashMap<&[usize], usize> = rows.iter().enumerate().map(|(i, f)| (f.as_slice(), i)).collect();
    let mut m = vec![vec![BigInt::zero(); cols.len()]; rows.len()];
    for (j, face) in cols.iter().enumerate() {
        for i in 0..face.len() {
            let mut rest = face.clone();
            rest.remove(i);
            m[row_index[rest.as_slice()]][j] = sign(i);
        }
    }
    (m, rows.len(), cols.len())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyReport {
    pub degree: isize,
    pub rank: usize,
    /// Invariant factors greater than one, each dividing the next.
    pub torsion: Vec<BigInt>,
}

impl HomologyReport {
    pub fn vanishes(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }
}

/// Reduced homology of the augmented chain complex in degree `k >= -1`.
pub fn reduced_homology(c: &SimplicialComplex, k: isize) -> Result<HomologyReport> {
    if k < -1 {
        return Err(Error::contract(format!("reduced_homology: degree {k} is below -1")));
    }
    Ok(homology_through(c, k).pop().expect("degrees -1..=k"))
}

/// Reports for degrees `-1..=n`, reusing each boundary reduction.
fn homology_through(c: &SimplicialComplex, n: isize) -> Vec<HomologyReport> {
    let factors: Vec<Vec<BigInt>> = (0..=n + 1)
        .map(|k| {
            let (m, r, cols) = boundary_matrix(c, k);
            invariant_factors(&m, r, cols)
        })
        .collect();
    let rank_of = |k: isize| if k < 0 { 0 } else { factors[k as usize].len() };
    (-1..=n)
        .map(|k| {
            let chains = c.faces(k).len();
            HomologyReport {
                degree: k,
                rank: chains - rank_of(k) - rank_of(k + 1),
                torsion: factors[(k + 1) as usize]
                    .iter()
                    .filter(|d| !d.is_one())
                    .cloned()
                    .collect(),
            }
        })
        .collect()
}

/// Reduced homology vanishes, torsion included, in every degree `-1..=n`.
/// Vacuously true for `n < -1`.
pub fn is_n_acyclic(c: &SimplicialComplex, n: isize) -> bool {
    first_nonacyclic_degree(c, n).is_none()
}

fn first_nonacyclic_degree(c: &SimplicialComplex, n: isize) -> Option<isize> {
    if n < -1 {
        return None;
    }
    homology_through(c, n).into_iter().find(|h| !h.vanishes()).map(|h| h.degree)
}

/// Some `eta` with `∂ eta = z`, or `None` when no integral solution exists.
pub fn solve_boundary(c: &SimplicialComplex, z: &Chain) -> Result<Option<Chain>> {
    if z.is_zero() {
        return Ok(Some(Chain::zero()));
    }
    let k = z
        .degree()
        .ok_or_else(|| Error::contract("solve_boundary: chain mixes dimensions"))?;
    for face in z.terms.keys() {
        c.face_from_names(face)?;
    }
    if !boundary(z).is_zero() {
        return Err(Error::contract("solve_boundary: chain is not a cycle"));
    }
    let rows = c.faces(k);
    let cols = c.faces(k + 1);
    let (m, r, n) = boundary_matrix(c, k + 1);
    let row_index: HashMap<Vec<String>, usize> =
        rows.iter().enumerate().map(|(i, f)| (c.names_of(f), i)).collect();
    let mut rhs = vec![BigInt::zero(); r];
    for (face, coeff) in &z.terms {
        rhs[row_index[face]] = coeff.clone();
    }
    let snf = smith_normal_form(&m, r, n);
    Ok(snf.solve(&rhs).map(|x| {
        let mut eta = Chain::zero();
        for (face, coeff) in cols.iter().zip(x) {
            eta.add_term(c.names_of(face), coeff);
        }
        eta
    }))
}

/// For every nonempty target face `rho` with `dim rho <= m + 1`, the source
/// faces mapping into `rho` form an `m`-acyclic complex.
///
/// With `m = n - 1` this is the simplex-preimage test for `(n-1)`-acyclic maps
/// of dimension-`n` complexes: faces up to dimension `n` are inspected and
/// their preimages must be `(n-1)`-acyclic. The empty face is skipped, its
/// preimage being the void complex.
pub fn is_n_acyclic_map(f: &SimplicialMap, m: isize) -> bool {
    acyclic_map_violation(f, m).is_none()
}

/// First target face whose preimage fails, with the failing degree.
pub fn acyclic_map_violation(f: &SimplicialMap, m: isize) -> Option<(Vec<String>, isize)> {
    (0..=m + 1).find_map(|k| {
        f.target.faces(k).into_iter().find_map(|rho| {
            first_nonacyclic_degree(&f.preimage_of_face(&rho), m).map(|d| (f.target.names_of(&rho), d))
        })
    })
}

/// Dimension at most `n` and `(n-1)`-acyclic.
pub fn in_class_acyclic(c: &SimplicialComplex, n: isize) -> bool {
    c.dim() <= n && is_n_acyclic(c, n - 1)
}

/// Fiber product of two simplicial maps with its coordinate projections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pullback {
    pub complex: Arc<SimplicialComplex>,
    pub first: SimplicialMap,
    pub second: SimplicialMap,
}

impl Pullback {
    pub fn commutes(&self, f: &SimplicialMap, g: &SimplicialMap) -> bool {
        matches!(
            (f.compose(&self.first), g.compose(&self.second)),
            (Ok(a), Ok(b)) if a == b
        )
    }
}

/// Complex on compatible pairs `(b, c)` whose faces are `σ ×_A τ` for faces
/// with `fσ = gτ`.
pub fn simplicial_pullback(f: &SimplicialMap, g: &SimplicialMap) -> Result<Pullback> {
    if *f.target != *g.target {
        return Err(Error::contract("simplicial_pullback: maps have different targets"));
    }
    let (b, c) = (&f.source, &g.source);
    let pairs: Vec<(usize, usize)> = (0..b.vertex_count())
        .flat_map(|x| (0..c.vertex_count()).map(move |y| (x, y)))
        .filter(|&(x, y)| f.map[x] == g.map[y])
        .collect();
    let pair_index: HashMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let by_image = |m: &SimplicialMap| {
        let mut groups: HashMap<Vec<usize>, Vec<Vec<usize>>> = HashMap::new();
        for face in m.source.all_faces().into_iter().filter(|s| !s.is_empty()) {
            groups.entry(m.image(&face)).or_default().push(face);
        }
        groups
            .into_iter()
            .map(|(rho, faces)| (rho, maximal_only(faces)))
            .collect::<HashMap<_, _>>()
    };
    let (over_b, over_c) = (by_image(f), by_image(g));
    let mut faces = Vec::new();
    for (rho, sigmas) in &over_b {
        let Some(taus) = over_c.get(rho) else { continue };
        for sigma in sigmas {
            for tau in taus {
                let face: Vec<usize> = sigma
                    .iter()
                    .flat_map(|&x| tau.iter().map(move |&y| (x, y)))
                    .filter_map(|p| pair_index.get(&p).copied())
                    .collect();
                faces.push(face);
            }
        }
    }
    let names = distinct(pairs.iter().map(|&(x, y)| pair_name(&b.vertices[x], &c.vertices[y])).collect());
    let complex = Arc::new(SimplicialComplex::from_parts(
        names.clone(),
        faces.into_iter().chain((0..pairs.len()).map(|i| vec![i])),
    ));
    let project = |coord: &dyn Fn(usize) -> usize, target: &Arc<SimplicialComplex>| {
        let map = complex
            .vertices()
            .iter()
            .map(|n| {
                let i = names.iter().position(|m| m == n).expect("pullback vertex");
                coord(i)
            })
            .collect();
        SimplicialMap::new(complex.clone(), target.clone(), map)
    };
    let first = project(&|i| pairs[i].0, b)?;
    let second = project(&|i| pairs[i].1, c)?;
    Ok(Pullback {
        complex,
        first,
        second,
    })
}

fn distinct(mut names: Vec<String>) -> Vec<String> {
    let mut seen = HashSet::new();
    for name in names.iter_mut() {
        while !seen.insert(name.clone()) {
            name.push('\'');
        }
    }
    names
}

/// `n`-skeleton of the pullback, after checking that the three complexes lie
/// in the class for `n` and that both maps are `(n-1)`-acyclic.
pub fn amalgamate_acyclic(f: &SimplicialMap, g: &SimplicialMap, n: isize) -> Result<Pullback> {
    if *f.target != *g.target {
        return Err(Error::contract("amalgamate_acyclic: maps have different targets"));
    }
    for (label, c) in [("common target", &f.target), ("domain of f", &f.source), ("domain of g", &g.source)] {
        if c.dim() > n {
            return Err(Error::contract(format!(
                "{label} has dimension {} above {n}",
                c.dim()
            )));
        }
        if let Some(d) = first_nonacyclic_degree(c, n - 1) {
            return Err(Error::contract(format!(
                "{label} has nonvanishing reduced homology in degree {d}"
            )));
        }
    }
    for (label, m) in [("f", f), ("g", g)] {
        if let Some((face, d)) = acyclic_map_violation(m, n - 1) {
            return Err(Error::contract(format!(
                "{label}: preimage of face {face:?} has nonvanishing reduced homology in degree {d}"
            )));
        }
    }
    let full = simplicial_pullback(f, g)?;
    let complex = Arc::new(full.complex.skeleton(n));
    let first = SimplicialMap::new(complex.clone(), f.source.clone(), full.first.map.clone())?;
    let second = SimplicialMap::new(complex.clone(), g.source.clone(), full.second.map.clone())?;
    Ok(Pullback {
        complex,
        first,
        second,
    })
}
