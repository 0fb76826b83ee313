//! Random generators shared by the integration suites.
#![allow(dead_code)]

use std::sync::Arc;

use fraisse::simplicial::{Chain, SimplicialComplex, SimplicialMap};
use fraisse::{Graph, GraphMorphism};
use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Spanning tree plus each remaining pair with probability `density`.
pub fn connected_graph<R: Rng>(rng: &mut R, prefix: &str, n: usize, density: f64) -> Graph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !edges.contains(&(u, v)) && rng.gen_bool(density) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_index_edges(names(prefix, n), edges).unwrap()
}

pub fn any_graph<R: Rng>(rng: &mut R, prefix: &str, n: usize, density: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(density) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_index_edges(names(prefix, n), edges).unwrap()
}

/// Blows each vertex of `a` up into a fiber and joins fibers over every edge
/// of `a` by a random nonempty set of pairs. Fibers are connected unless
/// `connected_fibers` is false, in which case they are arbitrary graphs.
pub fn blow_up<R: Rng>(
    rng: &mut R,
    a: &Arc<Graph>,
    prefix: &str,
    total: usize,
    connected_fibers: bool,
) -> GraphMorphism {
    let n = a.len();
    assert!(total >= n);
    let mut sizes = vec![1usize; n];
    for _ in n..total {
        sizes[rng.gen_range(0..n)] += 1;
    }
    let mut owner = Vec::new();
    let mut edges = Vec::new();
    let mut start = Vec::new();
    for (w, &k) in sizes.iter().enumerate() {
        let base = owner.len();
        start.push(base);
        let fiber = if connected_fibers {
            connected_graph(rng, "f", k, 0.4)
        } else {
            any_graph(rng, "f", k, 0.4)
        };
        edges.extend(fiber.edges().into_iter().map(|(u, v)| (base + u, base + v)));
        owner.extend(std::iter::repeat(w).take(k));
    }
    for (u, v) in a.edges() {
        let pairs: Vec<(usize, usize)> = (0..sizes[u])
            .flat_map(|i| (0..sizes[v]).map(move |j| (i, j)))
            .collect();
        let forced = *pairs.choose(rng).unwrap();
        for &(i, j) in &pairs {
            if (i, j) == forced || rng.gen_bool(0.35) {
                edges.push((start[u] + i, start[v] + j));
            }
        }
    }
    let b = Graph::from_index_edges(names(prefix, total), edges).unwrap();
    GraphMorphism::new(Arc::new(b), a.clone(), owner).unwrap()
}

/// A connected epimorphism onto `a` from a graph with `total` vertices.
pub fn random_ce<R: Rng>(rng: &mut R, a: &Arc<Graph>, prefix: &str, total: usize) -> GraphMorphism {
    blow_up(rng, a, prefix, total, true)
}

/// A cospan of connected epimorphisms with every graph of at most `max` vertices.
pub fn random_cospan<R: Rng>(rng: &mut R, max: usize) -> (GraphMorphism, GraphMorphism) {
    let na = rng.gen_range(1..=max.min(4));
    let a = Arc::new(connected_graph(rng, "a", na, 0.4));
    let nb = rng.gen_range(na..=max);
    let nc = rng.gen_range(na..=max);
    (random_ce(rng, &a, "b", nb), random_ce(rng, &a, "c", nc))
}

/// A random graph `X` with a homomorphism into `b`.
pub fn random_homomorphism_into<R: Rng>(rng: &mut R, b: &Arc<Graph>, nx: usize) -> GraphMorphism {
    let map: Vec<usize> = (0..nx).map(|_| rng.gen_range(0..b.len())).collect();
    let mut edges = Vec::new();
    for u in 0..nx {
        for v in u + 1..nx {
            if b.adjacent(map[u], map[v]) && rng.gen_bool(0.5) {
                edges.push((u, v));
            }
        }
    }
    let x = Graph::from_index_edges(names("x", nx), edges).unwrap();
    GraphMorphism::new(Arc::new(x), b.clone(), map).unwrap()
}

/// Closure of a few random faces on `n` vertices.
pub fn random_complex<R: Rng>(rng: &mut R, n: usize, max_dim: usize) -> SimplicialComplex {
    let verts = names("v", n);
    let mut faces: Vec<Vec<String>> = Vec::new();
    for _ in 0..rng.gen_range(1..=n + 2) {
        let size = rng.gen_range(1..=(max_dim + 1).min(n));
        let mut pool = verts.clone();
        pool.shuffle(rng);
        faces.push(pool[..size].to_vec());
    }
    // every vertex present
    for v in &verts {
        faces.push(vec![v.clone()]);
    }
    SimplicialComplex::closure(&faces)
}

/// A random vertex map out of `source`, with the target the closure of the
/// images of its faces plus a few extra faces.
pub fn random_map<R: Rng>(rng: &mut R, source: Arc<SimplicialComplex>, target_vertices: usize) -> SimplicialMap {
    let targets = names("w", target_vertices);
    let map: Vec<usize> = (0..source.vertex_count())
        .map(|_| rng.gen_range(0..target_vertices))
        .collect();
    let mut faces: Vec<Vec<String>> = source
        .maximal_faces()
        .iter()
        .map(|f| f.iter().map(|&v| targets[map[v]].clone()).collect())
        .collect();
    for t in &targets {
        faces.push(vec![t.clone()]);
    }
    if rng.gen_bool(0.5) {
        let mut pool = targets.clone();
        pool.shuffle(rng);
        faces.push(pool[..rng.gen_range(1..=pool.len().min(3))].to_vec());
    }
    let target = Arc::new(SimplicialComplex::closure(&faces));
    let map = map.iter().map(|&w| target.index_of(&targets[w]).unwrap()).collect();
    SimplicialMap::new(source, target, map).unwrap()
}

/// Integer combination of random faces of `c`, all of dimension `k` when given.
pub fn random_chain<R: Rng>(rng: &mut R, c: &SimplicialComplex, k: Option<isize>) -> Chain {
    let faces = match k {
        Some(k) => c.faces(k),
        None => c.all_faces(),
    };
    if faces.is_empty() {
        return Chain::zero();
    }
    let terms: Vec<(Vec<String>, BigInt)> = (0..rng.gen_range(1..=4))
        .map(|_| {
            let mut face = c.names_of(faces.choose(rng).unwrap());
            face.shuffle(rng);
            (face, BigInt::from(rng.gen_range(-5i64..=5)))
        })
        .collect();
    Chain::from_terms(terms).unwrap()
}

pub fn complex(faces: &[&[&str]]) -> SimplicialComplex {
    SimplicialComplex::closure(
        &faces
            .iter()
            .map(|f| f.iter().map(|v| v.to_string()).collect())
            .collect::<Vec<Vec<String>>>(),
    )
}

/// The 6-vertex triangulation of the projective plane.
pub fn projective_plane() -> SimplicialComplex {
    complex(&[
        &["1", "2", "3"], &["1", "3", "4"], &["1", "4", "5"], &["1", "5", "6"], &["1", "2", "6"],
        &["2", "3", "5"], &["3", "4", "6"], &["2", "4", "5"], &["3", "5", "6"], &["2", "4", "6"],
    ])
}
