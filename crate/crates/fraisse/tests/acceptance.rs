//! Acceptance criteria 1-10. Each test writes one `PASS`/`FAIL` line straight
//! to stderr (bypassing the harness capture) and then asserts.

mod common;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use fraisse::engine::{
    back_and_forth, build_generic_tower, clique_fiber_subtower, enumerate_graphs, enumerate_morphisms,
    extension_witness, open_tower_map, triangle_persistence, verify_openness_claim, EnumerationBudget,
    Tower, DEMAND_SCAN_LIMIT,
};
use fraisse::io::{self, TowerDoc};
use fraisse::ops::{
    amalgamate, cylinder_extension, is_exact, is_structurally_exact, mapping_cylinder, Side,
};
use fraisse::simplicial::{
    amalgamate_acyclic, boundary, chain_map, in_class_acyclic, is_n_acyclic, is_n_acyclic_map,
    reduced_homology, SimplicialComplex, SimplicialMap,
};
use fraisse::{Graph, GraphMorphism};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;

const CRITERION_1_PAIRS: usize = 250;
const CRITERION_1_TIME: Duration = Duration::from_secs(300);
const CRITERION_2_SAMPLES_AT_5: usize = 3000;
const CRITERION_4_TRIPLES: usize = 150;
const TOWER_DEPTH: usize = 10;
const TOWER_SIZE_CAP: usize = 60;
const CRITERION_5_TIME: Duration = Duration::from_secs(600);
const CRITERION_7_TARGETS: usize = 6;
const CRITERION_8_INSTANCES: usize = 1000;
const CRITERION_9_SAMPLES: usize = 2000;
const CRITERION_10_PAIRS: usize = 60;
const CRITERION_10_TIME: Duration = Duration::from_secs(600);

fn report(id: u32, title: &str, ok: bool, detail: String) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    let line = format!("{verdict} criterion {id:>2} [{title}]: {detail}\n");
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "criterion {id} failed: {detail}");
}

// ---------------------------------------------------------------- graph oracles

/// Path-connectivity by breadth-first search over `has_edge`.
fn bfs_connected(g: &Graph, members: &[usize]) -> bool {
    let Some(&start) = members.first() else {
        return false;
    };
    let inside: HashSet<usize> = members.iter().copied().collect();
    let mut seen = HashSet::from([start]);
    let mut queue = vec![start];
    while let Some(u) = queue.pop() {
        for &v in members {
            if !seen.contains(&v) && g.has_edge(u, v) && inside.contains(&v) {
                seen.insert(v);
                queue.push(v);
            }
        }
    }
    seen.len() == inside.len()
}

/// Every cover `X = U1 ∪ U2` by nonempty parts has related points across.
fn cover_connected(g: &Graph, members: &[usize]) -> bool {
    let k = members.len();
    let total = 3usize.pow(k as u32);
    (0..total).all(|code| {
        // digit 0: only U1, 1: only U2, 2: both
        let mut c = code;
        let mut u1 = Vec::new();
        let mut u2 = Vec::new();
        for &v in members {
            match c % 3 {
                0 => u1.push(v),
                1 => u2.push(v),
                _ => {
                    u1.push(v);
                    u2.push(v);
                }
            }
            c /= 3;
        }
        if u1.is_empty() || u2.is_empty() {
            return true;
        }
        u1.iter().any(|&x| u2.iter().any(|&y| x == y || g.has_edge(x, y)))
    })
}

fn oracle_is_epi(f: &GraphMorphism) -> bool {
    let (b, a) = (f.source(), f.target());
    let edges_ok = b
        .edges()
        .iter()
        .all(|&(u, v)| f.apply(u) == f.apply(v) || a.has_edge(f.apply(u), f.apply(v)));
    let hit: HashSet<usize> = (0..b.len()).map(|v| f.apply(v)).collect();
    let covered: HashSet<(usize, usize)> = b
        .edges()
        .iter()
        .map(|&(u, v)| {
            let (x, y) = (f.apply(u), f.apply(v));
            (x.min(y), x.max(y))
        })
        .collect();
    edges_ok && hit.len() == a.len() && a.edges().iter().all(|e| covered.contains(e))
}

/// Preimage of every nonempty connected subset is connected.
fn oracle_preimages_connected(f: &GraphMorphism) -> bool {
    let (b, a) = (f.source(), f.target());
    (1u32..1 << a.len()).all(|bits| {
        let s: Vec<usize> = (0..a.len()).filter(|&v| bits >> v & 1 == 1).collect();
        if !bfs_connected(a, &s) {
            return true;
        }
        let pre: Vec<usize> = (0..b.len()).filter(|&v| bits >> f.apply(v) & 1 == 1).collect();
        bfs_connected(b, &pre)
    })
}

fn labeled_graphs(prefix: &str, n: usize) -> Vec<Arc<Graph>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let names: Vec<String> = (0..n).map(|i| format!("{prefix}{i}")).collect();
    (0u32..1 << pairs.len())
        .map(|bits| {
            let edges: Vec<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| bits >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            Arc::new(Graph::from_index_edges(names.clone(), edges).unwrap())
        })
        .collect()
}

fn all_maps(from: usize, to: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = (to as u64).pow(from as u32);
    (0..total).map(move |mut code| {
        (0..from)
            .map(|_| {
                let x = (code % to as u64) as usize;
                code /= to as u64;
                x
            })
            .collect()
    })
}

// ------------------------------------------------------------------ criterion 1

#[test]
fn criterion_01_amalgamation() {
    let start = Instant::now();
    let mut rng = common::rng(101);
    let mut failures = Vec::new();
    let mut apex_max = 0;
    for trial in 0..CRITERION_1_PAIRS {
        let (f, g) = common::random_cospan(&mut rng, 6);
        let sq = amalgamate(&f, &g).unwrap();
        apex_max = apex_max.max(sq.apex().len());
        let commutes = (0..sq.apex().len()).all(|d| f.apply(sq.f_prime.apply(d)) == g.apply(sq.g_prime.apply(d)));
        let checks = [
            ("commutes", sq.commutes() && commutes),
            ("f' connected epi", sq.f_prime.is_connected_epi()),
            ("g' connected epi", sq.g_prime.is_connected_epi()),
            ("apex connected", bfs_connected(sq.apex(), &(0..sq.apex().len()).collect::<Vec<_>>())),
            ("exact", is_exact(&sq)),
            ("structurally exact over f", is_structurally_exact(&sq, Side::F).unwrap()),
            ("structurally exact over g", is_structurally_exact(&sq, Side::G).unwrap()),
        ];
        if let Some((what, _)) = checks.iter().find(|c| !c.1) {
            failures.push(format!("pair {trial}: {what}"));
        }
    }
    let elapsed = start.elapsed();
    let ok = failures.is_empty() && elapsed <= CRITERION_1_TIME;
    report(
        1,
        "amalgamation",
        ok,
        format!(
            "{CRITERION_1_PAIRS} random pairs (graphs <= 6 vertices, apex <= {apex_max}), {} failures {:?}, {:.1?} (budget {:?})",
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>(),
            elapsed,
            CRITERION_1_TIME
        ),
    );
}

// ------------------------------------------------------------------ criterion 2

#[test]
fn criterion_02_fiber_criterion() {
    let mut checked = 0usize;
    let mut positive = 0usize;
    let mut discrepancies = Vec::new();
    let mut compare = |f: &GraphMorphism, checked: &mut usize| {
        if !oracle_is_epi(f) {
            return;
        }
        *checked += 1;
        let lib = f.is_connected_epi() && f.is_epimorphism().unwrap();
        positive += usize::from(lib);
        if lib != oracle_preimages_connected(f) {
            discrepancies.push(format!("{f:?}"));
        }
    };
    let connected = |prefix: &str, n: usize| -> Vec<Arc<Graph>> {
        labeled_graphs(prefix, n)
            .into_iter()
            .filter(|g| bfs_connected(g, &(0..n).collect::<Vec<_>>()))
            .collect()
    };
    for nb in 1..=4 {
        for b in connected("b", nb) {
            for na in 1..=nb {
                for a in connected("a", na) {
                    for map in all_maps(nb, na) {
                        if let Ok(f) = GraphMorphism::new(b.clone(), a.clone(), map) {
                            compare(&f, &mut checked);
                        }
                    }
                }
            }
        }
    }
    let exhaustive = checked;
    let mut rng = common::rng(202);
    let mut sampled = 0;
    while sampled < CRITERION_2_SAMPLES_AT_5 {
        let na = rng.gen_range(1..=5);
        let a = Arc::new(common::connected_graph(&mut rng, "a", na, 0.4));
        let connected_fibers = rng.gen_bool(0.5);
        let f = common::blow_up(&mut rng, &a, "b", 5, connected_fibers);
        if !bfs_connected(f.source(), &(0..5).collect::<Vec<_>>()) {
            continue;
        }
        sampled += 1;
        compare(&f, &mut checked);
    }
    report(
        2,
        "fiber criterion",
        discrepancies.is_empty(),
        format!(
            "{exhaustive} epimorphisms exhaustively (<= 4 vertices) + {} sampled at 5 vertices, {positive} connected, {} discrepancies",
            checked - exhaustive,
            discrepancies.len()
        ),
    );
}

// ------------------------------------------------------------------ criterion 3

#[test]
fn criterion_03_connected_subsets() {
    let mut subsets = 0usize;
    let mut discrepancies = Vec::new();
    for n in 0..=5 {
        for g in labeled_graphs("v", n) {
            for bits in 1u32..1 << n {
                let members: Vec<usize> = (0..n).filter(|&v| bits >> v & 1 == 1).collect();
                subsets += 1;
                if g.is_connected_set(&members) != cover_connected(&g, &members) {
                    discrepancies.push((g.edges(), members));
                }
            }
        }
    }
    report(
        3,
        "connected subsets",
        discrepancies.is_empty(),
        format!(
            "{subsets} nonempty subsets of all labeled graphs <= 5 vertices, {} discrepancies",
            discrepancies.len()
        ),
    );
}

// ------------------------------------------------------------------ criterion 4

#[test]
fn criterion_04_cylinders() {
    let mut rng = common::rng(404);
    let mut failures = Vec::new();
    for trial in 0..CRITERION_4_TRIPLES {
        let na = rng.gen_range(1..=4);
        let a = Arc::new(common::connected_graph(&mut rng, "a", na, 0.4));
        let nb = rng.gen_range(na..=5);
        let g = common::random_ce(&mut rng, &a, "b", nb);
        let nx = rng.gen_range(1..=5);
        let beta = common::random_homomorphism_into(&mut rng, g.source(), nx);
        let alpha = g.compose(&beta).unwrap();
        let over_a = mapping_cylinder(&alpha).unwrap();
        let over_b = mapping_cylinder(&beta).unwrap();
        let lifted = cylinder_extension(&g, &beta, &alpha).unwrap();
        let x_part = |c: &fraisse::ops::CylinderResult| -> BTreeSet<usize> {
            c.include_x.map().iter().copied().collect()
        };
        let (xa, xb) = (x_part(&over_a), x_part(&over_b));
        let preimage: BTreeSet<usize> = (0..lifted.source().len()).filter(|&v| xa.contains(&lifted.apply(v))).collect();
        let checks = [
            ("C_alpha connected", over_a.cylinder.is_connected()),
            ("r_alpha connected epi", over_a.retraction.is_connected_epi()),
            ("r_beta connected epi", over_b.retraction.is_connected_epi()),
            (
                "r_alpha . g* = g . r_beta",
                over_a.retraction.compose(&lifted).unwrap() == g.compose(&over_b.retraction).unwrap(),
            ),
            ("g*^-1(X) = X", preimage == xb),
            ("g* fixes X", lifted.compose(&over_b.include_x).unwrap().map() == over_a.include_x.map()),
        ];
        if let Some((what, _)) = checks.iter().find(|c| !c.1) {
            failures.push(format!("triple {trial}: {what}"));
        }
    }
    report(
        4,
        "cylinders",
        failures.is_empty(),
        format!(
            "{CRITERION_4_TRIPLES} random (X, A, alpha) <= 5 vertices, {} failures {:?}",
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>()
        ),
    );
}

// ----------------------------------------------------------------- criteria 5-7

fn tower(seed: u64) -> Tower {
    let budget = EnumerationBudget::new(3, TOWER_DEPTH, seed).with_size_cap(TOWER_SIZE_CAP);
    build_generic_tower(&budget).unwrap()
}

/// Connected epimorphisms `L_j -> B` for every level whose maps can be scanned.
fn small_demands(t: &Tower, b: &Arc<Graph>, up_to: usize) -> Vec<(usize, GraphMorphism)> {
    let mut out = Vec::new();
    for j in 0..=up_to {
        let level = &t.levels[j];
        if (b.len() as u64).checked_pow(level.len() as u32).map_or(true, |n| n > DEMAND_SCAN_LIMIT) {
            continue;
        }
        for map in all_maps(level.len(), b.len()) {
            let f = GraphMorphism::new(level.clone(), b.clone(), map);
            if let Ok(f) = f {
                if f.is_connected_epi() {
                    out.push((j, f));
                }
            }
        }
    }
    out
}

#[test]
fn criterion_05_generic_tower() {
    let start = Instant::now();
    let t = tower(1);
    let built = start.elapsed();
    let budget = EnumerationBudget::new(3, TOWER_DEPTH, 1);

    let stages_ok = t.log.iter().all(|s| !s.truncated && s.obligations.iter().all(|o| o.witness.is_some()));
    let obligations: usize = t.log.iter().map(|s| s.obligations.len()).sum();
    let reloaded = io::parse::<TowerDoc>(&io::to_string(&TowerDoc::from_tower(&t), false))
        .and_then(|doc| doc.to_tower());
    let reverified = matches!(&reloaded, Ok(r) if r.levels == t.levels && r.bonds == t.bonds && r.log_is_sound());
    let part_a = stages_ok && t.is_valid() && t.log_is_sound() && reverified;

    let morphisms = enumerate_morphisms(&budget).unwrap();
    let mut witnesses = 0usize;
    let mut missing = Vec::new();
    for (idx, g) in morphisms.iter().enumerate() {
        let Some(stage) = t.log.iter().find(|s| s.scheduled == *g) else {
            missing.push(format!("morphism {idx} never scheduled"));
            continue;
        };
        let demands = small_demands(&t, g.target(), stage.level - 1);
        for n in 0..stage.level {
            for (j, f0) in demands.iter().filter(|(j, _)| *j <= n) {
                let f = f0.compose(&t.bond(n, *j).unwrap()).unwrap();
                match extension_witness(&t, n, &f, g) {
                    Ok(w) if g.compose(&w.map).unwrap() == f.compose(&t.bond(w.level, n).unwrap()).unwrap() => {
                        witnesses += 1
                    }
                    other => missing.push(format!("g{idx} from level {n} via {j}: {:?}", other.err())),
                }
            }
        }
    }
    let part_b = missing.is_empty() && witnesses > 0;

    let mut persistence = Vec::new();
    for n in 0..=2 {
        let row: Vec<usize> = (n..=TOWER_DEPTH).map(|m| triangle_persistence(&t, n, m).unwrap()).collect();
        persistence.push(row);
    }
    let part_c = persistence.iter().all(|row| row.contains(&0));
    let elapsed = start.elapsed();
    report(
        5,
        "generic tower",
        part_a && part_b && part_c && elapsed <= CRITERION_5_TIME,
        format!(
            "depth {TOWER_DEPTH}, cap {TOWER_SIZE_CAP}, sizes {:?}, built in {built:.1?}; \
             (a) {obligations} obligations discharged={stages_ok} sound={} reloaded={reverified}; \
             (b) {witnesses} witnesses, {} missing {:?}; (c) persistence {persistence:?}; {elapsed:.1?} (budget {:?})",
            t.levels.iter().map(|l| l.len()).collect::<Vec<_>>(),
            t.log_is_sound(),
            missing.len(),
            missing.iter().take(3).collect::<Vec<_>>(),
            CRITERION_5_TIME
        ),
    );
}

#[test]
fn criterion_06_back_and_forth() {
    let (first, second) = (tower(1), tower(2));
    let result = back_and_forth(&first, &second, 2);
    let (ok, detail) = match result {
        Ok(i) => {
            let k = &i.first_anchors;
            let l = &i.second_anchors;
            let identities = (0..i.maps.len() - 1).all(|j| {
                let bond = if j % 2 == 0 {
                    first.bond(k[j / 2 + 1], k[j / 2])
                } else {
                    second.bond(l[j / 2 + 1], l[j / 2])
                };
                i.maps[j].compose(&i.maps[j + 1]).unwrap() == bond.unwrap()
            });
            let members = i.maps.iter().all(GraphMorphism::is_connected_epi);
            let ok = i.maps.len() == 4 && identities && members && i.verify(&first, &second);
            (
                ok,
                format!(
                    "{} maps, anchors {k:?} / {l:?}, composition identities {identities}, all in class {members}",
                    i.maps.len()
                ),
            )
        }
        Err(p) => (false, format!("stopped after {} maps: {}", p.partial.maps.len(), p.error)),
    };
    report(6, "back-and-forth", ok, format!("seeds 1 and 2, rounds 2: {detail}"));
}

#[test]
fn criterion_07_open_tower_map() {
    let source = tower(1);
    let budget = EnumerationBudget::new(3, 2, 7);
    let graphs = enumerate_graphs(&budget).unwrap();
    let morphisms = enumerate_morphisms(&budget).unwrap();
    let mut rng = common::rng(707);
    let mut failures = Vec::new();
    let mut threads = 0usize;
    for trial in 0..CRITERION_7_TARGETS {
        let base = graphs[rng.gen_range(0..graphs.len())].clone();
        let mut bonds: Vec<GraphMorphism> = Vec::new();
        let mut top = base.clone();
        for _ in 0..2 {
            let onto: Vec<&GraphMorphism> = morphisms.iter().filter(|m| **m.target() == *top).collect();
            let m = onto[rng.gen_range(0..onto.len())].clone();
            top = m.source().clone();
            bonds.push(m);
        }
        let target = Tower::from_bonds(base, bonds).unwrap();
        let map = match open_tower_map(&source, &target) {
            Ok(m) => m,
            Err(p) => {
                failures.push(format!("target {trial}: {}", p.error));
                continue;
            }
        };
        if !map.is_coherent(&source, &target) {
            failures.push(format!("target {trial}: not coherent"));
        }
        for i in 0..2 {
            if !verify_openness_claim(&source, &target, &map, i) {
                failures.push(format!("target {trial}: openness claim {i}"));
            }
        }
        let top_level = &target.levels[2];
        let mut cliques: Vec<Vec<usize>> = (0..top_level.len()).map(|v| vec![v]).collect();
        cliques.extend(top_level.edges().into_iter().map(|(u, v)| vec![u, v]));
        for q in cliques {
            let mut thread = vec![q];
            for i in (0..2).rev() {
                let image: BTreeSet<usize> = thread[0].iter().map(|&v| target.bonds[i].apply(v)).collect();
                thread.insert(0, image.into_iter().collect());
            }
            threads += 1;
            match clique_fiber_subtower(&source, &target, &map, &thread) {
                Ok(sub) if sub.bonds.iter().all(GraphMorphism::is_connected_epi) && sub.levels[0].is_connected() => {}
                Ok(_) => failures.push(format!("target {trial}: thread {thread:?} leaves the class")),
                Err(e) => failures.push(format!("target {trial}: thread {thread:?}: {e}")),
            }
        }
    }
    report(
        7,
        "open tower map",
        failures.is_empty(),
        format!(
            "{CRITERION_7_TARGETS} random 3-level targets, {threads} clique threads, {} failures {:?}",
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>()
        ),
    );
}

// ------------------------------------------------------------ homology oracle

type Face = Vec<String>;

/// All faces, the empty one included, as subsets of the given generators.
fn brute_faces(generators: &[Vec<String>]) -> BTreeSet<Face> {
    let mut out = BTreeSet::new();
    for g in generators {
        let mut g = g.clone();
        g.sort();
        g.dedup();
        for bits in 0u32..1 << g.len() {
            out.insert((0..g.len()).filter(|&i| bits >> i & 1 == 1).map(|i| g[i].clone()).collect());
        }
    }
    out
}

/// Augmented boundary matrix from `k`-faces to `(k-1)`-faces.
fn brute_boundary(faces: &BTreeSet<Face>, k: isize) -> Vec<Vec<i128>> {
    let of_dim = |d: isize| -> Vec<&Face> { faces.iter().filter(|f| f.len() as isize - 1 == d).collect() };
    let rows = of_dim(k - 1);
    let cols = of_dim(k);
    let index: HashMap<&Face, usize> = rows.iter().enumerate().map(|(i, f)| (*f, i)).collect();
    let mut m = vec![vec![0i128; cols.len()]; rows.len()];
    for (j, face) in cols.iter().enumerate() {
        for i in 0..face.len() {
            let mut smaller = (*face).clone();
            smaller.remove(i);
            m[index[&smaller]][j] += if i % 2 == 0 { 1 } else { -1 };
        }
    }
    m
}

/// Fraction-free elimination: rank over the rationals and, for a square input,
/// the determinant.
fn bareiss(mut m: Vec<Vec<i128>>) -> (usize, i128) {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    let mut prev = 1i128;
    let mut sign = 1i128;
    for c in 0..cols {
        let Some(p) = (rank..rows).find(|&r| m[r][c] != 0) else {
            continue;
        };
        if p != rank {
            m.swap(p, rank);
            sign = -sign;
        }
        for r in rank + 1..rows {
            for cc in c + 1..cols {
                m[r][cc] = (m[r][cc] * m[rank][c] - m[r][c] * m[rank][cc]) / prev;
            }
            m[r][c] = 0;
        }
        prev = m[rank][c];
        rank += 1;
    }
    let det = if rows == cols && rank == rows { sign * prev } else { 0 };
    (rank, det)
}

fn rank_mod(m: &[Vec<i128>], p: i128) -> usize {
    let mut m: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|x| x.rem_euclid(p)).collect()).collect();
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let inverse = |a: i128| (1..p).find(|b| a * b % p == 1).unwrap();
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(piv, rank);
        let inv = inverse(m[rank][c]);
        for x in m[rank].iter_mut() {
            *x = *x * inv % p;
        }
        for r in 0..rows {
            if r != rank && m[r][c] != 0 {
                let factor = m[r][c];
                for cc in 0..cols {
                    m[r][cc] = (m[r][cc] - factor * m[rank][cc]).rem_euclid(p);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Greatest common divisor of all `r x r` minors.
fn minors_gcd(m: &[Vec<i128>], r: usize) -> i128 {
    if r == 0 {
        return 1;
    }
    let cols = m[0].len();
    let mut d = 0;
    for rs in subsets(m.len(), r) {
        for cs in subsets(cols, r) {
            let minor: Vec<Vec<i128>> = rs.iter().map(|&i| cs.iter().map(|&j| m[i][j]).collect()).collect();
            d = gcd(d, bareiss(minor).1);
            if d == 1 {
                return 1;
            }
        }
    }
    d
}

const PRIMES: [i128; 4] = [2, 3, 5, 7];

/// Reduced homology in degree `k`: the rank, the product of the torsion
/// coefficients and, per small prime, how many of them it divides.
#[derive(Debug, PartialEq, Eq)]
struct OracleHomology {
    rank: usize,
    torsion_product: i128,
    divisible_by: Vec<usize>,
}

fn oracle_homology(faces: &BTreeSet<Face>, k: isize) -> OracleHomology {
    let dim_k = faces.iter().filter(|f| f.len() as isize - 1 == k).count();
    let down = brute_boundary(faces, k);
    let up = brute_boundary(faces, k + 1);
    let rank_down = if k >= 0 { bareiss(down).0 } else { 0 };
    let rank_up = bareiss(up.clone()).0;
    OracleHomology {
        rank: dim_k - rank_down - rank_up,
        torsion_product: if rank_up == 0 { 1 } else { minors_gcd(&up, rank_up) },
        divisible_by: PRIMES.iter().map(|&p| if rank_up == 0 { 0 } else { rank_up - rank_mod(&up, p) }).collect(),
    }
}

fn library_homology(c: &SimplicialComplex, k: isize) -> OracleHomology {
    let h = reduced_homology(c, k).unwrap();
    let product: BigInt = h.torsion.iter().fold(BigInt::one(), |acc, t| acc * t);
    OracleHomology {
        rank: h.rank,
        torsion_product: i128::try_from(product).unwrap(),
        divisible_by: PRIMES
            .iter()
            .map(|&p| h.torsion.iter().filter(|t| (*t % BigInt::from(p)).is_zero()).count())
            .collect(),
    }
}

fn generators(c: &SimplicialComplex) -> Vec<Vec<String>> {
    c.maximal_faces_named()
}

#[test]
fn criterion_08_homology_oracle() {
    let named: Vec<(&str, Vec<Vec<String>>)> = vec![
        ("hollow triangle", strs(&[&["a", "b"], &["b", "c"], &["a", "c"]])),
        ("boundary of the 3-simplex", strs(&[&["a", "b", "c"], &["a", "b", "d"], &["a", "c", "d"], &["b", "c", "d"]])),
        ("point", strs(&[&["a"]])),
        ("solid edge", strs(&[&["a", "b"]])),
        ("solid triangle", strs(&[&["a", "b", "c"]])),
        ("solid tetrahedron", strs(&[&["a", "b", "c", "d"]])),
        ("solid 4-simplex", strs(&[&["a", "b", "c", "d", "e"]])),
        ("projective plane", generators(&common::projective_plane())),
    ];
    let mut mismatches = Vec::new();
    let mut table = HashMap::new();
    for (name, gens) in &named {
        let faces = brute_faces(gens);
        let c = SimplicialComplex::closure(gens);
        for k in -1..=3 {
            let oracle = oracle_homology(&faces, k);
            if library_homology(&c, k) != oracle {
                mismatches.push(format!("{name} degree {k}"));
            }
            table.insert((*name, k), oracle);
        }
    }
    let rank = |name: &str, k: isize| table[&(name, k)].rank;
    let zero = |name: &str| (-1..=3).all(|k| table[&(name, k)] == OracleHomology { rank: 0, torsion_product: 1, divisible_by: vec![0; 4] });
    let rp2 = common::projective_plane();
    let rp2_faces = brute_faces(&generators(&rp2));
    let d2 = brute_boundary(&rp2_faces, 2);
    let rp2_torsion = reduced_homology(&rp2, 1).unwrap().torsion;
    let expected = [
        ("hollow triangle H1 rank 1", rank("hollow triangle", 1) == 1 && table[&("hollow triangle", 1)].torsion_product == 1),
        ("sphere H2 rank 1", rank("boundary of the 3-simplex", 2) == 1),
        ("solid simplices vanish", ["point", "solid edge", "solid triangle", "solid tetrahedron", "solid 4-simplex"].iter().all(|n| zero(n))),
        (
            "projective plane torsion {2}",
            bareiss(d2.clone()).0 == 10
                && rank_mod(&d2, 2) == 9
                && minors_gcd(&d2, 10) == 2
                && rank("projective plane", 1) == 0
                && rp2_torsion == vec![BigInt::from(2)],
        ),
    ];
    for (what, ok) in &expected {
        if !ok {
            mismatches.push(what.to_string());
        }
    }

    let mut rng = common::rng(808);
    for i in 0..100 {
        let n = rng.gen_range(1..=6);
        let c = common::random_complex(&mut rng, n, 3);
        let faces = brute_faces(&generators(&c));
        for k in -1..=3 {
            if library_homology(&c, k) != oracle_homology(&faces, k) {
                mismatches.push(format!("random complex {i} degree {k}"));
            }
        }
    }

    let mut law_failures = 0;
    for _ in 0..CRITERION_8_INSTANCES {
        let n = rng.gen_range(1..=7);
        let c = Arc::new(common::random_complex(&mut rng, n, 4));
        let z = common::random_chain(&mut rng, &c, None);
        if !boundary(&boundary(&z)).is_zero() {
            law_failures += 1;
        }
        let width = rng.gen_range(1..=5);
        let f = common::random_map(&mut rng, c.clone(), width);
        let lhs = chain_map(&f, &boundary(&z)).unwrap();
        let rhs = boundary(&chain_map(&f, &z).unwrap());
        if lhs != rhs {
            law_failures += 1;
        }
    }
    report(
        8,
        "homology oracle",
        mismatches.is_empty() && law_failures == 0,
        format!(
            "{} named complexes + 100 random vs. elimination/minor oracle, {} mismatches {:?}; \
             boundary-squared and naturality on {CRITERION_8_INSTANCES} instances, {law_failures} failures",
            named.len(),
            mismatches.len(),
            mismatches.iter().take(3).collect::<Vec<_>>()
        ),
    );
}

fn strs(faces: &[&[&str]]) -> Vec<Vec<String>> {
    faces.iter().map(|f| f.iter().map(|v| v.to_string()).collect()).collect()
}

// ------------------------------------------------------------------ criterion 9

/// Downward-closed face sets (bit `s` set when the vertex mask `s` is a face)
/// on exactly `n` vertices, every vertex present.
fn complexes_on(n: usize) -> Vec<u64> {
    let masks: Vec<u32> = (1u32..1 << n).filter(|m| m.count_ones() >= 2).collect();
    let base: u64 = 1 | (0..n).map(|v| 1u64 << (1u32 << v)).fold(0, |a, b| a | b);
    (0u64..1 << masks.len())
        .map(|bits| {
            masks
                .iter()
                .enumerate()
                .filter(|(i, _)| bits >> i & 1 == 1)
                .fold(base, |acc, (_, &m)| acc | 1 << m)
        })
        .filter(|&faces| downward_closed(faces))
        .collect()
}

fn downward_closed(faces: u64) -> bool {
    let mut rest = faces;
    while rest != 0 {
        let s = rest.trailing_zeros();
        rest &= rest - 1;
        let mut vs = s;
        while vs != 0 {
            let v = vs.trailing_zeros();
            vs &= vs - 1;
            if faces >> (s & !(1 << v)) & 1 == 0 {
                return false;
            }
        }
    }
    true
}

/// Subcomplexes of `faces` that contain the empty face.
fn subcomplexes(faces: u64) -> Vec<u64> {
    let nonempty: Vec<u32> = (1..64u32).filter(|&s| faces >> s & 1 == 1).collect();
    (0u64..1 << nonempty.len())
        .map(|bits| {
            nonempty
                .iter()
                .enumerate()
                .filter(|(i, _)| bits >> i & 1 == 1)
                .fold(1u64, |acc, (_, &s)| acc | 1 << s)
        })
        .filter(|&sub| downward_closed(sub))
        .collect()
}

fn to_complex(faces: u64) -> SimplicialComplex {
    let list: Vec<Vec<String>> = (0..64u32)
        .filter(|&s| faces >> s & 1 == 1)
        .map(|s| (0..6).filter(|v| s >> v & 1 == 1).map(|v| format!("v{v}")).collect())
        .collect();
    SimplicialComplex::closure(&list)
}

fn image_mask(s: u32, map: &[usize]) -> u32 {
    (0..map.len()).filter(|&v| s >> v & 1 == 1).fold(0, |acc, v| acc | 1 << map[v])
}

fn is_simplicial(source: u64, target: u64, map: &[usize]) -> bool {
    (0..64u32).filter(|&s| source >> s & 1 == 1).all(|s| target >> image_mask(s, map) & 1 == 1)
}

struct AcyclicCache(HashMap<(u64, isize), bool>);

impl AcyclicCache {
    fn get(&mut self, faces: u64, m: isize) -> bool {
        *self.0.entry((faces, m)).or_insert_with(|| is_n_acyclic(&to_complex(faces), m))
    }
}

/// Preimage of every `m`-acyclic subcomplex is `m`-acyclic.
fn definition_holds(source: u64, map: &[usize], subs: &[u64], m: isize, cache: &mut AcyclicCache) -> bool {
    subs.iter().all(|&a0| {
        if !cache.get(a0, m) {
            return true;
        }
        let pre = (0..64u32)
            .filter(|&s| source >> s & 1 == 1 && a0 >> image_mask(s, map) & 1 == 1)
            .fold(0u64, |acc, s| acc | 1 << s);
        cache.get(pre, m)
    })
}

fn library_map(source: u64, target: u64, map: &[usize]) -> SimplicialMap {
    let s = Arc::new(to_complex(source));
    let t = Arc::new(to_complex(target));
    SimplicialMap::new(s, t, map.to_vec()).unwrap()
}

#[test]
fn criterion_09_simplex_preimage_criterion() {
    let mut cache = AcyclicCache(HashMap::new());
    let targets: Vec<(usize, u64, Vec<u64>)> = (1..=4)
        .flat_map(|t| complexes_on(t).into_iter().map(move |c| (t, c)))
        .map(|(t, c)| (t, c, subcomplexes(c)))
        .collect();
    let sources: Vec<(usize, u64)> = (1..=3).flat_map(|k| complexes_on(k).into_iter().map(move |c| (k, c))).collect();
    let mut instances = 0usize;
    let mut positive = 0usize;
    let mut discrepancies = Vec::new();
    let mut check = |k: usize, source: u64, target: u64, map: &[usize], subs: &[u64], cache: &mut AcyclicCache, instances: &mut usize| {
        let f = library_map(source, target, map);
        for m in -1..=2 {
            *instances += 1;
            let criterion = is_n_acyclic_map(&f, m);
            positive += usize::from(criterion);
            if criterion != definition_holds(source, map, subs, m, cache) {
                discrepancies.push(format!("source {source:#x} on {k} vertices, target {target:#x}, map {map:?}, m = {m}"));
            }
        }
    };
    for (t, target, subs) in &targets {
        for &(k, source) in &sources {
            for map in all_maps(k, *t) {
                if is_simplicial(source, *target, &map) {
                    check(k, source, *target, &map, subs, &mut cache, &mut instances);
                }
            }
        }
    }
    let exhaustive = instances;
    let mut rng = common::rng(909);
    let mut sampled = 0;
    while sampled < CRITERION_9_SAMPLES {
        let (t, target, subs) = &targets[rng.gen_range(0..targets.len())];
        let k = rng.gen_range(4..=5);
        let c = common::random_complex(&mut rng, k, 3);
        let source = c.all_faces().iter().fold(0u64, |acc, f| acc | 1 << f.iter().fold(0u32, |m, &v| m | 1 << v));
        let map: Vec<usize> = (0..k).map(|_| rng.gen_range(0..*t)).collect();
        if !is_simplicial(source, *target, &map) {
            continue;
        }
        sampled += 1;
        check(k, source, *target, &map, subs, &mut cache, &mut instances);
    }
    report(
        9,
        "simplex-preimage criterion",
        discrepancies.is_empty(),
        format!(
            "{} targets <= 4 vertices, {exhaustive} (map, m) instances from all sources <= 3 vertices + {} sampled from 4-5 vertices, m in -1..=2, {positive} acyclic, {} discrepancies {:?}",
            targets.len(),
            instances - exhaustive,
            discrepancies.len(),
            discrepancies.iter().take(3).collect::<Vec<_>>()
        ),
    );
}

// ----------------------------------------------------------------- criterion 10

fn named_map(source: &SimplicialComplex, target: &Arc<SimplicialComplex>, pairs: &[(&str, &str)]) -> SimplicialMap {
    let assignment = pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    SimplicialMap::from_names(Arc::new(source.clone()), target.clone(), &assignment).unwrap()
}

/// Pairs of 1-acyclic maps between 2-dimensional 1-acyclic complexes.
fn handcrafted_pairs() -> Vec<(&'static str, SimplicialMap, SimplicialMap)> {
    let disk = Arc::new(common::complex(&[&["a", "b", "c"]]));
    // cone over the hollow triangle abc with apex o
    let cone = common::complex(&[&["o", "a", "b"], &["o", "b", "c"], &["o", "a", "c"]]);
    let to_a = named_map(&cone, &disk, &[("o", "a"), ("a", "a"), ("b", "b"), ("c", "c")]);
    let to_b = named_map(&cone, &disk, &[("o", "b"), ("a", "a"), ("b", "b"), ("c", "c")]);
    let id_disk = SimplicialMap::identity(disk.clone());

    let edge = Arc::new(common::complex(&[&["x", "y"]]));
    let solid = common::complex(&[&["a", "b", "c"]]);
    let squash_ab = named_map(&solid, &edge, &[("a", "x"), ("b", "x"), ("c", "y")]);
    let squash_c = named_map(&solid, &edge, &[("a", "x"), ("b", "y"), ("c", "y")]);
    let cone_to_edge = named_map(&cone, &edge, &[("o", "x"), ("a", "x"), ("b", "y"), ("c", "y")]);

    let sphere = Arc::new(common::complex(&[&["a", "b", "c"], &["a", "b", "d"], &["a", "c", "d"], &["b", "c", "d"]]));
    // stellar subdivision of one sphere face, new vertex sent to a corner
    let stellar_abc = common::complex(&[
        &["o", "a", "b"], &["o", "b", "c"], &["o", "a", "c"], &["a", "b", "d"], &["a", "c", "d"], &["b", "c", "d"],
    ]);
    let stellar_bcd = common::complex(&[
        &["a", "b", "c"], &["a", "b", "d"], &["a", "c", "d"], &["p", "b", "c"], &["p", "c", "d"], &["p", "b", "d"],
    ]);
    let collapse_abc = named_map(&stellar_abc, &sphere, &[("o", "a"), ("a", "a"), ("b", "b"), ("c", "c"), ("d", "d")]);
    let collapse_bcd = named_map(&stellar_bcd, &sphere, &[("p", "d"), ("a", "a"), ("b", "b"), ("c", "c"), ("d", "d")]);
    let id_sphere = SimplicialMap::identity(sphere.clone());

    vec![
        ("cone collapse with identity on the triangle", to_a.clone(), id_disk.clone()),
        ("two cone collapses on the triangle", to_a, to_b),
        ("two squashes of a triangle onto an edge", squash_ab, squash_c),
        ("cone and triangle onto an edge", cone_to_edge, named_map(&solid, &edge, &[("a", "x"), ("b", "y"), ("c", "y")])),
        ("stellar collapse with identity on the sphere", collapse_abc.clone(), id_sphere),
        ("two stellar collapses on the sphere", collapse_abc, collapse_bcd),
    ]
}

#[test]
fn criterion_10_acyclic_amalgamation() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut rng = common::rng(1010);
    for trial in 0..CRITERION_10_PAIRS {
        let (f, g) = common::random_cospan(&mut rng, 6);
        let sf = SimplicialMap::from_graph_morphism(&f).unwrap();
        let sg = SimplicialMap::from_graph_morphism(&g).unwrap();
        let graph_amalgam = amalgamate(&f, &g).unwrap();
        match amalgamate_acyclic(&sf, &sg, 1) {
            Ok(pb) => {
                let checks = [
                    ("in class", in_class_acyclic(&pb.complex, 1)),
                    ("first projection 0-acyclic", is_n_acyclic_map(&pb.first, 0)),
                    ("second projection 0-acyclic", is_n_acyclic_map(&pb.second, 0)),
                    ("commutes", pb.commutes(&sf, &sg)),
                    ("matches graph amalgam", *pb.complex == SimplicialComplex::from_graph(graph_amalgam.apex())),
                ];
                if let Some((what, _)) = checks.iter().find(|c| !c.1) {
                    failures.push(format!("graph pair {trial}: {what}"));
                }
            }
            Err(e) => failures.push(format!("graph pair {trial}: {e}")),
        }
    }
    let pairs = handcrafted_pairs();
    for (name, f, g) in &pairs {
        match amalgamate_acyclic(f, g, 2) {
            Ok(pb) => {
                let checks = [
                    ("in class", in_class_acyclic(&pb.complex, 2)),
                    ("first projection 1-acyclic", is_n_acyclic_map(&pb.first, 1)),
                    ("second projection 1-acyclic", is_n_acyclic_map(&pb.second, 1)),
                    ("face surjective", pb.first.is_face_surjective() && pb.second.is_face_surjective()),
                    ("commutes", pb.commutes(f, g)),
                ];
                if let Some((what, _)) = checks.iter().find(|c| !c.1) {
                    failures.push(format!("{name}: {what}"));
                }
            }
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    let elapsed = start.elapsed();
    report(
        10,
        "acyclic amalgamation",
        failures.is_empty() && elapsed <= CRITERION_10_TIME,
        format!(
            "{CRITERION_10_PAIRS} sampled pairs at n = 1, {} handcrafted pairs at n = 2, {} failures {:?}, {elapsed:.1?} (budget {:?})",
            pairs.len(),
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>(),
            CRITERION_10_TIME
        ),
    );
}
