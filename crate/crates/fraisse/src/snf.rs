//! Smith normal form over the integers with the unimodular transforms kept.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type Matrix = Vec<Vec<BigInt>>;

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

pub fn mat_vec(m: &Matrix, x: &[BigInt]) -> Vec<BigInt> {
    m.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix, inner: usize, cols: usize) -> Matrix {
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| &row[k] * &b[k][j]).sum())
                .collect()
        })
        .collect()
}

/// `row_ops * input * col_ops = diagonal form`, with the nonzero diagonal
/// entries positive and each dividing the next.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub rows: usize,
    pub cols: usize,
    pub diagonal: Vec<BigInt>,
    pub row_ops: Matrix,
    pub col_ops: Matrix,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.diagonal.len()
    }

    /// Invariant factors greater than one.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.diagonal.iter().filter(|d| !d.is_one()).cloned().collect()
    }

    /// Some `x` with `input * x = b`, if one exists over the integers.
    pub fn solve(&self, b: &[BigInt]) -> Option<Vec<BigInt>> {
        let ub = mat_vec(&self.row_ops, b);
        let mut y = vec![BigInt::zero(); self.cols];
        for (i, value) in ub.iter().enumerate() {
            match self.diagonal.get(i) {
                Some(d) => {
                    let (q, r) = value.div_rem(d);
                    if !r.is_zero() {
                        return None;
                    }
                    y[i] = q;
                }
                None if !value.is_zero() => return None,
                None => {}
            }
        }
        Some(mat_vec(&self.col_ops, &y))
    }
}

/// Smith normal form of a `rows x cols` matrix.
pub fn smith_normal_form(input: &Matrix, rows: usize, cols: usize) -> SmithForm {
    reduce(input, rows, cols, true)
}

/// Nonzero diagonal of the Smith form, without tracking transforms.
pub fn invariant_factors(input: &Matrix, rows: usize, cols: usize) -> Vec<BigInt> {
    reduce(input, rows, cols, false).diagonal
}

fn reduce(input: &Matrix, rows: usize, cols: usize, track: bool) -> SmithForm {
    let mut a = input.clone();
    let (mut u, mut v) = if track {
        (identity(rows), identity(cols))
    } else {
        (Vec::new(), Vec::new())
    };
    let mut diagonal = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        let Some((pr, pc)) = smallest_entry(&a, t, rows, cols) else {
            break;
        };
        pivot_to(&mut a, &mut u, &mut v, t, (pr, pc), track);
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                add_row(&mut a, i, t, &(-&q));
                if track {
                    add_row(&mut u, i, t, &(-&q));
                }
                if !a[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                add_col(&mut a, j, t, &(-&q));
                if track {
                    add_col(&mut v, j, t, &(-&q));
                }
                if !a[t][j].is_zero() {
                    clean = false;
                }
            }
            if clean {
                let pivot = a[t][t].clone();
                let offender = (t + 1..rows)
                    .find(|&i| (t + 1..cols).any(|j| !a[i][j].is_multiple_of(&pivot)));
                match offender {
                    None => break,
                    Some(i) => {
                        add_row(&mut a, t, i, &BigInt::one());
                        if track {
                            add_row(&mut u, t, i, &BigInt::one());
                        }
                    }
                }
            }
            let cell = smallest_entry_in_cross(&a, t, rows, cols);
            pivot_to(&mut a, &mut u, &mut v, t, cell, track);
        }
        if a[t][t].is_negative() {
            for x in a[t].iter_mut() {
                *x = -&*x;
            }
            if track {
                for x in u[t].iter_mut() {
                    *x = -&*x;
                }
            }
        }
        diagonal.push(a[t][t].clone());
        t += 1;
    }
    SmithForm {
        rows,
        cols,
        diagonal,
        row_ops: u,
        col_ops: v,
    }
}

fn pivot_to(a: &mut Matrix, u: &mut Matrix, v: &mut Matrix, t: usize, (r, c): (usize, usize), track: bool) {
    a.swap(t, r);
    swap_cols(a, t, c);
    if track {
        u.swap(t, r);
        swap_cols(v, t, c);
    }
}

fn smallest_entry(a: &Matrix, t: usize, rows: usize, cols: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..rows {
        for j in t..cols {
            if a[i][j].is_zero() {
                continue;
            }
            if best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                best = Some((i, j));
            }
        }
    }
    best
}

/// Smallest nonzero entry in row `t` or column `t` of the trailing block; the
/// pivot itself is always a candidate.
fn smallest_entry_in_cross(a: &Matrix, t: usize, rows: usize, cols: usize) -> (usize, usize) {
    let mut best = (t, t);
    let cells = (t..rows).map(|i| (i, t)).chain((t..cols).map(|j| (t, j)));
    for (i, j) in cells {
        if !a[i][j].is_zero() && (a[best.0][best.1].is_zero() || a[i][j].abs() < a[best.0][best.1].abs()) {
            best = (i, j);
        }
    }
    best
}

fn swap_cols(m: &mut Matrix, a: usize, b: usize) {
    if a != b {
        for row in m.iter_mut() {
            row.swap(a, b);
        }
    }
}

/// `row[target] += factor * row[source]`.
fn add_row(m: &mut Matrix, target: usize, source: usize, factor: &BigInt) {
    if factor.is_zero() {
        return;
    }
    let src = m[source].clone();
    for (x, s) in m[target].iter_mut().zip(src) {
        *x += factor * s;
    }
}

/// `col[target] += factor * col[source]`.
fn add_col(m: &mut Matrix, target: usize, source: usize, factor: &BigInt) {
    if factor.is_zero() {
        return;
    }
    for row in m.iter_mut() {
        let s = row[source].clone();
        row[target] += factor * s;
    }
}
