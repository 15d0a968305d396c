//! Exact rational linear algebra on small dense matrices.

use crate::num::Num;
use num_traits::{One, Zero};

pub type Matrix = Vec<Vec<Num>>;

/// Reduced row echelon form in place; returns pivot columns (one per nonzero row, in order).
/// Rows past `pivots.len()` are zero afterwards.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = Num::one() / m[r][c];
        for v in m[r].iter_mut() {
            *v *= inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c];
                for j in c..cols {
                    let d = f * m[r][j];
                    m[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    m.truncate(pivots.len());
    pivots
}

/// Basis of `{a : M a = 0}` for an RREF matrix with the given pivots over `cols` columns.
pub fn nullspace(rref_rows: &Matrix, pivots: &[usize], cols: usize) -> Vec<Vec<Num>> {
    let mut out = Vec::new();
    for f in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Num::zero(); cols];
        v[f] = Num::one();
        for (r, &p) in pivots.iter().enumerate() {
            v[p] = -rref_rows[r][f];
        }
        out.push(v);
    }
    out
}

/// Solves `A w = y` exactly, free variables set to 0. `None` when inconsistent.
pub fn solve(a: &Matrix, y: &[Num]) -> Option<Vec<Num>> {
    let cols = a.first().map_or(0, |r| r.len());
    let mut aug: Matrix = a.iter().zip(y).map(|(row, v)| row.iter().copied().chain([*v]).collect()).collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut w = vec![Num::zero(); cols];
    for (r, &p) in pivots.iter().enumerate() {
        w[p] = aug[r][cols];
    }
    Some(w)
}

pub fn rank(m: &Matrix) -> usize {
    let mut c = m.clone();
    rref(&mut c).len()
}

pub fn dot(a: &[Num], b: &[Num]) -> Num {
    a.iter().zip(b).fold(Num::zero(), |acc, (x, y)| acc + *x * *y)
}
