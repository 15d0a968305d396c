//! Exact convex hulls of rational point sets, as affine-span equalities plus facet
//! inequalities inside the span.

use super::linalg::{dot, nullspace, rref, Matrix};
use crate::num::{int, lcm_of_denoms, Num};
use num_integer::Integer;
use num_traits::{Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HullError {
    #[error("no samples")]
    Empty,
    #[error("samples have inconsistent dimensions")]
    Dimension,
    #[error("hull exceeded the ray budget of {0}")]
    Budget(usize),
    #[error("integer overflow in hull computation")]
    Overflow,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HullConfig {
    /// Maximum number of intermediate cone rays in the double-description method.
    pub max_rays: usize,
    /// On budget failure, fall back to the bounding box. Not safe: the box can contain
    /// points outside the hull.
    pub unsafe_box_fallback: bool,
}

impl Default for HullConfig {
    fn default() -> Self {
        HullConfig { max_rays: 200_000, unsafe_box_fallback: false }
    }
}

/// `{x : eq_a·x = eq_b for every equality, in_a·x ≤ in_b for every inequality}` with
/// integer, coprime coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HullRegion {
    pub dim: usize,
    pub equalities: Vec<(Vec<Num>, Num)>,
    pub inequalities: Vec<(Vec<Num>, Num)>,
    /// True when produced by the bounding-box fallback.
    pub is_box: bool,
}

impl HullRegion {
    pub fn contains(&self, x: &[Num]) -> bool {
        self.equalities.iter().all(|(a, b)| dot(a, x) == *b) && self.inequalities.iter().all(|(a, b)| dot(a, x) <= *b)
    }

    pub fn span_dim(&self) -> usize {
        self.dim - self.equalities.len()
    }
}

/// Scales to integer coprime coefficients; the sign is preserved.
fn normalize(a: &[Num], b: Num) -> (Vec<Num>, Num) {
    let l = lcm_of_denoms(a.iter().chain(std::iter::once(&b)));
    let ints: Vec<i64> = a.iter().chain(std::iter::once(&b)).map(|v| (*v * int(l)).to_integer()).collect();
    let g = ints.iter().fold(0i64, |acc, v| acc.gcd(v)).max(1);
    let mut out: Vec<Num> = ints.iter().map(|v| int(v / g)).collect();
    let b = out.pop().unwrap();
    (out, b)
}

pub fn learn_hull(samples: &[Vec<Num>], config: &HullConfig) -> Result<HullRegion, HullError> {
    let first = samples.first().ok_or(HullError::Empty)?;
    let d = first.len();
    if samples.iter().any(|s| s.len() != d) {
        return Err(HullError::Dimension);
    }
    let mut pts: Vec<Vec<Num>> = samples.to_vec();
    pts.sort();
    pts.dedup();
    let x0 = pts[0].clone();
    let diffs: Matrix = pts.iter().map(|p| p.iter().zip(&x0).map(|(a, b)| *a - *b).collect()).collect();
    let mut basis = diffs.clone();
    let pivots = rref(&mut basis);
    let mut equalities: Vec<(Vec<Num>, Num)> = nullspace(&basis, &pivots, d)
        .into_iter()
        .map(|a| {
            let b = dot(&a, &x0);
            let (mut a, mut b) = normalize(&a, b);
            if a.iter().find(|v| !v.is_zero()).is_some_and(|v| v.is_negative()) {
                a.iter_mut().for_each(|v| *v = -*v);
                b = -b;
            }
            (a, b)
        })
        .collect();
    equalities.sort();

    // Coordinates inside the span: y_r = (x - x0)[pivot_r].
    let ys: Vec<Vec<Num>> = diffs.iter().map(|row| pivots.iter().map(|&p| row[p]).collect()).collect();
    let r = pivots.len();
    let facets = match r {
        0 => Ok(Vec::new()),
        1 => {
            let lo = ys.iter().map(|y| y[0]).min().unwrap();
            let hi = ys.iter().map(|y| y[0]).max().unwrap();
            Ok(vec![(vec![int(-1)], -lo), (vec![int(1)], hi)])
        }
        2 => Ok(hull_2d(&ys)),
        _ => hull_dd(&ys, config.max_rays),
    };
    let (facets, is_box) = match facets {
        Ok(f) => (f, false),
        Err(HullError::Budget(_)) if config.unsafe_box_fallback => {
            let mut f = Vec::new();
            for k in 0..r {
                let mut e = vec![int(0); r];
                e[k] = int(1);
                f.push((e.clone(), ys.iter().map(|y| y[k]).max().unwrap()));
                e[k] = int(-1);
                f.push((e, -ys.iter().map(|y| y[k]).min().unwrap()));
            }
            (f, true)
        }
        Err(e) => return Err(e),
    };
    // Back to x-space: c·(x - x0)[P] ≤ e  ⇔  Σ c_r x[p_r] ≤ e + Σ c_r x0[p_r].
    let mut inequalities: Vec<(Vec<Num>, Num)> = facets
        .into_iter()
        .map(|(c, e)| {
            let mut a = vec![int(0); d];
            let mut b = e;
            for (k, &p) in pivots.iter().enumerate() {
                a[p] = c[k];
                b += c[k] * x0[p];
            }
            normalize(&a, b)
        })
        .collect();
    inequalities.sort();
    inequalities.dedup();
    Ok(HullRegion { dim: d, equalities, inequalities, is_box })
}

fn cross(o: &[Num], a: &[Num], b: &[Num]) -> Num {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Facets of a full-dimensional planar hull via the monotone chain.
fn hull_2d(ys: &[Vec<Num>]) -> Vec<(Vec<Num>, Num)> {
    let mut pts = ys.to_vec();
    pts.sort();
    pts.dedup();
    let mut lower: Vec<Vec<Num>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= int(0) {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vec<Num>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= int(0) {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    let ring: Vec<Vec<Num>> = lower.into_iter().chain(upper).collect();
    // Counter-clockwise ring: outward normal of edge p→q is (dy, -dx).
    (0..ring.len())
        .map(|i| {
            let (p, q) = (&ring[i], &ring[(i + 1) % ring.len()]);
            let n = vec![q[1] - p[1], p[0] - q[0]];
            let b = dot(&n, p);
            (n, b)
        })
        .collect()
}

type Ray = Vec<i128>;

fn gcd_normalize(v: &mut Ray) {
    let g = v.iter().fold(0i128, |acc, x| acc.gcd(x));
    if g > 1 {
        v.iter_mut().for_each(|x| *x /= g);
    }
}

fn idot(a: &[i128], b: &[i128]) -> Result<i128, HullError> {
    a.iter().zip(b).try_fold(0i128, |acc, (x, y)| x.checked_mul(*y).and_then(|m| acc.checked_add(m)).ok_or(HullError::Overflow))
}

struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn and_count(&self, o: &Bits) -> u32 {
        self.0.iter().zip(&o.0).map(|(a, b)| (a & b).count_ones()).sum()
    }
    /// `self ⊇ (a ∩ b)`
    fn covers_and(&self, a: &Bits, b: &Bits) -> bool {
        self.0.iter().zip(a.0.iter().zip(&b.0)).all(|(s, (x, y))| x & y & !s == 0)
    }
}

/// Facets of a full-dimensional hull in `r ≥ 3` dimensions via the double-description
/// method on the cone `{(a, β) : a·p − β ≤ 0 for all points p}`.
fn hull_dd(ys: &[Vec<Num>], max_rays: usize) -> Result<Vec<(Vec<Num>, Num)>, HullError> {
    let r = ys[0].len();
    let l = lcm_of_denoms(ys.iter().flatten());
    // Constraint rows [p, -1] on integer-scaled points.
    let rows: Vec<Vec<i128>> = ys
        .iter()
        .map(|y| y.iter().map(|v| (*v * int(l)).to_integer() as i128).chain([-1]).collect())
        .collect();
    let dim = r + 1;

    // r + 1 affinely independent points give the initial simplicial cone.
    let mut chosen: Vec<usize> = Vec::new();
    let mut acc: Matrix = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let mut trial = acc.clone();
        trial.push(row.iter().map(|v| int(*v as i64)).collect());
        let mut t = trial.clone();
        if rref(&mut t).len() == trial.len() {
            acc = trial;
            chosen.push(i);
            if chosen.len() == dim {
                break;
            }
        }
    }
    assert_eq!(chosen.len(), dim, "span coordinates are full-dimensional");
    // Extreme rays of {z : R z ≤ 0} are the columns of -R⁻¹.
    let mut aug: Matrix = acc
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut v = row.clone();
            v.extend((0..dim).map(|j| int(i64::from(i == j))));
            v
        })
        .collect();
    rref(&mut aug);
    let mut rays: Vec<Ray> = (0..dim)
        .map(|j| {
            let col: Vec<Num> = (0..dim).map(|i| -aug[i][dim + j]).collect();
            let den = lcm_of_denoms(col.iter());
            let mut v: Ray = col.iter().map(|c| (*c * int(den)).to_integer() as i128).collect();
            gcd_normalize(&mut v);
            v
        })
        .collect();
    let order: Vec<usize> = chosen.iter().copied().chain((0..rows.len()).filter(|i| !chosen.contains(i))).collect();
    let mut zeros: Vec<Bits> = (0..dim)
        .map(|j| {
            let mut b = Bits::new(rows.len());
            for (k, &ci) in chosen.iter().enumerate() {
                if k != j {
                    b.set(ci);
                }
            }
            b
        })
        .collect();

    for &ci in &order[dim..] {
        let row = &rows[ci];
        let vals: Vec<i128> = rays.iter().map(|z| idot(row, z)).collect::<Result<_, _>>()?;
        if vals.iter().all(|v| *v <= 0) {
            for (z, v) in zeros.iter_mut().zip(&vals) {
                if *v == 0 {
                    z.set(ci);
                }
            }
            continue;
        }
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] > 0).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] < 0).collect();
        let mut new_rays = Vec::new();
        let mut new_zeros = Vec::new();
        for &p in &pos {
            for &n in &neg {
                if zeros[p].and_count(&zeros[n]) + 2 < dim as u32 {
                    continue;
                }
                let adjacent = (0..rays.len())
                    .filter(|&k| k != p && k != n)
                    .all(|k| !zeros[k].covers_and(&zeros[p], &zeros[n]));
                if !adjacent {
                    continue;
                }
                let (vp, vn) = (vals[p], -vals[n]);
                let mut z: Ray = rays[p]
                    .iter()
                    .zip(&rays[n])
                    .map(|(a, b)| {
                        let x = vn.checked_mul(*a)?;
                        let y = vp.checked_mul(*b)?;
                        x.checked_add(y)
                    })
                    .collect::<Option<_>>()
                    .ok_or(HullError::Overflow)?;
                gcd_normalize(&mut z);
                let mut zb = Bits(zeros[p].0.iter().zip(&zeros[n].0).map(|(a, b)| a & b).collect());
                zb.set(ci);
                new_rays.push(z);
                new_zeros.push(zb);
            }
        }
        let mut kept_rays = Vec::new();
        let mut kept_zeros = Vec::new();
        for (i, (z, mut zb)) in rays.into_iter().zip(zeros).enumerate() {
            if vals[i] <= 0 {
                if vals[i] == 0 {
                    zb.set(ci);
                }
                kept_rays.push(z);
                kept_zeros.push(zb);
            }
        }
        kept_rays.extend(new_rays);
        kept_zeros.extend(new_zeros);
        if kept_rays.len() > max_rays {
            return Err(HullError::Budget(max_rays));
        }
        rays = kept_rays;
        zeros = kept_zeros;
    }
    // Each ray (a, β) with a ≠ 0 is a facet a·y' ≤ β on scaled points y' = l·y.
    let mut out = Vec::new();
    for z in rays {
        if z[..r].iter().all(|v| *v == 0) {
            continue;
        }
        let to_num = |v: i128| -> Result<Num, HullError> {
            i64::try_from(v).map(int).map_err(|_| HullError::Overflow)
        };
        let a: Vec<Num> = z[..r].iter().map(|v| to_num(*v).map(|x| x * int(l))).collect::<Result<_, _>>()?;
        out.push((a, to_num(z[r])?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[&[i64]]) -> Vec<Vec<Num>> {
        v.iter().map(|p| p.iter().map(|x| int(*x)).collect()).collect()
    }

    #[test]
    fn triangle() {
        let h = learn_hull(&pts(&[&[0, 0], &[2, 0], &[0, 2]]), &HullConfig::default()).unwrap();
        assert!(h.equalities.is_empty());
        let mut expect = vec![(vec![int(-1), int(0)], int(0)), (vec![int(0), int(-1)], int(0)), (vec![int(1), int(1)], int(2))];
        expect.sort();
        assert_eq!(h.inequalities, expect);
        assert!(h.contains(&[int(1), int(1)]));
        assert!(!h.contains(&[int(2), int(1)]));
    }

    #[test]
    fn single_point_is_equalities() {
        let h = learn_hull(&pts(&[&[3, -1, 4]]), &HullConfig::default()).unwrap();
        assert_eq!(h.equalities.len(), 3);
        assert!(h.inequalities.is_empty());
        assert!(h.contains(&[int(3), int(-1), int(4)]));
        assert!(!h.contains(&[int(3), int(-1), int(5)]));
    }

    #[test]
    fn cube_in_four_dims_has_six_facets() {
        let mut v = Vec::new();
        for m in 0..8 {
            v.push(vec![int(m & 1), int((m >> 1) & 1), int((m >> 2) & 1), int(5)]);
        }
        let h = learn_hull(&v, &HullConfig::default()).unwrap();
        assert_eq!(h.equalities, vec![(vec![int(0), int(0), int(0), int(1)], int(5))]);
        assert_eq!(h.inequalities.len(), 6);
        let half = Num::new(1, 2);
        assert!(h.contains(&[half, half, half, int(5)]));
        assert!(!h.contains(&[half, half, Num::new(3, 2), int(5)]));
    }

    #[test]
    fn budget_and_fallback() {
        let mut v = Vec::new();
        for m in 0..8 {
            v.push(vec![int(m & 1), int((m >> 1) & 1), int((m >> 2) & 1)]);
        }
        let tight = HullConfig { max_rays: 2, unsafe_box_fallback: false };
        assert_eq!(learn_hull(&v, &tight), Err(HullError::Budget(2)));
        let boxed = learn_hull(&v, &HullConfig { max_rays: 2, unsafe_box_fallback: true }).unwrap();
        assert!(boxed.is_box);
        assert_eq!(boxed.inequalities.len(), 6);
    }
}
