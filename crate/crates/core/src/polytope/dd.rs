//! Double description method for pointed polyhedral cones `{x : R x >= 0}`.
//!
//! Rays are kept as primitive integer vectors. The engine first runs with
//! checked `i128` arithmetic and reruns with `BigInt` if any product
//! overflows, so results are always exact. Adjacency of two rays is decided
//! combinatorially: rays `p` and `n` are adjacent iff their common zero set
//! has at least `D - 2` inserted rows and no third ray vanishes on all of it.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{Rational, RationalMatrix};

/// Arithmetic the engine needs; `None` signals overflow.
trait Coeff: Clone + Send + Sync + Sized {
    fn from_big(b: &BigInt) -> Option<Self>;
    fn to_big(&self) -> BigInt;
    fn dot(a: &[Self], b: &[Self]) -> Option<Self>;
    fn sign(&self) -> Ordering;
    /// `a*x + b*y` with `a, b > 0`, divided by the gcd of its entries.
    fn combine(a: &Self, x: &[Self], b: &Self, y: &[Self]) -> Option<Vec<Self>>;
    fn neg(&self) -> Self;
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Coeff for i128 {
    fn from_big(b: &BigInt) -> Option<Self> {
        b.to_i128().filter(|v| *v != i128::MIN)
    }

    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }

    fn dot(a: &[Self], b: &[Self]) -> Option<Self> {
        let mut acc: i128 = 0;
        for (x, y) in a.iter().zip(b) {
            if *x != 0 && *y != 0 {
                acc = acc.checked_add(x.checked_mul(*y)?)?;
            }
        }
        Some(acc)
    }

    fn sign(&self) -> Ordering {
        self.cmp(&0)
    }

    fn combine(a: &Self, x: &[Self], b: &Self, y: &[Self]) -> Option<Vec<Self>> {
        let mut out = Vec::with_capacity(x.len());
        let mut g: u128 = 0;
        for (xi, yi) in x.iter().zip(y) {
            let v = a.checked_mul(*xi)?.checked_add(b.checked_mul(*yi)?)?;
            if v == i128::MIN {
                return None;
            }
            g = gcd_u128(g, v.unsigned_abs());
            out.push(v);
        }
        if g > 1 {
            let g = g as i128;
            for v in &mut out {
                *v /= g;
            }
        }
        Some(out)
    }

    fn neg(&self) -> Self {
        -*self
    }
}

impl Coeff for BigInt {
    fn from_big(b: &BigInt) -> Option<Self> {
        Some(b.clone())
    }

    fn to_big(&self) -> BigInt {
        self.clone()
    }

    fn dot(a: &[Self], b: &[Self]) -> Option<Self> {
        let mut acc = BigInt::zero();
        for (x, y) in a.iter().zip(b) {
            if !x.is_zero() && !y.is_zero() {
                acc += x * y;
            }
        }
        Some(acc)
    }

    fn sign(&self) -> Ordering {
        self.cmp(&BigInt::zero())
    }

    fn combine(a: &Self, x: &[Self], b: &Self, y: &[Self]) -> Option<Vec<Self>> {
        let mut out: Vec<BigInt> = x.iter().zip(y).map(|(xi, yi)| a * xi + b * yi).collect();
        let g = out.iter().fold(BigInt::zero(), |g, v| g.gcd(v));
        if g > BigInt::one() {
            for v in &mut out {
                *v /= &g;
            }
        }
        Some(out)
    }

    fn neg(&self) -> Self {
        -self
    }
}

type RayWithZeros<T> = (Vec<T>, Vec<u64>);
/// Order in which the inequalities are inserted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum InsertionOrder {
    /// Rows with fewer zero coefficients first, ties broken lexicographically.
    #[default]
    Sorted,
    /// Caller-supplied permutation of the row indices.
    Given(Vec<usize>),
}

#[derive(Clone, Debug)]
pub struct DdOptions {
    /// Abort with a resource-limit error once the number of rays held at any
    /// step exceeds this.
    pub ray_cap: usize,
    pub order: InsertionOrder,
}

impl Default for DdOptions {
    fn default() -> Self {
        Self {
            ray_cap: 1_000_000,
            order: InsertionOrder::Sorted,
        }
    }
}

/// Statistics from the last run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DdStats {
    pub peak_rays: usize,
    pub pairs_tested: u64,
    pub used_bigint: bool,
}

/// Extreme rays of the pointed cone `{x : row_i . x >= 0 for all i}`, each
/// a primitive integer vector. `rows` must have full column rank.
pub fn extreme_rays(rows: &[Vec<BigInt>], opts: &DdOptions) -> Result<(Vec<Vec<BigInt>>, DdStats)> {
    let dim = rows.first().map_or(0, Vec::len);
    if dim == 0 || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch(
            "empty or ragged inequality system".into(),
        ));
    }
    let order = match &opts.order {
        InsertionOrder::Sorted => sorted_order(rows),
        InsertionOrder::Given(o) => {
            let mut check = o.clone();
            check.sort_unstable();
            if check != (0..rows.len()).collect::<Vec<_>>() {
                return Err(Error::DimensionMismatch(
                    "insertion order is not a permutation".into(),
                ));
            }
            o.clone()
        }
    };
    let initial = initial_rows(rows, &order, dim)?;

    if let Some(small) = rows
        .iter()
        .map(|r| r.iter().map(i128::from_big).collect::<Option<Vec<_>>>())
        .collect::<Option<Vec<_>>>()
    {
        if let Some((rays, stats)) = run::<i128>(&small, rows, &order, &initial, opts)? {
            return Ok((rays, stats));
        }
    }
    let (rays, mut stats) = run::<BigInt>(rows, rows, &order, &initial, opts)?
        .expect("BigInt arithmetic cannot overflow");
    stats.used_bigint = true;
    Ok((rays, stats))
}

fn sorted_order(rows: &[Vec<BigInt>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let zeros = |i: usize| rows[i].iter().filter(|v| v.is_zero()).count();
    order.sort_by(|&a, &b| {
        zeros(a)
            .cmp(&zeros(b))
            .then_with(|| rows[a].cmp(&rows[b]))
            .then(a.cmp(&b))
    });
    order
}

/// First `dim` rows (in insertion order) that are linearly independent.
fn initial_rows(rows: &[Vec<BigInt>], order: &[usize], dim: usize) -> Result<Vec<usize>> {
    let mut chosen = Vec::with_capacity(dim);
    // Incremental echelon basis over the rationals.
    let mut basis: Vec<(usize, Vec<Rational>)> = Vec::new();
    for &i in order {
        let mut v: Vec<Rational> = rows[i]
            .iter()
            .map(|x| Rational::from_integer(x.clone()))
            .collect();
        for (pivot, b) in &basis {
            if !v[*pivot].is_zero() {
                let f = v[*pivot].clone();
                for (vj, bj) in v.iter_mut().zip(b) {
                    *vj -= &f * bj;
                }
            }
        }
        if let Some(pivot) = v.iter().position(|x| !x.is_zero()) {
            let inv = v[pivot].recip();
            for x in &mut v {
                *x *= &inv;
            }
            for (_, b) in &mut basis {
                if !b[pivot].is_zero() {
                    let f = b[pivot].clone();
                    for (bj, vj) in b.iter_mut().zip(&v) {
                        *bj -= &f * vj;
                    }
                }
            }
            basis.push((pivot, v));
            chosen.push(i);
            if chosen.len() == dim {
                return Ok(chosen);
            }
        }
    }
    Err(Error::DimensionMismatch(format!(
        "inequality system has rank {} < {dim}; the cone is not pointed",
        chosen.len()
    )))
}

struct RaySet<T> {
    dim: usize,
    words: usize,
    coords: Vec<T>,
    zeros: Vec<u64>,
}

impl<T: Coeff> RaySet<T> {
    fn new(dim: usize, words: usize) -> Self {
        Self {
            dim,
            words,
            coords: Vec::new(),
            zeros: Vec::new(),
        }
    }

    fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    fn ray(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn zero_set(&self, i: usize) -> &[u64] {
        &self.zeros[i * self.words..(i + 1) * self.words]
    }

    fn push(&mut self, ray: &[T], zero: &[u64]) {
        self.coords.extend_from_slice(ray);
        self.zeros.extend_from_slice(zero);
    }
}

fn set_bit(z: &mut [u64], i: usize) {
    z[i / 64] |= 1 << (i % 64);
}

fn run<T: Coeff>(
    rows: &[Vec<T>],
    big_rows: &[Vec<BigInt>],
    order: &[usize],
    initial: &[usize],
    opts: &DdOptions,
) -> Result<Option<(Vec<Vec<BigInt>>, DdStats)>> {
    let dim = rows[0].len();
    let words = rows.len().div_ceil(64);
    let mut stats = DdStats::default();

    // Initial simplicial cone: columns of B^{-1}, scaled to primitive integers.
    let basis = RationalMatrix::from_rows(
        &initial
            .iter()
            .map(|&i| {
                big_rows[i]
                    .iter()
                    .map(|x| Rational::from_integer(x.clone()))
                    .collect()
            })
            .collect::<Vec<_>>(),
    )?;
    let inv = basis.inverse()?;
    let mut rays = RaySet::<T>::new(dim, words);
    for j in 0..dim {
        let col = primitive(&inv.column(j));
        let Some(col) = col.iter().map(T::from_big).collect::<Option<Vec<T>>>() else {
            return Ok(None);
        };
        let mut z = vec![0u64; words];
        for (jj, &row) in initial.iter().enumerate() {
            if jj != j {
                set_bit(&mut z, row);
            }
        }
        rays.push(&col, &z);
    }
    stats.peak_rays = rays.len();

    let initial_set: std::collections::HashSet<usize> = initial.iter().copied().collect();
    for &row_idx in order.iter().filter(|i| !initial_set.contains(i)) {
        let row = &rows[row_idx];
        let Some(values) = (0..rays.len())
            .map(|r| T::dot(row, rays.ray(r)))
            .collect::<Option<Vec<T>>>()
        else {
            return Ok(None);
        };
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut zer = Vec::new();
        for (r, v) in values.iter().enumerate() {
            match v.sign() {
                Ordering::Greater => pos.push(r),
                Ordering::Less => neg.push(r),
                Ordering::Equal => zer.push(r),
            }
        }

        let mut next = RaySet::<T>::new(dim, words);
        for &r in pos.iter().chain(&zer) {
            let mut z = rays.zero_set(r).to_vec();
            if values[r].sign() == Ordering::Equal {
                set_bit(&mut z, row_idx);
            }
            next.push(rays.ray(r), &z);
        }
        if neg.is_empty() {
            rays = next;
            continue;
        }

        let total = rays.len();
        let needed = (dim as u32).saturating_sub(2);
        let rays_ref = &rays;
        let values_ref = &values;
        let neg_ref = &neg;
        let produced = AtomicUsize::new(next.len());
        let created: Vec<Option<Vec<RayWithZeros<T>>>> = pos
            .par_iter()
            .map(|&p| {
                let zp = rays_ref.zero_set(p);
                let mut out = Vec::new();
                if produced.load(AtomicOrdering::Relaxed) > opts.ray_cap {
                    return Some(out);
                }
                let mut common = vec![0u64; words];
                for &n in neg_ref {
                    let zn = rays_ref.zero_set(n);
                    let mut count = 0;
                    for w in 0..words {
                        common[w] = zp[w] & zn[w];
                        count += common[w].count_ones();
                    }
                    if count < needed {
                        continue;
                    }
                    let blocked = (0..total).any(|r| {
                        r != p && r != n && {
                            let zr = rays_ref.zero_set(r);
                            (0..words).all(|w| common[w] & !zr[w] == 0)
                        }
                    });
                    if blocked {
                        continue;
                    }
                    // new = v_p * ray_n - v_n * ray_p, with v_p > 0 > v_n
                    let a = values_ref[p].clone();
                    let b = values_ref[n].neg();
                    let ray = T::combine(&a, rays_ref.ray(n), &b, rays_ref.ray(p))?;
                    let mut z = common.clone();
                    set_bit(&mut z, row_idx);
                    out.push((ray, z));
                    produced.fetch_add(1, AtomicOrdering::Relaxed);
                }
                Some(out)
            })
            .collect();
        stats.pairs_tested += (pos.len() * neg.len()) as u64;
        let produced = produced.into_inner();
        if produced > opts.ray_cap {
            return Err(Error::ResourceLimit(format!(
                "{produced} intermediate rays exceed the cap of {}",
                opts.ray_cap
            )));
        }
        for batch in created {
            let Some(batch) = batch else {
                return Ok(None);
            };
            for (ray, z) in batch {
                next.push(&ray, &z);
            }
        }
        rays = next;
        stats.peak_rays = stats.peak_rays.max(rays.len());
        if rays.len() > opts.ray_cap {
            return Err(Error::ResourceLimit(format!(
                "{} intermediate rays exceed the cap of {}",
                rays.len(),
                opts.ray_cap
            )));
        }
    }

    let out = (0..rays.len())
        .map(|r| rays.ray(r).iter().map(T::to_big).collect())
        .collect();
    Ok(Some((out, stats)))
}

/// Scales a rational vector to the primitive integer vector with the same
/// direction.
pub(crate) fn primitive(v: &[Rational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let ints: Vec<BigInt> = v
        .iter()
        .map(|x| (x * Rational::from_integer(lcm.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() || g.is_one() {
        ints
    } else {
        ints.into_iter().map(|x| x / &g).collect()
    }
}

/// Algebraic adjacency test: the rows vanishing on both rays have rank
/// `dim - 2`. Slower than the combinatorial test; used to cross-check it.
pub fn adjacent_algebraic(rows: &[Vec<BigInt>], a: &[BigInt], b: &[BigInt]) -> bool {
    let dim = a.len();
    let tight: Vec<Vec<Rational>> = rows
        .iter()
        .filter(|r| {
            let da: BigInt = r.iter().zip(a).map(|(x, y)| x * y).sum();
            let db: BigInt = r.iter().zip(b).map(|(x, y)| x * y).sum();
            da.is_zero() && db.is_zero()
        })
        .map(|r| {
            r.iter()
                .map(|x| Rational::from_integer(x.clone()))
                .collect()
        })
        .collect();
    if tight.is_empty() {
        return dim == 2;
    }
    RationalMatrix::from_rows(&tight)
        .map(|m| m.rank() + 2 == dim)
        .unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big_rows(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    fn sorted(mut v: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
        v.sort();
        v
    }

    #[test]
    fn square_homogenized() {
        // x0 >= 0 implied; |x1| <= x0, |x2| <= x0
        let rows = big_rows(&[&[1, 1, 0], &[1, -1, 0], &[1, 0, 1], &[1, 0, -1]]);
        let (rays, _) = extreme_rays(&rows, &DdOptions::default()).unwrap();
        let expected = big_rows(&[&[1, -1, -1], &[1, -1, 1], &[1, 1, -1], &[1, 1, 1]]);
        assert_eq!(sorted(rays), sorted(expected));
    }

    #[test]
    fn cube_has_eight_vertices_in_any_order() {
        let mut rows = Vec::new();
        for j in 0..3 {
            for s in [1i64, -1] {
                let mut r = vec![1i64, 0, 0, 0];
                r[j + 1] = s;
                rows.push(r);
            }
        }
        let rows: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        let (base, _) = extreme_rays(&rows, &DdOptions::default()).unwrap();
        assert_eq!(base.len(), 8);
        let base = sorted(base);
        for order in [
            vec![5, 4, 3, 2, 1, 0],
            vec![0, 2, 4, 1, 3, 5],
            vec![3, 0, 5, 1, 4, 2],
        ] {
            let opts = DdOptions {
                order: InsertionOrder::Given(order),
                ..Default::default()
            };
            assert_eq!(sorted(extreme_rays(&rows, &opts).unwrap().0), base);
        }
        for (i, a) in base.iter().enumerate() {
            for b in &base[i + 1..] {
                let differ = a.iter().zip(b).filter(|(x, y)| x != y).count();
                assert_eq!(adjacent_algebraic(&rows, a, b), differ == 1);
            }
        }
    }

    #[test]
    fn degenerate_pyramid_apex() {
        // square pyramid: apex is degenerate (4 facets meet there)
        let rows = big_rows(&[
            &[1, 0, 0, 0],
            &[1, -1, 0, -1],
            &[1, 1, 0, -1],
            &[1, 0, -1, -1],
            &[1, 0, 1, -1],
            &[0, 0, 0, 1],
        ]);
        let (rays, _) = extreme_rays(&rows, &DdOptions::default()).unwrap();
        assert_eq!(rays.len(), 5);
        assert!(rays.contains(&big_rows(&[&[1, 0, 0, 1]])[0]));
    }

    #[test]
    fn bigint_fallback_is_exact() {
        let huge: BigInt = BigInt::from(1u8) << 130;
        let rows = vec![
            vec![huge.clone(), BigInt::from(1), BigInt::from(0)],
            vec![huge.clone(), BigInt::from(-1), BigInt::from(0)],
            vec![huge.clone(), BigInt::from(0), BigInt::from(1)],
            vec![huge, BigInt::from(0), BigInt::from(-1)],
        ];
        let (rays, stats) = extreme_rays(&rows, &DdOptions::default()).unwrap();
        assert_eq!(rays.len(), 4);
        assert!(stats.used_bigint);
    }

    #[test]
    fn ray_cap_is_reported() {
        let mut rows = Vec::new();
        for j in 0..4 {
            for s in [1i64, -1] {
                let mut r = vec![
                    BigInt::from(1),
                    BigInt::zero(),
                    BigInt::zero(),
                    BigInt::zero(),
                    BigInt::zero(),
                ];
                r[j + 1] = BigInt::from(s);
                rows.push(r);
            }
        }
        let opts = DdOptions {
            ray_cap: 6,
            ..Default::default()
        };
        assert!(matches!(
            extreme_rays(&rows, &opts),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn rank_deficient_system_is_rejected() {
        let rows = big_rows(&[&[1, 1], &[2, 2]]);
        assert!(extreme_rays(&rows, &DdOptions::default()).is_err());
    }

    #[test]
    fn primitive_scaling() {
        let v = vec![
            Rational::new(BigInt::from(2), BigInt::from(3)),
            Rational::new(BigInt::from(-4), BigInt::from(9)),
        ];
        assert_eq!(primitive(&v), vec![BigInt::from(3), BigInt::from(-2)]);
    }
}
