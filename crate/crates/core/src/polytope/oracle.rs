//! Brute-force vertex enumeration through basic feasible solutions.
//!
//! Independent of the double description path: every vertex of
//! `{w >= 0 : A w = b}` is the unique solution of `A_B w_B = b` for some set
//! `B` of `s` linearly independent columns. Only practical when `C(d, s)` is
//! small.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use super::{OptimalPolytope, VertexList};
use crate::error::{Error, Result};
use crate::linalg::{Rational, Solution};

pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u8);
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Lexicographic `k`-subsets of `0..n`.
struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            current: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut c = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if c[i] < self.n - k + i {
                c[i] += 1;
                for j in i + 1..k {
                    c[j] = c[j - 1] + 1;
                }
                self.current = Some(c);
                break;
            }
        }
        Some(out)
    }
}

pub fn oracle_enumerate(poly: &OptimalPolytope, cap: u64) -> Result<VertexList> {
    let d = poly.d();
    let s = poly.s();
    let count = binomial(d, s);
    if count > BigUint::from(cap) {
        return Err(Error::ResourceLimit(format!(
            "C({d}, {s}) = {count} column subsets exceed the oracle cap of {cap}"
        )));
    }
    let (a, b) = poly.equality_basis();
    let found: BTreeSet<Vec<Rational>> = Combinations::new(d, s)
        .par_bridge()
        .filter_map(|cols| {
            let sub = a.select_columns(&cols);
            match sub.solve(b) {
                Ok(Solution::Unique(x)) if x.iter().all(|v| !v.is_negative()) => {
                    let mut w = vec![Rational::zero(); d];
                    for (&c, v) in cols.iter().zip(x) {
                        w[c] = v;
                    }
                    Some(w)
                }
                _ => None,
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect();
    Ok(VertexList {
        vertices: found.into_iter().collect(),
        stats: Default::default(),
    })
}

/// `C(d, s)` as a float-free size hint, saturating at `u64::MAX`.
pub fn subset_count(poly: &OptimalPolytope) -> u64 {
    binomial(poly.d(), poly.s()).to_u64().unwrap_or(u64::MAX)
}
