use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

use super::VodCatalog;
use crate::design::support_of;
use crate::error::{Error, Result};
use crate::linalg::Rational;

/// `N = sum_j K_j N_j` as a list of `(vertex, K_j)` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Realization {
    pub parts: Vec<(usize, u64)>,
}

/// Sizes of exact optimal designs reachable as nonnegative integer
/// combinations of vertex sizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AchievableSizes {
    pub gcd: u64,
    /// Distinct vertex sizes with the lowest vertex index of each.
    pub generators: BTreeMap<u64, usize>,
    pub n_max: u64,
    pub sizes: Vec<u64>,
    pub realizations: BTreeMap<u64, Realization>,
}

impl AchievableSizes {
    pub fn contains(&self, n: u64) -> bool {
        self.realizations.contains_key(&n)
    }
}

pub fn exact_design_sizes(catalog: &VodCatalog, n_max: u64) -> AchievableSizes {
    let mut generators = BTreeMap::new();
    for (j, info) in catalog.info().iter().enumerate() {
        generators.entry(info.size).or_insert(j);
    }
    let gcd = generators.keys().fold(0u64, |g, &n| g.gcd(&n));

    // last[n] is the generator size used last on the way to n
    let cap = n_max as usize;
    let mut last: Vec<Option<u64>> = vec![None; cap + 1];
    for n in 1..=cap {
        last[n] = generators
            .keys()
            .copied()
            .find(|&g| (g as usize) <= n && (n == g as usize || last[n - g as usize].is_some()));
    }
    let mut realizations = BTreeMap::new();
    for n in 1..=cap {
        if last[n].is_none() {
            continue;
        }
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        let mut rest = n;
        while rest > 0 {
            let g = last[rest].expect("reachable");
            *counts.entry(g).or_default() += 1;
            rest -= g as usize;
        }
        let parts = counts
            .into_iter()
            .map(|(g, k)| (generators[&g], k))
            .collect();
        realizations.insert(n as u64, Realization { parts });
    }
    AchievableSizes {
        gcd,
        generators,
        n_max,
        sizes: realizations.keys().copied().collect(),
        realizations,
    }
}

fn ceil(q: &Rational) -> BigInt {
    q.ceil().to_integer()
}

/// Efficient Rounding of `weights` to `n` trials on the same support.
///
/// Starts from `ceil((n - h/2) w_i)` and adjusts one unit at a time: raise a
/// count with the smallest `n_i / w_i`, or lower one with the largest
/// `(n_i - 1) / w_i`. Ties go to the lowest index.
pub fn efficient_round(weights: &[Rational], n: u64) -> Result<Vec<u64>> {
    let support = support_of(weights);
    let h = support.len();
    if (n as usize) < h || n == 0 {
        return Err(Error::SizeTooSmall {
            size: n,
            support: h,
        });
    }
    if weights.iter().any(Signed::is_negative) {
        return Err(Error::InvalidDesign("negative weight".into()));
    }
    let multiplier =
        Rational::from_integer(BigInt::from(n)) - Rational::new(BigInt::from(h), BigInt::from(2));
    let mut counts: Vec<BigInt> = support
        .iter()
        .map(|&i| ceil(&(&multiplier * &weights[i])))
        .collect();
    let target = BigInt::from(n);
    let mut total: BigInt = counts.iter().sum();
    let ratio = |c: &BigInt, i: usize| Rational::from_integer(c.clone()) / &weights[support[i]];
    while total < target {
        let j = (0..h)
            .min_by(|&a, &b| {
                ratio(&counts[a], a)
                    .cmp(&ratio(&counts[b], b))
                    .then(a.cmp(&b))
            })
            .expect("h > 0");
        counts[j] += 1;
        total += 1;
    }
    while total > target {
        let j = (0..h)
            .max_by(|&a, &b| {
                ratio(&(&counts[a] - 1), a)
                    .cmp(&ratio(&(&counts[b] - 1), b))
                    .then(b.cmp(&a))
            })
            .expect("h > 0");
        counts[j] -= 1;
        total -= 1;
    }
    let mut out = vec![0u64; weights.len()];
    for (&i, c) in support.iter().zip(counts) {
        out[i] = c
            .to_u64()
            .ok_or_else(|| Error::InvalidDesign("rounded count out of range".into()))?;
    }
    Ok(out)
}
