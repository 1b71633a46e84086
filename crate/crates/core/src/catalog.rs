//! Benchmark multifactor regression models with known maximal optimal designs.
//!
//! | family | design space | regressors                    | maximum optimal support        |
//! |--------|--------------|-------------------------------|--------------------------------|
//! | SBW    | `[0,1]^k`    | `x`                           | middle layers of `{0,1}^k`     |
//! | CBW    | `[-1,1]^k`   | `x`                           | `{-1,1}^k`                     |
//! | MEM    | `[-1,1]^k`   | `(1, x)`                      | `{-1,1}^k`                     |
//! | INT    | `[-1,1]^k`   | `(1, x, x_i x_j (i<j))`       | `{-1,1}^k`                     |
//! | QWOI   | `[-1,1]^k`   | `(1, x, x_1^2 .. x_k^2)`      | `{-1,0,1}^k` (D-optimality)    |
//!
//! Candidate points are ordered lexicographically by coordinates; every index
//! reported downstream refers to this order.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;

use crate::design::{self, Design, DesignProblem, Verdict};
use crate::error::{Error, Result};
use crate::linalg::{int, Rational};

const MAX_FACTORS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Sbw,
    Cbw,
    Mem,
    Int,
    Qwoi,
    Custom,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Sbw => "sbw",
            Family::Cbw => "cbw",
            Family::Mem => "mem",
            Family::Int => "int",
            Family::Qwoi => "qwoi",
            Family::Custom => "custom",
        }
    }

    fn levels(self) -> &'static [i64] {
        match self {
            Family::Sbw => &[0, 1],
            Family::Qwoi => &[-1, 0, 1],
            _ => &[-1, 1],
        }
    }

    /// Regressor vector `f(x)` for a built-in family.
    pub fn regressor(self, x: &[Rational]) -> Result<Vec<Rational>> {
        let k = x.len();
        let mut f = Vec::new();
        match self {
            Family::Sbw | Family::Cbw => f.extend(x.iter().cloned()),
            Family::Mem => {
                f.push(int(1));
                f.extend(x.iter().cloned());
            }
            Family::Int => {
                f.push(int(1));
                f.extend(x.iter().cloned());
                for i in 0..k {
                    for j in i + 1..k {
                        f.push(&x[i] * &x[j]);
                    }
                }
            }
            Family::Qwoi => {
                f.push(int(1));
                f.extend(x.iter().cloned());
                f.extend(x.iter().map(|v| v * v));
            }
            Family::Custom => {
                return Err(Error::Unsupported(
                    "custom family has no regressor formula".into(),
                ))
            }
        }
        Ok(f)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sbw" => Ok(Family::Sbw),
            "cbw" => Ok(Family::Cbw),
            "mem" => Ok(Family::Mem),
            "int" => Ok(Family::Int),
            "qwoi" => Ok(Family::Qwoi),
            "custom" => Ok(Family::Custom),
            other => Err(Error::Unsupported(format!("unknown family {other:?}"))),
        }
    }
}

/// A permutation of support indices; `image[i]` is where point `i` goes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; image.len()];
        for &j in &image {
            if j >= image.len() || std::mem::replace(&mut seen[j], true) {
                return Err(Error::InvalidDesign("not a permutation".into()));
            }
        }
        Ok(Self { image })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            image: (0..n).collect(),
        }
    }

    /// Builds a permutation of `0..n` from disjoint or overlapping cycles
    /// (0-based), composed left to right.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut image: Vec<usize> = (0..n).collect();
        for cycle in cycles {
            if cycle.iter().any(|&i| i >= n) {
                return Err(Error::InvalidDesign(format!("cycle entry outside 0..{n}")));
            }
            let mut sorted = cycle.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != cycle.len() {
                return Err(Error::InvalidDesign("repeated entry in cycle".into()));
            }
            let mut step: Vec<usize> = (0..n).collect();
            for (a, &from) in cycle.iter().enumerate() {
                step[from] = cycle[(a + 1) % cycle.len()];
            }
            image = image.iter().map(|&x| step[x]).collect();
        }
        Self::new(image)
    }

    /// Disjoint cycles of length at least two, each starting at its smallest
    /// element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.image.len()];
        let mut out = Vec::new();
        for start in 0..self.image.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut j = self.image[start];
            while j != start {
                seen[j] = true;
                cycle.push(j);
                j = self.image[j];
            }
            if cycle.len() > 1 {
                out.push(cycle);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// `(g.w)[g(i)] = w[i]`.
    pub fn apply<T: Clone>(&self, w: &[T]) -> Vec<T> {
        let mut out = w.to_vec();
        for (i, x) in w.iter().enumerate() {
            out[self.image[i]] = x.clone();
        }
        out
    }
}

/// A fully populated benchmark or user problem together with its verified
/// maximal optimal design and symmetry generators.
#[derive(Clone, Debug)]
pub struct CatalogModel {
    pub family: Family,
    pub k: usize,
    pub p: i64,
    pub problem: DesignProblem,
    pub maximal_design: Design,
    pub generators: Vec<Permutation>,
    pub verdict: Verdict,
}

impl CatalogModel {
    /// Human-readable label such as `mem-k4-p0`.
    pub fn label(&self) -> String {
        format!("{}-k{}-p{}", self.family, self.k, self.p)
    }

    /// Wraps a user problem, running the equivalence-theorem check first.
    pub fn custom(
        problem: DesignProblem,
        maximal_design: Design,
        generators: Vec<Permutation>,
    ) -> Result<Self> {
        let d = problem.d();
        if maximal_design.len() != d {
            return Err(Error::DimensionMismatch("maximal design length".into()));
        }
        if let Some(g) = generators.iter().find(|g| g.len() != d) {
            return Err(Error::DimensionMismatch(format!(
                "generator acts on {} points, support has {d}",
                g.len()
            )));
        }
        let verdict = check(&problem, &maximal_design)?;
        Ok(Self {
            family: Family::Custom,
            k: problem.k(),
            p: problem.p(),
            problem,
            maximal_design,
            generators,
            verdict,
        })
    }
}

fn check(problem: &DesignProblem, maximal: &Design) -> Result<Verdict> {
    if maximal.weights().iter().any(Zero::is_zero) {
        return Err(Error::VerificationFailed(
            "the maximal design must put positive weight on every support point".into(),
        ));
    }
    let verdict = design::verify_maximal_optimal(problem, maximal).map_err(|e| match e {
        Error::Singular => Error::VerificationFailed("singular information matrix".into()),
        other => other,
    })?;
    if !verdict.passed() {
        return Err(Error::VerificationFailed(format!(
            "equivalence conditions violated at candidates {:?}",
            verdict.violations
        )));
    }
    Ok(verdict)
}

/// Full grid over the family's levels in lexicographic order.
fn grid(levels: &[i64], k: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                levels.iter().map(move |&l| {
                    let mut v = prefix.clone();
                    v.push(l);
                    v
                })
            })
            .collect();
    }
    out
}

fn is_supported(family: Family, k: usize, p: i64) -> Result<()> {
    if k == 0 || k > MAX_FACTORS {
        return Err(Error::Unsupported(format!(
            "k = {k} outside 1..={MAX_FACTORS}"
        )));
    }
    if p > 0 {
        return Err(Error::Unsupported(format!("p = {p} must be <= 0")));
    }
    match family {
        Family::Sbw if p != 0 && p != -1 => Err(Error::Unsupported(
            "SBW supports only D- (p=0) and A-optimality (p=-1)".into(),
        )),
        Family::Qwoi if p != 0 => Err(Error::Unsupported(
            "QWOI supports only D-optimality (p=0)".into(),
        )),
        Family::Custom => Err(Error::Unsupported(
            "custom problems are loaded from files".into(),
        )),
        _ => Ok(()),
    }
}

/// Maximum optimal support of the SBW model: the layers of `{0,1}^k` with
/// these numbers of ones.
fn sbw_layers(k: usize, p: i64) -> Vec<usize> {
    if k % 2 == 1 {
        vec![k.div_ceil(2)]
    } else if p == 0 {
        vec![k / 2, k / 2 + 1]
    } else {
        vec![k / 2]
    }
}

pub fn build(family: Family, k: usize, p: i64) -> Result<CatalogModel> {
    is_supported(family, k, p)?;
    let all = grid(family.levels(), k);
    let (support, extra): (Vec<Vec<i64>>, Vec<Vec<i64>>) = match family {
        Family::Sbw => {
            let layers = sbw_layers(k, p);
            all.into_iter()
                .partition(|x| layers.contains(&(x.iter().sum::<i64>() as usize)))
        }
        _ => (all, Vec::new()),
    };
    let to_rat = |pts: &[Vec<i64>]| -> Vec<Vec<Rational>> {
        pts.iter()
            .map(|x| x.iter().map(|&v| int(v)).collect())
            .collect()
    };
    let points = to_rat(&support);
    let regressors = points
        .iter()
        .map(|x| family.regressor(x))
        .collect::<Result<Vec<_>>>()?;
    let extra_points = to_rat(&extra);
    let extra_regressors = extra_points
        .iter()
        .map(|x| family.regressor(x))
        .collect::<Result<Vec<_>>>()?;
    let problem = DesignProblem::new(points, regressors, p)?
        .with_extra_candidates(extra_points, extra_regressors)?;
    let maximal_design = Design::uniform(problem.d());
    let verdict = check(&problem, &maximal_design)?;
    let generators = symmetry_generators_for(family, &support)?;
    Ok(CatalogModel {
        family,
        k,
        p,
        problem,
        maximal_design,
        generators,
        verdict,
    })
}

/// Generating set of the model's symmetry group, acting on the support:
/// adjacent factor transpositions, factor negations (all but SBW), point
/// negations (CBW) and, for INT, the map `y_i -> y_i y_k` for `i < k`.
pub fn symmetry_generators(family: Family, k: usize) -> Result<Vec<Permutation>> {
    let p = if family == Family::Sbw || family == Family::Qwoi {
        0
    } else {
        -1
    };
    is_supported(family, k, p)?;
    let all = grid(family.levels(), k);
    let support: Vec<Vec<i64>> = match family {
        Family::Sbw => {
            let layers = sbw_layers(k, 0);
            all.into_iter()
                .filter(|x| layers.contains(&(x.iter().sum::<i64>() as usize)))
                .collect()
        }
        _ => all,
    };
    symmetry_generators_for(family, &support)
}

fn symmetry_generators_for(family: Family, support: &[Vec<i64>]) -> Result<Vec<Permutation>> {
    let index: HashMap<&[i64], usize> = support
        .iter()
        .enumerate()
        .map(|(i, x)| (x.as_slice(), i))
        .collect();
    let k = support.first().map_or(0, Vec::len);
    let lookup = |y: Vec<i64>| -> Result<usize> {
        index
            .get(y.as_slice())
            .copied()
            .ok_or_else(|| Error::Unsupported("symmetry does not preserve the support".into()))
    };
    let point_map = |f: &dyn Fn(&[i64]) -> Vec<i64>| -> Result<Permutation> {
        Permutation::new(
            support
                .iter()
                .map(|y| lookup(f(y)))
                .collect::<Result<_>>()?,
        )
    };

    let mut gens = Vec::new();
    for j in 0..k.saturating_sub(1) {
        gens.push(point_map(&|y: &[i64]| {
            let mut z = y.to_vec();
            z.swap(j, j + 1);
            z
        })?);
    }
    if family != Family::Sbw {
        for j in 0..k {
            gens.push(point_map(&|y: &[i64]| {
                let mut z = y.to_vec();
                z[j] = -z[j];
                z
            })?);
        }
    }
    if family == Family::Int && k >= 2 {
        // y_i -> y_i y_k swaps the main effect x_i with the interaction x_i x_k
        gens.push(point_map(&|y: &[i64]| {
            let last = y[k - 1];
            y.iter()
                .enumerate()
                .map(|(i, v)| if i + 1 < k { v * last } else { *v })
                .collect()
        })?);
    }
    if family == Family::Cbw {
        for (i, y) in support.iter().enumerate() {
            let j = lookup(y.iter().map(|v| -v).collect())?;
            if i < j {
                gens.push(Permutation::from_cycles(support.len(), &[vec![i, j]])?);
            }
        }
    }
    Ok(gens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rat;

    #[test]
    fn mem3_model() {
        let m = build(Family::Mem, 3, 0).unwrap();
        assert_eq!(m.problem.d(), 8);
        assert_eq!(m.problem.m(), 4);
        assert!(m.maximal_design.weights().iter().all(|w| *w == rat(1, 8)));
        assert_eq!(m.problem.points()[0], vec![int(-1), int(-1), int(-1)]);
        assert_eq!(m.problem.points()[7], vec![int(1), int(1), int(1)]);
    }

    #[test]
    fn sbw6_a_support() {
        let m = build(Family::Sbw, 6, -1).unwrap();
        assert_eq!(m.problem.d(), 20);
        assert!(m.maximal_design.weights().iter().all(|w| *w == rat(1, 20)));
        assert_eq!(m.problem.extra_points().len(), 64 - 20);
    }

    #[test]
    fn sbw6_d_support_is_two_layers() {
        let m = build(Family::Sbw, 6, 0).unwrap();
        assert_eq!(m.problem.d(), 35);
        assert_eq!(m.verdict.equality.len(), 35);
    }

    #[test]
    fn int5_dimensions() {
        let m = build(Family::Int, 5, 0).unwrap();
        assert_eq!(m.problem.d(), 32);
        assert_eq!(m.problem.m(), 16);
    }

    #[test]
    fn qwoi_dimensions() {
        let m = build(Family::Qwoi, 2, 0).unwrap();
        assert_eq!(m.problem.d(), 9);
        assert_eq!(m.problem.m(), 5);
        assert!(matches!(
            build(Family::Qwoi, 2, -1),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn unsupported_combinations() {
        assert!(matches!(
            build(Family::Sbw, 4, -2),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            build(Family::Custom, 3, 0),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            build(Family::Mem, 0, 0),
            Err(Error::Unsupported(_))
        ));
        assert!(matches!(
            build(Family::Mem, 3, 1),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn cbw2_generators() {
        let gens = symmetry_generators(Family::Cbw, 2).unwrap();
        // 1 transposition, 2 sign flips, 2 point negations
        assert_eq!(gens.len(), 5);
        // factor swap: (-1,1) <-> (1,-1)
        assert_eq!(gens[0].cycles(), vec![vec![1, 2]]);
        assert_eq!(gens[3].cycles(), vec![vec![0, 3]]);
        assert_eq!(gens[4].cycles(), vec![vec![1, 2]]);
    }

    #[test]
    fn sbw6_generators_are_transpositions_only() {
        assert_eq!(symmetry_generators(Family::Sbw, 6).unwrap().len(), 5);
    }

    #[test]
    fn uniform_design_is_fixed_by_generators() {
        for (fam, k, p) in [
            (Family::Cbw, 3, 0),
            (Family::Mem, 4, -1),
            (Family::Int, 4, 0),
            (Family::Qwoi, 2, 0),
            (Family::Sbw, 5, -1),
        ] {
            let m = build(fam, k, p).unwrap();
            for g in &m.generators {
                assert_eq!(
                    g.apply(m.maximal_design.weights()),
                    m.maximal_design.weights()
                );
            }
        }
    }

    #[test]
    fn permutation_cycles_roundtrip() {
        let p = Permutation::from_cycles(6, &[vec![0, 3, 4], vec![1, 5]]).unwrap();
        assert_eq!(p.image(), &[3, 5, 2, 4, 0, 1]);
        assert_eq!(Permutation::from_cycles(6, &p.cycles()).unwrap(), p);
        assert!(Permutation::from_cycles(3, &[vec![0, 3]]).is_err());
        assert!(Permutation::from_cycles(3, &[vec![0, 0]]).is_err());
        assert!(Permutation::new(vec![0, 0]).is_err());
    }

    #[test]
    fn family_names_parse() {
        for f in [
            Family::Sbw,
            Family::Cbw,
            Family::Mem,
            Family::Int,
            Family::Qwoi,
        ] {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("xyz".parse::<Family>().is_err());
    }
}
