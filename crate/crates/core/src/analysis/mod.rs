//! Derived quantities of an enumerated vertex list.

mod blocks;
pub(crate) mod decompose;
mod orbits;
mod projection;
mod sizes;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::design::support_of;
use crate::error::{Error, Result};
use crate::linalg::{dot, Rational};
use crate::polytope::oracle::binomial;
use crate::polytope::{OptimalPolytope, VertexList};

pub use blocks::{pbd_condition_check, BlockReport};
pub use decompose::{
    caratheodory_decompose, minimality_check, reconstruct, reduce_support, DecompositionTerm,
    Minimality,
};
pub use orbits::{classify_orbits, Orbit, OrbitPartition};
pub use projection::{project, Facet, Hull, ProjectedPoint, Projection};
pub use sizes::{efficient_round, exact_design_sizes, AchievableSizes, Realization};

/// Per-vertex metadata.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexInfo {
    pub support: Vec<usize>,
    /// Least common multiple of the weight denominators.
    pub size: u64,
}

/// Bounds on the number of vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundsRecord {
    pub sperner_upper: BigUint,
    pub subset_upper: BigUint,
    pub mcmullen_upper: BigUint,
    pub lower_cover: usize,
    pub lower_dim: usize,
}

impl BoundsRecord {
    pub fn new(d: usize, s: usize, t: usize) -> Self {
        let mcmullen = binomial(d - t.div_ceil(2), s) + binomial(d - (t + 2) / 2, s);
        Self {
            sperner_upper: binomial(d, d / 2),
            subset_upper: binomial(d, s),
            mcmullen_upper: mcmullen,
            lower_cover: if s == 0 { 1 } else { d.div_ceil(s) },
            lower_dim: t + 1,
        }
    }

    pub fn upper(&self) -> &BigUint {
        [
            &self.sperner_upper,
            &self.subset_upper,
            &self.mcmullen_upper,
        ]
        .into_iter()
        .min()
        .expect("three bounds")
    }

    pub fn lower(&self) -> usize {
        self.lower_cover.max(self.lower_dim)
    }

    /// `lower <= ell <= upper` for all five bounds.
    pub fn admits(&self, ell: usize) -> bool {
        self.lower() <= ell && BigUint::from(ell) <= *self.upper()
    }
}

/// The complete list of vertex optimal designs of one problem together with
/// derived metadata.
#[derive(Clone, Debug)]
pub struct VodCatalog {
    polytope: OptimalPolytope,
    vertices: Vec<Vec<Rational>>,
    info: Vec<VertexInfo>,
    bounds: BoundsRecord,
    orbits: Option<OrbitPartition>,
}

impl VodCatalog {
    /// Wraps an enumerated vertex list. Vertices are sorted and each is
    /// checked for membership.
    pub fn new(polytope: OptimalPolytope, list: VertexList) -> Result<Self> {
        let mut vertices = list.vertices;
        vertices.sort();
        vertices.dedup();
        if vertices.is_empty() {
            return Err(Error::InvalidDesign("empty vertex list".into()));
        }
        if !vertices.par_iter().all(|v| polytope.contains(v)) {
            return Err(Error::NotInPolytope);
        }
        let info = vertices
            .par_iter()
            .map(|v| VertexInfo {
                support: support_of(v),
                size: exact_size(v),
            })
            .collect();
        let dims = polytope.dimensions();
        let bounds = BoundsRecord::new(dims.d, dims.s, dims.t);
        Ok(Self {
            polytope,
            vertices,
            info,
            bounds,
            orbits: None,
        })
    }

    /// Computes and attaches the orbit partition under `generators`.
    pub fn with_orbits(mut self, generators: &[crate::catalog::Permutation]) -> Result<Self> {
        self.orbits = Some(classify_orbits(&self, generators)?);
        Ok(self)
    }

    pub fn polytope(&self) -> &OptimalPolytope {
        &self.polytope
    }

    pub fn vertices(&self) -> &[Vec<Rational>] {
        &self.vertices
    }

    pub fn vertex(&self, j: usize) -> &[Rational] {
        &self.vertices[j]
    }

    pub fn info(&self) -> &[VertexInfo] {
        &self.info
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn d(&self) -> usize {
        self.polytope.d()
    }

    pub fn bounds(&self) -> &BoundsRecord {
        &self.bounds
    }

    pub fn orbits(&self) -> Option<&OrbitPartition> {
        self.orbits.as_ref()
    }

    /// Index of `w` in the sorted vertex list.
    pub fn index_of(&self, w: &[Rational]) -> Option<usize> {
        self.vertices.binary_search_by(|v| v.as_slice().cmp(w)).ok()
    }

    /// Sorted distinct support sizes.
    pub fn support_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.info.iter().map(|i| i.support.len()).collect();
        sizes.sort_unstable();
        sizes.dedup();
        sizes
    }
}

/// Least common multiple of the denominators of `w`.
pub fn exact_size(w: &[Rational]) -> u64 {
    w.iter()
        .fold(BigInt::one(), |l, x| l.lcm(x.denom()))
        .to_u64()
        .unwrap_or(u64::MAX)
}

/// Vertices of smallest support.
pub fn absolutely_minimal(catalog: &VodCatalog) -> Vec<usize> {
    let min = catalog
        .info
        .iter()
        .map(|i| i.support.len())
        .min()
        .unwrap_or(0);
    (0..catalog.len())
        .filter(|&j| catalog.info[j].support.len() == min)
        .collect()
}

/// `[min_j v_j(i), max_j v_j(i)]` for every candidate `i`.
pub fn weight_ranges(catalog: &VodCatalog) -> Vec<(Rational, Rational)> {
    (0..catalog.d())
        .map(|i| {
            let column = catalog.vertices.iter().map(|v| &v[i]);
            let lo = column.clone().min().expect("nonempty").clone();
            let hi = column.max().expect("nonempty").clone();
            (lo, hi)
        })
        .collect()
}

/// Average of all vertices and the checks that it is a maximal optimal design.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Barycenter {
    pub weights: Vec<Rational>,
    pub supports_cover: bool,
    pub strictly_positive: bool,
}

pub fn barycentric_design(catalog: &VodCatalog) -> Barycenter {
    let d = catalog.d();
    let ell = Rational::from_integer(BigInt::from(catalog.len()));
    let mut sum = vec![Rational::zero(); d];
    for v in &catalog.vertices {
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x;
        }
    }
    let weights: Vec<Rational> = sum.into_iter().map(|s| s / &ell).collect();
    let mut covered = vec![false; d];
    for info in &catalog.info {
        for &i in &info.support {
            covered[i] = true;
        }
    }
    Barycenter {
        supports_cover: covered.iter().all(|&c| c),
        strictly_positive: weights.iter().all(Signed::is_positive),
        weights,
    }
}

/// Minimizers of a linear cost over the vertices, with exact ties.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearCostMinimum {
    pub value: Rational,
    pub minimizers: Vec<usize>,
}

pub fn minimize_linear_cost(catalog: &VodCatalog, cost: &[Rational]) -> Result<LinearCostMinimum> {
    if cost.len() != catalog.d() {
        return Err(Error::DimensionMismatch(format!(
            "cost has {} entries, expected {}",
            cost.len(),
            catalog.d()
        )));
    }
    let values: Vec<Rational> = catalog.vertices.par_iter().map(|v| dot(cost, v)).collect();
    let value = values.iter().min().expect("nonempty").clone();
    let minimizers = (0..values.len()).filter(|&j| values[j] == value).collect();
    Ok(LinearCostMinimum { value, minimizers })
}
