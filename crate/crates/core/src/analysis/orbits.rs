use rayon::prelude::*;

use super::VodCatalog;
use crate::catalog::Permutation;
use crate::error::{Error, Result};

/// One orbit: member indices in ascending order; the representative is the
/// lexicographically smallest member, which is also the first index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    pub representative: usize,
    pub members: Vec<usize>,
}

impl Orbit {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitPartition {
    /// Orbit id of every vertex.
    pub orbit_of: Vec<usize>,
    /// Orbits ordered by representative.
    pub orbits: Vec<Orbit>,
}

impl OrbitPartition {
    /// Orbit sizes in orbit order.
    pub fn sizes(&self) -> Vec<usize> {
        self.orbits.iter().map(Orbit::size).collect()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// Partitions the vertices into orbits of the group generated by
/// `generators`, without materializing the group.
pub fn classify_orbits(catalog: &VodCatalog, generators: &[Permutation]) -> Result<OrbitPartition> {
    let n = catalog.len();
    let d = catalog.d();
    if let Some(g) = generators.iter().find(|g| g.len() != d) {
        return Err(Error::DimensionMismatch(format!(
            "generator acts on {} points, support has {d}",
            g.len()
        )));
    }
    let mut uf = UnionFind((0..n).collect());
    for (gi, g) in generators.iter().enumerate() {
        let images: Vec<std::result::Result<usize, Vec<_>>> = catalog
            .vertices()
            .par_iter()
            .map(|v| {
                let w = g.apply(v);
                catalog.index_of(&w).ok_or(w)
            })
            .collect();
        for (j, image) in images.into_iter().enumerate() {
            match image {
                Ok(i) => uf.union(j, i),
                Err(w) if !catalog.polytope().contains(&w) => {
                    return Err(Error::GeneratorNotPreserving { generator: gi })
                }
                Err(_) => {
                    return Err(Error::InvalidDesign(format!(
                        "vertex list is not closed under generator {gi}"
                    )))
                }
            }
        }
    }
    let mut orbit_of = vec![usize::MAX; n];
    let mut orbits: Vec<Orbit> = Vec::new();
    for j in 0..n {
        let root = uf.find(j);
        if orbit_of[root] == usize::MAX {
            orbit_of[root] = orbits.len();
            orbits.push(Orbit {
                representative: root,
                members: Vec::new(),
            });
        }
        let id = orbit_of[root];
        orbit_of[j] = id;
        orbits[id].members.push(j);
    }
    Ok(OrbitPartition { orbit_of, orbits })
}
