use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use super::VodCatalog;
use crate::error::{Error, Result};
use crate::linalg::{dot, Rational, RationalMatrix};
use crate::polytope::dd::{self, primitive};

/// A distinct projected vertex and the vertices that land on it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectedPoint {
    pub coords: Vec<Rational>,
    pub vertices: Vec<usize>,
}

impl ProjectedPoint {
    pub fn multiplicity(&self) -> usize {
        self.vertices.len()
    }
}

/// `normal . x <= offset`, tight at `points`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Facet {
    pub normal: Vec<Rational>,
    pub offset: Rational,
    pub points: Vec<usize>,
}

/// Convex hull of the projected points; indices refer to
/// [`Projection::points`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Hull {
    Point(usize),
    Segment([usize; 2]),
    /// Counterclockwise in the first two independent coordinates.
    Polygon(Vec<usize>),
    Polyhedron {
        vertices: Vec<usize>,
        facets: Vec<Facet>,
    },
}

impl Hull {
    /// Indices of the extreme points in ascending order.
    pub fn extreme_points(&self) -> Vec<usize> {
        let mut out = match self {
            Hull::Point(i) => vec![*i],
            Hull::Segment(e) => e.to_vec(),
            Hull::Polygon(v) => v.clone(),
            Hull::Polyhedron { vertices, .. } => vertices.clone(),
        };
        out.sort_unstable();
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    pub axes: Vec<usize>,
    /// Distinct points in lexicographic order.
    pub points: Vec<ProjectedPoint>,
    pub affine_dim: usize,
    pub hull: Hull,
}

/// Projects the vertices onto one to three candidate coordinates.
pub fn project(catalog: &VodCatalog, axes: &[usize]) -> Result<Projection> {
    if axes.is_empty() || axes.len() > 3 {
        return Err(Error::DimensionMismatch(
            "projection needs one to three axes".into(),
        ));
    }
    if let Some(&a) = axes.iter().find(|&&a| a >= catalog.d()) {
        return Err(Error::DimensionMismatch(format!("axis {a} out of range")));
    }
    let mut groups: BTreeMap<Vec<Rational>, Vec<usize>> = BTreeMap::new();
    for (j, v) in catalog.vertices().iter().enumerate() {
        groups
            .entry(axes.iter().map(|&a| v[a].clone()).collect())
            .or_default()
            .push(j);
    }
    let points: Vec<ProjectedPoint> = groups
        .into_iter()
        .map(|(coords, vertices)| ProjectedPoint { coords, vertices })
        .collect();
    let coords: Vec<Vec<Rational>> = points.iter().map(|p| p.coords.clone()).collect();
    let (affine_dim, hull) = hull_of(&coords)?;
    Ok(Projection {
        axes: axes.to_vec(),
        points,
        affine_dim,
        hull,
    })
}

/// Affine dimension and hull of distinct points given in lexicographic order.
pub(crate) fn hull_of(points: &[Vec<Rational>]) -> Result<(usize, Hull)> {
    let origin = &points[0];
    let diffs: Vec<Vec<Rational>> = points
        .iter()
        .skip(1)
        .map(|p| p.iter().zip(origin).map(|(a, b)| a - b).collect())
        .collect();
    let pivots = if diffs.is_empty() {
        Vec::new()
    } else {
        RationalMatrix::from_rows(&diffs)?.rref().1
    };
    let reduced: Vec<Vec<Rational>> = points
        .iter()
        .map(|p| pivots.iter().map(|&c| p[c].clone()).collect())
        .collect();
    let hull = match pivots.len() {
        0 => Hull::Point(0),
        1 => {
            let lo = (0..points.len())
                .min_by(|&a, &b| reduced[a].cmp(&reduced[b]))
                .expect("nonempty");
            let hi = (0..points.len())
                .max_by(|&a, &b| reduced[a].cmp(&reduced[b]))
                .expect("nonempty");
            Hull::Segment([lo, hi])
        }
        2 => Hull::Polygon(monotone_chain(&reduced)),
        _ => polyhedron(points)?,
    };
    Ok((pivots.len(), hull))
}

fn cross(o: &[Rational], a: &[Rational], b: &[Rational]) -> Rational {
    (&a[0] - &o[0]) * (&b[1] - &o[1]) - (&a[1] - &o[1]) * (&b[0] - &o[0])
}

/// Strictly convex hull vertices, counterclockwise from the lexicographic
/// minimum.
fn monotone_chain(points: &[Vec<Rational>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].cmp(&points[b]));
    let build = |iter: &mut dyn Iterator<Item = usize>| {
        let mut chain: Vec<usize> = Vec::new();
        for i in iter {
            while chain.len() >= 2
                && !cross(
                    &points[chain[chain.len() - 2]],
                    &points[chain[chain.len() - 1]],
                    &points[i],
                )
                .is_positive()
            {
                chain.pop();
            }
            chain.push(i);
        }
        chain.pop();
        chain
    };
    let mut lower = build(&mut order.iter().copied());
    let upper = build(&mut order.iter().rev().copied());
    lower.extend(upper);
    lower
}

/// Facets of a full-dimensional point set in three dimensions, from the
/// extreme rays of the cone `{(a0, a) : a0 + a.p >= 0 for all p}`.
fn polyhedron(points: &[Vec<Rational>]) -> Result<Hull> {
    let rows: Vec<_> = points
        .iter()
        .map(|p| {
            let mut r = vec![Rational::from_integer(1.into())];
            r.extend(p.iter().cloned());
            primitive(&r)
        })
        .collect();
    let (rays, _) = dd::extreme_rays(&rows, &Default::default())?;
    let mut facets: Vec<Facet> = rays
        .into_iter()
        .map(|ray| {
            let ray: Vec<Rational> = ray.into_iter().map(Rational::from_integer).collect();
            let normal: Vec<Rational> = ray[1..].iter().map(|x| -x).collect();
            let offset = ray[0].clone();
            let points = (0..points.len())
                .filter(|&i| dot(&normal, &points[i]) == offset)
                .collect();
            Facet {
                normal,
                offset,
                points,
            }
        })
        .collect();
    facets.sort_by(|a, b| (&a.normal, &a.offset).cmp(&(&b.normal, &b.offset)));
    let vertices = (0..points.len())
        .filter(|&i| {
            let normals: Vec<Vec<Rational>> = facets
                .iter()
                .filter(|f| f.points.contains(&i))
                .map(|f| f.normal.clone())
                .collect();
            !normals.is_empty()
                && RationalMatrix::from_rows(&normals)
                    .map(|m| m.rank() == 3)
                    .unwrap_or(false)
        })
        .collect();
    debug_assert!(facets.iter().all(|f| !f.normal.iter().all(Zero::is_zero)));
    Ok(Hull::Polyhedron { vertices, facets })
}

#[cfg(test)]
mod tests {
    use super::super::tests::catalog_for;
    use super::*;
    use crate::catalog::Family;
    use crate::linalg::{int, rat};

    fn pts(raw: &[&[i64]]) -> Vec<Vec<Rational>> {
        let mut v: Vec<Vec<Rational>> = raw
            .iter()
            .map(|r| r.iter().map(|&x| int(x)).collect())
            .collect();
        v.sort();
        v
    }

    #[test]
    fn mem3_onto_one_coordinate() {
        let (_, cat) = catalog_for(Family::Mem, 3, 0);
        let proj = project(&cat, &[0]).unwrap();
        let coords: Vec<_> = proj
            .points
            .iter()
            .map(|p| (p.coords[0].clone(), p.multiplicity()))
            .collect();
        assert_eq!(coords, vec![(int(0), 1), (rat(1, 4), 1)]);
        assert_eq!(proj.hull, Hull::Segment([0, 1]));
    }

    #[test]
    fn square_with_center() {
        let p = pts(&[&[0, 0], &[2, 0], &[0, 2], &[2, 2], &[1, 1], &[1, 0]]);
        let (dim, hull) = hull_of(&p).unwrap();
        assert_eq!(dim, 2);
        assert_eq!(hull.extreme_points().len(), 4);
    }

    #[test]
    fn collinear_points_in_the_plane() {
        let p = pts(&[&[0, 0], &[1, 1], &[3, 3]]);
        let (dim, hull) = hull_of(&p).unwrap();
        assert_eq!(dim, 1);
        assert_eq!(hull, Hull::Segment([0, 2]));
    }

    #[test]
    fn tetrahedron_facets() {
        let p = pts(&[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[0, 0, 0]]);
        let mut p = p;
        p.dedup();
        let (dim, hull) = hull_of(&p).unwrap();
        assert_eq!(dim, 3);
        match hull {
            Hull::Polyhedron { vertices, facets } => {
                assert_eq!(vertices.len(), 4);
                assert_eq!(facets.len(), 4);
                assert!(facets.iter().all(|f| f.points.len() == 3));
            }
            other => panic!("unexpected hull {other:?}"),
        }
    }

    #[test]
    fn single_point() {
        let (dim, hull) = hull_of(&pts(&[&[1, 2, 3]])).unwrap();
        assert_eq!((dim, hull), (0, Hull::Point(0)));
    }

    #[test]
    fn bad_axes() {
        let (_, cat) = catalog_for(Family::Mem, 3, 0);
        assert!(project(&cat, &[]).is_err());
        assert!(project(&cat, &[0, 1, 2, 3]).is_err());
        assert!(project(&cat, &[8]).is_err());
    }
}
