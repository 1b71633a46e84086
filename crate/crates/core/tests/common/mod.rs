#![allow(dead_code)]

use vod_core::analysis::VodCatalog;
use vod_core::catalog::{self, CatalogModel, Family, Permutation};
use vod_core::design::{Design, DesignProblem};
use vod_core::linalg::{int, parse_rational, Rational};
use vod_core::polytope::{DdOptions, OptimalPolytope};

pub fn model(family: Family, k: usize, p: i64) -> CatalogModel {
    catalog::build(family, k, p).unwrap()
}

pub fn polytope(model: &CatalogModel) -> OptimalPolytope {
    OptimalPolytope::build(&model.problem, &model.maximal_design).unwrap()
}

pub fn catalog_of(model: &CatalogModel) -> VodCatalog {
    let poly = polytope(model);
    let list = poly.enumerate_vertices(&DdOptions::default()).unwrap();
    VodCatalog::new(poly, list)
        .unwrap()
        .with_orbits(&model.generators)
        .unwrap()
}

pub fn catalog(family: Family, k: usize, p: i64) -> (CatalogModel, VodCatalog) {
    let m = model(family, k, p);
    let c = catalog_of(&m);
    (m, c)
}

/// Weight vector on the model's support of a design written with one row
/// per factor and one column per support point.
pub fn design(model: &CatalogModel, rows: &[&str], weights: &[&str]) -> Vec<Rational> {
    let rows: Vec<Vec<i64>> = rows
        .iter()
        .map(|r| r.split_whitespace().map(|t| t.parse().unwrap()).collect())
        .collect();
    let mut w = vec![int(0); model.problem.d()];
    for (j, weight) in weights.iter().enumerate() {
        let point: Vec<Rational> = rows.iter().map(|r| int(r[j])).collect();
        let i = model
            .problem
            .points()
            .iter()
            .position(|x| *x == point)
            .unwrap_or_else(|| panic!("{point:?} is not a support point"));
        w[i] += parse_rational(weight).unwrap();
    }
    w
}

pub fn repeat(weight: &str, n: usize) -> Vec<&str> {
    vec![weight; n]
}

/// Permutations of the support induced by swapping factors 1 and 2 and by
/// cycling all factors.
pub fn factor_relabelings(model: &CatalogModel) -> Vec<Permutation> {
    let points = model.problem.points();
    let induced = |map: &dyn Fn(&[Rational]) -> Vec<Rational>| {
        let image = points
            .iter()
            .map(|x| points.iter().position(|y| *y == map(x)).unwrap())
            .collect();
        Permutation::new(image).unwrap()
    };
    let swap = induced(&|x| {
        let mut y = x.to_vec();
        y.swap(0, 1);
        y
    });
    let cycle = induced(&|x| {
        let mut y = x.to_vec();
        y.rotate_left(1);
        y
    });
    vec![swap, cycle]
}

/// Problems on `{-1,1}^k` whose regressors are products of coordinates over
/// the given subsets. The uniform design has identity moment matrix and is
/// maximal D-optimal for every choice of distinct subsets.
pub fn walsh_model(k: usize, subsets: &[Vec<usize>]) -> CatalogModel {
    let points: Vec<Vec<Rational>> = (0..1usize << k)
        .map(|b| {
            (0..k)
                .map(|j| int(if b >> (k - 1 - j) & 1 == 1 { 1 } else { -1 }))
                .collect()
        })
        .collect();
    let regressors = points
        .iter()
        .map(|x| {
            subsets
                .iter()
                .map(|s| s.iter().map(|&j| x[j].clone()).product())
                .collect()
        })
        .collect();
    let problem = DesignProblem::new(points, regressors, 0).unwrap();
    let d = problem.d();
    CatalogModel::custom(problem, Design::uniform(d), Vec::new()).unwrap()
}
