mod common;

use std::collections::BTreeSet;
use std::sync::OnceLock;

use proptest::prelude::*;

use common::walsh_model;
use vod_core::analysis::{
    caratheodory_decompose, efficient_round, exact_design_sizes, reconstruct, VodCatalog,
};
use vod_core::catalog::{CatalogModel, Family};
use vod_core::design::support_of;
use vod_core::linalg::{rat, Rational};
use vod_core::polytope::oracle::oracle_enumerate;
use vod_core::polytope::{DdOptions, InsertionOrder};
use vod_core::secondary::{optimize, Objective, OptimizeConfig, Parametrization, SecondaryProblem};

fn mem4() -> &'static (CatalogModel, VodCatalog) {
    static CELL: OnceLock<(CatalogModel, VodCatalog)> = OnceLock::new();
    CELL.get_or_init(|| common::catalog(Family::Mem, 4, 0))
}

fn int6() -> &'static (CatalogModel, VodCatalog) {
    static CELL: OnceLock<(CatalogModel, VodCatalog)> = OnceLock::new();
    CELL.get_or_init(|| common::catalog(Family::Int, 6, 0))
}

fn qwoi3() -> &'static (CatalogModel, VodCatalog) {
    static CELL: OnceLock<(CatalogModel, VodCatalog)> = OnceLock::new();
    CELL.get_or_init(|| common::catalog(Family::Qwoi, 3, 0))
}

fn walsh_subsets(k: usize) -> impl Strategy<Value = Vec<Vec<usize>>> {
    proptest::sample::subsequence(
        (0..1usize << k).collect::<Vec<_>>(),
        2..=(k + 3).min(1 << k),
    )
    .prop_map(move |masks| {
        masks
            .into_iter()
            .map(|m| (0..k).filter(|j| m >> j & 1 == 1).collect())
            .collect()
    })
}

fn convex_combination(cat: &VodCatalog, picks: &[(usize, u32)]) -> Vec<Rational> {
    let total: u32 = picks.iter().map(|p| p.1).sum();
    let mut w = vec![rat(0, 1); cat.d()];
    for &(j, c) in picks {
        for (wi, vi) in w.iter_mut().zip(cat.vertex(j % cat.len())) {
            *wi += vi * rat(c as i64, total as i64);
        }
    }
    w
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn dd_matches_oracle_on_walsh_problems((k, subsets) in (3usize..=4).prop_flat_map(|k| (Just(k), walsh_subsets(k)))) {
        let model = walsh_model(k, &subsets);
        let poly = common::polytope(&model);
        let dd = poly.enumerate_vertices(&DdOptions::default()).unwrap();
        let oracle = oracle_enumerate(&poly, 1_000_000).unwrap();
        prop_assert_eq!(&dd.vertices, &oracle.vertices);
        for v in &dd.vertices {
            let n = support_of(v).len();
            prop_assert!(poly.m() <= n && n <= poly.s());
        }
    }

    #[test]
    fn dd_is_independent_of_insertion_order(order in Just((0..16).collect::<Vec<usize>>()).prop_shuffle()) {
        let (_, cat) = mem4();
        let opts = DdOptions { order: InsertionOrder::Given(order), ..Default::default() };
        let list = cat.polytope().enumerate_vertices(&opts).unwrap();
        prop_assert_eq!(list.vertices.as_slice(), cat.vertices());
    }

    #[test]
    fn decomposition_reconstructs(picks in proptest::collection::vec((0usize..1000, 1u32..100), 1..8)) {
        for (_, cat) in [mem4(), int6(), qwoi3()] {
            let w = convex_combination(cat, &picks);
            let terms = caratheodory_decompose(cat, &w).unwrap();
            prop_assert!(terms.len() <= cat.polytope().t() + 1);
            prop_assert!(terms.iter().all(|t| t.coefficient > rat(0, 1)));
            prop_assert_eq!(reconstruct(cat, &terms), w);
        }
    }

    #[test]
    fn rounding_keeps_support_and_size(picks in proptest::collection::vec((0usize..1000, 1u32..100), 1..4), extra in 0u64..40) {
        let (_, cat) = mem4();
        let w = convex_combination(cat, &picks);
        let support = support_of(&w);
        let n = support.len() as u64 + extra;
        let counts = efficient_round(&w, n).unwrap();
        prop_assert_eq!(counts.iter().sum::<u64>(), n);
        let rounded: Vec<usize> = (0..counts.len()).filter(|&i| counts[i] > 0).collect();
        prop_assert_eq!(rounded, support);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn parametrizations_agree(r in proptest::collection::vec(0.3f64..=1.0, 16)) {
        let (model, cat) = mem4();
        let config = OptimizeConfig::default();
        let values: Vec<f64> = [Parametrization::Vertex, Parametrization::Reduced, Parametrization::Ambient]
            .into_iter()
            .map(|par| {
                let problem = SecondaryProblem {
                    polytope: cat.polytope(),
                    catalog: Some(cat),
                    objective: Objective::heteroskedastic_d(&model.problem, r.clone()).unwrap(),
                    parametrization: par,
                };
                let res = optimize(&problem, &config).unwrap();
                assert!(res.gap <= config.tol, "{} gap {}", par.name(), res.gap);
                res.value
            })
            .collect();
        for v in &values[1..] {
            prop_assert!((v - values[0]).abs() <= 10.0 * config.tol, "{values:?}");
        }
    }
}

#[test]
fn orbits_are_closed_under_generators() {
    for (model, cat) in [mem4(), int6(), qwoi3()] {
        let part = cat.orbits().unwrap();
        for orbit in &part.orbits {
            for g in &model.generators {
                let image = g.apply(cat.vertex(orbit.representative));
                let j = cat.index_of(&image).expect("image is a vertex");
                assert_eq!(part.orbit_of[j], part.orbit_of[orbit.representative]);
            }
        }
        assert_eq!(
            part.orbits.iter().map(|o| o.size()).sum::<usize>(),
            cat.len()
        );
    }
}

#[test]
fn achievable_sizes_are_closed_under_addition() {
    let n_max = 160;
    for (_, cat) in [mem4(), int6(), qwoi3()] {
        let s = exact_design_sizes(cat, n_max);
        let set: BTreeSet<u64> = s.sizes.iter().copied().collect();
        for info in cat.info() {
            assert!(info.size > n_max || set.contains(&info.size));
        }
        for &a in &s.sizes {
            for &b in &s.sizes {
                if a + b <= n_max {
                    assert!(set.contains(&(a + b)), "{a} + {b}");
                }
            }
        }
        for (n, r) in &s.realizations {
            let total: u64 = r.parts.iter().map(|&(j, c)| c * cat.info()[j].size).sum();
            assert_eq!(total, *n);
        }
    }
}
