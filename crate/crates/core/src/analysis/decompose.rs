use num_traits::{One, Signed, Zero};

use super::VodCatalog;
use crate::design::{self, support_of, Design, DesignProblem};
use crate::error::{Error, Result};
use crate::linalg::{Rational, RationalMatrix};
use crate::polytope::{vech_outer, OptimalPolytope};

/// Outcome of a minimality test. A non-minimal design comes with the index
/// of a vertex whose support is strictly contained in its support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Minimality {
    pub minimal: bool,
    pub witness: Option<usize>,
}

pub fn minimality_check(catalog: &VodCatalog, w: &[Rational]) -> Result<Minimality> {
    let poly = catalog.polytope();
    if !poly.contains(w) {
        return Err(Error::NotInPolytope);
    }
    let support = support_of(w);
    let (a, _) = poly.equality_basis();
    if a.select_columns(&support).rank() == support.len() {
        return Ok(Minimality {
            minimal: true,
            witness: None,
        });
    }
    let witness = catalog.info().iter().position(|info| {
        info.support.len() < support.len()
            && info
                .support
                .iter()
                .all(|i| support.binary_search(i).is_ok())
    });
    Ok(Minimality {
        minimal: false,
        witness,
    })
}

/// Walks from `x` along null directions of the columns of `a` on the current
/// support until those columns are independent. Every step zeroes at least
/// one coordinate and keeps `a x` fixed.
fn shrink_support(a: &RationalMatrix, mut x: Vec<Rational>) -> Vec<Rational> {
    loop {
        let support = support_of(&x);
        let null = a.select_columns(&support).nullspace_basis();
        if null.cols() == 0 {
            return x;
        }
        let mut z = null.column(0);
        if !z.iter().any(Signed::is_negative) {
            z.iter_mut().for_each(|v| *v = -v.clone());
        }
        let theta = support
            .iter()
            .zip(&z)
            .filter(|(_, zi)| zi.is_negative())
            .map(|(&i, zi)| &x[i] / -zi)
            .min()
            .expect("direction has a negative entry");
        for (&i, zi) in support.iter().zip(&z) {
            x[i] += &theta * zi;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionTerm {
    pub vertex: usize,
    pub coefficient: Rational,
}

/// Writes `w` as a convex combination of at most `t + 1` vertices.
pub fn caratheodory_decompose(
    catalog: &VodCatalog,
    w: &[Rational],
) -> Result<Vec<DecompositionTerm>> {
    peel(catalog.polytope(), w)?
        .into_iter()
        .map(|(v, coefficient)| {
            let vertex = catalog
                .index_of(&v)
                .ok_or_else(|| Error::InvalidDesign("vertex missing from the catalog".into()))?;
            Ok(DecompositionTerm {
                vertex,
                coefficient,
            })
        })
        .collect()
}

/// Vertex weights and coefficients of a decomposition of `w`, found by
/// repeatedly dropping to a vertex on the current support and removing the
/// largest multiple of it.
pub(crate) fn peel(
    poly: &OptimalPolytope,
    w: &[Rational],
) -> Result<Vec<(Vec<Rational>, Rational)>> {
    if !poly.contains(w) {
        return Err(Error::NotInPolytope);
    }
    let (a, _) = poly.equality_basis();
    let mut current = w.to_vec();
    let mut remaining = Rational::one();
    let mut terms = Vec::new();
    loop {
        let v = shrink_support(a, current.clone());
        let alpha = v
            .iter()
            .zip(&current)
            .filter(|(vi, _)| vi.is_positive())
            .map(|(vi, ci)| ci / vi)
            .min()
            .expect("vertex has nonempty support");
        if alpha >= Rational::one() {
            terms.push((v, remaining));
            return Ok(terms);
        }
        let rest = Rational::one() - &alpha;
        for (c, vi) in current.iter_mut().zip(&v) {
            *c = (&*c - &alpha * vi) / &rest;
        }
        terms.push((v, &remaining * &alpha));
        remaining *= rest;
    }
}

/// A design with the same information matrix whose support has independent
/// moment columns, hence at most `s` points when normalization is implied.
pub fn reduce_support(problem: &DesignProblem, design: &Design) -> Result<Design> {
    if design.len() != problem.d() {
        return Err(Error::DimensionMismatch("design length".into()));
    }
    let mut columns: Vec<Vec<Rational>> =
        problem.regressors().iter().map(|f| vech_outer(f)).collect();
    for c in &mut columns {
        c.push(Rational::one());
    }
    let a = RationalMatrix::from_columns(&columns)?;
    let reduced = Design::new(shrink_support(&a, design.weights().to_vec()))?;
    debug_assert_eq!(
        design::information_matrix(problem, &reduced).ok(),
        design::information_matrix(problem, design).ok()
    );
    Ok(reduced)
}

/// Sum of `coefficient * vertex` over the terms.
pub fn reconstruct(catalog: &VodCatalog, terms: &[DecompositionTerm]) -> Vec<Rational> {
    let mut w = vec![Rational::zero(); catalog.d()];
    for t in terms {
        for (wi, vi) in w.iter_mut().zip(catalog.vertex(t.vertex)) {
            *wi += &t.coefficient * vi;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::super::barycentric_design;
    use super::super::tests::catalog_for;
    use super::*;
    use crate::catalog::Family;
    use crate::linalg::{rat, RationalMatrix};

    #[test]
    fn vertices_are_minimal() {
        let (_, cat) = catalog_for(Family::Mem, 4, 0);
        for v in cat.vertices() {
            assert_eq!(
                minimality_check(&cat, v).unwrap(),
                Minimality {
                    minimal: true,
                    witness: None
                }
            );
        }
    }

    #[test]
    fn barycenter_is_not_minimal() {
        let (_, cat) = catalog_for(Family::Mem, 3, 0);
        let bary = barycentric_design(&cat).weights;
        let verdict = minimality_check(&cat, &bary).unwrap();
        assert!(!verdict.minimal);
        let witness = verdict.witness.unwrap();
        assert!(cat.info()[witness].support.len() < 8);
    }

    #[test]
    fn uniform_mem3_splits_in_halves() {
        let (_, cat) = catalog_for(Family::Mem, 3, 0);
        let terms = caratheodory_decompose(&cat, &vec![rat(1, 8); 8]).unwrap();
        assert_eq!(terms.len(), 2);
        assert!(terms.iter().all(|t| t.coefficient == rat(1, 2)));
        assert_eq!(reconstruct(&cat, &terms), vec![rat(1, 8); 8]);
    }

    #[test]
    fn vertex_decomposes_to_itself() {
        let (_, cat) = catalog_for(Family::Cbw, 3, 0);
        for j in 0..cat.len() {
            let terms = caratheodory_decompose(&cat, cat.vertex(j)).unwrap();
            assert_eq!(
                terms,
                vec![DecompositionTerm {
                    vertex: j,
                    coefficient: Rational::one()
                }]
            );
        }
    }

    #[test]
    fn uniform_cbw2_uses_at_most_three_terms() {
        let (_, cat) = catalog_for(Family::Cbw, 2, 0);
        let terms = caratheodory_decompose(&cat, &vec![rat(1, 4); 4]).unwrap();
        assert!(terms.len() <= 3);
        assert_eq!(reconstruct(&cat, &terms), vec![rat(1, 4); 4]);
    }

    #[test]
    fn outside_point_is_rejected() {
        let (_, cat) = catalog_for(Family::Mem, 3, 0);
        let mut w = vec![rat(1, 8); 8];
        w[0] = rat(1, 4);
        w[1] = rat(0, 1);
        assert!(matches!(
            caratheodory_decompose(&cat, &w),
            Err(Error::NotInPolytope)
        ));
    }

    #[test]
    fn reduce_support_preserves_moments() {
        let (model, _) = catalog_for(Family::Mem, 3, 0);
        let reduced = reduce_support(&model.problem, &model.maximal_design).unwrap();
        assert!(reduced.support().len() <= 7);
        let m = design::information_matrix(&model.problem, &reduced).unwrap();
        assert_eq!(*m.matrix(), RationalMatrix::identity(4));

        let mass = Design::point_mass(8, 3);
        assert_eq!(reduce_support(&model.problem, &mass).unwrap(), mass);
    }
}
