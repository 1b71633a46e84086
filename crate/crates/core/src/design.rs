//! Designs, information matrices, Kiefer criteria and the equivalence-theorem
//! check for maximal optimal designs.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, Rational, RationalMatrix};

/// A finite optimal design problem: the maximum optimal support `Y` with its
/// regressors, plus optional extra candidate points used only when verifying
/// optimality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DesignProblem {
    k: usize,
    m: usize,
    p: i64,
    points: Vec<Vec<Rational>>,
    regressors: Vec<Vec<Rational>>,
    extra_points: Vec<Vec<Rational>>,
    extra_regressors: Vec<Vec<Rational>>,
}

impl DesignProblem {
    pub fn new(points: Vec<Vec<Rational>>, regressors: Vec<Vec<Rational>>, p: i64) -> Result<Self> {
        if p > 0 {
            return Err(Error::Unsupported(format!(
                "criterion exponent p = {p} must be <= 0"
            )));
        }
        if points.is_empty() {
            return Err(Error::DimensionMismatch("empty support".into()));
        }
        if points.len() != regressors.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} points but {} regressor vectors",
                points.len(),
                regressors.len()
            )));
        }
        let k = points[0].len();
        let m = regressors[0].len();
        if m == 0 || points.iter().any(|x| x.len() != k) || regressors.iter().any(|f| f.len() != m)
        {
            return Err(Error::DimensionMismatch(
                "inconsistent point or regressor lengths".into(),
            ));
        }
        if points.len() < m {
            return Err(Error::DimensionMismatch(format!(
                "support size {} is smaller than the parameter count {m}",
                points.len()
            )));
        }
        let f = RationalMatrix::from_rows(&regressors)?;
        if f.rank() < m {
            return Err(Error::InvalidDesign(
                "regressors on the support do not span R^m".into(),
            ));
        }
        Ok(Self {
            k,
            m,
            p,
            points,
            regressors,
            extra_points: Vec::new(),
            extra_regressors: Vec::new(),
        })
    }

    /// Adds candidate points outside the support; they only enter verification.
    pub fn with_extra_candidates(
        mut self,
        points: Vec<Vec<Rational>>,
        regressors: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        if points.len() != regressors.len()
            || points.iter().any(|x| x.len() != self.k)
            || regressors.iter().any(|f| f.len() != self.m)
        {
            return Err(Error::DimensionMismatch(
                "extra candidates do not match the model".into(),
            ));
        }
        self.extra_points = points;
        self.extra_regressors = regressors;
        Ok(self)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> i64 {
        self.p
    }

    /// Size `d` of the maximum optimal support.
    pub fn d(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Vec<Rational>] {
        &self.points
    }

    pub fn regressors(&self) -> &[Vec<Rational>] {
        &self.regressors
    }

    pub fn extra_points(&self) -> &[Vec<Rational>] {
        &self.extra_points
    }

    pub fn extra_regressors(&self) -> &[Vec<Rational>] {
        &self.extra_regressors
    }

    /// Support points followed by extra candidates.
    pub fn candidate_count(&self) -> usize {
        self.points.len() + self.extra_points.len()
    }

    fn candidate_regressor(&self, i: usize) -> &[Rational] {
        if i < self.regressors.len() {
            &self.regressors[i]
        } else {
            &self.extra_regressors[i - self.regressors.len()]
        }
    }
}

/// Weights over the support `Y`; nonnegative and summing to one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Design {
    weights: Vec<Rational>,
}

impl Design {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDesign("no weights".into()));
        }
        if weights.iter().any(Signed::is_negative) {
            return Err(Error::InvalidDesign("negative weight".into()));
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidDesign(format!(
                "weights sum to {}",
                linalg::format_rational(&total)
            )));
        }
        Ok(Self { weights })
    }

    pub fn uniform(d: usize) -> Self {
        let w = linalg::rat(1, d as i64);
        Self {
            weights: vec![w; d],
        }
    }

    /// Uniform on the given indices of a length-`d` support.
    pub fn uniform_on(d: usize, support: &[usize]) -> Result<Self> {
        let mut weights = vec![Rational::zero(); d];
        let w = linalg::rat(1, support.len() as i64);
        for &i in support {
            if i >= d {
                return Err(Error::DimensionMismatch(format!(
                    "index {i} outside support of size {d}"
                )));
            }
            weights[i] = w.clone();
        }
        Self::new(weights)
    }

    pub fn point_mass(d: usize, i: usize) -> Self {
        let mut weights = vec![Rational::zero(); d];
        weights[i] = Rational::one();
        Self { weights }
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<Rational> {
        self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Indices carrying positive weight.
    pub fn support(&self) -> Vec<usize> {
        support_of(&self.weights)
    }
}

pub fn support_of(w: &[Rational]) -> Vec<usize> {
    w.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, _)| i)
        .collect()
}

/// Normalized information matrix; symmetric positive semidefinite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InformationMatrix(RationalMatrix);

impl InformationMatrix {
    pub fn new(m: RationalMatrix) -> Result<Self> {
        if !m.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &RationalMatrix {
        &self.0
    }

    pub fn is_singular(&self) -> bool {
        self.0.rank() < self.0.rows()
    }

    pub fn is_psd_by_minors(&self) -> Result<bool> {
        self.0.leading_minors_nonnegative()
    }
}

/// `sum_i w_i f_i f_i'` for arbitrary (not necessarily normalized) weights.
pub fn moment_matrix(regressors: &[Vec<Rational>], weights: &[Rational]) -> Result<RationalMatrix> {
    if regressors.len() != weights.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} regressors",
            weights.len(),
            regressors.len()
        )));
    }
    let m = regressors.first().map_or(0, Vec::len);
    let mut out = RationalMatrix::zeros(m, m);
    for (f, w) in regressors.iter().zip(weights) {
        if w.is_zero() {
            continue;
        }
        for a in 0..m {
            if f[a].is_zero() {
                continue;
            }
            let wa = w * &f[a];
            for b in a..m {
                if !f[b].is_zero() {
                    out[(a, b)] += &wa * &f[b];
                }
            }
        }
    }
    for a in 0..m {
        for b in 0..a {
            out[(a, b)] = out[(b, a)].clone();
        }
    }
    Ok(out)
}

pub fn information_matrix(problem: &DesignProblem, design: &Design) -> Result<InformationMatrix> {
    if design.len() != problem.d() {
        return Err(Error::DimensionMismatch(format!(
            "design of length {} for a support of size {}",
            design.len(),
            problem.d()
        )));
    }
    Ok(InformationMatrix(moment_matrix(
        problem.regressors(),
        design.weights(),
    )?))
}

/// Value of a Kiefer criterion: the exact rational core (`det M` for `p = 0`,
/// `tr M^p` for `p < 0`) and the floating radical.
#[derive(Clone, Debug, PartialEq)]
pub struct CriterionValue {
    pub core: Option<Rational>,
    pub value: f64,
}

pub fn criterion_value(p: i64, m: &InformationMatrix) -> Result<CriterionValue> {
    let mat = m.matrix();
    let size = mat.rows() as f64;
    if m.is_singular() {
        return Ok(CriterionValue {
            core: None,
            value: 0.0,
        });
    }
    if p == 0 {
        let det = mat.determinant()?;
        let value = linalg::to_f64(&det).powf(1.0 / size);
        Ok(CriterionValue {
            core: Some(det),
            value,
        })
    } else {
        let tr = mat.pow(p)?.trace()?;
        let value = (linalg::to_f64(&tr) / size).powf(1.0 / p as f64);
        Ok(CriterionValue {
            core: Some(tr),
            value,
        })
    }
}

/// Result of the equivalence-theorem check. Indices refer to the candidate
/// list: support points `0..d`, then extra candidates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    /// `tr(M^p)`.
    pub threshold: Rational,
    /// `f'(x) M^{p-1} f(x)` per candidate.
    pub variance: Vec<Rational>,
    pub equality: Vec<usize>,
    pub strict: Vec<usize>,
    pub violations: Vec<usize>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that `design` is a maximal optimal design: the variance function
/// equals `tr(M^p)` on its support and is strictly below it at every other
/// candidate. Comparisons are exact.
pub fn verify_maximal_optimal(problem: &DesignProblem, design: &Design) -> Result<Verdict> {
    let info = information_matrix(problem, design)?;
    if info.is_singular() {
        return Err(Error::Singular);
    }
    let p = problem.p();
    let mat = info.matrix();
    let kernel = mat.pow(p - 1)?;
    let threshold = mat.pow(p)?.trace()?;
    let variance: Vec<Rational> = (0..problem.candidate_count())
        .into_par_iter()
        .map(|i| kernel.quad_form(problem.candidate_regressor(i)))
        .collect::<Result<_>>()?;

    let mut equality = Vec::new();
    let mut strict = Vec::new();
    let mut violations = Vec::new();
    for (i, v) in variance.iter().enumerate() {
        let in_support = i < problem.d() && !design.weights()[i].is_zero();
        if *v == threshold {
            equality.push(i);
            if !in_support {
                violations.push(i);
            }
        } else if *v < threshold {
            strict.push(i);
            if in_support {
                violations.push(i);
            }
        } else {
            violations.push(i);
        }
    }
    Ok(Verdict {
        threshold,
        variance,
        equality,
        strict,
        violations,
    })
}

/// For `w >= 0` with `M(w) = M_*`, confirms that `1'w = 1` follows, via the
/// trace identity `tr(M_*^p) = sum_i w_i f_i' M_*^{p-1} f_i`. Returns `None`
/// when `w` does not satisfy the moment equations.
pub fn normalization_identity_check(
    problem: &DesignProblem,
    optimal: &InformationMatrix,
    w: &[Rational],
) -> Result<Option<bool>> {
    if w.len() != problem.d() {
        return Err(Error::DimensionMismatch("weight vector length".into()));
    }
    if w.iter().any(Signed::is_negative) {
        return Ok(None);
    }
    if &moment_matrix(problem.regressors(), w)? != optimal.matrix() {
        return Ok(None);
    }
    let p = problem.p();
    let kernel = optimal.matrix().pow(p - 1)?;
    let threshold = optimal.matrix().pow(p)?.trace()?;
    let mut weighted = Rational::zero();
    for (f, wi) in problem.regressors().iter().zip(w) {
        if !wi.is_zero() {
            weighted += wi * kernel.quad_form(f)?;
        }
    }
    let total: Rational = w.iter().sum();
    Ok(Some(weighted == threshold && total.is_one()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{int, rat};

    fn cube(k: usize) -> Vec<Vec<Rational>> {
        (0..1usize << k)
            .map(|bits| {
                (0..k)
                    .map(|j| int(if bits >> (k - 1 - j) & 1 == 1 { 1 } else { -1 }))
                    .collect()
            })
            .collect()
    }

    fn mem3() -> DesignProblem {
        let pts = cube(3);
        let regs = pts
            .iter()
            .map(|x| std::iter::once(int(1)).chain(x.iter().cloned()).collect())
            .collect();
        DesignProblem::new(pts, regs, 0).unwrap()
    }

    #[test]
    fn uniform_cube_information_is_identity() {
        let prob = mem3();
        let info = information_matrix(&prob, &Design::uniform(8)).unwrap();
        assert_eq!(info.matrix(), &RationalMatrix::identity(4));
        assert!(info.is_psd_by_minors().unwrap());
    }

    #[test]
    fn point_mass_information_is_outer_product() {
        let prob = mem3();
        let info = information_matrix(&prob, &Design::point_mass(8, 0)).unwrap();
        let f = RationalMatrix::column_vector(&prob.regressors()[0]);
        assert_eq!(info.matrix(), &f.mul(&f.transpose()).unwrap());
        assert!(info.is_singular());
    }

    #[test]
    fn criterion_values_at_identity() {
        let info = InformationMatrix::new(RationalMatrix::identity(4)).unwrap();
        let d = criterion_value(0, &info).unwrap();
        assert_eq!(d.core, Some(int(1)));
        assert_eq!(d.value, 1.0);
        let a = criterion_value(-1, &info).unwrap();
        assert_eq!(a.core, Some(int(4)));
        assert!((a.value - 1.0).abs() < 1e-15);
        let sing = InformationMatrix::new(RationalMatrix::zeros(2, 2)).unwrap();
        assert_eq!(criterion_value(0, &sing).unwrap().value, 0.0);
    }

    #[test]
    fn compound_symmetric_determinant() {
        // det(a(I+J)) = a^6 * 7 for the 6x6 case
        let a = rat(2, 7);
        let m = RationalMatrix::identity(6)
            .add(&RationalMatrix::ones(6))
            .unwrap()
            .scale(&a);
        let info = InformationMatrix::new(m).unwrap();
        let core = criterion_value(0, &info).unwrap().core.unwrap();
        let mut expected = int(7);
        for _ in 0..6 {
            expected *= &a;
        }
        assert_eq!(core, expected);
        assert_eq!(core, rat(64, 16_807));
    }

    #[test]
    fn uniform_cube_passes_verification() {
        let prob = mem3();
        let verdict = verify_maximal_optimal(&prob, &Design::uniform(8)).unwrap();
        assert!(verdict.passed());
        assert_eq!(verdict.threshold, int(4));
        assert!(verdict.variance.iter().all(|v| *v == int(4)));
        assert_eq!(verdict.equality, (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn point_mass_is_singular() {
        assert!(matches!(
            verify_maximal_optimal(&mem3(), &Design::point_mass(8, 0)),
            Err(Error::Singular)
        ));
    }

    #[test]
    fn half_fraction_is_optimal_but_not_maximal() {
        // x1*x2*x3 = -1 half: optimal, but the other half has v = c as well
        let prob = mem3();
        let d = Design::uniform_on(8, &[0, 3, 5, 6]).unwrap();
        let verdict = verify_maximal_optimal(&prob, &d).unwrap();
        assert!(!verdict.passed());
        assert_eq!(verdict.violations, vec![1, 2, 4, 7]);
    }

    #[test]
    fn normalization_identity() {
        let prob = mem3();
        let mstar = InformationMatrix::new(RationalMatrix::identity(4)).unwrap();
        let w = Design::uniform(8).into_weights();
        assert_eq!(
            normalization_identity_check(&prob, &mstar, &w).unwrap(),
            Some(true)
        );
        let doubled: Vec<_> = w.iter().map(|x| x * int(2)).collect();
        assert_eq!(
            normalization_identity_check(&prob, &mstar, &doubled).unwrap(),
            None
        );
    }

    #[test]
    fn design_validation() {
        assert!(Design::new(vec![rat(1, 2), rat(1, 3)]).is_err());
        assert!(Design::new(vec![rat(3, 2), rat(-1, 2)]).is_err());
        assert_eq!(
            Design::new(vec![rat(1, 2), int(0), rat(1, 2)])
                .unwrap()
                .support(),
            vec![0, 2]
        );
    }

    #[test]
    fn information_matrix_is_linear() {
        let prob = mem3();
        let a = Design::uniform_on(8, &[0, 3, 5, 6]).unwrap();
        let b = Design::point_mass(8, 1);
        let alpha = rat(2, 5);
        let mix: Vec<_> = a
            .weights()
            .iter()
            .zip(b.weights())
            .map(|(x, y)| &alpha * x + (int(1) - &alpha) * y)
            .collect();
        let lhs = information_matrix(&prob, &Design::new(mix).unwrap()).unwrap();
        let rhs = information_matrix(&prob, &a)
            .unwrap()
            .matrix()
            .scale(&alpha)
            .add(
                &information_matrix(&prob, &b)
                    .unwrap()
                    .matrix()
                    .scale(&(int(1) - &alpha)),
            )
            .unwrap();
        assert_eq!(lhs.matrix(), &rhs);
    }
}
