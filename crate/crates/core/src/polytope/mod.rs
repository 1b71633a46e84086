//! The polytope of optimal weights `P = {w >= 0 : A w = b}` and its vertices.
//!
//! Column `i` of `A` is `vech(f_i f_i')` and `b = vech(M_*)`. The polytope has
//! dimension `t = d - rank(A)`; with a rational null-space basis `U` of `A`
//! and the interior point `w~` (the maximal design), `w = U tau + w~` maps the
//! full-dimensional system `U tau >= -w~` onto `P`. Vertex enumeration runs
//! on that reduced system.

pub mod dd;
pub mod oracle;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::design::{self, Design, DesignProblem};
use crate::error::{Error, Result};
use crate::linalg::{self, Rational, RationalMatrix};

pub use dd::{DdOptions, DdStats, InsertionOrder};

/// Half-vectorization: the lower triangle in column-major order.
pub fn vech(s: &RationalMatrix) -> Result<Vec<Rational>> {
    if !s.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let m = s.rows();
    let mut out = Vec::with_capacity(m * (m + 1) / 2);
    for j in 0..m {
        for i in j..m {
            out.push(s[(i, j)].clone());
        }
    }
    Ok(out)
}

/// `vech(f f')` without materializing the outer product.
pub fn vech_outer(f: &[Rational]) -> Vec<Rational> {
    let m = f.len();
    let mut out = Vec::with_capacity(m * (m + 1) / 2);
    for j in 0..m {
        for i in j..m {
            out.push(&f[i] * &f[j]);
        }
    }
    out
}

/// H-representation of the polytope of optimal weights together with its
/// dimension data and reduction.
#[derive(Clone, Debug)]
pub struct OptimalPolytope {
    a: RationalMatrix,
    b: Vec<Rational>,
    m: usize,
    s: usize,
    u: RationalMatrix,
    w_tilde: Vec<Rational>,
    basis_a: RationalMatrix,
    basis_b: Vec<Rational>,
}

/// Dimension summary, serialized into reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dimensions {
    pub d: usize,
    pub m: usize,
    pub q: usize,
    pub s: usize,
    pub t: usize,
}

impl OptimalPolytope {
    /// Builds `(A, b)` after checking that `maximal` passes the equivalence
    /// theorem for `problem`.
    pub fn build(problem: &DesignProblem, maximal: &Design) -> Result<Self> {
        if maximal.weights().iter().any(Zero::is_zero) {
            return Err(Error::VerificationFailed(
                "maximal design has zero weights".into(),
            ));
        }
        let verdict = design::verify_maximal_optimal(problem, maximal).map_err(|e| match e {
            Error::Singular => Error::VerificationFailed("singular information matrix".into()),
            other => other,
        })?;
        if !verdict.passed() {
            return Err(Error::VerificationFailed(format!(
                "violations at {:?}",
                verdict.violations
            )));
        }
        Self::build_unchecked(problem, maximal)
    }

    pub(crate) fn build_unchecked(problem: &DesignProblem, maximal: &Design) -> Result<Self> {
        let columns: Vec<Vec<Rational>> =
            problem.regressors().iter().map(|f| vech_outer(f)).collect();
        let a = RationalMatrix::from_columns(&columns)?;
        let m_star = design::information_matrix(problem, maximal)?;
        let b = vech(m_star.matrix())?;
        let u = a.nullspace_basis();
        let s = a.cols() - u.cols();

        let aug_rows: Vec<Vec<Rational>> = (0..a.rows())
            .map(|i| {
                let mut r = a.row(i).to_vec();
                r.push(b[i].clone());
                r
            })
            .collect();
        let aug = RationalMatrix::from_rows(&aug_rows)?;
        let (reduced, pivots) = aug.rref();
        let d = a.cols();
        let basis_a = reduced
            .select_rows(&(0..pivots.len()).collect::<Vec<_>>())
            .select_columns(&(0..d).collect::<Vec<_>>());
        let basis_b = (0..pivots.len()).map(|i| reduced[(i, d)].clone()).collect();
        Ok(Self {
            a,
            b,
            m: problem.m(),
            s,
            u,
            w_tilde: maximal.weights().to_vec(),
            basis_a,
            basis_b,
        })
    }

    pub fn a(&self) -> &RationalMatrix {
        &self.a
    }

    pub fn b(&self) -> &[Rational] {
        &self.b
    }

    pub fn d(&self) -> usize {
        self.a.cols()
    }

    pub fn q(&self) -> usize {
        self.a.rows()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn t(&self) -> usize {
        self.u.cols()
    }

    pub fn dimensions(&self) -> Dimensions {
        Dimensions {
            d: self.d(),
            m: self.m,
            q: self.q(),
            s: self.s,
            t: self.t(),
        }
    }

    /// Rational null-space basis of `A`, `d x t`.
    pub fn null_basis(&self) -> &RationalMatrix {
        &self.u
    }

    pub fn interior_point(&self) -> &[Rational] {
        &self.w_tilde
    }

    /// `s` independent equality rows equivalent to `A w = b`.
    pub fn equality_basis(&self) -> (&RationalMatrix, &[Rational]) {
        (&self.basis_a, &self.basis_b)
    }

    /// `1'` lies in the row space of `A`, so normalization is implied by the
    /// moment equations.
    pub fn normalization_implied(&self) -> bool {
        let ones = RationalMatrix::from_rows(&[vec![linalg::int(1); self.d()]]).expect("row");
        self.a
            .vstack(&ones)
            .map(|s| s.rank() == self.s)
            .unwrap_or(false)
    }

    /// Exact test of `w >= 0` and `A w = b`.
    pub fn contains(&self, w: &[Rational]) -> bool {
        w.len() == self.d()
            && w.iter().all(|x| !x.is_negative())
            && self.a.mul_vec(w).map(|aw| aw == self.b).unwrap_or(false)
    }

    pub fn reduce(&self) -> Reduction {
        if self.t() == 0 {
            Reduction::Trivial(self.w_tilde.clone())
        } else {
            Reduction::Full(ReducedSystem {
                u: self.u.clone(),
                w_tilde: self.w_tilde.clone(),
            })
        }
    }

    /// All vertices by double description on the reduced system.
    pub fn enumerate_vertices(&self, opts: &DdOptions) -> Result<VertexList> {
        let sys = match self.reduce() {
            Reduction::Trivial(w) => {
                return Ok(VertexList {
                    vertices: vec![w],
                    stats: DdStats::default(),
                })
            }
            Reduction::Full(sys) => sys,
        };
        let (rows, scales) = sys.integer_rows();
        let (rays, stats) = dd::extreme_rays(&rows, opts)?;
        let mut vertices = Vec::with_capacity(rays.len());
        for ray in rays {
            let lambda = &ray[0];
            if !lambda.is_positive() {
                return Err(Error::DimensionMismatch(
                    "reduced system is unbounded; 1' is not in the row space of A".into(),
                ));
            }
            let v: Vec<Rational> = rows
                .iter()
                .zip(&scales)
                .map(|(row, c)| {
                    let slack: BigInt = row.iter().zip(&ray).map(|(x, y)| x * y).sum();
                    Rational::from_integer(slack) / (c * Rational::from_integer(lambda.clone()))
                })
                .collect();
            debug_assert!(self.contains(&v));
            vertices.push(v);
        }
        vertices.sort();
        Ok(VertexList { vertices, stats })
    }
}

/// Outcome of reducing the polytope to full dimension.
#[derive(Clone, Debug)]
pub enum Reduction {
    /// `t = 0`: the optimal design is unique.
    Trivial(Vec<Rational>),
    Full(ReducedSystem),
}

/// `{tau in R^t : U tau >= -w~}`: `d` inequalities in `t` variables with the
/// origin strictly inside.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    pub u: RationalMatrix,
    pub w_tilde: Vec<Rational>,
}

impl ReducedSystem {
    pub fn dim(&self) -> usize {
        self.u.cols()
    }

    pub fn inequality_count(&self) -> usize {
        self.u.rows()
    }

    /// `w = U tau + w~`.
    pub fn lift(&self, tau: &[Rational]) -> Result<Vec<Rational>> {
        let ut = self.u.mul_vec(tau)?;
        Ok(ut.iter().zip(&self.w_tilde).map(|(a, b)| a + b).collect())
    }

    pub fn contains(&self, tau: &[Rational]) -> bool {
        self.lift(tau)
            .map(|w| w.iter().all(|x| !x.is_negative()))
            .unwrap_or(false)
    }

    /// Homogenized rows `(w~_i, U_i)` scaled to primitive integers, with the
    /// positive scale factor applied to each.
    pub fn integer_rows(&self) -> (Vec<Vec<BigInt>>, Vec<Rational>) {
        let mut rows = Vec::with_capacity(self.u.rows());
        let mut scales = Vec::with_capacity(self.u.rows());
        for i in 0..self.u.rows() {
            let mut r = vec![self.w_tilde[i].clone()];
            r.extend_from_slice(self.u.row(i));
            let ints = dd::primitive(&r);
            let j = r.iter().position(|x| !x.is_zero()).expect("w~ > 0");
            scales.push(Rational::from_integer(ints[j].clone()) / &r[j]);
            rows.push(ints);
        }
        (rows, scales)
    }
}

/// Vertices of the polytope of optimal weights in lexicographic order.
#[derive(Clone, Debug)]
pub struct VertexList {
    pub vertices: Vec<Vec<Rational>>,
    pub stats: DdStats,
}

impl VertexList {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}
