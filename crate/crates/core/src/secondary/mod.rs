//! Secondary criteria over the polytope of optimal weights.
//!
//! The feasible region stays exact: iterates are convex combinations, with
//! float coefficients, of exact rational vertices. Only the objective and the
//! coefficients are floating point. Away-step Frank-Wolfe with an exact
//! linear minimization oracle drives the search; the Frank-Wolfe gap is the
//! optimality certificate.

mod lp;
mod objective;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;
use rayon::prelude::*;

use crate::analysis::{decompose::peel, VodCatalog};
use crate::error::{Error, Result};
use crate::linalg::{to_f64, Rational, RationalMatrix};
use crate::polytope::OptimalPolytope;

pub use lp::ExactLp;
pub use objective::{entropy, max_norm, Objective, Sense};

/// How the feasible set is parametrized for the linear subproblem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parametrization {
    /// `w` itself, with `A w = b, w >= 0`.
    Ambient,
    /// `w = U tau + w~` with `U tau >= -w~`.
    Reduced,
    /// `w = sum_j a_j v_j` over the enumerated vertices.
    Vertex,
}

impl Parametrization {
    /// Vertex form for at most ten thousand vertices, reduced form otherwise.
    pub fn default_for(vertex_count: Option<usize>) -> Self {
        match vertex_count {
            Some(ell) if ell <= 10_000 => Parametrization::Vertex,
            _ => Parametrization::Reduced,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Parametrization::Ambient => "ambient",
            Parametrization::Reduced => "reduced",
            Parametrization::Vertex => "vertex",
        }
    }
}

impl std::str::FromStr for Parametrization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ambient" => Ok(Parametrization::Ambient),
            "reduced" => Ok(Parametrization::Reduced),
            "vertex" => Ok(Parametrization::Vertex),
            other => Err(Error::Unsupported(format!(
                "unknown parametrization {other:?}"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptimizeConfig {
    pub max_iter: usize,
    pub tol: f64,
    /// Exact starting design; defaults to the maximal design (ambient and
    /// reduced) or the barycenter (vertex form).
    pub start: Option<Vec<Rational>>,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            max_iter: 100_000,
            tol: 1e-8,
            start: None,
        }
    }
}

pub struct SecondaryProblem<'a> {
    pub polytope: &'a OptimalPolytope,
    pub catalog: Option<&'a VodCatalog>,
    pub objective: Objective,
    pub parametrization: Parametrization,
}

#[derive(Clone, Debug)]
pub struct OptimizeResult {
    pub weights: Vec<f64>,
    /// Criterion value in its own sense.
    pub value: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    pub parametrization: Parametrization,
    /// Active vertices and their coefficients.
    pub atoms: Vec<(Vec<Rational>, f64)>,
}

impl OptimizeResult {
    /// Exact design obtained by rounding the coefficients to rationals and
    /// renormalizing; it lies in the polytope by construction.
    pub fn snapped(&self) -> Vec<Rational> {
        let scale = BigInt::from(1u64 << 40);
        let coeffs: Vec<Rational> = self
            .atoms
            .iter()
            .map(|(_, a)| {
                let n = BigInt::from((a * (1u64 << 40) as f64).round().max(0.0) as i64);
                Rational::new(n, scale.clone())
            })
            .collect();
        let total: Rational = coeffs.iter().sum();
        let d = self.weights.len();
        let mut w = vec![Rational::zero(); d];
        for ((v, _), c) in self.atoms.iter().zip(&coeffs) {
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi += c * vi / &total;
            }
        }
        w
    }
}

struct Atom {
    exact: Vec<Rational>,
    float: Vec<f64>,
}

enum Oracle<'a> {
    Vertex {
        atoms: Vec<Vec<f64>>,
        catalog: &'a VodCatalog,
    },
    Ambient(ExactLp),
    Reduced {
        lp: ExactLp,
        u: Vec<Vec<f64>>,
        left: RationalMatrix,
    },
}

impl Oracle<'_> {
    /// A vertex minimizing `g . w`.
    fn minimize(&mut self, g: &[f64]) -> Result<Vec<Rational>> {
        match self {
            Oracle::Vertex { atoms, catalog } => {
                let scores: Vec<f64> = atoms.par_iter().map(|v| dot(g, v)).collect();
                let best = (0..scores.len())
                    .min_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)))
                    .expect("nonempty");
                Ok(catalog.vertex(best).to_vec())
            }
            Oracle::Ambient(lp) => lp.minimize(&integer_costs(g)),
            Oracle::Reduced { lp, u, left } => {
                // the cost on tau is U'g; tau = L (w - w~) turns it back into a
                // cost on w
                let t = left.rows();
                let g_tau: Vec<f64> = (0..t)
                    .map(|j| u.iter().zip(g).map(|(row, gi)| row[j] * gi).sum())
                    .collect();
                let c_tau = integer_costs(&g_tau);
                let c_w: Vec<Rational> = (0..left.cols())
                    .map(|i| (0..t).map(|j| &c_tau[j] * &left[(j, i)]).sum())
                    .collect();
                lp.minimize(&c_w)
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Integer costs proportional to `g` up to 2^-50 relative precision.
fn integer_costs(g: &[f64]) -> Vec<Rational> {
    let scale = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    g.iter()
        .map(|&x| {
            let v = if scale > 0.0 {
                (x / scale * (1u64 << 50) as f64).round()
            } else {
                0.0
            };
            Rational::from_integer(BigInt::from(v as i64))
        })
        .collect()
}

/// A left inverse of the null basis `U`: the inverse of an invertible row
/// block, padded with zero columns.
fn left_inverse(u: &RationalMatrix) -> Result<RationalMatrix> {
    let (_, rows) = u.transpose().rref();
    let block = u.select_rows(&rows).inverse()?;
    let mut left = RationalMatrix::zeros(u.cols(), u.rows());
    for (k, &r) in rows.iter().enumerate() {
        for j in 0..u.cols() {
            left[(j, r)] = block[(j, k)].clone();
        }
    }
    Ok(left)
}

/// Minimizes `f(x + gamma d)` on `[0, gamma_max]` for convex `f` by
/// bisection on the directional derivative.
fn line_search(objective: &Objective, x: &[f64], d: &[f64], gamma_max: f64) -> f64 {
    let slope = |gamma: f64| -> f64 {
        let y: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + gamma * b).collect();
        objective
            .convex(&y)
            .map_or(f64::INFINITY, |(_, g)| dot(&g, d))
    };
    if slope(gamma_max) <= 0.0 {
        return gamma_max;
    }
    let (mut lo, mut hi) = (0.0, gamma_max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

pub fn optimize(problem: &SecondaryProblem<'_>, config: &OptimizeConfig) -> Result<OptimizeResult> {
    let poly = problem.polytope;
    let d = poly.d();
    let objective = &problem.objective;
    let mut oracle = match problem.parametrization {
        Parametrization::Vertex => {
            let catalog = problem.catalog.ok_or_else(|| {
                Error::Unsupported("vertex parametrization needs the enumerated vertices".into())
            })?;
            let atoms = catalog
                .vertices()
                .iter()
                .map(|v| v.iter().map(to_f64).collect())
                .collect();
            Oracle::Vertex { atoms, catalog }
        }
        Parametrization::Ambient => {
            let (a, b) = poly.equality_basis();
            Oracle::Ambient(ExactLp::new(a, b)?)
        }
        Parametrization::Reduced => {
            let (a, b) = poly.equality_basis();
            let u_exact = poly.null_basis();
            let u = (0..d)
                .map(|i| u_exact.row(i).iter().map(to_f64).collect())
                .collect();
            Oracle::Reduced {
                lp: ExactLp::new(a, b)?,
                u,
                left: left_inverse(u_exact)?,
            }
        }
    };
    if let Objective::Linear(c) | Objective::HeteroskedasticD { r: c, .. } = objective {
        if c.len() != d {
            return Err(Error::DimensionMismatch("objective length".into()));
        }
    }

    // starting active set
    let initial: Vec<(Vec<Rational>, Rational)> =
        match (&config.start, problem.parametrization, problem.catalog) {
            (Some(w), _, _) => {
                if w.len() != d || !poly.contains(w) {
                    return Err(Error::InfeasibleStart(
                        "start is not in the polytope".into(),
                    ));
                }
                peel(poly, w)?
            }
            (None, Parametrization::Vertex, Some(catalog)) => {
                let share = Rational::new(1.into(), BigInt::from(catalog.len()));
                catalog
                    .vertices()
                    .iter()
                    .map(|v| (v.clone(), share.clone()))
                    .collect()
            }
            (None, _, _) => peel(poly, poly.interior_point())?,
        };
    let mut atoms: Vec<Atom> = Vec::new();
    let mut index: HashMap<Vec<Rational>, usize> = HashMap::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut intern = |v: Vec<Rational>, atoms: &mut Vec<Atom>, alpha: &mut Vec<f64>| -> usize {
        *index.entry(v.clone()).or_insert_with(|| {
            atoms.push(Atom {
                float: v.iter().map(to_f64).collect(),
                exact: v,
            });
            alpha.push(0.0);
            atoms.len() - 1
        })
    };
    for (v, c) in initial {
        let i = intern(v, &mut atoms, &mut alpha);
        alpha[i] += to_f64(&c);
    }
    let current = |atoms: &[Atom], alpha: &[f64]| -> Vec<f64> {
        let mut x = vec![0.0; d];
        for (a, &c) in atoms.iter().zip(alpha) {
            if c > 0.0 {
                x.iter_mut()
                    .zip(&a.float)
                    .for_each(|(xi, vi)| *xi += c * vi);
            }
        }
        x
    };

    let mut x = current(&atoms, &alpha);
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    while iterations < config.max_iter {
        let (_, g) = objective.convex(&x).ok_or(Error::NotDifferentiable)?;
        let s_exact = oracle.minimize(&g)?;
        let s = intern(s_exact, &mut atoms, &mut alpha);
        let d_fw: Vec<f64> = atoms[s].float.iter().zip(&x).map(|(a, b)| a - b).collect();
        gap = -dot(&g, &d_fw);
        if gap <= config.tol {
            break;
        }
        iterations += 1;
        let away = (0..atoms.len())
            .filter(|&i| alpha[i] > 0.0)
            .max_by(|&a, &b| {
                dot(&g, &atoms[a].float)
                    .total_cmp(&dot(&g, &atoms[b].float))
                    .then(b.cmp(&a))
            })
            .expect("active set is nonempty");
        let d_away: Vec<f64> = x
            .iter()
            .zip(&atoms[away].float)
            .map(|(a, b)| a - b)
            .collect();
        let away_gain = -dot(&g, &d_away);
        if gap >= away_gain || alpha[away] >= 1.0 {
            let gamma = line_search(objective, &x, &d_fw, 1.0);
            alpha.iter_mut().for_each(|c| *c *= 1.0 - gamma);
            alpha[s] += gamma;
            if gamma >= 1.0 {
                alpha.iter_mut().for_each(|c| *c = 0.0);
                alpha[s] = 1.0;
            }
        } else {
            let gamma_max = alpha[away] / (1.0 - alpha[away]);
            let gamma = line_search(objective, &x, &d_away, gamma_max);
            alpha.iter_mut().for_each(|c| *c *= 1.0 + gamma);
            alpha[away] -= gamma;
            if gamma >= gamma_max {
                alpha[away] = 0.0;
            }
        }
        let total: f64 = alpha.iter().sum();
        alpha.iter_mut().for_each(|c| *c = (*c / total).max(0.0));
        x = current(&atoms, &alpha);
    }

    let value = objective.value(&x).ok_or(Error::NotDifferentiable)?;
    let mut active: Vec<(Vec<Rational>, f64)> = atoms
        .into_iter()
        .zip(alpha)
        .filter(|(_, c)| *c > 0.0)
        .map(|(a, c)| (a.exact, c))
        .collect();
    active.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(OptimizeResult {
        weights: x,
        value,
        gap,
        iterations,
        converged: gap <= config.tol,
        parametrization: problem.parametrization,
        atoms: active,
    })
}

/// Vertices minimizing `psi`, with ties up to `1e-12` relative.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult {
    pub value: f64,
    pub minimizers: Vec<usize>,
}

pub fn extremal_concave_scan<F>(catalog: &VodCatalog, psi: F) -> ScanResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let values: Vec<f64> = catalog
        .vertices()
        .par_iter()
        .map(|v| psi(&v.iter().map(to_f64).collect::<Vec<_>>()))
        .collect();
    let value = values.iter().copied().fold(f64::INFINITY, f64::min);
    let tie = 1e-12 * value.abs().max(1.0);
    let minimizers = (0..values.len())
        .filter(|&j| values[j] - value <= tie)
        .collect();
    ScanResult { value, minimizers }
}
