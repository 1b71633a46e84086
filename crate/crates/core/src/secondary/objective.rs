use nalgebra::DMatrix;

use crate::design::DesignProblem;
use crate::error::{Error, Result};
use crate::linalg::to_f64;

/// Whether the secondary criterion is maximized (concave) or minimized
/// (convex).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// Built-in secondary criteria on the weight vector.
#[derive(Clone, Debug)]
pub enum Objective {
    /// `det(sum_i r_i w_i f_i f_i')^(1/m)`, maximized.
    HeteroskedasticD {
        regressors: Vec<Vec<f64>>,
        r: Vec<f64>,
    },
    /// `-sum_i w_i ln w_i`, maximized.
    Entropy,
    /// `sum_i w_i^2`, minimized.
    SquaredNorm,
    /// `c.w`, minimized.
    Linear(Vec<f64>),
}

impl Objective {
    pub fn heteroskedastic_d(problem: &DesignProblem, r: Vec<f64>) -> Result<Self> {
        if r.len() != problem.d() {
            return Err(Error::DimensionMismatch(format!(
                "r has {} entries, expected {}",
                r.len(),
                problem.d()
            )));
        }
        if r.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidDesign("r must be positive and finite".into()));
        }
        let regressors = problem
            .regressors()
            .iter()
            .map(|f| f.iter().map(to_f64).collect())
            .collect();
        Ok(Objective::HeteroskedasticD { regressors, r })
    }

    pub fn sense(&self) -> Sense {
        match self {
            Objective::HeteroskedasticD { .. } | Objective::Entropy => Sense::Maximize,
            Objective::SquaredNorm | Objective::Linear(_) => Sense::Minimize,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Objective::HeteroskedasticD { .. } => "heteroskedastic-d",
            Objective::Entropy => "entropy",
            Objective::SquaredNorm => "squared-norm",
            Objective::Linear(_) => "linear",
        }
    }

    /// Criterion value in its own sense; `None` outside the domain.
    pub fn value(&self, w: &[f64]) -> Option<f64> {
        match self {
            Objective::HeteroskedasticD { regressors, r } => {
                let m = weighted_moments(regressors, r, w);
                let dim = m.nrows() as f64;
                let det = m.determinant();
                (det > 0.0).then(|| det.powf(1.0 / dim))
            }
            Objective::Entropy => {
                if w.iter().any(|&x| x < 0.0) {
                    return None;
                }
                Some(
                    -w.iter()
                        .filter(|&&x| x > 0.0)
                        .map(|&x| x * x.ln())
                        .sum::<f64>(),
                )
            }
            Objective::SquaredNorm => Some(w.iter().map(|x| x * x).sum()),
            Objective::Linear(c) => Some(c.iter().zip(w).map(|(a, b)| a * b).sum()),
        }
    }

    /// Gradient of the value; `None` where it does not exist.
    pub fn gradient(&self, w: &[f64]) -> Option<Vec<f64>> {
        match self {
            Objective::HeteroskedasticD { regressors, r } => {
                let m = weighted_moments(regressors, r, w);
                let dim = m.nrows() as f64;
                let det = m.determinant();
                if det <= 0.0 {
                    return None;
                }
                let inv = m.try_inverse()?;
                let phi = det.powf(1.0 / dim);
                Some(
                    regressors
                        .iter()
                        .zip(r)
                        .map(|(f, ri)| {
                            let fv = nalgebra::DVector::from_column_slice(f);
                            phi / dim * ri * (fv.transpose() * &inv * &fv)[(0, 0)]
                        })
                        .collect(),
                )
            }
            Objective::Entropy => {
                if w.iter().any(|&x| x <= 0.0) {
                    return None;
                }
                Some(w.iter().map(|x| -(x.ln() + 1.0)).collect())
            }
            Objective::SquaredNorm => Some(w.iter().map(|x| 2.0 * x).collect()),
            Objective::Linear(c) => Some(c.clone()),
        }
    }

    /// Value and gradient of the convex function that is minimized.
    pub(crate) fn convex(&self, w: &[f64]) -> Option<(f64, Vec<f64>)> {
        let v = self.value(w)?;
        let g = self.gradient(w)?;
        Some(match self.sense() {
            Sense::Minimize => (v, g),
            Sense::Maximize => (-v, g.into_iter().map(|x| -x).collect()),
        })
    }
}

fn weighted_moments(regressors: &[Vec<f64>], r: &[f64], w: &[f64]) -> DMatrix<f64> {
    let m = regressors.first().map_or(0, Vec::len);
    let mut out = DMatrix::<f64>::zeros(m, m);
    for ((f, ri), wi) in regressors.iter().zip(r).zip(w) {
        let c = ri * wi;
        if c == 0.0 {
            continue;
        }
        for a in 0..m {
            for b in 0..m {
                out[(a, b)] += c * f[a] * f[b];
            }
        }
    }
    out
}

/// Shannon entropy of a weight vector.
pub fn entropy(w: &[f64]) -> f64 {
    -w.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.ln())
        .sum::<f64>()
}

pub fn max_norm(w: &[f64]) -> f64 {
    w.iter().fold(0.0, |m, &x| m.max(x.abs()))
}
