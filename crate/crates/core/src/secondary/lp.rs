//! Exact simplex for `min c.w  s.t.  A w = b, w >= 0` with Bland's rule.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::{Rational, RationalMatrix};

/// Tableau kept in canonical form for the current basis, so repeated solves
/// with different costs restart from the last optimal basis.
#[derive(Clone, Debug)]
pub struct ExactLp {
    /// `B^{-1} A` rows followed by `B^{-1} b` in the last column.
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    n: usize,
}

impl ExactLp {
    /// `a` must have full row rank and the feasible set must be nonempty.
    pub fn new(a: &RationalMatrix, b: &[Rational]) -> Result<Self> {
        let (m, n) = (a.rows(), a.cols());
        if b.len() != m {
            return Err(Error::DimensionMismatch("right-hand side length".into()));
        }
        // phase one on [A I] with artificial columns n..n+m
        let mut rows: Vec<Vec<Rational>> = (0..m)
            .map(|i| {
                let flip = b[i].is_negative();
                let sign = |x: &Rational| if flip { -x.clone() } else { x.clone() };
                let mut r: Vec<Rational> = a.row(i).iter().map(sign).collect();
                r.extend((0..m).map(|j| {
                    if i == j {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                }));
                r.push(sign(&b[i]));
                r
            })
            .collect();
        let mut basis: Vec<usize> = (n..n + m).collect();
        let mut cost = vec![Rational::zero(); n + m];
        cost[n..].iter_mut().for_each(|c| *c = Rational::one());
        simplex(&mut rows, &mut basis, &cost, n + m)?;
        let infeasibility: Rational = (0..m)
            .filter(|&i| basis[i] >= n)
            .map(|i| rows[i][n + m].clone())
            .sum();
        if !infeasibility.is_zero() {
            return Err(Error::InfeasibleStart(
                "equality system has no nonnegative solution".into(),
            ));
        }
        // drive remaining artificials out of the basis
        for i in 0..m {
            if basis[i] >= n {
                let j = (0..n).find(|&j| !rows[i][j].is_zero()).ok_or_else(|| {
                    Error::DimensionMismatch("equality rows are dependent".into())
                })?;
                pivot(&mut rows, &mut basis, i, j);
            }
        }
        for r in &mut rows {
            let rhs = r.pop().expect("rhs");
            r.truncate(n);
            r.push(rhs);
        }
        Ok(Self { rows, basis, n })
    }

    /// Optimal basic solution for cost `c`.
    pub fn minimize(&mut self, c: &[Rational]) -> Result<Vec<Rational>> {
        if c.len() != self.n {
            return Err(Error::DimensionMismatch("cost length".into()));
        }
        simplex(&mut self.rows, &mut self.basis, c, self.n)?;
        let mut w = vec![Rational::zero(); self.n];
        for (i, &j) in self.basis.iter().enumerate() {
            w[j] = self.rows[i][self.n].clone();
        }
        Ok(w)
    }
}

fn pivot(rows: &mut [Vec<Rational>], basis: &mut [usize], r: usize, col: usize) {
    let p = rows[r][col].clone();
    rows[r].iter_mut().for_each(|x| *x /= &p);
    let pivot_row = rows[r].clone();
    for (i, row) in rows.iter_mut().enumerate() {
        if i == r || row[col].is_zero() {
            continue;
        }
        let f = row[col].clone();
        for (x, y) in row.iter_mut().zip(&pivot_row) {
            if !y.is_zero() {
                *x -= &f * y;
            }
        }
    }
    basis[r] = col;
}

/// Primal simplex over the first `n` columns; the last column is the
/// right-hand side.
fn simplex(
    rows: &mut [Vec<Rational>],
    basis: &mut [usize],
    cost: &[Rational],
    n: usize,
) -> Result<()> {
    let rhs = rows.first().map_or(0, |r| r.len() - 1);
    loop {
        let entering = (0..n).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let mut reduced = cost[j].clone();
            for (i, &bj) in basis.iter().enumerate() {
                if !rows[i][j].is_zero() {
                    reduced -= &cost[bj] * &rows[i][j];
                }
            }
            reduced.is_negative()
        });
        let Some(col) = entering else {
            return Ok(());
        };
        let mut best: Option<(Rational, usize, usize)> = None;
        for (i, row) in rows.iter().enumerate() {
            if row[col].is_positive() {
                let ratio = &row[rhs] / &row[col];
                let better = match &best {
                    None => true,
                    Some((r, _, b)) => ratio < *r || (ratio == *r && basis[i] < *b),
                };
                if better {
                    best = Some((ratio, i, basis[i]));
                }
            }
        }
        let Some((_, r, _)) = best else {
            return Err(Error::ResourceLimit("linear program is unbounded".into()));
        };
        pivot(rows, basis, r, col);
    }
}
