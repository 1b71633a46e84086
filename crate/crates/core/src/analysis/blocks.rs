use num_traits::{One, Zero};

use crate::design::{support_of, DesignProblem};
use crate::error::{Error, Result};
use crate::linalg::Rational;

/// Block-design reading of a vertex of a 0/1 model: every support point is a
/// block and the factors are the treatments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockReport {
    pub treatments: usize,
    pub blocks: usize,
    pub uniform: bool,
    pub block_sizes: Vec<usize>,
    pub replications: Vec<usize>,
    /// `concurrences[i][j]` counts blocks containing both `i` and `j`.
    pub concurrences: Vec<Vec<usize>>,
    pub r: Option<usize>,
    pub lambda: Option<usize>,
    pub block_size: Option<usize>,
}

impl BlockReport {
    /// Every pair of treatments meets equally often.
    pub fn is_pbd(&self) -> bool {
        self.lambda.is_some()
    }

    pub fn is_bibd(&self) -> bool {
        self.is_pbd() && self.r.is_some() && self.block_size.is_some()
    }

    /// `(r / b, lambda / b)` when both are constant.
    pub fn ratios(&self) -> Option<(Rational, Rational)> {
        let b = Rational::from_integer(self.blocks.into());
        Some((
            Rational::from_integer(self.r?.into()) / &b,
            Rational::from_integer(self.lambda?.into()) / &b,
        ))
    }
}

fn constant(values: impl IntoIterator<Item = usize>) -> Option<usize> {
    let mut it = values.into_iter();
    let first = it.next()?;
    it.all(|v| v == first).then_some(first)
}

pub fn pbd_condition_check(problem: &DesignProblem, vertex: &[Rational]) -> Result<BlockReport> {
    if vertex.len() != problem.d() {
        return Err(Error::DimensionMismatch("vertex length".into()));
    }
    let support = support_of(vertex);
    let k = problem.k();
    let mut blocks = Vec::with_capacity(support.len());
    for &i in &support {
        let point = &problem.points()[i];
        if point.iter().any(|x| !x.is_zero() && !x.is_one()) {
            return Err(Error::Unsupported("block reading needs 0/1 points".into()));
        }
        blocks.push(point.iter().map(One::is_one).collect::<Vec<bool>>());
    }
    let uniform = support.windows(2).all(|w| vertex[w[0]] == vertex[w[1]]);
    let block_sizes: Vec<usize> = blocks
        .iter()
        .map(|b| b.iter().filter(|&&x| x).count())
        .collect();
    let replications: Vec<usize> = (0..k)
        .map(|i| blocks.iter().filter(|b| b[i]).count())
        .collect();
    let concurrences: Vec<Vec<usize>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| blocks.iter().filter(|b| b[i] && b[j]).count())
                .collect()
        })
        .collect();
    let lambda = constant(
        (0..k)
            .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
            .map(|(i, j)| concurrences[i][j]),
    );
    Ok(BlockReport {
        treatments: k,
        blocks: blocks.len(),
        uniform,
        r: constant(replications.iter().copied()),
        block_size: constant(block_sizes.iter().copied()),
        lambda,
        block_sizes,
        replications,
        concurrences,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, Family};
    use crate::linalg::{int, rat};

    #[test]
    fn fano_like_block_design() {
        // lines of the Fano plane as blocks
        let lines = [
            [0, 1, 2],
            [0, 3, 4],
            [0, 5, 6],
            [1, 3, 5],
            [1, 4, 6],
            [2, 3, 6],
            [2, 4, 5],
        ];
        let points: Vec<Vec<Rational>> = lines
            .iter()
            .map(|l| (0..7).map(|i| int(l.contains(&i) as i64)).collect())
            .collect();
        let problem = DesignProblem::new(points.clone(), points, 0).unwrap();
        let report = pbd_condition_check(&problem, &vec![rat(1, 7); 7]).unwrap();
        assert_eq!(
            (report.r, report.lambda, report.block_size, report.blocks),
            (Some(3), Some(1), Some(3), 7)
        );
        assert!(report.is_bibd() && report.uniform);
        assert_eq!(report.ratios(), Some((rat(3, 7), rat(1, 7))));
    }

    #[test]
    fn sbw6_a_vertices_are_bibds() {
        let model = catalog::build(Family::Sbw, 6, -1).unwrap();
        let poly =
            crate::polytope::OptimalPolytope::build(&model.problem, &model.maximal_design).unwrap();
        let list = poly.enumerate_vertices(&Default::default()).unwrap();
        for v in &list.vertices {
            let r = pbd_condition_check(&model.problem, v).unwrap();
            assert_eq!(
                (r.treatments, r.r, r.lambda, r.blocks, r.block_size),
                (6, Some(5), Some(2), 10, Some(3))
            );
        }
    }

    #[test]
    fn non_binary_points_are_rejected() {
        let model = catalog::build(Family::Mem, 3, 0).unwrap();
        assert!(pbd_condition_check(&model.problem, model.maximal_design.weights()).is_err());
    }
}
