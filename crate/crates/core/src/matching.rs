//! Optimal one-to-one matching of persistence diagrams.
//!
//! Matching `p` to `g` costs `(b_p - b_g)^2 + (d_p - d_g)^2`. Any point may
//! instead go to the diagonal at `(b - d)^2 / 2`, the squared distance to its
//! orthogonal projection. Dimensions are matched independently.

use crate::hungarian::{self, CostMatrix};
use crate::persistence::PersistenceDiagram;

/// A `(birth, death)` point.
pub type Point = (f64, f64);

pub fn pair_cost(p: Point, g: Point) -> f64 {
    (p.0 - g.0).powi(2) + (p.1 - g.1).powi(2)
}

pub fn diagonal_cost(p: Point) -> f64 {
    (p.0 - p.1).powi(2) / 2.0
}

/// One edge of a matching. `None` on either side stands for the diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assignment {
    pub pred: Option<usize>,
    pub gt: Option<usize>,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimMatching {
    pub dim: u8,
    /// Ordered: matched and diagonal predicted points by predicted index,
    /// then unmatched ground-truth points by index.
    pub assignments: Vec<Assignment>,
    pub total_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagramMatching {
    pub dims: Vec<DimMatching>,
}

impl DiagramMatching {
    pub fn total_cost(&self) -> f64 {
        self.dims.iter().map(|d| d.total_cost).sum()
    }

    pub fn dim(&self, dim: u8) -> Option<&DimMatching> {
        self.dims.iter().find(|d| d.dim == dim)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchStrategy {
    /// Greedy when every ground-truth point coincides, Hungarian otherwise.
    #[default]
    Auto,
    Hungarian,
    /// Only valid when all ground-truth points coincide.
    Greedy,
}

fn finish(mut assignments: Vec<Assignment>) -> (Vec<Assignment>, f64) {
    assignments.sort_by_key(|a| match (a.pred, a.gt) {
        (Some(p), _) => (0, p),
        (None, Some(g)) => (1, g),
        (None, None) => (2, 0),
    });
    let total = assignments.iter().map(|a| a.cost).sum();
    (assignments, total)
}

/// Solves the assignment on the cost matrix augmented with one diagonal slot
/// per point. Rows are predicted points then diagonal slots for ground-truth
/// points; columns are ground-truth points then diagonal slots for predicted
/// points.
pub fn match_hungarian(pred: &[Point], gt: &[Point]) -> (Vec<Assignment>, f64) {
    let (n, m) = (pred.len(), gt.len());
    let size = n + m;
    let mut costs = CostMatrix::new(size, f64::INFINITY);
    for (i, &p) in pred.iter().enumerate() {
        for (j, &g) in gt.iter().enumerate() {
            costs.set(i, j, pair_cost(p, g));
        }
        costs.set(i, m + i, diagonal_cost(p));
    }
    for (j, &g) in gt.iter().enumerate() {
        costs.set(n + j, j, diagonal_cost(g));
        for i in 0..n {
            costs.set(n + j, m + i, 0.0);
        }
    }
    let solution = hungarian::solve(&costs);
    let mut assignments = Vec::with_capacity(size);
    for (row, &col) in solution.iter().enumerate() {
        match (row < n, col < m) {
            (true, true) => assignments.push(Assignment {
                pred: Some(row),
                gt: Some(col),
                cost: pair_cost(pred[row], gt[col]),
            }),
            (true, false) => assignments.push(Assignment {
                pred: Some(row),
                gt: None,
                cost: diagonal_cost(pred[row]),
            }),
            (false, true) => assignments.push(Assignment {
                pred: None,
                gt: Some(col),
                cost: diagonal_cost(gt[col]),
            }),
            (false, false) => {}
        }
    }
    finish(assignments)
}

/// Exact when all ground-truth points coincide: the cost then only depends on
/// which predicted points get matched, so the best `k <= m` by savings win.
///
/// Panics if the ground-truth points are not all equal.
pub fn match_greedy(pred: &[Point], gt: &[Point]) -> (Vec<Assignment>, f64) {
    let Some(&target) = gt.first() else {
        return finish(
            pred.iter()
                .enumerate()
                .map(|(i, &p)| Assignment {
                    pred: Some(i),
                    gt: None,
                    cost: diagonal_cost(p),
                })
                .collect(),
        );
    };
    assert!(
        gt.iter().all(|&g| g == target),
        "greedy matching needs coincident ground-truth points"
    );
    let target_diagonal = diagonal_cost(target);
    let mut savings: Vec<(f64, usize)> = pred
        .iter()
        .enumerate()
        .map(|(i, &p)| (diagonal_cost(p) + target_diagonal - pair_cost(p, target), i))
        .collect();
    savings.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut matched_to = vec![None; pred.len()];
    let mut next_gt = 0;
    for &(saving, i) in &savings {
        if next_gt == gt.len() || saving <= 0.0 {
            break;
        }
        matched_to[i] = Some(next_gt);
        next_gt += 1;
    }
    let mut assignments: Vec<Assignment> = pred
        .iter()
        .enumerate()
        .map(|(i, &p)| match matched_to[i] {
            Some(j) => Assignment {
                pred: Some(i),
                gt: Some(j),
                cost: pair_cost(p, gt[j]),
            },
            None => Assignment {
                pred: Some(i),
                gt: None,
                cost: diagonal_cost(p),
            },
        })
        .collect();
    assignments.extend((next_gt..gt.len()).map(|j| Assignment {
        pred: None,
        gt: Some(j),
        cost: target_diagonal,
    }));
    finish(assignments)
}

pub fn match_points(
    pred: &[Point],
    gt: &[Point],
    strategy: MatchStrategy,
) -> (Vec<Assignment>, f64) {
    match strategy {
        MatchStrategy::Hungarian => match_hungarian(pred, gt),
        MatchStrategy::Greedy => match_greedy(pred, gt),
        MatchStrategy::Auto => {
            if gt.windows(2).all(|w| w[0] == w[1]) {
                match_greedy(pred, gt)
            } else {
                match_hungarian(pred, gt)
            }
        }
    }
}

/// Matches two diagrams dimension by dimension over `dims`. Assignment
/// indices refer to each diagram's points of that dimension in canonical
/// order.
pub fn match_diagrams_with(
    pred: &PersistenceDiagram,
    gt: &PersistenceDiagram,
    dims: &[u8],
    strategy: MatchStrategy,
) -> DiagramMatching {
    let mut dims: Vec<u8> = dims.to_vec();
    dims.sort_unstable();
    dims.dedup();
    DiagramMatching {
        dims: dims
            .into_iter()
            .map(|dim| {
                let (assignments, total_cost) =
                    match_points(&pred.points(dim), &gt.points(dim), strategy);
                DimMatching {
                    dim,
                    assignments,
                    total_cost,
                }
            })
            .collect(),
    }
}

/// Optimal matching in dimensions 0 and 1.
pub fn match_diagrams(pred: &PersistenceDiagram, gt: &PersistenceDiagram) -> DiagramMatching {
    match_diagrams_with(pred, gt, &[0, 1], MatchStrategy::Auto)
}
