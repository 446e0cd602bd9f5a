//! Topological loss between a predicted likelihood and a binary ground truth.
//!
//! The loss is the optimal matching cost between the prediction's persistence
//! diagram and the ground truth's. Every birth and death value is the value of
//! one critical pixel, so away from ties the loss is a piecewise quadratic
//! function of those pixels and its gradient is supported on them alone.

use crate::error::{Error, Result};
use crate::matching::{match_diagrams_with, DiagramMatching, MatchStrategy};
use crate::persistence::{compute_persistence, PersistenceDiagram, PersistencePair};
use crate::raster::{ensure_same_shape, BinaryMask, LikelihoodMap};

/// Persistence diagram of a binary mask: one `(1, 0)` point per component in
/// dimension 0 and one per hole in dimension 1.
pub fn gt_diagram(gt: &BinaryMask) -> PersistenceDiagram {
    compute_persistence(&gt.to_likelihood())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopoLossConfig {
    /// Homology dimensions entering the loss, a subset of `{0, 1}`.
    pub dims: Vec<u8>,
    pub weight: f64,
    pub strategy: MatchStrategy,
}

impl Default for TopoLossConfig {
    fn default() -> Self {
        Self {
            dims: vec![0, 1],
            weight: 1.0,
            strategy: MatchStrategy::Auto,
        }
    }
}

impl TopoLossConfig {
    pub fn new(dims: &[u8], weight: f64) -> Result<Self> {
        let config = Self {
            dims: dims.to_vec(),
            weight,
            ..Self::default()
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if !(self.weight >= 0.0 && self.weight.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "loss weight must be finite and non-negative, got {}",
                self.weight
            )));
        }
        if let Some(dim) = self.dims.iter().find(|&&d| d > 1) {
            return Err(Error::InvalidParameter(format!(
                "homology dimension {dim} is not supported"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopoLossResult {
    pub value: f64,
    /// d value / d pred(p), row-major, same shape as the prediction.
    pub grad: Vec<f64>,
    pub matching: DiagramMatching,
    pub pred_diagram: PersistenceDiagram,
    pub gt_diagram: PersistenceDiagram,
}

impl TopoLossResult {
    pub fn grad_map(&self) -> (usize, usize, &[f64]) {
        let (h, w) = self.pred_diagram.source_shape();
        (h, w, &self.grad)
    }
}

pub fn topo_loss(
    pred: &LikelihoodMap,
    gt: &BinaryMask,
    config: &TopoLossConfig,
) -> Result<TopoLossResult> {
    ensure_same_shape(pred.shape(), gt.shape())?;
    config.validate()?;
    let pred_diagram = compute_persistence(pred);
    let gt_diagram = gt_diagram(gt);
    let matching = match_diagrams_with(&pred_diagram, &gt_diagram, &config.dims, config.strategy);

    let width = pred.width();
    let mut grad = vec![0.0; pred.len()];
    // sum of |contribution| per pixel, to tell cancellation from signal
    let mut magnitude = vec![0.0f64; pred.len()];
    for dim_matching in &matching.dims {
        let pred_pairs: Vec<&PersistencePair> = pred_diagram.dim(dim_matching.dim).collect();
        let gt_points = gt_diagram.points(dim_matching.dim);
        for assignment in &dim_matching.assignments {
            let Some(i) = assignment.pred else { continue };
            let pair = pred_pairs[i];
            let (d_birth, d_death) = match assignment.gt {
                Some(j) => {
                    let (gb, gd) = gt_points[j];
                    (2.0 * (pair.birth - gb), 2.0 * (pair.death - gd))
                }
                None => (pair.birth - pair.death, pair.death - pair.birth),
            };
            let birth = pair.birth_pixel.index(width);
            grad[birth] += d_birth;
            magnitude[birth] += d_birth.abs();
            if let Some(death_pixel) = pair.death_pixel {
                let death = death_pixel.index(width);
                grad[death] += d_death;
                magnitude[death] += d_death.abs();
            }
        }
    }

    let weight = config.weight;
    let value = weight * matching.total_cost();
    for (g, m) in grad.iter_mut().zip(&magnitude) {
        // A pixel shared by several pairs can receive terms that cancel
        // exactly; rounding would otherwise leave a spurious residue.
        if g.abs() <= 8.0 * f64::EPSILON * m {
            *g = 0.0;
        }
        *g *= weight;
    }
    Ok(TopoLossResult {
        value,
        grad,
        matching,
        pred_diagram,
        gt_diagram,
    })
}
