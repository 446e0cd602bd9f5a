//! Segmentation quality metrics: Dice overlap, boundary distances (ASD and
//! HD95) and the Betti-0 error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::persistence::betti_numbers;
use crate::raster::{ensure_same_shape, BinaryMask, LikelihoodMap, Spacing};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub dsc: f64,
    /// Absent when either mask is empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asd_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hd95_mm: Option<f64>,
    pub betti0_error: f64,
}

/// `2|a ∩ b| / (|a| + |b|)`, and 1 when both masks are empty.
pub fn dice(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    ensure_same_shape(a.shape(), b.shape())?;
    let (mut both, mut total) = (0usize, 0usize);
    for (&x, &y) in a.values().iter().zip(b.values()) {
        both += usize::from(x && y);
        total += usize::from(x) + usize::from(y);
    }
    if total == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * both as f64 / total as f64)
}

/// Foreground pixels with at least one background 4-neighbor; pixels outside
/// the image count as background.
pub fn boundary(mask: &BinaryMask) -> BinaryMask {
    let (h, w) = mask.shape();
    let is_fg = |r: isize, c: isize| {
        r >= 0 && c >= 0 && (r as usize) < h && (c as usize) < w && mask.get(r as usize, c as usize)
    };
    BinaryMask::from_fn(h, w, |r, c| {
        let (r, c) = (r as isize, c as isize);
        is_fg(r, c) && !(is_fg(r - 1, c) && is_fg(r + 1, c) && is_fg(r, c - 1) && is_fg(r, c + 1))
    })
    .expect("same shape as input")
}

/// Exact squared Euclidean distance transform in physical units
/// (Felzenszwalb-Huttenlocher lower envelope, separable by axis). Entry `p`
/// is the squared distance from `p` to the nearest set pixel of `sites`, or
/// infinity if there is none.
pub fn squared_distance_transform(sites: &BinaryMask, spacing: Spacing) -> Vec<f64> {
    let (h, w) = sites.shape();
    let mut field: Vec<f64> = sites
        .values()
        .iter()
        .map(|&s| if s { 0.0 } else { f64::INFINITY })
        .collect();

    let mut line = Vec::with_capacity(h.max(w));
    let mut out = Vec::with_capacity(h.max(w));
    for c in 0..w {
        line.clear();
        line.extend((0..h).map(|r| field[r * w + c]));
        transform_1d(&line, spacing.dy * spacing.dy, &mut out);
        for r in 0..h {
            field[r * w + c] = out[r];
        }
    }
    for r in 0..h {
        line.clear();
        line.extend_from_slice(&field[r * w..(r + 1) * w]);
        transform_1d(&line, spacing.dx * spacing.dx, &mut out);
        field[r * w..(r + 1) * w].copy_from_slice(&out);
    }
    field
}

/// `out[i] = min_j (scale * (i - j)^2 + f[j])`.
fn transform_1d(f: &[f64], scale: f64, out: &mut Vec<f64>) {
    out.clear();
    let n = f.len();
    let mut sites: Vec<usize> = Vec::with_capacity(n);
    let mut bounds: Vec<f64> = Vec::with_capacity(n);
    let intersect = |q: usize, v: usize| -> f64 {
        let (qf, vf) = (q as f64, v as f64);
        ((f[q] + scale * qf * qf) - (f[v] + scale * vf * vf)) / (2.0 * scale * (qf - vf))
    };
    for q in (0..n).filter(|&q| f[q].is_finite()) {
        while let Some(&v) = sites.last() {
            let s = intersect(q, v);
            if sites.len() > 1 && s <= bounds[bounds.len() - 1] {
                sites.pop();
                bounds.pop();
            } else {
                bounds.push(s);
                break;
            }
        }
        if sites.is_empty() {
            bounds.clear();
        }
        sites.push(q);
    }
    if sites.is_empty() {
        out.resize(n, f64::INFINITY);
        return;
    }
    // bounds[k] separates sites[k] and sites[k + 1]
    let mut k = 0;
    for i in 0..n {
        let x = i as f64;
        while k + 1 < sites.len() && bounds[k] < x {
            k += 1;
        }
        let d = (i as f64 - sites[k] as f64).powi(2);
        out.push(scale * d + f[sites[k]]);
    }
}

/// Value at quantile `q` in `[0, 1]` of sorted data, interpolating linearly
/// between order statistics.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty data");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Pooled symmetric boundary distances: every boundary pixel of `a` to the
/// boundary of `b` and vice versa.
pub fn boundary_distances(a: &BinaryMask, b: &BinaryMask, spacing: Spacing) -> Result<Vec<f64>> {
    ensure_same_shape(a.shape(), b.shape())?;
    if a.is_blank() || b.is_blank() {
        return Err(Error::EmptyMask);
    }
    let (edge_a, edge_b) = (boundary(a), boundary(b));
    let (to_a, to_b) = (
        squared_distance_transform(&edge_a, spacing),
        squared_distance_transform(&edge_b, spacing),
    );
    let directed = |edge: &BinaryMask, field: &[f64]| -> Vec<f64> {
        edge.values()
            .iter()
            .zip(field)
            .filter(|(&on, _)| on)
            .map(|(_, &d2)| d2.sqrt())
            .collect::<Vec<_>>()
    };
    let mut pooled = directed(&edge_a, &to_b);
    pooled.extend(directed(&edge_b, &to_a));
    Ok(pooled)
}

/// `(ASD, HD95)` in millimeters.
pub fn surface_distances(a: &BinaryMask, b: &BinaryMask, spacing: Spacing) -> Result<(f64, f64)> {
    let mut pooled = boundary_distances(a, b, spacing)?;
    pooled.sort_by(f64::total_cmp);
    let asd = pooled.iter().sum::<f64>() / pooled.len() as f64;
    Ok((asd, percentile_sorted(&pooled, 0.95)))
}

/// Mean over pairs of `|β0(pred) − β0(gt)|`.
pub fn betti0_error(pred_masks: &[BinaryMask], gt_masks: &[BinaryMask]) -> Result<f64> {
    if pred_masks.len() != gt_masks.len() {
        return Err(Error::LengthMismatch(pred_masks.len(), gt_masks.len()));
    }
    if pred_masks.is_empty() {
        return Err(Error::InvalidParameter("no mask pairs to compare".into()));
    }
    let mut total = 0usize;
    for (p, g) in pred_masks.iter().zip(gt_masks) {
        ensure_same_shape(p.shape(), g.shape())?;
        total += betti_numbers(p).b0.abs_diff(betti_numbers(g).b0);
    }
    Ok(total as f64 / pred_masks.len() as f64)
}

pub fn evaluate(
    pred: &LikelihoodMap,
    gt: &BinaryMask,
    spacing: Spacing,
    threshold: f64,
) -> Result<MetricsReport> {
    ensure_same_shape(pred.shape(), gt.shape())?;
    let mask = pred.binarize(threshold);
    let (asd_mm, hd95_mm) = match surface_distances(&mask, gt, spacing) {
        Ok((asd, hd95)) => (Some(asd), Some(hd95)),
        Err(Error::EmptyMask) => (None, None),
        Err(e) => return Err(e),
    };
    Ok(MetricsReport {
        dsc: dice(&mask, gt)?,
        asd_mm,
        hd95_mm,
        betti0_error: betti0_error(std::slice::from_ref(&mask), std::slice::from_ref(gt))?,
    })
}

/// Mean and sample standard deviation of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

impl MeanSd {
    fn of(values: impl Iterator<Item = f64>) -> Option<Self> {
        let values: Vec<f64> = values.collect();
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, sd, n })
    }
}

/// Per-metric aggregates over a set of patches. Distance statistics only
/// cover patches where both masks were non-empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub dsc: MeanSd,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asd_mm: Option<MeanSd>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hd95_mm: Option<MeanSd>,
    pub betti0_error: MeanSd,
}

pub fn summarize(reports: &[MetricsReport]) -> Option<MetricsSummary> {
    Some(MetricsSummary {
        dsc: MeanSd::of(reports.iter().map(|r| r.dsc))?,
        asd_mm: MeanSd::of(reports.iter().filter_map(|r| r.asd_mm)),
        hd95_mm: MeanSd::of(reports.iter().filter_map(|r| r.hd95_mm)),
        betti0_error: MeanSd::of(reports.iter().map(|r| r.betti0_error))?,
    })
}
