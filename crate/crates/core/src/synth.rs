//! Seeded synthetic ribbons with known topology.
//!
//! Each component is a closed curve (an ellipse with a low-frequency radial
//! wobble) stroked at a fixed thickness. Components that carry a hole are
//! closed rings; the others are open arcs with an angular gap. Components
//! sit in separate cells of a square grid so they never touch.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::persistence::{betti_numbers, BettiPair};
use crate::raster::{BinaryMask, LikelihoodMap, DEFAULT_THRESHOLD};

const MIN_SIZE: usize = 16;
const MAX_WOBBLE: f64 = 0.05;
const WOBBLE_MODES: [i32; 3] = [2, 3, 4];
const MIN_ASPECT: f64 = 0.75;
/// Smallest hole radius, in pixels, a ring must keep.
const MIN_INNER_RADIUS: f64 = 2.0;
/// Background pixels kept between a component and its cell border.
const CELL_MARGIN: f64 = 2.0;
const MAX_ATTEMPTS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RibbonSpec {
    pub seed: u64,
    pub size: usize,
    pub components: usize,
    pub holes: usize,
    pub thickness: usize,
    pub break_count: usize,
    pub blur_radius: f64,
}

impl RibbonSpec {
    fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParameter(msg));
        if self.size < MIN_SIZE {
            return fail(format!(
                "size must be at least {MIN_SIZE}, got {}",
                self.size
            ));
        }
        if self.components == 0 {
            return fail("at least one component is required".into());
        }
        if self.holes > self.components {
            return fail(format!(
                "{} holes need at least as many components, got {}",
                self.holes, self.components
            ));
        }
        if self.thickness == 0 {
            return fail("thickness must be at least 1".into());
        }
        if !(self.blur_radius >= 0.0 && self.blur_radius.is_finite()) {
            return fail(format!(
                "blur radius must be non-negative, got {}",
                self.blur_radius
            ));
        }
        Ok(())
    }

    fn grid_side(&self) -> usize {
        (1..)
            .find(|k| k * k >= self.components)
            .expect("unbounded search")
    }

    /// Smallest outer radius a ring can have before its hole closes up.
    fn min_base_radius(&self) -> f64 {
        (self.thickness as f64 + MIN_INNER_RADIUS)
            / (MIN_ASPECT * (1.0 - MAX_WOBBLE * WOBBLE_MODES.len() as f64))
    }

    /// Largest base radius that stays inside a grid cell.
    fn max_base_radius(&self) -> f64 {
        let cell = (self.size / self.grid_side()) as f64;
        (cell / 2.0 - CELL_MARGIN - 1.0) / (1.0 + MAX_WOBBLE * WOBBLE_MODES.len() as f64)
    }

    fn check_feasible(&self) -> Result<()> {
        let min_side = 2.0 * (self.min_base_radius() + CELL_MARGIN + 1.0);
        let fits_area =
            self.components as f64 * min_side * min_side <= (self.size * self.size) as f64 / 2.0;
        if !fits_area || self.min_base_radius() > self.max_base_radius() {
            return Err(Error::InfeasibleSpec(format!(
                "{} components of thickness {} do not fit in {}x{}",
                self.components, self.thickness, self.size, self.size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RibbonSample {
    pub clean: LikelihoodMap,
    pub gt: BinaryMask,
    pub degraded: LikelihoodMap,
}

#[derive(Debug, Clone)]
struct Ribbon {
    center: (f64, f64),
    base: f64,
    axes: (f64, f64),
    rotation: f64,
    wobble: Vec<(i32, f64, f64)>,
    thickness: f64,
    /// Removed angular sectors as `(center angle, half width)`.
    gaps: Vec<(f64, f64)>,
}

fn wrap_angle(a: f64) -> f64 {
    (a + PI).rem_euclid(TAU) - PI
}

impl Ribbon {
    fn outer_radius(&self, theta: f64) -> f64 {
        let t = theta - self.rotation;
        let ellipse =
            1.0 / ((t.cos() / self.axes.0).powi(2) + (t.sin() / self.axes.1).powi(2)).sqrt();
        let wobble: f64 = self
            .wobble
            .iter()
            .map(|&(k, amp, phase)| amp * (f64::from(k) * theta + phase).cos())
            .sum();
        self.base * ellipse * (1.0 + wobble)
    }

    fn polar(&self, row: usize, col: usize) -> (f64, f64) {
        let dy = row as f64 - self.center.0;
        let dx = col as f64 - self.center.1;
        (dy.hypot(dx), dy.atan2(dx))
    }

    fn contains(&self, row: usize, col: usize) -> bool {
        let (rho, theta) = self.polar(row, col);
        let outer = self.outer_radius(theta);
        rho <= outer
            && rho > outer - self.thickness
            && self
                .gaps
                .iter()
                .all(|&(angle, half)| wrap_angle(theta - angle).abs() > half)
    }

    fn inner_radius_bound(&self) -> f64 {
        self.base * self.axes.0.min(self.axes.1) * (1.0 - MAX_WOBBLE * WOBBLE_MODES.len() as f64)
            - self.thickness
    }

    /// Half-angle of a wedge that opens `width` pixels at the inner edge.
    fn half_angle_for(&self, width: f64) -> f64 {
        (width / (2.0 * self.inner_radius_bound().max(1.0))).min(PI / 3.0)
    }

    fn bounding_box(&self, size: usize) -> (usize, usize, usize, usize) {
        let reach = self.base * (1.0 + MAX_WOBBLE * WOBBLE_MODES.len() as f64) + 1.0;
        let lo = |c: f64| (c - reach).floor().max(0.0) as usize;
        let hi = |c: f64| ((c + reach).ceil() as usize + 1).min(size);
        (
            lo(self.center.0),
            hi(self.center.0),
            lo(self.center.1),
            hi(self.center.1),
        )
    }
}

fn render(ribbons: &[Ribbon], size: usize) -> BinaryMask {
    let mut mask = BinaryMask::empty(size, size).expect("positive size");
    for ribbon in ribbons {
        let (r0, r1, c0, c1) = ribbon.bounding_box(size);
        for r in r0..r1 {
            for c in c0..c1 {
                if ribbon.contains(r, c) {
                    mask.set(r, c, true);
                }
            }
        }
    }
    mask
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let weights: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Gaussian smoothing (zero outside the image) followed by rescaling so the
/// maximum is 1.
pub fn render_likelihood(mask: &BinaryMask, blur_radius: f64) -> LikelihoodMap {
    let (h, w) = mask.shape();
    let mut values: Vec<f64> = mask.to_likelihood().into_values();
    if blur_radius > 0.0 {
        let kernel = gaussian_kernel(blur_radius);
        let radius = (kernel.len() / 2) as isize;
        let pass = |src: &[f64], along_rows: bool| -> Vec<f64> {
            let mut out = vec![0.0; src.len()];
            for r in 0..h {
                for c in 0..w {
                    let mut acc = 0.0;
                    for (k, &weight) in kernel.iter().enumerate() {
                        let offset = k as isize - radius;
                        let (rr, cc) = if along_rows {
                            (r as isize + offset, c as isize)
                        } else {
                            (r as isize, c as isize + offset)
                        };
                        if rr >= 0 && cc >= 0 && (rr as usize) < h && (cc as usize) < w {
                            acc += weight * src[rr as usize * w + cc as usize];
                        }
                    }
                    out[r * w + c] = acc;
                }
            }
            out
        };
        values = pass(&pass(&values, true), false);
        let max = values.iter().copied().fold(0.0, f64::max);
        if max > 0.0 {
            for v in &mut values {
                *v = (*v / max).clamp(0.0, 1.0);
            }
        }
    }
    LikelihoodMap::new(h, w, values).expect("values normalized to [0, 1]")
}

fn sample_ribbons(spec: &RibbonSpec, rng: &mut ChaCha8Rng) -> Vec<Ribbon> {
    let side = spec.grid_side();
    let cell = (spec.size / side) as f64;
    let mut cells: Vec<usize> = (0..side * side).collect();
    for i in (1..cells.len()).rev() {
        cells.swap(i, rng.gen_range(0..=i));
    }
    let mut closed: Vec<bool> = (0..spec.components).map(|i| i < spec.holes).collect();
    for i in (1..closed.len()).rev() {
        closed.swap(i, rng.gen_range(0..=i));
    }
    let (min_base, max_base) = (spec.min_base_radius(), spec.max_base_radius());
    let offset = (spec.size as f64 - cell * side as f64) / 2.0;

    closed
        .iter()
        .zip(&cells)
        .map(|(&is_closed, &slot)| {
            let base = rng.gen_range(min_base.max(0.6 * max_base)..=max_base);
            let (row, col) = ((slot / side) as f64, (slot % side) as f64);
            let slack = (cell / 2.0 - CELL_MARGIN - 1.0 - base * (1.0 + MAX_WOBBLE * 3.0)).max(0.0);
            let jitter = |rng: &mut ChaCha8Rng| {
                if slack > 0.0 {
                    rng.gen_range(-slack..=slack)
                } else {
                    0.0
                }
            };
            let center = (
                offset + (row + 0.5) * cell - 0.5 + jitter(rng),
                offset + (col + 0.5) * cell - 0.5 + jitter(rng),
            );
            let minor = rng.gen_range(MIN_ASPECT..=1.0);
            let axes = if rng.gen_bool(0.5) {
                (1.0, minor)
            } else {
                (minor, 1.0)
            };
            let wobble = WOBBLE_MODES
                .iter()
                .map(|&k| (k, rng.gen_range(0.0..=MAX_WOBBLE), rng.gen_range(0.0..TAU)))
                .collect();
            let mut ribbon = Ribbon {
                center,
                base,
                axes,
                rotation: rng.gen_range(0.0..PI),
                wobble,
                thickness: spec.thickness as f64,
                gaps: Vec::new(),
            };
            if !is_closed {
                let half = ribbon.half_angle_for(3.0 + spec.thickness as f64);
                ribbon.gaps.push((rng.gen_range(-PI..PI), half));
            }
            ribbon
        })
        .collect()
}

/// Cuts wedges into copies of the ribbons, keeping only cuts that change the
/// Betti numbers of the rendered mask.
fn break_ribbons(
    spec: &RibbonSpec,
    ribbons: &[Ribbon],
    gt_betti: BettiPair,
    rng: &mut ChaCha8Rng,
) -> Option<BinaryMask> {
    let gap_width = 2.0 + (2.0 * spec.blur_radius).ceil();
    let mut broken = ribbons.to_vec();
    let mut current = gt_betti;
    for _ in 0..spec.break_count {
        let mut accepted = false;
        for _ in 0..MAX_ATTEMPTS {
            let which = rng.gen_range(0..broken.len());
            let angle = rng.gen_range(-PI..PI);
            let mut candidate = broken.clone();
            let half = candidate[which].half_angle_for(gap_width);
            let spacing_ok = candidate[which]
                .gaps
                .iter()
                .all(|&(a, h)| wrap_angle(angle - a).abs() > half + h + 0.35);
            if !spacing_ok {
                continue;
            }
            candidate[which].gaps.push((angle, half));
            let betti = betti_numbers(&render(&candidate, spec.size));
            if betti != current {
                broken = candidate;
                current = betti;
                accepted = true;
                break;
            }
        }
        if !accepted {
            return None;
        }
    }
    Some(render(&broken, spec.size))
}

/// Generates a ribbon image whose ground truth has exactly
/// `(components, holes)` as Betti numbers, plus a likelihood with
/// `break_count` topology-changing gaps. Deterministic in `spec.seed`.
pub fn gen_ribbon(spec: &RibbonSpec) -> Result<RibbonSample> {
    spec.validate()?;
    spec.check_feasible()?;
    let target = BettiPair::new(spec.components, spec.holes);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    for _ in 0..MAX_ATTEMPTS {
        let ribbons = sample_ribbons(spec, &mut rng);
        let gt = render(&ribbons, spec.size);
        if betti_numbers(&gt) != target {
            continue;
        }
        let clean = render_likelihood(&gt, spec.blur_radius);
        if spec.break_count == 0 {
            let degraded = clean.clone();
            return Ok(RibbonSample {
                clean,
                gt,
                degraded,
            });
        }
        let Some(broken) = break_ribbons(spec, &ribbons, target, &mut rng) else {
            continue;
        };
        let degraded = render_likelihood(&broken, spec.blur_radius);
        if betti_numbers(&degraded.binarize(DEFAULT_THRESHOLD)) == target {
            continue;
        }
        return Ok(RibbonSample {
            clean,
            gt,
            degraded,
        });
    }
    Err(Error::InfeasibleSpec(format!(
        "no layout with Betti numbers ({}, {}) after {MAX_ATTEMPTS} attempts",
        spec.components, spec.holes
    )))
}

/// One line of a dataset manifest (JSON Lines).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub image_path: String,
    pub gt_path: String,
    pub degraded_path: String,
    pub spec: RibbonSpec,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(seed: u64, components: usize, holes: usize) -> RibbonSpec {
        RibbonSpec {
            seed,
            size: 64,
            components,
            holes,
            thickness: 3,
            break_count: 0,
            blur_radius: 1.0,
        }
    }

    #[test]
    fn single_closed_ring() {
        let sample = gen_ribbon(&spec(7, 1, 1)).unwrap();
        assert_eq!(betti_numbers(&sample.gt), BettiPair::new(1, 1));
        assert_eq!(sample.clean, sample.degraded);
        let max = sample.clean.values().iter().copied().fold(0.0, f64::max);
        assert_eq!(max, 1.0);
    }

    #[test]
    fn two_open_arcs() {
        let sample = gen_ribbon(&spec(11, 2, 0)).unwrap();
        assert_eq!(betti_numbers(&sample.gt), BettiPair::new(2, 0));
    }

    #[test]
    fn seeded_determinism() {
        let mut s = spec(3, 3, 2);
        s.size = 128;
        s.break_count = 2;
        assert_eq!(gen_ribbon(&s).unwrap(), gen_ribbon(&s).unwrap());
        let mut other = s.clone();
        other.seed = 4;
        assert_ne!(gen_ribbon(&s).unwrap().gt, gen_ribbon(&other).unwrap().gt);
    }

    #[test]
    fn breaks_change_topology() {
        for seed in 0..10 {
            let mut s = spec(seed, 2, 1);
            s.size = 96;
            s.break_count = 1 + (seed as usize % 3);
            let sample = gen_ribbon(&s).unwrap();
            assert_ne!(
                betti_numbers(&sample.degraded.binarize(0.5)),
                betti_numbers(&sample.gt),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn zero_blur_renders_the_mask() {
        let mut s = spec(5, 1, 0);
        s.blur_radius = 0.0;
        let sample = gen_ribbon(&s).unwrap();
        assert_eq!(sample.clean, sample.gt.to_likelihood());
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = spec(1, 1, 2);
        assert!(matches!(gen_ribbon(&s), Err(Error::InvalidParameter(_))));
        s = spec(1, 1, 1);
        s.size = 8;
        assert!(matches!(gen_ribbon(&s), Err(Error::InvalidParameter(_))));
        s = spec(1, 16, 4);
        s.thickness = 6;
        assert!(matches!(gen_ribbon(&s), Err(Error::InfeasibleSpec(_))));
    }

    #[test]
    fn manifest_entry_json_fields() {
        let entry = ManifestEntry {
            id: "ribbon-0000".into(),
            image_path: "ribbon-0000_image.f32r".into(),
            gt_path: "ribbon-0000_gt.pgm".into(),
            degraded_path: "ribbon-0000_degraded.f32r".into(),
            spec: spec(1, 1, 1),
        };
        let json = serde_json::to_string(&entry).unwrap();
        assert!(json.starts_with(r#"{"id":"ribbon-0000","image_path":"#));
        assert!(json.contains(r#""spec":{"seed":1,"size":64,"#));
        let back: ManifestEntry = serde_json::from_str(&json).unwrap();
        assert_eq!(back, entry);
    }
}
