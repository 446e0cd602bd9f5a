//! Fixed-size training patches and their flip/rotation augmentation.

use rand::Rng;

use crate::error::{Error, Result};
use crate::raster::{ensure_same_shape, BinaryMask, LikelihoodMap, PixelCoord};

/// Side length of a training patch.
pub const PATCH_SIZE: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub image: LikelihoodMap,
    pub gt: BinaryMask,
    /// Top-left corner in the source raster.
    pub origin: PixelCoord,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PatchSet {
    pub patches: Vec<Patch>,
}

impl PatchSet {
    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }
}

/// Window starts along one axis; the last window is clamped to the edge.
fn window_starts(extent: usize, window: usize, stride: usize) -> Vec<usize> {
    let last = extent - window;
    let mut starts: Vec<usize> = (0..=last).step_by(stride).collect();
    if starts.last() != Some(&last) {
        starts.push(last);
    }
    starts
}

fn crop<T: Copy>(values: &[T], width: usize, origin: PixelCoord, size: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(size * size);
    for r in origin.row..origin.row + size {
        let start = r * width + origin.col;
        out.extend_from_slice(&values[start..start + size]);
    }
    out
}

/// Slides a `PATCH_SIZE` window over the image and keeps windows whose
/// ground truth has at least one foreground pixel.
pub fn extract_patches(image: &LikelihoodMap, gt: &BinaryMask, stride: usize) -> Result<PatchSet> {
    ensure_same_shape(image.shape(), gt.shape())?;
    if stride == 0 {
        return Err(Error::InvalidParameter("stride must be positive".into()));
    }
    let (height, width) = image.shape();
    if height < PATCH_SIZE || width < PATCH_SIZE {
        return Err(Error::ImageTooSmall {
            height,
            width,
            patch: PATCH_SIZE,
        });
    }
    let mut patches = Vec::new();
    for &row in &window_starts(height, PATCH_SIZE, stride) {
        for &col in &window_starts(width, PATCH_SIZE, stride) {
            let origin = PixelCoord::new(row, col);
            let labels = crop(gt.values(), width, origin, PATCH_SIZE);
            if !labels.iter().any(|&v| v) {
                continue;
            }
            patches.push(Patch {
                image: LikelihoodMap::new(
                    PATCH_SIZE,
                    PATCH_SIZE,
                    crop(image.values(), width, origin, PATCH_SIZE),
                )?,
                gt: BinaryMask::new(PATCH_SIZE, PATCH_SIZE, labels)?,
                origin,
            });
        }
    }
    Ok(PatchSet { patches })
}

/// Flips applied first, then counter-clockwise quarter turns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Augmentation {
    /// Mirror left-right.
    pub flip_h: bool,
    /// Mirror top-bottom.
    pub flip_v: bool,
    pub quarter_turns: u8,
}

impl Augmentation {
    /// Each flip with probability 1/2, turns uniform over `0..4`.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            flip_h: rng.gen_bool(0.5),
            flip_v: rng.gen_bool(0.5),
            quarter_turns: rng.gen_range(0..4),
        }
    }

    fn apply<T: Copy>(&self, height: usize, width: usize, values: &[T]) -> (usize, usize, Vec<T>) {
        let mut h = height;
        let mut w = width;
        let mut out: Vec<T> = (0..h * w)
            .map(|i| {
                let (r, c) = (i / w, i % w);
                let r = if self.flip_v { h - 1 - r } else { r };
                let c = if self.flip_h { w - 1 - c } else { c };
                values[r * w + c]
            })
            .collect();
        for _ in 0..self.quarter_turns % 4 {
            // new[r][c] = old[c][w - 1 - r], shape (w, h)
            let rotated = (0..h * w)
                .map(|i| {
                    let (r, c) = (i / h, i % h);
                    out[c * w + (w - 1 - r)]
                })
                .collect();
            out = rotated;
            std::mem::swap(&mut h, &mut w);
        }
        (h, w, out)
    }
}

/// Applies the same flips and rotation to an image and its labels.
pub fn augment(
    image: &LikelihoodMap,
    gt: &BinaryMask,
    augmentation: Augmentation,
) -> Result<(LikelihoodMap, BinaryMask)> {
    ensure_same_shape(image.shape(), gt.shape())?;
    if augmentation.quarter_turns > 3 {
        return Err(Error::InvalidParameter(format!(
            "quarter_turns must be in 0..=3, got {}",
            augmentation.quarter_turns
        )));
    }
    let (h, w, values) = augmentation.apply(image.height(), image.width(), image.values());
    let (_, _, labels) = augmentation.apply(gt.height(), gt.width(), gt.values());
    Ok((
        LikelihoodMap::new(h, w, values)?,
        BinaryMask::new(h, w, labels)?,
    ))
}
