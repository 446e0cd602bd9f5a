//! Dense row-major rasters: likelihood maps, binary masks and their geometry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Threshold used to turn a likelihood into a segmentation when the caller
/// does not pick one.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Row/column address of a pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PixelCoord {
    pub row: usize,
    pub col: usize,
}

impl PixelCoord {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    pub(crate) fn from_index(index: usize, width: usize) -> Self {
        Self {
            row: index / width,
            col: index % width,
        }
    }

    pub(crate) fn index(self, width: usize) -> usize {
        self.row * width + self.col
    }
}

/// Physical pixel size in millimeters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spacing {
    pub dy: f64,
    pub dx: f64,
}

impl Spacing {
    pub fn new(dy: f64, dx: f64) -> Result<Self> {
        if !(dy > 0.0 && dx > 0.0 && dy.is_finite() && dx.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "spacing must be positive and finite, got ({dy}, {dx})"
            )));
        }
        Ok(Self { dy, dx })
    }
}

impl Default for Spacing {
    fn default() -> Self {
        Self { dy: 1.0, dx: 1.0 }
    }
}

fn check_dims(height: usize, width: usize, len: usize) -> Result<()> {
    if height == 0 || width == 0 {
        return Err(Error::InvalidRaster(format!(
            "dimensions must be positive, got {height}x{width}"
        )));
    }
    if height.checked_mul(width) != Some(len) {
        return Err(Error::InvalidRaster(format!(
            "{height}x{width} raster needs {} values, got {len}",
            height.saturating_mul(width)
        )));
    }
    Ok(())
}

/// Per-pixel foreground probabilities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodMap {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl LikelihoodMap {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        check_dims(height, width, values.len())?;
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::OutOfRange { index, value });
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(height, width, vec![value; height.saturating_mul(width)])
    }

    /// Builds a map from a per-pixel function of `(row, col)`.
    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(height.saturating_mul(width));
        for row in 0..height {
            for col in 0..width {
                values.push(f(row, col));
            }
        }
        Self::new(height, width, values)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn at(&self, pixel: PixelCoord) -> f64 {
        self.get(pixel.row, pixel.col)
    }

    /// Applies `f` to every value; the result is re-validated.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.height,
            self.width,
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    /// `output(p) = 1` iff `self(p) >= threshold`.
    pub fn binarize(&self, threshold: f64) -> BinaryMask {
        BinaryMask {
            height: self.height,
            width: self.width,
            values: self.values.iter().map(|&v| v >= threshold).collect(),
        }
    }
}

/// Foreground/background labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    values: Vec<bool>,
}

impl BinaryMask {
    pub fn new(height: usize, width: usize, values: Vec<bool>) -> Result<Self> {
        check_dims(height, width, values.len())?;
        Ok(Self {
            height,
            width,
            values,
        })
    }

    /// Accepts 0/1 integer labels; anything else is rejected.
    pub fn from_labels(height: usize, width: usize, labels: &[u8]) -> Result<Self> {
        let values = labels
            .iter()
            .enumerate()
            .map(|(index, &l)| match l {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::OutOfRange {
                    index,
                    value: f64::from(other),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(height, width, values)
    }

    pub fn empty(height: usize, width: usize) -> Result<Self> {
        Self::new(height, width, vec![false; height.saturating_mul(width)])
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(height.saturating_mul(width));
        for row in 0..height {
            for col in 0..width {
                values.push(f(row, col));
            }
        }
        Self::new(height, width, values)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.values[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.values[row * self.width + col] = value;
    }

    pub fn count(&self) -> usize {
        self.values.iter().filter(|&&v| v).count()
    }

    pub fn is_blank(&self) -> bool {
        !self.values.iter().any(|&v| v)
    }

    /// The mask as a 0/1 likelihood map.
    pub fn to_likelihood(&self) -> LikelihoodMap {
        LikelihoodMap {
            height: self.height,
            width: self.width,
            values: self
                .values
                .iter()
                .map(|&v| if v { 1.0 } else { 0.0 })
                .collect(),
        }
    }
}

pub(crate) fn ensure_same_shape(left: (usize, usize), right: (usize, usize)) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::shape(left, right))
    }
}
