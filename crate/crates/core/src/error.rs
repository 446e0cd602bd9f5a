use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("truncated payload: expected {expected} samples, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("value {value} at index {index} is outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("invalid raster: {0}")]
    InvalidRaster(String),
    #[error("shape mismatch: {left_height}x{left_width} vs {right_height}x{right_width}")]
    ShapeMismatch {
        left_height: usize,
        left_width: usize,
        right_height: usize,
        right_width: usize,
    },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("mask has no foreground pixels")]
    EmptyMask,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("infeasible ribbon spec: {0}")]
    InfeasibleSpec(String),
    #[error("image too small: {height}x{width}, patches need {patch}x{patch}")]
    ImageTooSmall {
        height: usize,
        width: usize,
        patch: usize,
    },
    #[error("malformed diagram csv: {0}")]
    MalformedDiagram(String),
}

impl Error {
    /// Stable upper-case identifier used in machine-readable diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::MalformedHeader(_) => "MALFORMED_HEADER",
            Error::TruncatedPayload { .. } => "TRUNCATED_PAYLOAD",
            Error::OutOfRange { .. } => "OUT_OF_RANGE",
            Error::InvalidRaster(_) => "INVALID_RASTER",
            Error::ShapeMismatch { .. } => "SHAPE_MISMATCH",
            Error::LengthMismatch(..) => "LENGTH_MISMATCH",
            Error::EmptyMask => "EMPTY_MASK",
            Error::InvalidParameter(_) => "INVALID_PARAMETER",
            Error::InfeasibleSpec(_) => "INFEASIBLE_SPEC",
            Error::ImageTooSmall { .. } => "IMAGE_TOO_SMALL",
            Error::MalformedDiagram(_) => "MALFORMED_DIAGRAM",
        }
    }

    pub(crate) fn shape(left: (usize, usize), right: (usize, usize)) -> Self {
        Error::ShapeMismatch {
            left_height: left.0,
            left_width: left.1,
            right_height: right.0,
            right_width: right.1,
        }
    }
}
