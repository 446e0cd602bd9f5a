//! Topology-aware segmentation toolkit for 2D likelihood maps.
//!
//! * [`persistence`]: superlevel-set persistent homology (dimensions 0 and 1)
//!   on the cubical complex of a raster, with critical pixels.
//! * [`loss`]: the diagram-matching topological loss and its exact gradient.
//! * [`metrics`]: Dice, average symmetric surface distance, HD95 and Betti-0
//!   error.
//! * [`synth`] and [`patch`]: seeded ribbon data, 64x64 patching and
//!   flip/rotation augmentation.
//! * [`raster`] and [`io`]: shared raster types and the `F32R`/`PGM` formats.

pub mod error;
pub mod hungarian;
pub mod io;
pub mod loss;
pub mod matching;
pub mod metrics;
pub mod patch;
pub mod persistence;
pub mod raster;
pub mod synth;
mod union_find;

pub use error::{Error, Result};
pub use io::{read_raster, read_raster_auto, write_raster, RasterFormat};
pub use loss::{gt_diagram, topo_loss, TopoLossConfig, TopoLossResult};
pub use matching::{match_diagrams, Assignment, DiagramMatching, DimMatching, MatchStrategy};
pub use metrics::{betti0_error, dice, evaluate, surface_distances, MetricsReport};
pub use patch::{augment, extract_patches, Augmentation, Patch, PatchSet, PATCH_SIZE};
pub use persistence::{
    betti_curve, betti_numbers, compute_persistence, BettiPair, PersistenceDiagram, PersistencePair,
};
pub use raster::{BinaryMask, LikelihoodMap, PixelCoord, Spacing, DEFAULT_THRESHOLD};
pub use synth::{gen_ribbon, ManifestEntry, RibbonSample, RibbonSpec};
