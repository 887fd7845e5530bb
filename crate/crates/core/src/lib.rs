//! Wear assessment for milling-tool cutting edges from grayscale images.
//!
//! The pipeline mirrors a patch-based visual inspection workflow:
//!
//! 1. **edgefinder** – locate and crop the cutting edge of an insert from a
//!    head image (circular Hough screw detection, Canny, line Hough,
//!    leftmost-vertical-line crop).
//! 2. **patching** – divide the cutting-edge image into named wear-patch
//!    layouts (HGD, FED, TBD, HED, SED).
//! 3. **texture** – describe each patch with LBP-family descriptors
//!    (LBP, rotation-invariant/uniform mappings, ALBP, CLBP, LBPV).
//! 4. **svm** – classify patches with an intersection-kernel SVM trained by
//!    sequential minimal optimization.
//! 5. **wearcheck** – vote worn patches against a threshold, compute
//!    confusion-matrix metrics, and run the full evaluation protocol.
//!
//! `imageio` supplies the grayscale image container, lossless PGM I/O and
//! dataset manifests; `synth` generates the synthetic fixtures used by the
//! test suites and benchmarks.

pub mod edgefinder;
pub mod imageio;
pub mod patching;
pub mod svm;
pub mod synth;
pub mod texture;
pub mod wearcheck;

pub use edgefinder::{Circle, CropConfig, CropOutcome, EdgeMap, Line};
pub use imageio::{DatasetManifest, GrayImage, ImageRole, WearLabel};
pub use patching::{FracRect, LayoutName, LayoutParams, PatchLayout};
pub use svm::{SvmModel, SvmParams, TrainSet};
pub use texture::{CodeMapping, Descriptor, DescriptorKind, MappingKind, NeighborhoodSpec};
pub use wearcheck::{ConfusionMatrix, EdgeAssessment, EvalConfig, Metrics, ReportRow, Verdict};
