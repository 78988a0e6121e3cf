//! Grow single-pixel neuron click-points into segmentation masks, multiply
//! datasets by augmentation, and score predicted masks against gold masks.
//!
//! The building blocks:
//!
//! * [`raster`]: grayscale images, binary masks, label rasters, PGM/PNG I/O
//!   and thresholding.
//! * [`clickpoints`]: the seed annotations and their file formats.
//! * [`morphology`] and [`floodfill`]: threshold, skeletonize, close, then
//!   fill each neuron from its click-point.
//! * [`regiongrow`]: best-first seeded region growing against the running
//!   region mean.
//! * [`augment`]: the twelve-fold flip/rotate/translate dataset expansion.
//! * [`metrics`] and [`eval`]: confusion fractions, accuracy, Jaccard, Dice,
//!   Cohen's kappa, the single-operating-point AUROC and their guideline
//!   bands, plus pooled evaluation over directories of masks.
//! * [`batch`]: whole-slice growing over many slices, parallel or sequential.

pub mod augment;
pub mod batch;
pub mod clickpoints;
pub mod eval;
pub mod exec;
pub mod floodfill;
pub mod metrics;
pub mod morphology;
pub mod raster;
pub mod regiongrow;
pub mod synthetic;

pub use clickpoints::{ClickPoint, ClickPointSet};
pub use exec::Execution;
pub use floodfill::FillResult;
pub use metrics::{ConfusionCounts, MetricsReport};
pub use morphology::{Connectivity, StructuringElement};
pub use raster::{BinaryMask, GrayImage, LabelRaster, PositiveClass, RgbImage};
