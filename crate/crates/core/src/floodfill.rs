//! Flood-fill growing: threshold the slice, thin the membranes to a skeleton,
//! close small gaps, then fill each neuron outward from its click-point until
//! it meets the closed skeleton.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clickpoints::ClickPointSet;
use crate::morphology::{close, skeletonize, Connectivity, StructuringElement};
use crate::raster::{
    threshold_fixed, threshold_otsu, BinaryMask, GrayImage, LabelRaster, PositiveClass,
    RasterError,
};

#[derive(Debug, Error)]
pub enum FillError {
    #[error("seed {id} at ({x}, {y}) lies outside the {width}x{height} slice")]
    OutOfBoundsSeed {
        id: u32,
        x: u32,
        y: u32,
        width: u32,
        height: u32,
    },
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Threshold(#[from] RasterError),
}

pub type Result<T> = std::result::Result<T, FillError>;

pub(crate) fn check_seeds(seeds: &ClickPointSet, width: u32, height: u32) -> Result<()> {
    match seeds.iter().find(|p| p.x >= width || p.y >= height) {
        Some(p) => Err(FillError::OutOfBoundsSeed {
            id: p.id,
            x: p.x,
            y: p.y,
            width,
            height,
        }),
        None => Ok(()),
    }
}

/// Outcome of growing every seed of one slice.
///
/// Each seed id ends up in exactly one place: as a label in `labels`, in
/// `leaked_ids` (its growth ran past the size cap and was rolled back), or
/// in `missed_ids` (its seed pixel was not fillable).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FillResult {
    pub labels: LabelRaster,
    pub leaked_ids: Vec<u32>,
    pub missed_ids: Vec<u32>,
}

/// JSON side-car describing the seeds that did not produce a region.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FillReport {
    pub leaked: Vec<u32>,
    pub missed: Vec<u32>,
}

impl FillResult {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            labels: LabelRaster::filled(width, height, 0),
            leaked_ids: Vec::new(),
            missed_ids: Vec::new(),
        }
    }

    /// Union of all labelled regions as a neuron mask.
    pub fn union_mask(&self) -> BinaryMask {
        BinaryMask::new(self.labels.map(|id| id != 0), PositiveClass::Neuron)
    }

    /// Mask of the pixels carrying `id`.
    pub fn region(&self, id: u32) -> BinaryMask {
        BinaryMask::new(self.labels.map(|v| v == id), PositiveClass::Neuron)
    }

    pub fn region_size(&self, id: u32) -> usize {
        self.labels.data().iter().filter(|&&v| v == id).count()
    }

    pub fn report(&self) -> FillReport {
        FillReport {
            leaked: self.leaked_ids.clone(),
            missed: self.missed_ids.clone(),
        }
    }
}

/// Largest region, in pixels, that `leak_fraction` allows on a slice.
pub(crate) fn size_cap(leak_fraction: f64, width: u32, height: u32) -> usize {
    (leak_fraction * width as f64 * height as f64).floor() as usize
}

/// Fills every seed, in ascending id order, over non-border pixels.
///
/// A seed on a border pixel, or on a pixel an earlier seed already claimed,
/// is reported as missed. A fill larger than `leak_fraction` of the slice
/// is rolled back and reported as leaked.
pub fn flood_fill(
    borders: &BinaryMask,
    seeds: &ClickPointSet,
    connectivity: Connectivity,
    leak_fraction: f64,
) -> Result<FillResult> {
    let (w, h) = borders.dims();
    check_seeds(seeds, w, h)?;
    if leak_fraction.is_nan() || leak_fraction <= 0.0 {
        return Err(FillError::InvalidParams(format!(
            "leak fraction must be positive, got {leak_fraction}"
        )));
    }
    let cap = size_cap(leak_fraction, w, h);
    let wall = borders.as_slice();
    let mut result = FillResult::new(w, h);
    let mut queue = VecDeque::new();
    let mut filled: Vec<usize> = Vec::new();

    for seed in seeds {
        let start = result.labels.index(seed.x, seed.y);
        if wall[start] || result.labels.data()[start] != 0 {
            result.missed_ids.push(seed.id);
            continue;
        }
        let labels = result.labels.data_mut();
        queue.clear();
        filled.clear();
        labels[start] = seed.id;
        filled.push(start);
        queue.push_back(start);
        let mut leaked = false;
        while let Some(i) = queue.pop_front() {
            connectivity.for_each_neighbor(i, w, h, |j| {
                if !wall[j] && labels[j] == 0 {
                    labels[j] = seed.id;
                    filled.push(j);
                    queue.push_back(j);
                }
            });
            if filled.len() > cap {
                leaked = true;
                break;
            }
        }
        if leaked {
            for &i in &filled {
                labels[i] = 0;
            }
            result.leaked_ids.push(seed.id);
        }
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdChoice {
    /// Otsu's level, computed per slice.
    #[default]
    Auto,
    Fixed(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloodFillParams {
    pub threshold: ThresholdChoice,
    pub se_radius: u32,
    pub connectivity: Connectivity,
    pub leak_fraction: f64,
}

impl Default for FloodFillParams {
    fn default() -> Self {
        Self {
            threshold: ThresholdChoice::Auto,
            se_radius: 2,
            connectivity: Connectivity::Four,
            leak_fraction: 0.25,
        }
    }
}

/// Intermediate rasters of the flood-fill pipeline.
#[derive(Debug, Clone)]
pub struct FloodFillStages {
    pub threshold: u8,
    pub binary: BinaryMask,
    pub skeleton: BinaryMask,
    pub closed: BinaryMask,
    pub result: FillResult,
}

pub fn run_pipeline(
    img: &GrayImage,
    seeds: &ClickPointSet,
    params: &FloodFillParams,
) -> Result<FloodFillStages> {
    check_seeds(seeds, img.width(), img.height())?;
    let se = StructuringElement::disk(params.se_radius).ok_or_else(|| {
        FillError::InvalidParams("structuring element radius must be at least 1".into())
    })?;
    let (binary, threshold) = match params.threshold {
        ThresholdChoice::Fixed(t) => (threshold_fixed(img, t), t),
        ThresholdChoice::Auto => threshold_otsu(img)?,
    };
    let skeleton = skeletonize(&binary);
    let closed = close(&skeleton, &se);
    let result = flood_fill(&closed, seeds, params.connectivity, params.leak_fraction)?;
    Ok(FloodFillStages {
        threshold,
        binary,
        skeleton,
        closed,
        result,
    })
}

/// Threshold → skeletonize → close → fill.
pub fn grow_floodfill(
    img: &GrayImage,
    seeds: &ClickPointSet,
    params: &FloodFillParams,
) -> Result<FillResult> {
    run_pipeline(img, seeds, params).map(|s| s.result)
}
