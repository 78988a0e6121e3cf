//! Growing many slices at once, in memory or straight from directories.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clickpoints::{parse_clickpoints, ClickPointError, ClickPointSet};
use crate::exec::{map_items, Execution};
use crate::floodfill::{grow_floodfill, FillError, FillResult, FloodFillParams};
use crate::morphology::Connectivity;
use crate::raster::{is_image_path, load_image, save_image, save_labels, GrayImage, RasterError};
use crate::regiongrow::{grow_all, RegionGrowParams};

/// Region-growing settings that scale with the slice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSettings {
    pub threshold: f64,
    pub connectivity: Connectivity,
    /// Absolute cap; when `None` the cap is `cap_fraction` of the slice area.
    pub max_region: Option<usize>,
    pub cap_fraction: f64,
}

impl Default for RegionSettings {
    fn default() -> Self {
        Self {
            threshold: RegionGrowParams::DEFAULT_THRESHOLD,
            connectivity: Connectivity::Four,
            max_region: None,
            cap_fraction: RegionGrowParams::DEFAULT_CAP_FRACTION,
        }
    }
}

impl RegionSettings {
    pub fn params_for(&self, width: u32, height: u32) -> RegionGrowParams {
        let area = width as f64 * height as f64;
        RegionGrowParams {
            threshold: self.threshold,
            connectivity: self.connectivity,
            max_region: self
                .max_region
                .unwrap_or_else(|| ((self.cap_fraction * area).floor() as usize).max(1)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GrowMethod {
    FloodFill(FloodFillParams),
    Region(RegionSettings),
}

impl GrowMethod {
    pub fn name(&self) -> &'static str {
        match self {
            GrowMethod::FloodFill(_) => "floodfill",
            GrowMethod::Region(_) => "region",
        }
    }
}

pub fn grow_slice(
    img: &GrayImage,
    seeds: &ClickPointSet,
    method: &GrowMethod,
) -> Result<FillResult, FillError> {
    match method {
        GrowMethod::FloodFill(params) => grow_floodfill(img, seeds, params),
        GrowMethod::Region(settings) => {
            grow_all(img, seeds, &settings.params_for(img.width(), img.height()))
        }
    }
}

/// Grows every `(image, seeds)` pair; output order matches input order.
pub fn grow_batch(
    slices: &[(GrayImage, ClickPointSet)],
    method: &GrowMethod,
    exec: Execution,
) -> Vec<Result<FillResult, FillError>> {
    map_items(slices, exec, |(img, seeds)| grow_slice(img, seeds, method))
}

#[derive(Debug, Error)]
pub enum GrowError {
    #[error("{slice}: {source}")]
    Image {
        slice: String,
        #[source]
        source: RasterError,
    },
    #[error("{slice}: {source}")]
    Points {
        slice: String,
        #[source]
        source: ClickPointError,
    },
    #[error("{slice}: no click-point file in {dir}")]
    MissingPoints { slice: String, dir: PathBuf },
    #[error("{slice}: {source}")]
    Fill {
        slice: String,
        #[source]
        source: FillError,
    },
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SliceOutcome {
    pub slice: String,
    pub labeled: usize,
    pub leaked: Vec<u32>,
    pub missed: Vec<u32>,
}

#[derive(Debug, Default)]
pub struct GrowSummary {
    pub slices: Vec<SliceOutcome>,
    /// Slices skipped because their click-point file was missing.
    pub skipped: Vec<GrowError>,
}

impl GrowSummary {
    pub fn warning_count(&self) -> usize {
        self.skipped.len()
            + self
                .slices
                .iter()
                .map(|s| s.leaked.len() + s.missed.len())
                .sum::<usize>()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GrowDirOptions {
    /// Treat a missing click-point file as a hard error.
    pub strict: bool,
    pub exec: Execution,
}

impl Default for GrowDirOptions {
    fn default() -> Self {
        Self {
            strict: false,
            exec: Execution::available(),
        }
    }
}

pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>, GrowError> {
    let io_err = |source| GrowError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        if path.is_file() && is_image_path(&path) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

enum SliceRun {
    Done(SliceOutcome),
    Skipped(GrowError),
}

fn grow_file(
    image: &Path,
    points_dir: &Path,
    out_dir: &Path,
    method: &GrowMethod,
    strict: bool,
) -> Result<SliceRun, GrowError> {
    let slice = stem(image);
    let points_path = ["json", "csv"]
        .iter()
        .map(|ext| points_dir.join(format!("{slice}.{ext}")))
        .find(|p| p.is_file());
    let Some(points_path) = points_path else {
        let err = GrowError::MissingPoints {
            slice,
            dir: points_dir.to_path_buf(),
        };
        return if strict { Err(err) } else { Ok(SliceRun::Skipped(err)) };
    };
    let img = load_image(image).map_err(|source| GrowError::Image {
        slice: slice.clone(),
        source,
    })?;
    let seeds = parse_clickpoints(&points_path).map_err(|source| GrowError::Points {
        slice: slice.clone(),
        source,
    })?;
    let result = grow_slice(&img, &seeds, method).map_err(|source| GrowError::Fill {
        slice: slice.clone(),
        source,
    })?;

    let image_err = |source| GrowError::Image {
        slice: slice.clone(),
        source,
    };
    save_labels(&result.labels, out_dir.join(format!("{slice}_labels.png"))).map_err(image_err)?;
    save_image(&result.union_mask(), out_dir.join(format!("{slice}_mask.png")))
        .map_err(image_err)?;
    let report_path = out_dir.join(format!("{slice}_report.json"));
    let json = serde_json::to_string_pretty(&result.report()).expect("report serializes");
    fs::write(&report_path, json).map_err(|source| GrowError::Io {
        path: report_path,
        source,
    })?;

    let labeled = seeds.len() - result.leaked_ids.len() - result.missed_ids.len();
    Ok(SliceRun::Done(SliceOutcome {
        slice,
        labeled,
        leaked: result.leaked_ids,
        missed: result.missed_ids,
    }))
}

/// Grows every image in `images_dir` using `<points_dir>/<stem>.{json,csv}`
/// as seeds, writing `<stem>_labels.png` (16-bit ids), `<stem>_mask.png`
/// (0/255 union) and `<stem>_report.json` to `out_dir`.
pub fn grow_dir(
    images_dir: impl AsRef<Path>,
    points_dir: impl AsRef<Path>,
    out_dir: impl AsRef<Path>,
    method: &GrowMethod,
    opts: &GrowDirOptions,
) -> Result<GrowSummary, GrowError> {
    let (images_dir, points_dir, out_dir) =
        (images_dir.as_ref(), points_dir.as_ref(), out_dir.as_ref());
    fs::create_dir_all(out_dir).map_err(|source| GrowError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let images = list_images(images_dir)?;
    let runs = map_items(&images, opts.exec, |img| {
        grow_file(img, points_dir, out_dir, method, opts.strict)
    });
    let mut summary = GrowSummary::default();
    for run in runs {
        match run? {
            SliceRun::Done(outcome) => summary.slices.push(outcome),
            SliceRun::Skipped(err) => {
                log::warn!("skipping slice: {err}");
                summary.skipped.push(err);
            }
        }
    }
    Ok(summary)
}
