//! Dataset multiplication by flips, rotations and translations.
//!
//! The standard set has twelve transforms: the eight symmetries of the
//! square with no shift, followed by the identity shifted by ±`shift` pixels
//! along each axis. Shifts fill the vacated band by mirror reflection.
//! Masks and label rasters go through the same integer index maps as
//! images, so no value is ever interpolated.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clickpoints::{parse_clickpoints, ClickPoint, ClickPointError, ClickPointSet};
use crate::exec::{map_items, Execution};
use crate::raster::{is_image_path, load_image, save_image, BinaryMask, Raster, RasterError};

/// The eight symmetries of the square. Rotations are clockwise in image
/// coordinates (y pointing down).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dihedral {
    Id,
    Rot90,
    Rot180,
    Rot270,
    HFlip,
    VFlip,
    Transpose,
    AntiTranspose,
}

impl Dihedral {
    pub const ALL: [Dihedral; 8] = [
        Dihedral::Id,
        Dihedral::Rot90,
        Dihedral::Rot180,
        Dihedral::Rot270,
        Dihedral::HFlip,
        Dihedral::VFlip,
        Dihedral::Transpose,
        Dihedral::AntiTranspose,
    ];

    /// Action on centred coordinates as a signed permutation matrix
    /// `[[a, b], [c, d]]`.
    fn matrix(self) -> [[i8; 2]; 2] {
        match self {
            Dihedral::Id => [[1, 0], [0, 1]],
            Dihedral::Rot90 => [[0, -1], [1, 0]],
            Dihedral::Rot180 => [[-1, 0], [0, -1]],
            Dihedral::Rot270 => [[0, 1], [-1, 0]],
            Dihedral::HFlip => [[-1, 0], [0, 1]],
            Dihedral::VFlip => [[1, 0], [0, -1]],
            Dihedral::Transpose => [[0, 1], [1, 0]],
            Dihedral::AntiTranspose => [[0, -1], [-1, 0]],
        }
    }

    fn from_matrix(m: [[i8; 2]; 2]) -> Self {
        *Self::ALL
            .iter()
            .find(|d| d.matrix() == m)
            .expect("dihedral group is closed")
    }

    /// `self` followed by `next`.
    pub fn then(self, next: Dihedral) -> Dihedral {
        let a = self.matrix();
        let b = next.matrix();
        let mut m = [[0i8; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = b[i][0] * a[0][j] + b[i][1] * a[1][j];
            }
        }
        Dihedral::from_matrix(m)
    }

    pub fn inverse(self) -> Dihedral {
        *Self::ALL
            .iter()
            .find(|d| self.then(**d) == Dihedral::Id)
            .expect("every element has an inverse")
    }

    pub fn swaps_axes(self) -> bool {
        self.matrix()[0][0] == 0
    }

    pub fn output_dims(self, width: u32, height: u32) -> (u32, u32) {
        if self.swaps_axes() {
            (height, width)
        } else {
            (width, height)
        }
    }

    /// Where pixel `(x, y)` of a `width`×`height` raster lands.
    #[inline]
    pub fn map_point(self, x: u32, y: u32, width: u32, height: u32) -> (u32, u32) {
        let (w1, h1) = (width - 1, height - 1);
        match self {
            Dihedral::Id => (x, y),
            Dihedral::Rot90 => (h1 - y, x),
            Dihedral::Rot180 => (w1 - x, h1 - y),
            Dihedral::Rot270 => (y, w1 - x),
            Dihedral::HFlip => (w1 - x, y),
            Dihedral::VFlip => (x, h1 - y),
            Dihedral::Transpose => (y, x),
            Dihedral::AntiTranspose => (h1 - y, w1 - x),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dihedral::Id => "id",
            Dihedral::Rot90 => "rot90",
            Dihedral::Rot180 => "rot180",
            Dihedral::Rot270 => "rot270",
            Dihedral::HFlip => "hflip",
            Dihedral::VFlip => "vflip",
            Dihedral::Transpose => "transpose",
            Dihedral::AntiTranspose => "anti_transpose",
        }
    }
}

/// A symmetry followed by a translation of `shift` pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TransformSpec {
    pub dihedral: Dihedral,
    pub shift: (i32, i32),
}

impl TransformSpec {
    pub const IDENTITY: TransformSpec = TransformSpec {
        dihedral: Dihedral::Id,
        shift: (0, 0),
    };

    pub fn dihedral(d: Dihedral) -> Self {
        Self {
            dihedral: d,
            shift: (0, 0),
        }
    }

    pub fn shift(dx: i32, dy: i32) -> Self {
        Self {
            dihedral: Dihedral::Id,
            shift: (dx, dy),
        }
    }

    pub fn output_dims(&self, width: u32, height: u32) -> (u32, u32) {
        self.dihedral.output_dims(width, height)
    }

    /// Maps a point; `None` when the shift pushes it off the raster.
    pub fn map_point(&self, x: u32, y: u32, width: u32, height: u32) -> Option<(u32, u32)> {
        let (x1, y1) = self.dihedral.map_point(x, y, width, height);
        let (w, h) = self.output_dims(width, height);
        let nx = x1 as i64 + self.shift.0 as i64;
        let ny = y1 as i64 + self.shift.1 as i64;
        (nx >= 0 && ny >= 0 && nx < w as i64 && ny < h as i64).then_some((nx as u32, ny as u32))
    }
}

impl fmt::Display for TransformSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.shift {
            (0, 0) => f.write_str(self.dihedral.name()),
            (dx, dy) => write!(f, "{}+shift({dx},{dy})", self.dihedral.name()),
        }
    }
}

/// Mirror index into `0..n` without repeating the edge sample.
#[inline]
pub fn reflect(i: i64, n: u32) -> u32 {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as i64 - 1);
    let m = i.rem_euclid(period);
    if m >= n as i64 {
        (period - m) as u32
    } else {
        m as u32
    }
}

/// Rasters that can be pushed through a [`TransformSpec`].
pub trait Transformable: Sized {
    fn transformed(&self, spec: &TransformSpec) -> Self;
}

fn remap<T: Copy>(src: &Raster<T>, spec: &TransformSpec) -> Raster<T> {
    let (w, h) = src.dims();
    let (ow, oh) = spec.output_dims(w, h);
    let d = spec.dihedral;
    // every destination index is written exactly once below
    let mut rotated = vec![src.data()[0]; src.len()];
    for y in 0..h {
        for x in 0..w {
            let (nx, ny) = d.map_point(x, y, w, h);
            rotated[ny as usize * ow as usize + nx as usize] = src.get(x, y);
        }
    }
    let rotated = Raster::from_vec(ow, oh, rotated).expect("dihedral maps preserve size");
    let (dx, dy) = spec.shift;
    if dx == 0 && dy == 0 {
        return rotated;
    }
    Raster::from_fn(ow, oh, |x, y| {
        let sx = reflect(x as i64 - dx as i64, ow);
        let sy = reflect(y as i64 - dy as i64, oh);
        rotated.get(sx, sy)
    })
}

impl<T: Copy> Transformable for Raster<T> {
    fn transformed(&self, spec: &TransformSpec) -> Self {
        remap(self, spec)
    }
}

impl Transformable for BinaryMask {
    fn transformed(&self, spec: &TransformSpec) -> Self {
        BinaryMask::new(remap(self.bits(), spec), self.positive_class())
    }
}

pub fn apply_transform<T: Transformable>(img: &T, spec: &TransformSpec) -> T {
    img.transformed(spec)
}

pub const DEFAULT_SHIFT: i32 = 64;

/// The twelve standard transforms with the default shift of 64 pixels.
pub fn enumerate_transforms() -> Vec<TransformSpec> {
    enumerate_transforms_with_shift(DEFAULT_SHIFT)
}

pub fn enumerate_transforms_with_shift(shift: i32) -> Vec<TransformSpec> {
    let mut specs: Vec<TransformSpec> = Dihedral::ALL
        .iter()
        .map(|&d| TransformSpec::dihedral(d))
        .collect();
    specs.extend([
        TransformSpec::shift(shift, 0),
        TransformSpec::shift(-shift, 0),
        TransformSpec::shift(0, shift),
        TransformSpec::shift(0, -shift),
    ]);
    specs
}

/// Maps every point through `spec`; returns the surviving set and the ids of
/// points pushed off the raster.
pub fn map_points(
    set: &ClickPointSet,
    spec: &TransformSpec,
    width: u32,
    height: u32,
) -> (ClickPointSet, Vec<u32>) {
    let mut kept = Vec::with_capacity(set.len());
    let mut dropped = Vec::new();
    for p in set {
        match spec.map_point(p.x, p.y, width, height) {
            Some((x, y)) => kept.push(ClickPoint::new(x, y, p.id)),
            None => dropped.push(p.id),
        }
    }
    let kept = ClickPointSet::new(set.slice_name(), kept)
        .expect("bijective maps keep ids and coordinates unique");
    (kept, dropped)
}

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    ClickPoints(#[from] ClickPointError),
    #[error("point file {path} does not match its image: {reason}")]
    MismatchedPointFile { path: PathBuf, reason: String },
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentOptions {
    pub shift: i32,
    pub transform_points: bool,
    pub exec: Execution,
}

impl Default for AugmentOptions {
    fn default() -> Self {
        Self {
            shift: DEFAULT_SHIFT,
            transform_points: false,
            exec: Execution::available(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub source: String,
    pub transform_index: usize,
    pub transform: String,
    pub output: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points_output: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dropped_points: Vec<u32>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

fn list_images(dir: &Path) -> Result<Vec<PathBuf>, AugmentError> {
    let io_err = |source| AugmentError::Io {
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

fn find_points_file(image: &Path) -> Option<PathBuf> {
    ["json", "csv"]
        .iter()
        .map(|ext| image.with_extension(ext))
        .find(|p| p.is_file())
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn augment_one(
    image: &Path,
    out_dir: &Path,
    specs: &[TransformSpec],
    opts: &AugmentOptions,
) -> Result<Vec<ManifestEntry>, AugmentError> {
    let img = load_image(image)?;
    let (w, h) = img.dims();
    let stem = image
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = image
        .extension()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "pgm".into());

    let points = match (opts.transform_points, find_points_file(image)) {
        (true, Some(path)) => {
            let set = parse_clickpoints(&path)?;
            set.check_bounds(w, h)
                .map_err(|e| AugmentError::MismatchedPointFile {
                    path: path.clone(),
                    reason: e.to_string(),
                })?;
            Some(set)
        }
        _ => None,
    };

    let mut entries = Vec::with_capacity(specs.len());
    for (k, spec) in specs.iter().enumerate() {
        let out_name = format!("{stem}__t{k}.{ext}");
        save_image(&img.transformed(spec), out_dir.join(&out_name))?;
        let mut entry = ManifestEntry {
            source: file_name(image),
            transform_index: k,
            transform: spec.to_string(),
            output: out_name,
            points_output: None,
            dropped_points: Vec::new(),
        };
        if let Some(set) = &points {
            let (mapped, dropped) = map_points(set, spec, w, h);
            let points_name = format!("{stem}__t{k}.json");
            mapped
                .with_slice_name(format!("{stem}__t{k}"))
                .save(out_dir.join(&points_name))?;
            for id in &dropped {
                log::info!("{}: point {id} left the frame under {spec}", file_name(image));
            }
            entry.points_output = Some(points_name);
            entry.dropped_points = dropped;
        }
        entries.push(entry);
    }
    Ok(entries)
}

/// Writes every image of `in_dir` under all twelve transforms into
/// `out_dir` as `<stem>__t<k>.<ext>`, plus `manifest.json`.
pub fn augment_dataset(
    in_dir: impl AsRef<Path>,
    out_dir: impl AsRef<Path>,
    opts: &AugmentOptions,
) -> Result<Vec<ManifestEntry>, AugmentError> {
    let (in_dir, out_dir) = (in_dir.as_ref(), out_dir.as_ref());
    fs::create_dir_all(out_dir).map_err(|source| AugmentError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let images = list_images(in_dir)?;
    let specs = enumerate_transforms_with_shift(opts.shift);
    let per_image = map_items(&images, opts.exec, |img| {
        augment_one(img, out_dir, &specs, opts)
    });
    let mut manifest = Vec::with_capacity(images.len() * specs.len());
    for entries in per_image {
        manifest.extend(entries?);
    }
    let manifest_path = out_dir.join(MANIFEST_NAME);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&manifest_path, json).map_err(|source| AugmentError::Io {
        path: manifest_path,
        source,
    })?;
    Ok(manifest)
}
