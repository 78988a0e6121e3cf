//! Raster data model, lossless file I/O and grayscale binarization.
//!
//! Everything in the crate operates on row-major rasters indexed by
//! `(x, y)` = `(column, row)`. Files are either binary PGM/PPM (`P5`/`P6`,
//! maxval 255) or PNG. Masks are written as 8-bit images with the positive
//! class encoded as 255 and everything else as 0.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ExtendedColorType, ImageBuffer, Luma};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt image data in {path}: {reason}")]
    CorruptData { path: PathBuf, reason: String },
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("invalid raster dimensions {width}x{height}")]
    InvalidDimensions { width: u32, height: u32 },
    #[error("pixel buffer has {actual} entries, expected {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("label {0} does not fit in a 16-bit label image")]
    LabelOverflow(u32),
    #[error("image has a single intensity level ({0}); supply a fixed threshold")]
    DegenerateHistogram(u8),
}

pub type Result<T> = std::result::Result<T, RasterError>;

/// Row-major 2D grid of `T`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Raster<T> {
    width: u32,
    height: u32,
    data: Vec<T>,
}

/// 8-bit grayscale image.
pub type GrayImage = Raster<u8>;
/// Per-pixel neuron id, 0 meaning unlabeled.
pub type LabelRaster = Raster<u32>;
/// 8-bit RGB image, used for annotation overlays.
pub type RgbImage = Raster<[u8; 3]>;

impl<T: Copy> Raster<T> {
    pub fn from_vec(width: u32, height: u32, data: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(RasterError::InvalidDimensions { width, height });
        }
        let expected = width as usize * height as usize;
        if data.len() != expected {
            return Err(RasterError::LengthMismatch {
                expected,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Panics on zero dimensions.
    pub fn filled(width: u32, height: u32, value: T) -> Self {
        assert!(width > 0 && height > 0, "raster dimensions must be positive");
        Self {
            width,
            height,
            data: vec![value; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> T) -> Self {
        assert!(width > 0 && height > 0, "raster dimensions must be positive");
        let mut data = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.height
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    #[inline]
    pub fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (u32, u32) {
        let w = self.width as usize;
        ((index % w) as u32, (index / w) as u32)
    }

    #[inline]
    pub fn in_bounds(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && x < self.width as i64 && y < self.height as i64
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> T {
        self.data[self.index(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: T) {
        let i = self.index(x, y);
        self.data[i] = value;
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> Raster<U> {
        Raster {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl<T> fmt::Debug for Raster<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Raster({}x{})", self.width, self.height)
    }
}

/// Which class a mask's `true` pixels stand for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PositiveClass {
    Neuron,
    Border,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    bits: Raster<bool>,
    positive: PositiveClass,
}

impl BinaryMask {
    pub fn new(bits: Raster<bool>, positive: PositiveClass) -> Self {
        Self { bits, positive }
    }

    pub fn from_vec(
        width: u32,
        height: u32,
        bits: Vec<bool>,
        positive: PositiveClass,
    ) -> Result<Self> {
        Ok(Self::new(Raster::from_vec(width, height, bits)?, positive))
    }

    pub fn empty(width: u32, height: u32, positive: PositiveClass) -> Self {
        Self::new(Raster::filled(width, height, false), positive)
    }

    /// Interprets an 8-bit image as a mask: intensities ≥ 128 are positive.
    pub fn from_gray(img: &GrayImage, positive: PositiveClass) -> Self {
        Self::new(img.map(|v| v >= 128), positive)
    }

    pub fn to_gray(&self) -> GrayImage {
        self.bits.map(|b| if b { 255 } else { 0 })
    }

    #[inline]
    pub fn positive_class(&self) -> PositiveClass {
        self.positive
    }

    pub fn with_class(mut self, positive: PositiveClass) -> Self {
        self.positive = positive;
        self
    }

    #[inline]
    pub fn width(&self) -> u32 {
        self.bits.width
    }

    #[inline]
    pub fn height(&self) -> u32 {
        self.bits.height
    }

    #[inline]
    pub fn dims(&self) -> (u32, u32) {
        self.bits.dims()
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits.get(x, y)
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        self.bits.set(x, y, value)
    }

    pub fn bits(&self) -> &Raster<bool> {
        &self.bits
    }

    pub fn bits_mut(&mut self) -> &mut Raster<bool> {
        &mut self.bits
    }

    pub fn as_slice(&self) -> &[bool] {
        self.bits.data()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.data().iter().filter(|&&b| b).count()
    }

    /// True when every positive pixel of `self` is positive in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims() == other.dims()
            && self
                .as_slice()
                .iter()
                .zip(other.as_slice())
                .all(|(&a, &b)| !a || b)
    }
}

impl fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "BinaryMask({}x{}, {:?})",
            self.width(),
            self.height(),
            self.positive
        )?;
        for row in self.bits.data().chunks(self.width() as usize) {
            let line: String = row.iter().map(|&b| if b { '#' } else { '.' }).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// File I/O

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Convert colour inputs to luma (BT.601) instead of rejecting them.
    pub luma: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FileKind {
    Pnm,
    Png,
}

fn file_kind(path: &Path) -> Result<FileKind> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("pgm") | Some("ppm") | Some("pnm") => Ok(FileKind::Pnm),
        Some("png") => Ok(FileKind::Png),
        _ => Err(RasterError::UnsupportedFormat(format!(
            "{}: expected .pgm, .ppm or .png",
            path.display()
        ))),
    }
}

/// True for file names this module can read.
pub fn is_image_path(path: &Path) -> bool {
    file_kind(path).is_ok()
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| {
        if source.kind() == io::ErrorKind::NotFound {
            RasterError::MissingFile(path.to_path_buf())
        } else {
            RasterError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| RasterError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// BT.601 luma, rounded to nearest.
#[inline]
pub fn luma(rgb: [u8; 3]) -> u8 {
    let [r, g, b] = rgb.map(u32::from);
    ((299 * r + 587 * g + 114 * b + 500) / 1000) as u8
}

struct Pnm {
    magic: u8,
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

fn parse_pnm(bytes: &[u8], path: &Path) -> Result<Pnm> {
    let corrupt = |reason: &str| RasterError::CorruptData {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    if bytes.len() < 2 || bytes[0] != b'P' {
        return Err(corrupt("missing PNM magic"));
    }
    let magic = bytes[1];
    if magic != b'5' && magic != b'6' {
        return Err(RasterError::UnsupportedFormat(format!(
            "{}: only binary P5/P6 PNM files are supported",
            path.display()
        )));
    }
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in fields.iter_mut() {
        // whitespace and comments
        loop {
            match bytes.get(pos) {
                Some(c) if c.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&c| c != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(corrupt("truncated header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(corrupt("malformed header field"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| corrupt("header field out of range"))?;
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(c) if c.is_ascii_whitespace() => pos += 1,
        _ => return Err(corrupt("missing separator after header")),
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(RasterError::UnsupportedFormat(format!(
            "{}: maxval {maxval}, only 8-bit (255) is supported",
            path.display()
        )));
    }
    if width == 0 || height == 0 {
        return Err(RasterError::InvalidDimensions { width, height });
    }
    let channels = if magic == b'5' { 1 } else { 3 };
    let expected = width as usize * height as usize * channels;
    let body = &bytes[pos..];
    if body.len() < expected {
        return Err(corrupt("pixel data shorter than header declares"));
    }
    if body.len() > expected {
        return Err(corrupt("trailing bytes after pixel data"));
    }
    Ok(Pnm {
        magic,
        width,
        height,
        pixels: body.to_vec(),
    })
}

fn rgb_from_bytes(width: u32, height: u32, bytes: &[u8]) -> Result<RgbImage> {
    let data = bytes.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    Raster::from_vec(width, height, data)
}

fn decode_png(bytes: &[u8], path: &Path) -> Result<DynamicImage> {
    image::load_from_memory_with_format(bytes, image::ImageFormat::Png).map_err(|e| {
        RasterError::CorruptData {
            path: path.to_path_buf(),
            reason: e.to_string(),
        }
    })
}

pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    load_image_with(path, LoadOptions::default())
}

pub fn load_image_with(path: impl AsRef<Path>, opts: LoadOptions) -> Result<GrayImage> {
    let path = path.as_ref();
    let kind = file_kind(path)?;
    let bytes = read_bytes(path)?;
    let colour_rejected = || {
        RasterError::UnsupportedFormat(format!(
            "{}: multi-channel image; pass the luma conversion flag to convert it",
            path.display()
        ))
    };
    match kind {
        FileKind::Pnm => {
            let pnm = parse_pnm(&bytes, path)?;
            if pnm.magic == b'5' {
                Raster::from_vec(pnm.width, pnm.height, pnm.pixels)
            } else if opts.luma {
                Ok(rgb_from_bytes(pnm.width, pnm.height, &pnm.pixels)?.map(luma))
            } else {
                Err(colour_rejected())
            }
        }
        FileKind::Png => {
            let img = decode_png(&bytes, path)?;
            match img {
                DynamicImage::ImageLuma8(buf) => {
                    let (w, h) = buf.dimensions();
                    Raster::from_vec(w, h, buf.into_raw())
                }
                DynamicImage::ImageLumaA8(_)
                | DynamicImage::ImageRgb8(_)
                | DynamicImage::ImageRgba8(_) => {
                    if !opts.luma {
                        return Err(colour_rejected());
                    }
                    let rgb = img.to_rgb8();
                    let (w, h) = rgb.dimensions();
                    Ok(rgb_from_bytes(w, h, rgb.as_raw())?.map(luma))
                }
                other => Err(RasterError::UnsupportedFormat(format!(
                    "{}: {:?} pixels, only 8-bit images are supported",
                    path.display(),
                    other.color()
                ))),
            }
        }
    }
}

/// Loads an 8-bit colour image (PPM `P6` or RGB/RGBA PNG); grayscale
/// inputs are expanded to three equal channels.
pub fn load_rgb(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let kind = file_kind(path)?;
    let bytes = read_bytes(path)?;
    match kind {
        FileKind::Pnm => {
            let pnm = parse_pnm(&bytes, path)?;
            if pnm.magic == b'6' {
                rgb_from_bytes(pnm.width, pnm.height, &pnm.pixels)
            } else {
                Ok(Raster::from_vec(pnm.width, pnm.height, pnm.pixels)?.map(|v| [v, v, v]))
            }
        }
        FileKind::Png => {
            let img = decode_png(&bytes, path)?;
            match img {
                DynamicImage::ImageLuma8(_)
                | DynamicImage::ImageLumaA8(_)
                | DynamicImage::ImageRgb8(_)
                | DynamicImage::ImageRgba8(_) => {
                    let rgb = img.to_rgb8();
                    let (w, h) = rgb.dimensions();
                    rgb_from_bytes(w, h, rgb.as_raw())
                }
                other => Err(RasterError::UnsupportedFormat(format!(
                    "{}: {:?} pixels, only 8-bit images are supported",
                    path.display(),
                    other.color()
                ))),
            }
        }
    }
}

/// Anything that can be written as an 8-bit single-channel image.
pub trait GrayEncode {
    fn encode_dims(&self) -> (u32, u32);
    fn encode_gray(&self) -> std::borrow::Cow<'_, [u8]>;
}

impl GrayEncode for GrayImage {
    fn encode_dims(&self) -> (u32, u32) {
        self.dims()
    }

    fn encode_gray(&self) -> std::borrow::Cow<'_, [u8]> {
        std::borrow::Cow::Borrowed(self.data())
    }
}

impl GrayEncode for BinaryMask {
    fn encode_dims(&self) -> (u32, u32) {
        self.dims()
    }

    fn encode_gray(&self) -> std::borrow::Cow<'_, [u8]> {
        std::borrow::Cow::Owned(self.to_gray().into_vec())
    }
}

pub fn encode_pgm(width: u32, height: u32, pixels: &[u8]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

fn encode_png(
    path: &Path,
    bytes: &[u8],
    width: u32,
    height: u32,
    color: ExtendedColorType,
) -> Result<()> {
    let mut buf = io::Cursor::new(Vec::new());
    image::write_buffer_with_format(
        &mut buf,
        bytes,
        width,
        height,
        color,
        image::ImageFormat::Png,
    )
    .map_err(|e| RasterError::Io {
        path: path.to_path_buf(),
        source: io::Error::other(e),
    })?;
    write_bytes(path, &buf.into_inner())
}

/// Writes an image or mask; the format follows the file extension.
pub fn save_image<I: GrayEncode + ?Sized>(img: &I, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = img.encode_dims();
    let pixels = img.encode_gray();
    match file_kind(path)? {
        FileKind::Pnm => write_bytes(path, &encode_pgm(w, h, &pixels)),
        FileKind::Png => encode_png(path, &pixels, w, h, ExtendedColorType::L8),
    }
}

pub fn save_rgb(img: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let (w, h) = img.dims();
    let bytes: Vec<u8> = img.data().iter().flatten().copied().collect();
    match file_kind(path)? {
        FileKind::Pnm => {
            let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
            out.extend_from_slice(&bytes);
            write_bytes(path, &out)
        }
        FileKind::Png => encode_png(path, &bytes, w, h, ExtendedColorType::Rgb8),
    }
}

pub fn load_mask(path: impl AsRef<Path>, positive: PositiveClass) -> Result<BinaryMask> {
    Ok(BinaryMask::from_gray(&load_image(path)?, positive))
}

/// Writes a label raster as a 16-bit grayscale PNG (one id per pixel).
pub fn save_labels(labels: &LabelRaster, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut values = Vec::with_capacity(labels.len());
    for &id in labels.data() {
        values.push(u16::try_from(id).map_err(|_| RasterError::LabelOverflow(id))?);
    }
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(labels.width(), labels.height(), values)
            .expect("buffer length matches dimensions");
    let mut out = io::Cursor::new(Vec::new());
    buf.write_to(&mut out, image::ImageFormat::Png)
        .map_err(|e| RasterError::Io {
            path: path.to_path_buf(),
            source: io::Error::other(e),
        })?;
    write_bytes(path, &out.into_inner())
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<LabelRaster> {
    let path = path.as_ref();
    let bytes = read_bytes(path)?;
    match decode_png(&bytes, path)? {
        DynamicImage::ImageLuma16(buf) => {
            let (w, h) = buf.dimensions();
            Raster::from_vec(w, h, buf.into_raw().into_iter().map(u32::from).collect())
        }
        DynamicImage::ImageLuma8(buf) => {
            let (w, h) = buf.dimensions();
            Raster::from_vec(w, h, buf.into_raw().into_iter().map(u32::from).collect())
        }
        other => Err(RasterError::UnsupportedFormat(format!(
            "{}: {:?} is not a label image",
            path.display(),
            other.color()
        ))),
    }
}

// ---------------------------------------------------------------------------
// Thresholding

/// Marks every pixel darker than `t` as membrane (`Border`).
pub fn threshold_fixed(img: &GrayImage, t: u8) -> BinaryMask {
    BinaryMask::new(img.map(|v| v < t), PositiveClass::Border)
}

pub fn histogram(img: &GrayImage) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for &v in img.data() {
        hist[v as usize] += 1;
    }
    hist
}

/// Otsu's threshold on a 256-bin histogram.
///
/// Candidates `t` in `1..=255` split the pixels into `{v < t}` and
/// `{v >= t}`. The smallest `t` reaching the maximal between-class variance
/// is returned, so thresholds yielding the same partition collapse to the one
/// just above the darker class.
pub fn otsu_level(hist: &[u64; 256]) -> std::result::Result<u8, u8> {
    let total: u64 = hist.iter().sum();
    let sum_all: f64 = hist
        .iter()
        .enumerate()
        .map(|(v, &n)| v as f64 * n as f64)
        .sum();
    let mut n_low = 0u64;
    let mut sum_low = 0f64;
    let mut best: Option<(u8, f64)> = None;
    for t in 1..=255usize {
        n_low += hist[t - 1];
        sum_low += (t - 1) as f64 * hist[t - 1] as f64;
        let n_high = total - n_low;
        if n_low == 0 || n_high == 0 {
            continue;
        }
        let (nl, nh) = (n_low as f64, n_high as f64);
        let sum_high = sum_all - sum_low;
        // proportional to w0 * w1 * (mu0 - mu1)^2
        let d = nh * sum_low - nl * sum_high;
        let score = d * d / (nl * nh);
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((t as u8, score));
        }
    }
    match best {
        Some((t, _)) => Ok(t),
        None => {
            let level = hist.iter().position(|&n| n > 0).unwrap_or(0) as u8;
            Err(level)
        }
    }
}

pub fn threshold_otsu(img: &GrayImage) -> Result<(BinaryMask, u8)> {
    let t = otsu_level(&histogram(img)).map_err(RasterError::DegenerateHistogram)?;
    Ok((threshold_fixed(img, t), t))
}
