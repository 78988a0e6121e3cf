//! Single-pixel click-point annotations: the seeds of both growing methods.
//!
//! On disk a set is either a JSON array of `{"x", "y", "id"}` objects, a JSON
//! object `{"slice": name, "points": [...]}`, or a CSV file with an `id,x,y`
//! header. Sets are always kept sorted by id.

use std::collections::HashSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster::{BinaryMask, GrayImage, PositiveClass, Raster, RgbImage};

#[derive(Debug, Error)]
pub enum ClickPointError {
    #[error("click-point file {path} violates the schema: {reason}")]
    SchemaViolation { path: PathBuf, reason: String },
    #[error("ids {first} and {second} share pixel ({x}, {y})")]
    DuplicateCoordinate { x: u32, y: u32, first: u32, second: u32 },
    #[error("id {0} appears more than once")]
    DuplicateId(u32),
    #[error("id must be a positive integer")]
    ZeroId,
    #[error("point {id} at ({x}, {y}) lies outside a {width}x{height} slice")]
    OutOfBounds {
        id: u32,
        x: u32,
        y: u32,
        width: u32,
        height: u32,
    },
    #[error("overlay is {0}x{1} but base image is {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

pub type Result<T> = std::result::Result<T, ClickPointError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClickPoint {
    pub x: u32,
    pub y: u32,
    pub id: u32,
}

impl ClickPoint {
    pub fn new(x: u32, y: u32, id: u32) -> Self {
        Self { x, y, id }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ClickPointSet {
    #[serde(rename = "slice")]
    slice_name: String,
    points: Vec<ClickPoint>,
}

impl ClickPointSet {
    /// Validates uniqueness of ids and coordinates and sorts by id.
    pub fn new(slice_name: impl Into<String>, mut points: Vec<ClickPoint>) -> Result<Self> {
        let mut ids = HashSet::with_capacity(points.len());
        for p in &points {
            if p.id == 0 {
                return Err(ClickPointError::ZeroId);
            }
            if !ids.insert(p.id) {
                return Err(ClickPointError::DuplicateId(p.id));
            }
        }
        points.sort_by_key(|p| p.id);
        let mut seen = std::collections::HashMap::with_capacity(points.len());
        for p in &points {
            if let Some(&first) = seen.get(&(p.x, p.y)) {
                return Err(ClickPointError::DuplicateCoordinate {
                    x: p.x,
                    y: p.y,
                    first,
                    second: p.id,
                });
            }
            seen.insert((p.x, p.y), p.id);
        }
        Ok(Self {
            slice_name: slice_name.into(),
            points,
        })
    }

    pub fn empty(slice_name: impl Into<String>) -> Self {
        Self {
            slice_name: slice_name.into(),
            points: Vec::new(),
        }
    }

    pub fn slice_name(&self) -> &str {
        &self.slice_name
    }

    pub fn with_slice_name(mut self, name: impl Into<String>) -> Self {
        self.slice_name = name.into();
        self
    }

    pub fn points(&self) -> &[ClickPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ClickPoint> {
        self.points.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.points.iter().map(|p| p.id)
    }

    pub fn check_bounds(&self, width: u32, height: u32) -> Result<()> {
        match self.points.iter().find(|p| p.x >= width || p.y >= height) {
            Some(p) => Err(ClickPointError::OutOfBounds {
                id: p.id,
                x: p.x,
                y: p.y,
                width,
                height,
            }),
            None => Ok(()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("click-point sets always serialize")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|source| ClickPointError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

impl<'a> IntoIterator for &'a ClickPointSet {
    type Item = &'a ClickPoint;
    type IntoIter = std::slice::Iter<'a, ClickPoint>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoint {
    x: u32,
    y: u32,
    id: u32,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawFile {
    List(Vec<RawPoint>),
    Object {
        #[serde(default)]
        slice: Option<String>,
        points: Vec<RawPoint>,
    },
}

fn default_slice_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Parses JSON click-point text. `fallback_name` names the slice when the
/// document does not.
pub fn parse_json(text: &str, fallback_name: &str, path: &Path) -> Result<ClickPointSet> {
    let raw: RawFile = serde_json::from_str(text).map_err(|e| ClickPointError::SchemaViolation {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let (name, points) = match raw {
        RawFile::List(points) => (fallback_name.to_string(), points),
        RawFile::Object { slice, points } => {
            (slice.unwrap_or_else(|| fallback_name.to_string()), points)
        }
    };
    let points = points
        .into_iter()
        .map(|p| ClickPoint::new(p.x, p.y, p.id))
        .collect();
    ClickPointSet::new(name, points)
}

pub fn parse_csv(text: &str, fallback_name: &str, path: &Path) -> Result<ClickPointSet> {
    let schema = |reason: String| ClickPointError::SchemaViolation {
        path: path.to_path_buf(),
        reason,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| schema(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| schema(format!("missing `{name}` column")))
    };
    let (ci, cx, cy) = (col("id")?, col("x")?, col("y")?);
    let mut points = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| schema(e.to_string()))?;
        let field = |c: usize| -> Result<u32> {
            record
                .get(c)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| schema(format!("row {}: bad integer in column {c}", line + 1)))
        };
        points.push(ClickPoint::new(field(cx)?, field(cy)?, field(ci)?));
    }
    ClickPointSet::new(fallback_name, points)
}

/// Reads a click-point file; `.csv` files use the CSV reader, everything
/// else is treated as JSON.
pub fn parse_clickpoints(path: impl AsRef<Path>) -> Result<ClickPointSet> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ClickPointError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let name = default_slice_name(path);
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        parse_csv(&text, &name, path)
    } else {
        parse_json(&text, &name, path)
    }
}

/// Pixel classification used to find click markers in an overlay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RedMarker {
    pub red_min: u8,
    pub green_max: u8,
    pub blue_max: u8,
}

impl Default for RedMarker {
    fn default() -> Self {
        Self {
            red_min: 200,
            green_max: 80,
            blue_max: 80,
        }
    }
}

impl RedMarker {
    #[inline]
    pub fn matches(&self, [r, g, b]: [u8; 3]) -> bool {
        r >= self.red_min && g <= self.green_max && b <= self.blue_max
    }
}

/// One click-point per 8-connected blob of marker pixels, placed at the
/// blob centroid (rounded half away from zero). Ids follow row-major
/// discovery order of the blobs.
pub fn extract_from_overlay(
    overlay: &RgbImage,
    base: &GrayImage,
    marker: RedMarker,
) -> Result<ClickPointSet> {
    if overlay.dims() != base.dims() {
        let (ow, oh) = overlay.dims();
        let (bw, bh) = base.dims();
        return Err(ClickPointError::DimensionMismatch(ow, oh, bw, bh));
    }
    let (w, h) = overlay.dims();
    let red: Vec<bool> = overlay.data().iter().map(|&p| marker.matches(p)).collect();
    let mut visited = vec![false; red.len()];
    let mut stack = Vec::new();
    let mut points = Vec::new();
    for start in 0..red.len() {
        if !red[start] || visited[start] {
            continue;
        }
        visited[start] = true;
        stack.push(start);
        let (mut sx, mut sy, mut n) = (0u64, 0u64, 0u64);
        while let Some(i) = stack.pop() {
            let (x, y) = ((i % w as usize) as i64, (i / w as usize) as i64);
            sx += x as u64;
            sy += y as u64;
            n += 1;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let j = ny as usize * w as usize + nx as usize;
                    if red[j] && !visited[j] {
                        visited[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        let cx = (sx as f64 / n as f64).round() as u32;
        let cy = (sy as f64 / n as f64).round() as u32;
        let id = points.len() as u32 + 1;
        points.push(ClickPoint::new(cx, cy, id));
    }
    ClickPointSet::new("", points)
}

/// Mask that is true exactly at the click-points.
pub fn rasterize_points(set: &ClickPointSet, width: u32, height: u32) -> Result<BinaryMask> {
    set.check_bounds(width, height)?;
    let mut bits = Raster::filled(width, height, false);
    for p in set {
        bits.set(p.x, p.y, true);
    }
    Ok(BinaryMask::new(bits, PositiveClass::Neuron))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn json(text: &str) -> Result<ClickPointSet> {
        parse_json(text, "s", Path::new("s.json"))
    }

    #[test]
    fn parse_examples() {
        let set = json(r#"[{"x":10,"y":20,"id":1}]"#).unwrap();
        assert_eq!(set.points(), &[ClickPoint::new(10, 20, 1)]);
        assert!(json("[]").unwrap().is_empty());
        assert!(matches!(
            json(r#"[{"x":1,"y":1,"id":7},{"x":2,"y":2,"id":7}]"#),
            Err(ClickPointError::DuplicateId(7))
        ));
        assert!(matches!(
            json(r#"[{"x":1,"y":1,"id":7},{"x":1,"y":1,"id":8}]"#),
            Err(ClickPointError::DuplicateCoordinate { first: 7, second: 8, .. })
        ));
    }

    #[test]
    fn object_form_and_sorting() {
        let set = json(r#"{"slice":"z4500","points":[{"x":3,"y":1,"id":9},{"x":0,"y":0,"id":2}]}"#)
            .unwrap();
        assert_eq!(set.slice_name(), "z4500");
        assert_eq!(set.ids().collect::<Vec<_>>(), vec![2, 9]);
    }

    #[test]
    fn schema_violations() {
        for bad in [
            r#"{"x":1}"#,
            r#"[{"x":-1,"y":0,"id":1}]"#,
            r#"[{"x":1,"y":0}]"#,
            r#"[{"x":1,"y":0,"id":1,"z":4}]"#,
            "not json",
        ] {
            assert!(
                matches!(json(bad), Err(ClickPointError::SchemaViolation { .. })),
                "{bad}"
            );
        }
        assert!(matches!(
            json(r#"[{"x":1,"y":0,"id":0}]"#),
            Err(ClickPointError::ZeroId)
        ));
    }

    #[test]
    fn csv_input() {
        let set = parse_csv("id,x,y\n2, 5, 6\n1,0,0\n", "a", Path::new("a.csv")).unwrap();
        assert_eq!(
            set.points(),
            &[ClickPoint::new(0, 0, 1), ClickPoint::new(5, 6, 2)]
        );
        assert!(parse_csv("x,y\n1,2\n", "a", Path::new("a.csv")).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let set = ClickPointSet::new(
            "slice",
            vec![ClickPoint::new(4, 2, 3), ClickPoint::new(1, 1, 1)],
        )
        .unwrap();
        assert_eq!(json(&set.to_json()).unwrap(), set);
    }

    #[test]
    fn overlay_extraction() {
        let base = GrayImage::filled(10, 10, 128);
        let mut overlay = RgbImage::filled(10, 10, [128, 128, 128]);
        let empty = extract_from_overlay(&overlay, &base, RedMarker::default()).unwrap();
        assert!(empty.is_empty());

        for y in 4..=6 {
            for x in 4..=6 {
                overlay.set(x, y, [255, 0, 0]);
            }
        }
        let one = extract_from_overlay(&overlay, &base, RedMarker::default()).unwrap();
        assert_eq!(one.points(), &[ClickPoint::new(5, 5, 1)]);

        let wrong = GrayImage::filled(9, 10, 0);
        assert!(matches!(
            extract_from_overlay(&overlay, &wrong, RedMarker::default()),
            Err(ClickPointError::DimensionMismatch(..))
        ));
    }

    #[test]
    fn rasterize() {
        let set = ClickPointSet::empty("e");
        assert_eq!(rasterize_points(&set, 4, 4).unwrap().count_ones(), 0);
        let set = ClickPointSet::new("p", vec![ClickPoint::new(0, 0, 1)]).unwrap();
        let m = rasterize_points(&set, 4, 4).unwrap();
        assert_eq!(m.count_ones(), 1);
        assert!(m.get(0, 0));
        assert_eq!(rasterize_points(&set, 1, 1).unwrap().count_ones(), 1);
        let far = ClickPointSet::new("p", vec![ClickPoint::new(4, 0, 1)]).unwrap();
        assert!(matches!(
            rasterize_points(&far, 4, 4),
            Err(ClickPointError::OutOfBounds { id: 1, .. })
        ));
    }
}
