use std::path::Path;

use neurogrow::clickpoints::{
    extract_from_overlay, parse_clickpoints, parse_csv, parse_json, rasterize_points, ClickPoint,
    ClickPointError, ClickPointSet, RedMarker,
};
use neurogrow::raster::Raster;
use neurogrow::{GrayImage, RgbImage};
use proptest::prelude::*;

fn point_set() -> impl Strategy<Value = ClickPointSet> {
    (
        proptest::collection::btree_map(1u32..10_000, (0u32..5000, 0u32..5000), 0..20),
        "[a-z0-9_]{0,8}",
    )
        .prop_filter_map("unique coordinates", |(by_id, name)| {
            let pts = by_id.into_iter().map(|(id, (x, y))| ClickPoint::new(x, y, id)).collect();
            ClickPointSet::new(name, pts).ok()
        })
}

/// Grey base with red squares of side `2r+1` centred on `centres`.
fn overlay(w: u32, h: u32, centres: &[(u32, u32)], r: u32) -> RgbImage {
    let mut img = Raster::filled(w, h, [120u8, 120, 120]);
    for &(cx, cy) in centres {
        for y in cy - r..=cy + r {
            for x in cx - r..=cx + r {
                img.set(x, y, [230, 30, 40]);
            }
        }
    }
    img
}

#[test]
fn two_blobs_give_two_points_at_their_centres() {
    let img = overlay(40, 30, &[(30, 5), (8, 20)], 2);
    let base = GrayImage::filled(40, 30, 120);
    let set = extract_from_overlay(&img, &base, RedMarker::default()).unwrap();
    // row-major discovery: the blob at y=5 is found first
    assert_eq!(set.points(), &[ClickPoint::new(30, 5, 1), ClickPoint::new(8, 20, 2)]);
    assert_eq!(rasterize_points(&set, 40, 30).unwrap().count_ones(), 2);
}

#[test]
fn diagonal_touching_pixels_form_one_blob() {
    let mut img = Raster::filled(6, 6, [0u8, 0, 0]);
    img.set(1, 1, [255, 0, 0]);
    img.set(2, 2, [255, 0, 0]);
    img.set(3, 3, [255, 0, 0]);
    let set = extract_from_overlay(&img, &GrayImage::filled(6, 6, 0), RedMarker::default()).unwrap();
    assert_eq!(set.points(), &[ClickPoint::new(2, 2, 1)]);
}

#[test]
fn csv_and_json_agree() {
    let csv = "id,x,y\n2,4,5\n1,7,8\n";
    let from_csv = parse_csv(csv, "a", Path::new("a.csv")).unwrap();
    let from_json = parse_json(r#"{"slice":"a","points":[{"x":7,"y":8,"id":1},{"x":4,"y":5,"id":2}]}"#, "z", Path::new("a.json"))
        .unwrap();
    assert_eq!(from_csv, from_json);
    assert!(matches!(
        parse_json(r#"[{"x":1,"y":1}]"#, "a", Path::new("a.json")),
        Err(ClickPointError::SchemaViolation { .. })
    ));
    assert!(matches!(
        parse_json(r#"[{"x":1,"y":1,"id":7},{"x":2,"y":1,"id":7}]"#, "a", Path::new("a.json")),
        Err(ClickPointError::DuplicateId(7))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn json_round_trip(set in point_set()) {
        let back = parse_json(&set.to_json(), "fallback", Path::new("x.json")).unwrap();
        prop_assert_eq!(back, set.clone());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pts.json");
        set.save(&path).unwrap();
        prop_assert_eq!(parse_clickpoints(&path).unwrap(), set);
    }

    #[test]
    fn extraction_counts_components(
        cells in proptest::collection::btree_set((0u32..6, 0u32..5), 0..10),
        r in 0u32..=2,
    ) {
        // blobs on an 8-px lattice never touch, even diagonally
        let centres: Vec<(u32, u32)> = cells.iter().map(|&(i, j)| (4 + 8 * i, 4 + 8 * j)).collect();
        let img = overlay(52, 44, &centres, r);
        let set = extract_from_overlay(&img, &GrayImage::filled(52, 44, 0), RedMarker::default()).unwrap();
        prop_assert_eq!(set.len(), centres.len());
        prop_assert_eq!(rasterize_points(&set, 52, 44).unwrap().count_ones(), centres.len());
        let mut found: Vec<(u32, u32)> = set.iter().map(|p| (p.x, p.y)).collect();
        let mut want = centres.clone();
        found.sort();
        want.sort();
        prop_assert_eq!(found, want);
    }
}
