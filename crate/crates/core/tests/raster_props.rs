mod common;

use neurogrow::raster::{
    encode_pgm, histogram, load_image, load_labels, load_mask, otsu_level, save_image,
    save_labels, threshold_fixed, threshold_otsu, RasterError,
};
use neurogrow::{BinaryMask, GrayImage, LabelRaster, PositiveClass};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gray(max_side: u32) -> impl Strategy<Value = GrayImage> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
        proptest::collection::vec(any::<u8>(), (w * h) as usize)
            .prop_map(move |data| GrayImage::from_vec(w, h, data).unwrap())
    })
}

#[test]
fn pgm_and_png_round_trip_on_random_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for k in 0..20 {
        let (w, h) = (rng.gen_range(1..40), rng.gen_range(1..40));
        let data: Vec<u8> = (0..w * h).map(|_| rng.gen()).collect();
        let img = GrayImage::from_vec(w, h, data.clone()).unwrap();

        let pgm = dir.path().join(format!("f{k}.pgm"));
        std::fs::write(&pgm, encode_pgm(w, h, &data)).unwrap();
        let loaded = load_image(&pgm).unwrap();
        assert_eq!(loaded, img);
        let again = dir.path().join(format!("g{k}.pgm"));
        save_image(&loaded, &again).unwrap();
        assert_eq!(std::fs::read(&pgm).unwrap(), std::fs::read(&again).unwrap());

        let png = dir.path().join(format!("f{k}.png"));
        save_image(&img, &png).unwrap();
        assert_eq!(load_image(&png).unwrap(), img);

        let mask = BinaryMask::from_vec(w, h, data.iter().map(|&v| v % 3 == 0).collect(), PositiveClass::Neuron)
            .unwrap();
        let mpath = dir.path().join(format!("m{k}.png"));
        save_image(&mask, &mpath).unwrap();
        assert_eq!(load_mask(&mpath, PositiveClass::Neuron).unwrap(), mask);
    }
}

#[test]
fn labels_round_trip_and_overflow() {
    let dir = tempfile::tempdir().unwrap();
    let labels = LabelRaster::from_fn(9, 4, |x, y| (x * 7 + y * 1000) % 65536);
    let path = dir.path().join("l.png");
    save_labels(&labels, &path).unwrap();
    assert_eq!(load_labels(&path).unwrap(), labels);
    let big = LabelRaster::filled(2, 2, 70_000);
    assert!(matches!(
        save_labels(&big, dir.path().join("big.png")),
        Err(RasterError::LabelOverflow(_))
    ));
}

#[test]
fn otsu_matches_exhaustive_search_on_bimodal_images() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..40 {
        let lo: u8 = rng.gen_range(0..100);
        let hi: u8 = rng.gen_range(150..=255);
        let pixels: Vec<u8> = (0..500)
            .map(|_| {
                let centre = if rng.gen_bool(0.3) { lo } else { hi } as i32;
                (centre + rng.gen_range(-20..=20)).clamp(0, 255) as u8
            })
            .collect();
        let img = GrayImage::from_vec(25, 20, pixels.clone()).unwrap();
        let (want, _) = common::otsu_exhaustive(&pixels).unwrap();
        let (mask, t) = threshold_otsu(&img).unwrap();
        assert_eq!(t, want);
        assert_eq!(mask, threshold_fixed(&img, t));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn threshold_is_monotone(img in gray(24), a in any::<u8>(), b in any::<u8>()) {
        let (t1, t2) = (a.min(b), a.max(b));
        let m1 = threshold_fixed(&img, t1);
        let m2 = threshold_fixed(&img, t2);
        prop_assert!(m1.is_subset_of(&m2));
        prop_assert_eq!(m1.positive_class(), PositiveClass::Border);
        for (i, &v) in img.data().iter().enumerate() {
            prop_assert_eq!(m1.as_slice()[i], v < t1);
        }
    }

    #[test]
    fn otsu_level_matches_exhaustive(img in gray(16)) {
        let distinct = img.data().iter().collect::<std::collections::BTreeSet<_>>().len();
        let got = otsu_level(&histogram(&img));
        match common::otsu_exhaustive(img.data()) {
            Some((t, _)) => prop_assert_eq!(got, Ok(t)),
            None => {
                prop_assert_eq!(distinct, 1);
                prop_assert!(got.is_err());
            }
        }
    }
}
