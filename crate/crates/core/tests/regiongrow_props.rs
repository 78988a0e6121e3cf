mod common;

use std::collections::BTreeSet;

use neurogrow::clickpoints::{ClickPoint, ClickPointSet};
use neurogrow::regiongrow::{grow_all, grow_region, RegionGrowParams, RegionGrower, StopReason};
use neurogrow::{Connectivity, GrayImage};
use proptest::prelude::*;

/// Small images over a handful of levels so ties are common.
fn image() -> impl Strategy<Value = GrayImage> {
    (2u32..=12, 2u32..=12).prop_flat_map(|(w, h)| {
        proptest::collection::vec(prop_oneof![Just(10u8), Just(20), Just(25), Just(40), Just(200)], (w * h) as usize)
            .prop_map(move |data| GrayImage::from_vec(w, h, data).unwrap())
    })
}

fn setup() -> impl Strategy<Value = (GrayImage, ClickPoint, RegionGrowParams)> {
    image().prop_flat_map(|img| {
        let (w, h) = img.dims();
        (
            Just(img),
            (0..w, 0..h),
            0.5f64..40.0,
            prop_oneof![Just(Connectivity::Four), Just(Connectivity::Eight)],
            1usize..=(w * h) as usize,
        )
            .prop_map(|(img, (x, y), t, connectivity, max_region)| {
                (
                    img,
                    ClickPoint::new(x, y, 1),
                    RegionGrowParams {
                        threshold: t,
                        connectivity,
                        max_region,
                    },
                )
            })
    })
}

fn conn_number(c: Connectivity) -> u8 {
    match c {
        Connectivity::Four => 4,
        Connectivity::Eight => 8,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn growth_order_matches_naive_rescan((img, seed, params) in setup()) {
        let region = grow_region(&img, seed, &params).unwrap();
        let want = common::region_grow_naive(
            &img,
            (seed.x, seed.y),
            params.threshold,
            conn_number(params.connectivity),
            params.max_region,
        );
        prop_assert_eq!(region.coords(), want);
        let set: BTreeSet<(u32, u32)> = region.coords().into_iter().collect();
        prop_assert!(set.contains(&(seed.x, seed.y)));
        prop_assert!(common::is_connected(&set, conn_number(params.connectivity)));
        prop_assert_eq!(grow_region(&img, seed, &params).unwrap(), region);
    }

    #[test]
    fn step_invariants_hold_throughout((img, seed, params) in setup()) {
        let mut g = RegionGrower::new(&img, seed, params).unwrap();
        let mut k = 0;
        loop {
            prop_assert_eq!(g.members().len(), k + 1);
            let recomputed: f64 = g.members().iter().map(|&i| img.data()[i] as f64).sum::<f64>()
                / g.members().len() as f64;
            prop_assert!((g.mean() - recomputed).abs() <= 1e-9 * recomputed.max(1.0));
            // frontier = non-member neighbours of members
            let mut want = BTreeSet::new();
            for &m in g.members() {
                params.connectivity.for_each_neighbor(m, img.width(), img.height(), |j| {
                    if !g.is_member(j) {
                        want.insert(j);
                    }
                });
            }
            prop_assert_eq!(g.frontier(), want.into_iter().collect::<Vec<_>>());
            if g.step().is_none() {
                break;
            }
            k += 1;
        }
        let mean = g.mean();
        let frontier = g.frontier();
        match g.stop_reason().unwrap() {
            StopReason::FrontierExhausted => prop_assert!(frontier.is_empty()),
            StopReason::Threshold => {
                for i in frontier {
                    prop_assert!((img.data()[i] as f64 - mean).abs() > params.threshold - 1e-9);
                }
            }
            StopReason::CapReached => prop_assert_eq!(g.members().len(), params.max_region),
        }
    }

    #[test]
    fn grow_all_regions_are_disjoint(img in image(), t in 0.5f64..40.0) {
        let (w, h) = img.dims();
        let points = (0..w.min(h)).map(|i| ClickPoint::new(i, i, i + 1)).collect();
        let seeds = ClickPointSet::new("d", points).unwrap();
        let params = RegionGrowParams { threshold: t, connectivity: Connectivity::Four, max_region: (w * h) as usize };
        let res = grow_all(&img, &seeds, &params).unwrap();
        let mut taken = BTreeSet::new();
        for p in &seeds {
            if res.missed_ids.contains(&p.id) {
                prop_assert!(taken.contains(&(p.x, p.y)));
                continue;
            }
            prop_assert_eq!(res.labels.get(p.x, p.y), p.id);
            let region: BTreeSet<(u32, u32)> = (0..h)
                .flat_map(|y| (0..w).map(move |x| (x, y)))
                .filter(|&(x, y)| res.labels.get(x, y) == p.id)
                .collect();
            prop_assert!(common::is_connected(&region, 4));
            prop_assert!(region.is_disjoint(&taken));
            taken.extend(region);
        }
        prop_assert_eq!(grow_all(&img, &seeds, &params).unwrap(), res);
    }
}
