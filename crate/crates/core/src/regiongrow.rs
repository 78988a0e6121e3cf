//! Seeded region growing.
//!
//! A region starts as its seed pixel. Every step absorbs the frontier pixel
//! whose intensity is closest to the current region mean, then updates the
//! mean. Growth stops once the closest frontier pixel differs from the mean
//! by more than the threshold, when the frontier runs dry, or when the region
//! reaches its size cap.
//!
//! The frontier is a bucket queue keyed by intensity: one min-heap of pixel
//! indices per grey level. Because the mean moves after every absorption, a
//! cached per-pixel difference would go stale; bucketing by intensity keeps
//! the lookup exact. The best candidate is found by walking outward from the
//! mean to the nearest occupied level on each side. The mean is kept as an
//! integer sum over a count, so all comparisons are exact and ties resolve by
//! smallest row-major index.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::clickpoints::{ClickPoint, ClickPointSet};
use crate::floodfill::{check_seeds, FillError, FillResult, Result};
use crate::morphology::Connectivity;
use crate::raster::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionGrowParams {
    /// Largest admissible |intensity − mean|.
    pub threshold: f64,
    pub connectivity: Connectivity,
    pub max_region: usize,
}

impl RegionGrowParams {
    pub const DEFAULT_THRESHOLD: f64 = 30.0;
    pub const DEFAULT_CAP_FRACTION: f64 = 0.25;

    /// Defaults for a `width`×`height` slice: threshold 30, 4-connectivity,
    /// and a cap of a quarter of the slice area.
    pub fn for_dims(width: u32, height: u32) -> Self {
        let area = width as f64 * height as f64;
        Self {
            threshold: Self::DEFAULT_THRESHOLD,
            connectivity: Connectivity::Four,
            max_region: ((Self::DEFAULT_CAP_FRACTION * area).floor() as usize).max(1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(FillError::InvalidParams(format!(
                "region threshold must be positive and finite, got {}",
                self.threshold
            )));
        }
        if self.max_region == 0 {
            return Err(FillError::InvalidParams(
                "max region size must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// The closest frontier pixel differed from the mean by more than the threshold.
    Threshold,
    FrontierExhausted,
    /// A qualifying pixel remained but the region already had `max_region` pixels.
    CapReached,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    width: u32,
    /// Member indices in the order they joined; the seed comes first.
    pub pixels: Vec<usize>,
    pub stop: StopReason,
    pub mean: f64,
}

impl Region {
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn coords(&self) -> Vec<(u32, u32)> {
        let w = self.width as usize;
        self.pixels
            .iter()
            .map(|&i| ((i % w) as u32, (i / w) as u32))
            .collect()
    }

    /// Member indices in ascending order.
    pub fn sorted_pixels(&self) -> Vec<usize> {
        let mut v = self.pixels.clone();
        v.sort_unstable();
        v
    }
}

const OUTSIDE: u8 = 0;
const FRONTIER: u8 = 1;
const MEMBER: u8 = 2;
const BLOCKED: u8 = 3;

/// Step-by-step region growth from one seed.
pub struct RegionGrower<'a> {
    img: &'a GrayImage,
    params: RegionGrowParams,
    state: Vec<u8>,
    buckets: Vec<BinaryHeap<Reverse<usize>>>,
    occupied: [u32; 256],
    members: Vec<usize>,
    sum: u64,
    stop: Option<StopReason>,
}

impl<'a> RegionGrower<'a> {
    pub fn new(img: &'a GrayImage, seed: ClickPoint, params: RegionGrowParams) -> Result<Self> {
        Self::with_blocked(img, seed, params, None)
    }

    /// `blocked`, when given, is a label raster; pixels with a non-zero label
    /// never enter the frontier.
    pub fn with_blocked(
        img: &'a GrayImage,
        seed: ClickPoint,
        params: RegionGrowParams,
        blocked: Option<&[u32]>,
    ) -> Result<Self> {
        params.validate()?;
        let (w, h) = img.dims();
        if seed.x >= w || seed.y >= h {
            return Err(FillError::OutOfBoundsSeed {
                id: seed.id,
                x: seed.x,
                y: seed.y,
                width: w,
                height: h,
            });
        }
        let state = match blocked {
            Some(labels) => labels
                .iter()
                .map(|&l| if l != 0 { BLOCKED } else { OUTSIDE })
                .collect(),
            None => vec![OUTSIDE; img.len()],
        };
        let mut grower = Self {
            img,
            params,
            state,
            buckets: vec![BinaryHeap::new(); 256],
            occupied: [0; 256],
            members: Vec::new(),
            sum: 0,
            stop: None,
        };
        grower.absorb(img.index(seed.x, seed.y));
        Ok(grower)
    }

    fn absorb(&mut self, i: usize) {
        self.state[i] = MEMBER;
        self.members.push(i);
        self.sum += self.img.data()[i] as u64;
        let (w, h) = self.img.dims();
        let data = self.img.data();
        let state = &mut self.state;
        let buckets = &mut self.buckets;
        let occupied = &mut self.occupied;
        self.params.connectivity.for_each_neighbor(i, w, h, |j| {
            if state[j] == OUTSIDE {
                state[j] = FRONTIER;
                let v = data[j] as usize;
                buckets[v].push(Reverse(j));
                occupied[v] += 1;
            }
        });
    }

    /// Closest frontier pixel to the mean as `(|v·n − sum|, index)`.
    fn best_candidate(&self) -> Option<(u64, usize)> {
        let n = self.members.len() as u64;
        let floor_mean = (self.sum / n) as usize;
        let key = |v: usize| (v as u64 * n).abs_diff(self.sum);
        let top = |v: usize| self.buckets[v].peek().map(|r| r.0).expect("occupied bucket");
        let below = (0..=floor_mean).rev().find(|&v| self.occupied[v] > 0);
        let above = (floor_mean + 1..256).find(|&v| self.occupied[v] > 0);
        match (below, above) {
            (None, None) => None,
            (Some(v), None) | (None, Some(v)) => Some((key(v), top(v))),
            (Some(lo), Some(hi)) => {
                let (klo, khi) = (key(lo), key(hi));
                Some(match klo.cmp(&khi) {
                    std::cmp::Ordering::Less => (klo, top(lo)),
                    std::cmp::Ordering::Greater => (khi, top(hi)),
                    std::cmp::Ordering::Equal => (klo, top(lo).min(top(hi))),
                })
            }
        }
    }

    /// Adds one pixel, or returns `None` once growth has stopped.
    pub fn step(&mut self) -> Option<usize> {
        if self.stop.is_some() {
            return None;
        }
        let Some((key, index)) = self.best_candidate() else {
            self.stop = Some(StopReason::FrontierExhausted);
            return None;
        };
        let n = self.members.len() as f64;
        if key as f64 > self.params.threshold * n {
            self.stop = Some(StopReason::Threshold);
            return None;
        }
        if self.members.len() >= self.params.max_region {
            self.stop = Some(StopReason::CapReached);
            return None;
        }
        let v = self.img.data()[index] as usize;
        let popped = self.buckets[v].pop().map(|r| r.0);
        debug_assert_eq!(popped, Some(index));
        self.occupied[v] -= 1;
        self.absorb(index);
        Some(index)
    }

    pub fn run(mut self) -> Region {
        while self.step().is_some() {}
        self.into_region()
    }

    fn into_region(self) -> Region {
        let mean = self.mean();
        Region {
            width: self.img.width(),
            pixels: self.members,
            stop: self.stop.unwrap_or(StopReason::FrontierExhausted),
            mean,
        }
    }

    pub fn mean(&self) -> f64 {
        self.sum as f64 / self.members.len() as f64
    }

    /// Sum of member intensities; the mean is `sum / len`.
    pub fn sum(&self) -> u64 {
        self.sum
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn is_member(&self, index: usize) -> bool {
        self.state[index] == MEMBER
    }

    /// Current frontier, ascending by index.
    pub fn frontier(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self
            .buckets
            .iter()
            .flat_map(|b| b.iter().map(|r| r.0))
            .collect();
        f.sort_unstable();
        f
    }

    pub fn stop_reason(&self) -> Option<StopReason> {
        self.stop
    }
}

/// Grows one region from `seed`.
pub fn grow_region(img: &GrayImage, seed: ClickPoint, params: &RegionGrowParams) -> Result<Region> {
    Ok(RegionGrower::new(img, seed, *params)?.run())
}

/// Grows every seed in ascending id order. Pixels claimed by an earlier
/// region are off limits to later ones; a seed whose own pixel is already
/// claimed is missed, and a region stopped by the size cap is reported as
/// leaked and left out of the labels.
pub fn grow_all(
    img: &GrayImage,
    seeds: &ClickPointSet,
    params: &RegionGrowParams,
) -> Result<FillResult> {
    params.validate()?;
    let (w, h) = img.dims();
    check_seeds(seeds, w, h)?;
    let mut result = FillResult::new(w, h);
    for &seed in seeds {
        let start = img.index(seed.x, seed.y);
        if result.labels.data()[start] != 0 {
            result.missed_ids.push(seed.id);
            continue;
        }
        let region =
            RegionGrower::with_blocked(img, seed, *params, Some(result.labels.data()))?.run();
        if region.stop == StopReason::CapReached {
            result.leaked_ids.push(seed.id);
            continue;
        }
        let labels = result.labels.data_mut();
        for &i in &region.pixels {
            labels[i] = seed.id;
        }
    }
    Ok(result)
}
