//! Binary morphology: disk structuring elements, dilation, erosion, closing
//! and Zhang–Suen thinning.
//!
//! Dilation treats pixels outside the raster as background and erosion
//! treats them as foreground, which makes the pair adjoint on the finite
//! grid: closing is extensive and idempotent right up to the image edge.

use serde::{Deserialize, Serialize};

use crate::exec::for_each_row_mut;
use crate::raster::{BinaryMask, Raster};

/// Pixel adjacency used by fills and region growing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Connectivity {
    #[default]
    #[serde(rename = "4")]
    Four,
    #[serde(rename = "8")]
    Eight,
}

const N4: [(i32, i32); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];
const N8: [(i32, i32); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

impl Connectivity {
    pub fn offsets(self) -> &'static [(i32, i32)] {
        match self {
            Connectivity::Four => &N4,
            Connectivity::Eight => &N8,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            4 => Some(Connectivity::Four),
            8 => Some(Connectivity::Eight),
            _ => None,
        }
    }

    /// Calls `f` with the linear index of every in-bounds neighbour of `index`.
    #[inline]
    pub fn for_each_neighbor(self, index: usize, width: u32, height: u32, mut f: impl FnMut(usize)) {
        let w = width as usize;
        let (x, y) = ((index % w) as i64, (index / w) as i64);
        for &(dx, dy) in self.offsets() {
            let (nx, ny) = (x + dx as i64, y + dy as i64);
            if nx >= 0 && ny >= 0 && nx < width as i64 && ny < height as i64 {
                f(ny as usize * w + nx as usize);
            }
        }
    }
}

/// Digital disk: offsets with `dx² + dy² ≤ r² + r`, i.e. inside a circle of
/// radius `r + ½`. The extreme rows are at least three pixels wide, so a
/// closing with radius `r` bridges any straight gap of up to `2r` pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuringElement {
    radius: u32,
    offsets: Vec<(i32, i32)>,
    // half width of the disk at dy = -r..=r
    half_widths: Vec<u32>,
}

impl StructuringElement {
    pub fn disk(radius: u32) -> Option<Self> {
        if radius == 0 {
            return None;
        }
        let r = radius as i64;
        let limit = r * r + r;
        let mut offsets = Vec::new();
        let mut half_widths = Vec::with_capacity(2 * radius as usize + 1);
        for dy in -r..=r {
            let mut hw = 0;
            for dx in -r..=r {
                if dx * dx + dy * dy <= limit {
                    offsets.push((dx as i32, dy as i32));
                    hw = hw.max(dx);
                }
            }
            half_widths.push(hw as u32);
        }
        Some(Self {
            radius,
            offsets,
            half_widths,
        })
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn offsets(&self) -> &[(i32, i32)] {
        &self.offsets
    }
}

/// Per-row prefix counts of foreground pixels; row `y` occupies
/// `[y * (w + 1), (y + 1) * (w + 1))`.
fn row_prefix_counts(bits: &Raster<bool>) -> Vec<u32> {
    let w = bits.width() as usize;
    let mut prefix = vec![0u32; bits.height() as usize * (w + 1)];
    for (row, out) in bits.data().chunks(w).zip(prefix.chunks_mut(w + 1)) {
        let mut acc = 0;
        for (x, &b) in row.iter().enumerate() {
            acc += b as u32;
            out[x + 1] = acc;
        }
    }
    prefix
}

#[derive(Clone, Copy)]
enum Pass {
    Dilate,
    Erode,
}

fn morph(mask: &BinaryMask, se: &StructuringElement, pass: Pass) -> BinaryMask {
    let (w, h) = mask.dims();
    let (wu, hu) = (w as usize, h as usize);
    let prefix = row_prefix_counts(mask.bits());
    let r = se.radius as i64;
    let mut out = vec![false; wu * hu];
    for_each_row_mut(&mut out, wu, |y, row| {
        for (x, px) in row.iter_mut().enumerate() {
            let mut hit = matches!(pass, Pass::Erode);
            for (k, &hw) in se.half_widths.iter().enumerate() {
                let sy = y as i64 + k as i64 - r;
                if sy < 0 || sy >= hu as i64 {
                    continue;
                }
                let lo = (x as i64 - hw as i64).max(0) as usize;
                let hi = (x + hw as usize).min(wu - 1);
                let base = sy as usize * (wu + 1);
                let count = prefix[base + hi + 1] - prefix[base + lo];
                match pass {
                    Pass::Dilate if count > 0 => {
                        hit = true;
                        break;
                    }
                    Pass::Erode if count as usize != hi - lo + 1 => {
                        hit = false;
                        break;
                    }
                    _ => {}
                }
            }
            *px = hit;
        }
    });
    let bits = Raster::from_vec(w, h, out).expect("dimensions preserved");
    BinaryMask::new(bits, mask.positive_class())
}

pub fn dilate(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    morph(mask, se, Pass::Dilate)
}

pub fn erode(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    morph(mask, se, Pass::Erode)
}

/// Dilation followed by erosion with the same element.
pub fn close(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    erode(&dilate(mask, se), se)
}

/// Zhang–Suen thinning, iterated until neither sub-iteration deletes a pixel.
/// Pixels outside the raster count as background.
pub fn skeletonize(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    let (wi, hi) = (w as i64, h as i64);
    let mut bits = mask.as_slice().to_vec();
    let mut alive: Vec<usize> = (0..bits.len()).filter(|&i| bits[i]).collect();
    let mut doomed = Vec::new();

    // P2..P9, clockwise from north
    const RING: [(i64, i64); 8] = [
        (0, -1),
        (1, -1),
        (1, 0),
        (1, 1),
        (0, 1),
        (-1, 1),
        (-1, 0),
        (-1, -1),
    ];

    loop {
        let mut changed = false;
        for step in 0..2 {
            doomed.clear();
            for &i in &alive {
                let (x, y) = ((i % w as usize) as i64, (i / w as usize) as i64);
                let mut p = [false; 8];
                for (slot, &(dx, dy)) in p.iter_mut().zip(RING.iter()) {
                    let (nx, ny) = (x + dx, y + dy);
                    *slot = nx >= 0 && ny >= 0 && nx < wi && ny < hi
                        && bits[ny as usize * w as usize + nx as usize];
                }
                let b = p.iter().filter(|&&v| v).count();
                if !(2..=6).contains(&b) {
                    continue;
                }
                let a = (0..8).filter(|&k| !p[k] && p[(k + 1) % 8]).count();
                if a != 1 {
                    continue;
                }
                let [p2, _, p4, _, p6, _, p8, _] = p;
                let keep = if step == 0 {
                    (p2 && p4 && p6) || (p4 && p6 && p8)
                } else {
                    (p2 && p4 && p8) || (p2 && p6 && p8)
                };
                if !keep {
                    doomed.push(i);
                }
            }
            if !doomed.is_empty() {
                changed = true;
                for &i in &doomed {
                    bits[i] = false;
                }
                alive.retain(|&i| bits[i]);
            }
        }
        if !changed {
            break;
        }
    }
    BinaryMask::from_vec(w, h, bits, mask.positive_class()).expect("dimensions preserved")
}
