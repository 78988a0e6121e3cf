//! Brute-force reference implementations for the integration and acceptance
//! suites. Each one works on plain nested vectors and shares no code with
//! the library routine it checks.

#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use neurogrow::raster::Raster;
use neurogrow::{BinaryMask, GrayImage, PositiveClass};
use rand::Rng;

pub type Grid = Vec<Vec<bool>>;

pub fn to_grid(m: &BinaryMask) -> Grid {
    (0..m.height())
        .map(|y| (0..m.width()).map(|x| m.get(x, y)).collect())
        .collect()
}

pub fn from_grid(g: &Grid, class: PositiveClass) -> BinaryMask {
    let h = g.len() as u32;
    let w = g[0].len() as u32;
    BinaryMask::from_vec(w, h, g.iter().flatten().copied().collect(), class).unwrap()
}

pub fn random_mask(rng: &mut impl Rng, w: u32, h: u32, density: f64) -> BinaryMask {
    let bits = (0..w * h).map(|_| rng.gen_bool(density)).collect();
    BinaryMask::from_vec(w, h, bits, PositiveClass::Border).unwrap()
}

/// Disk offsets straight from the defining inequality.
pub fn disk_offsets(r: i64) -> Vec<(i64, i64)> {
    let mut v = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r + r {
                v.push((dx, dy));
            }
        }
    }
    v
}

/// Set-theoretic dilation: `p` is set if any `p + o` is set.
pub fn dilate(g: &Grid, offs: &[(i64, i64)]) -> Grid {
    let (h, w) = (g.len() as i64, g[0].len() as i64);
    let mut out = vec![vec![false; w as usize]; h as usize];
    for y in 0..h {
        for x in 0..w {
            out[y as usize][x as usize] = offs.iter().any(|&(dx, dy)| {
                let (sx, sy) = (x + dx, y + dy);
                sx >= 0 && sy >= 0 && sx < w && sy < h && g[sy as usize][sx as usize]
            });
        }
    }
    out
}

/// Erosion with out-of-grid samples counted as set.
pub fn erode(g: &Grid, offs: &[(i64, i64)]) -> Grid {
    let (h, w) = (g.len() as i64, g[0].len() as i64);
    let mut out = vec![vec![false; w as usize]; h as usize];
    for y in 0..h {
        for x in 0..w {
            out[y as usize][x as usize] = offs.iter().all(|&(dx, dy)| {
                let (sx, sy) = (x + dx, y + dy);
                !(sx >= 0 && sy >= 0 && sx < w && sy < h) || g[sy as usize][sx as usize]
            });
        }
    }
    out
}

pub fn close(g: &Grid, r: i64) -> Grid {
    let offs = disk_offsets(r);
    erode(&dilate(g, &offs), &offs)
}

/// Textbook Zhang–Suen thinning over a nested grid.
pub fn zhang_suen(g: &Grid) -> Grid {
    let mut img = g.clone();
    let (h, w) = (img.len() as i64, img[0].len() as i64);
    let at = |img: &Grid, x: i64, y: i64| -> u8 {
        if x < 0 || y < 0 || x >= w || y >= h {
            0
        } else {
            img[y as usize][x as usize] as u8
        }
    };
    loop {
        let mut changed = false;
        for pass in 0..2 {
            let mut marked = Vec::new();
            for y in 0..h {
                for x in 0..w {
                    if at(&img, x, y) == 0 {
                        continue;
                    }
                    let p2 = at(&img, x, y - 1);
                    let p3 = at(&img, x + 1, y - 1);
                    let p4 = at(&img, x + 1, y);
                    let p5 = at(&img, x + 1, y + 1);
                    let p6 = at(&img, x, y + 1);
                    let p7 = at(&img, x - 1, y + 1);
                    let p8 = at(&img, x - 1, y);
                    let p9 = at(&img, x - 1, y - 1);
                    let seq = [p2, p3, p4, p5, p6, p7, p8, p9, p2];
                    let b: u8 = seq[..8].iter().sum();
                    let a = seq.windows(2).filter(|s| s[0] == 0 && s[1] == 1).count();
                    let (c, d) = if pass == 0 {
                        (p2 * p4 * p6, p4 * p6 * p8)
                    } else {
                        (p2 * p4 * p8, p2 * p6 * p8)
                    };
                    if (2..=6).contains(&b) && a == 1 && c == 0 && d == 0 {
                        marked.push((x, y));
                    }
                }
            }
            for &(x, y) in &marked {
                img[y as usize][x as usize] = false;
            }
            changed |= !marked.is_empty();
        }
        if !changed {
            return img;
        }
    }
}

pub fn neighbors(conn: u8) -> &'static [(i64, i64)] {
    const N4: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
    const N8: [(i64, i64); 8] = [
        (1, 0),
        (-1, 0),
        (0, 1),
        (0, -1),
        (1, 1),
        (1, -1),
        (-1, 1),
        (-1, -1),
    ];
    if conn == 4 {
        &N4
    } else {
        &N8
    }
}

/// Pixels reachable from `start` through cells where `open` holds.
pub fn bfs(
    w: u32,
    h: u32,
    start: (u32, u32),
    conn: u8,
    open: impl Fn(u32, u32) -> bool,
) -> BTreeSet<(u32, u32)> {
    let mut seen = BTreeSet::new();
    if !open(start.0, start.1) {
        return seen;
    }
    let mut q = VecDeque::from([start]);
    seen.insert(start);
    while let Some((x, y)) = q.pop_front() {
        for &(dx, dy) in neighbors(conn) {
            let (nx, ny) = (x as i64 + dx, y as i64 + dy);
            if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                continue;
            }
            let p = (nx as u32, ny as u32);
            if open(p.0, p.1) && seen.insert(p) {
                q.push_back(p);
            }
        }
    }
    seen
}

pub fn is_connected(set: &BTreeSet<(u32, u32)>, conn: u8) -> bool {
    let Some(&start) = set.iter().next() else {
        return true;
    };
    let (w, h) = set
        .iter()
        .fold((0, 0), |(w, h), &(x, y)| (w.max(x + 1), h.max(y + 1)));
    bfs(w, h, start, conn, |x, y| set.contains(&(x, y))).len() == set.len()
}

/// Naive seeded region growing: rescans the whole frontier every step and
/// keeps the mean as an exact rational.
pub fn region_grow_naive(
    img: &GrayImage,
    seed: (u32, u32),
    t: f64,
    conn: u8,
    max_region: usize,
) -> Vec<(u32, u32)> {
    let (w, h) = img.dims();
    let mut member = vec![vec![false; w as usize]; h as usize];
    let mut order = vec![seed];
    member[seed.1 as usize][seed.0 as usize] = true;
    let mut sum: i64 = img.get(seed.0, seed.1) as i64;
    loop {
        let n = order.len() as i64;
        // (|v*n - sum|, y, x)
        let mut best: Option<(i64, u32, u32)> = None;
        for y in 0..h {
            for x in 0..w {
                if member[y as usize][x as usize] {
                    continue;
                }
                let adjacent = neighbors(conn).iter().any(|&(dx, dy)| {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    nx >= 0
                        && ny >= 0
                        && nx < w as i64
                        && ny < h as i64
                        && member[ny as usize][nx as usize]
                });
                if !adjacent {
                    continue;
                }
                let key = (img.get(x, y) as i64 * n - sum).abs();
                if best.is_none_or(|(k, by, bx)| (key, y, x) < (k, by, bx)) {
                    best = Some((key, y, x));
                }
            }
        }
        let Some((key, y, x)) = best else { break };
        if key as f64 > t * n as f64 || order.len() >= max_region {
            break;
        }
        member[y as usize][x as usize] = true;
        order.push((x, y));
        sum += img.get(x, y) as i64;
    }
    order
}

/// Cohen's kappa from parallel label lists: observed agreement against the
/// agreement expected from the two marginal distributions.
pub fn kappa_first_principles(pred: &[bool], truth: &[bool]) -> f64 {
    let n = pred.len() as f64;
    let agree = pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / n;
    let p_pos = pred.iter().filter(|&&v| v).count() as f64 / n;
    let t_pos = truth.iter().filter(|&&v| v).count() as f64 / n;
    let chance = p_pos * t_pos + (1.0 - p_pos) * (1.0 - t_pos);
    (agree - chance) / (1.0 - chance)
}

/// Otsu by exhaustive scan over raw pixel values: for each split, the
/// between-class variance `w0 w1 (mu0 - mu1)^2`.
pub fn otsu_exhaustive(pixels: &[u8]) -> Option<(u8, f64)> {
    let n = pixels.len() as f64;
    let mut best: Option<(u8, f64)> = None;
    for t in 1..=255u16 {
        let (lo, hi): (Vec<f64>, Vec<f64>) = {
            let lo: Vec<f64> = pixels.iter().filter(|&&v| (v as u16) < t).map(|&v| v as f64).collect();
            let hi: Vec<f64> = pixels.iter().filter(|&&v| (v as u16) >= t).map(|&v| v as f64).collect();
            (lo, hi)
        };
        if lo.is_empty() || hi.is_empty() {
            continue;
        }
        let w0 = lo.len() as f64 / n;
        let w1 = hi.len() as f64 / n;
        let m0 = lo.iter().sum::<f64>() / lo.len() as f64;
        let m1 = hi.iter().sum::<f64>() / hi.len() as f64;
        let var = w0 * w1 * (m0 - m1) * (m0 - m1);
        if best.is_none_or(|(_, b)| var > b * (1.0 + 1e-12)) {
            best = Some((t as u8, var));
        }
    }
    best
}

pub fn gray_from_rows(rows: &[Vec<u8>]) -> GrayImage {
    let h = rows.len() as u32;
    let w = rows[0].len() as u32;
    Raster::from_vec(w, h, rows.iter().flatten().copied().collect()).unwrap()
}
