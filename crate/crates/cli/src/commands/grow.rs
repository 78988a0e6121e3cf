use std::path::PathBuf;

use clap::{Args, ValueEnum};
use neurogrow::batch::{grow_dir, GrowDirOptions, GrowMethod, RegionSettings};
use neurogrow::floodfill::{FloodFillParams, ThresholdChoice};
use neurogrow::regiongrow::RegionGrowParams;
use neurogrow::Connectivity;

use super::{parse_connectivity, parse_threshold, require_dir};
use crate::error::{CmdResult, Failure};
use crate::GlobalArgs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Floodfill,
    Region,
}

#[derive(Args, Debug)]
pub struct GrowArgs {
    #[arg(long, value_enum)]
    method: Method,
    /// Directory of slices (.pgm or .png)
    #[arg(long, value_name = "DIR")]
    images: PathBuf,
    /// Directory of click-point files named `<slice stem>.json` or `.csv`
    #[arg(long, value_name = "DIR")]
    points: PathBuf,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Pixel connectivity of a grown region (4 or 8)
    #[arg(long, default_value = "4", value_parser = parse_connectivity)]
    connectivity: Connectivity,

    /// Flood fill: binarization level, `auto` for Otsu
    #[arg(long, default_value = "auto", value_parser = parse_threshold, help_heading = "Flood fill")]
    threshold: ThresholdChoice,
    /// Flood fill: disk radius of the closing element
    #[arg(long, default_value_t = 2, help_heading = "Flood fill")]
    se_radius: u32,
    /// Flood fill: largest region, as a fraction of the slice, before it counts as a leak
    #[arg(long, default_value_t = 0.25, help_heading = "Flood fill")]
    leak_fraction: f64,

    /// Region growing: largest accepted distance from the region mean
    #[arg(long, default_value_t = RegionGrowParams::DEFAULT_THRESHOLD, help_heading = "Region growing")]
    region_threshold: f64,
    /// Region growing: absolute size cap in pixels (overrides --cap-fraction)
    #[arg(long, help_heading = "Region growing")]
    max_region: Option<usize>,
    /// Region growing: size cap as a fraction of the slice
    #[arg(long, default_value_t = RegionGrowParams::DEFAULT_CAP_FRACTION, help_heading = "Region growing")]
    cap_fraction: f64,
}

impl GrowArgs {
    fn method(&self) -> Result<GrowMethod, Failure> {
        Ok(match self.method {
            Method::Floodfill => GrowMethod::FloodFill(FloodFillParams {
                threshold: self.threshold,
                se_radius: self.se_radius,
                connectivity: self.connectivity,
                leak_fraction: self.leak_fraction,
            }),
            Method::Region => {
                if !(self.cap_fraction > 0.0 && self.cap_fraction <= 1.0) {
                    return Err(Failure::usage(format!(
                        "--cap-fraction must lie in (0, 1], got {}",
                        self.cap_fraction
                    )));
                }
                GrowMethod::Region(RegionSettings {
                    threshold: self.region_threshold,
                    connectivity: self.connectivity,
                    max_region: self.max_region,
                    cap_fraction: self.cap_fraction,
                })
            }
        })
    }
}

pub fn run(args: GrowArgs, global: &GlobalArgs) -> CmdResult {
    require_dir(&args.images, "--images")?;
    require_dir(&args.points, "--points")?;
    let method = args.method()?;
    let opts = GrowDirOptions {
        strict: global.strict(),
        exec: global.exec(),
    };
    let summary = grow_dir(&args.images, &args.points, &args.out, &method, &opts)?;

    let labeled: usize = summary.slices.iter().map(|s| s.labeled).sum();
    let leaked: usize = summary.slices.iter().map(|s| s.leaked.len()).sum();
    let missed: usize = summary.slices.iter().map(|s| s.missed.len()).sum();
    for s in &summary.slices {
        if !s.leaked.is_empty() {
            eprintln!("warning: {}: leaked ids {:?}", s.slice, s.leaked);
        }
        if !s.missed.is_empty() {
            eprintln!("warning: {}: missed ids {:?}", s.slice, s.missed);
        }
    }
    for skipped in &summary.skipped {
        eprintln!("warning: skipped {skipped}");
    }
    eprintln!(
        "{}: {} slice(s), {labeled} region(s) labeled, {leaked} leaked, {missed} missed, {} skipped; {} warning(s)",
        method.name(),
        summary.slices.len(),
        summary.skipped.len(),
        summary.warning_count()
    );
    Ok(())
}
