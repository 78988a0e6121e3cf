use std::path::PathBuf;

use clap::Args;
use neurogrow::floodfill::ThresholdChoice;
use neurogrow::raster::{load_image_with, save_image, threshold_fixed, threshold_otsu, LoadOptions};

use super::parse_threshold;
use crate::error::CmdResult;

#[derive(Args, Debug)]
pub struct BinarizeArgs {
    #[arg(long = "in", value_name = "FILE")]
    input: PathBuf,
    /// Mask to write; border pixels (darker than the level) become 255
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Level, or `auto` for Otsu
    #[arg(long, default_value = "auto", value_parser = parse_threshold)]
    threshold: ThresholdChoice,
    /// Accept colour input by converting it to luma
    #[arg(long)]
    luma: bool,
}

pub fn run(args: BinarizeArgs) -> CmdResult {
    let img = load_image_with(&args.input, LoadOptions { luma: args.luma })?;
    let (mask, level) = match args.threshold {
        ThresholdChoice::Fixed(t) => (threshold_fixed(&img, t), t),
        ThresholdChoice::Auto => threshold_otsu(&img)?,
    };
    save_image(&mask, &args.out)?;
    println!("threshold: {level}");
    println!("border pixels: {} of {}", mask.count_ones(), img.len());
    Ok(())
}
