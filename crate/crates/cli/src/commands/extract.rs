use std::path::PathBuf;

use clap::Args;
use neurogrow::clickpoints::{extract_from_overlay, RedMarker};
use neurogrow::raster::{load_image, load_rgb};

use crate::error::CmdResult;

#[derive(Args, Debug)]
pub struct ExtractArgs {
    /// Colour overlay with red click markers (.ppm or .png)
    #[arg(long, value_name = "FILE")]
    overlay: PathBuf,
    /// Grayscale slice the overlay was drawn on
    #[arg(long, value_name = "FILE")]
    base: PathBuf,
    /// Point file to write (JSON)
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Slice name stored in the point file; defaults to the base file stem
    #[arg(long)]
    slice: Option<String>,
    #[arg(long, default_value_t = RedMarker::default().red_min)]
    red_min: u8,
    #[arg(long, default_value_t = RedMarker::default().green_max)]
    green_max: u8,
    #[arg(long, default_value_t = RedMarker::default().blue_max)]
    blue_max: u8,
}

pub fn run(args: ExtractArgs) -> CmdResult {
    let overlay = load_rgb(&args.overlay)?;
    let base = load_image(&args.base)?;
    let marker = RedMarker {
        red_min: args.red_min,
        green_max: args.green_max,
        blue_max: args.blue_max,
    };
    let name = args.slice.clone().unwrap_or_else(|| {
        args.base
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    let set = extract_from_overlay(&overlay, &base, marker)?.with_slice_name(name);
    set.save(&args.out)?;
    eprintln!("{} point(s) written to {}", set.len(), args.out.display());
    Ok(())
}
