use std::path::PathBuf;

use clap::Args;
use neurogrow::augment::{augment_dataset, AugmentOptions, DEFAULT_SHIFT, MANIFEST_NAME};

use super::require_dir;
use crate::error::CmdResult;
use crate::GlobalArgs;

#[derive(Args, Debug)]
pub struct AugmentArgs {
    #[arg(long = "in", value_name = "DIR")]
    input: PathBuf,
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Translation, in pixels, of the four shifted copies (reflect padding)
    #[arg(long, default_value_t = DEFAULT_SHIFT, allow_negative_numbers = true)]
    shift: i32,
    /// Also transform `<stem>.json`/`.csv` click-point files found next to each image
    #[arg(long)]
    points: bool,
}

pub fn run(args: AugmentArgs, global: &GlobalArgs) -> CmdResult {
    require_dir(&args.input, "--in")?;
    let opts = AugmentOptions {
        shift: args.shift,
        transform_points: args.points,
        exec: global.exec(),
    };
    let manifest = augment_dataset(&args.input, &args.out, &opts)?;
    let dropped: usize = manifest.iter().map(|e| e.dropped_points.len()).sum();
    if dropped > 0 {
        eprintln!("warning: {dropped} point(s) shifted off the frame; see {MANIFEST_NAME}");
    }
    eprintln!(
        "wrote {} image(s) and {} to {}",
        manifest.len(),
        MANIFEST_NAME,
        args.out.display()
    );
    Ok(())
}
