mod commands;
mod error;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use neurogrow::Execution;

use crate::error::Failure;

#[derive(Parser)]
#[command(
    name = "neurogrow",
    version,
    about = "Grow click-point annotations into neuron masks, augment datasets, and score predictions"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Commands,
}

#[derive(Args, Debug, Clone, Copy)]
pub struct GlobalArgs {
    /// Turn recoverable problems (missing point files, unmatched or
    /// mismatched pairs) into hard errors
    #[arg(long, global = true)]
    strict: bool,
    /// Worker threads; 1 runs everything on the calling thread
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,
    /// Reserved for future stochastic features; currently unused
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
}

impl GlobalArgs {
    pub fn strict(&self) -> bool {
        self.strict
    }

    pub fn exec(&self) -> Execution {
        match self.jobs {
            Some(1) => Execution::Sequential,
            _ => Execution::available(),
        }
    }
}

#[derive(Subcommand)]
enum Commands {
    /// Grow click-points into label masks for every slice in a directory
    Grow(commands::grow::GrowArgs),
    /// Score predicted masks against gold masks, or replay published matrices
    Eval(commands::eval::EvalArgs),
    /// Compare saved evaluation runs side by side
    Report(commands::report::ReportArgs),
    /// Write every image under the twelve standard transforms
    Augment(commands::augment::AugmentArgs),
    /// Read red click markers from an overlay into a point file
    ExtractPoints(commands::extract::ExtractArgs),
    /// Threshold a grayscale image into a 0/255 border mask
    Binarize(commands::binarize::BinarizeArgs),
}

fn init_pool(global: &GlobalArgs) -> Result<(), Failure> {
    let Some(jobs) = global.jobs else {
        return Ok(());
    };
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs as usize)
        .build_global()
        .map_err(|e| Failure::new(error::Kind::Internal, e))?;
    #[cfg(not(feature = "parallel"))]
    if jobs > 1 {
        log::warn!("built without parallel support; --jobs {jobs} runs sequentially");
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let global = cli.global;
    if global.seed.is_some() {
        log::debug!("--seed is reserved and has no effect");
    }
    let run = || -> Result<(), Failure> {
        init_pool(&global)?;
        match cli.command {
            Commands::Grow(args) => commands::grow::run(args, &global),
            Commands::Eval(args) => commands::eval::run(args, &global),
            Commands::Report(args) => commands::report::run(args),
            Commands::Augment(args) => commands::augment::run(args, &global),
            Commands::ExtractPoints(args) => commands::extract::run(args),
            Commands::Binarize(args) => commands::binarize::run(args),
        }
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            failure.kind.into()
        }
    }
}
