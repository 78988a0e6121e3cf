use std::path::PathBuf;

use clap::Args;
use neurogrow::eval::{comparison_csv, comparison_table, load_runs};

use super::write_text;
use crate::error::CmdResult;

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Evaluation run files written by `eval --out *.json`
    #[arg(required = true, value_name = "RUN")]
    runs: Vec<PathBuf>,
    /// Also write the comparison as CSV
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

pub fn run(args: ReportArgs) -> CmdResult {
    let mut runs = Vec::new();
    for path in &args.runs {
        runs.extend(load_runs(path)?);
    }
    print!("{}", comparison_table(&runs));
    if let Some(csv) = &args.csv {
        write_text(csv, &comparison_csv(&runs))?;
    }
    Ok(())
}
