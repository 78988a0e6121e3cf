use std::path::PathBuf;

use clap::Args;
use neurogrow::eval::{
    comparison_csv, comparison_table, evaluate_dirs, replay_published, run_to_csv, EvalOptions,
    EvalRun,
};
use neurogrow::metrics::format_confusion;

use super::{out_format, require_dir, write_text, OutFormat};
use crate::error::{CmdResult, Failure};
use crate::GlobalArgs;

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Directory of predicted masks
    #[arg(long, value_name = "DIR", requires = "truth", conflicts_with = "from_confusion")]
    pred: Option<PathBuf>,
    /// Directory of gold masks, paired with predictions by file stem
    #[arg(long, value_name = "DIR", requires = "pred")]
    truth: Option<PathBuf>,
    /// Replay published confusion matrices from a JSON file instead of reading masks
    #[arg(long, value_name = "FILE", required_unless_present = "pred")]
    from_confusion: Option<PathBuf>,
    /// Report destination; the extension picks JSON or CSV
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Name recorded for this run
    #[arg(long, default_value = "external-prediction")]
    method: String,
}

fn print_run(run: &EvalRun) {
    let r = &run.report;
    let show = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_else(|| "n/a".into());
    println!("method: {}", run.method_name);
    println!(
        "kappa: {} ({})",
        show(r.kap),
        r.kappa_label.as_deref().unwrap_or("undefined")
    );
    println!(
        "auroc: {} ({})",
        show(r.auroc),
        r.auroc_label.as_deref().unwrap_or("undefined")
    );
    println!("accuracy: {:.6}  jaccard: {}  dice: {}", r.acc, show(r.jac), show(r.dice));
    print!("{}", format_confusion(&run.aggregate));
    for why in &r.undefined {
        println!("note: {why}");
    }
}

pub fn run(args: EvalArgs, global: &GlobalArgs) -> CmdResult {
    let format = args.out.as_deref().map(out_format).transpose()?;

    if let Some(matrices) = &args.from_confusion {
        let runs = replay_published(matrices)?;
        print!("{}", comparison_table(&runs));
        if let (Some(out), Some(format)) = (&args.out, format) {
            let text = match format {
                OutFormat::Json => serde_json::to_string_pretty(&runs).map_err(internal)?,
                OutFormat::Csv => comparison_csv(&runs),
            };
            write_text(out, &text)?;
        }
        return Ok(());
    }

    let (Some(pred), Some(truth)) = (&args.pred, &args.truth) else {
        return Err(Failure::usage("--pred and --truth are both required"));
    };
    require_dir(pred, "--pred")?;
    require_dir(truth, "--truth")?;
    let opts = EvalOptions {
        method_name: args.method.clone(),
        strict: global.strict(),
        exec: global.exec(),
    };
    let run = evaluate_dirs(pred, truth, &opts)?;
    for name in &run.unmatched {
        eprintln!("warning: no counterpart for {name}");
    }
    for pair in run.pairs.iter().filter(|p| p.error.is_some()) {
        eprintln!("warning: skipped pair {}: {}", pair.name, pair.error.as_deref().unwrap_or(""));
    }
    print_run(&run);
    if let (Some(out), Some(format)) = (&args.out, format) {
        let text = match format {
            OutFormat::Json => serde_json::to_string_pretty(&run).map_err(internal)?,
            OutFormat::Csv => run_to_csv(&run),
        };
        write_text(out, &text)?;
    }
    Ok(())
}

fn internal(e: serde_json::Error) -> Failure {
    Failure::new(crate::error::Kind::Internal, e)
}
