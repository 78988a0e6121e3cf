pub mod augment;
pub mod binarize;
pub mod eval;
pub mod extract;
pub mod grow;
pub mod report;

use std::fs;
use std::path::Path;

use neurogrow::floodfill::ThresholdChoice;
use neurogrow::Connectivity;

use crate::error::Failure;

/// `auto` or an intensity in 0..=255.
pub fn parse_threshold(s: &str) -> Result<ThresholdChoice, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(ThresholdChoice::Auto);
    }
    s.parse::<u8>()
        .map(ThresholdChoice::Fixed)
        .map_err(|_| format!("expected `auto` or an integer in 0..=255, got `{s}`"))
}

pub fn parse_connectivity(s: &str) -> Result<Connectivity, String> {
    s.parse::<u8>()
        .ok()
        .and_then(Connectivity::from_number)
        .ok_or_else(|| format!("connectivity must be 4 or 8, got `{s}`"))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .map_err(|e| Failure::io(format!("cannot create {}: {e}", parent.display())))?;
    }
    fs::write(path, text).map_err(|e| Failure::io(format!("cannot write {}: {e}", path.display())))
}

pub fn require_dir(path: &Path, flag: &str) -> Result<(), Failure> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(Failure::io(format!("{flag} {} is not a directory", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutFormat {
    Json,
    Csv,
}

pub fn out_format(path: &Path) -> Result<OutFormat, Failure> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("json") => Ok(OutFormat::Json),
        Some("csv") => Ok(OutFormat::Csv),
        _ => Err(Failure::usage(format!(
            "output {} must end in .json or .csv",
            path.display()
        ))),
    }
}
