//! Failure classification and the process exit-code contract.

use std::fmt;
use std::process::ExitCode;

use neurogrow::augment::AugmentError;
use neurogrow::batch::GrowError;
use neurogrow::clickpoints::ClickPointError;
use neurogrow::eval::EvalError;
use neurogrow::floodfill::FillError;
use neurogrow::metrics::MetricsError;
use neurogrow::raster::RasterError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Internal,
    Usage,
    Io,
    Schema,
}

impl Kind {
    pub fn code(self) -> u8 {
        match self {
            Kind::Internal => 1,
            Kind::Usage => 2,
            Kind::Io => 3,
            Kind::Schema => 4,
        }
    }
}

impl From<Kind> for ExitCode {
    fn from(kind: Kind) -> Self {
        ExitCode::from(kind.code())
    }
}

/// An error tagged with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(kind: Kind, error: impl Into<anyhow::Error>) -> Self {
        Self {
            kind,
            error: error.into(),
        }
    }

    pub fn usage(msg: impl fmt::Display) -> Self {
        Self::new(Kind::Usage, anyhow::anyhow!("{msg}"))
    }

    pub fn io(msg: impl fmt::Display) -> Self {
        Self::new(Kind::Io, anyhow::anyhow!("{msg}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub type CmdResult = Result<(), Failure>;

pub trait Classify {
    fn kind(&self) -> Kind;
}

impl Classify for RasterError {
    fn kind(&self) -> Kind {
        match self {
            RasterError::MissingFile(_) | RasterError::Io { .. } => Kind::Io,
            _ => Kind::Schema,
        }
    }
}

impl Classify for ClickPointError {
    fn kind(&self) -> Kind {
        match self {
            ClickPointError::Io { .. } => Kind::Io,
            _ => Kind::Schema,
        }
    }
}

impl Classify for FillError {
    fn kind(&self) -> Kind {
        match self {
            FillError::OutOfBoundsSeed { .. } => Kind::Schema,
            FillError::InvalidParams(_) => Kind::Usage,
            FillError::Threshold(e) => e.kind(),
        }
    }
}

impl Classify for MetricsError {
    fn kind(&self) -> Kind {
        Kind::Schema
    }
}

impl Classify for GrowError {
    fn kind(&self) -> Kind {
        match self {
            GrowError::Image { source, .. } => source.kind(),
            GrowError::Points { source, .. } => source.kind(),
            GrowError::Fill { source, .. } => source.kind(),
            GrowError::MissingPoints { .. } | GrowError::Io { .. } => Kind::Io,
        }
    }
}

impl Classify for EvalError {
    fn kind(&self) -> Kind {
        match self {
            EvalError::Raster(e) => e.kind(),
            EvalError::Io { .. } => Kind::Io,
            EvalError::Metrics(_)
            | EvalError::UnmatchedFiles(_)
            | EvalError::NoPairs
            | EvalError::Pair { .. }
            | EvalError::Malformed { .. } => Kind::Schema,
        }
    }
}

impl Classify for AugmentError {
    fn kind(&self) -> Kind {
        match self {
            AugmentError::Raster(e) => e.kind(),
            AugmentError::ClickPoints(e) => e.kind(),
            AugmentError::MismatchedPointFile { .. } => Kind::Schema,
            AugmentError::Io { .. } => Kind::Io,
        }
    }
}

macro_rules! classified {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::new(e.kind(), e)
            }
        }
    )*};
}

classified!(RasterError, ClickPointError, FillError, MetricsError, GrowError, EvalError, AugmentError);
