//! Shared error type for the geometry, loss and calibration kernels.

use std::fmt;

#[derive(Debug)]
pub enum Error {
    /// Depth must be strictly positive.
    InvalidDepth(f64),
    /// Point has non-positive z in the camera frame.
    BehindCamera { z: f64 },
    /// Raster dimensions do not agree.
    DimensionMismatch {
        expected: (u32, u32),
        got: (u32, u32),
        what: &'static str,
    },
    /// A transform failed orthonormality / determinant validation.
    InvalidTransform(String),
    /// Camera intrinsics out of range.
    InvalidCamera(String),
    /// Rig state lacks data required by the requested context.
    IncompleteState(&'static str),
    /// A loss was asked to aggregate zero sources.
    EmptySources(&'static str),
    /// Prior rasters required by a pseudo-normal loss are missing.
    MissingPrior(&'static str),
    /// Point geometry cannot support a rigid alignment solve.
    DegenerateGeometry(&'static str),
    /// No correspondences inside the gating distance.
    EmptyOverlap,
    /// Depth evaluation found zero valid pixels.
    EmptyEvaluation,
    /// Vehicle tag is not `front` or `rear`.
    UnknownVehicle(String),
    /// Config / manifest parse failure with location.
    Parse {
        file: String,
        line: usize,
        msg: String,
    },
    /// I/O failure tagged with the path involved.
    Io {
        path: String,
        source: std::io::Error,
    },
    /// Malformed binary raster file.
    BadFormat { path: String, msg: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDepth(d) => write!(f, "invalid depth {d}: depth must be > 0"),
            Error::BehindCamera { z } => write!(f, "point behind camera (z = {z})"),
            Error::DimensionMismatch {
                expected,
                got,
                what,
            } => write!(
                f,
                "dimension mismatch in {what}: expected {}x{}, got {}x{}",
                expected.0, expected.1, got.0, got.1
            ),
            Error::InvalidTransform(msg) => write!(f, "invalid rigid transform: {msg}"),
            Error::InvalidCamera(msg) => write!(f, "invalid camera model: {msg}"),
            Error::IncompleteState(what) => {
                write!(f, "rig state incomplete: missing {what}")
            }
            Error::EmptySources(what) => write!(f, "no sources provided for {what}"),
            Error::MissingPrior(what) => write!(f, "missing prior raster: {what}"),
            Error::DegenerateGeometry(msg) => write!(f, "degenerate geometry: {msg}"),
            Error::EmptyOverlap => write!(f, "no correspondences within gating distance"),
            Error::EmptyEvaluation => write!(f, "no valid pixels to evaluate"),
            Error::UnknownVehicle(v) => write!(f, "unknown vehicle tag `{v}`"),
            Error::Parse { file, line, msg } => write!(f, "{file}:{line}: {msg}"),
            Error::Io { path, source } => write!(f, "{path}: {source}"),
            Error::BadFormat { path, msg } => write!(f, "{path}: {msg}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(file: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            msg: msg.into(),
        }
    }
}
