//! Plain-text, line-oriented file formats: demonstration datasets, manifold
//! descriptors, experiment configs, and the results CSV. All floating-point
//! values are written with 17 significant digits so a save/load roundtrip is
//! bit-exact, and no file embeds timestamps: identical content means
//! identical bytes.

mod config;
mod dataset;
mod manifold_file;
mod results;

pub use config::{ConfigError, ExperimentConfig};
pub use dataset::{DemoRecord, DemonstrationDataset, Episode};
pub use manifold_file::{load_manifold, save_manifold};
pub use results::{load_results, Arm, ResultsTable, ResultsWriter, TrialRow, RESULTS_HEADER};

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

use crate::liegroup::Pose;

/// Rotation blocks parsed from files must satisfy these bounds; anything
/// further off is corrupted data rather than roundtrip noise.
const LOAD_ROTATION_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse failure at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("manifold basis is not orthonormal (residual {residual:e})")]
    InvalidBasis { residual: f64 },
}

impl IoError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        IoError::Parse {
            line,
            message: message.into(),
        }
    }
}

/// 17-significant-digit decimal: enough for a bit-faithful f64 roundtrip.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn parse_f64(token: &str, line: usize) -> Result<f64, IoError> {
    token
        .parse::<f64>()
        .map_err(|_| IoError::parse(line, format!("expected a number, got {token:?}")))
}

pub(crate) fn parse_usize(token: &str, line: usize) -> Result<usize, IoError> {
    token.parse::<usize>().map_err(|_| {
        IoError::parse(
            line,
            format!("expected a non-negative integer, got {token:?}"),
        )
    })
}

/// Writes a pose as 12 numbers: the 3x4 `[R | t]` block in row-major order.
pub(crate) fn write_pose(out: &mut String, pose: &Pose<f64>) {
    let r = pose.rotation();
    let t = pose.translation();
    for row in 0..3 {
        for col in 0..3 {
            out.push(' ');
            out.push_str(&fmt_f64(r[(row, col)]));
        }
        out.push(' ');
        out.push_str(&fmt_f64(t[row]));
    }
}

/// Parses 12 tokens into a pose, validating the rotation block.
pub(crate) fn parse_pose(tokens: &[&str], line: usize, what: &str) -> Result<Pose<f64>, IoError> {
    if tokens.len() < 12 {
        return Err(IoError::parse(
            line,
            format!("{what}: expected 12 numbers, got {}", tokens.len()),
        ));
    }
    let mut values = [0.0f64; 12];
    for (v, tok) in values.iter_mut().zip(tokens) {
        *v = parse_f64(tok, line)?;
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(IoError::parse(line, format!("{what}: non-finite entry")));
    }
    let rotation = Matrix3::new(
        values[0], values[1], values[2], //
        values[4], values[5], values[6], //
        values[8], values[9], values[10],
    );
    let translation = Vector3::new(values[3], values[7], values[11]);

    let residual = (rotation.transpose() * rotation - Matrix3::identity()).norm();
    let det = rotation.determinant();
    if residual > LOAD_ROTATION_TOL || (det - 1.0).abs() > LOAD_ROTATION_TOL {
        return Err(IoError::parse(
            line,
            format!("{what}: invalid rotation (orthonormality residual {residual:e}, det {det})"),
        ));
    }
    Ok(Pose::new(rotation, translation))
}

/// Iterates over the content lines of a file: 1-based line numbers, with
/// blank lines and whole-line `#` comments skipped.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(idx, raw)| {
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            None
        } else {
            Some((idx + 1, trimmed))
        }
    })
}
