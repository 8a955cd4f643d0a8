//! Manifold descriptor format: one keyed line per field.
//!
//! ```text
//! mean <12 numbers, 3x4 row-major>
//! basis <36 numbers, 6x6 row-major>
//! singular_values <6 numbers>
//! scales <s_omega> <s_v>
//! dim unset|<0..=6>
//! ```

use std::path::Path;

use nalgebra::{Matrix6, Vector6};

use crate::manifold::{NormalizationScales, TaskManifold, BASIS_TOL};

use super::{content_lines, fmt_f64, parse_f64, parse_pose, parse_usize, IoError};

pub fn save_manifold(manifold: &TaskManifold<f64>, path: &Path) -> Result<(), IoError> {
    let mut out = String::new();
    out.push_str("# gromp task manifold\n");

    out.push_str("mean");
    super::write_pose(&mut out, manifold.mean());
    out.push('\n');

    out.push_str("basis");
    for row in 0..6 {
        for col in 0..6 {
            out.push(' ');
            out.push_str(&fmt_f64(manifold.basis()[(row, col)]));
        }
    }
    out.push('\n');

    out.push_str("singular_values");
    for i in 0..6 {
        out.push(' ');
        out.push_str(&fmt_f64(manifold.singular_values()[i]));
    }
    out.push('\n');

    out.push_str(&format!(
        "scales {} {}\n",
        fmt_f64(manifold.scales().s_omega),
        fmt_f64(manifold.scales().s_v)
    ));

    match manifold.dim() {
        Some(d) => out.push_str(&format!("dim {d}\n")),
        None => out.push_str("dim unset\n"),
    }

    std::fs::write(path, out)?;
    Ok(())
}

pub fn load_manifold(path: &Path) -> Result<TaskManifold<f64>, IoError> {
    let text = std::fs::read_to_string(path)?;

    let mut mean = None;
    let mut basis = None;
    let mut singular_values = None;
    let mut scales = None;
    let mut dim: Option<Option<usize>> = None;

    for (line_no, line) in content_lines(&text) {
        let mut tokens = line.split_whitespace();
        let key = tokens.next().unwrap_or_default();
        let rest: Vec<&str> = tokens.collect();
        match key {
            "mean" => mean = Some(parse_pose(&rest, line_no, "mean")?),
            "basis" => {
                if rest.len() != 36 {
                    return Err(IoError::parse(
                        line_no,
                        format!("basis: expected 36 numbers, got {}", rest.len()),
                    ));
                }
                let mut m = Matrix6::zeros();
                for (idx, tok) in rest.iter().enumerate() {
                    m[(idx / 6, idx % 6)] = parse_f64(tok, line_no)?;
                }
                basis = Some(m);
            }
            "singular_values" => {
                if rest.len() != 6 {
                    return Err(IoError::parse(
                        line_no,
                        format!("singular_values: expected 6 numbers, got {}", rest.len()),
                    ));
                }
                let mut v = Vector6::zeros();
                for (idx, tok) in rest.iter().enumerate() {
                    v[idx] = parse_f64(tok, line_no)?;
                }
                for i in 1..6 {
                    if v[i] > v[i - 1] {
                        return Err(IoError::parse(
                            line_no,
                            "singular values must be non-increasing",
                        ));
                    }
                }
                singular_values = Some(v);
            }
            "scales" => {
                if rest.len() != 2 {
                    return Err(IoError::parse(line_no, "scales: expected 2 numbers"));
                }
                let s_omega = parse_f64(rest[0], line_no)?;
                let s_v = parse_f64(rest[1], line_no)?;
                if s_omega <= 0.0 || s_v <= 0.0 {
                    return Err(IoError::parse(line_no, "scales must be strictly positive"));
                }
                scales = Some(NormalizationScales { s_omega, s_v });
            }
            "dim" => {
                if rest.len() != 1 {
                    return Err(IoError::parse(line_no, "dim: expected one value"));
                }
                dim = Some(if rest[0] == "unset" {
                    None
                } else {
                    let d = parse_usize(rest[0], line_no)?;
                    if d > 6 {
                        return Err(IoError::parse(line_no, format!("dim {d} outside 0..=6")));
                    }
                    Some(d)
                });
            }
            other => {
                return Err(IoError::parse(line_no, format!("unknown key {other:?}")));
            }
        }
    }

    let mean = mean.ok_or_else(|| IoError::parse(0, "missing `mean` line"))?;
    let basis = basis.ok_or_else(|| IoError::parse(0, "missing `basis` line"))?;
    let singular_values =
        singular_values.ok_or_else(|| IoError::parse(0, "missing `singular_values` line"))?;
    let scales = scales.ok_or_else(|| IoError::parse(0, "missing `scales` line"))?;
    let dim = dim.ok_or_else(|| IoError::parse(0, "missing `dim` line"))?;

    // Re-validate the basis before handing it to the constructor.
    let residual = (basis.transpose() * basis - Matrix6::identity()).norm();
    if !residual.is_finite() || residual > BASIS_TOL {
        return Err(IoError::InvalidBasis { residual });
    }

    TaskManifold::new(mean, basis, singular_values, scales, dim)
        .map_err(|e| IoError::parse(0, format!("inconsistent manifold: {e}")))
}
