//! Results CSV: one row per trial with the bandit value snapshot.

use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;

use super::{fmt_f64, parse_f64, parse_usize, IoError};

pub const RESULTS_HEADER: &str =
    "replication,stage_demos,trial,arm,projection_dim,success,q0,q1,q2,q3,q4,q5,q6,seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Arm {
    Baseline,
    Gromp,
}

impl Arm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Arm::Baseline => "baseline",
            Arm::Gromp => "gromp",
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub replication: usize,
    pub stage_demos: usize,
    pub trial: usize,
    pub arm: Arm,
    /// `None` for the baseline arm, serialized as `-1`.
    pub projection_dim: Option<usize>,
    pub success: bool,
    /// Bandit value snapshot at the time the row was emitted.
    pub q: [f64; 7],
    /// Derived seed of the trial's rollout stream.
    pub seed: u64,
}

impl TrialRow {
    fn to_csv_line(&self) -> String {
        let dim = match self.projection_dim {
            Some(d) => d.to_string(),
            None => "-1".to_string(),
        };
        let q: Vec<String> = self.q.iter().map(|&x| fmt_f64(x)).collect();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.replication,
            self.stage_demos,
            self.trial,
            self.arm,
            dim,
            u8::from(self.success),
            q.join(","),
            self.seed
        )
    }
}

/// Full results of an experiment, in canonical row order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultsTable {
    pub rows: Vec<TrialRow>,
}

impl ResultsTable {
    pub fn new(mut rows: Vec<TrialRow>) -> Self {
        rows.sort_by_key(|r| (r.replication, r.stage_demos, r.arm, r.trial));
        Self { rows }
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), IoError> {
        let mut writer = ResultsWriter::create(path)?;
        for row in &self.rows {
            writer.append_result_row(row)?;
        }
        Ok(())
    }
}

/// Line-at-a-time CSV writer: the header is written once at creation and
/// every row is appended with a single write call.
pub struct ResultsWriter {
    file: File,
}

impl ResultsWriter {
    pub fn create(path: &Path) -> Result<Self, IoError> {
        let mut file = File::create(path)?;
        file.write_all(RESULTS_HEADER.as_bytes())?;
        file.write_all(b"\n")?;
        Ok(Self { file })
    }

    pub fn open_append(path: &Path) -> Result<Self, IoError> {
        let file = OpenOptions::new().append(true).open(path)?;
        Ok(Self { file })
    }

    pub fn append_result_row(&mut self, row: &TrialRow) -> Result<(), IoError> {
        let mut line = row.to_csv_line();
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        Ok(())
    }
}

pub fn load_results(path: &Path) -> Result<ResultsTable, IoError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| IoError::parse(0, "empty results file"))?;
    if header.trim() != RESULTS_HEADER {
        return Err(IoError::parse(1, "unexpected results header"));
    }

    let mut rows = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 14 {
            return Err(IoError::parse(
                line_no,
                format!("expected 14 fields, got {}", fields.len()),
            ));
        }
        let arm = match fields[3] {
            "baseline" => Arm::Baseline,
            "gromp" => Arm::Gromp,
            other => return Err(IoError::parse(line_no, format!("unknown arm {other:?}"))),
        };
        let projection_dim = if fields[4] == "-1" {
            None
        } else {
            Some(parse_usize(fields[4], line_no)?)
        };
        let success = match fields[5] {
            "0" => false,
            "1" => true,
            other => {
                return Err(IoError::parse(
                    line_no,
                    format!("success must be 0 or 1, got {other:?}"),
                ))
            }
        };
        let mut q = [0.0f64; 7];
        for (slot, tok) in q.iter_mut().zip(&fields[6..13]) {
            *slot = parse_f64(tok, line_no)?;
        }
        let seed = fields[13]
            .parse::<u64>()
            .map_err(|_| IoError::parse(line_no, "seed must be a u64"))?;
        rows.push(TrialRow {
            replication: parse_usize(fields[0], line_no)?,
            stage_demos: parse_usize(fields[1], line_no)?,
            trial: parse_usize(fields[2], line_no)?,
            arm,
            projection_dim,
            success,
            q,
            seed,
        });
    }
    if rows.is_empty() {
        return Err(IoError::parse(1, "results file has no data rows"));
    }
    // Canonical order, even for hand-assembled files.
    Ok(ResultsTable::new(rows))
}
