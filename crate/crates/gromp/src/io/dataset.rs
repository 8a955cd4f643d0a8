//! Demonstration dataset format. Per episode a header line
//! `episode <id> <length>` is followed by one record per line:
//! the step index, 12 numbers for `A_st` (row-major 3x4), and 12 numbers for
//! `A_to`. `A_so` is not stored; it is recomputed as `A_st * A_to` on load,
//! which makes the frame-consistency check a reconstruction.

use std::path::Path;

use crate::liegroup::Pose;
use crate::scalar::Real;

use super::{content_lines, parse_pose, parse_usize, write_pose, IoError};

/// One timestamped frame triple. `a_so` is always the product of the other
/// two; build records through [`DemoRecord::new`] to keep that exact.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoRecord<T: Real> {
    pub t: usize,
    pub a_st: Pose<T>,
    pub a_to: Pose<T>,
    pub a_so: Pose<T>,
}

impl<T: Real> DemoRecord<T> {
    pub fn new(t: usize, a_st: Pose<T>, a_to: Pose<T>) -> Self {
        let a_so = a_st.compose(&a_to);
        Self {
            t,
            a_st,
            a_to,
            a_so,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode<T: Real> {
    pub records: Vec<DemoRecord<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemonstrationDataset<T: Real> {
    pub episodes: Vec<Episode<T>>,
}

impl<T: Real> DemonstrationDataset<T> {
    pub fn new(episodes: Vec<Episode<T>>) -> Self {
        Self { episodes }
    }

    pub fn num_records(&self) -> usize {
        self.episodes.iter().map(|e| e.records.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.num_records() == 0
    }

    /// Object poses of every record of every episode, pooled in order.
    pub fn pooled_object_poses(&self) -> Vec<Pose<T>> {
        self.episodes
            .iter()
            .flat_map(|e| e.records.iter().map(|r| r.a_so.clone()))
            .collect()
    }

    /// Dataset restricted to the given episode indices, in the given order.
    pub fn subset(&self, episode_indices: &[usize]) -> Self {
        Self {
            episodes: episode_indices
                .iter()
                .map(|&i| self.episodes[i].clone())
                .collect(),
        }
    }
}

impl DemonstrationDataset<f64> {
    pub fn save(&self, path: &Path) -> Result<(), IoError> {
        let mut out = String::new();
        out.push_str("# gromp demonstration dataset\n");
        out.push_str("# episode <id> <length>, then per record: t, A_st (3x4 row-major), A_to (3x4 row-major)\n");
        for (id, episode) in self.episodes.iter().enumerate() {
            out.push_str(&format!("episode {id} {}\n", episode.records.len()));
            for record in &episode.records {
                out.push_str(&record.t.to_string());
                write_pose(&mut out, &record.a_st);
                write_pose(&mut out, &record.a_to);
                out.push('\n');
            }
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = content_lines(&text).peekable();
        let mut episodes = Vec::new();

        if lines.peek().is_none() {
            return Err(IoError::parse(0, "empty dataset file"));
        }

        while let Some((line_no, line)) = lines.next() {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 3 || tokens[0] != "episode" {
                return Err(IoError::parse(
                    line_no,
                    format!("expected `episode <id> <length>`, got {line:?}"),
                ));
            }
            let expected_id = episodes.len();
            let id = parse_usize(tokens[1], line_no)?;
            if id != expected_id {
                return Err(IoError::parse(
                    line_no,
                    format!("episode id {id} out of order (expected {expected_id})"),
                ));
            }
            let length = parse_usize(tokens[2], line_no)?;
            if length == 0 {
                return Err(IoError::parse(line_no, "episode length must be at least 1"));
            }

            let mut records = Vec::with_capacity(length);
            for k in 0..length {
                let (rec_line, rec) = lines.next().ok_or_else(|| {
                    IoError::parse(
                        line_no,
                        format!("episode {id}: expected {length} records, found {k}"),
                    )
                })?;
                let fields: Vec<&str> = rec.split_whitespace().collect();
                if fields.len() != 25 {
                    return Err(IoError::parse(
                        rec_line,
                        format!("record: expected 25 fields, got {}", fields.len()),
                    ));
                }
                let t = parse_usize(fields[0], rec_line)?;
                let a_st = parse_pose(
                    &fields[1..13],
                    rec_line,
                    &format!("episode {id} record {k} A_st"),
                )?;
                let a_to = parse_pose(
                    &fields[13..25],
                    rec_line,
                    &format!("episode {id} record {k} A_to"),
                )?;
                records.push(DemoRecord::new(t, a_st, a_to));
            }
            episodes.push(Episode { records });
        }
        Ok(Self { episodes })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liegroup::Twist;
    use nalgebra::Vector3;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_dataset(seed: u64, episodes: usize, len: usize) -> DemonstrationDataset<f64> {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut random_pose = |scale: f64| {
            Twist::new(
                Vector3::new(
                    rng.random_range(-scale..scale),
                    rng.random_range(-scale..scale),
                    rng.random_range(-scale..scale),
                ),
                Vector3::new(
                    rng.random_range(-0.1..0.1),
                    rng.random_range(-0.1..0.1),
                    rng.random_range(-0.1..0.1),
                ),
            )
            .exp()
        };
        let episodes = (0..episodes)
            .map(|_| Episode {
                records: (0..len)
                    .map(|t| DemoRecord::new(t, random_pose(1.0), random_pose(0.02)))
                    .collect(),
            })
            .collect();
        DemonstrationDataset::new(episodes)
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let dataset = random_dataset(5, 10, 16);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("demos.txt");
        dataset.save(&path).unwrap();
        let loaded = DemonstrationDataset::load(&path).unwrap();
        assert_eq!(loaded, dataset);
    }

    #[test]
    fn frame_consistency_holds_per_record() {
        let dataset = random_dataset(6, 3, 8);
        for episode in &dataset.episodes {
            for record in &episode.records {
                let product = record.a_st.compose(&record.a_to);
                assert_eq!(product, record.a_so);
            }
        }
    }

    #[test]
    fn corrupted_rotation_is_a_parse_failure() {
        let dataset = random_dataset(7, 1, 2);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("demos.txt");
        dataset.save(&path).unwrap();

        // Flip the sign of the first rotation row: det becomes -1.
        let mut text = std::fs::read_to_string(&path).unwrap();
        let record_line = text.lines().nth(3).unwrap().to_string();
        let fields: Vec<String> = record_line
            .split_whitespace()
            .enumerate()
            .map(|(i, f)| {
                if (1..=3).contains(&i) {
                    let v: f64 = f.parse().unwrap();
                    super::super::fmt_f64(-v)
                } else {
                    f.to_string()
                }
            })
            .collect();
        text = text.replace(&record_line, &fields.join(" "));
        std::fs::write(&path, text).unwrap();

        let err = DemonstrationDataset::load(&path).unwrap_err();
        match err {
            IoError::Parse { line, message } => {
                assert_eq!(line, 4);
                assert!(message.contains("record 0 A_st"), "message: {message}");
                assert!(message.contains("invalid rotation"), "message: {message}");
            }
            other => panic!("expected parse failure, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_a_parse_failure() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.txt");
        std::fs::write(&path, "# only comments\n\n").unwrap();
        assert!(matches!(
            DemonstrationDataset::load(&path).unwrap_err(),
            IoError::Parse { .. }
        ));
    }

    #[test]
    fn truncated_episode_is_a_parse_failure() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.txt");
        let dataset = random_dataset(8, 1, 3);
        dataset.save(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let truncated: Vec<&str> = text.lines().take(4).collect();
        std::fs::write(&path, truncated.join("\n")).unwrap();
        assert!(matches!(
            DemonstrationDataset::load(&path).unwrap_err(),
            IoError::Parse { .. }
        ));
    }

    #[test]
    fn subset_preserves_requested_order() {
        let dataset = random_dataset(9, 5, 2);
        let subset = dataset.subset(&[3, 0]);
        assert_eq!(subset.episodes.len(), 2);
        assert_eq!(subset.episodes[0], dataset.episodes[3]);
        assert_eq!(subset.episodes[1], dataset.episodes[0]);
    }
}
