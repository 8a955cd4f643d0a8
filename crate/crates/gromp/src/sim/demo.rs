//! Expert demonstration generation. Each episode samples a start on the
//! planted manifold, follows the piecewise-geodesic coordinate path to the
//! goal in `horizon` steps (plus optional on-manifold noise), and simulates
//! in-grasp slip along the way. The recorded robot poses compensate the
//! slip so the object stays on its path, mirroring a kinesthetic expert.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::io::{DemoRecord, DemonstrationDataset, Episode};
use crate::liegroup::Pose;

use super::slip::{in_plane_pose, step_slip};
use super::task::TaskSpec;
use super::SimError;

/// Samples start coordinates around the task's nominal start.
pub(crate) fn sample_start_coords(task: &TaskSpec, rng: &mut impl Rng) -> Vec<f64> {
    task.start_coords
        .iter()
        .map(|&c| c + task.start_coord_sigma * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Samples an initial in-grasp offset in the (y, z, theta) plane.
pub(crate) fn sample_grasp_offset(task: &TaskSpec, rng: &mut impl Rng) -> Pose<f64> {
    let y = task.grasp_offset_sigma * rng.sample::<f64, _>(StandardNormal);
    let z = task.grasp_offset_sigma * rng.sample::<f64, _>(StandardNormal);
    let yaw = task.grasp_yaw_sigma * rng.sample::<f64, _>(StandardNormal);
    in_plane_pose(y, z, yaw)
}

/// Point on the coordinate polyline at `fraction` in [0, 1]. Each segment
/// gets an equal parameter share: coordinate axes mix radians and meters,
/// so arc length is not comparable across segments, and a demonstrator
/// spends comparable time on each task phase anyway.
fn polyline_point(corners: &[Vec<f64>], fraction: f64) -> Vec<f64> {
    let segments = corners.len() - 1;
    if segments == 0 {
        return corners[0].clone();
    }
    let scaled = fraction.clamp(0.0, 1.0) * segments as f64;
    let idx = (scaled.floor() as usize).min(segments - 1);
    let s = scaled - idx as f64;
    corners[idx]
        .iter()
        .zip(&corners[idx + 1])
        .map(|(a, b)| a + s * (b - a))
        .collect()
}

/// Generates `n_episodes` expert episodes of `task.horizon` records each.
/// `noise_sigma` perturbs the path coordinates on the manifold; off-manifold
/// components stay exactly zero by construction.
pub fn generate_demonstrations(
    task: &TaskSpec,
    n_episodes: usize,
    noise_sigma: f64,
    rng: &mut impl Rng,
) -> Result<DemonstrationDataset<f64>, SimError> {
    if n_episodes == 0 {
        return Err(SimError::EmptyDataset);
    }
    task.validate()?;

    let steps = task.horizon;
    let mut episodes = Vec::with_capacity(n_episodes);
    for _ in 0..n_episodes {
        let start = sample_start_coords(task, rng);
        let corners = task.path_corners(&start);
        let mut a_to = sample_grasp_offset(task, rng);

        let mut records = Vec::with_capacity(steps);
        let mut prev_path: Option<Pose<f64>> = None;
        for t in 0..steps {
            let fraction = if steps == 1 {
                1.0
            } else {
                t as f64 / (steps - 1) as f64
            };
            let mut coords = polyline_point(&corners, fraction);
            // The expert ends on the goal; noise applies to interior steps.
            if noise_sigma > 0.0 && t + 1 < steps {
                for c in &mut coords {
                    *c += noise_sigma * rng.sample::<f64, _>(StandardNormal);
                }
            }
            let a_so_path = task.pose_at(&coords);

            if let Some(prev) = &prev_path {
                let delta = prev
                    .inverse()
                    .compose(&a_so_path)
                    .log()
                    .map_err(SimError::Lie)?;
                let depth = task.contact_depth(prev.translation());
                a_to = step_slip(&a_to, &delta, depth, &task.slip, rng);
            }

            let a_st = a_so_path.compose(&a_to.inverse());
            records.push(DemoRecord::new(t, a_st, a_to.clone()));
            prev_path = Some(a_so_path);
        }
        episodes.push(Episode { records });
    }
    Ok(DemonstrationDataset::new(episodes))
}
