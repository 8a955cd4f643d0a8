//! Surrogate behavior-cloned policy: nearest-neighbor retrieval over the
//! demonstration states with geodesic blending of the retrieved action
//! chunks and i.i.d. tangent noise per predicted pose. It reproduces the
//! compounding-error behavior of a learned policy without any training:
//! retrieved robot poses embed their episode's in-grasp offset, so replaying
//! them under a different grasp leaves a persistent object-pose error that
//! the projection layer can remove.

use nalgebra::Vector6;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::io::DemonstrationDataset;
use crate::liegroup::{geodesic_mean, Pose, Twist};
use crate::manifold::SCALE_FALLBACK_TOL;
use crate::projector::ActionTrajectory;

use super::SimError;

/// Predicted chunk length (robot poses per prediction).
pub const ACTION_HORIZON: usize = 8;

/// State-to-action-chunk map used by rollouts.
pub trait Policy {
    /// Predicts the next [`Self::prediction_len`] robot poses from the
    /// current robot pose and the observed in-hand transform.
    fn predict(
        &self,
        robot_pose: &Pose<f64>,
        in_hand_obs: &Pose<f64>,
        rng: &mut dyn RngCore,
    ) -> Result<ActionTrajectory<f64>, SimError>;

    fn prediction_len(&self) -> usize {
        ACTION_HORIZON
    }
}

struct PolicyEntry {
    /// Unit-balanced twist key of the record's object pose.
    key: Vector6<f64>,
    episode: usize,
    step: usize,
}

/// k-nearest-neighbor policy over demonstration object states.
pub struct SurrogatePolicy {
    entries: Vec<PolicyEntry>,
    robot_poses: Vec<Vec<Pose<f64>>>,
    mean: Pose<f64>,
    /// Meters-per-radian weight balancing rotation against translation in
    /// the state metric.
    rotation_weight: f64,
    k: usize,
    action_noise_sigma: f64,
}

/// Builds the surrogate policy from a demonstration dataset.
///
/// The state metric is a weighted twist distance at the dataset's geodesic
/// mean: rotational components are scaled by `s_v / s_omega` (dataset max
/// norms, with the same unit fallback as twist normalization) so both blocks
/// carry comparable weight.
pub fn surrogate_policy(
    dataset: &DemonstrationDataset<f64>,
    k: usize,
    action_noise_sigma: f64,
) -> Result<SurrogatePolicy, SimError> {
    if dataset.is_empty() {
        return Err(SimError::EmptyDataset);
    }
    if k == 0 {
        return Err(SimError::InvalidTask(
            "neighbor count must be at least 1".into(),
        ));
    }

    let pooled = dataset.pooled_object_poses();
    let mean = geodesic_mean(&pooled)?;
    let mean_inv = mean.inverse();

    let mut max_omega = 0.0f64;
    let mut max_v = 0.0f64;
    let mut keys = Vec::with_capacity(pooled.len());
    for (episode, ep) in dataset.episodes.iter().enumerate() {
        for (step, record) in ep.records.iter().enumerate() {
            let twist = mean_inv.compose(&record.a_so).log()?;
            max_omega = max_omega.max(twist.omega.norm());
            max_v = max_v.max(twist.v.norm());
            keys.push((episode, step, twist));
        }
    }
    let s_omega = if max_omega < SCALE_FALLBACK_TOL {
        1.0
    } else {
        max_omega
    };
    let s_v = if max_v < SCALE_FALLBACK_TOL {
        1.0
    } else {
        max_v
    };
    let rotation_weight = s_v / s_omega;

    let entries = keys
        .into_iter()
        .map(|(episode, step, twist)| PolicyEntry {
            key: weighted_key(&twist, rotation_weight),
            episode,
            step,
        })
        .collect();

    let robot_poses = dataset
        .episodes
        .iter()
        .map(|ep| ep.records.iter().map(|r| r.a_st.clone()).collect())
        .collect();

    Ok(SurrogatePolicy {
        entries,
        robot_poses,
        mean,
        rotation_weight,
        k,
        action_noise_sigma,
    })
}

fn weighted_key(twist: &Twist<f64>, rotation_weight: f64) -> Vector6<f64> {
    Twist::new(twist.omega * rotation_weight, twist.v).to_vector()
}

impl SurrogatePolicy {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mean(&self) -> &Pose<f64> {
        &self.mean
    }

    fn nearest(&self, key: &Vector6<f64>) -> Vec<&PolicyEntry> {
        let k = self.k.min(self.entries.len());
        let mut scored: Vec<(f64, &PolicyEntry)> = self
            .entries
            .iter()
            .map(|e| ((e.key - key).norm_squared(), e))
            .collect();
        scored.select_nth_unstable_by(k - 1, |a, b| {
            a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal)
        });
        scored.truncate(k);
        scored.into_iter().map(|(_, e)| e).collect()
    }
}

impl Policy for SurrogatePolicy {
    fn predict(
        &self,
        robot_pose: &Pose<f64>,
        in_hand_obs: &Pose<f64>,
        rng: &mut dyn RngCore,
    ) -> Result<ActionTrajectory<f64>, SimError> {
        let a_so = robot_pose.compose(in_hand_obs);
        let twist = self.mean.inverse().compose(&a_so).log()?;
        let key = weighted_key(&twist, self.rotation_weight);
        let neighbors = self.nearest(&key);

        let mut poses = Vec::with_capacity(ACTION_HORIZON);
        for offset in 1..=ACTION_HORIZON {
            let candidates: Vec<Pose<f64>> = neighbors
                .iter()
                .map(|e| {
                    let episode = &self.robot_poses[e.episode];
                    let idx = (e.step + offset).min(episode.len() - 1);
                    episode[idx].clone()
                })
                .collect();
            let mut blended = geodesic_mean(&candidates)?;
            if self.action_noise_sigma > 0.0 {
                let mut noise = Vector6::zeros();
                for slot in noise.iter_mut() {
                    *slot = self.action_noise_sigma * rng.sample::<f64, _>(StandardNormal);
                }
                blended = blended.compose(&Twist::from_vector(&noise).exp());
            }
            poses.push(blended);
        }
        Ok(ActionTrajectory::new(poses))
    }
}
