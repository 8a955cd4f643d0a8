//! Rollout-time application of a learned manifold: project predicted object
//! poses onto the retained principal subspace and convert back to commanded
//! robot poses through the measured in-hand transform,
//! `A_st = (proj A_so) * A_to^{-1}`.

use thiserror::Error;

use crate::liegroup::Pose;
use crate::manifold::TaskManifold;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProjectorError {
    #[error("manifold dimensionality not set")]
    DimUnset,
    #[error("log map undefined: rotation angle near pi")]
    AngleNearPi,
    #[error("log map undefined at trajectory step {0}: rotation angle near pi")]
    AngleNearPiAtStep(usize),
}

/// Chunk of predicted robot poses (world-to-tool), in execution order.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionTrajectory<T: Real> {
    pub robot_poses: Vec<Pose<T>>,
}

impl<T: Real> ActionTrajectory<T> {
    pub fn new(robot_poses: Vec<Pose<T>>) -> Self {
        Self { robot_poses }
    }

    pub fn len(&self) -> usize {
        self.robot_poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.robot_poses.is_empty()
    }
}

/// Projects an object pose onto the manifold: lift at the mean, normalize,
/// keep the first `dim` principal components, denormalize, exponentiate.
///
/// `dim = 0` pins the pose to the mean and `dim = 6` is the identity; both
/// are returned without the lift/retract roundtrip, which is exact.
///
/// Fails with [`ProjectorError::AngleNearPi`] when the input lift leaves the
/// log domain, and also when the *projected* twist has rotation norm at or
/// beyond `pi`: basis directions mix the normalized rotation and translation
/// blocks, so a pose far off-manifold (relative to the data scales) can
/// project outside the invertible neighborhood, where the round-trip
/// contracts cannot hold.
pub fn project_object_pose<T: Real>(
    a_so: &Pose<T>,
    m: &TaskManifold<T>,
) -> Result<Pose<T>, ProjectorError> {
    let dim = m.dim().ok_or(ProjectorError::DimUnset)?;
    match dim {
        0 => Ok(m.mean().clone()),
        6 => Ok(a_so.clone()),
        _ => {
            let twist = m
                .mean()
                .inverse()
                .compose(a_so)
                .log()
                .map_err(|_| ProjectorError::AngleNearPi)?;
            let row = m.scales().normalize(&twist);
            let projected = m.projector_matrix(dim) * row;
            let back = m.scales().denormalize(&projected);
            let near_pi: T = crate::scalar::real(crate::liegroup::ANGLE_NEAR_PI_TOL);
            if back.omega.norm() >= T::pi() - near_pi {
                return Err(ProjectorError::AngleNearPi);
            }
            Ok(m.mean().compose(&back.exp()))
        }
    }
}

/// Commanded robot pose realizing a projected object pose under the measured
/// in-hand transform: `A_st = (proj A_so) * A_to^{-1}`.
pub fn robot_pose_from_projection<T: Real>(projected_a_so: &Pose<T>, a_to: &Pose<T>) -> Pose<T> {
    projected_a_so.compose(&a_to.inverse())
}

/// Projects a predicted robot-pose chunk: each pose is mapped to its implied
/// object pose with the (fixed) in-hand estimate, projected, and mapped back.
/// Fails on the first pose whose lift leaves the log domain.
///
/// `dim = 6` returns the input unchanged.
pub fn project_action_trajectory<T: Real>(
    actions: &ActionTrajectory<T>,
    a_to: &Pose<T>,
    m: &TaskManifold<T>,
) -> Result<ActionTrajectory<T>, ProjectorError> {
    let dim = m.dim().ok_or(ProjectorError::DimUnset)?;
    if dim == 6 {
        return Ok(actions.clone());
    }
    let robot_poses = actions
        .robot_poses
        .iter()
        .enumerate()
        .map(|(step, pose)| {
            let a_so = pose.compose(a_to);
            match project_object_pose(&a_so, m) {
                Ok(projected) => Ok(robot_pose_from_projection(&projected, a_to)),
                Err(ProjectorError::AngleNearPi) => Err(ProjectorError::AngleNearPiAtStep(step)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(ActionTrajectory::new(robot_poses))
}

/// Fail-open variant used by rollouts: a step whose lift leaves the log
/// domain keeps its unprojected pose and is reported in the second return
/// value instead of aborting the chunk.
pub fn project_action_trajectory_lenient<T: Real>(
    actions: &ActionTrajectory<T>,
    a_to: &Pose<T>,
    m: &TaskManifold<T>,
) -> Result<(ActionTrajectory<T>, Vec<usize>), ProjectorError> {
    let dim = m.dim().ok_or(ProjectorError::DimUnset)?;
    if dim == 6 {
        return Ok((actions.clone(), Vec::new()));
    }
    let mut fallback_steps = Vec::new();
    let mut robot_poses = Vec::with_capacity(actions.len());
    for (step, pose) in actions.robot_poses.iter().enumerate() {
        let a_so = pose.compose(a_to);
        match project_object_pose(&a_so, m) {
            Ok(projected) => robot_poses.push(robot_pose_from_projection(&projected, a_to)),
            Err(ProjectorError::AngleNearPi) => {
                log::warn!("projection skipped at step {step}: rotation angle near pi");
                fallback_steps.push(step);
                robot_poses.push(pose.clone());
            }
            Err(e) => return Err(e),
        }
    }
    Ok((ActionTrajectory::new(robot_poses), fallback_steps))
}
