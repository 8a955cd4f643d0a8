//! Task presets: each assembly task plants an exact low-dimensional motion
//! manifold (orthonormal twist directions through a nominal mean pose) plus
//! the goal, approach geometry, tolerances, and slip parameters.
//!
//! Planted directions must pairwise commute as se(3) elements (e.g. rotation
//! about an axis plus translation along that axis, or pure translations) so
//! that demonstration paths are exactly geodesic submanifolds and lifted
//! twists carry zero off-manifold components.

use nalgebra::{Vector3, Vector6};

use crate::liegroup::{Pose, Twist};

use super::SimError;

/// In-grasp slip model. While the commanded motion is in contact the grasp
/// drifts in its (y, z, theta) plane by `slip_gain` times the in-plane
/// motion components, plus zero-mean Gaussian noise of `slip_noise_sigma`
/// per executed step (the noise term applies regardless of contact).
#[derive(Debug, Clone, PartialEq)]
pub struct SlipParams {
    pub slip_gain: f64,
    pub slip_noise_sigma: f64,
    pub contact_threshold: f64,
}

impl SlipParams {
    pub fn disabled() -> Self {
        Self {
            slip_gain: 0.0,
            slip_noise_sigma: 0.0,
            contact_threshold: 0.0,
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        if self.slip_gain < 0.0 || self.slip_noise_sigma < 0.0 || self.contact_threshold < 0.0 {
            return Err(SimError::InvalidTask(
                "slip parameters must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Full description of a synthetic assembly task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub name: String,
    /// Dimensionality of the planted motion manifold, 1..=6.
    pub true_manifold_dim: usize,
    /// Orthonormal twist directions spanning the planted manifold,
    /// `true_manifold_dim` of them.
    pub true_basis: Vec<Vector6<f64>>,
    /// Base pose the manifold passes through.
    pub nominal_mean: Pose<f64>,
    /// Nominal start coordinates on the manifold.
    pub start_coords: Vec<f64>,
    /// Optional waypoints between start and goal; demonstrations follow the
    /// piecewise-geodesic polyline through them.
    pub waypoints: Vec<Vec<f64>>,
    /// Goal coordinates on the manifold.
    pub goal_twist_coords: Vec<f64>,
    /// Spread of sampled start coordinates around `start_coords`.
    pub start_coord_sigma: f64,
    /// Spread of the initial in-grasp translational (y, z) offset.
    pub grasp_offset_sigma: f64,
    /// Spread of the initial in-grasp yaw offset.
    pub grasp_yaw_sigma: f64,
    /// Unit direction of the approach motion in the world frame.
    pub approach_axis: Vector3<f64>,
    /// The mating plane sits this far before the goal along the approach;
    /// contact depth is penetration past it.
    pub contact_plane_offset: f64,
    pub success_tol_translation: f64,
    pub success_tol_rotation: f64,
    pub slip: SlipParams,
    /// Policy-horizon budget: prediction steps per rollout, and the number
    /// of action/observation pairs per demonstration episode.
    pub horizon: usize,
}

/// Optional per-field overrides applied on top of a preset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TaskOverrides {
    pub slip_gain: Option<f64>,
    pub slip_noise_sigma: Option<f64>,
    pub contact_threshold: Option<f64>,
    pub success_tol_translation: Option<f64>,
    pub success_tol_rotation: Option<f64>,
    pub start_coord_sigma: Option<f64>,
    pub grasp_offset_sigma: Option<f64>,
    pub grasp_yaw_sigma: Option<f64>,
    pub horizon: Option<usize>,
}

impl TaskOverrides {
    fn apply(&self, task: &mut TaskSpec) {
        if let Some(v) = self.slip_gain {
            task.slip.slip_gain = v;
        }
        if let Some(v) = self.slip_noise_sigma {
            task.slip.slip_noise_sigma = v;
        }
        if let Some(v) = self.contact_threshold {
            task.slip.contact_threshold = v;
        }
        if let Some(v) = self.success_tol_translation {
            task.success_tol_translation = v;
        }
        if let Some(v) = self.success_tol_rotation {
            task.success_tol_rotation = v;
        }
        if let Some(v) = self.start_coord_sigma {
            task.start_coord_sigma = v;
        }
        if let Some(v) = self.grasp_offset_sigma {
            task.grasp_offset_sigma = v;
        }
        if let Some(v) = self.grasp_yaw_sigma {
            task.grasp_yaw_sigma = v;
        }
        if let Some(v) = self.horizon {
            task.horizon = v;
        }
    }
}

impl TaskSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        let d = self.true_manifold_dim;
        if !(1..=6).contains(&d) {
            return Err(SimError::InvalidTask("manifold dim outside 1..=6".into()));
        }
        if self.true_basis.len() != d {
            return Err(SimError::InvalidTask(
                "basis length differs from dim".into(),
            ));
        }
        for (i, bi) in self.true_basis.iter().enumerate() {
            for (j, bj) in self.true_basis.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                if (bi.dot(bj) - expected).abs() > 1e-10 {
                    return Err(SimError::InvalidTask(format!(
                        "basis directions {i},{j} not orthonormal"
                    )));
                }
            }
        }
        for coords in std::iter::once(&self.start_coords)
            .chain(self.waypoints.iter())
            .chain(std::iter::once(&self.goal_twist_coords))
        {
            if coords.len() != d {
                return Err(SimError::InvalidTask(
                    "coordinate length differs from dim".into(),
                ));
            }
        }
        if self.success_tol_translation <= 0.0 || self.success_tol_rotation <= 0.0 {
            return Err(SimError::InvalidTask(
                "tolerances must be strictly positive".into(),
            ));
        }
        if (self.approach_axis.norm() - 1.0).abs() > 1e-9 {
            return Err(SimError::InvalidTask(
                "approach axis must be a unit vector".into(),
            ));
        }
        if self.horizon == 0 {
            return Err(SimError::InvalidTask("horizon must be at least 1".into()));
        }
        if self.start_coord_sigma < 0.0
            || self.grasp_offset_sigma < 0.0
            || self.grasp_yaw_sigma < 0.0
        {
            return Err(SimError::InvalidTask("sigmas must be non-negative".into()));
        }
        self.slip.validate()
    }

    /// Pose at the given manifold coordinates:
    /// `nominal_mean * exp(sum_j c_j xi_j)`.
    pub fn pose_at(&self, coords: &[f64]) -> Pose<f64> {
        let mut xi = Vector6::zeros();
        for (c, basis) in coords.iter().zip(&self.true_basis) {
            xi += basis * *c;
        }
        self.nominal_mean.compose(&Twist::from_vector(&xi).exp())
    }

    pub fn goal_pose(&self) -> Pose<f64> {
        self.pose_at(&self.goal_twist_coords)
    }

    /// Penetration of an object position past the mating plane, measured
    /// along the approach axis. Positive inside the contact zone.
    pub fn contact_depth(&self, object_position: &Vector3<f64>) -> f64 {
        let goal = self.goal_pose();
        let plane_point = goal.translation() - self.approach_axis * self.contact_plane_offset;
        (object_position - plane_point).dot(&self.approach_axis)
    }

    /// Polyline corners in coordinate space: start, waypoints, goal.
    pub(crate) fn path_corners(&self, start: &[f64]) -> Vec<Vec<f64>> {
        let mut corners = Vec::with_capacity(self.waypoints.len() + 2);
        corners.push(start.to_vec());
        corners.extend(self.waypoints.iter().cloned());
        corners.push(self.goal_twist_coords.clone());
        corners
    }

    /// Goal test on an object pose: translation and rotation both within
    /// their tolerances of the goal pose.
    pub fn is_success(&self, a_so: &Pose<f64>) -> bool {
        let goal = self.goal_pose();
        let dt = (a_so.translation() - goal.translation()).norm();
        if dt > self.success_tol_translation {
            return false;
        }
        let angle = goal.inverse().compose(a_so).rotation_angle();
        angle <= self.success_tol_rotation
    }
}

fn orthonormalize(dirs: &[Vector6<f64>]) -> Vec<Vector6<f64>> {
    let mut basis: Vec<Vector6<f64>> = Vec::with_capacity(dirs.len());
    for dir in dirs {
        let mut v = *dir;
        for b in &basis {
            v -= b * b.dot(&v);
        }
        basis.push(v / v.norm());
    }
    basis
}

/// Builds a task preset with optional overrides applied.
///
/// Presets: `peg` (one-dimensional vertical insertion), `nut` (screw plus
/// approach about/along the bolt axis), `usb` (horizontal drop-then-push),
/// `cover` (place-then-slide). See the config reference in the README for
/// the planted dimensionalities and default parameters.
pub fn make_task(preset: &str, overrides: &TaskOverrides) -> Result<TaskSpec, SimError> {
    // Twist layout is [omega; v]: entries 0..3 rotate (radians), 3..6
    // translate (meters).
    let e = |idx: usize| -> Vector6<f64> {
        let mut v = Vector6::zeros();
        v[idx] = 1.0;
        v
    };

    let mut task = match preset {
        // Vertical peg insertion: the motion manifold is the insertion axis.
        "peg" => TaskSpec {
            name: "peg".into(),
            true_manifold_dim: 1,
            true_basis: vec![e(5)],
            nominal_mean: Pose::from_translation(Vector3::new(0.40, 0.0, 0.15)),
            start_coords: vec![0.05],
            waypoints: vec![],
            goal_twist_coords: vec![-0.05],
            start_coord_sigma: 0.01,
            grasp_offset_sigma: 0.004,
            grasp_yaw_sigma: 0.045,
            approach_axis: Vector3::new(0.0, 0.0, -1.0),
            contact_plane_offset: 0.02,
            success_tol_translation: 0.002,
            success_tol_rotation: 0.05,
            slip: SlipParams {
                slip_gain: 0.3,
                slip_noise_sigma: 4e-4,
                contact_threshold: 0.0,
            },
            horizon: 64,
        },
        // Nut threading: descend onto the bolt, then a screw motion about
        // and along the bolt axis (M20-like pitch, 0.4 mm per radian).
        "nut" => {
            let screw = Vector6::new(0.0, 0.0, 1.0, 0.0, 0.0, -4e-4);
            let descend = e(5);
            TaskSpec {
                name: "nut".into(),
                true_manifold_dim: 2,
                true_basis: orthonormalize(&[screw, descend]),
                nominal_mean: Pose::from_translation(Vector3::new(0.35, 0.10, 0.12)),
                start_coords: vec![0.0, 0.05],
                waypoints: vec![vec![0.0, 0.002]],
                goal_twist_coords: vec![2.2, 0.002],
                start_coord_sigma: 0.008,
                grasp_offset_sigma: 0.004,
                grasp_yaw_sigma: 0.045,
                approach_axis: Vector3::new(0.0, 0.0, -1.0),
                contact_plane_offset: 0.015,
                success_tol_translation: 0.002,
                success_tol_rotation: 0.05,
                slip: SlipParams {
                    slip_gain: 0.3,
                    slip_noise_sigma: 4e-4,
                    contact_threshold: 0.0,
                },
                horizon: 64,
            }
        }
        // USB insertion into a horizontal port: drop to port height, then
        // push in along -x.
        "usb" => TaskSpec {
            name: "usb".into(),
            true_manifold_dim: 2,
            true_basis: vec![e(3), e(5)],
            nominal_mean: Pose::from_translation(Vector3::new(0.45, -0.05, 0.10)),
            start_coords: vec![0.06, 0.04],
            waypoints: vec![vec![0.06, 0.0]],
            goal_twist_coords: vec![0.0, 0.0],
            start_coord_sigma: 0.008,
            grasp_offset_sigma: 0.004,
            grasp_yaw_sigma: 0.045,
            approach_axis: Vector3::new(-1.0, 0.0, 0.0),
            contact_plane_offset: 0.02,
            success_tol_translation: 0.002,
            success_tol_rotation: 0.05,
            slip: SlipParams {
                slip_gain: 0.3,
                slip_noise_sigma: 4e-4,
                contact_threshold: 0.0,
            },
            horizon: 64,
        },
        // Battery-cover placement: lower onto the housing, then slide along
        // y until the latch seats.
        "cover" => TaskSpec {
            name: "cover".into(),
            true_manifold_dim: 2,
            true_basis: vec![e(4), e(5)],
            nominal_mean: Pose::from_translation(Vector3::new(0.38, 0.06, 0.08)),
            start_coords: vec![0.03, 0.05],
            waypoints: vec![vec![0.03, 0.002]],
            goal_twist_coords: vec![0.0, 0.002],
            start_coord_sigma: 0.008,
            grasp_offset_sigma: 0.004,
            grasp_yaw_sigma: 0.045,
            approach_axis: Vector3::new(0.0, 0.0, -1.0),
            contact_plane_offset: 0.015,
            success_tol_translation: 0.002,
            success_tol_rotation: 0.05,
            slip: SlipParams {
                slip_gain: 0.3,
                slip_noise_sigma: 4e-4,
                contact_threshold: 0.0,
            },
            horizon: 64,
        },
        other => return Err(SimError::UnknownPreset(other.to_string())),
    };
    overrides.apply(&mut task);
    task.validate()?;
    Ok(task)
}
