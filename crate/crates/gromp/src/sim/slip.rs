//! In-grasp motion restricted to SE(2): the tool-to-object transform drifts
//! only in its (y, z, yaw) coordinates. Updates add translation deltas to
//! the y/z components and left-multiply the rotation by a yaw increment,
//! which leaves the x-translation and the bottom rotation row (hence roll
//! and pitch) bit-identical.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::liegroup::{Pose, Twist};

use super::task::SlipParams;

/// In-plane coordinates of a pose: translation y, translation z, and yaw
/// (rotation about the world z-axis).
pub fn in_plane_coords(pose: &Pose<f64>) -> (f64, f64, f64) {
    let t = pose.translation();
    let r = pose.rotation();
    (t.y, t.z, r[(1, 0)].atan2(r[(0, 0)]))
}

/// Pose with only in-plane components: yaw rotation, (0, y, z) translation.
pub fn in_plane_pose(y: f64, z: f64, theta: f64) -> Pose<f64> {
    Pose::new(yaw_matrix(theta), Vector3::new(0.0, y, z))
}

fn yaw_matrix(theta: f64) -> Matrix3<f64> {
    let (s, c) = theta.sin_cos();
    Matrix3::new(
        c, -s, 0.0, //
        s, c, 0.0, //
        0.0, 0.0, 1.0,
    )
}

/// Applies an in-plane delta to a pose, preserving every off-plane
/// component exactly.
fn apply_in_plane_delta(pose: &Pose<f64>, dy: f64, dz: f64, dtheta: f64) -> Pose<f64> {
    if dy == 0.0 && dz == 0.0 && dtheta == 0.0 {
        return pose.clone();
    }
    let t = pose.translation();
    Pose::new(
        yaw_matrix(dtheta) * pose.rotation(),
        Vector3::new(t.x, t.y + dy, t.z + dz),
    )
}

/// One slip step of the in-hand transform. In contact
/// (`contact_depth > contact_threshold`) the grasp is dragged by
/// `slip_gain` times the in-plane components of the commanded motion; the
/// Gaussian noise term applies either way.
pub fn step_slip(
    a_to: &Pose<f64>,
    commanded_motion: &Twist<f64>,
    contact_depth: f64,
    params: &SlipParams,
    rng: &mut impl Rng,
) -> Pose<f64> {
    let (mut dy, mut dz, mut dtheta) = (0.0, 0.0, 0.0);
    if contact_depth > params.contact_threshold && params.slip_gain != 0.0 {
        dy += params.slip_gain * commanded_motion.v.y;
        dz += params.slip_gain * commanded_motion.v.z;
        dtheta += params.slip_gain * commanded_motion.omega.z;
    }
    if params.slip_noise_sigma > 0.0 {
        dy += params.slip_noise_sigma * rng.sample::<f64, _>(StandardNormal);
        dz += params.slip_noise_sigma * rng.sample::<f64, _>(StandardNormal);
        dtheta += params.slip_noise_sigma * rng.sample::<f64, _>(StandardNormal);
    }
    apply_in_plane_delta(a_to, dy, dz, dtheta)
}

/// Noisy in-hand observation: Gaussian perturbation of the (y, z, yaw)
/// coordinates with standard deviation `obs_sigma`.
pub fn observe_in_hand(a_to: &Pose<f64>, obs_sigma: f64, rng: &mut impl Rng) -> Pose<f64> {
    if obs_sigma == 0.0 {
        return a_to.clone();
    }
    let dy = obs_sigma * rng.sample::<f64, _>(StandardNormal);
    let dz = obs_sigma * rng.sample::<f64, _>(StandardNormal);
    let dtheta = obs_sigma * rng.sample::<f64, _>(StandardNormal);
    apply_in_plane_delta(a_to, dy, dz, dtheta)
}
