//! Rigid-body transformations: SE(3) group operations, so(3)/se(3) hat and
//! vee maps, closed-form exponential and logarithm maps, and the geodesic
//! (Karcher) mean used as the base point for tangent-space statistics.
//!
//! Rotations are stored as orthonormal 3x3 matrices. Construction through
//! [`Pose::new`] re-projects the rotation onto SO(3) (polar decomposition via
//! SVD) whenever the orthonormality residual exceeds [`ORTHONORMALITY_TOL`],
//! so long composition chains cannot drift out of the group.
//!
//! The logarithm is defined on rotations with angle below `pi - 1e-6`;
//! closer to `pi` the map is ill-conditioned and [`LieError::AngleNearPi`]
//! is returned so the caller can reject or perturb the pose.

use nalgebra::{Matrix3, Vector3, Vector6};
use thiserror::Error;

use crate::scalar::{real, Real};

/// Frobenius-norm residual of `R^T R - I` above which a rotation is
/// re-projected onto SO(3).
pub const ORTHONORMALITY_TOL: f64 = 1e-9;

/// Rotation angles within this distance of `pi` are rejected by the log map.
pub const ANGLE_NEAR_PI_TOL: f64 = 1e-6;

/// Below this rotation-vector norm the Rodrigues coefficients switch to
/// their second-order Taylor expansions.
const SMALL_ANGLE: f64 = 1e-8;

/// Convergence tolerance on the mean tangent twist of the Karcher iteration.
const MEAN_TOL: f64 = 1e-10;

/// Iteration cap for the Karcher mean.
const MEAN_MAX_ITERS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LieError {
    /// Rotation angle within `1e-6` of `pi`; the logarithm is ill-conditioned
    /// there and the caller must reject or perturb the pose.
    #[error("rotation angle within {ANGLE_NEAR_PI_TOL:e} of pi; logarithm ill-conditioned")]
    AngleNearPi,
    #[error("empty pose list")]
    EmptyInput,
    #[error("geodesic mean did not converge after {0} iterations")]
    NoConvergence(usize),
}

/// Element of SE(3): an orthonormal rotation plus a translation in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose<T: Real> {
    rotation: Matrix3<T>,
    translation: Vector3<T>,
}

/// Element of se(3): rotational part `omega` (radians, axis-angle) and
/// translational part `v` (meters). Stacked as `[omega; v]` in 6-vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Twist<T: Real> {
    pub omega: Vector3<T>,
    pub v: Vector3<T>,
}

/// Skew-symmetric matrix of a 3-vector, so that `hat(w) * x = w.cross(x)`.
pub fn hat<T: Real>(omega: &Vector3<T>) -> Matrix3<T> {
    let zero = T::zero();
    Matrix3::new(
        zero, -omega.z, omega.y, //
        omega.z, zero, -omega.x, //
        -omega.y, omega.x, zero,
    )
}

/// Inverse of [`hat`]: extracts the 3-vector of a skew-symmetric matrix.
pub fn vee<T: Real>(m: &Matrix3<T>) -> Vector3<T> {
    Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

impl<T: Real> Twist<T> {
    pub fn new(omega: Vector3<T>, v: Vector3<T>) -> Self {
        Self { omega, v }
    }

    pub fn zero() -> Self {
        Self {
            omega: Vector3::zeros(),
            v: Vector3::zeros(),
        }
    }

    /// Stacks the twist as `[omega; v]`.
    pub fn to_vector(&self) -> Vector6<T> {
        Vector6::new(
            self.omega.x,
            self.omega.y,
            self.omega.z,
            self.v.x,
            self.v.y,
            self.v.z,
        )
    }

    /// Splits a `[omega; v]` 6-vector back into a twist.
    pub fn from_vector(xi: &Vector6<T>) -> Self {
        Self {
            omega: Vector3::new(xi[0], xi[1], xi[2]),
            v: Vector3::new(xi[3], xi[4], xi[5]),
        }
    }

    /// Euclidean norm of the stacked 6-vector.
    pub fn norm(&self) -> T {
        (self.omega.norm_squared() + self.v.norm_squared()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.omega
            .iter()
            .chain(self.v.iter())
            .all(|x| x.is_finite())
    }

    /// Exponential map se(3) -> SE(3): Rodrigues' rotation and the SE(3)
    /// V-matrix in closed form, with series expansions below 1e-8 rad.
    pub fn exp(&self) -> Pose<T> {
        let theta2 = self.omega.norm_squared();
        let theta = theta2.sqrt();
        let k = hat(&self.omega);
        let k2 = k * k;

        // a = sin(t)/t, b = (1-cos(t))/t^2, c = (t-sin(t))/t^3
        let (a, b, c) = if theta < real(SMALL_ANGLE) {
            (
                T::one() - theta2 / real(6.0),
                real::<T>(0.5) - theta2 / real(24.0),
                real::<T>(1.0 / 6.0) - theta2 / real(120.0),
            )
        } else {
            let (sin_t, cos_t) = (theta.sin(), theta.cos());
            (
                sin_t / theta,
                (T::one() - cos_t) / theta2,
                (theta - sin_t) / (theta2 * theta),
            )
        };

        let rotation = Matrix3::identity() + k * a + k2 * b;
        let v_matrix = Matrix3::identity() + k * b + k2 * c;
        Pose::new(rotation, v_matrix * self.v)
    }
}

impl<T: Real> Pose<T> {
    /// Builds a pose, re-projecting the rotation onto SO(3) if its
    /// orthonormality residual exceeds [`ORTHONORMALITY_TOL`].
    pub fn new(rotation: Matrix3<T>, translation: Vector3<T>) -> Self {
        let residual = (rotation.transpose() * rotation - Matrix3::identity()).norm();
        let rotation = if residual > real(ORTHONORMALITY_TOL) {
            nearest_rotation(&rotation)
        } else {
            rotation
        };
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn from_translation(translation: Vector3<T>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    pub fn rotation(&self) -> &Matrix3<T> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<T> {
        &self.translation
    }

    /// Frobenius norm of `R^T R - I`.
    pub fn orthonormality_residual(&self) -> T {
        (self.rotation.transpose() * self.rotation - Matrix3::identity()).norm()
    }

    /// Rotation angle in `[0, pi]`.
    pub fn rotation_angle(&self) -> T {
        let w = vee(&(self.rotation - self.rotation.transpose())) * real::<T>(0.5);
        let cos_t = (self.rotation.trace() - T::one()) * real::<T>(0.5);
        w.norm().atan2(cos_t)
    }

    /// Group composition `self * other`.
    pub fn compose(&self, other: &Pose<T>) -> Pose<T> {
        Pose::new(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    /// Group inverse.
    pub fn inverse(&self) -> Pose<T> {
        let rot_inv = self.rotation.transpose();
        Pose::new(rot_inv, -(rot_inv * self.translation))
    }

    /// Logarithm map SE(3) -> se(3).
    ///
    /// Fails with [`LieError::AngleNearPi`] when the rotation angle is within
    /// [`ANGLE_NEAR_PI_TOL`] of `pi`. For angles above 3 rad the rotation axis
    /// is recovered from the symmetric part of `R`, which stays accurate as
    /// the antisymmetric part degenerates.
    pub fn log(&self) -> Result<Twist<T>, LieError> {
        let r = &self.rotation;
        let half = real::<T>(0.5);

        // w = sin(theta) * axis
        let w = vee(&(r - r.transpose())) * half;
        let cos_t = ((r.trace() - T::one()) * half).clamp(-T::one(), T::one());
        let sin_t = w.norm();
        let theta = sin_t.atan2(cos_t);

        if theta > T::pi() - real(ANGLE_NEAR_PI_TOL) {
            return Err(LieError::AngleNearPi);
        }

        let theta2 = theta * theta;
        let omega = if theta < real(SMALL_ANGLE) {
            // theta/sin(theta) = 1 + theta^2/6 + O(theta^4)
            w * (T::one() + theta2 / real(6.0))
        } else if theta < real(3.0) {
            w * (theta / sin_t)
        } else {
            // Near pi: axis from the symmetric part a a^T = (B - cos I)/(1 - cos).
            let b = (r + r.transpose()) * half;
            let one_minus_cos = T::one() - cos_t;
            let diag = Vector3::new(
                (b[(0, 0)] - cos_t) / one_minus_cos,
                (b[(1, 1)] - cos_t) / one_minus_cos,
                (b[(2, 2)] - cos_t) / one_minus_cos,
            );
            let i = diag.imax();
            let scale = diag[i].max(T::zero()).sqrt();
            let mut axis = Vector3::new(
                (b[(i, 0)] - if i == 0 { cos_t } else { T::zero() }) / (one_minus_cos * scale),
                (b[(i, 1)] - if i == 1 { cos_t } else { T::zero() }) / (one_minus_cos * scale),
                (b[(i, 2)] - if i == 2 { cos_t } else { T::zero() }) / (one_minus_cos * scale),
            );
            axis /= axis.norm();
            if axis.dot(&w) < T::zero() {
                axis = -axis;
            }
            axis * theta
        };

        // v = V^{-1} t with V^{-1} = I - K/2 + c2 K^2.
        let k = hat(&omega);
        let k2 = k * k;
        let c2 = if theta < real(SMALL_ANGLE) {
            real::<T>(1.0 / 12.0) + theta2 / real(720.0)
        } else {
            let a = theta.sin() / theta;
            let b = (T::one() - theta.cos()) / theta2;
            (T::one() - a / (b + b)) / theta2
        };
        let v_inv = Matrix3::identity() - k * half + k2 * c2;
        Ok(Twist::new(omega, v_inv * self.translation))
    }
}

/// Nearest rotation matrix (polar factor) with determinant +1.
fn nearest_rotation<T: Real>(m: &Matrix3<T>) -> Matrix3<T> {
    let svd = m.svd(true, true);
    let u = svd.u.expect("svd computed with u");
    let v_t = svd.v_t.expect("svd computed with v_t");
    let mut r = u * v_t;
    if r.determinant() < T::zero() {
        // Flip the weakest singular direction to land on det = +1.
        let mut u_fixed = u;
        u_fixed.column_mut(2).neg_mut();
        r = u_fixed * v_t;
    }
    r
}

/// Geodesic (Karcher) mean of a set of poses.
///
/// Iterates `mu <- mu * exp(mean_i log(mu^{-1} A_i))` from the first pose
/// until the mean tangent twist drops below `1e-10`, capped at 100 rounds.
pub fn geodesic_mean<T: Real>(poses: &[Pose<T>]) -> Result<Pose<T>, LieError> {
    if poses.is_empty() {
        return Err(LieError::EmptyInput);
    }
    let n = real::<T>(poses.len() as f64);
    let mut mean = poses[0].clone();
    for _ in 0..MEAN_MAX_ITERS {
        let mean_inv = mean.inverse();
        let mut sum = Vector6::<T>::zeros();
        for pose in poses {
            sum += mean_inv.compose(pose).log()?.to_vector();
        }
        let step = sum / n;
        if step.norm() < real(MEAN_TOL) {
            return Ok(mean);
        }
        mean = mean.compose(&Twist::from_vector(&step).exp());
    }
    Err(LieError::NoConvergence(MEAN_MAX_ITERS))
}
