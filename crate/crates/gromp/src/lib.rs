//! Grasped-object manifold projection.
//!
//! A robot holding a part in a non-rigid grasp accumulates small policy and
//! in-grasp errors over a rollout. This crate learns a low-dimensional SE(3)
//! task manifold from expert pose trajectories (principal geodesic analysis
//! in the tangent space at the geodesic mean), projects predicted object
//! poses onto that manifold at rollout time, and adapts the retained
//! dimensionality online with a seven-arm bandit. A synthetic assembly
//! simulator with in-grasp slip provides the benchmark harness.
//!
//! Core math is generic over the scalar type (`f32`/`f64`) through
//! [`scalar::Real`]; the aliases at the crate root fix `f64`, which the
//! simulator, file formats, and CLI use throughout.

pub mod bandit;
pub mod io;
pub mod liegroup;
pub mod manifold;
pub mod projector;
pub mod report;
pub mod scalar;
pub mod sim;

pub use scalar::Real;

/// SE(3) pose at the default `f64` scalar.
pub type Pose = liegroup::Pose<f64>;
/// se(3) twist at the default `f64` scalar.
pub type Twist = liegroup::Twist<f64>;
/// Learned task-manifold descriptor at the default `f64` scalar.
pub type TaskManifold = manifold::TaskManifold<f64>;
/// Normalization scales at the default `f64` scalar.
pub type NormalizationScales = manifold::NormalizationScales<f64>;
/// Normalized twist matrix at the default `f64` scalar.
pub type TwistMatrix = manifold::TwistMatrix<f64>;
/// Predicted robot-pose chunk at the default `f64` scalar.
pub type ActionTrajectory = projector::ActionTrajectory<f64>;
/// Bandit state at the default `f64` scalar.
pub type BanditState = bandit::BanditState<f64>;
/// Demonstration dataset at the default `f64` scalar.
pub type DemonstrationDataset = io::DemonstrationDataset<f64>;
