//! Synthetic assembly benchmark: planted-manifold tasks, SE(2) in-grasp
//! slip, noisy in-hand observation, a nearest-neighbor surrogate policy with
//! injected tangent noise, receding-horizon rollouts, and the interactive
//! projection-vs-baseline experiment protocol.

mod demo;
mod experiment;
mod policy;
mod rollout;
mod seeds;
mod slip;
mod task;

pub use demo::generate_demonstrations;
pub use experiment::{run_experiment, run_experiment_with_jobs};
pub use policy::{surrogate_policy, Policy, SurrogatePolicy};
pub use rollout::{rollout, RolloutParams, RolloutRecord, StepRecord, Termination};
pub use seeds::{derive_seed, stream, Role};
pub use slip::{in_plane_coords, in_plane_pose, observe_in_hand, step_slip};
pub use task::{make_task, SlipParams, TaskOverrides, TaskSpec};

use thiserror::Error;

use crate::io::ConfigError;
use crate::liegroup::LieError;
use crate::manifold::ManifoldError;
use crate::projector::ProjectorError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("unknown task preset {0:?}")]
    UnknownPreset(String),
    #[error("empty demonstration dataset")]
    EmptyDataset,
    #[error("invalid task spec: {0}")]
    InvalidTask(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error(transparent)]
    Projector(#[from] ProjectorError),
}
