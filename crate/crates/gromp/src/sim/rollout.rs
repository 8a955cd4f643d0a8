//! Receding-horizon trial execution: observe the (noisy) in-hand transform,
//! predict an 8-pose chunk, optionally project it onto the task manifold,
//! execute the first `execute_per_prediction` poses under slip, and repeat
//! until the object reaches the goal tolerances or the prediction budget is
//! exhausted.

use rand::Rng;

use crate::liegroup::Pose;
use crate::manifold::TaskManifold;
use crate::projector::project_action_trajectory_lenient;

use super::demo::{sample_grasp_offset, sample_start_coords};
use super::policy::Policy;
use super::slip::{observe_in_hand, step_slip};
use super::task::TaskSpec;
use super::SimError;

/// Actions executed from each predicted chunk before re-observing.
pub const DEFAULT_EXECUTE_PER_PREDICTION: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GoalReached,
    HorizonExhausted,
}

/// One executed action step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub commanded_a_st: Pose<f64>,
    pub realized_a_st: Pose<f64>,
    pub a_to: Pose<f64>,
    pub a_so: Pose<f64>,
    /// Whether the manifold projection was applied to this step's command
    /// (false for baseline steps and for fail-open fallback steps).
    pub projection_applied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutRecord {
    pub steps: Vec<StepRecord>,
    pub projection_index: Option<usize>,
    pub success: bool,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutParams {
    pub execute_per_prediction: usize,
    pub obs_noise_sigma: f64,
}

impl Default for RolloutParams {
    fn default() -> Self {
        Self {
            execute_per_prediction: DEFAULT_EXECUTE_PER_PREDICTION,
            obs_noise_sigma: 0.0,
        }
    }
}

/// Runs one trial. The low-level controller is ideal, so realized robot
/// poses equal the commanded ones; all stochasticity comes from the policy,
/// the slip model, and the in-hand observer.
pub fn rollout(
    task: &TaskSpec,
    policy: &dyn Policy,
    manifold: Option<&TaskManifold<f64>>,
    params: &RolloutParams,
    rng: &mut impl Rng,
) -> Result<RolloutRecord, SimError> {
    if params.execute_per_prediction == 0 {
        return Err(SimError::InvalidTask(
            "execute_per_prediction must be at least 1".into(),
        ));
    }
    let projection_index = match manifold {
        Some(m) => Some(m.dim().ok_or(crate::projector::ProjectorError::DimUnset)?),
        None => None,
    };

    let start = sample_start_coords(task, rng);
    let mut a_to = sample_grasp_offset(task, rng);
    let mut a_so = task.pose_at(&start);
    let mut a_st = a_so.compose(&a_to.inverse());

    let mut steps = Vec::new();
    let mut success = task.is_success(&a_so);

    'predictions: for _ in 0..task.horizon {
        if success {
            break;
        }
        let observed_a_to = observe_in_hand(&a_to, params.obs_noise_sigma, rng);
        let predicted = policy.predict(&a_st, &observed_a_to, rng)?;
        let (actions, fallback_steps) = match manifold {
            Some(m) => project_action_trajectory_lenient(&predicted, &observed_a_to, m)?,
            None => (predicted, Vec::new()),
        };

        for (j, commanded) in actions
            .robot_poses
            .iter()
            .take(params.execute_per_prediction)
            .enumerate()
        {
            let motion = a_st.inverse().compose(commanded).log()?;
            let depth = task.contact_depth(a_so.translation());
            a_to = step_slip(&a_to, &motion, depth, &task.slip, rng);
            a_st = commanded.clone();
            a_so = a_st.compose(&a_to);
            steps.push(StepRecord {
                commanded_a_st: commanded.clone(),
                realized_a_st: commanded.clone(),
                a_to: a_to.clone(),
                a_so: a_so.clone(),
                projection_applied: manifold.is_some() && !fallback_steps.contains(&j),
            });
            if task.is_success(&a_so) {
                success = true;
                break 'predictions;
            }
        }
    }

    Ok(RolloutRecord {
        steps,
        projection_index,
        success,
        termination: if success {
            Termination::GoalReached
        } else {
            Termination::HorizonExhausted
        },
    })
}
