//! Interactive experiment protocol: demonstrations are introduced in stages
//! (a fresh random order per replication); at each stage the surrogate
//! policy is rebuilt and the manifold refit on the current subset, then both
//! arms run their trials. The projection arm selects its dimensionality with
//! the bandit before each trial window and updates it afterwards. Bandit
//! values initialize from the first stage's losses only and persist across
//! stages.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bandit::{reward, BanditState};
use crate::io::{Arm, DemonstrationDataset, ExperimentConfig, ResultsTable, TrialRow};
use crate::manifold::fit_task_manifold;

use super::demo::generate_demonstrations;
use super::policy::surrogate_policy;
use super::rollout::{rollout, RolloutParams};
use super::seeds::{derive_seed, stream, Role};
use super::task::{make_task, TaskSpec};
use super::SimError;

/// Runs the full experiment sequentially.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultsTable, SimError> {
    run_experiment_with_jobs(config, 1)
}

/// Runs the full experiment with up to `jobs` replications in parallel.
/// Output is canonicalized, so the row order (and any CSV written from it)
/// is independent of the job count.
pub fn run_experiment_with_jobs(
    config: &ExperimentConfig,
    jobs: usize,
) -> Result<ResultsTable, SimError> {
    config.validate()?;
    let task = make_task(&config.task, &config.overrides)?;

    let total_demos = *config.demo_stages.last().expect("validated non-empty");
    let mut demo_rng = stream(config.master_seed, 0, 0, 0, Role::Demos);
    let pool = generate_demonstrations(&task, total_demos, config.demo_noise_sigma, &mut demo_rng)?;

    let replications: Vec<u64> = (0..config.replications as u64).collect();
    let mut rows = Vec::new();
    if jobs <= 1 || config.replications == 1 {
        for &r in &replications {
            rows.extend(run_replication(config, &task, &pool, r)?);
        }
    } else {
        let chunk_size = replications.len().div_ceil(jobs);
        let task = &task;
        let pool = &pool;
        let results: Vec<Result<Vec<TrialRow>, SimError>> = std::thread::scope(|scope| {
            let handles: Vec<_> = replications
                .chunks(chunk_size)
                .map(|chunk| {
                    scope.spawn(move || {
                        let mut chunk_rows = Vec::new();
                        for &r in chunk {
                            chunk_rows.extend(run_replication(config, task, pool, r)?);
                        }
                        Ok(chunk_rows)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("replication thread panicked"))
                .collect()
        });
        for result in results {
            rows.extend(result?);
        }
    }
    Ok(ResultsTable::new(rows))
}

fn run_replication(
    config: &ExperimentConfig,
    task: &TaskSpec,
    pool: &DemonstrationDataset<f64>,
    replication: u64,
) -> Result<Vec<TrialRow>, SimError> {
    let mut order: Vec<usize> = (0..pool.episodes.len()).collect();
    let mut shuffle_rng = stream(config.master_seed, replication, 0, 0, Role::Shuffle);
    order.shuffle(&mut shuffle_rng);

    let params = RolloutParams {
        execute_per_prediction: super::rollout::DEFAULT_EXECUTE_PER_PREDICTION,
        obs_noise_sigma: config.obs_noise_sigma,
    };

    let mut rows = Vec::new();
    let mut bandit: Option<BanditState<f64>> = None;

    for (stage_idx, &demos) in config.demo_stages.iter().enumerate() {
        let subset = pool.subset(&order[..demos.min(order.len())]);
        let policy = surrogate_policy(&subset, config.knn, config.action_noise_sigma)?;
        let (manifold, losses) = fit_task_manifold(&subset)?;

        if bandit.is_none() {
            // Prior values come from the first stage's losses only.
            bandit = Some(
                BanditState::new(
                    &losses,
                    config.gamma,
                    config.epsilon,
                    config.trials_per_update,
                )
                .map_err(|e| SimError::InvalidTask(e.to_string()))?,
            );
        }
        let bandit = bandit.as_mut().expect("initialized above");
        let stage = stage_idx as u64;

        // Baseline arm.
        for trial in 0..config.trials_per_stage {
            let seed = derive_seed(
                config.master_seed,
                replication,
                stage,
                trial as u64,
                Role::BaselineRollout,
            );
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let success = run_trial(task, &policy, None, &params, &mut rng);
            rows.push(TrialRow {
                replication: replication as usize,
                stage_demos: demos,
                trial,
                arm: Arm::Baseline,
                projection_dim: None,
                success,
                q: *bandit.q_values(),
                seed,
            });
        }

        // Projection arm: one bandit window per `trials_per_update` trials.
        let mut current_arm = 0usize;
        let mut window_successes = 0u64;
        let mut window_failures = 0u64;
        for trial in 0..config.trials_per_stage {
            if trial % config.trials_per_update == 0 {
                let mut select_rng = stream(
                    config.master_seed,
                    replication,
                    stage,
                    trial as u64,
                    Role::BanditSelect,
                );
                current_arm = bandit.select(&mut select_rng);
                window_successes = 0;
                window_failures = 0;
            }

            let seed = derive_seed(
                config.master_seed,
                replication,
                stage,
                trial as u64,
                Role::GrompRollout,
            );
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let projected = manifold.with_dim(current_arm).map_err(SimError::Manifold)?;
            let success = run_trial(task, &policy, Some(&projected), &params, &mut rng);

            bandit
                .record_outcome(current_arm, success)
                .map_err(|e| SimError::InvalidTask(e.to_string()))?;
            if success {
                window_successes += 1;
            } else {
                window_failures += 1;
            }

            let window_complete =
                (trial + 1) % config.trials_per_update == 0 || trial + 1 == config.trials_per_stage;
            if window_complete {
                let r = reward(window_successes, window_failures)
                    .map_err(|e| SimError::InvalidTask(e.to_string()))?;
                bandit
                    .update(current_arm, r)
                    .map_err(|e| SimError::InvalidTask(e.to_string()))?;
            }

            rows.push(TrialRow {
                replication: replication as usize,
                stage_demos: demos,
                trial,
                arm: Arm::Gromp,
                projection_dim: Some(current_arm),
                success,
                q: *bandit.q_values(),
                seed,
            });
        }
    }
    Ok(rows)
}

/// A trial that fails inside a component (e.g. a pose leaving the log
/// domain) counts as an unsuccessful attempt rather than aborting the
/// experiment.
fn run_trial(
    task: &TaskSpec,
    policy: &super::policy::SurrogatePolicy,
    manifold: Option<&crate::manifold::TaskManifold<f64>>,
    params: &RolloutParams,
    rng: &mut impl Rng,
) -> bool {
    match rollout(task, policy, manifold, params, rng) {
        Ok(record) => record.success,
        Err(e) => {
            log::warn!("trial failed with component error: {e}");
            false
        }
    }
}
