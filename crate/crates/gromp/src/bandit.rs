//! Nonstationary seven-arm bandit over projection dimensionalities
//! `i in 0..=6`. Values start from the projection-loss prior
//! `Q_0(i) = 1 - L_i`, rewards are success ratios of trial windows, updates
//! follow `Q <- Q + gamma (R - Q)` with a constant step size, and selection
//! is epsilon-greedy with lowest-index tie-breaking.

use rand::Rng;
use thiserror::Error;

use crate::scalar::{real, Real};

/// Number of arms: one per projection dimensionality.
pub const NUM_ARMS: usize = 7;

/// Constant value-update step size.
pub const DEFAULT_GAMMA: f64 = 0.025;

/// Exploration rate of the epsilon-greedy selection.
pub const DEFAULT_EPSILON: f64 = 0.1;

/// Trials pooled into one reward before each value update.
pub const DEFAULT_TRIALS_PER_UPDATE: usize = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BanditError {
    #[error("arm {0} outside 0..=6")]
    ArmOutOfRange(usize),
    #[error("reward undefined without trials")]
    NoTrials,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

/// Bandit state: per-arm values, cumulative success/failure counters, and
/// the update/selection parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditState<T: Real> {
    q: [T; NUM_ARMS],
    alpha: [u64; NUM_ARMS],
    beta: [u64; NUM_ARMS],
    gamma: T,
    epsilon: T,
    trials_per_update: usize,
}

/// Success ratio of a trial window: `R = alpha / (alpha + beta)`.
pub fn reward<T: Real>(successes: u64, failures: u64) -> Result<T, BanditError> {
    let total = successes + failures;
    if total == 0 {
        return Err(BanditError::NoTrials);
    }
    Ok(real::<T>(successes as f64) / real(total as f64))
}

impl<T: Real> BanditState<T> {
    /// Initializes values from the seven projection losses, `Q_0(i) = 1 - L_i`,
    /// with explicit parameters.
    pub fn new(
        losses: &[T; NUM_ARMS],
        gamma: T,
        epsilon: T,
        trials_per_update: usize,
    ) -> Result<Self, BanditError> {
        if !losses.iter().all(|l| l.is_finite()) {
            return Err(BanditError::InvalidParameter("losses must be finite"));
        }
        if !(gamma > T::zero() && gamma <= T::one()) {
            return Err(BanditError::InvalidParameter("gamma outside (0, 1]"));
        }
        if !(epsilon >= T::zero() && epsilon <= T::one()) {
            return Err(BanditError::InvalidParameter("epsilon outside [0, 1]"));
        }
        if trials_per_update == 0 {
            return Err(BanditError::InvalidParameter("trials_per_update is zero"));
        }
        let mut q = [T::zero(); NUM_ARMS];
        for (qi, li) in q.iter_mut().zip(losses) {
            *qi = T::one() - *li;
        }
        Ok(Self {
            q,
            alpha: [0; NUM_ARMS],
            beta: [0; NUM_ARMS],
            gamma,
            epsilon,
            trials_per_update,
        })
    }

    /// [`Self::new`] with the default gamma/epsilon/window parameters.
    pub fn from_losses(losses: &[T; NUM_ARMS]) -> Result<Self, BanditError> {
        Self::new(
            losses,
            real(DEFAULT_GAMMA),
            real(DEFAULT_EPSILON),
            DEFAULT_TRIALS_PER_UPDATE,
        )
    }

    pub fn q_values(&self) -> &[T; NUM_ARMS] {
        &self.q
    }

    pub fn successes(&self) -> &[u64; NUM_ARMS] {
        &self.alpha
    }

    pub fn failures(&self) -> &[u64; NUM_ARMS] {
        &self.beta
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    pub fn trials_per_update(&self) -> usize {
        self.trials_per_update
    }

    /// Arm with the highest value; ties resolve to the lowest index (the
    /// more constrained projection).
    pub fn greedy_arm(&self) -> usize {
        let mut best = 0;
        for arm in 1..NUM_ARMS {
            if self.q[arm] > self.q[best] {
                best = arm;
            }
        }
        best
    }

    /// Epsilon-greedy selection: with probability `epsilon` a uniform draw
    /// over all seven arms (the greedy arm included), otherwise the argmax.
    pub fn select(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.random();
        if u < self.epsilon.to_f64().unwrap_or(0.0) {
            rng.random_range(0..NUM_ARMS)
        } else {
            self.greedy_arm()
        }
    }

    /// Records one trial outcome in the cumulative counters.
    pub fn record_outcome(&mut self, arm: usize, success: bool) -> Result<(), BanditError> {
        if arm >= NUM_ARMS {
            return Err(BanditError::ArmOutOfRange(arm));
        }
        if success {
            self.alpha[arm] += 1;
        } else {
            self.beta[arm] += 1;
        }
        Ok(())
    }

    /// Constant-step value update of the selected arm:
    /// `Q(arm) <- Q(arm) + gamma (r - Q(arm))`. All other arms are untouched.
    pub fn update(&mut self, arm: usize, r: T) -> Result<(), BanditError> {
        if arm >= NUM_ARMS {
            return Err(BanditError::ArmOutOfRange(arm));
        }
        self.q[arm] += self.gamma * (r - self.q[arm]);
        Ok(())
    }
}
