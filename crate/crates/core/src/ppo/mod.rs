//! From-scratch proximal policy optimization.
//!
//! Separate policy and value MLPs, parallel rollout workers over seeded
//! environments, generalized advantage estimation, and a clipped-surrogate
//! update with entropy bonus and a fixed-coefficient KL penalty against the
//! frozen pre-iteration policy.

mod checkpoint;
mod gae;
mod mlp;
mod train;
mod update;

pub use checkpoint::{load_policy, save_policy, Checkpoint};
pub use gae::compute_gae;
pub use mlp::{entropy, softmax, ForwardCache, Mlp, MlpGrads, Optimizer, OptimizerKind};
pub use train::{train, EpisodeLog, RolloutEnv, TrainOutput};
pub use update::{
    policy_grad_for_check, policy_loss_for_check, ppo_update, value_loss_for_check, Batch,
    TrainStats,
};

use crate::env::{EnvError, Observation};
use crate::policy::{DecisionContext, Policy};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PpoError {
    #[error("observation length {got} does not match network input {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("non-finite gradient during {0}")]
    NonFiniteGradient(String),
    #[error("checkpoint mismatch: {0}")]
    VersionMismatch(String),
    #[error("corrupt checkpoint: {0}")]
    CorruptFile(String),
    #[error("invalid ppo config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PpoConfig {
    pub learning_rate: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip: f64,
    pub entropy_coef: f64,
    pub kl_coef: f64,
    /// Steps collected per iteration across all workers.
    pub train_batch: usize,
    pub minibatch_size: usize,
    /// Passes over the batch per iteration.
    pub epochs: usize,
    pub workers: usize,
    pub iterations: usize,
    pub hidden: Vec<usize>,
    pub optimizer: OptimizerKind,
    pub seed: u64,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            learning_rate: 1e-4,
            gamma: 0.9,
            gae_lambda: 0.95,
            clip: 0.3,
            entropy_coef: 0.01,
            kl_coef: 1.0,
            train_batch: 180,
            minibatch_size: 60,
            epochs: 10,
            workers: 4,
            iterations: 266,
            hidden: vec![64, 64],
            optimizer: OptimizerKind::Adam,
            seed: 0,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<(), PpoError> {
        let bad = |msg: String| Err(PpoError::InvalidConfig(msg));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma must be in (0,1], got {}", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad(format!("gae_lambda must be in [0,1], got {}", self.gae_lambda));
        }
        if !(self.clip > 0.0) {
            return bad(format!("clip must be positive, got {}", self.clip));
        }
        if self.learning_rate < 0.0 {
            return bad(format!("learning_rate must be non-negative, got {}", self.learning_rate));
        }
        if self.train_batch == 0 || self.minibatch_size == 0 {
            return bad("train_batch and minibatch_size must be positive".into());
        }
        if self.train_batch % self.minibatch_size != 0 {
            return bad(format!(
                "train_batch {} must be divisible by minibatch_size {}",
                self.train_batch, self.minibatch_size
            ));
        }
        if self.workers == 0 || self.train_batch % self.workers != 0 {
            return bad(format!(
                "train_batch {} must be divisible by workers {}",
                self.train_batch, self.workers
            ));
        }
        if self.epochs == 0 || self.iterations == 0 {
            return bad("epochs and iterations must be positive".into());
        }
        if self.hidden.is_empty() || self.hidden.iter().any(|&h| h == 0) {
            return bad("hidden sizes must be non-empty and positive".into());
        }
        Ok(())
    }

    pub fn policy_sizes(&self, obs_len: usize, n_actions: usize) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.hidden.len() + 2);
        sizes.push(obs_len);
        sizes.extend_from_slice(&self.hidden);
        sizes.push(n_actions);
        sizes
    }

    pub fn value_sizes(&self, obs_len: usize) -> Vec<usize> {
        let mut sizes = Vec::with_capacity(self.hidden.len() + 2);
        sizes.push(obs_len);
        sizes.extend_from_slice(&self.hidden);
        sizes.push(1);
        sizes
    }
}

/// One recorded step of experience.
#[derive(Debug, Clone)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    /// Behavior log-probability of the taken action, frozen at collection.
    pub log_prob: f64,
    /// Full behavior distribution, frozen for the KL penalty.
    pub old_probs: Vec<f64>,
    pub value: f64,
    pub done: bool,
}

/// A worker's rollout segment plus the bootstrap value of its final state
/// (zero when terminal).
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub steps: Vec<Transition>,
    pub bootstrap_value: f64,
}

/// Action distribution for an observation: softmax over the policy logits.
pub fn policy_forward(params: &Mlp, obs: &Observation) -> Result<Vec<f64>, PpoError> {
    if obs.len() != params.input_len() {
        return Err(PpoError::ShapeMismatch { expected: params.input_len(), got: obs.len() });
    }
    Ok(softmax(&params.forward(&obs.values)))
}

/// A trained policy network acting greedily (argmax, ties to the lowest
/// index). Evaluation runs use this wrapper.
pub struct QforPolicy {
    pub params: Mlp,
}

impl QforPolicy {
    pub fn new(params: Mlp) -> Self {
        QforPolicy { params }
    }
}

impl Policy for QforPolicy {
    fn act(&mut self, obs: &Observation, _ctx: &DecisionContext) -> usize {
        let logits = self.params.forward(&obs.values);
        let mut best = 0;
        for (i, v) in logits.iter().enumerate().skip(1) {
            if *v > logits[best] {
                best = i;
            }
        }
        best
    }

    fn name(&self) -> &str {
        "qfor"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn config_defaults_validate() {
        assert!(PpoConfig::default().validate().is_ok());
    }

    #[test]
    fn config_rejects_bad_divisibility() {
        let cfg = PpoConfig { minibatch_size: 77, ..PpoConfig::default() };
        assert!(cfg.validate().is_err());
        let cfg = PpoConfig { workers: 7, ..PpoConfig::default() };
        assert!(cfg.validate().is_err());
        let cfg = PpoConfig { gamma: 0.0, ..PpoConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn policy_forward_checks_shape_and_normalizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mlp = Mlp::new(vec![6, 8, 3], &mut rng, false);
        let obs = Observation { values: vec![0.1; 6] };
        let probs = policy_forward(&mlp, &obs).unwrap();
        assert_eq!(probs.len(), 3);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let bad = Observation { values: vec![0.1; 5] };
        assert!(matches!(
            policy_forward(&mlp, &bad),
            Err(PpoError::ShapeMismatch { expected: 6, got: 5 })
        ));
    }
}
