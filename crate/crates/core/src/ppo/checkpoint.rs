//! Policy checkpoint serialization: a self-describing JSON weight dump.

use super::mlp::Mlp;
use super::{PpoConfig, PpoError};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const CHECKPOINT_SCHEMA_VERSION: u32 = 1;

/// Everything needed to reload and validate a trained policy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema_version: u32,
    /// Observation layout the networks were trained against.
    pub obs_len: usize,
    pub n_actions: usize,
    pub policy: Mlp,
    pub value: Mlp,
    pub config: PpoConfig,
    /// Time-penalty weight the policy was trained under.
    pub beta: f64,
}

impl Checkpoint {
    pub fn new(policy: Mlp, value: Mlp, config: PpoConfig, beta: f64) -> Checkpoint {
        Checkpoint {
            schema_version: CHECKPOINT_SCHEMA_VERSION,
            obs_len: policy.input_len(),
            n_actions: policy.output_len(),
            policy,
            value,
            config,
            beta,
        }
    }

    /// Check the checkpoint against the deployment environment's shape.
    pub fn validate_for(&self, obs_len: usize, n_actions: usize) -> Result<(), PpoError> {
        if self.schema_version != CHECKPOINT_SCHEMA_VERSION {
            return Err(PpoError::VersionMismatch(format!(
                "schema version {} (expected {})",
                self.schema_version, CHECKPOINT_SCHEMA_VERSION
            )));
        }
        if self.obs_len != obs_len || self.n_actions != n_actions {
            return Err(PpoError::VersionMismatch(format!(
                "checkpoint shaped for obs {} / actions {}, environment has obs {} / actions {}",
                self.obs_len, self.n_actions, obs_len, n_actions
            )));
        }
        Ok(())
    }

    fn shape_check(&self) -> Result<(), PpoError> {
        let consistent = |m: &Mlp| -> bool {
            m.sizes.len() >= 2
                && m.weights.len() == m.sizes.len() - 1
                && m.biases.len() == m.sizes.len() - 1
                && m.weights
                    .iter()
                    .zip(m.sizes.windows(2))
                    .all(|(w, s)| w.len() == s[0] * s[1])
                && m.biases.iter().zip(&m.sizes[1..]).all(|(b, &s)| b.len() == s)
                && m.weights.iter().flatten().chain(m.biases.iter().flatten()).all(|v| v.is_finite())
        };
        if !consistent(&self.policy) || !consistent(&self.value) {
            return Err(PpoError::CorruptFile("inconsistent network shapes".into()));
        }
        if self.policy.input_len() != self.obs_len || self.policy.output_len() != self.n_actions {
            return Err(PpoError::CorruptFile("header does not match policy shape".into()));
        }
        Ok(())
    }
}

/// Write a checkpoint as pretty JSON.
pub fn save_policy(checkpoint: &Checkpoint, path: &Path) -> Result<(), PpoError> {
    let text = serde_json::to_string_pretty(checkpoint)
        .map_err(|e| PpoError::CorruptFile(e.to_string()))?;
    std::fs::write(path, text + "\n")
        .map_err(|e| PpoError::CorruptFile(format!("writing {}: {e}", path.display())))
}

/// Load and shape-check a checkpoint.
pub fn load_policy(path: &Path) -> Result<Checkpoint, PpoError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PpoError::CorruptFile(format!("reading {}: {e}", path.display())))?;
    let checkpoint: Checkpoint = serde_json::from_str(&text).map_err(|e| {
        if text.contains("schema_version") {
            PpoError::CorruptFile(format!("{}: {e}", path.display()))
        } else {
            PpoError::CorruptFile(format!("{}: not a checkpoint file ({e})", path.display()))
        }
    })?;
    checkpoint.shape_check()?;
    Ok(checkpoint)
}
