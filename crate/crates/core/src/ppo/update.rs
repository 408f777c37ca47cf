//! Clipped-surrogate policy update and value regression.

use super::mlp::{entropy, softmax, Mlp, MlpGrads, Optimizer};
use super::{PpoConfig, PpoError};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Flattened experience for one update call.
#[derive(Debug, Clone, Default)]
pub struct Batch {
    pub obs: Vec<Vec<f64>>,
    pub actions: Vec<usize>,
    pub old_log_probs: Vec<f64>,
    pub old_probs: Vec<Vec<f64>>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.obs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obs.is_empty()
    }
}

/// Aggregate optimization diagnostics for one update call.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TrainStats {
    /// Mean total policy loss (negated surrogate + entropy/KL terms).
    pub policy_loss: f64,
    /// Mean squared value regression error.
    pub value_loss: f64,
    /// Mean policy entropy.
    pub entropy: f64,
    /// Mean KL(old || new).
    pub kl: f64,
    /// Fraction of samples with the probability ratio outside the clip band.
    pub clip_fraction: f64,
}

/// Per-sample policy loss pieces and the gradient w.r.t. the logits.
///
/// The loss minimized is `-(L_CLIP + c_ent * H - c_kl * KL(old||new))`.
fn policy_sample_grad(
    probs: &[f64],
    action: usize,
    old_log_prob: f64,
    old_probs: &[f64],
    advantage: f64,
    cfg: &PpoConfig,
) -> (f64, f64, f64, bool, Vec<f64>) {
    let m = probs.len();
    let log_p_a = probs[action].max(1e-300).ln();
    let ratio = (log_p_a - old_log_prob).exp();
    let clipped_ratio = ratio.clamp(1.0 - cfg.clip, 1.0 + cfg.clip);
    let s1 = ratio * advantage;
    let s2 = clipped_ratio * advantage;
    let l_clip = s1.min(s2);
    let unclipped_active = s1 <= s2;
    let clipped = ratio < 1.0 - cfg.clip || ratio > 1.0 + cfg.clip;

    let h = entropy(probs);
    let mut kl = 0.0;
    for k in 0..m {
        if old_probs[k] > 0.0 {
            kl += old_probs[k] * (old_probs[k].ln() - probs[k].max(1e-300).ln());
        }
    }

    let loss = -(l_clip + cfg.entropy_coef * h - cfg.kl_coef * kl);

    let mut d_logits = vec![0.0; m];
    for k in 0..m {
        let indicator = if k == action { 1.0 } else { 0.0 };
        let mut g = 0.0;
        // d/dz of -min(s1, s2): gradient only flows through the unclipped branch.
        if unclipped_active {
            g -= advantage * ratio * (indicator - probs[k]);
        }
        // d/dz of -c_ent * H.
        g += cfg.entropy_coef * probs[k] * (probs[k].max(1e-300).ln() + h);
        // d/dz of c_kl * KL(old||new).
        g += cfg.kl_coef * (probs[k] - old_probs[k]);
        d_logits[k] = g;
    }
    (loss, h, kl, clipped, d_logits)
}

/// One PPO update over the batch: `epochs` passes of shuffled minibatches,
/// gradient descent on the policy loss and the value MSE. Advantages are
/// standardized over the whole batch first. Ratios and the KL penalty use
/// the frozen behavior statistics carried in the batch.
pub fn ppo_update(
    policy: &mut Mlp,
    value: &mut Mlp,
    policy_opt: &mut Optimizer,
    value_opt: &mut Optimizer,
    batch: &Batch,
    cfg: &PpoConfig,
    rng: &mut ChaCha8Rng,
) -> Result<TrainStats, PpoError> {
    let n = batch.len();
    if n == 0 {
        return Err(PpoError::InvalidConfig("empty batch".into()));
    }

    let mean = batch.advantages.iter().sum::<f64>() / n as f64;
    let var = batch.advantages.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n as f64;
    let std = var.sqrt();
    let advantages: Vec<f64> =
        batch.advantages.iter().map(|a| (a - mean) / (std + 1e-8)).collect();

    let minibatch = cfg.minibatch_size.min(n);
    let mut indices: Vec<usize> = (0..n).collect();
    let mut totals = TrainStats::default();
    let mut updates = 0usize;

    for _epoch in 0..cfg.epochs {
        // Fisher-Yates shuffle driven by the caller's seeded stream.
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            indices.swap(i, j);
        }
        for chunk in indices.chunks(minibatch) {
            let b = chunk.len() as f64;
            let mut p_grads = MlpGrads::zeros_like(policy);
            let mut v_grads = MlpGrads::zeros_like(value);
            let mut stats = TrainStats::default();
            for &i in chunk {
                let (logits, cache) = policy.forward_cached(&batch.obs[i]);
                let probs = softmax(&logits);
                let (loss, h, kl, clipped, mut d_logits) = policy_sample_grad(
                    &probs,
                    batch.actions[i],
                    batch.old_log_probs[i],
                    &batch.old_probs[i],
                    advantages[i],
                    cfg,
                );
                for g in &mut d_logits {
                    *g /= b;
                }
                policy.backward(&cache, &d_logits, &mut p_grads);

                let (v_out, v_cache) = value.forward_cached(&batch.obs[i]);
                let v_err = v_out[0] - batch.returns[i];
                value.backward(&v_cache, &[2.0 * v_err / b], &mut v_grads);

                stats.policy_loss += loss / b;
                stats.value_loss += v_err * v_err / b;
                stats.entropy += h / b;
                stats.kl += kl / b;
                stats.clip_fraction += if clipped { 1.0 / b } else { 0.0 };
            }
            if !p_grads.is_finite() {
                return Err(PpoError::NonFiniteGradient("policy update".into()));
            }
            if !v_grads.is_finite() {
                return Err(PpoError::NonFiniteGradient("value update".into()));
            }
            policy_opt.step(policy, &p_grads);
            value_opt.step(value, &v_grads);

            totals.policy_loss += stats.policy_loss;
            totals.value_loss += stats.value_loss;
            totals.entropy += stats.entropy;
            totals.kl += stats.kl;
            totals.clip_fraction += stats.clip_fraction;
            updates += 1;
        }
    }

    let scale = 1.0 / updates as f64;
    totals.policy_loss *= scale;
    totals.value_loss *= scale;
    totals.entropy *= scale;
    totals.kl *= scale;
    totals.clip_fraction *= scale;
    Ok(totals)
}

/// Total policy loss over a batch under the current parameters; the
/// finite-difference oracle in the test suite differentiates this.
pub fn policy_loss_for_check(policy: &Mlp, batch: &Batch, advantages: &[f64], cfg: &PpoConfig) -> f64 {
    let n = batch.len() as f64;
    let mut total = 0.0;
    for i in 0..batch.len() {
        let probs = softmax(&policy.forward(&batch.obs[i]));
        let (loss, _, _, _, _) = policy_sample_grad(
            &probs,
            batch.actions[i],
            batch.old_log_probs[i],
            &batch.old_probs[i],
            advantages[i],
            cfg,
        );
        total += loss / n;
    }
    total
}

/// Mean-squared value loss over a batch (finite-difference oracle hook).
pub fn value_loss_for_check(value: &Mlp, batch: &Batch) -> f64 {
    let n = batch.len() as f64;
    batch
        .obs
        .iter()
        .zip(&batch.returns)
        .map(|(obs, r)| {
            let v = value.forward(obs)[0];
            (v - r) * (v - r) / n
        })
        .sum()
}

/// Per-sample policy gradient w.r.t. logits, exposed for the analytic-vs-
/// numeric gradient comparison.
pub fn policy_grad_for_check(
    policy: &Mlp,
    batch: &Batch,
    advantages: &[f64],
    cfg: &PpoConfig,
) -> MlpGrads {
    let n = batch.len() as f64;
    let mut grads = MlpGrads::zeros_like(policy);
    for i in 0..batch.len() {
        let (logits, cache) = policy.forward_cached(&batch.obs[i]);
        let probs = softmax(&logits);
        let (_, _, _, _, mut d_logits) = policy_sample_grad(
            &probs,
            batch.actions[i],
            batch.old_log_probs[i],
            &batch.old_probs[i],
            advantages[i],
            cfg,
        );
        for g in &mut d_logits {
            *g /= n;
        }
        policy.backward(&cache, &d_logits, &mut grads);
    }
    grads
}
