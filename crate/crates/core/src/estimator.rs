//! Fidelity and time scoring of a transpiled circuit on a node.
//!
//! The composite fidelity score blends three components: relative fidelity
//! (achieved over fleet-expected), a complexity bonus that keeps deep or
//! gate-heavy tasks attractive, and a ranking bonus for picking a node that
//! compares well against the alternatives. The reward subtracts a
//! beta-weighted completion-time penalty, or collapses to a fixed failure
//! penalty for infeasible assignments.

use crate::backend::{FleetAverages, QNodeSpec};
use crate::circuit::{build_dag, critical_path, Circuit, CircuitFeatures, GateKind};
use crate::transpiler::TranspiledCircuit;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Upper clamp on the relative-fidelity ratio; unbounded ratios destabilize
/// advantage estimates.
pub const RELATIVE_FIDELITY_CLAMP: f64 = 2.0;

#[derive(Debug, Error, PartialEq)]
pub enum EstimatorError {
    #[error("missing calibration for {kind} on qubits {qubits:?} of '{node}'")]
    MissingCalibration { node: String, kind: GateKind, qubits: Vec<usize> },
    #[error("expected fidelity is degenerate (F' = {0})")]
    DegenerateExpected(f64),
    #[error("fidelity {f} outside ranking range [{f_worst}, {f_best}]")]
    Range { f: f64, f_worst: f64, f_best: f64 },
}

/// Scoring weights and normalization bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreWeights {
    /// Relative-fidelity weight.
    pub alpha1: f64,
    /// Complexity-bonus weight.
    pub alpha2: f64,
    /// Ranking-bonus weight.
    pub alpha3: f64,
    /// Depth term weight inside the complexity bonus.
    pub w_d: f64,
    /// Gate-count term weight inside the complexity bonus.
    pub w_g: f64,
    /// Time-penalty weight in the reward.
    pub beta: f64,
    /// Depth normalization bound.
    pub d_max: f64,
    /// Gate-count normalization bound.
    pub g_max: f64,
    /// Completion-time normalization bound, seconds.
    pub t_max: f64,
    /// Reward emitted on infeasible assignments.
    pub p_fail: f64,
    /// Clamp on the relative-fidelity ratio.
    #[serde(default = "default_r_rf_max")]
    pub r_rf_max: f64,
}

fn default_r_rf_max() -> f64 {
    RELATIVE_FIDELITY_CLAMP
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights {
            alpha1: 0.8,
            alpha2: 0.1,
            alpha3: 0.1,
            w_d: 0.5,
            w_g: 0.5,
            beta: 0.5,
            d_max: 500.0,
            g_max: 2000.0,
            t_max: 100.0,
            p_fail: -1.0,
            r_rf_max: RELATIVE_FIDELITY_CLAMP,
        }
    }
}

impl ScoreWeights {
    pub fn validate(&self) -> Result<(), String> {
        let alpha_sum = self.alpha1 + self.alpha2 + self.alpha3;
        if (alpha_sum - 1.0).abs() > 1e-9 {
            return Err(format!("alpha weights must sum to 1, got {alpha_sum}"));
        }
        for (name, v) in [
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("alpha3", self.alpha3),
            ("w_d", self.w_d),
            ("w_g", self.w_g),
            ("beta", self.beta),
        ] {
            if v < 0.0 || !v.is_finite() {
                return Err(format!("{name} must be non-negative, got {v}"));
            }
        }
        for (name, v) in [("d_max", self.d_max), ("g_max", self.g_max), ("t_max", self.t_max)] {
            if v <= 0.0 || !v.is_finite() {
                return Err(format!("{name} must be positive, got {v}"));
            }
        }
        if self.p_fail >= 0.0 {
            return Err(format!("p_fail must be negative, got {}", self.p_fail));
        }
        if self.r_rf_max <= 0.0 {
            return Err(format!("r_rf_max must be positive, got {}", self.r_rf_max));
        }
        Ok(())
    }

    /// Preset with a different time-penalty weight.
    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }
}

/// Every intermediate quantity behind one reward emission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    /// Execution fidelity on the chosen node.
    pub fidelity: f64,
    /// Fleet-expected fidelity for the same transpiled shape.
    pub expected: f64,
    pub r_rf: f64,
    pub r_cb: f64,
    pub r_rb: f64,
    pub fidelity_score: f64,
    pub t_exec: f64,
    pub t_wait: f64,
    pub t_total: f64,
    pub time_penalty: f64,
    pub reward: f64,
    pub success: bool,
}

impl RewardBreakdown {
    /// Breakdown for an infeasible assignment: fixed penalty, no metrics.
    pub fn failure(w: &ScoreWeights) -> Self {
        RewardBreakdown {
            fidelity: 0.0,
            expected: 0.0,
            r_rf: 0.0,
            r_cb: 0.0,
            r_rb: 0.0,
            fidelity_score: 0.0,
            t_exec: 0.0,
            t_wait: 0.0,
            t_total: 0.0,
            time_penalty: 0.0,
            reward: w.p_fail,
            success: false,
        }
    }
}

fn op_error(node: &QNodeSpec, op: &crate::circuit::GateOp) -> Result<f64, EstimatorError> {
    if op.kind == GateKind::Rz {
        // Virtual gate: missing rz calibration means zero error.
        return Ok(node.gate_error(GateKind::Rz, &op.qubits).unwrap_or(0.0));
    }
    node.gate_error(op.kind, &op.qubits).ok_or_else(|| EstimatorError::MissingCalibration {
        node: node.name.clone(),
        kind: op.kind,
        qubits: op.qubits.clone(),
    })
}

/// Execution fidelity: product over non-barrier ops of (1 - error), with
/// measures drawing from readout error. Accumulated in log space.
pub fn estimate_fidelity(tc: &TranspiledCircuit, node: &QNodeSpec) -> Result<f64, EstimatorError> {
    let mut log_sum = 0.0f64;
    for op in &tc.ops {
        if op.kind.is_barrier() {
            continue;
        }
        let e = op_error(node, op)?;
        log_sum += (1.0 - e).ln();
    }
    Ok(log_sum.exp())
}

/// Expected fidelity from fleet-wide category means raised to the circuit's
/// own post-transpilation counts.
pub fn expected_fidelity(tc: &TranspiledCircuit, avg: &FleetAverages) -> f64 {
    let log_sum = tc.g1_t as f64 * (1.0 - avg.mean_1q_error).ln()
        + tc.g2_t as f64 * (1.0 - avg.mean_2q_error).ln()
        + tc.measures_t as f64 * (1.0 - avg.mean_readout_error).ln();
    log_sum.exp()
}

/// Achieved-over-expected fidelity ratio, clamped to `[0, max]`.
pub fn relative_fidelity_clamped(f: f64, f_prime: f64, max: f64) -> Result<f64, EstimatorError> {
    if f_prime <= 1e-300 {
        return Err(EstimatorError::DegenerateExpected(f_prime));
    }
    Ok((f / f_prime).clamp(0.0, max))
}

/// Achieved-over-expected fidelity ratio with the default clamp of 2.
pub fn relative_fidelity(f: f64, f_prime: f64) -> Result<f64, EstimatorError> {
    relative_fidelity_clamped(f, f_prime, RELATIVE_FIDELITY_CLAMP)
}

/// Complexity bonus over pre-transpilation features.
pub fn complexity_bonus(features: &CircuitFeatures, w: &ScoreWeights) -> f64 {
    let depth_term = (features.depth as f64 / w.d_max).min(1.0);
    let gate_term = ((features.g1 + features.g2) as f64 / w.g_max).min(1.0);
    w.w_d * depth_term + w.w_g * gate_term
}

/// Min-max position of the chosen node's fidelity among all feasible nodes.
/// A degenerate spread (all nodes tie) scores 1.
pub fn ranking_bonus(f: f64, f_best: f64, f_worst: f64) -> Result<f64, EstimatorError> {
    if f < f_worst || f > f_best {
        return Err(EstimatorError::Range { f, f_worst, f_best });
    }
    let spread = f_best - f_worst;
    if spread < 1e-12 {
        return Ok(1.0);
    }
    Ok((f - f_worst) / spread)
}

/// Weighted blend of the three fidelity components.
pub fn fidelity_score(r_rf: f64, r_cb: f64, r_rb: f64, w: &ScoreWeights) -> f64 {
    w.alpha1 * r_rf + w.alpha2 * r_cb + w.alpha3 * r_rb
}

/// Critical path of the transpiled ops under the node's duration maps.
/// rz costs its calibrated duration (zero when virtual); measures use
/// readout duration; barriers are weightless.
pub fn exec_critical_path(
    tc: &TranspiledCircuit,
    node: &QNodeSpec,
) -> Result<(Vec<usize>, f64), EstimatorError> {
    let circuit = Circuit {
        source_name: String::new(),
        num_qubits: node.num_qubits,
        num_clbits: 0,
        ops: tc.ops.clone(),
    };
    let dag = build_dag(&circuit);
    critical_path(&circuit, &dag, |_, op| {
        if op.kind == GateKind::Rz {
            Some(node.gate_duration(GateKind::Rz, &op.qubits).unwrap_or(0.0))
        } else {
            node.gate_duration(op.kind, &op.qubits)
        }
    })
    .map_err(|e| match e {
        crate::circuit::CriticalPathError::MissingWeight { index, .. } => {
            EstimatorError::MissingCalibration {
                node: node.name.clone(),
                kind: tc.ops[index].kind,
                qubits: tc.ops[index].qubits.clone(),
            }
        }
    })
}

/// Quantum execution time: shots times the critical-path duration.
pub fn estimate_exec_time(
    tc: &TranspiledCircuit,
    node: &QNodeSpec,
    shots: u64,
) -> Result<f64, EstimatorError> {
    let (_, per_shot) = exec_critical_path(tc, node)?;
    Ok(shots as f64 * per_shot)
}

/// Completion time normalized by the configured bound, capped at 1.
pub fn time_penalty(t_total: f64, w: &ScoreWeights) -> f64 {
    (t_total / w.t_max).min(1.0)
}

/// Final reward: score minus weighted penalty on success, fixed penalty
/// otherwise.
pub fn reward(score: f64, penalty: f64, success: bool, w: &ScoreWeights) -> f64 {
    if success {
        score - w.beta * penalty
    } else {
        w.p_fail
    }
}

/// Assemble the full successful-assignment breakdown from precomputed
/// fidelity/time pieces. `f_best`/`f_worst` span all capacity-feasible nodes
/// for the task.
#[allow(clippy::too_many_arguments)]
pub fn score_assignment(
    features: &CircuitFeatures,
    fidelity: f64,
    expected: f64,
    f_best: f64,
    f_worst: f64,
    t_exec: f64,
    t_wait: f64,
    w: &ScoreWeights,
) -> Result<RewardBreakdown, EstimatorError> {
    let r_rf = relative_fidelity_clamped(fidelity, expected, w.r_rf_max)?;
    let r_cb = complexity_bonus(features, w);
    let r_rb = ranking_bonus(fidelity, f_best, f_worst)?;
    let score = fidelity_score(r_rf, r_cb, r_rb, w);
    let t_total = t_wait + t_exec;
    let penalty = time_penalty(t_total, w);
    let reward = reward(score, penalty, true, w);
    Ok(RewardBreakdown {
        fidelity,
        expected,
        r_rf,
        r_cb,
        r_rb,
        fidelity_score: score,
        t_exec,
        t_wait,
        t_total,
        time_penalty: penalty,
        reward,
        success: true,
    })
}
