//! Scheduling policies: the common interface and the four heuristic
//! baselines.

use crate::backend::{mean_gate_duration, mean_gate_error, Fleet};
use crate::env::Observation;
use thiserror::Error;

/// Non-observation inputs some baselines need.
#[derive(Debug, Clone)]
pub struct DecisionContext<'a> {
    /// Step index within the episode.
    pub step_index: usize,
    /// Current simulation time.
    pub now: f64,
    /// Per-node next-available times, in action order.
    pub next_available: &'a [f64],
}

/// A scheduling policy maps (observation, context) to a node index.
pub trait Policy: Send {
    fn act(&mut self, obs: &Observation, ctx: &DecisionContext) -> usize;

    /// Called at episode start.
    fn reset_episode(&mut self) {}

    fn name(&self) -> &str;
}

#[derive(Debug, Error, PartialEq)]
#[error("unknown policy '{0}' (expected rr, sef, fdf, fan, or qfor)")]
pub struct UnknownPolicy(pub String);

/// Baseline selector names accepted in configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    RoundRobin,
    SmallestErrorFirst,
    FastestDurationFirst,
    FirstAvailableNode,
    Qfor,
}

impl PolicyKind {
    pub fn parse(name: &str) -> Result<PolicyKind, UnknownPolicy> {
        Ok(match name {
            "rr" => PolicyKind::RoundRobin,
            "sef" => PolicyKind::SmallestErrorFirst,
            "fdf" => PolicyKind::FastestDurationFirst,
            "fan" => PolicyKind::FirstAvailableNode,
            "qfor" => PolicyKind::Qfor,
            other => return Err(UnknownPolicy(other.to_string())),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::RoundRobin => "rr",
            PolicyKind::SmallestErrorFirst => "sef",
            PolicyKind::FastestDurationFirst => "fdf",
            PolicyKind::FirstAvailableNode => "fan",
            PolicyKind::Qfor => "qfor",
        }
    }
}

/// Cyclic task distribution. The cursor resets each episode unless
/// configured to persist.
pub struct RoundRobin {
    fleet_size: usize,
    cursor: usize,
    persist_across_episodes: bool,
}

impl RoundRobin {
    pub fn new(fleet_size: usize) -> Self {
        RoundRobin { fleet_size, cursor: 0, persist_across_episodes: false }
    }

    pub fn persistent(fleet_size: usize) -> Self {
        RoundRobin { fleet_size, cursor: 0, persist_across_episodes: true }
    }
}

impl Policy for RoundRobin {
    fn act(&mut self, _obs: &Observation, _ctx: &DecisionContext) -> usize {
        let action = self.cursor % self.fleet_size;
        self.cursor += 1;
        action
    }

    fn reset_episode(&mut self) {
        if !self.persist_across_episodes {
            self.cursor = 0;
        }
    }

    fn name(&self) -> &str {
        "rr"
    }
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Constant pick: the node with the smallest pooled mean gate error.
pub struct SmallestErrorFirst {
    action: usize,
}

impl SmallestErrorFirst {
    pub fn new(fleet: &Fleet) -> Self {
        let means: Vec<f64> = fleet.nodes.iter().map(mean_gate_error).collect();
        SmallestErrorFirst { action: argmin(&means) }
    }
}

impl Policy for SmallestErrorFirst {
    fn act(&mut self, _obs: &Observation, _ctx: &DecisionContext) -> usize {
        self.action
    }

    fn name(&self) -> &str {
        "sef"
    }
}

/// Constant pick: the node with the smallest pooled mean gate duration.
pub struct FastestDurationFirst {
    action: usize,
}

impl FastestDurationFirst {
    pub fn new(fleet: &Fleet) -> Self {
        let means: Vec<f64> = fleet.nodes.iter().map(mean_gate_duration).collect();
        FastestDurationFirst { action: argmin(&means) }
    }
}

impl Policy for FastestDurationFirst {
    fn act(&mut self, _obs: &Observation, _ctx: &DecisionContext) -> usize {
        self.action
    }

    fn name(&self) -> &str {
        "fdf"
    }
}

/// Lowest-index idle node; when none is idle, the node that frees first.
pub struct FirstAvailableNode;

impl Policy for FirstAvailableNode {
    fn act(&mut self, _obs: &Observation, ctx: &DecisionContext) -> usize {
        if let Some(idle) = ctx.next_available.iter().position(|&t| t <= ctx.now) {
            idle
        } else {
            argmin(ctx.next_available)
        }
    }

    fn name(&self) -> &str {
        "fan"
    }
}

/// Instantiate a baseline by kind. `Qfor` is not a heuristic; the caller
/// loads it from a checkpoint instead.
pub fn make_baseline(kind: PolicyKind, fleet: &Fleet) -> Option<Box<dyn Policy>> {
    match kind {
        PolicyKind::RoundRobin => Some(Box::new(RoundRobin::new(fleet.len()))),
        PolicyKind::SmallestErrorFirst => Some(Box::new(SmallestErrorFirst::new(fleet))),
        PolicyKind::FastestDurationFirst => Some(Box::new(FastestDurationFirst::new(fleet))),
        PolicyKind::FirstAvailableNode => Some(Box::new(FirstAvailableNode)),
        PolicyKind::Qfor => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::testutil::line_node;

    fn obs() -> Observation {
        Observation { values: vec![0.0; 12] }
    }

    fn ctx<'a>(now: f64, next_available: &'a [f64], step: usize) -> DecisionContext<'a> {
        DecisionContext { step_index: step, now, next_available }
    }

    #[test]
    fn round_robin_cycles_and_resets() {
        let mut rr = RoundRobin::new(3);
        let na = [0.0; 3];
        let actions: Vec<usize> = (0..5).map(|i| rr.act(&obs(), &ctx(0.0, &na, i))).collect();
        assert_eq!(actions, vec![0, 1, 2, 0, 1]);
        rr.reset_episode();
        assert_eq!(rr.act(&obs(), &ctx(0.0, &na, 0)), 0);

        let mut single = RoundRobin::new(1);
        assert_eq!(single.act(&obs(), &ctx(0.0, &na[..1], 0)), 0);
        assert_eq!(single.act(&obs(), &ctx(0.0, &na[..1], 1)), 0);

        let mut persistent = RoundRobin::persistent(3);
        persistent.act(&obs(), &ctx(0.0, &na, 0));
        persistent.reset_episode();
        assert_eq!(persistent.act(&obs(), &ctx(0.0, &na, 0)), 1);
    }

    #[test]
    fn sef_picks_argmin_error_with_tie_to_lowest_index() {
        let fleet = Fleet::new(vec![
            line_node("a", 4, 1e-3, 1e-2, 1e-2),
            line_node("b", 4, 1e-3, 5e-3, 1e-2),
            line_node("c", 4, 1e-3, 2e-2, 1e-2),
        ]);
        let mut sef = SmallestErrorFirst::new(&fleet);
        assert_eq!(sef.act(&obs(), &ctx(0.0, &[0.0; 3], 0)), 1);

        let tie = Fleet::new(vec![
            line_node("a", 4, 1e-3, 1e-2, 1e-2),
            line_node("b", 4, 1e-3, 1e-2, 1e-2),
        ]);
        let mut sef = SmallestErrorFirst::new(&tie);
        assert_eq!(sef.act(&obs(), &ctx(0.0, &[0.0; 2], 0)), 0);
    }

    #[test]
    fn fdf_picks_argmin_duration() {
        // Same toy durations everywhere; vary by qubit count keeps them
        // equal, so tie goes to index 0.
        let fleet = Fleet::new(vec![
            line_node("a", 4, 1e-3, 1e-2, 1e-2),
            line_node("b", 4, 1e-3, 1e-2, 1e-2),
        ]);
        let mut fdf = FastestDurationFirst::new(&fleet);
        assert_eq!(fdf.act(&obs(), &ctx(0.0, &[0.0; 2], 0)), 0);
    }

    #[test]
    fn fan_prefers_idle_then_earliest() {
        let mut fan = FirstAvailableNode;
        assert_eq!(fan.act(&obs(), &ctx(1.0, &[5.0, 0.0, 2.0], 0)), 1);
        assert_eq!(fan.act(&obs(), &ctx(1.0, &[5.0, 4.0, 9.0], 0)), 1);
        assert_eq!(fan.act(&obs(), &ctx(1.0, &[0.0, 0.0, 0.0], 0)), 0);
    }

    #[test]
    fn policy_names_parse() {
        assert_eq!(PolicyKind::parse("rr").unwrap(), PolicyKind::RoundRobin);
        assert_eq!(PolicyKind::parse("qfor").unwrap(), PolicyKind::Qfor);
        assert!(PolicyKind::parse("best").is_err());
    }
}
