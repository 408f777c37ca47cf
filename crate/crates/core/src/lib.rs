//! QFOR workbench core: noise-aware orchestration of quantum tasks across a
//! heterogeneous fleet of simulated quantum nodes.
//!
//! The crate is organized around the task lifecycle:
//!
//! - [`qasm`] / [`circuit`]: parse OpenQASM 2.0 into a gate-list IR, build the
//!   dependency DAG, extract scheduling features, and compute weighted
//!   critical paths.
//! - [`backend`] / [`fixtures`]: calibration-defined device models (topology,
//!   per-gate error/duration maps) and a seeded generator for a synthetic
//!   five-node fleet.
//! - [`transpiler`]: lower a logical circuit onto a device (basis
//!   decomposition, greedy layout, SWAP routing, peephole cleanup).
//! - [`estimator`]: fidelity / execution-time scoring and the composite
//!   reward model.
//! - [`workload`] / [`env`]: Poisson task generation over a QASM corpus and
//!   the episodic discrete-event scheduling environment.
//! - [`policy`]: heuristic baseline schedulers (round robin, smallest error
//!   first, fastest duration first, first available node).
//! - [`ppo`]: from-scratch PPO trainer (MLP policy/value nets, GAE, clipped
//!   surrogate with entropy bonus and KL penalty).
//! - [`unitary`]: dense-matrix reference simulator used to verify transpiler
//!   output against the original circuit.

pub mod backend;
pub mod circuit;
pub mod env;
pub mod estimator;
pub mod fixtures;
pub mod policy;
pub mod ppo;
pub mod qasm;
pub mod seeds;
pub mod transpiler;
pub mod unitary;
pub mod workload;
