//! Independent recomputation oracles for the estimator and fleet statistics.

use qfor_core::backend::{fleet_averages, mean_gate_duration, mean_gate_error, CalibrationFile, Fleet};
use qfor_core::circuit::GateKind;
use qfor_core::estimator::{estimate_fidelity, ScoreWeights};
use qfor_core::fixtures::{generate_fleet, generate_fleet_files};
use qfor_core::transpiler::transpile;
use qfor_core::workload::circuitgen;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One-pass recomputation straight off the calibration file records,
/// independent of the QNodeSpec lookup structures.
fn flat_mean_error(file: &CalibrationFile) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for table in [&file.gates.sx, &file.gates.x, &file.gates.rz, &file.gates.cx] {
        for e in table.iter() {
            sum += e.error;
            count += 1;
        }
    }
    for r in &file.readout {
        sum += r.error;
        count += 1;
    }
    sum / count as f64
}

fn flat_mean_duration(file: &CalibrationFile) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for table in [&file.gates.sx, &file.gates.x, &file.gates.rz, &file.gates.cx] {
        for e in table.iter() {
            sum += e.duration_s;
            count += 1;
        }
    }
    for r in &file.readout {
        sum += r.duration_s;
        count += 1;
    }
    sum / count as f64
}

#[test]
fn node_means_match_flat_recomputation() {
    let files = generate_fleet_files(7);
    let fleet = generate_fleet(7).unwrap();
    for (file, node) in files.iter().zip(&fleet) {
        assert!((mean_gate_error(node) - flat_mean_error(file)).abs() < 1e-15, "{}", node.name);
        assert!(
            (mean_gate_duration(node) - flat_mean_duration(file)).abs() < 1e-18,
            "{}",
            node.name
        );
    }
}

#[test]
fn fleet_averages_match_flat_recomputation() {
    let files = generate_fleet_files(7);
    let fleet = Fleet::new(generate_fleet(7).unwrap());
    let avg = fleet_averages(&fleet);

    let mut sum_1q = 0.0;
    let mut n_1q = 0usize;
    let mut sum_2q = 0.0;
    let mut n_2q = 0usize;
    let mut sum_ro = 0.0;
    let mut n_ro = 0usize;
    for file in &files {
        for table in [&file.gates.sx, &file.gates.x, &file.gates.rz] {
            for e in table.iter() {
                sum_1q += e.error;
                n_1q += 1;
            }
        }
        for e in &file.gates.cx {
            sum_2q += e.error;
            n_2q += 1;
        }
        for r in &file.readout {
            sum_ro += r.error;
            n_ro += 1;
        }
    }
    assert!((avg.mean_1q_error - sum_1q / n_1q as f64).abs() < 1e-15);
    assert!((avg.mean_2q_error - sum_2q / n_2q as f64).abs() < 1e-15);
    assert!((avg.mean_readout_error - sum_ro / n_ro as f64).abs() < 1e-15);
}

#[test]
fn log_space_fidelity_matches_naive_product_on_100_circuit_node_pairs() {
    let fleet = generate_fleet(7).unwrap();
    let corpus = circuitgen::standard_corpus();
    let mut checked = 0;
    'outer: for circuit in &corpus {
        for node in &fleet {
            if circuit.num_qubits > node.num_qubits {
                continue;
            }
            let tc = transpile(circuit, node).unwrap();
            let f = estimate_fidelity(&tc, node).unwrap();
            let mut naive = 1.0f64;
            for op in &tc.ops {
                if op.kind.is_barrier() {
                    continue;
                }
                let e = if op.kind == GateKind::Rz {
                    node.gate_error(GateKind::Rz, &op.qubits).unwrap_or(0.0)
                } else {
                    node.gate_error(op.kind, &op.qubits).expect("calibration entry")
                };
                naive *= 1.0 - e;
            }
            assert!(
                (f - naive).abs() < 1e-12,
                "{} on {}: log-space {f} vs naive {naive}",
                circuit.source_name,
                node.name
            );
            checked += 1;
            if checked >= 100 {
                break 'outer;
            }
        }
    }
    assert!(checked >= 70, "only {checked} circuit/node pairs available");
}

#[test]
fn log_space_stays_tight_on_ten_thousand_gates() {
    // Repeat a block until the op list passes 10k gates, then compare.
    let fleet = generate_fleet(7).unwrap();
    let node = &fleet[4];
    let base = circuitgen::efficient_su2(16, 2);
    let mut big = base.clone();
    while big.ops.len() < 10_000 {
        big.ops.extend(base.ops.iter().cloned());
    }
    let tc = transpile(&big, node).unwrap();
    assert!(tc.ops.len() >= 10_000);
    let f = estimate_fidelity(&tc, node).unwrap();
    let mut naive = 1.0f64;
    for op in &tc.ops {
        if op.kind.is_barrier() {
            continue;
        }
        let e = if op.kind == GateKind::Rz {
            node.gate_error(GateKind::Rz, &op.qubits).unwrap_or(0.0)
        } else {
            node.gate_error(op.kind, &op.qubits).unwrap()
        };
        naive *= 1.0 - e;
    }
    assert!((f - naive).abs() < 1e-12, "log {f} vs naive {naive}");
}

#[test]
fn argmax_node_is_invariant_under_uniform_log_error_scaling() {
    // e -> 1 - (1-e)^k scales every log-fidelity by k, so the per-task
    // fidelity ranking across nodes must not move.
    let fleet = generate_fleet(7).unwrap();
    let corpus = circuitgen::standard_corpus();
    for k in [2.0f64, 3.5] {
        let scaled: Vec<_> = fleet
            .iter()
            .map(|node| {
                let mut n = node.clone();
                let scale = |e: &mut f64| *e = 1.0 - (1.0 - *e).powf(k);
                n.sx_error.iter_mut().for_each(scale);
                n.x_error.iter_mut().for_each(scale);
                n.rz_error.iter_mut().for_each(scale);
                n.readout_error.iter_mut().for_each(scale);
                n.cx_error.values_mut().for_each(scale);
                n
            })
            .collect();
        for circuit in &corpus {
            let argmax = |nodes: &[qfor_core::backend::QNodeSpec]| -> usize {
                let mut best = None;
                let mut best_f = f64::NEG_INFINITY;
                for (i, node) in nodes.iter().enumerate() {
                    if circuit.num_qubits > node.num_qubits {
                        continue;
                    }
                    let tc = transpile(circuit, node).unwrap();
                    let f = estimate_fidelity(&tc, node).unwrap();
                    if f > best_f {
                        best_f = f;
                        best = Some(i);
                    }
                }
                best.expect("at least one feasible node")
            };
            assert_eq!(
                argmax(&fleet),
                argmax(&scaled),
                "{}: argmax moved under k={k}",
                circuit.source_name
            );
        }
    }
}

#[test]
fn exec_time_matches_path_enumeration_on_random_transpiled_circuits() {
    // Brute-force all dependency paths of a transpiled circuit and compare
    // the shots-scaled maximum against the estimator.
    use qfor_core::circuit::{build_dag, Circuit};
    let fleet = generate_fleet(7).unwrap();
    let node = &fleet[0];
    let mut rng = ChaCha8Rng::seed_from_u64(0xE7E);
    for _ in 0..20 {
        let n_qubits = rng.random_range(2..=4);
        let n_ops = rng.random_range(1..=6);
        let mut circuit = Circuit::new("rand", n_qubits, 0);
        for _ in 0..n_ops {
            if rng.random::<f64>() < 0.5 {
                circuit.push(qfor_core::circuit::GateOp::gate(
                    GateKind::Sx,
                    vec![rng.random_range(0..n_qubits)],
                ));
            } else {
                let a = rng.random_range(0..n_qubits);
                let b = (a + 1 + rng.random_range(0..n_qubits - 1)) % n_qubits;
                circuit.push(qfor_core::circuit::GateOp::gate(GateKind::Cx, vec![a, b]));
            }
        }
        let tc = transpile(&circuit, node).unwrap();
        let shots = 1000u64;
        let t = qfor_core::estimator::estimate_exec_time(&tc, node, shots).unwrap();

        // Exhaustive path enumeration over the transpiled DAG.
        let as_circuit = Circuit {
            source_name: String::new(),
            num_qubits: node.num_qubits,
            num_clbits: 0,
            ops: tc.ops.clone(),
        };
        let dag = build_dag(&as_circuit);
        let weight = |i: usize| -> f64 {
            let op = &tc.ops[i];
            if op.kind.is_barrier() {
                0.0
            } else {
                node.gate_duration(op.kind, &op.qubits).unwrap_or(0.0)
            }
        };
        fn longest(
            dag: &qfor_core::circuit::CircuitDag,
            weight: &dyn Fn(usize) -> f64,
            v: usize,
        ) -> f64 {
            let tail = dag.succs[v]
                .iter()
                .map(|&s| longest(dag, weight, s))
                .fold(0.0f64, f64::max);
            weight(v) + tail
        }
        let best = dag
            .sources()
            .map(|s| longest(&dag, &weight, s))
            .fold(0.0f64, f64::max);
        assert!(
            (t - shots as f64 * best).abs() <= 1e-18 + 1e-12 * t.abs(),
            "estimator {t} vs enumeration {}",
            shots as f64 * best
        );
    }
}

#[test]
fn reward_monotonicity_in_time_and_fidelity() {
    let w = ScoreWeights { t_max: 10.0, ..ScoreWeights::default() };
    // Strictly decreasing in completion time below the bound.
    let score = 0.8;
    let r1 = qfor_core::estimator::reward(score, qfor_core::estimator::time_penalty(2.0, &w), true, &w);
    let r2 = qfor_core::estimator::reward(score, qfor_core::estimator::time_penalty(4.0, &w), true, &w);
    assert!(r2 < r1);
    // Strictly increasing in fidelity via the relative-fidelity component.
    let w2 = ScoreWeights::default();
    let lo = qfor_core::estimator::relative_fidelity(0.6, 0.9).unwrap();
    let hi = qfor_core::estimator::relative_fidelity(0.8, 0.9).unwrap();
    let s_lo = qfor_core::estimator::fidelity_score(lo, 0.1, 0.5, &w2);
    let s_hi = qfor_core::estimator::fidelity_score(hi, 0.1, 0.5, &w2);
    assert!(s_hi > s_lo);
}
