//! Property tests over randomly generated circuits.

use proptest::prelude::*;
use qfor_core::circuit::{build_dag, critical_path, extract_features, Circuit, GateKind, GateOp};
use qfor_core::qasm::parse_qasm;

/// Strategy: one random op over `n` qubits (and `n` clbits for measures).
fn op_strategy(n: usize) -> impl Strategy<Value = GateOp> {
    let one_q = prop_oneof![
        Just(GateKind::H),
        Just(GateKind::X),
        Just(GateKind::Y),
        Just(GateKind::Z),
        Just(GateKind::S),
        Just(GateKind::Sdg),
        Just(GateKind::T),
        Just(GateKind::Tdg),
        Just(GateKind::Sx),
    ];
    let angle = -10.0f64..10.0;
    prop_oneof![
        (one_q, 0..n).prop_map(|(kind, q)| GateOp::gate(kind, vec![q])),
        (angle.clone(), 0..n).prop_map(|(a, q)| GateOp::gate_with_params(GateKind::Rz, vec![a], vec![q])),
        (angle.clone(), 0..n).prop_map(|(a, q)| GateOp::gate_with_params(GateKind::Rx, vec![a], vec![q])),
        (angle.clone(), angle.clone(), angle, 0..n)
            .prop_map(|(a, b, c, q)| GateOp::gate_with_params(GateKind::U, vec![a, b, c], vec![q])),
        proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 2)
            .prop_map(|qs| GateOp::gate(GateKind::Cx, vec![qs[0], qs[1]])),
        proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 2)
            .prop_map(|qs| GateOp::gate(GateKind::Swap, vec![qs[0], qs[1]])),
        proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 2.min(n)..=2.min(n).max(1))
            .prop_map(|qs| GateOp::barrier(qs)),
        (0..n).prop_map(move |q| GateOp::measure(q, q % n.max(1))),
    ]
}

fn circuit_strategy() -> impl Strategy<Value = Circuit> {
    (2usize..6).prop_flat_map(|n| {
        proptest::collection::vec(op_strategy(n), 0..40).prop_map(move |ops| Circuit {
            source_name: "prop".into(),
            num_qubits: n,
            num_clbits: n,
            ops,
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn parse_serialize_parse_is_a_fixed_point(circuit in circuit_strategy()) {
        let text = circuit.to_qasm();
        let once = parse_qasm(&text, "prop").unwrap();
        let twice = parse_qasm(&once.to_qasm(), "prop").unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(&once.ops, &circuit.ops);
        prop_assert_eq!(once.num_qubits, circuit.num_qubits);
    }

    #[test]
    fn dependency_dag_is_acyclic(circuit in circuit_strategy()) {
        let dag = build_dag(&circuit);
        // Kahn's algorithm must consume every node.
        let mut indegree: Vec<usize> = dag.preds.iter().map(Vec::len).collect();
        let mut queue: Vec<usize> =
            (0..dag.num_nodes).filter(|&v| indegree[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = queue.pop() {
            seen += 1;
            for &s in &dag.succs[v] {
                indegree[s] -= 1;
                if indegree[s] == 0 {
                    queue.push(s);
                }
            }
        }
        prop_assert_eq!(seen, dag.num_nodes);
        // Edges respect op order and never exceed total qubit arity.
        let arity_sum: usize = circuit.ops.iter().map(|op| op.qubits.len()).sum();
        prop_assert!(dag.edges.len() <= arity_sum);
        for &(u, v) in &dag.edges {
            prop_assert!(u < v);
        }
    }

    #[test]
    fn layered_depth_equals_longest_unit_path(circuit in circuit_strategy()) {
        let dag = build_dag(&circuit);
        let depth = extract_features(&circuit, 1).depth;
        let (_, total) =
            critical_path(&circuit, &dag, |_, _| Some(1.0)).unwrap();
        prop_assert_eq!(depth as f64, total);
    }

    #[test]
    fn equal_weights_scale_depth(circuit in circuit_strategy(), w in 1u32..100) {
        let dag = build_dag(&circuit);
        let w = w as f64;
        let depth = extract_features(&circuit, 1).depth;
        let (_, total) = critical_path(&circuit, &dag, |_, _| Some(w)).unwrap();
        prop_assert_eq!(depth as f64 * w, total);
    }

    #[test]
    fn features_are_consistent(circuit in circuit_strategy()) {
        let f = extract_features(&circuit, 512);
        let non_barrier =
            circuit.ops.iter().filter(|op| op.kind != GateKind::Barrier).count();
        prop_assert!(f.depth <= non_barrier);
        if non_barrier > 0 {
            prop_assert!(f.depth >= 1);
        }
        prop_assert_eq!(f.g1 + f.g2 + f.multi + f.measures, non_barrier);
        prop_assert_eq!(f.shots, 512);
    }
}
