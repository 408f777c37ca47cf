//! Reference transpiler: lower a logical circuit onto a device.
//!
//! Pipeline: rewrite every gate into the native basis {rz, sx, x, cx}
//! through a fixed table, place logical qubits with a greedy
//! interaction-degree layout, route non-adjacent cx gates by inserting SWAPs
//! (three cx each) along shortest coupling paths, then run a small peephole
//! pass (self-inverse pair cancellation and rz merging). Every stage is
//! deterministic; ties always break toward the lowest qubit index.

use crate::backend::QNodeSpec;
use crate::circuit::{Circuit, GateKind, GateOp};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TranspileError {
    #[error("circuit needs {required} qubits but node '{node}' has {available}")]
    Capacity { required: usize, available: usize, node: String },
}

/// Injective map from logical qubit index to physical qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub logical_to_physical: Vec<usize>,
}

impl Layout {
    pub fn physical(&self, logical: usize) -> usize {
        self.logical_to_physical[logical]
    }
}

/// Hardware-native circuit over physical qubits, plus the layout bookkeeping
/// needed to interpret it.
#[derive(Debug, Clone, PartialEq)]
pub struct TranspiledCircuit {
    pub node_name: String,
    /// Ops over physical qubits; kinds restricted to
    /// {rz, sx, x, cx, measure, barrier}.
    pub ops: Vec<GateOp>,
    /// Placement before routing.
    pub layout: Layout,
    /// Where each logical qubit ends up after routing SWAPs.
    pub final_layout: Layout,
    /// SWAPs inserted by the router (each lowered to three cx).
    pub swap_count: usize,
    /// Post-transpilation single-qubit gate count (rz + sx + x).
    pub g1_t: usize,
    /// Post-transpilation cx count.
    pub g2_t: usize,
    pub measures_t: usize,
}

impl TranspiledCircuit {
    /// Debug view as a plain circuit over the node's physical qubits.
    pub fn as_circuit(&self, node: &QNodeSpec) -> Circuit {
        let num_clbits = self
            .ops
            .iter()
            .flat_map(|op| op.clbits.iter())
            .max()
            .map_or(0, |m| m + 1);
        Circuit {
            source_name: format!("{}@{}", "transpiled", self.node_name),
            num_qubits: node.num_qubits,
            num_clbits,
            ops: self.ops.clone(),
        }
    }

    fn recount(&mut self) {
        self.g1_t = 0;
        self.g2_t = 0;
        self.measures_t = 0;
        for op in &self.ops {
            match op.kind {
                GateKind::Rz | GateKind::Sx | GateKind::X => self.g1_t += 1,
                GateKind::Cx => self.g2_t += 1,
                GateKind::Measure => self.measures_t += 1,
                _ => {}
            }
        }
    }
}

fn is_basis(kind: GateKind) -> bool {
    matches!(
        kind,
        GateKind::Rz | GateKind::Sx | GateKind::X | GateKind::Cx | GateKind::Measure | GateKind::Barrier
    )
}

/// Append the basis expansion of one op. Non-basis gates rewrite recursively
/// through the fixed table; the recursion depth is bounded by the table.
fn lower(op: &GateOp, out: &mut Vec<GateOp>) {
    let q = |i: usize| op.qubits[i];
    match op.kind {
        k if is_basis(k) => out.push(op.clone()),
        GateKind::H => {
            out.push(GateOp::gate_with_params(GateKind::Rz, vec![PI / 2.0], vec![q(0)]));
            out.push(GateOp::gate(GateKind::Sx, vec![q(0)]));
            out.push(GateOp::gate_with_params(GateKind::Rz, vec![PI / 2.0], vec![q(0)]));
        }
        GateKind::Z => out.push(GateOp::gate_with_params(GateKind::Rz, vec![PI], vec![q(0)])),
        GateKind::S => out.push(GateOp::gate_with_params(GateKind::Rz, vec![PI / 2.0], vec![q(0)])),
        GateKind::Sdg => out.push(GateOp::gate_with_params(GateKind::Rz, vec![-PI / 2.0], vec![q(0)])),
        GateKind::T => out.push(GateOp::gate_with_params(GateKind::Rz, vec![PI / 4.0], vec![q(0)])),
        GateKind::Tdg => out.push(GateOp::gate_with_params(GateKind::Rz, vec![-PI / 4.0], vec![q(0)])),
        GateKind::Y => {
            // Y = i X Z: apply rz(pi) then x.
            out.push(GateOp::gate_with_params(GateKind::Rz, vec![PI], vec![q(0)]));
            out.push(GateOp::gate(GateKind::X, vec![q(0)]));
        }
        GateKind::Rx => {
            lower(
                &GateOp::gate_with_params(GateKind::U, vec![op.params[0], -PI / 2.0, PI / 2.0], vec![q(0)]),
                out,
            );
        }
        GateKind::Ry => {
            lower(&GateOp::gate_with_params(GateKind::U, vec![op.params[0], 0.0, 0.0], vec![q(0)]), out);
        }
        GateKind::U => {
            // ZSXZSXZ Euler form: U(theta, phi, lambda) ~
            // rz(phi+pi) . sx . rz(theta+pi) . sx . rz(lambda).
            let (theta, phi, lambda) = (op.params[0], op.params[1], op.params[2]);
            out.push(GateOp::gate_with_params(GateKind::Rz, vec![lambda], vec![q(0)]));
            out.push(GateOp::gate(GateKind::Sx, vec![q(0)]));
            out.push(GateOp::gate_with_params(GateKind::Rz, vec![theta + PI], vec![q(0)]));
            out.push(GateOp::gate(GateKind::Sx, vec![q(0)]));
            out.push(GateOp::gate_with_params(GateKind::Rz, vec![phi + PI], vec![q(0)]));
        }
        GateKind::Cz => {
            lower(&GateOp::gate(GateKind::H, vec![q(1)]), out);
            out.push(GateOp::gate(GateKind::Cx, vec![q(0), q(1)]));
            lower(&GateOp::gate(GateKind::H, vec![q(1)]), out);
        }
        GateKind::Swap => {
            out.push(GateOp::gate(GateKind::Cx, vec![q(0), q(1)]));
            out.push(GateOp::gate(GateKind::Cx, vec![q(1), q(0)]));
            out.push(GateOp::gate(GateKind::Cx, vec![q(0), q(1)]));
        }
        GateKind::Ccx => {
            // Textbook six-cx Toffoli network.
            let (a, b, c) = (q(0), q(1), q(2));
            lower(&GateOp::gate(GateKind::H, vec![c]), out);
            out.push(GateOp::gate(GateKind::Cx, vec![b, c]));
            lower(&GateOp::gate(GateKind::Tdg, vec![c]), out);
            out.push(GateOp::gate(GateKind::Cx, vec![a, c]));
            lower(&GateOp::gate(GateKind::T, vec![c]), out);
            out.push(GateOp::gate(GateKind::Cx, vec![b, c]));
            lower(&GateOp::gate(GateKind::Tdg, vec![c]), out);
            out.push(GateOp::gate(GateKind::Cx, vec![a, c]));
            lower(&GateOp::gate(GateKind::T, vec![b]), out);
            lower(&GateOp::gate(GateKind::T, vec![c]), out);
            lower(&GateOp::gate(GateKind::H, vec![c]), out);
            out.push(GateOp::gate(GateKind::Cx, vec![a, b]));
            lower(&GateOp::gate(GateKind::T, vec![a]), out);
            lower(&GateOp::gate(GateKind::Tdg, vec![b]), out);
            out.push(GateOp::gate(GateKind::Cx, vec![a, b]));
        }
        k => unreachable!("all gate kinds lower to basis, got {k}"),
    }
}

/// Rewrite a circuit into the native basis; the unitary is preserved up to
/// global phase.
pub fn decompose_to_basis(circuit: &Circuit) -> Circuit {
    let mut out = Circuit::new(circuit.source_name.clone(), circuit.num_qubits, circuit.num_clbits);
    for op in &circuit.ops {
        lower(op, &mut out.ops);
    }
    out
}

/// Greedy interaction-degree placement: logical qubits sorted by multi-qubit
/// gate incidence take physical qubits in BFS order from the highest-degree
/// physical qubit.
pub fn initial_layout(circuit: &Circuit, node: &QNodeSpec) -> Result<Layout, TranspileError> {
    if circuit.num_qubits > node.num_qubits {
        return Err(TranspileError::Capacity {
            required: circuit.num_qubits,
            available: node.num_qubits,
            node: node.name.clone(),
        });
    }
    let mut incidence = vec![0usize; circuit.num_qubits];
    for op in &circuit.ops {
        if !op.kind.is_barrier() && op.qubits.len() >= 2 {
            for &q in &op.qubits {
                incidence[q] += 1;
            }
        }
    }
    let mut logical: Vec<usize> = (0..circuit.num_qubits).collect();
    logical.sort_by_key(|&q| (std::cmp::Reverse(incidence[q]), q));

    // BFS over the coupling graph, seeded at the max-degree physical qubit.
    let start = (0..node.num_qubits)
        .max_by_key(|&p| (node.adjacency[p].len(), std::cmp::Reverse(p)))
        .unwrap_or(0);
    let mut order = Vec::with_capacity(node.num_qubits);
    let mut visited = vec![false; node.num_qubits];
    let mut queue = VecDeque::from([start]);
    visited[start] = true;
    while order.len() < circuit.num_qubits {
        match queue.pop_front() {
            Some(p) => {
                order.push(p);
                for &nb in &node.adjacency[p] {
                    if !visited[nb] {
                        visited[nb] = true;
                        queue.push_back(nb);
                    }
                }
            }
            None => {
                // Disconnected remainder: continue from the lowest untouched index.
                if let Some(p) = (0..node.num_qubits).find(|&p| !visited[p]) {
                    visited[p] = true;
                    queue.push_back(p);
                } else {
                    break;
                }
            }
        }
    }

    let mut logical_to_physical = vec![usize::MAX; circuit.num_qubits];
    for (slot, &l) in logical.iter().enumerate() {
        logical_to_physical[l] = order[slot];
    }
    Ok(Layout { logical_to_physical })
}

/// Lowest-index shortest path between two physical qubits. `dist` is BFS
/// distance from `to`, so walking greedily downhill from `from` is optimal.
fn shortest_path(node: &QNodeSpec, from: usize, to: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; node.num_qubits];
    let mut queue = VecDeque::from([to]);
    dist[to] = 0;
    while let Some(v) = queue.pop_front() {
        for &w in &node.adjacency[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    let mut path = vec![from];
    let mut cur = from;
    while cur != to {
        let next = node.adjacency[cur]
            .iter()
            .copied()
            .find(|&nb| dist[nb] == dist[cur] - 1)
            .expect("coupling graph is connected");
        path.push(next);
        cur = next;
    }
    path
}

/// Route a basis-form circuit under the given placement. Every emitted cx
/// acts on a coupled pair; the running permutation absorbs inserted SWAPs.
pub fn route(circuit: &Circuit, layout: &Layout, node: &QNodeSpec) -> TranspiledCircuit {
    let mut perm = layout.logical_to_physical.clone();
    let mut ops: Vec<GateOp> = Vec::with_capacity(circuit.ops.len());
    let mut swap_count = 0usize;

    let mut phys_to_logical = vec![usize::MAX; node.num_qubits];
    for (l, &p) in perm.iter().enumerate() {
        phys_to_logical[p] = l;
    }

    let emit_swap = |ops: &mut Vec<GateOp>,
                         perm: &mut Vec<usize>,
                         phys_to_logical: &mut Vec<usize>,
                         a: usize,
                         b: usize| {
        ops.push(GateOp::gate(GateKind::Cx, vec![a, b]));
        ops.push(GateOp::gate(GateKind::Cx, vec![b, a]));
        ops.push(GateOp::gate(GateKind::Cx, vec![a, b]));
        let (la, lb) = (phys_to_logical[a], phys_to_logical[b]);
        if la != usize::MAX {
            perm[la] = b;
        }
        if lb != usize::MAX {
            perm[lb] = a;
        }
        phys_to_logical.swap(a, b);
    };

    for op in &circuit.ops {
        match op.kind {
            GateKind::Cx => {
                let (mut p1, p2) = (perm[op.qubits[0]], perm[op.qubits[1]]);
                if !node.is_coupled(p1, p2) {
                    // Move the control along the shortest path until adjacent
                    // to the target.
                    let path = shortest_path(node, p1, p2);
                    for win in path.windows(2).take(path.len() - 2) {
                        emit_swap(&mut ops, &mut perm, &mut phys_to_logical, win[0], win[1]);
                        swap_count += 1;
                    }
                    p1 = path[path.len() - 2];
                }
                ops.push(GateOp::gate(GateKind::Cx, vec![p1, perm[op.qubits[1]]]));
                debug_assert_eq!(perm[op.qubits[1]], p2);
            }
            GateKind::Barrier => {
                ops.push(GateOp::barrier(op.qubits.iter().map(|&q| perm[q]).collect()));
            }
            GateKind::Measure => {
                let mut m = op.clone();
                m.qubits = vec![perm[op.qubits[0]]];
                ops.push(m);
            }
            _ => {
                let mut g = op.clone();
                g.qubits = vec![perm[op.qubits[0]]];
                ops.push(g);
            }
        }
    }

    let mut tc = TranspiledCircuit {
        node_name: node.name.clone(),
        ops,
        layout: layout.clone(),
        final_layout: Layout { logical_to_physical: perm },
        swap_count,
        g1_t: 0,
        g2_t: 0,
        measures_t: 0,
    };
    tc.recount();
    tc
}

/// Cancel adjacent self-inverse pairs (x.x, cx.cx on identical operands) and
/// merge consecutive rz rotations on the same qubit. Runs to a fixpoint.
pub fn peephole(ops: Vec<GateOp>) -> Vec<GateOp> {
    let mut ops = ops;
    loop {
        let (next, changed) = peephole_pass(ops);
        ops = next;
        if !changed {
            return ops;
        }
    }
}

fn peephole_pass(ops: Vec<GateOp>) -> (Vec<GateOp>, bool) {
    use std::collections::HashMap;
    let mut out: Vec<Option<GateOp>> = Vec::with_capacity(ops.len());
    let mut last_on: HashMap<usize, usize> = HashMap::new();
    let mut changed = false;

    for op in ops {
        let prev = if op.kind.is_barrier() {
            None
        } else {
            // Candidate only when the same op was the latest on all operands.
            let mut idxs = op.qubits.iter().map(|q| last_on.get(q).copied());
            let first = idxs.next().flatten();
            if first.is_some() && idxs.all(|i| i == first) {
                first
            } else {
                None
            }
        };

        let mut drop_current = false;
        if let Some(j) = prev {
            if let Some(prev_op) = out[j].clone() {
                match (op.kind, prev_op.kind) {
                    (GateKind::X, GateKind::X) if prev_op.qubits == op.qubits => {
                        out[j] = None;
                        for q in &op.qubits {
                            last_on.remove(q);
                        }
                        drop_current = true;
                        changed = true;
                    }
                    (GateKind::Cx, GateKind::Cx) if prev_op.qubits == op.qubits => {
                        out[j] = None;
                        for q in &op.qubits {
                            last_on.remove(q);
                        }
                        drop_current = true;
                        changed = true;
                    }
                    (GateKind::Rz, GateKind::Rz) if prev_op.qubits == op.qubits => {
                        let merged = prev_op.params[0] + op.params[0];
                        if merged == 0.0 {
                            out[j] = None;
                            last_on.remove(&op.qubits[0]);
                        } else {
                            out[j] = Some(GateOp::gate_with_params(
                                GateKind::Rz,
                                vec![merged],
                                op.qubits.clone(),
                            ));
                        }
                        drop_current = true;
                        changed = true;
                    }
                    _ => {}
                }
            }
        }
        if !drop_current {
            let idx = out.len();
            for &q in &op.qubits {
                last_on.insert(q, idx);
            }
            out.push(Some(op));
        }
    }
    (out.into_iter().flatten().collect(), changed)
}

/// Full pipeline: decompose, place, route, and clean up.
pub fn transpile(circuit: &Circuit, node: &QNodeSpec) -> Result<TranspiledCircuit, TranspileError> {
    let basis = decompose_to_basis(circuit);
    let layout = initial_layout(&basis, node)?;
    let mut tc = route(&basis, &layout, node);
    tc.ops = peephole(std::mem::take(&mut tc.ops));
    tc.recount();
    Ok(tc)
}
