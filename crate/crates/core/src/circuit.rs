//! Circuit intermediate representation: gate ops, dependency DAG, scheduling
//! features, and weighted critical paths.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Gate vocabulary accepted by the parser. `Rz`, `Sx`, `X`, `Cx`, `Measure`
/// and `Barrier` are also the transpiler's native set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    Sx,
    Rx,
    Ry,
    Rz,
    U,
    Cx,
    Cz,
    Swap,
    Ccx,
    Barrier,
    Measure,
}

impl GateKind {
    pub fn parse(name: &str) -> Option<GateKind> {
        Some(match name {
            "h" => GateKind::H,
            "x" => GateKind::X,
            "y" => GateKind::Y,
            "z" => GateKind::Z,
            "s" => GateKind::S,
            "sdg" => GateKind::Sdg,
            "t" => GateKind::T,
            "tdg" => GateKind::Tdg,
            "sx" => GateKind::Sx,
            "rx" => GateKind::Rx,
            "ry" => GateKind::Ry,
            "rz" => GateKind::Rz,
            "u" | "u3" => GateKind::U,
            "cx" => GateKind::Cx,
            "cz" => GateKind::Cz,
            "swap" => GateKind::Swap,
            "ccx" => GateKind::Ccx,
            "barrier" => GateKind::Barrier,
            "measure" => GateKind::Measure,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::Sx => "sx",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::U => "u",
            GateKind::Cx => "cx",
            GateKind::Cz => "cz",
            GateKind::Swap => "swap",
            GateKind::Ccx => "ccx",
            GateKind::Barrier => "barrier",
            GateKind::Measure => "measure",
        }
    }

    /// Number of qubit operands, `None` for barrier (variadic).
    pub fn qubit_arity(&self) -> Option<usize> {
        Some(match self {
            GateKind::Cx | GateKind::Cz | GateKind::Swap => 2,
            GateKind::Ccx => 3,
            GateKind::Barrier => return None,
            _ => 1,
        })
    }

    pub fn param_arity(&self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz => 1,
            GateKind::U => 3,
            _ => 0,
        }
    }

    pub fn is_barrier(&self) -> bool {
        matches!(self, GateKind::Barrier)
    }

    pub fn is_measure(&self) -> bool {
        matches!(self, GateKind::Measure)
    }

    /// Single-qubit unitary gate (excludes measure and barrier).
    pub fn is_one_qubit_gate(&self) -> bool {
        !self.is_barrier() && !self.is_measure() && self.qubit_arity() == Some(1)
    }

    pub fn is_two_qubit_gate(&self) -> bool {
        self.qubit_arity() == Some(2)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One operation of a circuit: a gate, a barrier, or a measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOp {
    pub kind: GateKind,
    /// Angles in radians, length fixed by [`GateKind::param_arity`].
    pub params: Vec<f64>,
    /// Logical qubit operands, distinct within one op.
    pub qubits: Vec<usize>,
    /// Classical bit targets (measure only).
    pub clbits: Vec<usize>,
}

impl GateOp {
    pub fn gate(kind: GateKind, qubits: Vec<usize>) -> Self {
        GateOp { kind, params: Vec::new(), qubits, clbits: Vec::new() }
    }

    pub fn gate_with_params(kind: GateKind, params: Vec<f64>, qubits: Vec<usize>) -> Self {
        GateOp { kind, params, qubits, clbits: Vec::new() }
    }

    pub fn measure(qubit: usize, clbit: usize) -> Self {
        GateOp { kind: GateKind::Measure, params: Vec::new(), qubits: vec![qubit], clbits: vec![clbit] }
    }

    pub fn barrier(qubits: Vec<usize>) -> Self {
        GateOp { kind: GateKind::Barrier, params: Vec::new(), qubits, clbits: Vec::new() }
    }
}

/// A parsed logical circuit: ordered op list over `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub source_name: String,
    pub num_qubits: usize,
    pub num_clbits: usize,
    pub ops: Vec<GateOp>,
}

impl Circuit {
    pub fn new(source_name: impl Into<String>, num_qubits: usize, num_clbits: usize) -> Self {
        Circuit { source_name: source_name.into(), num_qubits, num_clbits, ops: Vec::new() }
    }

    pub fn push(&mut self, op: GateOp) {
        self.ops.push(op);
    }

    /// Serialize back to OpenQASM 2.0 text. Parsing the output reproduces the
    /// circuit exactly (float params print in shortest round-trip form).
    pub fn to_qasm(&self) -> String {
        let mut out = String::new();
        out.push_str("OPENQASM 2.0;\n");
        out.push_str("include \"qelib1.inc\";\n");
        out.push_str(&format!("qreg q[{}];\n", self.num_qubits));
        if self.num_clbits > 0 {
            out.push_str(&format!("creg c[{}];\n", self.num_clbits));
        }
        for op in &self.ops {
            match op.kind {
                GateKind::Measure => {
                    out.push_str(&format!("measure q[{}] -> c[{}];\n", op.qubits[0], op.clbits[0]));
                }
                GateKind::Barrier => {
                    let args: Vec<String> = op.qubits.iter().map(|q| format!("q[{q}]")).collect();
                    out.push_str(&format!("barrier {};\n", args.join(",")));
                }
                _ => {
                    let args: Vec<String> = op.qubits.iter().map(|q| format!("q[{q}]")).collect();
                    if op.params.is_empty() {
                        out.push_str(&format!("{} {};\n", op.kind, args.join(",")));
                    } else {
                        let ps: Vec<String> = op.params.iter().map(|p| format!("{p}")).collect();
                        out.push_str(&format!("{}({}) {};\n", op.kind, ps.join(","), args.join(",")));
                    }
                }
            }
        }
        out
    }
}

/// Gate dependency DAG over op indices. Node `i` is `circuit.ops[i]`; an edge
/// u -> v means v reads a qubit last written by u.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitDag {
    pub num_nodes: usize,
    pub edges: Vec<(usize, usize)>,
    pub preds: Vec<Vec<usize>>,
    pub succs: Vec<Vec<usize>>,
}

impl CircuitDag {
    pub fn sources(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_nodes).filter(|&v| self.preds[v].is_empty())
    }

    pub fn sinks(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_nodes).filter(|&v| self.succs[v].is_empty())
    }
}

/// Build the dependency DAG: each op depends on the latest prior op touching
/// any of its qubits. Op order is already a topological order.
pub fn build_dag(circuit: &Circuit) -> CircuitDag {
    let n = circuit.ops.len();
    let mut last_on_qubit: Vec<Option<usize>> = vec![None; circuit.num_qubits];
    let mut edges = Vec::new();
    let mut preds = vec![Vec::new(); n];
    let mut succs = vec![Vec::new(); n];
    for (i, op) in circuit.ops.iter().enumerate() {
        let mut seen_pred: Option<usize> = None;
        for &q in &op.qubits {
            if let Some(u) = last_on_qubit[q] {
                // Dedup edges when two operands share the same predecessor.
                if seen_pred != Some(u) && !preds[i].contains(&u) {
                    edges.push((u, i));
                    preds[i].push(u);
                    succs[u].push(i);
                }
                seen_pred = Some(u);
            }
            last_on_qubit[q] = Some(i);
        }
    }
    CircuitDag { num_nodes: n, edges, preds, succs }
}

/// Pre-transpilation scheduling features of a task circuit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitFeatures {
    /// Qubit count.
    pub qubits: usize,
    /// Layer count; barriers synchronize but occupy no layer.
    pub depth: usize,
    /// Single-qubit gate count (measures and barriers excluded).
    pub g1: usize,
    /// Two-qubit gate count.
    pub g2: usize,
    /// Gates on three or more qubits (ccx before decomposition).
    pub multi: usize,
    pub measures: usize,
    /// Shot count attached by the workload generator.
    pub shots: u64,
}

/// Extract features; depth equals the longest non-barrier node-count path in
/// the dependency DAG (measures included, barriers depth-transparent).
pub fn extract_features(circuit: &Circuit, shots: u64) -> CircuitFeatures {
    let mut front = vec![0usize; circuit.num_qubits];
    let mut depth = 0usize;
    let mut g1 = 0;
    let mut g2 = 0;
    let mut multi = 0;
    let mut measures = 0;
    for op in &circuit.ops {
        let start = op.qubits.iter().map(|&q| front[q]).max().unwrap_or(0);
        let layer = if op.kind.is_barrier() { start } else { start + 1 };
        for &q in &op.qubits {
            front[q] = layer;
        }
        depth = depth.max(layer);
        match op.kind {
            GateKind::Barrier => {}
            GateKind::Measure => measures += 1,
            GateKind::Ccx => multi += 1,
            k if k.is_two_qubit_gate() => g2 += 1,
            _ => g1 += 1,
        }
    }
    CircuitFeatures { qubits: circuit.num_qubits, depth, g1, g2, multi, measures, shots }
}

#[derive(Debug, Error, PartialEq)]
pub enum CriticalPathError {
    #[error("missing weight for op {index} ({kind})")]
    MissingWeight { index: usize, kind: GateKind },
}

/// Maximum-total-weight source-to-sink path through the dependency DAG.
///
/// `weight` must return a duration for every non-barrier node; barriers weigh
/// zero. Ties break toward the lexicographically smallest node-index
/// sequence. Returns the path (op indices) and its total weight.
pub fn critical_path<F>(
    circuit: &Circuit,
    dag: &CircuitDag,
    weight: F,
) -> Result<(Vec<usize>, f64), CriticalPathError>
where
    F: Fn(usize, &GateOp) -> Option<f64>,
{
    let n = dag.num_nodes;
    if n == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let mut w = vec![0.0f64; n];
    for (i, op) in circuit.ops.iter().enumerate() {
        if op.kind.is_barrier() {
            continue;
        }
        w[i] = weight(i, op)
            .ok_or(CriticalPathError::MissingWeight { index: i, kind: op.kind })?;
    }
    // best[v] = max path weight from v to any sink. Ops are in topological
    // order, so a reverse scan suffices.
    let mut best = vec![0.0f64; n];
    for v in (0..n).rev() {
        let tail = dag.succs[v].iter().map(|&s| best[s]).fold(f64::NEG_INFINITY, f64::max);
        best[v] = w[v] + if tail.is_finite() { tail } else { 0.0 };
    }
    let total = dag
        .sources()
        .map(|s| best[s])
        .fold(f64::NEG_INFINITY, f64::max);
    // Walk from the smallest-index source achieving the optimum, always
    // taking the smallest-index successor with the maximum tail weight.
    // Comparisons use the stored DP values, never recomputed arithmetic.
    let start = dag
        .sources()
        .find(|&s| best[s] == total)
        .expect("some source attains the maximum");
    let mut path = vec![start];
    let mut cur = start;
    while !dag.succs[cur].is_empty() {
        let mut sorted = dag.succs[cur].clone();
        sorted.sort_unstable();
        let mut next = sorted[0];
        for &s in &sorted[1..] {
            if best[s] > best[next] {
                next = s;
            }
        }
        path.push(next);
        cur = next;
    }
    Ok((path, total))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ghz3() -> Circuit {
        let mut c = Circuit::new("ghz3", 3, 0);
        c.push(GateOp::gate(GateKind::H, vec![0]));
        c.push(GateOp::gate(GateKind::Cx, vec![0, 1]));
        c.push(GateOp::gate(GateKind::Cx, vec![1, 2]));
        c
    }

    #[test]
    fn dag_shared_qubit_chain() {
        let dag = build_dag(&ghz3());
        assert_eq!(dag.num_nodes, 3);
        assert_eq!(dag.edges, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn dag_empty_circuit() {
        let dag = build_dag(&Circuit::new("empty", 2, 0));
        assert_eq!(dag.num_nodes, 0);
        assert!(dag.edges.is_empty());
    }

    #[test]
    fn dag_parallel_ops_no_edges() {
        let mut c = Circuit::new("par", 2, 0);
        c.push(GateOp::gate(GateKind::H, vec![0]));
        c.push(GateOp::gate(GateKind::H, vec![1]));
        let dag = build_dag(&c);
        assert_eq!(dag.num_nodes, 2);
        assert!(dag.edges.is_empty());
    }

    #[test]
    fn dag_dedups_double_dependency() {
        // cx(0,1) then cx(1,0): a single edge, not one per shared qubit.
        let mut c = Circuit::new("dd", 2, 0);
        c.push(GateOp::gate(GateKind::Cx, vec![0, 1]));
        c.push(GateOp::gate(GateKind::Cx, vec![1, 0]));
        let dag = build_dag(&c);
        assert_eq!(dag.edges, vec![(0, 1)]);
    }

    #[test]
    fn features_ghz3() {
        let f = extract_features(&ghz3(), 1024);
        assert_eq!((f.qubits, f.depth, f.g1, f.g2, f.measures), (3, 3, 1, 2, 0));
        assert_eq!(f.shots, 1024);
    }

    #[test]
    fn features_bell_with_measures() {
        let mut c = Circuit::new("bell", 2, 2);
        c.push(GateOp::gate(GateKind::H, vec![0]));
        c.push(GateOp::gate(GateKind::Cx, vec![0, 1]));
        c.push(GateOp::measure(0, 0));
        c.push(GateOp::measure(1, 1));
        let f = extract_features(&c, 1);
        assert_eq!((f.qubits, f.depth, f.g1, f.g2, f.measures), (2, 3, 1, 1, 2));
    }

    #[test]
    fn features_empty() {
        let f = extract_features(&Circuit::new("e", 4, 0), 0);
        assert_eq!((f.qubits, f.depth, f.g1, f.g2, f.measures), (4, 0, 0, 0, 0));
    }

    #[test]
    fn features_barrier_transparent() {
        let mut c = Circuit::new("b", 2, 0);
        c.push(GateOp::gate(GateKind::H, vec![0]));
        c.push(GateOp::barrier(vec![0, 1]));
        c.push(GateOp::gate(GateKind::X, vec![1]));
        let f = extract_features(&c, 1);
        // Barrier forces x after h in time but occupies no layer itself.
        assert_eq!(f.depth, 2);
        assert_eq!(f.g1, 2);
    }

    #[test]
    fn features_ccx_counted_separately() {
        let mut c = Circuit::new("t", 3, 0);
        c.push(GateOp::gate(GateKind::Ccx, vec![0, 1, 2]));
        let f = extract_features(&c, 1);
        assert_eq!((f.g1, f.g2, f.multi), (0, 0, 1));
    }

    #[test]
    fn critical_path_single_chain() {
        let c = ghz3();
        let dag = build_dag(&c);
        let (path, total) = critical_path(&c, &dag, |_, op| match op.kind {
            GateKind::H => Some(35e-9),
            GateKind::Cx => Some(300e-9),
            _ => None,
        })
        .unwrap();
        assert_eq!(path, vec![0, 1, 2]);
        assert!((total - 635e-9).abs() < 1e-18);
    }

    #[test]
    fn critical_path_width_does_not_add() {
        let mut c = Circuit::new("par", 2, 0);
        c.push(GateOp::gate(GateKind::H, vec![0]));
        c.push(GateOp::gate(GateKind::H, vec![1]));
        let dag = build_dag(&c);
        let (path, total) = critical_path(&c, &dag, |_, _| Some(35e-9)).unwrap();
        assert_eq!(path, vec![0]);
        assert!((total - 35e-9).abs() < 1e-18);
    }

    #[test]
    fn critical_path_missing_weight() {
        let c = ghz3();
        let dag = build_dag(&c);
        let err = critical_path(&c, &dag, |_, op| {
            (op.kind != GateKind::Cx).then_some(1.0)
        })
        .unwrap_err();
        assert_eq!(err, CriticalPathError::MissingWeight { index: 1, kind: GateKind::Cx });
    }

    #[test]
    fn critical_path_lexicographic_tie_break() {
        // Two parallel equal chains: 0->2 and 1->3; prefer [0, 2].
        let mut c = Circuit::new("tie", 2, 0);
        c.push(GateOp::gate(GateKind::X, vec![0]));
        c.push(GateOp::gate(GateKind::X, vec![1]));
        c.push(GateOp::gate(GateKind::X, vec![0]));
        c.push(GateOp::gate(GateKind::X, vec![1]));
        let dag = build_dag(&c);
        let (path, total) = critical_path(&c, &dag, |_, _| Some(2.0)).unwrap();
        assert_eq!(path, vec![0, 2]);
        assert_eq!(total, 4.0);
    }

    #[test]
    fn qasm_serialization_shape() {
        let mut c = Circuit::new("bell", 2, 2);
        c.push(GateOp::gate(GateKind::H, vec![0]));
        c.push(GateOp::gate_with_params(GateKind::Rz, vec![std::f64::consts::FRAC_PI_2], vec![1]));
        c.push(GateOp::measure(0, 0));
        let text = c.to_qasm();
        assert!(text.contains("qreg q[2];"));
        assert!(text.contains("creg c[2];"));
        assert!(text.contains("rz(1.5707963267948966) q[1];"));
        assert!(text.contains("measure q[0] -> c[0];"));
    }
}
