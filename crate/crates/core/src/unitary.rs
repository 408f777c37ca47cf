//! Dense-matrix reference simulator.
//!
//! Builds the unitary of a small circuit by direct state-column simulation.
//! Gate matrices come straight from their textbook definitions, independent
//! of the transpiler's rewrite rules, so the two can be checked against each
//! other. Intended for verification on a handful of qubits (cost is
//! O(4^n) per gate).

use crate::circuit::{GateKind, GateOp};
use num_complex::Complex64;

type C = Complex64;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// 2x2 matrix in row-major order.
fn single_qubit_matrix(kind: GateKind, params: &[f64]) -> [[C; 2]; 2] {
    let i = c(0.0, 1.0);
    let one = c(1.0, 0.0);
    let zero = c(0.0, 0.0);
    match kind {
        GateKind::H => {
            let s = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            [[s, s], [s, -s]]
        }
        GateKind::X => [[zero, one], [one, zero]],
        GateKind::Y => [[zero, -i], [i, zero]],
        GateKind::Z => [[one, zero], [zero, -one]],
        GateKind::S => [[one, zero], [zero, i]],
        GateKind::Sdg => [[one, zero], [zero, -i]],
        GateKind::T => [[one, zero], [zero, C::from_polar(1.0, std::f64::consts::FRAC_PI_4)]],
        GateKind::Tdg => [[one, zero], [zero, C::from_polar(1.0, -std::f64::consts::FRAC_PI_4)]],
        GateKind::Sx => {
            let a = c(0.5, 0.5);
            let b = c(0.5, -0.5);
            [[a, b], [b, a]]
        }
        GateKind::Rx => {
            let t = params[0] / 2.0;
            [[c(t.cos(), 0.0), c(0.0, -t.sin())], [c(0.0, -t.sin()), c(t.cos(), 0.0)]]
        }
        GateKind::Ry => {
            let t = params[0] / 2.0;
            [[c(t.cos(), 0.0), c(-t.sin(), 0.0)], [c(t.sin(), 0.0), c(t.cos(), 0.0)]]
        }
        GateKind::Rz => {
            let t = params[0] / 2.0;
            [[C::from_polar(1.0, -t), zero], [zero, C::from_polar(1.0, t)]]
        }
        GateKind::U => {
            // U(theta, phi, lambda), the OpenQASM u3 convention.
            let (theta, phi, lambda) = (params[0], params[1], params[2]);
            let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            [
                [c(ct, 0.0), -C::from_polar(st, lambda)],
                [C::from_polar(st, phi), C::from_polar(ct, phi + lambda)],
            ]
        }
        other => panic!("not a single-qubit gate: {other}"),
    }
}

/// Apply one op to a state vector over `n` qubits (qubit 0 is the least
/// significant bit of the basis index). Barriers are identity; measures are
/// rejected.
pub fn apply_op(state: &mut [C], n: usize, op: &GateOp) {
    debug_assert_eq!(state.len(), 1 << n);
    match op.kind {
        GateKind::Barrier => {}
        GateKind::Measure => panic!("measure is not unitary"),
        GateKind::Cx => {
            let (ctrl, tgt) = (op.qubits[0], op.qubits[1]);
            for idx in 0..state.len() {
                if idx & (1 << ctrl) != 0 && idx & (1 << tgt) == 0 {
                    state.swap(idx, idx | (1 << tgt));
                }
            }
        }
        GateKind::Cz => {
            let (a, b) = (op.qubits[0], op.qubits[1]);
            for (idx, amp) in state.iter_mut().enumerate() {
                if idx & (1 << a) != 0 && idx & (1 << b) != 0 {
                    *amp = -*amp;
                }
            }
        }
        GateKind::Swap => {
            let (a, b) = (op.qubits[0], op.qubits[1]);
            for idx in 0..state.len() {
                let ba = (idx >> a) & 1;
                let bb = (idx >> b) & 1;
                if ba == 1 && bb == 0 {
                    let other = (idx & !(1 << a)) | (1 << b);
                    state.swap(idx, other);
                }
            }
        }
        GateKind::Ccx => {
            let (c1, c2, tgt) = (op.qubits[0], op.qubits[1], op.qubits[2]);
            for idx in 0..state.len() {
                if idx & (1 << c1) != 0 && idx & (1 << c2) != 0 && idx & (1 << tgt) == 0 {
                    state.swap(idx, idx | (1 << tgt));
                }
            }
        }
        kind => {
            let m = single_qubit_matrix(kind, &op.params);
            let q = op.qubits[0];
            let bit = 1 << q;
            for idx in 0..state.len() {
                if idx & bit == 0 {
                    let a = state[idx];
                    let b = state[idx | bit];
                    state[idx] = m[0][0] * a + m[0][1] * b;
                    state[idx | bit] = m[1][0] * a + m[1][1] * b;
                }
            }
        }
    }
}

/// Full 2^n x 2^n unitary of an op sequence, stored column-major as
/// `cols[j][i] = U_ij` (column j is the image of basis state j).
pub fn unitary_of(ops: &[GateOp], n: usize) -> Vec<Vec<C>> {
    let dim = 1usize << n;
    let mut cols = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut state = vec![c(0.0, 0.0); dim];
        state[j] = c(1.0, 0.0);
        for op in ops {
            apply_op(&mut state, n, op);
        }
        cols.push(state);
    }
    cols
}

/// |tr(A^dagger B)| / dim for two same-shape column-major matrices: 1.0 iff
/// they agree up to a global phase.
pub fn phase_invariant_overlap(a: &[Vec<C>], b: &[Vec<C>]) -> f64 {
    let dim = a.len();
    let mut tr = c(0.0, 0.0);
    for j in 0..dim {
        for i in 0..a[j].len() {
            tr += a[j][i].conj() * b[j][i];
        }
    }
    tr.norm() / dim as f64
}
