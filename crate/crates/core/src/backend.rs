//! Quantum node models built from calibration files.
//!
//! A node is a coupling graph plus per-gate/per-qubit error and duration
//! maps. Every node exposes the same native basis {rz, sx, x, cx, measure};
//! rz is virtual (zero duration, zero error). Calibration files are JSON,
//! one file per node, listed by a fleet manifest (a JSON array of paths
//! resolved relative to the manifest's directory).

use crate::circuit::GateKind;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use thiserror::Error;

/// Native basis shared by all nodes.
pub const BASIS_GATES: [GateKind; 5] =
    [GateKind::Rz, GateKind::Sx, GateKind::X, GateKind::Cx, GateKind::Measure];

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("schema error in {path}: {msg}")]
    Schema { path: String, msg: String },
    #[error("consistency error in {path}: {msg}")]
    Consistency { path: String, msg: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One gate calibration record in the file format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateEntry {
    pub qubits: Vec<usize>,
    pub error: f64,
    pub duration_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReadoutEntry {
    pub qubit: usize,
    pub error: f64,
    pub duration_s: f64,
}

/// On-disk calibration schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationFile {
    pub name: String,
    pub num_qubits: usize,
    pub coupling: Vec<[usize; 2]>,
    pub gates: GateTables,
    pub readout: Vec<ReadoutEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateTables {
    pub sx: Vec<GateEntry>,
    pub x: Vec<GateEntry>,
    pub rz: Vec<GateEntry>,
    pub cx: Vec<GateEntry>,
}

/// Validated, immutable device model.
#[derive(Debug, Clone, PartialEq)]
pub struct QNodeSpec {
    pub name: String,
    pub num_qubits: usize,
    /// Undirected edges, normalized (low, high), sorted.
    pub coupling: Vec<(usize, usize)>,
    /// Sorted neighbor lists derived from `coupling`.
    pub adjacency: Vec<Vec<usize>>,
    /// Per-qubit error for rz / sx / x, indexed by qubit.
    pub rz_error: Vec<f64>,
    pub sx_error: Vec<f64>,
    pub x_error: Vec<f64>,
    pub rz_duration: Vec<f64>,
    pub sx_duration: Vec<f64>,
    pub x_duration: Vec<f64>,
    /// Per-edge cx calibration, keyed by normalized edge.
    pub cx_error: HashMap<(usize, usize), f64>,
    pub cx_duration: HashMap<(usize, usize), f64>,
    pub readout_error: Vec<f64>,
    pub readout_duration: Vec<f64>,
}

impl QNodeSpec {
    pub fn is_coupled(&self, a: usize, b: usize) -> bool {
        let key = (a.min(b), a.max(b));
        self.cx_error.contains_key(&key)
    }

    /// Error probability for a basis op on the given qubits. Measures use
    /// readout error; cx lookups are direction-insensitive.
    pub fn gate_error(&self, kind: GateKind, qubits: &[usize]) -> Option<f64> {
        match kind {
            GateKind::Rz => self.rz_error.get(qubits[0]).copied(),
            GateKind::Sx => self.sx_error.get(qubits[0]).copied(),
            GateKind::X => self.x_error.get(qubits[0]).copied(),
            GateKind::Measure => self.readout_error.get(qubits[0]).copied(),
            GateKind::Cx => {
                let key = (qubits[0].min(qubits[1]), qubits[0].max(qubits[1]));
                self.cx_error.get(&key).copied()
            }
            _ => None,
        }
    }

    /// Duration in seconds for a basis op on the given qubits.
    pub fn gate_duration(&self, kind: GateKind, qubits: &[usize]) -> Option<f64> {
        match kind {
            GateKind::Rz => self.rz_duration.get(qubits[0]).copied(),
            GateKind::Sx => self.sx_duration.get(qubits[0]).copied(),
            GateKind::X => self.x_duration.get(qubits[0]).copied(),
            GateKind::Measure => self.readout_duration.get(qubits[0]).copied(),
            GateKind::Cx => {
                let key = (qubits[0].min(qubits[1]), qubits[0].max(qubits[1]));
                self.cx_duration.get(&key).copied()
            }
            _ => None,
        }
    }

    fn all_errors(&self) -> impl Iterator<Item = f64> + '_ {
        self.rz_error
            .iter()
            .chain(self.sx_error.iter())
            .chain(self.x_error.iter())
            .chain(self.readout_error.iter())
            .copied()
            .chain(self.cx_error.values().copied())
    }

    fn all_durations(&self) -> impl Iterator<Item = f64> + '_ {
        self.rz_duration
            .iter()
            .chain(self.sx_duration.iter())
            .chain(self.x_duration.iter())
            .chain(self.readout_duration.iter())
            .copied()
            .chain(self.cx_duration.values().copied())
    }

    /// Mean over the node's single-qubit entries (rz, sx, x pooled; the
    /// zero-error virtual rz entries count).
    pub fn mean_1q_error(&self) -> f64 {
        mean(self.rz_error.iter().chain(&self.sx_error).chain(&self.x_error).copied())
    }

    pub fn mean_2q_error(&self) -> f64 {
        mean(self.cx_error.values().copied())
    }

    pub fn mean_readout_error(&self) -> f64 {
        mean(self.readout_error.iter().copied())
    }

    pub fn mean_1q_duration(&self) -> f64 {
        mean(self.rz_duration.iter().chain(&self.sx_duration).chain(&self.x_duration).copied())
    }

    pub fn mean_cx_duration(&self) -> f64 {
        mean(self.cx_duration.values().copied())
    }
}

fn mean(it: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut count) = (0.0, 0usize);
    for v in it {
        sum += v;
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Pooled mean over every error entry of the node, all categories including
/// readout. This is the statistic the smallest-error-first baseline ranks by.
pub fn mean_gate_error(node: &QNodeSpec) -> f64 {
    mean(node.all_errors())
}

/// Pooled mean over every duration entry, all categories including readout.
pub fn mean_gate_duration(node: &QNodeSpec) -> f64 {
    mean(node.all_durations())
}

/// Dynamic per-node scheduling state, owned by one environment instance.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QNodeState {
    /// Simulation time at which the node next becomes free.
    pub next_available_time: f64,
    /// Tasks assigned but not yet finished at the current clock.
    pub queue_length: usize,
    /// Tasks accepted by this node (counted at assignment; execution is
    /// resolved deterministically at that point).
    pub completed: usize,
}

/// Ordered node list (index = action id) plus parallel dynamic state.
/// Cloning shares the immutable specs and gives the clone fresh state.
#[derive(Debug, Clone)]
pub struct Fleet {
    pub nodes: Arc<Vec<QNodeSpec>>,
    pub states: Vec<QNodeState>,
}

impl Fleet {
    pub fn new(nodes: Vec<QNodeSpec>) -> Self {
        let states = vec![QNodeState::default(); nodes.len()];
        Fleet { nodes: Arc::new(nodes), states }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn reset_states(&mut self) {
        for s in &mut self.states {
            *s = QNodeState::default();
        }
    }

    /// Load a fleet from a manifest: a JSON array of calibration file paths,
    /// resolved relative to the manifest's directory.
    pub fn load_manifest(path: &Path) -> Result<Fleet, CalibrationError> {
        let text = std::fs::read_to_string(path).map_err(|source| CalibrationError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let entries: Vec<String> =
            serde_json::from_str(&text).map_err(|e| CalibrationError::Schema {
                path: path.display().to_string(),
                msg: format!("fleet manifest must be a JSON array of paths: {e}"),
            })?;
        if entries.is_empty() {
            return Err(CalibrationError::Schema {
                path: path.display().to_string(),
                msg: "fleet manifest lists no nodes".into(),
            });
        }
        let base = path.parent().unwrap_or(Path::new("."));
        let mut nodes = Vec::with_capacity(entries.len());
        for entry in entries {
            let p: PathBuf = if Path::new(&entry).is_absolute() {
                PathBuf::from(&entry)
            } else {
                base.join(&entry)
            };
            nodes.push(load_calibration(&p)?);
        }
        Ok(Fleet::new(nodes))
    }
}

/// Fleet-level category means used by the expected-fidelity baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FleetAverages {
    pub mean_1q_error: f64,
    pub mean_2q_error: f64,
    pub mean_readout_error: f64,
    pub mean_1q_duration: f64,
    pub mean_2q_duration: f64,
}

/// Arithmetic means over all (gate, qubit-tuple) entries per category across
/// the whole fleet. One-qubit pools rz, sx, and x entries.
pub fn fleet_averages(fleet: &Fleet) -> FleetAverages {
    let nodes = fleet.nodes.as_slice();
    FleetAverages {
        mean_1q_error: mean(nodes.iter().flat_map(|n| {
            n.rz_error.iter().chain(&n.sx_error).chain(&n.x_error).copied()
        })),
        mean_2q_error: mean(nodes.iter().flat_map(|n| n.cx_error.values().copied())),
        mean_readout_error: mean(nodes.iter().flat_map(|n| n.readout_error.iter().copied())),
        mean_1q_duration: mean(nodes.iter().flat_map(|n| {
            n.rz_duration.iter().chain(&n.sx_duration).chain(&n.x_duration).copied()
        })),
        mean_2q_duration: mean(nodes.iter().flat_map(|n| n.cx_duration.values().copied())),
    }
}

/// Load and validate one calibration file.
pub fn load_calibration(path: &Path) -> Result<QNodeSpec, CalibrationError> {
    let text = std::fs::read_to_string(path).map_err(|source| CalibrationError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file: CalibrationFile = serde_json::from_str(&text).map_err(|e| CalibrationError::Schema {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    validate_calibration(file, &path.display().to_string())
}

/// Validate an in-memory calibration record (the file loader and the fixture
/// generator both funnel through here).
pub fn validate_calibration(
    file: CalibrationFile,
    path: &str,
) -> Result<QNodeSpec, CalibrationError> {
    let schema = |msg: String| CalibrationError::Schema { path: path.to_string(), msg };
    let consistency = |msg: String| CalibrationError::Consistency { path: path.to_string(), msg };

    let n = file.num_qubits;
    if n == 0 {
        return Err(consistency("num_qubits must be positive".into()));
    }

    // Coupling graph checks: valid references, no self loops, no duplicates.
    let mut coupling: Vec<(usize, usize)> = Vec::with_capacity(file.coupling.len());
    let mut seen = BTreeSet::new();
    for [a, b] in &file.coupling {
        let (a, b) = (*a, *b);
        if a >= n || b >= n {
            return Err(consistency(format!("coupling edge ({a},{b}) references invalid qubit")));
        }
        if a == b {
            return Err(consistency(format!("coupling self-loop on qubit {a}")));
        }
        let key = (a.min(b), a.max(b));
        if !seen.insert(key) {
            return Err(consistency(format!("duplicate coupling edge ({},{})", key.0, key.1)));
        }
        coupling.push(key);
    }
    coupling.sort_unstable();

    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in &coupling {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    for neighbors in &mut adjacency {
        neighbors.sort_unstable();
    }

    // Routing requires one connected component.
    if n > 1 {
        let mut visited = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        visited[0] = true;
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for &w in &adjacency[v] {
                if !visited[w] {
                    visited[w] = true;
                    reached += 1;
                    queue.push_back(w);
                }
            }
        }
        if reached != n {
            return Err(consistency(format!(
                "coupling graph is disconnected ({reached} of {n} qubits reachable)"
            )));
        }
    }

    let check_error = |gate: &str, qubits: &[usize], e: f64| -> Result<(), CalibrationError> {
        if !(0.0..1.0).contains(&e) {
            Err(consistency(format!("{gate} error {e} on {qubits:?} outside [0,1)")))
        } else {
            Ok(())
        }
    };
    let check_duration =
        |gate: &str, qubits: &[usize], d: f64, zero_ok: bool| -> Result<(), CalibrationError> {
            let ok = if zero_ok { d >= 0.0 && d.is_finite() } else { d > 0.0 && d.is_finite() };
            if !ok {
                Err(consistency(format!("{gate} duration {d} on {qubits:?} is not positive")))
            } else {
                Ok(())
            }
        };

    let one_q_table = |entries: &[GateEntry],
                       gate: &str,
                       zero_dur_ok: bool|
     -> Result<(Vec<f64>, Vec<f64>), CalibrationError> {
        let mut errors = vec![f64::NAN; n];
        let mut durations = vec![f64::NAN; n];
        for entry in entries {
            if entry.qubits.len() != 1 {
                return Err(schema(format!("{gate} entry must name exactly one qubit")));
            }
            let q = entry.qubits[0];
            if q >= n {
                return Err(consistency(format!("{gate} entry references invalid qubit {q}")));
            }
            if !errors[q].is_nan() {
                return Err(schema(format!("duplicate {gate} entry for qubit {q}")));
            }
            check_error(gate, &entry.qubits, entry.error)?;
            check_duration(gate, &entry.qubits, entry.duration_s, zero_dur_ok)?;
            errors[q] = entry.error;
            durations[q] = entry.duration_s;
        }
        for q in 0..n {
            if errors[q].is_nan() {
                return Err(schema(format!("missing {gate} entry for qubit {q}")));
            }
        }
        Ok((errors, durations))
    };

    let (sx_error, sx_duration) = one_q_table(&file.gates.sx, "sx", false)?;
    let (x_error, x_duration) = one_q_table(&file.gates.x, "x", false)?;
    let (rz_error, rz_duration) = one_q_table(&file.gates.rz, "rz", true)?;

    let mut cx_error = HashMap::with_capacity(coupling.len());
    let mut cx_duration = HashMap::with_capacity(coupling.len());
    for entry in &file.gates.cx {
        if entry.qubits.len() != 2 {
            return Err(schema("cx entry must name exactly two qubits".into()));
        }
        let (a, b) = (entry.qubits[0], entry.qubits[1]);
        let key = (a.min(b), a.max(b));
        if !seen.contains(&key) {
            return Err(consistency(format!("cx entry ({a},{b}) is not a coupled pair")));
        }
        if cx_error.contains_key(&key) {
            return Err(schema(format!("duplicate cx entry for edge ({},{})", key.0, key.1)));
        }
        check_error("cx", &entry.qubits, entry.error)?;
        check_duration("cx", &entry.qubits, entry.duration_s, false)?;
        cx_error.insert(key, entry.error);
        cx_duration.insert(key, entry.duration_s);
    }
    for &(a, b) in &coupling {
        if !cx_error.contains_key(&(a, b)) {
            return Err(consistency(format!("coupled pair ({a},{b}) has no cx entry")));
        }
    }

    let mut readout_error = vec![f64::NAN; n];
    let mut readout_duration = vec![f64::NAN; n];
    for entry in &file.readout {
        let q = entry.qubit;
        if q >= n {
            return Err(consistency(format!("readout entry references invalid qubit {q}")));
        }
        if !readout_error[q].is_nan() {
            return Err(schema(format!("duplicate readout entry for qubit {q}")));
        }
        check_error("readout", &[q], entry.error)?;
        check_duration("readout", &[q], entry.duration_s, false)?;
        readout_error[q] = entry.error;
        readout_duration[q] = entry.duration_s;
    }
    for q in 0..n {
        if readout_error[q].is_nan() {
            return Err(schema(format!("missing readout entry for qubit {q}")));
        }
    }

    Ok(QNodeSpec {
        name: file.name,
        num_qubits: n,
        coupling,
        adjacency,
        rz_error,
        sx_error,
        x_error,
        rz_duration,
        sx_duration,
        x_duration,
        cx_error,
        cx_duration,
        readout_error,
        readout_duration,
    })
}
