//! Task workload generation.
//!
//! A workload is a stream of tasks: circuits sampled uniformly from a QASM
//! corpus, exponential interarrival gaps (Poisson arrivals), and shot counts
//! drawn from a configured choice set. [`circuitgen`] provides the parametric
//! benchmark generators behind the bundled corpus.

use crate::circuit::{extract_features, Circuit, CircuitFeatures};
use crate::qasm::{parse_qasm, ParseError};
use rand::prelude::IndexedRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WorkloadError {
    #[error("corpus directory '{0}' contains no .qasm files")]
    EmptyCorpus(String),
    #[error("failed to parse corpus file '{file}': {source}")]
    Parse {
        file: String,
        #[source]
        source: ParseError,
    },
    #[error("duplicate circuit name '{0}' in corpus")]
    DuplicateName(String),
    #[error("io error on '{path}': {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid manifest: {0}")]
    InvalidManifest(String),
}

/// One unit of quantum work: a circuit plus arrival time and shot count.
#[derive(Debug, Clone)]
pub struct QTask {
    pub id: u64,
    /// Arrival time in simulated seconds.
    pub arrival: f64,
    pub circuit: Arc<Circuit>,
    pub features: CircuitFeatures,
    pub shots: u64,
}

/// Workload recipe, serialized as the workload manifest JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorkloadManifest {
    pub corpus_dir: String,
    /// Tasks per episode.
    pub n_tasks: usize,
    /// Poisson arrival rate, tasks per simulated second.
    pub arrival_rate: f64,
    pub shots_choices: Vec<u64>,
    pub seed: u64,
    /// Largest pre-transpilation depth observed in the corpus.
    #[serde(default)]
    pub d_corpus_max: usize,
    /// Largest pre-transpilation g1+g2 observed in the corpus.
    #[serde(default)]
    pub g_corpus_max: usize,
}

impl WorkloadManifest {
    pub fn validate(&self) -> Result<(), WorkloadError> {
        if self.n_tasks == 0 {
            return Err(WorkloadError::InvalidManifest("n_tasks must be positive".into()));
        }
        if !(self.arrival_rate > 0.0) {
            return Err(WorkloadError::InvalidManifest("arrival_rate must be positive".into()));
        }
        if self.shots_choices.is_empty() {
            return Err(WorkloadError::InvalidManifest("shots_choices must be non-empty".into()));
        }
        Ok(())
    }
}

/// Parsed corpus: circuits sorted by file name for stable indexing.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub circuits: Vec<Arc<Circuit>>,
}

impl Corpus {
    pub fn load(dir: &Path) -> Result<Corpus, WorkloadError> {
        let entries = std::fs::read_dir(dir).map_err(|source| WorkloadError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        let mut files: Vec<_> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("qasm"))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(WorkloadError::EmptyCorpus(dir.display().to_string()));
        }
        let mut circuits = Vec::with_capacity(files.len());
        let mut names = std::collections::BTreeSet::new();
        for path in files {
            let name = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("circuit")
                .to_string();
            if !names.insert(name.clone()) {
                return Err(WorkloadError::DuplicateName(name));
            }
            let text = std::fs::read_to_string(&path).map_err(|source| WorkloadError::Io {
                path: path.display().to_string(),
                source,
            })?;
            let circuit = parse_qasm(&text, &name).map_err(|source| WorkloadError::Parse {
                file: path.display().to_string(),
                source,
            })?;
            circuits.push(Arc::new(circuit));
        }
        Ok(Corpus { circuits })
    }

    pub fn from_circuits(circuits: Vec<Circuit>) -> Corpus {
        Corpus { circuits: circuits.into_iter().map(Arc::new).collect() }
    }

    pub fn len(&self) -> usize {
        self.circuits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.circuits.is_empty()
    }

    /// Largest observed (depth, g1+g2) over the corpus.
    pub fn observed_maxima(&self) -> (usize, usize) {
        let mut d = 0;
        let mut g = 0;
        for c in &self.circuits {
            let f = extract_features(c, 0);
            d = d.max(f.depth);
            g = g.max(f.g1 + f.g2);
        }
        (d, g)
    }
}

/// Sample a task stream from an already-loaded corpus. Interarrival gaps are
/// i.i.d. exponential at the manifest rate; circuits and shots are sampled
/// uniformly. Deterministic for a given seed.
pub fn generate_tasks(corpus: &Corpus, manifest: &WorkloadManifest, seed: u64) -> Vec<QTask> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exp = Exp::new(manifest.arrival_rate).expect("validated arrival rate");
    let mut tasks = Vec::with_capacity(manifest.n_tasks);
    let mut clock = 0.0f64;
    for id in 0..manifest.n_tasks {
        clock += exp.sample(&mut rng);
        let circuit = corpus.circuits[rng.random_range(0..corpus.circuits.len())].clone();
        let shots = *manifest.shots_choices.choose(&mut rng).expect("non-empty choices");
        let features = extract_features(&circuit, shots);
        tasks.push(QTask { id: id as u64, arrival: clock, circuit, features, shots });
    }
    tasks
}

/// Load the manifest's corpus and sample its task stream with the manifest
/// seed.
pub fn generate_workload(manifest: &WorkloadManifest) -> Result<Vec<QTask>, WorkloadError> {
    manifest.validate()?;
    let corpus = Corpus::load(Path::new(&manifest.corpus_dir))?;
    Ok(generate_tasks(&corpus, manifest, manifest.seed))
}

/// Parametric benchmark circuit generators. Angle-parameterized families use
/// internal fixed seeds so the emitted corpus is identical across runs.
pub mod circuitgen {
    use crate::circuit::{Circuit, GateKind, GateOp};
    use crate::seeds::sub_seed;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn measure_all(c: &mut Circuit) {
        c.num_clbits = c.num_qubits;
        for q in 0..c.num_qubits {
            c.push(GateOp::measure(q, q));
        }
    }

    /// Linear-chain GHZ state preparation.
    pub fn ghz(n: usize, measured: bool) -> Circuit {
        let name = if measured { format!("ghz_{n}_meas") } else { format!("ghz_{n}") };
        let mut c = Circuit::new(name, n, 0);
        c.push(GateOp::gate(GateKind::H, vec![0]));
        for i in 0..n - 1 {
            c.push(GateOp::gate(GateKind::Cx, vec![i, i + 1]));
        }
        if measured {
            measure_all(&mut c);
        }
        c
    }

    fn controlled_phase(c: &mut Circuit, theta: f64, a: usize, b: usize) {
        c.push(GateOp::gate_with_params(GateKind::Rz, vec![theta / 2.0], vec![a]));
        c.push(GateOp::gate_with_params(GateKind::Rz, vec![theta / 2.0], vec![b]));
        c.push(GateOp::gate(GateKind::Cx, vec![a, b]));
        c.push(GateOp::gate_with_params(GateKind::Rz, vec![-theta / 2.0], vec![b]));
        c.push(GateOp::gate(GateKind::Cx, vec![a, b]));
    }

    /// Quantum Fourier transform (no terminal qubit reversal).
    pub fn qft(n: usize, measured: bool) -> Circuit {
        let name = if measured { format!("qft_{n}_meas") } else { format!("qft_{n}") };
        let mut c = Circuit::new(name, n, 0);
        for i in 0..n {
            c.push(GateOp::gate(GateKind::H, vec![i]));
            for j in (i + 1)..n {
                let theta = PI / (1 << (j - i)) as f64;
                controlled_phase(&mut c, theta, j, i);
            }
        }
        if measured {
            measure_all(&mut c);
        }
        c
    }

    /// Bernstein-Vazirani with an alternating secret over `n` data qubits
    /// (one extra ancilla).
    pub fn bernstein_vazirani(n: usize) -> Circuit {
        let mut c = Circuit::new(format!("bv_{n}_meas"), n + 1, n);
        c.push(GateOp::gate(GateKind::X, vec![n]));
        for q in 0..=n {
            c.push(GateOp::gate(GateKind::H, vec![q]));
        }
        for i in (0..n).step_by(2) {
            c.push(GateOp::gate(GateKind::Cx, vec![i, n]));
        }
        for q in 0..n {
            c.push(GateOp::gate(GateKind::H, vec![q]));
        }
        for q in 0..n {
            c.push(GateOp::measure(q, q));
        }
        c
    }

    /// Deutsch-Jozsa with a balanced parity oracle over `n` data qubits.
    pub fn deutsch_jozsa(n: usize) -> Circuit {
        let mut c = Circuit::new(format!("dj_{n}_meas"), n + 1, n);
        c.push(GateOp::gate(GateKind::X, vec![n]));
        for q in 0..=n {
            c.push(GateOp::gate(GateKind::H, vec![q]));
        }
        for i in 0..n {
            c.push(GateOp::gate(GateKind::Cx, vec![i, n]));
        }
        for q in 0..n {
            c.push(GateOp::gate(GateKind::H, vec![q]));
        }
        for q in 0..n {
            c.push(GateOp::measure(q, q));
        }
        c
    }

    /// W-state preparation by amplitude redistribution down a chain.
    pub fn wstate(n: usize, measured: bool) -> Circuit {
        let name = if measured { format!("wstate_{n}_meas") } else { format!("wstate_{n}") };
        let mut c = Circuit::new(name, n, 0);
        c.push(GateOp::gate(GateKind::X, vec![0]));
        for i in 0..n - 1 {
            let theta = (1.0 / (n - i) as f64).sqrt().acos();
            c.push(GateOp::gate_with_params(GateKind::Ry, vec![-theta], vec![i + 1]));
            c.push(GateOp::gate(GateKind::Cz, vec![i, i + 1]));
            c.push(GateOp::gate_with_params(GateKind::Ry, vec![theta], vec![i + 1]));
            c.push(GateOp::gate(GateKind::Cx, vec![i + 1, i]));
        }
        if measured {
            measure_all(&mut c);
        }
        c
    }

    fn brick_ladder(c: &mut Circuit, n: usize) {
        for start in [0usize, 1] {
            let mut i = start;
            while i + 1 < n {
                c.push(GateOp::gate(GateKind::Cx, vec![i, i + 1]));
                i += 2;
            }
        }
    }

    /// Hardware-efficient ansatz: ry/rz rotation layers with brick-pattern
    /// cx entanglers.
    pub fn efficient_su2(n: usize, reps: usize) -> Circuit {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(0x51F0, &format!("su2_{n}_{reps}")));
        let mut c = Circuit::new(format!("su2_{n}"), n, 0);
        for _ in 0..reps {
            for q in 0..n {
                c.push(GateOp::gate_with_params(GateKind::Ry, vec![rng.random_range(-PI..PI)], vec![q]));
            }
            for q in 0..n {
                c.push(GateOp::gate_with_params(GateKind::Rz, vec![rng.random_range(-PI..PI)], vec![q]));
            }
            brick_ladder(&mut c, n);
        }
        for q in 0..n {
            c.push(GateOp::gate_with_params(GateKind::Ry, vec![rng.random_range(-PI..PI)], vec![q]));
        }
        c
    }

    /// QAOA MaxCut ansatz on an n-cycle.
    pub fn qaoa_ring(n: usize, layers: usize) -> Circuit {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(0x9A0A, &format!("qaoa_{n}_{layers}")));
        let mut c = Circuit::new(format!("qaoa_{n}"), n, 0);
        for q in 0..n {
            c.push(GateOp::gate(GateKind::H, vec![q]));
        }
        for _ in 0..layers {
            let gamma: f64 = rng.random_range(0.1..PI);
            let beta: f64 = rng.random_range(0.1..PI);
            // Even-offset ring edges first, then odd, then the wrap edge.
            let mut edges: Vec<(usize, usize)> = (0..n - 1).step_by(2).map(|i| (i, i + 1)).collect();
            edges.extend((1..n - 1).step_by(2).map(|i| (i, i + 1)));
            edges.push((n - 1, 0));
            for (a, b) in edges {
                c.push(GateOp::gate(GateKind::Cx, vec![a, b]));
                c.push(GateOp::gate_with_params(GateKind::Rz, vec![2.0 * gamma], vec![b]));
                c.push(GateOp::gate(GateKind::Cx, vec![a, b]));
            }
            for q in 0..n {
                c.push(GateOp::gate_with_params(GateKind::Rx, vec![2.0 * beta], vec![q]));
            }
        }
        c
    }

    /// Three-qubit Grover search for |111> (one iteration).
    pub fn grover3() -> Circuit {
        let mut c = Circuit::new("grover_3_meas", 3, 3);
        for q in 0..3 {
            c.push(GateOp::gate(GateKind::H, vec![q]));
        }
        // Oracle: ccz via h-conjugated ccx.
        c.push(GateOp::gate(GateKind::H, vec![2]));
        c.push(GateOp::gate(GateKind::Ccx, vec![0, 1, 2]));
        c.push(GateOp::gate(GateKind::H, vec![2]));
        // Diffusion.
        for q in 0..3 {
            c.push(GateOp::gate(GateKind::H, vec![q]));
        }
        for q in 0..3 {
            c.push(GateOp::gate(GateKind::X, vec![q]));
        }
        c.push(GateOp::gate(GateKind::H, vec![2]));
        c.push(GateOp::gate(GateKind::Ccx, vec![0, 1, 2]));
        c.push(GateOp::gate(GateKind::H, vec![2]));
        for q in 0..3 {
            c.push(GateOp::gate(GateKind::X, vec![q]));
        }
        for q in 0..3 {
            c.push(GateOp::gate(GateKind::H, vec![q]));
        }
        for q in 0..3 {
            c.push(GateOp::measure(q, q));
        }
        c
    }

    /// Layered random circuit: per layer a random single-qubit gate on every
    /// qubit, then cx on a random disjoint pairing of two thirds of the
    /// qubits.
    pub fn random_layered(n: usize, layers: usize) -> Circuit {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(0xD1CE, &format!("random_{n}_{layers}")));
        let mut c = Circuit::new(format!("random_{n}"), n, 0);
        for _ in 0..layers {
            for q in 0..n {
                match rng.random_range(0..3) {
                    0 => c.push(GateOp::gate(GateKind::Sx, vec![q])),
                    1 => c.push(GateOp::gate_with_params(
                        GateKind::Rz,
                        vec![rng.random_range(-PI..PI)],
                        vec![q],
                    )),
                    _ => c.push(GateOp::gate(GateKind::X, vec![q])),
                }
            }
            let mut order: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                let j = rng.random_range(0..=i);
                order.swap(i, j);
            }
            for pair in order.chunks(2).take(n / 3) {
                if let [a, b] = pair {
                    c.push(GateOp::gate(GateKind::Cx, vec![*a, *b]));
                }
            }
        }
        c
    }

    /// The bundled 16-circuit benchmark corpus (2 to 27 qubits,
    /// pre-transpilation depth 3 to 30).
    pub fn standard_corpus() -> Vec<Circuit> {
        vec![
            ghz(2, true),
            ghz(8, false),
            ghz(15, true),
            ghz(27, false),
            qft(4, true),
            qft(5, false),
            bernstein_vazirani(10),
            bernstein_vazirani(16),
            deutsch_jozsa(12),
            wstate(5, false),
            wstate(7, false),
            efficient_su2(8, 2),
            efficient_su2(16, 2),
            qaoa_ring(12, 2),
            grover3(),
            random_layered(20, 8),
        ]
    }

    /// Write the standard corpus as one .qasm file per circuit.
    pub fn write_standard_corpus(dir: &std::path::Path) -> std::io::Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for circuit in standard_corpus() {
            let path = dir.join(format!("{}.qasm", circuit.source_name));
            std::fs::write(&path, circuit.to_qasm())?;
            paths.push(path);
        }
        Ok(paths)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::extract_features;

    fn toy_manifest(dir: &str) -> WorkloadManifest {
        WorkloadManifest {
            corpus_dir: dir.to_string(),
            n_tasks: 3,
            arrival_rate: 1.0,
            shots_choices: vec![1024, 4096],
            seed: 7,
            d_corpus_max: 0,
            g_corpus_max: 0,
        }
    }

    #[test]
    fn arrivals_strictly_increase() {
        let corpus = Corpus::from_circuits(vec![circuitgen::ghz(3, false)]);
        let tasks = generate_tasks(&corpus, &toy_manifest("."), 7);
        assert_eq!(tasks.len(), 3);
        assert!(tasks[0].arrival > 0.0);
        assert!(tasks[0].arrival < tasks[1].arrival);
        assert!(tasks[1].arrival < tasks[2].arrival);
    }

    #[test]
    fn same_seed_same_tasks() {
        let corpus = Corpus::from_circuits(circuitgen::standard_corpus());
        let m = WorkloadManifest { n_tasks: 50, ..toy_manifest(".") };
        let a = generate_tasks(&corpus, &m, 11);
        let b = generate_tasks(&corpus, &m, 11);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.arrival, y.arrival);
            assert_eq!(x.circuit.source_name, y.circuit.source_name);
            assert_eq!(x.shots, y.shots);
        }
        let c = generate_tasks(&corpus, &m, 12);
        assert!(a.iter().zip(&c).any(|(x, y)| x.arrival != y.arrival));
    }

    #[test]
    fn mean_interarrival_matches_rate() {
        let corpus = Corpus::from_circuits(vec![circuitgen::ghz(3, false)]);
        let m = WorkloadManifest {
            n_tasks: 10_000,
            arrival_rate: 2.0,
            ..toy_manifest(".")
        };
        let tasks = generate_tasks(&corpus, &m, 1234);
        let mean_gap = tasks.last().unwrap().arrival / tasks.len() as f64;
        assert!(
            (mean_gap - 0.5).abs() / 0.5 < 0.05,
            "mean interarrival {mean_gap} not within 5% of 0.5"
        );
    }

    #[test]
    fn empty_corpus_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let err = Corpus::load(dir.path()).unwrap_err();
        assert!(matches!(err, WorkloadError::EmptyCorpus(_)));
    }

    #[test]
    fn parse_failures_name_the_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("bad.qasm"), "qreg q[1]; nope q[0];").unwrap();
        let err = Corpus::load(dir.path()).unwrap_err();
        match err {
            WorkloadError::Parse { file, .. } => assert!(file.contains("bad.qasm")),
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn standard_corpus_is_parseable_and_in_range() {
        let dir = tempfile::tempdir().unwrap();
        circuitgen::write_standard_corpus(dir.path()).unwrap();
        let corpus = Corpus::load(dir.path()).unwrap();
        assert_eq!(corpus.len(), 16);
        for c in &corpus.circuits {
            let f = extract_features(c, 0);
            assert!(
                (2..=27).contains(&f.qubits),
                "{}: {} qubits out of range",
                c.source_name,
                f.qubits
            );
            assert!(
                (3..=30).contains(&f.depth),
                "{}: depth {} out of range",
                c.source_name,
                f.depth
            );
        }
        let (d_max, g_max) = corpus.observed_maxima();
        assert!(d_max <= 30);
        assert!(g_max > 0);
    }

    #[test]
    fn standard_corpus_is_deterministic() {
        let a: Vec<String> = circuitgen::standard_corpus().iter().map(|c| c.to_qasm()).collect();
        let b: Vec<String> = circuitgen::standard_corpus().iter().map(|c| c.to_qasm()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn manifest_validation() {
        let m = toy_manifest(".");
        assert!(m.validate().is_ok());
        let bad = WorkloadManifest { n_tasks: 0, ..m.clone() };
        assert!(bad.validate().is_err());
        let bad = WorkloadManifest { arrival_rate: 0.0, ..m.clone() };
        assert!(bad.validate().is_err());
        let bad = WorkloadManifest { shots_choices: vec![], ..m };
        assert!(bad.validate().is_err());
    }
}
