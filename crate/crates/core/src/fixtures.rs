//! Seeded synthetic calibration fixtures.
//!
//! Generates a five-node fleet (three 27-qubit nodes, two 127-qubit nodes)
//! on heavy-hex-style lattices with per-node noise/timing profiles chosen to
//! span the realistic device spectrum:
//!
//! - `node_a_27q`: excellent single-qubit and readout calibration but the
//!   worst two-qubit errors in the fleet. Its pooled mean error is the fleet
//!   minimum, so error-greedy selection lands here despite poor circuit-level
//!   fidelity on entangling workloads.
//! - `node_b_27q`: the fastest gate clocks and the highest error rates; the
//!   duration-greedy pick.
//! - `node_c_27q`: mid-range in every respect.
//! - `node_d_127q`: near-best two-qubit errors, slowest clocks.
//! - `node_e_127q`: best two-qubit errors, fast clocks.
//!
//! All values are sampled uniformly inside narrow per-node bands from a
//! ChaCha stream derived from the master seed, so fixtures are byte-stable
//! for a given seed.

use crate::backend::{validate_calibration, CalibrationError, CalibrationFile, GateEntry, GateTables, QNodeSpec, ReadoutEntry};
use crate::seeds::sub_seed;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};

/// Falcon-style 27-qubit heavy-hex coupling (28 edges).
pub fn heavy_hex_27() -> Vec<[usize; 2]> {
    vec![
        [0, 1],
        [1, 2],
        [1, 4],
        [2, 3],
        [3, 5],
        [4, 7],
        [5, 8],
        [6, 7],
        [7, 10],
        [8, 9],
        [8, 11],
        [10, 12],
        [11, 14],
        [12, 13],
        [12, 15],
        [13, 14],
        [14, 16],
        [15, 18],
        [16, 19],
        [17, 18],
        [18, 21],
        [19, 20],
        [19, 22],
        [21, 23],
        [22, 25],
        [23, 24],
        [24, 25],
        [25, 26],
    ]
}

/// Eagle-style 127-qubit heavy-hex lattice (144 edges): seven qubit rows
/// joined by four-qubit connector columns at alternating offsets.
pub fn heavy_hex_127() -> Vec<[usize; 2]> {
    let mut edges = Vec::with_capacity(144);
    // Row extents: (first qubit, length).
    let rows: [(usize, usize); 7] =
        [(0, 14), (18, 15), (37, 15), (56, 15), (75, 15), (94, 15), (113, 14)];
    for (start, len) in rows {
        for i in 0..len - 1 {
            edges.push([start + i, start + i + 1]);
        }
    }
    // (connector start, upper row index, lower row index, positions, lower offset)
    let connectors: [(usize, usize, usize, [usize; 4], isize); 6] = [
        (14, 0, 1, [0, 4, 8, 12], 0),
        (33, 1, 2, [2, 6, 10, 14], 0),
        (52, 2, 3, [0, 4, 8, 12], 0),
        (71, 3, 4, [2, 6, 10, 14], 0),
        (90, 4, 5, [0, 4, 8, 12], 0),
        (109, 5, 6, [2, 6, 10, 14], -1),
    ];
    for (cstart, upper, lower, positions, lower_off) in connectors {
        for (k, &pos) in positions.iter().enumerate() {
            let cq = cstart + k;
            let up = rows[upper].0 + pos;
            let down = (rows[lower].0 as isize + pos as isize + lower_off) as usize;
            edges.push([up, cq]);
            edges.push([cq, down]);
        }
    }
    edges
}

#[derive(Debug, Clone, Copy)]
struct Band {
    lo: f64,
    hi: f64,
}

impl Band {
    const fn new(lo: f64, hi: f64) -> Self {
        Band { lo, hi }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            rng.random_range(self.lo..self.hi)
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct NodeProfile {
    name: &'static str,
    qubits: usize,
    err_1q: Band,
    err_cx: Band,
    err_readout: Band,
    dur_cx: Band,
    dur_readout: Band,
}

const SX_DURATION: f64 = 35e-9;

/// Per-node calibration bands. Single-qubit errors stay in 1e-4..2e-3,
/// two-qubit in 4.5e-3..3e-2, readout in 5e-3..5e-2, cx durations in
/// 250..660 ns and measurement in 700..1400 ns.
const PROFILES: [NodeProfile; 5] = [
    NodeProfile {
        name: "node_a_27q",
        qubits: 27,
        err_1q: Band::new(1.0e-4, 2.0e-4),
        err_cx: Band::new(2.8e-2, 3.0e-2),
        err_readout: Band::new(5.0e-3, 7.0e-3),
        dur_cx: Band::new(560e-9, 640e-9),
        dur_readout: Band::new(1250e-9, 1400e-9),
    },
    NodeProfile {
        name: "node_b_27q",
        qubits: 27,
        err_1q: Band::new(1.5e-3, 2.0e-3),
        err_cx: Band::new(1.8e-2, 2.1e-2),
        err_readout: Band::new(3.2e-2, 4.0e-2),
        dur_cx: Band::new(250e-9, 270e-9),
        dur_readout: Band::new(700e-9, 730e-9),
    },
    NodeProfile {
        name: "node_c_27q",
        qubits: 27,
        err_1q: Band::new(5.0e-4, 9.0e-4),
        err_cx: Band::new(1.3e-2, 1.6e-2),
        err_readout: Band::new(2.2e-2, 2.8e-2),
        dur_cx: Band::new(390e-9, 430e-9),
        dur_readout: Band::new(880e-9, 940e-9),
    },
    NodeProfile {
        name: "node_d_127q",
        qubits: 127,
        err_1q: Band::new(2.5e-4, 4.5e-4),
        err_cx: Band::new(5.0e-3, 6.2e-3),
        err_readout: Band::new(3.2e-2, 4.0e-2),
        dur_cx: Band::new(600e-9, 660e-9),
        dur_readout: Band::new(1300e-9, 1400e-9),
    },
    NodeProfile {
        name: "node_e_127q",
        qubits: 127,
        err_1q: Band::new(2.5e-4, 4.5e-4),
        err_cx: Band::new(4.5e-3, 6.0e-3),
        err_readout: Band::new(3.4e-2, 4.0e-2),
        dur_cx: Band::new(300e-9, 340e-9),
        dur_readout: Band::new(800e-9, 860e-9),
    },
];

/// Names of the generated nodes, in fleet (action index) order.
pub fn fixture_node_names() -> Vec<&'static str> {
    PROFILES.iter().map(|p| p.name).collect()
}

fn generate_node(profile: &NodeProfile, seed: u64) -> CalibrationFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = profile.qubits;
    let coupling = if n == 27 { heavy_hex_27() } else { heavy_hex_127() };
    let one_q = |rng: &mut ChaCha8Rng, band: &Band, dur: f64| -> Vec<GateEntry> {
        (0..n)
            .map(|q| GateEntry { qubits: vec![q], error: band.sample(rng), duration_s: dur })
            .collect()
    };
    let sx = one_q(&mut rng, &profile.err_1q, SX_DURATION);
    let x = one_q(&mut rng, &profile.err_1q, SX_DURATION);
    let rz: Vec<GateEntry> =
        (0..n).map(|q| GateEntry { qubits: vec![q], error: 0.0, duration_s: 0.0 }).collect();
    let cx: Vec<GateEntry> = coupling
        .iter()
        .map(|&[a, b]| GateEntry {
            qubits: vec![a, b],
            error: profile.err_cx.sample(&mut rng),
            duration_s: profile.dur_cx.sample(&mut rng),
        })
        .collect();
    let readout: Vec<ReadoutEntry> = (0..n)
        .map(|q| ReadoutEntry {
            qubit: q,
            error: profile.err_readout.sample(&mut rng),
            duration_s: profile.dur_readout.sample(&mut rng),
        })
        .collect();
    CalibrationFile {
        name: profile.name.to_string(),
        num_qubits: n,
        coupling,
        gates: GateTables { sx, x, rz, cx },
        readout,
    }
}

/// Generate the five fixture calibrations for a master seed.
pub fn generate_fleet_files(master_seed: u64) -> Vec<CalibrationFile> {
    PROFILES
        .iter()
        .map(|p| generate_node(p, sub_seed(master_seed, &format!("fixture:{}", p.name))))
        .collect()
}

/// Generate and validate the fixture fleet in memory.
pub fn generate_fleet(master_seed: u64) -> Result<Vec<QNodeSpec>, CalibrationError> {
    generate_fleet_files(master_seed)
        .into_iter()
        .map(|f| {
            let label = format!("fixture:{}", f.name);
            validate_calibration(f, &label)
        })
        .collect()
}

/// Write the calibration files plus `fleet.json` manifest into `dir`;
/// returns the manifest path. Byte-identical for a given seed.
pub fn write_fixtures(master_seed: u64, dir: &Path) -> Result<PathBuf, std::io::Error> {
    std::fs::create_dir_all(dir)?;
    let mut manifest = Vec::new();
    for file in generate_fleet_files(master_seed) {
        let fname = format!("{}.json", file.name);
        let text = serde_json::to_string_pretty(&file).expect("calibration serializes");
        std::fs::write(dir.join(&fname), text + "\n")?;
        manifest.push(fname);
    }
    let manifest_path = dir.join("fleet.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&manifest_path, text + "\n")?;
    Ok(manifest_path)
}
