fn main() {
    let paths = qfor_core::workload::circuitgen::write_standard_corpus(std::path::Path::new("corpus")).unwrap();
    for p in &paths {
        let c = qfor_core::qasm::parse_qasm(&std::fs::read_to_string(p).unwrap(), p.file_stem().unwrap().to_str().unwrap()).unwrap();
        let f = qfor_core::circuit::extract_features(&c, 0);
        println!("{:<16} q={:<3} d={:<3} g1={:<4} g2={:<4} multi={} m={}", c.source_name, f.qubits, f.depth, f.g1, f.g2, f.multi, f.measures);
    }
}
