//! Scratch measurement harness used while calibrating fixture profiles and
//! workload constants.

use qfor_core::backend::{fleet_averages, mean_gate_duration, mean_gate_error, Fleet};
use qfor_core::estimator::*;
use qfor_core::fixtures::generate_fleet;
use qfor_core::transpiler::transpile;
use qfor_core::workload::circuitgen;

fn main() {
    let nodes = generate_fleet(7).unwrap();
    let fleet = Fleet::new(nodes.clone());
    let avg = fleet_averages(&fleet);
    let corpus = circuitgen::standard_corpus();
    let weights = ScoreWeights::default();
    let shots_mean = (1024 + 2048 + 4096 + 8192) as f64 / 4.0;

    println!("fleet averages: {avg:?}");
    println!("\npooled node stats:");
    for (i, n) in nodes.iter().enumerate() {
        println!(
            "  [{i}] {:<12} pooled_err={:.6} pooled_dur={:.1}ns mean1q={:.2e} mean2q={:.2e} meanro={:.2e} cxdur={:.0}ns",
            n.name,
            mean_gate_error(n),
            mean_gate_duration(n) * 1e9,
            n.mean_1q_error(),
            n.mean_2q_error(),
            n.mean_readout_error(),
            n.mean_cx_duration() * 1e9,
        );
    }

    // Per (circuit, node): fidelity, r_rf, exec time per mean shots.
    let mut mean_rrf = vec![0.0; nodes.len()];
    let mut mean_score_const = vec![0.0; nodes.len()]; // score if this node always chosen
    let mut mean_exec = vec![0.0; nodes.len()];
    let mut best_score = 0.0; // argmax-fidelity policy
    let mut rr_score = 0.0;
    println!("\nper circuit:");
    for c in &corpus {
        let feats = qfor_core::circuit::extract_features(c, shots_mean as u64);
        let mut fids = Vec::new();
        let mut execs = Vec::new();
        for n in &nodes {
            let tc = transpile(c, n).unwrap();
            let f = estimate_fidelity(&tc, n).unwrap();
            let fp = expected_fidelity(&tc, &avg);
            let t = estimate_exec_time(&tc, n, shots_mean as u64).unwrap();
            fids.push((f, fp, tc.g2_t, tc.swap_count));
            execs.push(t);
        }
        let f_best = fids.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max);
        let f_worst = fids.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
        let r_cb = complexity_bonus(&feats, &weights);
        print!("  {:<14}", c.source_name);
        let mut scores = Vec::new();
        for (j, (f, fp, g2t, swaps)) in fids.iter().enumerate() {
            let r_rf = relative_fidelity(*f, *fp).unwrap();
            let r_rb = ranking_bonus(*f, f_best, f_worst).unwrap();
            let score = fidelity_score(r_rf, r_cb, r_rb, &weights);
            scores.push(score);
            mean_rrf[j] += r_rf / corpus.len() as f64;
            mean_score_const[j] += score / corpus.len() as f64;
            mean_exec[j] += execs[j] / corpus.len() as f64;
            print!(" | n{j}: rrf={r_rf:.2} g2t={g2t} sw={swaps} t={:.3}s", execs[j]);
        }
        println!();
        let arg = fids
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .0.partial_cmp(&b.1 .0).unwrap())
            .unwrap()
            .0;
        best_score += scores[arg] / corpus.len() as f64;
        rr_score += scores.iter().sum::<f64>() / scores.len() as f64 / corpus.len() as f64;
    }

    println!("\nper-node corpus means:");
    for (j, n) in nodes.iter().enumerate() {
        println!(
            "  [{j}] {:<12} mean_rrf={:.3} mean_score_if_always={:.3} mean_exec={:.3}s",
            n.name, mean_rrf[j], mean_score_const[j], mean_exec[j]
        );
    }
    println!("\nargmax-fidelity policy mean score: {best_score:.3}");
    println!("uniform (rr-like) mean score:      {rr_score:.3}");
    println!("SEF (node 0) mean score:           {:.3}", mean_score_const[0]);
    println!("FDF (node 1) mean score:           {:.3}", mean_score_const[1]);
    println!("best/rr ratio: {:.3}", best_score / rr_score.max(1e-9));
}
