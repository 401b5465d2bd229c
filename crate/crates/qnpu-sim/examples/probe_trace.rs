//! Dev probe: when does each transfer's GET issue vs complete (small QFT).
use qnpu_sim::bench::{generate, BenchSpec, Family};
use qnpu_sim::compile::{lower, CompileMode, Protocol};
use qnpu_sim::engine::{simulate_with_log, ArchConfig, LatencyModel};

fn main() {
    let ir = generate(&BenchSpec::new(Family::Qft, 12, 3)).unwrap();
    let compiled = lower(&ir, Protocol::Cat, CompileMode::Relaxed).unwrap();
    let cfg = ArchConfig::decoupled(1, LatencyModel::default(), Protocol::Cat);
    let (r, log) = simulate_with_log(&compiled, &cfg).unwrap();
    println!("total {}", r.total_cycles);
    for e in log.iter().filter(|e| e.what.starts_with("issue GET_CAT_ENT") || e.what.starts_with("issue SEND_CAT_ENT")) {
        println!("{e}");
    }
}
