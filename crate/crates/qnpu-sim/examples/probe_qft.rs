//! Dev probe: node finish times and lane utilization for small QFT cases.
use qnpu_sim::bench::{generate, BenchSpec, Family};
use qnpu_sim::compile::{lower, CompileMode, Protocol};
use qnpu_sim::engine::{simulate, ArchConfig, ArchMode, LatencyModel};

fn main() {
    for (q, n) in [(30, 2), (30, 5), (30, 10), (60, 5)] {
        let ir = generate(&BenchSpec::new(Family::Qft, q, n)).unwrap();
        let compiled = lower(&ir, Protocol::Cat, CompileMode::Relaxed).unwrap();
        for (mode, width) in [(ArchMode::Monolithic, 1), (ArchMode::Decoupled, 1), (ArchMode::Decoupled, 4)] {
            let cfg = if mode == ArchMode::Monolithic {
                ArchConfig::monolithic(LatencyModel::default(), Protocol::Cat)
            } else {
                ArchConfig::decoupled(width, LatencyModel::default(), Protocol::Cat)
            };
            let r = simulate(&compiled, &cfg).unwrap();
            println!(
                "qft-{q}-{n} {mode} w{width}: total {} node_finish {:?} uops {}",
                r.total_cycles, r.node_cycles, r.uops_executed
            );
        }
    }
}
