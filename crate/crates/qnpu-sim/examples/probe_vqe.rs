use qnpu_sim::bench::{generate, BenchSpec, Family};
use qnpu_sim::compile::{lower, CompileMode, Protocol, QpuInstr};
use qnpu_sim::engine::{simulate_with_log, ArchConfig, LatencyModel};

fn main() {
    let ir = generate(&BenchSpec::new(Family::VqeFull, 12, 2)).unwrap();
    let compiled = lower(&ir, Protocol::Cat, CompileMode::Relaxed).unwrap();
    // Map transfer id -> (its send instruction qubit) on node0 for labeling.
    for (i, instr) in compiled.programs[0].instrs.iter().enumerate().take(40) {
        if let QpuInstr::Delegate(p) = instr {
            println!("instr{} {:?} q{} t{}", i, p.opcode, p.qubit, p.transfer_id);
        }
    }
    let mut lat = LatencyModel::default();
    lat.classical_link_hop = 16;
    let cfg = ArchConfig::decoupled(1, lat, Protocol::Cat);
    let (r, log) = simulate_with_log(&compiled, &cfg).unwrap();
    println!("total {}", r.total_cycles);
    let mut n = 0;
    for e in log.iter().filter(|e| e.node == 0 && e.what.starts_with("issue")) {
        println!("{e}");
        n += 1;
        if n > 30 { break; }
    }
}
