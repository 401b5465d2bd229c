//! Dev probe: per-lane busy statistics.
use qnpu_sim::bench::{generate, BenchSpec, Density, Family};
use qnpu_sim::compile::{lower, CompileMode, Protocol};
use qnpu_sim::engine::{simulate_with_log, ArchConfig, LatencyModel};
use std::collections::BTreeMap;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let fam = Family::from_name(&args[1]).unwrap();
    let q: usize = args[2].parse().unwrap();
    let n: usize = args[3].parse().unwrap();
    let w: usize = args[4].parse().unwrap();
    let mut spec = BenchSpec::new(fam, q, n);
    if fam == Family::Qaoa { spec.density = Density::Full; }
    let ir = generate(&spec).unwrap();
    let compiled = lower(&ir, Protocol::Cat, CompileMode::Relaxed).unwrap();
    let mut lat = LatencyModel::default();
    lat.classical_link_hop = 16;
    let cfg = ArchConfig::decoupled(w, lat, Protocol::Cat);
    let (r, log) = simulate_with_log(&compiled, &cfg).unwrap();
    println!("total {}", r.total_cycles);
    // Instruction issues per node over deciles of time.
    let mut issues: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
    for e in &log {
        if e.what.starts_with("issue") {
            issues.entry(e.node).or_default().push(e.cycle);
        }
    }
    for (node, mut ts) in issues {
        ts.sort();
        let count = ts.len();
        let dec: Vec<u64> = (0..=10).map(|i| ts[(i * (count - 1)) / 10]).collect();
        println!("node{node}: {count} issues, deciles {dec:?}");
    }
}
