use crate::compile::{count_remote_gates, lower, CompileMode, Protocol, RemoteGateCounts};
use crate::engine::{simulate, ArchConfig, LatencyModel, SimError};

use super::generate::{generate, BenchSpec, Family};

/// Cycle counts of one benchmark configuration under the three architectures.
#[derive(Debug, Clone, PartialEq)]
pub struct RowResult {
    pub counts: RemoteGateCounts,
    pub monolithic: u64,
    pub scalar: u64,
    pub four_way: u64,
}

/// The 42 evaluated configurations: circuit-size scaling (50/100/150 qubits
/// at 5 nodes) then node-count scaling (150 qubits at 2/5/10 nodes), for
/// each of the seven families.
pub fn table2_specs() -> Vec<BenchSpec> {
    let families = [
        Family::HamsimTfim,
        Family::Ghz,
        Family::Bv,
        Family::Qft,
        Family::VqeLinear,
        Family::VqeFull,
        Family::Qaoa,
    ];
    let mut specs = Vec::with_capacity(42);
    for family in families {
        for qubits in [50, 100, 150] {
            specs.push(BenchSpec::new(family, qubits, 5));
        }
    }
    for family in families {
        for nodes in [2, 5, 10] {
            specs.push(BenchSpec::new(family, 150, nodes));
        }
    }
    specs
}

/// Simulate one spec under monolithic, scalar and 4-way configurations.
pub fn run_row(spec: &BenchSpec, latency: &LatencyModel, protocol: Protocol) -> Result<RowResult, SimError> {
    let ir = generate(spec).map_err(|e| SimError::Config(e.to_string()))?;
    let counts = count_remote_gates(&ir);
    let compiled =
        lower(&ir, protocol, CompileMode::Relaxed).map_err(|e| SimError::Config(e.to_string()))?;
    let monolithic = simulate(&compiled, &ArchConfig::monolithic(*latency, protocol))?.total_cycles;
    let scalar = simulate(&compiled, &ArchConfig::decoupled(1, *latency, protocol))?.total_cycles;
    let four_way = simulate(&compiled, &ArchConfig::decoupled(4, *latency, protocol))?.total_cycles;
    Ok(RowResult { counts, monolithic, scalar, four_way })
}

/// Run the full table replica. Rows execute on a bounded worker pool; the
/// output order is the deterministic spec order regardless of scheduling.
/// Per-row failures are recorded and the sweep continues.
pub fn run_table2(
    latency: &LatencyModel,
    protocol: Protocol,
) -> Vec<(BenchSpec, Result<RowResult, SimError>)> {
    let specs = table2_specs();
    run_rows(&specs, latency, protocol)
}

pub fn run_rows(
    specs: &[BenchSpec],
    latency: &LatencyModel,
    protocol: Protocol,
) -> Vec<(BenchSpec, Result<RowResult, SimError>)> {
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(4);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let results: Vec<std::sync::Mutex<Option<Result<RowResult, SimError>>>> =
        specs.iter().map(|_| std::sync::Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers.min(specs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= specs.len() {
                    break;
                }
                let r = run_row(&specs[i], latency, protocol);
                *results[i].lock().unwrap() = Some(r);
            });
        }
    });
    specs
        .iter()
        .cloned()
        .zip(results.into_iter().map(|m| m.into_inner().unwrap().expect("row executed")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_list_has_42_rows_for_126_results() {
        let specs = table2_specs();
        assert_eq!(specs.len(), 42);
        // 3 architectures per row.
        assert_eq!(specs.len() * 3, 126);
    }

    #[test]
    fn single_row_produces_all_three_architectures() {
        let spec = BenchSpec::new(Family::Ghz, 20, 2);
        let r = run_row(&spec, &LatencyModel::default(), Protocol::Cat).unwrap();
        assert!(r.monolithic > 0 && r.scalar > 0 && r.four_way > 0);
        assert!(r.scalar <= r.monolithic);
        assert!(r.four_way <= r.scalar);
    }
}
