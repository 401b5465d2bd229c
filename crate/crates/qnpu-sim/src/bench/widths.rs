use std::collections::BTreeMap;

use crate::compile::{lower, CompileMode, Protocol};
use crate::engine::{simulate, ArchConfig, LatencyModel, SimError};

use super::generate::{generate, BenchSpec, Density, Family};

/// One width-sweep request: a family swept over qnpu widths for several
/// circuit sizes (fixed nodes) or node counts (fixed size).
#[derive(Debug, Clone)]
pub struct WidthSweepSpec {
    pub family: Family,
    /// (qubits, nodes) cells, e.g. sizes 30/60/90 at 5 nodes, or 30 qubits
    /// over 2/5/10/15/30 nodes.
    pub cells: Vec<(usize, usize)>,
    pub widths: Vec<usize>,
}

impl WidthSweepSpec {
    /// Circuit-size scaling cells: 30/60/90 qubits across 5 nodes.
    pub fn size_scaling(family: Family, widths: &[usize]) -> Self {
        Self {
            family,
            cells: vec![(30, 5), (60, 5), (90, 5)],
            widths: widths.to_vec(),
        }
    }

    /// Node-count scaling cells: 30 qubits across 2/5/10/15/30 nodes.
    pub fn node_scaling(family: Family, widths: &[usize]) -> Self {
        Self {
            family,
            cells: vec![(30, 2), (30, 5), (30, 10), (30, 15), (30, 30)],
            widths: widths.to_vec(),
        }
    }
}

pub const STUDY_WIDTHS: [usize; 9] = [1, 2, 4, 6, 8, 10, 12, 14, 16];

/// Cycle counts per (cell, width) for one sweep spec. The width study uses
/// the sparse 2-regular MaxCut variant for qaoa.
pub fn width_sweep_cycles(
    spec: &WidthSweepSpec,
    latency: &LatencyModel,
    protocol: Protocol,
) -> Result<BTreeMap<(usize, usize), Vec<(usize, u64)>>, SimError> {
    let mut out = BTreeMap::new();
    for &(qubits, nodes) in &spec.cells {
        let mut bench = BenchSpec::new(spec.family, qubits, nodes);
        if spec.family == Family::Qaoa {
            bench.density = Density::TwoRegular;
        }
        let ir = generate(&bench).map_err(|e| SimError::Config(e.to_string()))?;
        let compiled = lower(&ir, protocol, CompileMode::Relaxed)
            .map_err(|e| SimError::Config(e.to_string()))?;
        let mut cycles = Vec::with_capacity(spec.widths.len());
        for &w in &spec.widths {
            let cfg = ArchConfig::decoupled(w, *latency, protocol);
            cycles.push((w, simulate(&compiled, &cfg)?.total_cycles));
        }
        out.insert((qubits, nodes), cycles);
    }
    Ok(out)
}

/// Render one plot-ready data file: a `width` column followed by one cycles
/// column per cell.
pub fn run_width_sweep(
    spec: &WidthSweepSpec,
    latency: &LatencyModel,
    protocol: Protocol,
) -> Result<String, SimError> {
    let data = width_sweep_cycles(spec, latency, protocol)?;
    let mut out = String::new();
    out.push_str(&format!("# {} width sweep, protocol={protocol}\n", spec.family.name()));
    out.push_str("width");
    for (qubits, nodes) in data.keys() {
        out.push_str(&format!(",cycles_q{qubits}_n{nodes}"));
    }
    out.push('\n');
    for (i, &w) in spec.widths.iter().enumerate() {
        out.push_str(&w.to_string());
        for cycles in data.values() {
            out.push_str(&format!(",{}", cycles[i].1));
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_is_monotone_in_width_per_cell() {
        let spec = WidthSweepSpec {
            family: Family::Qft,
            cells: vec![(12, 3)],
            widths: vec![1, 2, 4, 8],
        };
        let data = width_sweep_cycles(&spec, &LatencyModel::default(), Protocol::Cat).unwrap();
        let cycles = &data[&(12, 3)];
        assert!(cycles.windows(2).all(|w| w[1].1 <= w[0].1), "{cycles:?}");
    }
}
