use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::distqasm::{CircuitIr, GateKind, NodeId, QubitRef, RegDecl, Stmt};

const THETA: f64 = std::f64::consts::FRAC_PI_4;

/// Benchmark circuit families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// One-dimensional transverse-field Ising model, first-order trotterized.
    HamsimTfim,
    Ghz,
    Bv,
    Qft,
    VqeLinear,
    VqeFull,
    Qaoa,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::HamsimTfim => "hamsim_tfim",
            Family::Ghz => "ghz",
            Family::Bv => "bv",
            Family::Qft => "qft",
            Family::VqeLinear => "vqe_linear",
            Family::VqeFull => "vqe_full",
            Family::Qaoa => "qaoa",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "hamsim_tfim" | "hamsim" => Family::HamsimTfim,
            "ghz" => Family::Ghz,
            "bv" => Family::Bv,
            "qft" => Family::Qft,
            "vqe_linear" => Family::VqeLinear,
            "vqe_full" => Family::VqeFull,
            "qaoa" => Family::Qaoa,
            _ => return None,
        })
    }
}

/// MaxCut graph density for the QAOA generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Density {
    /// Every vertex pair carries one coupling: the configuration the
    /// evaluation-table counts correspond to.
    Full,
    /// A seeded random selection of half of all possible edges.
    Half,
    /// A 2-regular ring, used by the width study.
    TwoRegular,
}

impl Density {
    pub fn name(self) -> &'static str {
        match self {
            Density::Full => "full",
            Density::Half => "half",
            Density::TwoRegular => "2regular",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "full" => Density::Full,
            "half" => Density::Half,
            "2regular" | "two_regular" => Density::TwoRegular,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BenchSpec {
    pub family: Family,
    pub qubits: usize,
    pub nodes: usize,
    /// Random seed; meaningful for qaoa with `Density::Half`.
    pub seed: u64,
    /// Trotter steps for hamsim.
    pub trotter_steps: usize,
    pub density: Density,
}

impl BenchSpec {
    pub fn new(family: Family, qubits: usize, nodes: usize) -> Self {
        Self {
            family,
            qubits,
            nodes,
            seed: 0,
            trotter_steps: 1,
            density: Density::Full,
        }
    }

    pub fn label(&self) -> String {
        format!("{}-{}-{}", self.family.name(), self.qubits, self.nodes)
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BenchError {
    #[error("{qubits} qubits cannot be partitioned into {nodes} equal contiguous blocks")]
    IndivisiblePartition { qubits: usize, nodes: usize },
    #[error("benchmarks need at least 2 qubits (got {qubits})")]
    TooFewQubits { qubits: usize },
}

struct Builder {
    block: usize,
    nodes: usize,
    stmts: Vec<Stmt>,
}

impl Builder {
    fn q(&self, global: usize) -> QubitRef {
        let node = global / self.block;
        debug_assert!(node < self.nodes);
        QubitRef {
            register: format!("q{node}"),
            offset: global % self.block,
            home_node: node,
        }
    }

    fn gate1(&mut self, gate: GateKind, q: usize) {
        let params = if gate.param_count() == 1 { vec![THETA] } else { vec![] };
        let qubits = vec![self.q(q)];
        self.stmts.push(Stmt::LocalGate { gate, params, qubits });
    }

    fn gate2(&mut self, gate: GateKind, a: usize, b: usize) {
        let params = if gate.param_count() == 1 { vec![THETA] } else { vec![] };
        let qubits = vec![self.q(a), self.q(b)];
        self.stmts.push(Stmt::LocalGate { gate, params, qubits });
    }

    fn cp(&mut self, control: usize, target: usize, angle: f64) {
        self.stmts.push(Stmt::LocalGate {
            gate: GateKind::Cp,
            params: vec![angle],
            qubits: vec![self.q(control), self.q(target)],
        });
    }
}

/// Generate a benchmark circuit: a deterministic function of its spec.
/// Qubits are laid out in contiguous equal blocks, one per node.
pub fn generate(spec: &BenchSpec) -> Result<CircuitIr, BenchError> {
    let (q, n) = (spec.qubits, spec.nodes);
    if q < 2 {
        return Err(BenchError::TooFewQubits { qubits: q });
    }
    if n == 0 || q % n != 0 || q < n {
        return Err(BenchError::IndivisiblePartition { qubits: q, nodes: n });
    }
    let block = q / n;
    let mut b = Builder { block, nodes: n, stmts: Vec::new() };

    match spec.family {
        Family::Ghz => {
            b.gate1(GateKind::H, 0);
            for i in 0..q - 1 {
                b.gate2(GateKind::Cnot, i, i + 1);
            }
        }
        Family::Bv => {
            // All-ones secret; ancilla is the last qubit on the last node.
            let anc = q - 1;
            b.gate1(GateKind::X, anc);
            for i in 0..q {
                b.gate1(GateKind::H, i);
            }
            for i in 0..q - 1 {
                b.gate2(GateKind::Cnot, i, anc);
            }
            for i in 0..q - 1 {
                b.gate1(GateKind::H, i);
            }
        }
        Family::HamsimTfim => {
            for _ in 0..spec.trotter_steps.max(1) {
                for i in 0..q {
                    b.gate1(GateKind::Rx, i);
                }
                for i in 0..q - 1 {
                    b.gate2(GateKind::Cnot, i, i + 1);
                    b.gate1(GateKind::Rz, i + 1);
                    b.gate2(GateKind::Cnot, i, i + 1);
                }
            }
        }
        Family::Qft => {
            for i in 0..q {
                b.gate1(GateKind::H, i);
                for j in i + 1..q {
                    let angle = std::f64::consts::PI / (1u64 << (j - i)) as f64;
                    b.cp(j, i, angle);
                }
            }
            for i in 0..q / 2 {
                b.gate2(GateKind::Swap, i, q - 1 - i);
            }
        }
        Family::VqeLinear => {
            for i in 0..q {
                b.gate1(GateKind::Ry, i);
            }
            for i in 0..q - 1 {
                b.gate2(GateKind::Cnot, i, i + 1);
            }
            for i in 0..q {
                b.gate1(GateKind::Ry, i);
            }
        }
        Family::VqeFull => {
            for i in 0..q {
                b.gate1(GateKind::Ry, i);
            }
            // All pairs once, emitted by coupling distance so each pass
            // touches disjoint control qubits.
            for d in 1..q {
                for i in 0..q - d {
                    b.gate2(GateKind::Cnot, i, i + d);
                }
            }
            for i in 0..q {
                b.gate1(GateKind::Ry, i);
            }
        }
        Family::Qaoa => {
            let edges = qaoa_edges(q, spec.density, spec.seed);
            for (u, v) in edges {
                b.gate2(GateKind::Cnot, u, v);
                b.gate1(GateKind::Rz, v);
                b.gate2(GateKind::Cnot, u, v);
            }
            for i in 0..q {
                b.gate1(GateKind::Rx, i);
            }
        }
    }

    let nodes = (0..n)
        .map(|i| NodeId { name: format!("node{i}"), index: i })
        .collect();
    let qregs = (0..n)
        .map(|i| RegDecl { name: format!("q{i}"), size: block, node: i })
        .collect();
    Ok(CircuitIr { nodes, qregs, cregs: Vec::new(), stmts: b.stmts })
}

/// Edge list of the MaxCut problem graph, deterministic in (density, seed).
fn qaoa_edges(q: usize, density: Density, seed: u64) -> Vec<(usize, usize)> {
    match density {
        Density::Full => {
            // Every pair once, by coupling distance.
            let mut edges = Vec::with_capacity(q * (q - 1) / 2);
            for d in 1..q {
                for i in 0..q - d {
                    edges.push((i, i + d));
                }
            }
            edges
        }
        Density::TwoRegular => (0..q).map(|i| (i, (i + 1) % q)).map(ordered).collect(),
        Density::Half => {
            let mut all: Vec<(usize, usize)> = Vec::with_capacity(q * (q - 1) / 2);
            for i in 0..q {
                for j in i + 1..q {
                    all.push((i, j));
                }
            }
            let take = all.len() / 2;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            all.shuffle(&mut rng);
            let mut chosen: Vec<(usize, usize)> = all.into_iter().take(take).collect();
            chosen.sort_unstable();
            chosen
        }
    }
}

fn ordered(e: (usize, usize)) -> (usize, usize) {
    if e.0 <= e.1 {
        e
    } else {
        (e.1, e.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::count_remote_gates;
    use crate::distqasm::{emit, parse, validate};

    fn counts(family: Family, q: usize, n: usize) -> (usize, usize) {
        let ir = generate(&BenchSpec::new(family, q, n)).unwrap();
        validate(&ir).unwrap();
        let c = count_remote_gates(&ir);
        (c.total, c.max_per_node)
    }

    #[test]
    fn ghz_remote_counts() {
        assert_eq!(counts(Family::Ghz, 150, 5), (4, 2));
        assert_eq!(counts(Family::Ghz, 150, 2), (1, 1));
        assert_eq!(counts(Family::Ghz, 150, 10), (9, 2));
    }

    #[test]
    fn bv_remote_counts() {
        assert_eq!(counts(Family::Bv, 150, 10), (135, 135));
        assert_eq!(counts(Family::Bv, 150, 2), (75, 75));
        assert_eq!(counts(Family::Bv, 50, 5), (40, 40));
    }

    #[test]
    fn hamsim_remote_counts() {
        assert_eq!(counts(Family::HamsimTfim, 150, 2), (2, 2));
        assert_eq!(counts(Family::HamsimTfim, 150, 10), (18, 4));
    }

    #[test]
    fn vqe_full_remote_counts() {
        assert_eq!(counts(Family::VqeFull, 50, 5), (1000, 400));
        assert_eq!(counts(Family::VqeFull, 150, 2), (5625, 5625));
    }

    #[test]
    fn qft_remote_totals() {
        assert_eq!(counts(Family::Qft, 100, 5).0, 4040);
        assert_eq!(counts(Family::Qft, 150, 2).0, 5700);
    }

    #[test]
    fn qaoa_density_variants() {
        let full = counts(Family::Qaoa, 50, 5);
        assert_eq!(full, (2000, 800));
        let ring = generate(&BenchSpec {
            density: Density::TwoRegular,
            ..BenchSpec::new(Family::Qaoa, 50, 5)
        })
        .unwrap();
        // Ring of 50 edges, 5 crossings (incl. the wrap), 2 CNOTs each.
        assert_eq!(count_remote_gates(&ring).total, 10);
        let half = generate(&BenchSpec {
            density: Density::Half,
            seed: 3,
            ..BenchSpec::new(Family::Qaoa, 20, 2)
        })
        .unwrap();
        // half of C(20,2)=190 pairs -> 95 edges -> 190 CNOTs total,
        // a seed-dependent share of them remote.
        let total_cnots: usize = 95 * 2;
        let local_plus_remote = {
            let mut cnots = 0;
            half.for_each_stmt(|s| {
                if let crate::distqasm::Stmt::LocalGate { gate, .. } = s {
                    if *gate == crate::distqasm::GateKind::Cnot {
                        cnots += 1;
                    }
                }
            });
            cnots
        };
        assert_eq!(local_plus_remote, total_cnots);
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = BenchSpec { seed: 42, density: Density::Half, ..BenchSpec::new(Family::Qaoa, 30, 5) };
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
    }

    #[test]
    fn indivisible_partition_is_rejected() {
        assert!(matches!(
            generate(&BenchSpec::new(Family::Ghz, 10, 3)),
            Err(BenchError::IndivisiblePartition { .. })
        ));
    }

    #[test]
    fn generated_circuits_roundtrip_through_text() {
        for family in [Family::Ghz, Family::Bv, Family::HamsimTfim, Family::Qft, Family::VqeLinear] {
            let ir = generate(&BenchSpec::new(family, 12, 3)).unwrap();
            let text = emit(&ir);
            let reparsed = parse(&text).unwrap();
            assert_eq!(ir, reparsed, "{family:?} failed round-trip");
        }
    }
}
