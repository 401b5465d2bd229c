//! Deterministic cycle-level simulation of multi-node execution.
//!
//! Three architecture models share one event-driven core:
//! - monolithic: per node, one in-order scalar unit executes local gates and
//!   all communication micro-ops inline, instruction by instruction;
//! - decoupled scalar: per node, a QPU scoreboard for local gates runs
//!   concurrently with a single QNPU decoder lane;
//! - decoupled superscalar: the QNPU has N decoder lanes with private
//!   execution units; dependency-ready protocol instructions are assigned to
//!   idle lanes in program order, one lane always held for the oldest
//!   outstanding instruction so progress is guaranteed at any width.

mod latency;
mod machine;
mod trace;

pub use latency::{ArchConfig, ArchMode, ConfigError, ConfigFile, LatencyModel};
pub use machine::{Machine, SimError, SimResult};
pub use trace::{BitHandle, EprSide, EventLogEntry, ProtocolTrace, Slot, TraceGate, TraceOp};

pub use crate::compile::Protocol;

use crate::compile::CompiledProgram;

/// Simulate a compiled program under a configuration.
pub fn simulate(program: &CompiledProgram, cfg: &ArchConfig) -> Result<SimResult, SimError> {
    Machine::new(program, cfg)?.run().map(|(r, _, _)| r)
}

/// Simulate and keep the quantum-operation trace (for the oracle).
pub fn simulate_with_trace(
    program: &CompiledProgram,
    cfg: &ArchConfig,
) -> Result<(SimResult, ProtocolTrace), SimError> {
    let mut cfg = cfg.clone();
    cfg.collect_quantum_trace = true;
    Machine::new(program, &cfg)?.run().map(|(r, t, _)| (r, t))
}

/// Simulate and keep the per-cycle event log.
pub fn simulate_with_log(
    program: &CompiledProgram,
    cfg: &ArchConfig,
) -> Result<(SimResult, Vec<EventLogEntry>), SimError> {
    let mut cfg = cfg.clone();
    cfg.collect_event_log = true;
    Machine::new(program, &cfg)?.run().map(|(r, _, l)| (r, l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::{lower, CompileMode, Protocol};
    use crate::distqasm::{parse, SourceProgram};

    fn compile(src: &str, protocol: Protocol) -> CompiledProgram {
        let ir = parse(&SourceProgram::inline(src)).unwrap();
        lower(&ir, protocol, CompileMode::Relaxed).unwrap()
    }

    #[test]
    fn empty_program_takes_zero_cycles() {
        let compiled = compile("qreg q[1] @a;\n", Protocol::Cat);
        let cfg = ArchConfig::monolithic(LatencyModel::default(), Protocol::Cat);
        assert_eq!(simulate(&compiled, &cfg).unwrap().total_cycles, 0);
        let cfg = ArchConfig::decoupled(4, LatencyModel::default(), Protocol::Cat);
        assert_eq!(simulate(&compiled, &cfg).unwrap().total_cycles, 0);
    }

    #[test]
    fn lone_measurement_takes_measurement_latency() {
        let compiled = compile("qreg q[1] @a;\ncreg c[1];\nmeasure q[0] -> c[0];\n", Protocol::Cat);
        let cfg = ArchConfig::monolithic(LatencyModel::default(), Protocol::Cat);
        let r = simulate(&compiled, &cfg).unwrap();
        assert_eq!(r.total_cycles, LatencyModel::default().measurement);
    }

    /// Hand-traced schedule of one explicit teleport under the default
    /// latency model.
    ///
    /// Decoupled scalar, defaults (zone_move=2, signal=1, decode=1, epr=1,
    /// uop=1, hop=4, cnot=2, 1q=1, meas=4, cond=1):
    ///   A: move 0->2; lane start 2, uops from 4:
    ///      RESERVE 4->5, SEND_ID 5->6 (arrives B at 10), ACK_WAIT ...
    ///   B: GET issued at 6 (EPR id in flight), uops from 8:
    ///      RECV_ID max(8,10)+1=11, SYNC 12, ACK 13 (arrives A 17),
    ///      GET_QUBIT 14, RECV_BITS waits
    ///   A: ACK_WAIT ends 18, GET_QUBIT 19, CNOT 21, H 22, MEAS 26, MEAS 30,
    ///      RELEASE 31, SEND_BITS 32 (arrives B 36)
    ///   B: RECV_BITS 37, X 38, Z 39, NOTIFY 40 (QPU sees 41), RELEASE 41;
    ///      WaitNotify 41, move back 41->43.
    #[test]
    fn teleport_handshake_matches_hand_traced_cycle_count() {
        let src = "qreg q[1] @a;\nqreg r[1] @b;\nteleport q[0], r[0];\n";
        let compiled = compile(src, Protocol::Tp);
        let cfg = ArchConfig::decoupled(1, LatencyModel::default(), Protocol::Tp);
        let r = simulate(&compiled, &cfg).unwrap();
        assert_eq!(r.total_cycles, 43);

        // Monolithic inline execution of the same handshake:
        //   A: move 0->2, decode 2->3, RESERVE 4, SEND_ID 5 (arrives 9);
        //   B: decode 0->1, RECV_ID max(1,9)+1=10, SYNC 11, ACK 12 (arrives
        //   16), GET_QUBIT 13, RECV_BITS waits; A: ACK_WAIT 17, GET_QUBIT 18,
        //   CNOT 20, H 21, MEAS 25, MEAS 29, RELEASE 30, SEND_BITS 31
        //   (arrives 35); B: RECV_BITS 36, X 37, Z 38, NOTIFY 39 (seen 40),
        //   RELEASE 40, WaitNotify 40, move 40->42.
        let cfg = ArchConfig::monolithic(LatencyModel::default(), Protocol::Tp);
        let r = simulate(&compiled, &cfg).unwrap();
        assert_eq!(r.total_cycles, 42);
    }

    #[test]
    fn deterministic_across_runs() {
        let src = "qreg q[4] @a;\nqreg r[4] @b;\nh q[0];\ncnot q[0], r[0];\ncnot q[1], r[1];\ncnot q[2], r[2];\n";
        for protocol in [Protocol::Cat, Protocol::Tp] {
            let compiled = compile(src, protocol);
            for width in [1, 2, 4] {
                let cfg = ArchConfig::decoupled(width, LatencyModel::default(), protocol);
                let a = simulate(&compiled, &cfg).unwrap();
                let b = simulate(&compiled, &cfg).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn width_never_hurts_and_independent_transfers_overlap() {
        let src = "qreg q[4] @a;\nqreg r[4] @b;\ncnot q[0], r[0];\ncnot q[1], r[1];\ncnot q[2], r[2];\ncnot q[3], r[3];\n";
        let compiled = compile(src, Protocol::Cat);
        let mut cycles = Vec::new();
        for width in [1, 2, 4, 8] {
            let cfg = ArchConfig::decoupled(width, LatencyModel::default(), Protocol::Cat);
            cycles.push(simulate(&compiled, &cfg).unwrap().total_cycles);
        }
        assert!(cycles.windows(2).all(|w| w[1] <= w[0]), "non-monotone: {cycles:?}");
        assert!(cycles[2] < cycles[0], "independent transfers should overlap: {cycles:?}");
    }

    /// A distributed entangling chain in the shape of the linear benchmarks:
    /// long local runs separated by one remote gate per boundary.
    fn chain_source(qubits_per_node: usize, nodes: usize) -> String {
        let mut src = String::new();
        let reg = |n: usize| format!("q{n}");
        for n in 0..nodes {
            src.push_str(&format!("qreg {}[{qubits_per_node}] @node{n};\n", reg(n)));
        }
        src.push_str(&format!("h {}[0];\n", reg(0)));
        for n in 0..nodes {
            for i in 0..qubits_per_node - 1 {
                src.push_str(&format!("cnot {}[{i}], {}[{}];\n", reg(n), reg(n), i + 1));
            }
            if n + 1 < nodes {
                src.push_str(&format!(
                    "cnot {}[{}], {}[0];\n",
                    reg(n),
                    qubits_per_node - 1,
                    reg(n + 1)
                ));
            }
        }
        src
    }

    #[test]
    fn decoupled_not_slower_than_monolithic_with_local_work() {
        let src = chain_source(10, 3);
        for protocol in [Protocol::Cat, Protocol::Tp] {
            let compiled = compile(&src, protocol);
            let mono =
                simulate(&compiled, &ArchConfig::monolithic(LatencyModel::default(), protocol))
                    .unwrap();
            let scalar =
                simulate(&compiled, &ArchConfig::decoupled(1, LatencyModel::default(), protocol))
                    .unwrap();
            assert!(
                scalar.total_cycles <= mono.total_cycles,
                "{protocol}: scalar {} > mono {}",
                scalar.total_cycles,
                mono.total_cycles
            );
        }
    }

    #[test]
    fn chain_program_is_width_invariant() {
        // Serial remote dependency chain: wider QNPUs change nothing.
        let src = chain_source(10, 3);
        let compiled = compile(&src, Protocol::Cat);
        let base =
            simulate(&compiled, &ArchConfig::decoupled(1, LatencyModel::default(), Protocol::Cat))
                .unwrap()
                .total_cycles;
        for width in [2, 4, 8, 16] {
            let cfg = ArchConfig::decoupled(width, LatencyModel::default(), Protocol::Cat);
            assert_eq!(simulate(&compiled, &cfg).unwrap().total_cycles, base);
        }
    }

    #[test]
    fn message_counts_match_protocol_shapes() {
        let src = "qreg q[3] @a;\nqreg r[3] @b;\ncnot q[0], r[0];\ncnot q[1], r[1];\ncnot q[2], r[2];\n";
        for (protocol, per_gate) in [(Protocol::Cat, 4), (Protocol::Tp, 6)] {
            let compiled = compile(src, protocol);
            let cfg = ArchConfig::decoupled(2, LatencyModel::default(), protocol);
            let r = simulate(&compiled, &cfg).unwrap();
            assert_eq!(r.messages_sent, 3 * per_gate, "{protocol}");
        }
    }
}
