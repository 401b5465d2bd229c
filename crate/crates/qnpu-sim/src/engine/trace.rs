use crate::distqasm::GateKind;
use crate::qnpu::TransferId;

/// Identity of a physical qubit in the system model: either a declared (or
/// compiler-temporary) data qubit of a node, or one half of the EPR pair
/// consumed by a transfer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    Data { node: usize, index: usize },
    Epr { transfer: TransferId, side: EprSide },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EprSide {
    /// The half held by the transfer's initiating node.
    Src,
    /// The half held by the receiving node.
    Dst,
}

/// Handle of a classical bit produced by a measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BitHandle {
    TransferX(TransferId),
    TransferZ(TransferId),
    Creg { node: usize, reg: u32, index: usize },
}

/// Gates that can appear in a protocol trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceGate {
    H,
    X,
    Y,
    Z,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    Cnot,
    Cp(f64),
    Swap,
}

impl TraceGate {
    pub fn from_gate_kind(gate: GateKind, params: &[f64]) -> Self {
        match gate {
            GateKind::H => TraceGate::H,
            GateKind::X => TraceGate::X,
            GateKind::Y => TraceGate::Y,
            GateKind::Z => TraceGate::Z,
            GateKind::Rx => TraceGate::Rx(params[0]),
            GateKind::Ry => TraceGate::Ry(params[0]),
            GateKind::Rz => TraceGate::Rz(params[0]),
            GateKind::Cnot => TraceGate::Cnot,
            GateKind::Cp => TraceGate::Cp(params[0]),
            GateKind::Swap => TraceGate::Swap,
        }
    }
}

/// One quantum operation as executed, with resolved physical qubits. The
/// trace lists operations in engine completion order.
#[derive(Debug, Clone, PartialEq)]
pub enum TraceOp {
    Gate {
        gate: TraceGate,
        qubits: Vec<Slot>,
        /// Execute only when this previously measured bit is 1.
        cond: Option<BitHandle>,
    },
    Meas { qubit: Slot, bit: BitHandle },
}

/// The ordered quantum-operation trace of one simulation, with the final
/// binding of program data qubits to physical slots.
#[derive(Debug, Clone, Default)]
pub struct ProtocolTrace {
    pub ops: Vec<TraceOp>,
    /// Where each program data qubit's state resides after the run.
    pub final_location: Vec<((usize, usize), Slot)>,
}

impl ProtocolTrace {
    /// Physical location of data qubit `index` of `node` after the run.
    pub fn location_of(&self, node: usize, index: usize) -> Slot {
        self.final_location
            .iter()
            .find(|((n, i), _)| *n == node && *i == index)
            .map(|(_, slot)| *slot)
            .unwrap_or(Slot::Data { node, index })
    }
}

/// One line of the per-cycle event log.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLogEntry {
    pub cycle: u64,
    pub node: usize,
    pub unit: String,
    pub what: String,
}

impl std::fmt::Display for EventLogEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:>8}  node{:<3} {:<8} {}", self.cycle, self.node, self.unit, self.what)
    }
}
