/// Globally unique identifier for one protocol transfer. A SEND_* instruction
/// and its complementary GET_* instruction share the same id.
pub type TransferId = u64;

/// The six QNPU communication protocol instructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProtocolOpcode {
    SendTpQubit,
    GetTpQubit,
    SendCatEntQubit,
    GetCatEntQubit,
    SendCatDisentQubit,
    GetCatDisentQubit,
}

impl ProtocolOpcode {
    pub fn mnemonic(self) -> &'static str {
        match self {
            ProtocolOpcode::SendTpQubit => "SEND_TP_QUBIT",
            ProtocolOpcode::GetTpQubit => "GET_TP_QUBIT",
            ProtocolOpcode::SendCatEntQubit => "SEND_CAT_ENT_QUBIT",
            ProtocolOpcode::GetCatEntQubit => "GET_CAT_ENT_QUBIT",
            ProtocolOpcode::SendCatDisentQubit => "SEND_CAT_DISENT_QUBIT",
            ProtocolOpcode::GetCatDisentQubit => "GET_CAT_DISENT_QUBIT",
        }
    }

    /// GET-type instructions open with a classical receive and are issued to
    /// a decoder lane once their initiating message is available.
    pub fn is_get(self) -> bool {
        matches!(
            self,
            ProtocolOpcode::GetTpQubit
                | ProtocolOpcode::GetCatEntQubit
                | ProtocolOpcode::GetCatDisentQubit
        )
    }
}

/// A protocol instruction with operands, as produced by the compiler.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolInstruction {
    pub opcode: ProtocolOpcode,
    /// Local data qubit the protocol operates on (dense per-node index).
    /// For GET_TP/GET_CAT_ENT this names the qubit slot being produced.
    pub qubit: usize,
    /// Peer node index; present on SEND_* forms, absent on GET_* forms.
    pub peer: Option<usize>,
    pub transfer_id: TransferId,
}

/// Architectural register names used by the microcode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegName {
    EprIdReg,
    EprQubReg,
    CommQubReg,
    TeleportQubReg,
    BitXReg,
    BitZReg,
    StatusReg,
}

impl RegName {
    pub fn name(self) -> &'static str {
        match self {
            RegName::EprIdReg => "EPRIdReg",
            RegName::EprQubReg => "EPRQubReg",
            RegName::CommQubReg => "CommQubReg",
            RegName::TeleportQubReg => "TeleportQubReg",
            RegName::BitXReg => "BitXReg",
            RegName::BitZReg => "BitZReg",
            RegName::StatusReg => "StatusReg",
        }
    }
}

/// Which classical bit guards a conditional quantum micro-op.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CondBit {
    BitX,
    BitZ,
}

/// Quantum micro-op kinds used by the communication microcode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuantumKind {
    Cnot,
    H,
    X,
    Z,
    Meas,
}

/// One decoded micro-operation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MicroOp {
    // EPR resource management.
    EprReserve { id_reg: RegName },
    EprReserveSync { status_reg: RegName },
    GetEprQubit { qubit_reg: RegName },
    EprRelease { qubit_reg: RegName },
    // Classical communication.
    SendEprId { id_reg: RegName },
    RecvEprId { id_reg: RegName },
    AckWait { status_reg: RegName },
    AckSend { status_reg: RegName },
    TpSendBits { z_reg: RegName, x_reg: RegName },
    TpRecvBits { x_reg: RegName, z_reg: RegName },
    TransferSuccessNotify,
    // Quantum operations; `cond` gates execution on a received classical bit.
    Quantum {
        kind: QuantumKind,
        args: Vec<RegName>,
        cond: Option<CondBit>,
    },
}

/// Execution-unit category of a micro-op.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpCategory {
    EprManagement,
    ClassicalComm,
    Quantum,
}

impl MicroOp {
    pub fn category(&self) -> OpCategory {
        match self {
            MicroOp::EprReserve { .. }
            | MicroOp::EprReserveSync { .. }
            | MicroOp::GetEprQubit { .. }
            | MicroOp::EprRelease { .. } => OpCategory::EprManagement,
            MicroOp::SendEprId { .. }
            | MicroOp::RecvEprId { .. }
            | MicroOp::AckWait { .. }
            | MicroOp::AckSend { .. }
            | MicroOp::TpSendBits { .. }
            | MicroOp::TpRecvBits { .. }
            | MicroOp::TransferSuccessNotify => OpCategory::ClassicalComm,
            MicroOp::Quantum { .. } => OpCategory::Quantum,
        }
    }

    /// Conditions may only appear on quantum micro-ops; enforced by
    /// construction, checked here for table validation.
    pub fn cond(&self) -> Option<CondBit> {
        match self {
            MicroOp::Quantum { cond, .. } => *cond,
            _ => None,
        }
    }
}
