//! The QNPU instruction set: communication protocol instructions, their
//! micro-operation decodings, the per-node EPR resource table, the lane
//! register file and the classical network buffers.

mod epr;
mod isa;
mod microcode;
mod network;
mod regfile;

pub use epr::{EprError, EprEntry, EprMode, EprResourceTable, EprState, ReserveOutcome};
pub use isa::{
    CondBit, MicroOp, OpCategory, ProtocolInstruction, ProtocolOpcode, QuantumKind, RegName,
    TransferId,
};
pub use microcode::{decode, microcode_table_text};
pub use network::{ClassicalMessage, NetworkBuffers, Payload, PayloadKind, RecvOutcome};
pub use regfile::{RegValue, RegisterFile};
