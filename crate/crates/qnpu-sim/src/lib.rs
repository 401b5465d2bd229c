//! DistQASM toolchain for distributed quantum programs: a frontend for the
//! node-annotated OpenQASM 2 dialect, a compiler that lowers remote gates
//! into QNPU communication-protocol instructions, a deterministic cycle-level
//! simulator for monolithic, scalar-QNPU and superscalar-QNPU node
//! architectures, and a small state-vector oracle that certifies the
//! communication microcode.

pub mod bench;
pub mod compile;
pub mod distqasm;
pub mod engine;
pub mod oracle;
pub mod qnpu;

pub use distqasm::{parse, CircuitIr, NodeId, QubitRef, Stmt};
pub use engine::{ArchConfig, ArchMode, LatencyModel, SimResult};
pub use compile::Protocol;

