//! Dense state-vector verification of the communication microcode: replays
//! the quantum micro-op traces produced by the cycle engine, enumerating
//! every measurement branch, and checks teleportation and remote-CNOT
//! correctness exactly (up to global phase).

mod replay;
mod state;
mod verify;

pub use replay::{Branch, OutcomePolicy, Replayer};
pub use state::{vec_fidelity, OracleError, StateVector, MAX_QUBITS};
pub use verify::{verify_remote_cnot, verify_teleport, VerifyReport, FIDELITY_BAR};
