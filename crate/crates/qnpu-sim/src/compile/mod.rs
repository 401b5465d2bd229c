//! Lowering of validated circuits into per-node instruction streams: local
//! gates, zone transitions and QPU-side synchronization, plus the paired QNPU
//! protocol instructions, annotated with the dependency edges the issue logic
//! consults.

mod counts;
mod deps;
mod lower;

pub use counts::{count_remote_gates, RemoteGateCounts};
pub use deps::dependency_analysis;
pub use lower::{lower, CompileError, CompileMode, CompiledProgram, NodeProgram, QpuInstr, TransferInfo};

/// Communication protocol used when expanding plain cross-node gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Tp,
    Cat,
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Protocol::Tp => "tp",
            Protocol::Cat => "cat",
        })
    }
}
