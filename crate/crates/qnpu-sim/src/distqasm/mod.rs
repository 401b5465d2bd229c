//! Frontend for the DistQASM dialect: OpenQASM 2 statement syntax plus
//! node-annotated register declarations (`qreg q[2] @nodeA;`), explicit
//! communication statements (`teleport`, `cat_ent`, `cat_disent`) and
//! remote block pragmas (`pragma remote_begin <node>` / `pragma remote_end`).

mod ast;
mod emit;
mod parse;
mod validate;

pub use ast::{CircuitIr, GateKind, NodeId, QubitRef, RegDecl, Stmt};
pub use emit::emit;
pub use parse::{parse, ParseError};
pub use validate::{validate, ValidationError, ValidationReport};

/// A DistQASM source text together with a tag describing where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceProgram {
    pub text: String,
    pub origin: String,
}

impl SourceProgram {
    pub fn inline(text: impl Into<String>) -> Self {
        Self { text: text.into(), origin: "<inline>".into() }
    }

    pub fn from_file(path: &std::path::Path) -> std::io::Result<Self> {
        Ok(Self {
            text: std::fs::read_to_string(path)?,
            origin: path.display().to_string(),
        })
    }
}
