use thiserror::Error;

use super::ast::{CircuitIr, Stmt};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ValidationError {
    #[error("teleport with both endpoints on node `{node}`")]
    SameNodeTeleport { node: String },
    #[error("cat_ent with both endpoints on node `{node}`")]
    SameNodeCatEnt { node: String },
    #[error("cat_disent with both endpoints on node `{node}`")]
    SameNodeCatDisent { node: String },
    #[error("remote block on node `{block}` contains a statement touching qubit `{qubit}` on node `{home}`")]
    ForeignQubitInBlock { block: String, qubit: String, home: String },
    #[error("nested remote block")]
    NestedRemoteBlock,
}

/// Structural summary produced by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub node_count: usize,
    /// Data qubits hosted per node, indexed by node.
    pub qubits_per_node: Vec<usize>,
    /// Two-qubit gates whose operands reside on different nodes.
    pub cross_node_gates: usize,
}

/// Check statement invariants and summarize the program.
pub fn validate(ir: &CircuitIr) -> Result<ValidationReport, ValidationError> {
    let mut cross = 0;
    let mut check = |stmt: &Stmt, block: Option<usize>| -> Result<(), ValidationError> {
        match stmt {
            Stmt::LocalGate { qubits, .. } => {
                if qubits.len() == 2 && qubits[0].home_node != qubits[1].home_node {
                    cross += 1;
                }
            }
            Stmt::Teleport { src, dst } => {
                if src.home_node == dst.home_node {
                    return Err(ValidationError::SameNodeTeleport {
                        node: ir.nodes[src.home_node].name.clone(),
                    });
                }
            }
            Stmt::CatEnt { src, dst } => {
                if src.home_node == dst.home_node {
                    return Err(ValidationError::SameNodeCatEnt {
                        node: ir.nodes[src.home_node].name.clone(),
                    });
                }
            }
            Stmt::CatDisent { remote, home } => {
                if remote.home_node == home.home_node {
                    return Err(ValidationError::SameNodeCatDisent {
                        node: ir.nodes[remote.home_node].name.clone(),
                    });
                }
            }
            Stmt::Measure { .. } => {}
            Stmt::RemoteBlock { .. } => unreachable!("blocks handled by caller"),
        }
        // Residency: statements inside a remote block may only touch that
        // node's qubits.
        if let Some(block_node) = block {
            let mut bad: Option<(String, usize)> = None;
            stmt_qubits(stmt, &mut |q| {
                if q.home_node != block_node && bad.is_none() {
                    bad = Some((format!("{}[{}]", q.register, q.offset), q.home_node));
                }
            });
            if let Some((qubit, home)) = bad {
                return Err(ValidationError::ForeignQubitInBlock {
                    block: ir.nodes[block_node].name.clone(),
                    qubit,
                    home: ir.nodes[home].name.clone(),
                });
            }
        }
        Ok(())
    };

    for stmt in &ir.stmts {
        match stmt {
            Stmt::RemoteBlock { node, body } => {
                for inner in body {
                    if matches!(inner, Stmt::RemoteBlock { .. }) {
                        return Err(ValidationError::NestedRemoteBlock);
                    }
                    check(inner, Some(*node))?;
                }
            }
            other => check(other, None)?,
        }
    }

    let qubits_per_node = (0..ir.node_count()).map(|n| ir.qubits_on_node(n)).collect();
    Ok(ValidationReport {
        node_count: ir.node_count(),
        qubits_per_node,
        cross_node_gates: cross,
    })
}

fn stmt_qubits(stmt: &Stmt, f: &mut impl FnMut(&super::ast::QubitRef)) {
    match stmt {
        Stmt::LocalGate { qubits, .. } => qubits.iter().for_each(&mut *f),
        Stmt::Teleport { src, dst } | Stmt::CatEnt { src, dst } => {
            f(src);
            f(dst);
        }
        Stmt::CatDisent { remote, home } => {
            f(remote);
            f(home);
        }
        Stmt::Measure { qubit, .. } => f(qubit),
        Stmt::RemoteBlock { body, .. } => {
            for s in body {
                stmt_qubits(s, f);
            }
        }
    }
}
