use crate::distqasm::{CircuitIr, Stmt};

/// Remote-gate totals for a circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemoteGateCounts {
    /// Two-qubit gates whose operands reside on different nodes; a remote
    /// swap counts once.
    pub total: usize,
    /// Maximum over nodes of the number of remote gates that node
    /// participates in.
    pub max_per_node: usize,
    pub per_node: Vec<usize>,
}

/// Count cross-node two-qubit gates. Explicit protocol statements (teleport,
/// cat_ent, cat_disent) express communication directly and are not remote
/// gates.
pub fn count_remote_gates(ir: &CircuitIr) -> RemoteGateCounts {
    let mut per_node = vec![0usize; ir.node_count()];
    let mut total = 0usize;
    ir.for_each_stmt(|stmt| {
        if let Stmt::LocalGate { qubits, .. } = stmt {
            if qubits.len() == 2 && qubits[0].home_node != qubits[1].home_node {
                total += 1;
                per_node[qubits[0].home_node] += 1;
                per_node[qubits[1].home_node] += 1;
            }
        }
    });
    RemoteGateCounts {
        total,
        max_per_node: per_node.iter().copied().max().unwrap_or(0),
        per_node,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distqasm::{parse, SourceProgram};

    #[test]
    fn single_node_circuit_has_zero_remote_gates() {
        let src = SourceProgram::inline("qreg q[4] @n0;\nh q[0];\ncnot q[0], q[1];\nswap q[2], q[3];\n");
        let ir = parse(&src).unwrap();
        let counts = count_remote_gates(&ir);
        assert_eq!((counts.total, counts.max_per_node), (0, 0));
    }

    #[test]
    fn explicit_protocol_statements_are_not_remote_gates() {
        let src = SourceProgram::inline("qreg q[2] @a;\nqreg r[2] @b;\nteleport q[0], r[0];\ncat_ent q[1], r[1];\n");
        let ir = parse(&src).unwrap();
        assert_eq!(count_remote_gates(&ir).total, 0);
    }

    #[test]
    fn participation_counts_both_endpoints() {
        let src = SourceProgram::inline(
            "qreg q[2] @a;\nqreg r[1] @b;\nqreg s[1] @c;\ncnot q[0], r[0];\ncnot q[1], s[0];\n",
        );
        let ir = parse(&src).unwrap();
        let counts = count_remote_gates(&ir);
        assert_eq!(counts.total, 2);
        assert_eq!(counts.per_node, vec![2, 1, 1]);
        assert_eq!(counts.max_per_node, 2);
    }
}
