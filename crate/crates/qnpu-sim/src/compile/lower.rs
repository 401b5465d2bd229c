use thiserror::Error;

use crate::distqasm::{CircuitIr, GateKind, QubitRef, Stmt};
use crate::qnpu::{ProtocolInstruction, ProtocolOpcode, TransferId};

use super::deps::dependency_analysis;
use super::Protocol;

/// Whether plain cross-node two-qubit gates are expanded or rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompileMode {
    Strict,
    Relaxed,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CompileError {
    #[error("strict mode: cross-node {gate} between node `{a}` and node `{b}` has no explicit protocol")]
    ResidualCrossNodeGate { gate: String, a: String, b: String },
}

/// One instruction of a node's QPU stream. Delegates are handed to the QNPU;
/// everything else executes on the QPU itself.
#[derive(Debug, Clone, PartialEq)]
pub enum QpuInstr {
    Apply {
        gate: GateKind,
        params: Vec<f64>,
        /// Dense local qubit indices on this node (declared + temporaries).
        qubits: Vec<usize>,
    },
    /// Move a qubit state from the computation zone into the communication
    /// zone, ahead of a protocol bound to `transfer`.
    ZoneMoveToComm { qubit: usize, transfer: Option<TransferId> },
    /// Move a qubit state from the communication zone back into the
    /// computation zone once `transfer` has delivered it.
    ZoneMoveToComp { qubit: usize, transfer: Option<TransferId> },
    Delegate(ProtocolInstruction),
    /// Block until the QNPU signals completion of `transfer`.
    WaitNotify { transfer: TransferId },
    /// Measure into classical bit (creg index, offset).
    Measure { qubit: usize, bit: (usize, usize) },
}

/// How an instruction acts on a qubit, for dependency purposes. The cat
/// disentangler applies a conditional Z correction to the home qubit, which
/// commutes with later control-type uses of that qubit, so back-to-back
/// remote gates sharing a control pipeline their protocols; entangler
/// accesses order among themselves, and everything else conflicts fully.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QubitAccess {
    Full,
    /// Entangler interaction: ordered against Full and other entangler
    /// accesses, passable by pending corrections.
    Entangle,
    /// Diagonal correction: commutes with entangler accesses and with other
    /// corrections.
    Correction,
}

impl QpuInstr {
    /// Local qubit indices this instruction touches, for dependency analysis.
    pub fn qubits(&self) -> Vec<usize> {
        self.qubit_accesses().into_iter().map(|(q, _)| q).collect()
    }

    pub fn qubit_accesses(&self) -> Vec<(usize, QubitAccess)> {
        match self {
            QpuInstr::Apply { qubits, .. } => {
                qubits.iter().map(|&q| (q, QubitAccess::Full)).collect()
            }
            QpuInstr::ZoneMoveToComm { qubit, .. } | QpuInstr::ZoneMoveToComp { qubit, .. } => {
                vec![(*qubit, QubitAccess::Full)]
            }
            QpuInstr::Delegate(p) => {
                let access = match p.opcode {
                    crate::qnpu::ProtocolOpcode::SendCatEntQubit => QubitAccess::Entangle,
                    crate::qnpu::ProtocolOpcode::GetCatDisentQubit => QubitAccess::Correction,
                    _ => QubitAccess::Full,
                };
                vec![(p.qubit, access)]
            }
            QpuInstr::WaitNotify { .. } => vec![],
            QpuInstr::Measure { qubit, .. } => vec![(*qubit, QubitAccess::Full)],
        }
    }

    pub fn transfer(&self) -> Option<TransferId> {
        match self {
            QpuInstr::ZoneMoveToComm { transfer, .. } | QpuInstr::ZoneMoveToComp { transfer, .. } => *transfer,
            QpuInstr::Delegate(p) => Some(p.transfer_id),
            QpuInstr::WaitNotify { transfer } => Some(*transfer),
            _ => None,
        }
    }
}

/// The lowered stream of one node plus its dependency edges: `(from, to)`
/// pairs of stream indices where `from` must complete before `to` may issue.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeProgram {
    pub node: usize,
    pub instrs: Vec<QpuInstr>,
    pub dep_edges: Vec<(usize, usize)>,
}

/// Bookkeeping for one protocol transfer (a SEND/GET pair).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferInfo {
    pub id: TransferId,
    pub send_opcode: ProtocolOpcode,
    pub src_node: usize,
    pub dst_node: usize,
}

/// Result of lowering: one program per node, in node-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledProgram {
    pub node_names: Vec<String>,
    /// Declared data qubits per node; temporaries are indexed above these.
    pub declared_qubits: Vec<usize>,
    pub creg_names: Vec<String>,
    pub programs: Vec<NodeProgram>,
    pub transfers: Vec<TransferInfo>,
}

impl CompiledProgram {
    /// Debug dump: one instruction per line with its dependency list in
    /// trailing brackets. One string per node.
    pub fn dump_node(&self, node: usize) -> String {
        let prog = &self.programs[node];
        let mut out = String::new();
        for (i, instr) in prog.instrs.iter().enumerate() {
            let deps: Vec<String> = prog
                .dep_edges
                .iter()
                .filter(|(_, to)| *to == i)
                .map(|(from, _)| from.to_string())
                .collect();
            out.push_str(&format!("{i}: {} [{}]\n", render_instr(instr), deps.join(",")));
        }
        out
    }
}

fn render_instr(instr: &QpuInstr) -> String {
    match instr {
        QpuInstr::Apply { gate, params, qubits } => {
            let qs: Vec<String> = qubits.iter().map(|q| format!("q{q}")).collect();
            if params.is_empty() {
                format!("{} {}", gate.name(), qs.join(", "))
            } else {
                let ps: Vec<String> = params.iter().map(|p| format!("{p}")).collect();
                format!("{}({}) {}", gate.name(), ps.join(", "), qs.join(", "))
            }
        }
        QpuInstr::ZoneMoveToComm { qubit, .. } => format!("zone_move_to_comm q{qubit}"),
        QpuInstr::ZoneMoveToComp { qubit, .. } => format!("zone_move_to_comp q{qubit}"),
        QpuInstr::Delegate(p) => {
            let peer = p.peer.map(|n| format!(", node{n}")).unwrap_or_default();
            format!("delegate {} q{}{peer} #t{}", p.opcode.mnemonic(), p.qubit, p.transfer_id)
        }
        QpuInstr::WaitNotify { transfer } => format!("wait_notify #t{transfer}"),
        QpuInstr::Measure { qubit, bit } => format!("measure q{qubit} -> c{}[{}]", bit.0, bit.1),
    }
}

/// Remove adjacent [move-to-computation, move-to-communication] pairs on the
/// same qubit: between back-to-back protocol uses the state stays in the
/// communication zone. Moves that carry a delivered state back (teleport and
/// entangle receptions) are kept.
fn elide_zone_bounces(instrs: Vec<QpuInstr>, transfers: &[TransferInfo]) -> Vec<QpuInstr> {
    let mut out: Vec<QpuInstr> = Vec::with_capacity(instrs.len());
    for instr in instrs {
        if let QpuInstr::ZoneMoveToComm { qubit, .. } = instr {
            if let Some(QpuInstr::ZoneMoveToComp { qubit: prev_q, transfer }) = out.last() {
                let rebinds = transfer
                    .map(|t| {
                        transfers[t as usize].send_opcode
                            != crate::qnpu::ProtocolOpcode::SendCatDisentQubit
                    })
                    .unwrap_or(false);
                if *prev_q == qubit && !rebinds {
                    out.pop();
                    continue;
                }
            }
        }
        out.push(instr);
    }
    out
}

struct Lowering<'ir> {
    ir: &'ir CircuitIr,
    protocol: Protocol,
    streams: Vec<Vec<QpuInstr>>,
    transfers: Vec<TransferInfo>,
    next_transfer: TransferId,
    next_temp: Vec<usize>,
}

/// Lower a validated circuit into per-node instruction streams with
/// dependency metadata.
pub fn lower(ir: &CircuitIr, protocol: Protocol, mode: CompileMode) -> Result<CompiledProgram, CompileError> {
    let n = ir.node_count();
    let mut lw = Lowering {
        ir,
        protocol,
        streams: vec![Vec::new(); n],
        transfers: Vec::new(),
        next_transfer: 0,
        next_temp: (0..n).map(|i| ir.qubits_on_node(i)).collect(),
    };

    let mut error = None;
    ir.for_each_stmt(|stmt| {
        if error.is_some() {
            return;
        }
        if let Err(e) = lw.lower_stmt(stmt, mode) {
            error = Some(e);
        }
    });
    if let Some(e) = error {
        return Err(e);
    }

    let transfers = lw.transfers.clone();
    let programs = lw
        .streams
        .into_iter()
        .enumerate()
        .map(|(node, instrs)| {
            let instrs = elide_zone_bounces(instrs, &transfers);
            dependency_analysis(NodeProgram { node, instrs, dep_edges: Vec::new() })
        })
        .collect();

    Ok(CompiledProgram {
        node_names: ir.nodes.iter().map(|n| n.name.clone()).collect(),
        declared_qubits: (0..n).map(|i| ir.qubits_on_node(i)).collect(),
        creg_names: ir.cregs.iter().map(|(n, _)| n.clone()).collect(),
        programs,
        transfers: lw.transfers,
    })
}

impl<'ir> Lowering<'ir> {
    fn lower_stmt(&mut self, stmt: &Stmt, mode: CompileMode) -> Result<(), CompileError> {
        match stmt {
            Stmt::LocalGate { gate, params, qubits } => {
                if qubits.len() == 2 && qubits[0].home_node != qubits[1].home_node {
                    if mode == CompileMode::Strict {
                        return Err(CompileError::ResidualCrossNodeGate {
                            gate: gate.name().to_string(),
                            a: self.ir.nodes[qubits[0].home_node].name.clone(),
                            b: self.ir.nodes[qubits[1].home_node].name.clone(),
                        });
                    }
                    self.expand_remote_gate(*gate, params, &qubits[0], &qubits[1]);
                } else {
                    let node = qubits[0].home_node;
                    let idx: Vec<usize> = qubits.iter().map(|q| self.ir.local_index(q)).collect();
                    self.streams[node].push(QpuInstr::Apply {
                        gate: *gate,
                        params: params.clone(),
                        qubits: idx,
                    });
                }
                Ok(())
            }
            Stmt::Teleport { src, dst } => {
                self.emit_teleport(src, self.ir.local_index(dst), dst.home_node);
                Ok(())
            }
            Stmt::CatEnt { src, dst } => {
                self.emit_cat_ent(src, self.ir.local_index(dst), dst.home_node);
                Ok(())
            }
            Stmt::CatDisent { remote, home } => {
                self.emit_cat_disent(self.ir.local_index(remote), remote.home_node, self.ir.local_index(home), home.home_node);
                Ok(())
            }
            Stmt::Measure { qubit, bit } => {
                let node = qubit.home_node;
                let q = self.ir.local_index(qubit);
                let creg = self
                    .ir
                    .cregs
                    .iter()
                    .position(|(n, _)| *n == bit.0)
                    .expect("validated measure target");
                self.streams[node].push(QpuInstr::Measure { qubit: q, bit: (creg, bit.1) });
                Ok(())
            }
            Stmt::RemoteBlock { .. } => unreachable!("blocks flattened by for_each_stmt"),
        }
    }

    /// Expand a plain cross-node two-qubit gate. The first operand's node
    /// initiates the protocol.
    fn expand_remote_gate(&mut self, gate: GateKind, params: &[f64], a: &QubitRef, b: &QubitRef) {
        let (a_node, b_node) = (a.home_node, b.home_node);
        let a_idx = self.ir.local_index(a);
        let b_idx = self.ir.local_index(b);
        match self.protocol {
            Protocol::Cat => {
                // Entangle a proxy for `a` on b's node, run the gate locally
                // there, then disentangle back onto `a`.
                let proxy = self.alloc_temp(b_node);
                self.emit_cat_ent_raw(a_node, a_idx, b_node, proxy);
                self.streams[b_node].push(QpuInstr::Apply {
                    gate,
                    params: params.to_vec(),
                    qubits: vec![proxy, b_idx],
                });
                self.emit_cat_disent(proxy, b_node, a_idx, a_node);
            }
            Protocol::Tp => {
                // Teleport `a` over, run the gate locally, teleport it back.
                let temp = self.alloc_temp(b_node);
                self.emit_teleport(a, temp, b_node);
                self.streams[b_node].push(QpuInstr::Apply {
                    gate,
                    params: params.to_vec(),
                    qubits: vec![temp, b_idx],
                });
                self.emit_teleport_raw(b_node, temp, a_node, a_idx);
            }
        }
    }

    fn emit_teleport(&mut self, src: &QubitRef, dst_idx: usize, dst_node: usize) {
        self.emit_teleport_raw(src.home_node, self.ir.local_index(src), dst_node, dst_idx);
    }

    fn emit_teleport_raw(&mut self, src_node: usize, src_idx: usize, dst_node: usize, dst_idx: usize) {
        let tid = self.alloc_transfer(ProtocolOpcode::SendTpQubit, src_node, dst_node);
        self.streams[src_node].push(QpuInstr::ZoneMoveToComm { qubit: src_idx, transfer: Some(tid) });
        self.streams[src_node].push(QpuInstr::Delegate(ProtocolInstruction {
            opcode: ProtocolOpcode::SendTpQubit,
            qubit: src_idx,
            peer: Some(dst_node),
            transfer_id: tid,
        }));
        self.streams[dst_node].push(QpuInstr::Delegate(ProtocolInstruction {
            opcode: ProtocolOpcode::GetTpQubit,
            qubit: dst_idx,
            peer: None,
            transfer_id: tid,
        }));
        self.streams[dst_node].push(QpuInstr::WaitNotify { transfer: tid });
        self.streams[dst_node].push(QpuInstr::ZoneMoveToComp { qubit: dst_idx, transfer: Some(tid) });
    }

    fn emit_cat_ent(&mut self, src: &QubitRef, dst_idx: usize, dst_node: usize) {
        self.emit_cat_ent_raw(src.home_node, self.ir.local_index(src), dst_node, dst_idx);
    }

    fn emit_cat_ent_raw(&mut self, src_node: usize, src_idx: usize, dst_node: usize, dst_idx: usize) {
        let tid = self.alloc_transfer(ProtocolOpcode::SendCatEntQubit, src_node, dst_node);
        self.streams[src_node].push(QpuInstr::ZoneMoveToComm { qubit: src_idx, transfer: Some(tid) });
        self.streams[src_node].push(QpuInstr::Delegate(ProtocolInstruction {
            opcode: ProtocolOpcode::SendCatEntQubit,
            qubit: src_idx,
            peer: Some(dst_node),
            transfer_id: tid,
        }));
        self.streams[dst_node].push(QpuInstr::Delegate(ProtocolInstruction {
            opcode: ProtocolOpcode::GetCatEntQubit,
            qubit: dst_idx,
            peer: None,
            transfer_id: tid,
        }));
        self.streams[dst_node].push(QpuInstr::WaitNotify { transfer: tid });
        self.streams[dst_node].push(QpuInstr::ZoneMoveToComp { qubit: dst_idx, transfer: Some(tid) });
    }

    /// Disentangle the proxy on `remote_node`, folding the correction into
    /// the `home` qubit, which then returns to its computation zone.
    fn emit_cat_disent(&mut self, remote_idx: usize, remote_node: usize, home_idx: usize, home_node: usize) {
        let tid = self.alloc_transfer(ProtocolOpcode::SendCatDisentQubit, remote_node, home_node);
        self.streams[remote_node].push(QpuInstr::ZoneMoveToComm { qubit: remote_idx, transfer: Some(tid) });
        self.streams[remote_node].push(QpuInstr::Delegate(ProtocolInstruction {
            opcode: ProtocolOpcode::SendCatDisentQubit,
            qubit: remote_idx,
            peer: Some(home_node),
            transfer_id: tid,
        }));
        self.streams[home_node].push(QpuInstr::Delegate(ProtocolInstruction {
            opcode: ProtocolOpcode::GetCatDisentQubit,
            qubit: home_idx,
            peer: None,
            transfer_id: tid,
        }));
        self.streams[home_node].push(QpuInstr::WaitNotify { transfer: tid });
        self.streams[home_node].push(QpuInstr::ZoneMoveToComp { qubit: home_idx, transfer: Some(tid) });
    }

    fn alloc_transfer(&mut self, opcode: ProtocolOpcode, src: usize, dst: usize) -> TransferId {
        let id = self.next_transfer;
        self.next_transfer += 1;
        self.transfers.push(TransferInfo { id, send_opcode: opcode, src_node: src, dst_node: dst });
        id
    }

    fn alloc_temp(&mut self, node: usize) -> usize {
        let idx = self.next_temp[node];
        self.next_temp[node] += 1;
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distqasm::{parse, validate, SourceProgram};

    const LISTING_TP: &str = "\
qreg q[2] @nodeA;
qreg r[2] @nodeB;
h q[0];
cnot q[0], q[1];
teleport q[1], r[0];
pragma remote_begin nodeB
  cnot r[0], r[1];
pragma remote_end
";

    #[test]
    fn teleport_listing_lowers_to_paired_streams() {
        let ir = parse(&SourceProgram::inline(LISTING_TP)).unwrap();
        validate(&ir).unwrap();
        let compiled = lower(&ir, Protocol::Tp, CompileMode::Strict).unwrap();
        let node_a = &compiled.programs[0];
        let node_b = &compiled.programs[1];
        assert!(node_a.instrs.iter().any(|i| matches!(
            i,
            QpuInstr::Delegate(p) if p.opcode == ProtocolOpcode::SendTpQubit && p.peer == Some(1)
        )));
        // Destination: reception then the local cnot, in that order.
        let get_pos = node_b
            .instrs
            .iter()
            .position(|i| matches!(i, QpuInstr::Delegate(p) if p.opcode == ProtocolOpcode::GetTpQubit))
            .unwrap();
        let cnot_pos = node_b
            .instrs
            .iter()
            .position(|i| matches!(i, QpuInstr::Apply { gate: GateKind::Cnot, .. }))
            .unwrap();
        assert!(get_pos < cnot_pos);
    }

    #[test]
    fn local_only_program_has_no_delegates() {
        let src = SourceProgram::inline("qreg q[3] @n0;\nh q[0];\ncnot q[0], q[1];\ncnot q[1], q[2];\n");
        let ir = parse(&src).unwrap();
        let compiled = lower(&ir, Protocol::Cat, CompileMode::Strict).unwrap();
        assert!(compiled.programs[0]
            .instrs
            .iter()
            .all(|i| !matches!(i, QpuInstr::Delegate(_))));
        assert!(compiled.transfers.is_empty());
    }

    #[test]
    fn strict_mode_rejects_residual_cross_node_gate() {
        let src = SourceProgram::inline("qreg q[1] @a;\nqreg r[1] @b;\ncnot q[0], r[0];\n");
        let ir = parse(&src).unwrap();
        assert!(matches!(
            lower(&ir, Protocol::Cat, CompileMode::Strict),
            Err(CompileError::ResidualCrossNodeGate { .. })
        ));
    }

    #[test]
    fn send_and_get_multisets_pair_by_transfer_id() {
        let src = SourceProgram::inline(
            "qreg q[4] @a;\nqreg r[4] @b;\ncnot q[0], r[0];\ncnot q[1], r[1];\ncnot r[2], q[2];\n",
        );
        let ir = parse(&src).unwrap();
        for protocol in [Protocol::Cat, Protocol::Tp] {
            let compiled = lower(&ir, protocol, CompileMode::Relaxed).unwrap();
            let mut sends = Vec::new();
            let mut gets = Vec::new();
            for prog in &compiled.programs {
                for instr in &prog.instrs {
                    if let QpuInstr::Delegate(p) = instr {
                        if p.opcode.is_get() {
                            gets.push(p.transfer_id);
                        } else {
                            sends.push(p.transfer_id);
                        }
                    }
                }
            }
            sends.sort_unstable();
            gets.sort_unstable();
            assert_eq!(sends, gets);
            assert_eq!(sends.len(), compiled.transfers.len());
        }
    }

    #[test]
    fn dump_lists_instructions_with_dep_brackets() {
        let ir = parse(&SourceProgram::inline(LISTING_TP)).unwrap();
        let compiled = lower(&ir, Protocol::Tp, CompileMode::Strict).unwrap();
        let dump = compiled.dump_node(0);
        assert!(dump.contains("delegate SEND_TP_QUBIT"));
        assert!(dump.lines().all(|l| l.contains('[') && l.ends_with(']')));
    }
}
