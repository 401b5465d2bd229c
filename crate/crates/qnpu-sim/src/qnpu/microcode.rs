//! Microcode table: each protocol instruction decodes to a fixed ordered
//! micro-op sequence. The TP sequences follow the source/destination split of
//! the teleportation protocol; the CAT sequences implement the cat-entangler
//! and cat-disentangler circuits. The state-vector oracle certifies that both
//! families realize their intended unitaries on every measurement branch.

use super::isa::{CondBit, MicroOp, ProtocolOpcode, QuantumKind, RegName};

/// Decode a protocol opcode into its micro-op sequence. Pure table lookup:
/// identical inputs give identical lists.
pub fn decode(opcode: ProtocolOpcode) -> Vec<MicroOp> {
    use MicroOp::*;
    use QuantumKind::*;
    use RegName::*;
    match opcode {
        // Source side of TP-Comm: reserve a pair, sync with the peer, Bell-
        // measure the data qubit against the local EPR half, ship both bits.
        ProtocolOpcode::SendTpQubit => vec![
            EprReserve { id_reg: EprIdReg },
            SendEprId { id_reg: EprIdReg },
            AckWait { status_reg: StatusReg },
            GetEprQubit { qubit_reg: EprQubReg },
            Quantum { kind: Cnot, args: vec![CommQubReg, EprQubReg], cond: None },
            Quantum { kind: H, args: vec![CommQubReg], cond: None },
            Quantum { kind: Meas, args: vec![EprQubReg, BitXReg], cond: None },
            Quantum { kind: Meas, args: vec![CommQubReg, BitZReg], cond: None },
            EprRelease { qubit_reg: EprQubReg },
            TpSendBits { z_reg: BitZReg, x_reg: BitXReg },
        ],
        // Destination side of TP-Comm: adopt the reserved pair, apply the
        // classically controlled corrections, hand the qubit to the QPU.
        ProtocolOpcode::GetTpQubit => vec![
            RecvEprId { id_reg: EprIdReg },
            EprReserveSync { status_reg: StatusReg },
            AckSend { status_reg: StatusReg },
            GetEprQubit { qubit_reg: TeleportQubReg },
            TpRecvBits { x_reg: BitXReg, z_reg: BitZReg },
            Quantum { kind: X, args: vec![TeleportQubReg], cond: Some(CondBit::BitX) },
            Quantum { kind: Z, args: vec![TeleportQubReg], cond: Some(CondBit::BitZ) },
            TransferSuccessNotify,
            EprRelease { qubit_reg: TeleportQubReg },
        ],
        // Cat entangler, source side: CNOT the data qubit onto the local EPR
        // half, measure it out, ship the X-correction bit.
        ProtocolOpcode::SendCatEntQubit => vec![
            EprReserve { id_reg: EprIdReg },
            SendEprId { id_reg: EprIdReg },
            AckWait { status_reg: StatusReg },
            GetEprQubit { qubit_reg: EprQubReg },
            Quantum { kind: Cnot, args: vec![CommQubReg, EprQubReg], cond: None },
            Quantum { kind: Meas, args: vec![EprQubReg, BitXReg], cond: None },
            EprRelease { qubit_reg: EprQubReg },
            TpSendBits { z_reg: BitZReg, x_reg: BitXReg },
        ],
        // Cat entangler, destination side: the surviving EPR half becomes the
        // proxy qubit; the pair entry stays occupied until disentanglement.
        ProtocolOpcode::GetCatEntQubit => vec![
            RecvEprId { id_reg: EprIdReg },
            EprReserveSync { status_reg: StatusReg },
            AckSend { status_reg: StatusReg },
            GetEprQubit { qubit_reg: TeleportQubReg },
            TpRecvBits { x_reg: BitXReg, z_reg: BitZReg },
            Quantum { kind: X, args: vec![TeleportQubReg], cond: Some(CondBit::BitX) },
            TransferSuccessNotify,
        ],
        // Cat disentangler, proxy side: measure the proxy in the X basis,
        // release its pair entry, ship the Z-correction bit.
        ProtocolOpcode::SendCatDisentQubit => vec![
            Quantum { kind: H, args: vec![CommQubReg], cond: None },
            Quantum { kind: Meas, args: vec![CommQubReg, BitZReg], cond: None },
            EprRelease { qubit_reg: CommQubReg },
            TpSendBits { z_reg: BitZReg, x_reg: BitXReg },
        ],
        // Cat disentangler, home side: apply the conditional Z correction to
        // the data qubit and notify the QPU.
        ProtocolOpcode::GetCatDisentQubit => vec![
            TpRecvBits { x_reg: BitXReg, z_reg: BitZReg },
            Quantum { kind: Z, args: vec![CommQubReg], cond: Some(CondBit::BitZ) },
            TransferSuccessNotify,
        ],
    }
}

/// Render the full microcode table in a diffable text format: one block per
/// opcode, one micro-op per line.
pub fn microcode_table_text() -> String {
    let mut out = String::new();
    for opcode in [
        ProtocolOpcode::SendTpQubit,
        ProtocolOpcode::GetTpQubit,
        ProtocolOpcode::SendCatEntQubit,
        ProtocolOpcode::GetCatEntQubit,
        ProtocolOpcode::SendCatDisentQubit,
        ProtocolOpcode::GetCatDisentQubit,
    ] {
        out.push_str(opcode.mnemonic());
        out.push_str(":\n");
        for uop in decode(opcode) {
            out.push_str("  ");
            out.push_str(&render_uop(&uop));
            out.push('\n');
        }
    }
    out
}

fn render_uop(uop: &MicroOp) -> String {
    match uop {
        MicroOp::EprReserve { id_reg } => format!("EPR_RESERVE {}, <dst_node_id>", id_reg.name()),
        MicroOp::EprReserveSync { status_reg } => format!("EPR_RESERVE_SYNC {}", status_reg.name()),
        MicroOp::GetEprQubit { qubit_reg } => format!("GET_EPR_QUBIT {}", qubit_reg.name()),
        MicroOp::EprRelease { qubit_reg } => format!("EPR_RELEASE {}", qubit_reg.name()),
        MicroOp::SendEprId { id_reg } => {
            format!("SEND_EPR_ID <dst_node_id>, <transfer_id>, [{}]", id_reg.name())
        }
        MicroOp::RecvEprId { id_reg } => format!("RECV_EPR_ID {}, <transfer_id>", id_reg.name()),
        MicroOp::AckWait { status_reg } => {
            format!("ACK_WAIT <dst_node_id>, <transfer_id>, {}", status_reg.name())
        }
        MicroOp::AckSend { status_reg } => {
            format!("ACK_SEND <src_node_id>, <transfer_id>, {}", status_reg.name())
        }
        MicroOp::TpSendBits { z_reg, x_reg } => {
            format!("TP_SEND_BITS <dst_node_id>, <transfer_id>, {}, {}", z_reg.name(), x_reg.name())
        }
        MicroOp::TpRecvBits { x_reg, z_reg } => {
            format!("TP_RECV_BITS {}, {}, <transfer_id>", x_reg.name(), z_reg.name())
        }
        MicroOp::TransferSuccessNotify => "TRANSFER_SUCCESS_NOTIFY <transfer_id>".to_string(),
        MicroOp::Quantum { kind, args, cond } => {
            let name = match kind {
                QuantumKind::Cnot => "CNOT",
                QuantumKind::H => "H",
                QuantumKind::X => "X",
                QuantumKind::Z => "Z",
                QuantumKind::Meas => "MEAS",
            };
            let args: Vec<&str> = args.iter().map(|r| r.name()).collect();
            let prefix = match cond {
                Some(CondBit::BitX) => "(BitXReg) ",
                Some(CondBit::BitZ) => "(BitZReg) ",
                None => "",
            };
            format!("{prefix}{name} {}", args.join(", "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::isa::OpCategory;
    use super::*;

    #[test]
    fn send_tp_is_the_ten_op_sequence() {
        let uops = decode(ProtocolOpcode::SendTpQubit);
        assert_eq!(uops.len(), 10);
        assert!(matches!(uops[0], MicroOp::EprReserve { .. }));
        assert!(matches!(uops[9], MicroOp::TpSendBits { .. }));
        // EPR mgmt / classical / quantum split matches the instruction doc.
        let cats: Vec<OpCategory> = uops.iter().map(|u| u.category()).collect();
        assert_eq!(cats.iter().filter(|c| **c == OpCategory::EprManagement).count(), 3);
        assert_eq!(cats.iter().filter(|c| **c == OpCategory::ClassicalComm).count(), 3);
        assert_eq!(cats.iter().filter(|c| **c == OpCategory::Quantum).count(), 4);
    }

    #[test]
    fn get_tp_is_the_nine_op_sequence_with_conditional_corrections() {
        let uops = decode(ProtocolOpcode::GetTpQubit);
        assert_eq!(uops.len(), 9);
        assert!(matches!(uops[0], MicroOp::RecvEprId { .. }));
        let x = &uops[5];
        let z = &uops[6];
        assert!(matches!(
            x,
            MicroOp::Quantum { kind: QuantumKind::X, cond: Some(CondBit::BitX), .. }
        ));
        assert!(matches!(
            z,
            MicroOp::Quantum { kind: QuantumKind::Z, cond: Some(CondBit::BitZ), .. }
        ));
        assert!(matches!(uops[8], MicroOp::EprRelease { .. }));
    }

    #[test]
    fn conditions_only_on_quantum_ops() {
        for opcode in [
            ProtocolOpcode::SendTpQubit,
            ProtocolOpcode::GetTpQubit,
            ProtocolOpcode::SendCatEntQubit,
            ProtocolOpcode::GetCatEntQubit,
            ProtocolOpcode::SendCatDisentQubit,
            ProtocolOpcode::GetCatDisentQubit,
        ] {
            for uop in decode(opcode) {
                if uop.cond().is_some() {
                    assert_eq!(uop.category(), OpCategory::Quantum);
                }
            }
        }
    }

    #[test]
    fn decode_is_pure() {
        assert_eq!(decode(ProtocolOpcode::SendCatEntQubit), decode(ProtocolOpcode::SendCatEntQubit));
    }

    #[test]
    fn table_text_lists_all_opcodes() {
        let text = microcode_table_text();
        for m in ["SEND_TP_QUBIT", "GET_TP_QUBIT", "SEND_CAT_ENT_QUBIT", "GET_CAT_DISENT_QUBIT"] {
            assert!(text.contains(m), "missing {m} in:\n{text}");
        }
        assert!(text.contains("(BitXReg) X TeleportQubReg"));
        assert!(text.contains("(BitZReg) Z TeleportQubReg"));
    }
}
