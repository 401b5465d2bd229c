use std::collections::BTreeMap;

use super::isa::RegName;

/// Values held by microcode registers during execution. The cycle-level
/// simulator tracks identities (pair ids, qubit slots, bit handles), not
/// quantum data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegValue {
    PairId(u64),
    /// Communication-zone qubit slot index on the local node.
    QubitIndex(usize),
    Bit(u8),
    Status(bool),
}

/// Per-lane register file: a register is readable only when its ready bit is
/// set. Lanes own private files, so register names never alias across lanes.
#[derive(Debug, Clone, Default)]
pub struct RegisterFile {
    regs: BTreeMap<RegName, RegValue>,
}

impl RegisterFile {
    pub fn new() -> Self {
        Self::default()
    }

    /// Write a value and set the ready bit.
    pub fn write(&mut self, name: RegName, value: RegValue) {
        self.regs.insert(name, value);
    }

    pub fn is_ready(&self, name: RegName) -> bool {
        self.regs.contains_key(&name)
    }

    /// Read a ready register; panics on a not-ready read, which would be a
    /// microcode sequencing bug.
    pub fn read(&self, name: RegName) -> RegValue {
        *self
            .regs
            .get(&name)
            .unwrap_or_else(|| panic!("register {} read before its ready bit was set", name.name()))
    }

    pub fn read_qubit(&self, name: RegName) -> usize {
        match self.read(name) {
            RegValue::QubitIndex(i) => i,
            other => panic!("register {} holds {other:?}, expected a qubit index", name.name()),
        }
    }

    pub fn read_pair_id(&self, name: RegName) -> u64 {
        match self.read(name) {
            RegValue::PairId(i) => i,
            other => panic!("register {} holds {other:?}, expected a pair id", name.name()),
        }
    }

    /// Clear all ready bits (used when a lane starts a new instruction).
    pub fn reset(&mut self) {
        self.regs.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ready_bit_gates_reads() {
        let mut rf = RegisterFile::new();
        assert!(!rf.is_ready(RegName::EprIdReg));
        rf.write(RegName::EprIdReg, RegValue::PairId(4));
        assert!(rf.is_ready(RegName::EprIdReg));
        assert_eq!(rf.read_pair_id(RegName::EprIdReg), 4);
    }

    #[test]
    #[should_panic(expected = "read before its ready bit")]
    fn not_ready_read_panics() {
        let rf = RegisterFile::new();
        let _ = rf.read(RegName::BitXReg);
    }
}
