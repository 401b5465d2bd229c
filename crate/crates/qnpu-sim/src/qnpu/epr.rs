use thiserror::Error;

/// State of one EPR pair entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EprState {
    Available,
    Occupied,
    Empty,
}

/// One row of the per-node EPR resource table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EprEntry {
    pub pair_id: u64,
    pub remote_node: usize,
    pub state: EprState,
    /// Communication-zone qubit index holding the local half of the pair.
    pub epr_qubit_index: usize,
}

/// Prefetch model for the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EprMode {
    /// EPR pairs are pre-generated ahead of need: reservation never waits
    /// and synthesizes a fresh entry when none is buffered.
    PerfectPrefetch,
    /// A fixed number of buffered pairs per remote node; reservation stalls
    /// when they are exhausted.
    Finite { pairs_per_peer: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReserveOutcome {
    Reserved { pair_id: u64, qubit_index: usize },
    Stall,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EprError {
    #[error("release of qubit index {qubit_index} which holds no occupied EPR pair")]
    ReleaseNotOccupied { qubit_index: usize },
}

/// Per-node table tracking prefetched EPR pairs.
#[derive(Debug, Clone)]
pub struct EprResourceTable {
    node: usize,
    mode: EprMode,
    entries: Vec<EprEntry>,
    next_qubit_index: usize,
    /// Pair id allocator; the simulator strides allocation by node count so
    /// ids are globally unique and the two halves of a pair share one id.
    next_pair_id: u64,
    pair_id_stride: u64,
    reserved_total: u64,
    released_total: u64,
}

impl EprResourceTable {
    pub fn new(node: usize, mode: EprMode) -> Self {
        Self::with_id_allocation(node, mode, 0, 1)
    }

    pub fn with_id_allocation(node: usize, mode: EprMode, first_id: u64, stride: u64) -> Self {
        Self {
            node,
            mode,
            entries: Vec::new(),
            next_qubit_index: 0,
            next_pair_id: first_id,
            pair_id_stride: stride.max(1),
            reserved_total: 0,
            released_total: 0,
        }
    }

    pub fn node(&self) -> usize {
        self.node
    }

    pub fn entries(&self) -> &[EprEntry] {
        &self.entries
    }

    /// Buffer `count` available pairs toward `remote_node` (finite mode setup).
    pub fn prefill(&mut self, remote_node: usize, count: usize) {
        for _ in 0..count {
            let pair_id = self.alloc_pair_id();
            let qubit_index = self.alloc_qubit_index();
            self.entries.push(EprEntry {
                pair_id,
                remote_node,
                state: EprState::Available,
                epr_qubit_index: qubit_index,
            });
        }
    }

    /// Occupy a prefetched pair toward `remote_node`: the lowest-pair-id
    /// available entry wins. Under perfect prefetch an exhausted table
    /// synthesizes a fresh entry at zero wait; finite mode stalls.
    pub fn reserve(&mut self, remote_node: usize) -> ReserveOutcome {
        let candidate = self
            .entries
            .iter_mut()
            .filter(|e| e.state == EprState::Available && e.remote_node == remote_node)
            .min_by_key(|e| e.pair_id);
        if let Some(entry) = candidate {
            entry.state = EprState::Occupied;
            self.reserved_total += 1;
            return ReserveOutcome::Reserved { pair_id: entry.pair_id, qubit_index: entry.epr_qubit_index };
        }
        match self.mode {
            EprMode::PerfectPrefetch => {
                let pair_id = self.alloc_pair_id();
                let qubit_index = self.alloc_qubit_index();
                self.entries.push(EprEntry {
                    pair_id,
                    remote_node,
                    state: EprState::Occupied,
                    epr_qubit_index: qubit_index,
                });
                self.reserved_total += 1;
                ReserveOutcome::Reserved { pair_id, qubit_index }
            }
            EprMode::Finite { .. } => ReserveOutcome::Stall,
        }
    }

    /// Record a pair reserved by the peer node (the sync step of a GET-side
    /// sequence): installs an occupied entry with the peer-chosen pair id.
    pub fn reserve_synced(&mut self, remote_node: usize, pair_id: u64) -> usize {
        let qubit_index = self.alloc_qubit_index();
        self.entries.push(EprEntry {
            pair_id,
            remote_node,
            state: EprState::Occupied,
            epr_qubit_index: qubit_index,
        });
        self.reserved_total += 1;
        qubit_index
    }

    /// Mark the pair holding `qubit_index` empty, freeing the qubit.
    pub fn release(&mut self, qubit_index: usize) -> Result<(), EprError> {
        let entry = self
            .entries
            .iter_mut()
            .find(|e| e.state == EprState::Occupied && e.epr_qubit_index == qubit_index);
        match entry {
            Some(e) => {
                e.state = EprState::Empty;
                self.released_total += 1;
                Ok(())
            }
            None => Err(EprError::ReleaseNotOccupied { qubit_index }),
        }
    }

    pub fn occupied_count(&self) -> usize {
        self.entries.iter().filter(|e| e.state == EprState::Occupied).count()
    }

    pub fn reserved_total(&self) -> u64 {
        self.reserved_total
    }

    pub fn released_total(&self) -> u64 {
        self.released_total
    }

    /// Table safety: every comm-zone qubit index backs at most one non-empty
    /// entry.
    pub fn check_qubit_uniqueness(&self) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        for e in &self.entries {
            if e.state != EprState::Empty && !seen.insert(e.epr_qubit_index) {
                return false;
            }
        }
        true
    }

    fn alloc_pair_id(&mut self) -> u64 {
        let id = self.next_pair_id;
        self.next_pair_id += self.pair_id_stride;
        id
    }

    fn alloc_qubit_index(&mut self) -> usize {
        // Reuse the lowest freed comm-zone qubit before growing the zone.
        let in_use: std::collections::BTreeSet<usize> = self
            .entries
            .iter()
            .filter(|e| e.state != EprState::Empty)
            .map(|e| e.epr_qubit_index)
            .collect();
        let mut idx = 0;
        while in_use.contains(&idx) {
            idx += 1;
        }
        self.next_qubit_index = self.next_qubit_index.max(idx + 1);
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reserve_takes_lowest_pair_id_and_occupies() {
        let mut t = EprResourceTable::new(0, EprMode::Finite { pairs_per_peer: 2 });
        t.prefill(1, 2);
        let r = t.reserve(1);
        assert_eq!(r, ReserveOutcome::Reserved { pair_id: 0, qubit_index: 0 });
        assert_eq!(t.entries()[0].state, EprState::Occupied);
    }

    #[test]
    fn empty_table_synthesizes_under_perfect_prefetch() {
        let mut t = EprResourceTable::new(0, EprMode::PerfectPrefetch);
        match t.reserve(3) {
            ReserveOutcome::Reserved { .. } => {}
            ReserveOutcome::Stall => panic!("perfect prefetch must not stall"),
        }
    }

    #[test]
    fn second_reserve_stalls_in_finite_mode() {
        let mut t = EprResourceTable::new(0, EprMode::Finite { pairs_per_peer: 1 });
        t.prefill(1, 1);
        assert!(matches!(t.reserve(1), ReserveOutcome::Reserved { .. }));
        assert_eq!(t.reserve(1), ReserveOutcome::Stall);
    }

    #[test]
    fn release_of_occupied_empties_entry() {
        let mut t = EprResourceTable::new(0, EprMode::PerfectPrefetch);
        let ReserveOutcome::Reserved { qubit_index, .. } = t.reserve(1) else {
            panic!("reserve failed")
        };
        t.release(qubit_index).unwrap();
        assert_eq!(t.occupied_count(), 0);
    }

    #[test]
    fn release_of_available_entry_is_a_fault() {
        let mut t = EprResourceTable::new(0, EprMode::Finite { pairs_per_peer: 1 });
        t.prefill(1, 1);
        let idx = t.entries()[0].epr_qubit_index;
        assert!(t.release(idx).is_err());
    }

    #[test]
    fn reserve_release_cycles_conserve_entries() {
        let mut t = EprResourceTable::new(0, EprMode::PerfectPrefetch);
        for round in 0..50 {
            let peer = 1 + (round % 3);
            let ReserveOutcome::Reserved { qubit_index, .. } = t.reserve(peer) else {
                panic!("reserve failed")
            };
            t.release(qubit_index).unwrap();
            assert_eq!(t.occupied_count(), 0);
            assert!(t.check_qubit_uniqueness());
        }
        assert_eq!(t.reserved_total(), t.released_total());
    }
}
