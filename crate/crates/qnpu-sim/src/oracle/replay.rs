use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64 as C;

use crate::engine::{BitHandle, EprSide, ProtocolTrace, Slot, TraceGate, TraceOp};
use crate::qnpu::TransferId;

use super::state::{OracleError, StateVector};

/// How measurement outcomes are handled during replay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomePolicy {
    /// Follow every measurement branch; exact and exhaustive.
    EnumerateAll,
    /// Follow one sampled path per run, using the given seed.
    Sample(u64),
}

/// One measurement branch after replaying a trace.
#[derive(Debug, Clone)]
pub struct Branch {
    pub probability: f64,
    pub state: StateVector,
    pub bits: BTreeMap<BitHandle, u8>,
}

/// Maps physical slots touched by a trace onto dense state-vector qubits and
/// replays traces over them.
#[derive(Debug, Clone)]
pub struct Replayer {
    slots: Vec<Slot>,
    index: BTreeMap<Slot, usize>,
    /// Transfers whose EPR pair appears in the trace; initialized as Bell
    /// pairs (prefetched entanglement).
    pair_transfers: Vec<TransferId>,
}

impl Replayer {
    /// Collect every slot a trace touches, plus any extra slots the caller
    /// wants tracked (inputs/outputs that might not appear in gates).
    pub fn new(trace: &ProtocolTrace, extra_slots: &[Slot]) -> Result<Self, OracleError> {
        let mut set: BTreeSet<Slot> = extra_slots.iter().copied().collect();
        for op in &trace.ops {
            match op {
                TraceOp::Gate { qubits, .. } => set.extend(qubits.iter().copied()),
                TraceOp::Meas { qubit, .. } => {
                    set.insert(*qubit);
                }
            }
        }
        // Every transfer with one half present owns a full Bell pair.
        let mut pairs: BTreeSet<TransferId> = BTreeSet::new();
        for slot in set.clone() {
            if let Slot::Epr { transfer, .. } = slot {
                pairs.insert(transfer);
            }
        }
        for &t in &pairs {
            set.insert(Slot::Epr { transfer: t, side: EprSide::Src });
            set.insert(Slot::Epr { transfer: t, side: EprSide::Dst });
        }
        let slots: Vec<Slot> = set.into_iter().collect();
        if slots.len() > super::state::MAX_QUBITS {
            return Err(OracleError::TooManyQubits { qubits: slots.len() });
        }
        let index = slots.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        Ok(Self { slots, index, pair_transfers: pairs.into_iter().collect() })
    }

    pub fn qubit_count(&self) -> usize {
        self.slots.len()
    }

    pub fn qubit_of(&self, slot: Slot) -> Result<usize, OracleError> {
        self.index
            .get(&slot)
            .copied()
            .ok_or(OracleError::UnallocatedSlot { slot: format!("{slot:?}") })
    }

    /// Build the pre-protocol state: `joint` holds the amplitudes of the
    /// listed data slots (in slot-list bit order, slot 0 = least significant
    /// bit); all other data slots start in |0>; every prefetched EPR pair
    /// starts in (|00>+|11>)/sqrt(2).
    pub fn initial_state(&self, joint_slots: &[Slot], joint: &[C]) -> Result<StateVector, OracleError> {
        assert_eq!(joint.len(), 1 << joint_slots.len());
        let norm: f64 = joint.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(OracleError::Unnormalized { norm });
        }
        let mut psi = StateVector::zero(self.qubit_count())?;
        // Place the joint amplitudes.
        if !joint_slots.is_empty() {
            let positions: Vec<usize> = joint_slots
                .iter()
                .map(|s| self.qubit_of(*s))
                .collect::<Result<_, _>>()?;
            let mut amps = vec![C::new(0.0, 0.0); psi.amps.len()];
            for (k, amp) in joint.iter().enumerate() {
                let mut idx = 0usize;
                for (pos, q) in positions.iter().enumerate() {
                    if k & (1 << pos) != 0 {
                        idx |= 1 << q;
                    }
                }
                amps[idx] = *amp;
            }
            psi.amps = amps;
        }
        // Entangle the prefetched pairs.
        for &t in &self.pair_transfers {
            let a = self.qubit_of(Slot::Epr { transfer: t, side: EprSide::Src })?;
            let b = self.qubit_of(Slot::Epr { transfer: t, side: EprSide::Dst })?;
            psi.h(a);
            psi.cnot(a, b);
        }
        Ok(psi)
    }

    /// Replay a trace. Under `EnumerateAll`, returns all measurement
    /// branches with probabilities and post-measurement states after
    /// conditional corrections; under `Sample`, one branch.
    pub fn apply_trace(
        &self,
        psi: &StateVector,
        trace: &ProtocolTrace,
        policy: OutcomePolicy,
    ) -> Result<Vec<Branch>, OracleError> {
        let norm = psi.norm_sq();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(OracleError::Unnormalized { norm });
        }
        let mut rng = match policy {
            OutcomePolicy::Sample(seed) => Some(SplitMix::new(seed)),
            OutcomePolicy::EnumerateAll => None,
        };
        let mut branches = vec![Branch {
            probability: 1.0,
            state: psi.clone(),
            bits: BTreeMap::new(),
        }];
        for op in &trace.ops {
            match op {
                TraceOp::Gate { gate, qubits, cond } => {
                    let qs: Vec<usize> =
                        qubits.iter().map(|s| self.qubit_of(*s)).collect::<Result<_, _>>()?;
                    for b in &mut branches {
                        if let Some(handle) = cond {
                            if b.bits.get(handle).copied().unwrap_or(0) == 0 {
                                continue;
                            }
                        }
                        apply_gate(&mut b.state, *gate, &qs);
                        b.state.assert_normalized();
                    }
                }
                TraceOp::Meas { qubit, bit } => {
                    let q = self.qubit_of(*qubit)?;
                    let mut next = Vec::with_capacity(branches.len() * 2);
                    for b in branches {
                        let outcomes = b.state.measure_branches(q);
                        match &mut rng {
                            None => {
                                for (value, p, state) in outcomes {
                                    let mut bits = b.bits.clone();
                                    bits.insert(*bit, value);
                                    next.push(Branch {
                                        probability: b.probability * p,
                                        state,
                                        bits,
                                    });
                                }
                            }
                            Some(rng) => {
                                let draw = rng.next_f64();
                                let mut acc = 0.0;
                                let mut chosen = None;
                                for (value, p, state) in outcomes {
                                    acc += p;
                                    if draw < acc || chosen.is_none() {
                                        chosen = Some((value, state));
                                        if draw < acc {
                                            break;
                                        }
                                    }
                                }
                                let (value, state) =
                                    chosen.ok_or(OracleError::ImpossibleBranch)?;
                                let mut bits = b.bits.clone();
                                bits.insert(*bit, value);
                                next.push(Branch { probability: b.probability, state, bits });
                            }
                        }
                    }
                    branches = next;
                }
            }
        }
        Ok(branches)
    }
}

fn apply_gate(state: &mut StateVector, gate: TraceGate, qs: &[usize]) {
    match gate {
        TraceGate::H => state.h(qs[0]),
        TraceGate::X => state.x(qs[0]),
        TraceGate::Y => state.y(qs[0]),
        TraceGate::Z => state.z(qs[0]),
        TraceGate::Rx(t) => state.rx(qs[0], t),
        TraceGate::Ry(t) => state.ry(qs[0], t),
        TraceGate::Rz(t) => state.rz(qs[0], t),
        TraceGate::Cnot => state.cnot(qs[0], qs[1]),
        TraceGate::Cp(t) => state.cp(qs[0], qs[1], t),
        TraceGate::Swap => state.swap_gate(qs[0], qs[1]),
    }
}

/// Small deterministic generator for sampled replay.
struct SplitMix {
    state: u64,
}

impl SplitMix {
    fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_trace_is_identity() {
        let trace = ProtocolTrace::default();
        let slot = Slot::Data { node: 0, index: 0 };
        let rep = Replayer::new(&trace, &[slot]).unwrap();
        let a = C::new(0.6, 0.0);
        let b = C::new(0.0, 0.8);
        let psi = rep.initial_state(&[slot], &[a, b]).unwrap();
        let out = rep.apply_trace(&psi, &trace, OutcomePolicy::EnumerateAll).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out[0].state.fidelity(&psi) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn epr_creation_subtrace_yields_bell_state() {
        let (a, b) = (Slot::Data { node: 0, index: 0 }, Slot::Data { node: 0, index: 1 });
        let trace = ProtocolTrace {
            ops: vec![
                TraceOp::Gate { gate: TraceGate::H, qubits: vec![a], cond: None },
                TraceOp::Gate { gate: TraceGate::Cnot, qubits: vec![a, b], cond: None },
            ],
            final_location: vec![],
        };
        let rep = Replayer::new(&trace, &[]).unwrap();
        let psi = rep.initial_state(&[], &[C::new(1.0, 0.0)]).unwrap();
        let out = rep.apply_trace(&psi, &trace, OutcomePolicy::EnumerateAll).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let s = &out[0].state;
        assert!((s.amps[0].re - r).abs() < 1e-12);
        assert!((s.amps[3].re - r).abs() < 1e-12);
    }

    #[test]
    fn branch_probabilities_sum_to_one() {
        let q = Slot::Data { node: 0, index: 0 };
        let trace = ProtocolTrace {
            ops: vec![
                TraceOp::Gate { gate: TraceGate::H, qubits: vec![q], cond: None },
                TraceOp::Meas { qubit: q, bit: BitHandle::Creg { node: 0, reg: 0, index: 0 } },
            ],
            final_location: vec![],
        };
        let rep = Replayer::new(&trace, &[]).unwrap();
        let psi = rep.initial_state(&[], &[C::new(1.0, 0.0)]).unwrap();
        let out = rep.apply_trace(&psi, &trace, OutcomePolicy::EnumerateAll).unwrap();
        assert_eq!(out.len(), 2);
        let total: f64 = out.iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
