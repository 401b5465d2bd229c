use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use thiserror::Error;

use crate::compile::{CompiledProgram, QpuInstr};
use crate::qnpu::{
    decode, ClassicalMessage, CondBit, EprMode, EprResourceTable, MicroOp, NetworkBuffers, Payload,
    PayloadKind, ProtocolOpcode, QuantumKind, RegName, RegValue, RegisterFile, RecvOutcome,
    ReserveOutcome, TransferId,
};

use super::latency::{ArchConfig, ArchMode, LatencyModel};
use super::trace::{BitHandle, EprSide, EventLogEntry, ProtocolTrace, Slot, TraceGate, TraceOp};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("deadlock at cycle {cycle}: programs incomplete and no event can fire; blocked: {blocked:?}")]
    Deadlock { cycle: u64, blocked: Vec<String> },
    #[error("protocol fault at cycle {cycle}: {msg}")]
    Fault { cycle: u64, msg: String },
}

/// Outcome of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// Max over nodes of the node finish cycle.
    pub total_cycles: u64,
    /// Finish cycle per node.
    pub node_cycles: Vec<u64>,
    pub uops_executed: u64,
    pub messages_sent: u64,
    pub mode: ArchMode,
    pub width: usize,
    pub latency: LatencyModel,
    pub protocol: crate::compile::Protocol,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum InstrState {
    Pending { preds_left: usize },
    Armed { done_at: u64 },
    Done,
}

/// A protocol instruction in flight on a decoder lane.
#[derive(Debug)]
struct LaneExec {
    instr: usize,
    opcode: ProtocolOpcode,
    tid: TransferId,
    peer: usize,
    /// Data qubit operand of the instruction.
    qubit: usize,
    uops: Vec<MicroOp>,
    pos: usize,
    /// Time the previous micro-op finished; the next one starts here.
    cursor: u64,
    /// Completion time of the in-flight micro-op, when known.
    next_at: Option<u64>,
    regs: RegisterFile,
}

#[derive(Debug)]
struct Lane {
    exec: Option<LaneExec>,
    free_at: u64,
}

impl Default for Lane {
    fn default() -> Self {
        Lane { exec: None, free_at: 0 }
    }
}

#[derive(Debug)]
struct NodeRt {
    state: Vec<InstrState>,
    ready_at: Vec<u64>,
    /// Dispatch cycle of each QPU-side instruction (decoupled mode).
    qpu_slot: Vec<u64>,
    succs: Vec<Vec<usize>>,
    /// Instruction indices routed to decoder lanes, in program order; every
    /// instruction in monolithic mode.
    lane_order: Vec<usize>,
    /// lane_order position per instruction.
    lane_pos: Vec<Option<usize>>,
    issued: Vec<bool>,
    issue_ptr: usize,
    /// Positions in lane_order that are ready to issue (decoupled).
    ready_delegates: BTreeSet<usize>,
    /// GET-type delegates whose initiating message has not arrived.
    gated: BTreeMap<TransferId, usize>,
    /// Dependency-ready QPU instructions awaiting arming (decoupled).
    qpu_ready: Vec<usize>,
    /// WaitNotify instructions parked until their notify fires.
    waiting_notify: BTreeMap<TransferId, usize>,
    /// Armed instruction completions.
    armed: BinaryHeap<Reverse<(u64, usize)>>,
    lanes: Vec<Lane>,
    rr_next: usize,
    epr: EprResourceTable,
    notify_at: BTreeMap<TransferId, u64>,
    /// Per-transfer comm-zone qubit index of this node's EPR half.
    epr_qubit_of: BTreeMap<TransferId, usize>,
    /// Pair ids reserved ahead of lane issue, per transfer.
    early_pair: BTreeMap<TransferId, u64>,
    /// The EPR table unit handles one reservation or sync at a time.
    epr_unit_free: u64,
    /// Data qubit index -> physical slot currently holding its state.
    location: BTreeMap<usize, Slot>,
    /// Monolithic mode: the single quantum execution unit is free from here.
    quantum_free: u64,
    finish: u64,
    done_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Ev {
    Wake,
    MsgArrive { tid: TransferId },
    /// The complementary SEND instruction started executing: promote the
    /// gated GET.
    SendIssued { tid: TransferId },
    /// The EPR table unit processes an arrived EPR-id message: install the
    /// synced pair and acknowledge, independent of decoder lanes.
    EprAutoSync { tid: TransferId },
}

pub struct Machine<'p> {
    program: &'p CompiledProgram,
    cfg: &'p ArchConfig,
    send_issued: Vec<bool>,
    nodes: Vec<NodeRt>,
    net: NetworkBuffers,
    heap: BinaryHeap<Reverse<(u64, usize, u64, Ev)>>,
    seq: u64,
    clock: u64,
    uops_executed: u64,
    qtrace: Option<Vec<TraceOp>>,
    event_log: Vec<EventLogEntry>,
    fault: Option<SimError>,
}

impl<'p> Machine<'p> {
    pub fn new(program: &'p CompiledProgram, cfg: &'p ArchConfig) -> Result<Self, SimError> {
        cfg.validate().map_err(|e| SimError::Config(e.to_string()))?;
        let n_nodes = program.programs.len();
        let width = match cfg.mode {
            ArchMode::Monolithic => 1,
            ArchMode::Decoupled => cfg.qnpu_width,
        };

        let mut nodes = Vec::with_capacity(n_nodes);
        for (node_idx, prog) in program.programs.iter().enumerate() {
            let n = prog.instrs.len();
            let mut preds_left = vec![0usize; n];
            let mut succs = vec![Vec::new(); n];
            for &(from, to) in &prog.dep_edges {
                preds_left[to] += 1;
                succs[from].push(to);
            }
            let state: Vec<InstrState> =
                preds_left.iter().map(|&p| InstrState::Pending { preds_left: p }).collect();

            // Protocol instructions execute on decoder lanes in both modes;
            // the monolithic unit is modeled as one lane whose quantum
            // micro-ops share the node's only quantum execution unit.
            let lane_order: Vec<usize> = (0..n)
                .filter(|&i| matches!(prog.instrs[i], QpuInstr::Delegate(_)))
                .collect();
            let mut lane_pos = vec![None; n];
            for (pos, &i) in lane_order.iter().enumerate() {
                lane_pos[i] = Some(pos);
            }

            // Dispatch pacing: one QPU instruction enters the scoreboard per
            // cycle, in program order.
            let mut qpu_slot = vec![0u64; n];
            let mut slot = 0u64;
            for i in 0..n {
                if !matches!(prog.instrs[i], QpuInstr::Delegate(_)) {
                    qpu_slot[i] = slot;
                    slot += 1;
                }
            }

            let mut epr = EprResourceTable::with_id_allocation(
                node_idx,
                cfg.epr_mode,
                node_idx as u64,
                n_nodes as u64,
            );
            if let EprMode::Finite { pairs_per_peer } = cfg.epr_mode {
                for peer in 0..n_nodes {
                    if peer != node_idx {
                        epr.prefill(peer, pairs_per_peer);
                    }
                }
            }

            nodes.push(NodeRt {
                state,
                ready_at: vec![0; n],
                qpu_slot,
                succs,
                lane_order,
                lane_pos,
                issued: vec![false; n],
                issue_ptr: 0,
                ready_delegates: BTreeSet::new(),
                gated: BTreeMap::new(),
                qpu_ready: Vec::new(),
                waiting_notify: BTreeMap::new(),
                armed: BinaryHeap::new(),
                lanes: (0..width).map(|_| Lane::default()).collect(),
                rr_next: 0,
                epr,
                notify_at: BTreeMap::new(),
                epr_qubit_of: BTreeMap::new(),
                early_pair: BTreeMap::new(),
                epr_unit_free: 0,
                location: BTreeMap::new(),
                quantum_free: 0,
                finish: 0,
                done_count: 0,
            });
        }

        let qtrace = cfg.collect_quantum_trace.then(Vec::new);
        let transfer_count = program.transfers.len();
        let mut m = Machine {
            program,
            cfg,
            send_issued: vec![false; transfer_count],
            nodes,
            net: NetworkBuffers::new(None),
            heap: BinaryHeap::new(),
            seq: 0,
            clock: 0,
            uops_executed: 0,
            qtrace,
            event_log: Vec::new(),
            fault: None,
        };
        // Perfect prefetch extends to pair synchronization: the transfer
        // list is known up front, so every sending node reserves its pairs
        // and ships the ids at simulation start; acknowledgments flow back
        // from the peers' table units. Finite prefetch keeps reservation in
        // the decoder lanes where exhaustion can stall.
        if cfg.epr_mode == EprMode::PerfectPrefetch {
            for t in 0..m.program.transfers.len() {
                let info = &m.program.transfers[t];
                if matches!(
                    info.send_opcode,
                    crate::qnpu::ProtocolOpcode::SendTpQubit
                        | crate::qnpu::ProtocolOpcode::SendCatEntQubit
                ) {
                    m.early_reserve(info.src_node, info.id, 0);
                }
            }
        }
        // Seed: classify instructions that start dependency-free.
        for node in 0..n_nodes {
            let n = m.program.programs[node].instrs.len();
            for idx in 0..n {
                if matches!(m.nodes[node].state[idx], InstrState::Pending { preds_left: 0 }) {
                    m.on_instr_ready(node, idx, 0);
                }
            }
            m.schedule(0, node, Ev::Wake);
        }
        Ok(m)
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    fn schedule(&mut self, time: u64, node: usize, ev: Ev) {
        self.seq += 1;
        self.heap.push(Reverse((time, node, self.seq, ev)));
    }

    fn log(&mut self, cycle: u64, node: usize, unit: String, what: String) {
        if self.cfg.collect_event_log {
            self.event_log.push(EventLogEntry { cycle, node, unit, what });
        }
    }

    /// Run to completion.
    pub fn run(mut self) -> Result<(SimResult, ProtocolTrace, Vec<EventLogEntry>), SimError> {
        while self.step_event()? {}
        if let Some(fault) = self.fault.take() {
            return Err(fault);
        }
        if !self.all_done() {
            return Err(SimError::Deadlock { cycle: self.clock, blocked: self.blocked_report() });
        }
        debug_assert_eq!(self.net.sent_total(), self.net.received_total());
        debug_assert!(self.nodes.iter().all(|n| n.epr.occupied_count() == 0));
        debug_assert!(self.nodes.iter().all(|n| n.epr.check_qubit_uniqueness()));

        let node_cycles: Vec<u64> = self.nodes.iter().map(|n| n.finish).collect();
        let total = node_cycles.iter().copied().max().unwrap_or(0);
        let final_location = self.final_locations();
        let trace =
            ProtocolTrace { ops: self.qtrace.take().unwrap_or_default(), final_location };
        Ok((
            SimResult {
                total_cycles: total,
                node_cycles,
                uops_executed: self.uops_executed,
                messages_sent: self.net.sent_total(),
                mode: self.cfg.mode,
                width: self.cfg.qnpu_width,
                latency: self.cfg.latency,
                protocol: self.cfg.protocol,
            },
            trace,
            self.event_log,
        ))
    }

    /// Advance the clock to the next pending cycle and fire everything due.
    /// Returns false when the event queue is exhausted.
    pub fn step_event(&mut self) -> Result<bool, SimError> {
        let Some(&Reverse((t, _, _, _))) = self.heap.peek() else {
            return Ok(false);
        };
        debug_assert!(t >= self.clock, "time must be monotone");
        self.clock = t;
        while let Some(&Reverse((time, node, _, ev))) = self.heap.peek() {
            if time != t {
                break;
            }
            self.heap.pop();
            match ev {
                Ev::SendIssued { tid } => {
                    if let Some(pos) = self.nodes[node].gated.remove(&tid) {
                        self.nodes[node].ready_delegates.insert(pos);
                    }
                }
                Ev::EprAutoSync { tid } => self.auto_sync(node, tid, t),
                Ev::MsgArrive { .. } | Ev::Wake => {}
            }
            self.process_node(node, t);
            if self.fault.is_some() {
                return Ok(false);
            }
        }
        debug_assert_eq!(
            self.net.sent_total(),
            self.net.received_total() + self.net.in_flight() as u64
        );
        Ok(true)
    }

    fn all_done(&self) -> bool {
        self.nodes
            .iter()
            .enumerate()
            .all(|(i, n)| n.done_count == self.program.programs[i].instrs.len())
    }

    fn blocked_report(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, node) in self.nodes.iter().enumerate() {
            for (l, lane) in node.lanes.iter().enumerate() {
                if let Some(exec) = &lane.exec {
                    out.push(format!(
                        "node{} lane{} {} #t{} blocked at uop {:?}",
                        i,
                        l,
                        exec.opcode.mnemonic(),
                        exec.tid,
                        exec.uops.get(exec.pos)
                    ));
                }
            }
            if node.issue_ptr < node.lane_order.len() {
                let idx = node.lane_order[node.issue_ptr];
                if !node.issued[idx] {
                    out.push(format!(
                        "node{} next unissued instruction #{idx} in state {:?}",
                        i, node.state[idx]
                    ));
                }
            }
        }
        out
    }

    fn process_node(&mut self, node: usize, t: u64) {
        loop {
            let mut progressed = false;
            progressed |= self.finish_armed(node, t);
            progressed |= self.advance_lanes(node, t);
            progressed |= self.issue_to_lanes(node, t);
            progressed |= self.arm_qpu(node, t);
            if !progressed || self.fault.is_some() {
                break;
            }
        }
    }

    fn finish_armed(&mut self, node: usize, t: u64) -> bool {
        let mut progressed = false;
        while let Some(&Reverse((done_at, idx))) = self.nodes[node].armed.peek() {
            if done_at > t {
                break;
            }
            self.nodes[node].armed.pop();
            self.complete_instr(node, idx, done_at);
            progressed = true;
        }
        progressed
    }

    fn complete_instr(&mut self, node: usize, idx: usize, at: u64) {
        let rt = &mut self.nodes[node];
        rt.state[idx] = InstrState::Done;
        rt.done_count += 1;
        rt.finish = rt.finish.max(at);
        let succs = std::mem::take(&mut rt.succs[idx]);
        for &s in &succs {
            let rt = &mut self.nodes[node];
            rt.ready_at[s] = rt.ready_at[s].max(at);
            let now_ready = match &mut rt.state[s] {
                InstrState::Pending { preds_left } => {
                    *preds_left -= 1;
                    *preds_left == 0
                }
                _ => false,
            };
            if now_ready {
                self.on_instr_ready(node, s, at);
            }
        }
        self.nodes[node].succs[idx] = succs;
    }

    /// All dependencies of `idx` have completed: route it to the appropriate
    /// issue structure.
    fn on_instr_ready(&mut self, node: usize, idx: usize, now: u64) {
        let _ = now;
        let instr = &self.program.programs[node].instrs[idx];
        match instr {
            QpuInstr::Delegate(p) => {
                let pos = self.nodes[node].lane_pos[idx].expect("delegate position");
                // GET-type instructions occupy a decoder lane only once the
                // complementary SEND is executing somewhere: every message
                // the GET waits for is then guaranteed to arrive, so parked
                // lanes always drain. SENDs complete unconditionally (pair
                // synchronization is acknowledged by the peer's table unit).
                if p.opcode.is_get() && !self.send_issued[p.transfer_id as usize] {
                    self.nodes[node].gated.insert(p.transfer_id, pos);
                } else {
                    self.nodes[node].ready_delegates.insert(pos);
                }
            }
            _ => self.nodes[node].qpu_ready.push(idx),
        }
    }

    /// Reserve the pair for a SEND-type transfer and ship the EPR id to the
    /// peer, at instruction-readiness time.
    fn early_reserve(&mut self, node: usize, tid: TransferId, now: u64) {
        if self.nodes[node].epr_qubit_of.contains_key(&tid) {
            return;
        }
        let info = &self.program.transfers[tid as usize];
        let peer = info.dst_node;
        match self.nodes[node].epr.reserve(peer) {
            ReserveOutcome::Reserved { pair_id, qubit_index } => {
                self.nodes[node].epr_qubit_of.insert(tid, qubit_index);
                self.nodes[node].early_pair.insert(tid, pair_id);
                // One table port: prefetch synchronizations queue.
                let start = now.max(self.nodes[node].epr_unit_free);
                let at = start + self.cfg.latency.epr_reserve_lookup;
                self.nodes[node].epr_unit_free = at;
                self.send_message(node, peer, tid, Payload::EprId { pair_id }, at);
            }
            ReserveOutcome::Stall => {
                // Finite prefetch exhausted: the lane's EPR_RESERVE micro-op
                // will retry and stall there.
            }
        }
    }

    /// Issue eligible lane instructions to idle lanes in program order,
    /// round-robin over lanes. Every issued instruction terminates without
    /// needing another local issue slot: EPR-id synchronization is acked by
    /// the table unit autonomously, and GET-type instructions are only
    /// eligible once their initiating message is in flight from an already
    /// issued peer instruction. Work-conserving assignment is therefore
    /// deadlock-free at any width.
    fn issue_to_lanes(&mut self, node: usize, t: u64) -> bool {
        let mut progressed = false;
        loop {
            {
                let rt = &mut self.nodes[node];
                while rt.issue_ptr < rt.lane_order.len() && rt.issued[rt.lane_order[rt.issue_ptr]] {
                    rt.issue_ptr += 1;
                }
            }
            let Some(&pos) = self.nodes[node].ready_delegates.iter().next() else {
                return progressed;
            };
            let Some(lane) = self.pick_idle_lane(node, t) else {
                return progressed;
            };
            let idx = self.nodes[node].lane_order[pos];
            self.nodes[node].ready_delegates.remove(&pos);
            self.start_on_lane(node, lane, idx, t);
            progressed = true;
        }
    }

    fn pick_idle_lane(&mut self, node: usize, t: u64) -> Option<usize> {
        let rt = &mut self.nodes[node];
        let n = rt.lanes.len();
        for off in 0..n {
            let lane = (rt.rr_next + off) % n;
            if rt.lanes[lane].exec.is_none() && rt.lanes[lane].free_at <= t {
                rt.rr_next = (lane + 1) % n;
                return Some(lane);
            }
        }
        None
    }

    fn start_on_lane(&mut self, node: usize, lane: usize, idx: usize, t: u64) {
        self.nodes[node].issued[idx] = true;
        let lat = self.cfg.latency;
        let QpuInstr::Delegate(p) = self.program.programs[node].instrs[idx].clone() else {
            unreachable!("only protocol instructions are lane-issued")
        };
        let info = &self.program.transfers[p.transfer_id as usize];
        let peer = if info.src_node == node { info.dst_node } else { info.src_node };
        if self.cfg.collect_event_log {
            self.log(
                t,
                node,
                format!("lane{lane}"),
                format!("issue {} #t{}", p.opcode.mnemonic(), p.transfer_id),
            );
        }
        if !p.opcode.is_get() {
            self.send_issued[p.transfer_id as usize] = true;
            self.schedule(t, peer, Ev::SendIssued { tid: p.transfer_id });
        }
        self.nodes[node].lanes[lane].exec = Some(LaneExec {
            instr: idx,
            opcode: p.opcode,
            tid: p.transfer_id,
            peer,
            qubit: p.qubit,
            uops: decode(p.opcode),
            pos: 0,
            cursor: t + lat.decode,
            next_at: None,
            regs: RegisterFile::new(),
        });
        self.begin_uop(node, lane, t);
    }

    /// Arm dependency-ready QPU instructions: they start at max(ready,
    /// dispatch slot) and run to completion on the scoreboard. In monolithic
    /// mode gate executions additionally serialize through the node's single
    /// quantum unit.
    fn arm_qpu(&mut self, node: usize, _t: u64) -> bool {
        let mut progressed = false;
        while let Some(idx) = self.nodes[node].qpu_ready.pop() {
            let lat = self.cfg.latency;
            let base = self.nodes[node].ready_at[idx].max(self.nodes[node].qpu_slot[idx]);
            let instr = self.program.programs[node].instrs[idx].clone();
            let done_at = match &instr {
                QpuInstr::Apply { qubits, .. } => {
                    self.record_apply(node, &instr);
                    let d = self.local_cost(qubits.len());
                    self.quantum_unit_finish(node, base, d, false)
                }
                QpuInstr::Measure { .. } => {
                    self.record_apply(node, &instr);
                    self.quantum_unit_finish(node, base, lat.measurement, true)
                }
                QpuInstr::ZoneMoveToComm { .. } => base + lat.zone_move,
                QpuInstr::ZoneMoveToComp { qubit, transfer } => {
                    if let Some(tid) = transfer {
                        self.rebind_on_move(node, *qubit, *tid);
                    }
                    base + lat.zone_move
                }
                QpuInstr::WaitNotify { transfer } => match self.nodes[node].notify_at.get(transfer) {
                    Some(&at) => base.max(at),
                    None => {
                        self.nodes[node].waiting_notify.insert(*transfer, idx);
                        continue;
                    }
                },
                QpuInstr::Delegate(_) => unreachable!("delegates are lane-issued"),
            };
            let rt = &mut self.nodes[node];
            rt.state[idx] = InstrState::Armed { done_at };
            rt.armed.push(Reverse((done_at, idx)));
            self.schedule(done_at, node, Ev::Wake);
            progressed = true;
        }
        progressed
    }

    /// Completion time of a quantum execution starting no earlier than
    /// `ready`. The monolithic architecture drives all qubits through one
    /// control unit: two-qubit gates and measurements execute one at a time
    /// per node, while single-qubit pulses pipeline freely. Decoupled zones
    /// have independent units.
    fn quantum_unit_finish(&mut self, node: usize, ready: u64, duration: u64, exclusive: bool) -> u64 {
        if exclusive && self.cfg.mode == ArchMode::Monolithic {
            let start = ready.max(self.nodes[node].quantum_free);
            let done = start + duration;
            self.nodes[node].quantum_free = done;
            done
        } else {
            ready + duration
        }
    }

    fn advance_lanes(&mut self, node: usize, t: u64) -> bool {
        let mut progressed = false;
        for lane in 0..self.nodes[node].lanes.len() {
            loop {
                let Some(exec) = &self.nodes[node].lanes[lane].exec else {
                    break;
                };
                match exec.next_at {
                    Some(d) if d <= t => {
                        self.complete_uop(node, lane, d);
                        if self.fault.is_some() {
                            return progressed;
                        }
                        progressed = true;
                    }
                    Some(_) => break,
                    None => {
                        if self.begin_uop(node, lane, t) {
                            progressed = true;
                        } else {
                            break;
                        }
                    }
                }
            }
        }
        progressed
    }

    /// Attempt to start the current micro-op of the lane; false when blocked.
    fn begin_uop(&mut self, node: usize, lane: usize, now: u64) -> bool {
        let lat = self.cfg.latency;
        let exec = self.nodes[node].lanes[lane].exec.as_ref().expect("lane busy");
        debug_assert!(exec.pos < exec.uops.len());
        let base = exec.cursor.max(now);
        let tid = exec.tid;
        let uop = exec.uops[exec.pos].clone();
        let next_at = match &uop {
            MicroOp::EprReserve { .. } => {
                if let Some(&pair_id) = self.nodes[node].early_pair.get(&tid) {
                    // Reserved at hand-off; load the id.
                    let exec = self.nodes[node].lanes[lane].exec.as_mut().unwrap();
                    exec.regs.write(RegName::EprIdReg, RegValue::PairId(pair_id));
                    Some(base + lat.epr_reserve_lookup)
                } else {
                    let peer = exec.peer;
                    match self.nodes[node].epr.reserve(peer) {
                        ReserveOutcome::Reserved { pair_id, qubit_index } => {
                            let exec = self.nodes[node].lanes[lane].exec.as_mut().unwrap();
                            exec.regs.write(RegName::EprIdReg, RegValue::PairId(pair_id));
                            self.nodes[node].epr_qubit_of.insert(tid, qubit_index);
                            self.nodes[node].early_pair.insert(tid, pair_id);
                            let at = base + lat.epr_reserve_lookup;
                            self.send_message(node, exec_peer_of(self.program, tid, node), tid, Payload::EprId { pair_id }, at);
                            Some(at)
                        }
                        ReserveOutcome::Stall => None,
                    }
                }
            }
            MicroOp::EprReserveSync { .. } => {
                // The table unit already installed the pair at id arrival;
                // the micro-op validates the entry and publishes the status.
                debug_assert!(
                    self.nodes[node].epr_qubit_of.contains_key(&tid),
                    "EPR_RESERVE_SYNC before the id message was processed"
                );
                let exec = self.nodes[node].lanes[lane].exec.as_mut().unwrap();
                exec.regs.write(RegName::StatusReg, RegValue::Status(true));
                Some(base + lat.epr_reserve_lookup)
            }
            MicroOp::GetEprQubit { qubit_reg } => {
                let qi = *self.nodes[node]
                    .epr_qubit_of
                    .get(&tid)
                    .expect("GET_EPR_QUBIT before reservation");
                let exec = self.nodes[node].lanes[lane].exec.as_mut().unwrap();
                exec.regs.write(*qubit_reg, RegValue::QubitIndex(qi));
                Some(base + lat.epr_reserve_lookup)
            }
            MicroOp::EprRelease { qubit_reg } => {
                let qi = if exec.regs.is_ready(*qubit_reg) {
                    exec.regs.read_qubit(*qubit_reg)
                } else {
                    // The disentangler releases the pair reserved by the
                    // matching entangle transfer on this node.
                    match self.proxy_epr_qubit(node, exec.qubit) {
                        Some(qi) => qi,
                        None => {
                            self.fault = Some(SimError::Fault {
                                cycle: base,
                                msg: format!("no entangled pair backs proxy q{}", exec.qubit),
                            });
                            return false;
                        }
                    }
                };
                if let Err(e) = self.nodes[node].epr.release(qi) {
                    self.fault = Some(SimError::Fault { cycle: base, msg: e.to_string() });
                    return false;
                }
                Some(base + lat.epr_reserve_lookup)
            }
            MicroOp::SendEprId { .. }
            | MicroOp::AckSend { .. }
            | MicroOp::TpSendBits { .. }
            | MicroOp::TransferSuccessNotify => Some(base + lat.uop_issue),
            // (AckSend commits the status the table unit already sent.)
            MicroOp::RecvEprId { .. } => self.recv_ready(node, tid, PayloadKind::EprId, base),
            MicroOp::AckWait { .. } => self.recv_ready(node, tid, PayloadKind::Ack, base),
            MicroOp::TpRecvBits { .. } => self.recv_ready(node, tid, PayloadKind::MeasBits, base),
            MicroOp::Quantum { kind, cond, .. } => {
                let (d, exclusive) = match (kind, cond) {
                    (QuantumKind::Meas, _) => (lat.measurement, true),
                    (QuantumKind::Cnot, _) => (lat.two_qubit_gate, false),
                    (_, Some(_)) => (lat.conditional_gate, false),
                    (_, None) => (lat.single_qubit_gate, false),
                };
                Some(self.quantum_unit_finish(node, base, d, exclusive))
            }
        };
        let exec = self.nodes[node].lanes[lane].exec.as_mut().unwrap();
        exec.next_at = next_at;
        match next_at {
            Some(d) => {
                self.schedule(d, node, Ev::Wake);
                true
            }
            None => false,
        }
    }

    fn recv_ready(&self, node: usize, tid: TransferId, kind: PayloadKind, base: u64) -> Option<u64> {
        let info = &self.program.transfers[tid as usize];
        let src = if info.src_node == node { info.dst_node } else { info.src_node };
        self.net
            .arrival_time(src, node, tid, kind)
            .map(|arr| base.max(arr) + self.cfg.latency.uop_issue)
    }

    /// Apply the effects of the lane's current micro-op at completion time
    /// `d`, then advance the lane.
    fn complete_uop(&mut self, node: usize, lane: usize, d: u64) {
        self.uops_executed += 1;
        let (uop, tid, peer, instr_idx, last) = {
            let exec = self.nodes[node].lanes[lane].exec.as_ref().unwrap();
            (
                exec.uops[exec.pos].clone(),
                exec.tid,
                exec.peer,
                exec.instr,
                exec.pos + 1 == exec.uops.len(),
            )
        };
        match &uop {
            MicroOp::SendEprId { .. } => {
                // The id went out with the reservation; the micro-op retires
                // the register read.
                let exec = self.nodes[node].lanes[lane].exec.as_ref().unwrap();
                let _ = exec.regs.read_pair_id(RegName::EprIdReg);
            }
            MicroOp::AckSend { .. } => {
                // The acknowledgment was emitted by the EPR table unit at id
                // arrival; this micro-op retires the status register.
            }
            MicroOp::TpSendBits { .. } => {
                self.send_message(node, peer, tid, Payload::MeasBits { z: 0, x: 0 }, d);
            }
            MicroOp::RecvEprId { .. } => {
                let msg = self.consume_message(node, tid, PayloadKind::EprId, d);
                if let Payload::EprId { pair_id } = msg.payload {
                    let exec = self.nodes[node].lanes[lane].exec.as_mut().unwrap();
                    exec.regs.write(RegName::EprIdReg, RegValue::PairId(pair_id));
                }
            }
            MicroOp::AckWait { .. } => {
                let _ = self.consume_message(node, tid, PayloadKind::Ack, d);
                let exec = self.nodes[node].lanes[lane].exec.as_mut().unwrap();
                exec.regs.write(RegName::StatusReg, RegValue::Status(true));
            }
            MicroOp::TpRecvBits { x_reg, z_reg } => {
                let _ = self.consume_message(node, tid, PayloadKind::MeasBits, d);
                let (x_reg, z_reg) = (*x_reg, *z_reg);
                let exec = self.nodes[node].lanes[lane].exec.as_mut().unwrap();
                exec.regs.write(x_reg, RegValue::Bit(0));
                exec.regs.write(z_reg, RegValue::Bit(0));
            }
            MicroOp::TransferSuccessNotify => {
                let at = d + self.cfg.latency.qpu_qnpu_signal;
                self.nodes[node].notify_at.insert(tid, at);
                if let Some(idx) = self.nodes[node].waiting_notify.remove(&tid) {
                    self.nodes[node].qpu_ready.push(idx);
                }
                self.schedule(at, node, Ev::Wake);
            }
            MicroOp::Quantum { kind, args, cond } => {
                self.record_protocol_quantum(node, lane, *kind, args, *cond);
            }
            MicroOp::EprReserve { .. }
            | MicroOp::EprReserveSync { .. }
            | MicroOp::GetEprQubit { .. }
            | MicroOp::EprRelease { .. } => {}
        }
        if self.cfg.collect_event_log {
            let name = uop_name(&uop);
            self.log(d, node, format!("lane{lane}"), format!("{name} #t{tid}"));
        }

        let exec = self.nodes[node].lanes[lane].exec.as_mut().unwrap();
        exec.pos += 1;
        exec.cursor = d;
        exec.next_at = None;
        if last {
            self.nodes[node].lanes[lane].exec = None;
            self.nodes[node].lanes[lane].free_at = d;
            self.complete_instr(node, instr_idx, d);
            self.schedule(d, node, Ev::Wake);
        } else {
            self.begin_uop(node, lane, d);
        }
    }

    fn send_message(&mut self, src: usize, dst: usize, tid: TransferId, payload: Payload, at: u64) {
        let hop = self.cfg.latency.classical_link_hop;
        let msg = ClassicalMessage {
            src_node: src,
            dst_node: dst,
            transfer_id: tid,
            payload,
            sent_at: at,
            arrives_at: at + hop,
        };
        let arrives = msg.arrives_at;
        let is_epr_id = matches!(msg.payload, Payload::EprId { .. });
        self.net.send(msg).expect("network buffers are unbounded");
        // Un-gate the receiver's issue logic now (message in flight) and wake
        // it again at delivery for the receive micro-op itself.
        self.schedule(at, dst, Ev::MsgArrive { tid });
        self.schedule(arrives, dst, Ev::Wake);
        if is_epr_id {
            self.schedule(arrives, dst, Ev::EprAutoSync { tid });
        }
    }

    /// The destination's EPR management unit mirrors the reserved pair into
    /// the local table as soon as the id message lands and acknowledges it,
    /// so the sender's ACK_WAIT depends only on link latency and table
    /// lookups. The GET-side sync micro-ops then validate the installed
    /// entry.
    fn auto_sync(&mut self, node: usize, tid: TransferId, t: u64) {
        if self.nodes[node].epr_qubit_of.contains_key(&tid) {
            return;
        }
        let info = &self.program.transfers[tid as usize];
        let peer = if info.src_node == node { info.dst_node } else { info.src_node };
        let pair_id = match self.net.peek_payload(peer, node, tid, PayloadKind::EprId) {
            Some(Payload::EprId { pair_id }) => pair_id,
            _ => return,
        };
        let qubit_index = self.nodes[node].epr.reserve_synced(peer, pair_id);
        self.nodes[node].epr_qubit_of.insert(tid, qubit_index);
        let ack_at = t + self.cfg.latency.epr_reserve_lookup;
        self.send_message(node, peer, tid, Payload::Ack { status: true }, ack_at);
    }

    fn consume_message(&mut self, node: usize, tid: TransferId, kind: PayloadKind, now: u64) -> ClassicalMessage {
        let info = &self.program.transfers[tid as usize];
        let src = if info.src_node == node { info.dst_node } else { info.src_node };
        match self.net.recv(src, node, tid, kind, now) {
            RecvOutcome::Delivered(m) => m,
            RecvOutcome::Pending => unreachable!("receive completed before arrival (#t{tid} {kind:?})"),
        }
    }

    /// Comm-zone qubit backing a cat proxy: resolve the proxy data index to
    /// the entangle transfer that delivered it, then to that pair's qubit.
    fn proxy_epr_qubit(&self, node: usize, proxy_qubit: usize) -> Option<usize> {
        match self.nodes[node].location.get(&proxy_qubit) {
            Some(Slot::Epr { transfer, .. }) => self.nodes[node].epr_qubit_of.get(transfer).copied(),
            _ => None,
        }
    }

    fn rebind_on_move(&mut self, node: usize, qubit: usize, tid: TransferId) {
        let info = &self.program.transfers[tid as usize];
        if info.dst_node == node
            && matches!(
                info.send_opcode,
                ProtocolOpcode::SendTpQubit | ProtocolOpcode::SendCatEntQubit
            )
        {
            self.nodes[node]
                .location
                .insert(qubit, Slot::Epr { transfer: tid, side: EprSide::Dst });
        }
    }

    fn resolve_data(&self, node: usize, qubit: usize) -> Slot {
        *self.nodes[node].location.get(&qubit).unwrap_or(&Slot::Data { node, index: qubit })
    }

    fn local_cost(&self, arity: usize) -> u64 {
        if arity == 2 {
            self.cfg.latency.two_qubit_gate
        } else {
            self.cfg.latency.single_qubit_gate
        }
    }

    fn record_apply(&mut self, node: usize, instr: &QpuInstr) {
        if self.qtrace.is_none() {
            return;
        }
        let op = match instr {
            QpuInstr::Apply { gate, params, qubits } => TraceOp::Gate {
                gate: TraceGate::from_gate_kind(*gate, params),
                qubits: qubits.iter().map(|&q| self.resolve_data(node, q)).collect(),
                cond: None,
            },
            QpuInstr::Measure { qubit, bit } => TraceOp::Meas {
                qubit: self.resolve_data(node, *qubit),
                bit: BitHandle::Creg { node, reg: bit.0 as u32, index: bit.1 },
            },
            _ => return,
        };
        self.qtrace.as_mut().unwrap().push(op);
    }

    fn record_protocol_quantum(
        &mut self,
        node: usize,
        lane: usize,
        kind: QuantumKind,
        args: &[RegName],
        cond: Option<CondBit>,
    ) {
        if self.qtrace.is_none() {
            return;
        }
        let (tid, data_qubit) = {
            let exec = self.nodes[node].lanes[lane].exec.as_ref().unwrap();
            (exec.tid, exec.qubit)
        };
        let info = &self.program.transfers[tid as usize];
        let resolve = |reg: RegName| -> Slot {
            match reg {
                RegName::CommQubReg => self.resolve_data(node, data_qubit),
                RegName::EprQubReg => Slot::Epr {
                    transfer: tid,
                    side: if info.src_node == node { EprSide::Src } else { EprSide::Dst },
                },
                RegName::TeleportQubReg => Slot::Epr { transfer: tid, side: EprSide::Dst },
                other => panic!("register {} is not a qubit register", other.name()),
            }
        };
        let cond_handle = cond.map(|c| match c {
            CondBit::BitX => BitHandle::TransferX(tid),
            CondBit::BitZ => BitHandle::TransferZ(tid),
        });
        let op = match kind {
            QuantumKind::Meas => TraceOp::Meas {
                qubit: resolve(args[0]),
                bit: match args[1] {
                    RegName::BitXReg => BitHandle::TransferX(tid),
                    RegName::BitZReg => BitHandle::TransferZ(tid),
                    other => panic!("measurement target {} is not a bit register", other.name()),
                },
            },
            QuantumKind::Cnot => TraceOp::Gate {
                gate: TraceGate::Cnot,
                qubits: vec![resolve(args[0]), resolve(args[1])],
                cond: cond_handle,
            },
            other => TraceOp::Gate {
                gate: match other {
                    QuantumKind::H => TraceGate::H,
                    QuantumKind::X => TraceGate::X,
                    QuantumKind::Z => TraceGate::Z,
                    _ => unreachable!(),
                },
                qubits: vec![resolve(args[0])],
                cond: cond_handle,
            },
        };
        self.qtrace.as_mut().unwrap().push(op);
    }

    fn final_locations(&self) -> Vec<((usize, usize), Slot)> {
        let mut out = Vec::new();
        for (node_idx, node) in self.nodes.iter().enumerate() {
            for (&q, &slot) in &node.location {
                out.push(((node_idx, q), slot));
            }
        }
        out
    }
}

fn exec_peer_of(program: &CompiledProgram, tid: TransferId, node: usize) -> usize {
    let info = &program.transfers[tid as usize];
    if info.src_node == node {
        info.dst_node
    } else {
        info.src_node
    }
}

fn uop_name(uop: &MicroOp) -> &'static str {
    match uop {
        MicroOp::EprReserve { .. } => "EPR_RESERVE",
        MicroOp::EprReserveSync { .. } => "EPR_RESERVE_SYNC",
        MicroOp::GetEprQubit { .. } => "GET_EPR_QUBIT",
        MicroOp::EprRelease { .. } => "EPR_RELEASE",
        MicroOp::SendEprId { .. } => "SEND_EPR_ID",
        MicroOp::RecvEprId { .. } => "RECV_EPR_ID",
        MicroOp::AckWait { .. } => "ACK_WAIT",
        MicroOp::AckSend { .. } => "ACK_SEND",
        MicroOp::TpSendBits { .. } => "TP_SEND_BITS",
        MicroOp::TpRecvBits { .. } => "TP_RECV_BITS",
        MicroOp::TransferSuccessNotify => "TRANSFER_SUCCESS_NOTIFY",
        MicroOp::Quantum { kind, .. } => match kind {
            QuantumKind::Cnot => "CNOT",
            QuantumKind::H => "H",
            QuantumKind::X => "X",
            QuantumKind::Z => "Z",
            QuantumKind::Meas => "MEAS",
        },
    }
}
