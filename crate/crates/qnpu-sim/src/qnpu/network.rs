use std::collections::BTreeMap;

use thiserror::Error;

use super::isa::TransferId;

/// Payload of one classical message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Payload {
    EprId { pair_id: u64 },
    Ack { status: bool },
    /// Teleport correction bits (z, x); the cat protocols use one of the two.
    MeasBits { z: u8, x: u8 },
    SuccessNotify,
}

impl Payload {
    pub fn kind(&self) -> PayloadKind {
        match self {
            Payload::EprId { .. } => PayloadKind::EprId,
            Payload::Ack { .. } => PayloadKind::Ack,
            Payload::MeasBits { .. } => PayloadKind::MeasBits,
            Payload::SuccessNotify => PayloadKind::SuccessNotify,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PayloadKind {
    EprId,
    Ack,
    MeasBits,
    SuccessNotify,
}

/// One classical message between (or within) nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalMessage {
    pub src_node: usize,
    pub dst_node: usize,
    pub transfer_id: TransferId,
    pub payload: Payload,
    /// Simulation cycle at which the message was sent.
    pub sent_at: u64,
    /// Cycle at which it becomes visible to the receiver.
    pub arrives_at: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecvOutcome {
    Delivered(ClassicalMessage),
    Pending,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NetworkError {
    #[error("send buffer overflow on link {src}->{dst} (capacity {capacity})")]
    Overflow { src: usize, dst: usize, capacity: usize },
}

/// Classical message buffers with FIFO delivery per ordered node pair and
/// matching by (transfer id, payload kind) on receive.
#[derive(Debug, Clone, Default)]
pub struct NetworkBuffers {
    /// In-flight and undelivered messages per ordered (src, dst) pair, in
    /// send order.
    queues: BTreeMap<(usize, usize), Vec<ClassicalMessage>>,
    capacity: Option<usize>,
    sent_total: u64,
    received_total: u64,
}

impl NetworkBuffers {
    pub fn new(capacity: Option<usize>) -> Self {
        Self { queues: BTreeMap::new(), capacity, sent_total: 0, received_total: 0 }
    }

    pub fn send(&mut self, msg: ClassicalMessage) -> Result<(), NetworkError> {
        let queue = self.queues.entry((msg.src_node, msg.dst_node)).or_default();
        if let Some(cap) = self.capacity {
            if queue.len() >= cap {
                return Err(NetworkError::Overflow {
                    src: msg.src_node,
                    dst: msg.dst_node,
                    capacity: cap,
                });
            }
        }
        debug_assert!(
            queue.last().map_or(true, |m| m.sent_at <= msg.sent_at),
            "messages must be sent in nondecreasing time order per link"
        );
        queue.push(msg);
        self.sent_total += 1;
        Ok(())
    }

    /// Receive the message matching (transfer, kind) from `src` if it has
    /// arrived by `now`; FIFO order holds per ordered pair, and matching by
    /// transfer id lets interleaved transfers on one link coexist.
    pub fn recv(
        &mut self,
        src: usize,
        dst: usize,
        transfer: TransferId,
        kind: PayloadKind,
        now: u64,
    ) -> RecvOutcome {
        let Some(queue) = self.queues.get_mut(&(src, dst)) else {
            return RecvOutcome::Pending;
        };
        let pos = queue
            .iter()
            .position(|m| m.transfer_id == transfer && m.payload.kind() == kind && m.arrives_at <= now);
        match pos {
            Some(i) => {
                let msg = queue.remove(i);
                self.received_total += 1;
                RecvOutcome::Delivered(msg)
            }
            None => RecvOutcome::Pending,
        }
    }

    /// Payload of the in-flight message matching (src, transfer, kind).
    pub fn peek_payload(
        &self,
        src: usize,
        dst: usize,
        transfer: TransferId,
        kind: PayloadKind,
    ) -> Option<Payload> {
        self.queues.get(&(src, dst)).and_then(|q| {
            q.iter()
                .find(|m| m.transfer_id == transfer && m.payload.kind() == kind)
                .map(|m| m.payload)
        })
    }

    /// Earliest arrival time of the message matching (src, transfer, kind),
    /// if it has been sent at all.
    pub fn arrival_time(
        &self,
        src: usize,
        dst: usize,
        transfer: TransferId,
        kind: PayloadKind,
    ) -> Option<u64> {
        self.queues.get(&(src, dst)).and_then(|q| {
            q.iter()
                .find(|m| m.transfer_id == transfer && m.payload.kind() == kind)
                .map(|m| m.arrives_at)
        })
    }

    pub fn in_flight(&self) -> usize {
        self.queues.values().map(|q| q.len()).sum()
    }

    pub fn sent_total(&self) -> u64 {
        self.sent_total
    }

    pub fn received_total(&self) -> u64 {
        self.received_total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn msg(tid: TransferId, payload: Payload, sent: u64, hop: u64) -> ClassicalMessage {
        ClassicalMessage {
            src_node: 0,
            dst_node: 1,
            transfer_id: tid,
            payload,
            sent_at: sent,
            arrives_at: sent + hop,
        }
    }

    #[test]
    fn delivery_respects_link_latency() {
        let mut net = NetworkBuffers::new(None);
        net.send(msg(7, Payload::EprId { pair_id: 3 }, 10, 4)).unwrap();
        assert_eq!(net.recv(0, 1, 7, PayloadKind::EprId, 13), RecvOutcome::Pending);
        match net.recv(0, 1, 7, PayloadKind::EprId, 14) {
            RecvOutcome::Delivered(m) => assert_eq!(m.payload, Payload::EprId { pair_id: 3 }),
            RecvOutcome::Pending => panic!("message should have arrived"),
        }
    }

    #[test]
    fn recv_on_empty_buffer_is_pending() {
        let mut net = NetworkBuffers::new(None);
        assert_eq!(net.recv(0, 1, 0, PayloadKind::Ack, 100), RecvOutcome::Pending);
    }

    #[test]
    fn interleaved_transfers_match_their_own_ids() {
        // Exhaustive over both send orders of two transfers on one link.
        for flip in [false, true] {
            let mut net = NetworkBuffers::new(None);
            let (first, second) = if flip { (2, 1) } else { (1, 2) };
            net.send(msg(first, Payload::MeasBits { z: 1, x: 0 }, 0, 1)).unwrap();
            net.send(msg(second, Payload::MeasBits { z: 0, x: 1 }, 0, 1)).unwrap();
            let RecvOutcome::Delivered(m2) = net.recv(0, 1, 2, PayloadKind::MeasBits, 10) else {
                panic!("transfer 2 should match");
            };
            let RecvOutcome::Delivered(m1) = net.recv(0, 1, 1, PayloadKind::MeasBits, 10) else {
                panic!("transfer 1 should match");
            };
            assert_eq!(m1.transfer_id, 1);
            assert_eq!(m2.transfer_id, 2);
            assert_eq!(net.in_flight(), 0);
        }
    }

    #[test]
    fn finite_capacity_overflows() {
        let mut net = NetworkBuffers::new(Some(1));
        net.send(msg(1, Payload::SuccessNotify, 0, 1)).unwrap();
        assert!(net.send(msg(2, Payload::SuccessNotify, 0, 1)).is_err());
    }

    #[test]
    fn conservation_counts() {
        let mut net = NetworkBuffers::new(None);
        for tid in 0..5 {
            net.send(msg(tid, Payload::Ack { status: true }, tid, 2)).unwrap();
        }
        for tid in 0..3 {
            assert!(matches!(net.recv(0, 1, tid, PayloadKind::Ack, 100), RecvOutcome::Delivered(_)));
        }
        assert_eq!(net.sent_total(), 5);
        assert_eq!(net.received_total(), 3);
        assert_eq!(net.in_flight(), 2);
    }
}
