//! Time-ordered event queue with insertion-order tie breaking.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::services::{Job, MsId, SubJobId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MessageId(pub u64);

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    WalkStep(MsId),
    ChurnScan,
    SubJobFinish {
        ms: MsId,
        subjob: SubJobId,
        attempt: u32,
    },
    MessageDelivered(MessageId),
    JobArrival(Job),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimEvent {
    pub time: f64,
    pub seq: u64,
    pub kind: EventKind,
}

#[derive(Debug)]
struct Queued(SimEvent);

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .time
            .total_cmp(&other.0.time)
            .then(self.0.seq.cmp(&other.0.seq))
    }
}

#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<Queued>>,
    next_seq: u64,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn schedule(&mut self, time: f64, kind: EventKind) -> u64 {
        debug_assert!(!time.is_nan());
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap
            .push(Reverse(Queued(SimEvent { time, seq, kind })));
        seq
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|Reverse(q)| q.0.time)
    }

    pub fn pop(&mut self) -> Option<SimEvent> {
        self.heap.pop().map(|Reverse(q)| q.0)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
