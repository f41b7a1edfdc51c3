//! Per-VO serialized FIFO link.

use crate::error::{Error, Result};
use crate::hex::VoId;

use super::event::MessageId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MessageKind {
    Dispatch,
    Result,
    LocationUpdate,
    Registration,
}

impl MessageKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MessageKind::Dispatch => "dispatch",
            MessageKind::Result => "result",
            MessageKind::LocationUpdate => "location_update",
            MessageKind::Registration => "registration",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub id: MessageId,
    pub kind: MessageKind,
    pub size: u64,
    pub vo: VoId,
    pub enqueue_time: f64,
    /// When the first bit goes on the wire.
    pub start_time: f64,
    pub deliver_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoLink {
    capacity_mbps: f64,
    bytes_transferred: u64,
    busy_until: f64,
    /// Transmission intervals in FIFO order.
    intervals: Vec<(f64, f64)>,
}

impl VoLink {
    pub fn new(capacity_mbps: f64) -> Result<Self> {
        if !(capacity_mbps.is_finite() && capacity_mbps > 0.0) {
            return Err(Error::Config(format!(
                "link capacity must be > 0 Mbps, got {capacity_mbps}"
            )));
        }
        Ok(Self {
            capacity_mbps,
            bytes_transferred: 0,
            busy_until: 0.0,
            intervals: Vec::new(),
        })
    }

    pub fn capacity_mbps(&self) -> f64 {
        self.capacity_mbps
    }

    pub fn bytes_transferred(&self) -> u64 {
        self.bytes_transferred
    }

    pub fn busy_until(&self) -> f64 {
        self.busy_until
    }

    pub fn transfer_time(&self, size: u64) -> f64 {
        size as f64 * 8.0 / (self.capacity_mbps * 1e6)
    }

    /// Queues `size` bytes at `enqueue_time`; returns (start, deliver).
    pub fn transfer(&mut self, enqueue_time: f64, size: u64) -> (f64, f64) {
        let start = enqueue_time.max(self.busy_until);
        let deliver = start + self.transfer_time(size);
        self.busy_until = deliver;
        self.bytes_transferred += size;
        self.intervals.push((start, deliver));
        (start, deliver)
    }

    /// Seconds spent transmitting inside `[0, until]`.
    pub fn busy_time(&self, until: f64) -> f64 {
        busy_within(self.intervals.iter().copied(), until)
    }

    pub fn utilization(&self, elapsed: f64) -> f64 {
        if elapsed <= 0.0 {
            0.0
        } else {
            self.busy_time(elapsed) / elapsed
        }
    }
}

/// Sum of interval lengths clipped to `[0, until]`.
pub fn busy_within(intervals: impl Iterator<Item = (f64, f64)>, until: f64) -> f64 {
    intervals
        .filter(|(start, _)| *start < until)
        .map(|(start, end)| end.min(until) - start)
        .sum()
}
