//! The tensor memory model.
//!
//! Memory is virtually segmented into read-only operand entry arrays and a
//! write-only, zero-initialized dense result region sized before simulation
//! starts. Loader read requests are queued per requester (one requester per
//! SDPE loader side) and granted round-robin, at most `read_bandwidth` per
//! cycle; each grant delivers its entry `read_latency` cycles later, in
//! request order per requester. Because operands are CSF, a grant never
//! carries a zero value.

use std::collections::VecDeque;

use crate::csf::{CsfTensor, Entry};
use crate::sdpe::Side;
use crate::shape::{DenseTensor, Shape};
use crate::{Error, Result};

/// Memory timing knobs. The effective request-to-data latency is one
/// arbitration cycle plus `read_latency`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryConfig {
    /// Entries granted per cycle, shared across all requesters.
    pub read_bandwidth: usize,
    /// Cycles between grant and delivery.
    pub read_latency: u64,
    /// Result writes accepted per cycle.
    pub write_ports: usize,
}

impl Default for MemoryConfig {
    fn default() -> Self {
        Self {
            read_bandwidth: 4,
            read_latency: 1,
            write_ports: 1,
        }
    }
}

impl MemoryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.read_bandwidth == 0 || self.read_latency == 0 || self.write_ports == 0 {
            return Err(Error::InvalidConfig(
                "memory parameters must all be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct PendingRead {
    offset: usize,
    generation: u64,
}

/// A granted read on its way back to a loader.
#[derive(Debug, Clone, Copy)]
pub struct Delivery {
    pub due: u64,
    pub sdpe: usize,
    pub side: Side,
    pub offset: usize,
    pub generation: u64,
    pub entry: Entry,
}

/// Operand entry arrays plus the preallocated result region, with a
/// bandwidth/latency-limited read path.
pub struct TensorMemory {
    a_entries: Vec<Entry>,
    b_entries: Vec<Entry>,
    result: DenseTensor,
    written: Vec<bool>,
    cfg: MemoryConfig,
    /// One request queue per requester; requester `2 * sdpe + side`.
    queues: Vec<VecDeque<PendingRead>>,
    pending_total: usize,
    rr_cursor: usize,
    in_flight: VecDeque<Delivery>,
    requests_received: u64,
    grants_issued: u64,
    stall_cycles: u64,
    results_written: u64,
}

fn requester_index(sdpe: usize, side: Side) -> usize {
    2 * sdpe
        + match side {
            Side::A => 0,
            Side::B => 1,
        }
}

impl TensorMemory {
    /// Loads both operands' entry arrays and allocates the zeroed result
    /// region.
    pub fn new(
        a: &CsfTensor,
        b: &CsfTensor,
        result_shape: Shape,
        cfg: MemoryConfig,
        sdpe_count: usize,
    ) -> Result<Self> {
        cfg.validate()?;
        let volume = result_shape.volume();
        Ok(Self {
            a_entries: a.entries().to_vec(),
            b_entries: b.entries().to_vec(),
            result: DenseTensor::zeros(result_shape),
            written: vec![false; volume],
            cfg,
            queues: (0..2 * sdpe_count).map(|_| VecDeque::new()).collect(),
            pending_total: 0,
            rr_cursor: 0,
            in_flight: VecDeque::new(),
            requests_received: 0,
            grants_issued: 0,
            stall_cycles: 0,
            results_written: 0,
        })
    }

    /// Queues one entry read. Out-of-range offsets are a simulation fault.
    pub fn request_read(&mut self, sdpe: usize, side: Side, offset: usize, generation: u64) {
        let limit = match side {
            Side::A => self.a_entries.len(),
            Side::B => self.b_entries.len(),
        };
        assert!(
            offset < limit,
            "read offset {offset} out of range for operand {side:?} ({limit} entries)"
        );
        self.queues[requester_index(sdpe, side)].push_back(PendingRead { offset, generation });
        self.pending_total += 1;
        self.requests_received += 1;
    }

    /// Advances one cycle: returns deliveries due now, then grants up to
    /// `read_bandwidth` pending requests round-robin across requesters.
    pub fn step(&mut self, cycle: u64) -> Vec<Delivery> {
        let mut due = Vec::new();
        while let Some(front) = self.in_flight.front() {
            debug_assert!(front.due >= cycle);
            if front.due != cycle {
                break;
            }
            due.push(self.in_flight.pop_front().unwrap());
        }

        let n = self.queues.len();
        let mut granted = 0;
        let mut empties_seen = 0;
        let mut pos = self.rr_cursor;
        while granted < self.cfg.read_bandwidth && self.pending_total > 0 && empties_seen < n {
            match self.queues[pos].pop_front() {
                Some(req) => {
                    let sdpe = pos / 2;
                    let side = if pos.is_multiple_of(2) {
                        Side::A
                    } else {
                        Side::B
                    };
                    let entry = match side {
                        Side::A => self.a_entries[req.offset],
                        Side::B => self.b_entries[req.offset],
                    };
                    self.in_flight.push_back(Delivery {
                        due: cycle + self.cfg.read_latency,
                        sdpe,
                        side,
                        offset: req.offset,
                        generation: req.generation,
                        entry,
                    });
                    self.pending_total -= 1;
                    self.grants_issued += 1;
                    granted += 1;
                    empties_seen = 0;
                }
                None => empties_seen += 1,
            }
            pos = (pos + 1) % n;
        }
        self.rr_cursor = pos % n;

        if self.pending_total > 0 {
            self.stall_cycles += 1;
        }
        due
    }

    /// Writes one result value. Each destination may be written at most once
    /// per contraction; violations are a simulation fault. The per-cycle
    /// `write_ports` budget is enforced by the engine's collection loop.
    pub fn write_result(&mut self, dest_index: usize, value: f64) {
        debug_assert!(value != 0.0, "zero results are dropped at the engines");
        assert!(
            dest_index < self.written.len(),
            "result index {dest_index} out of range ({} cells)",
            self.written.len()
        );
        assert!(
            !self.written[dest_index],
            "duplicate result write to index {dest_index}"
        );
        self.written[dest_index] = true;
        self.result.values_mut()[dest_index] = value;
        self.results_written += 1;
    }

    /// True when no request is waiting for a grant.
    pub fn quiescent(&self) -> bool {
        self.pending_total == 0
    }

    pub fn requests_received(&self) -> u64 {
        self.requests_received
    }

    pub fn grants_issued(&self) -> u64 {
        self.grants_issued
    }

    pub fn stall_cycles(&self) -> u64 {
        self.stall_cycles
    }

    pub fn results_written(&self) -> u64 {
        self.results_written
    }

    /// Hands the dense result region to the caller once simulation is done.
    pub fn export_result(self) -> DenseTensor {
        self.result
    }
}
