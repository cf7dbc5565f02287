//! The Sparse Dot Product Engine state machine.
//!
//! One SDPE owns two fiber loaders (bounded FIFOs fed by tensor memory), an
//! intersection & MAC unit, a one-deep local job slot, and a bounded result
//! queue. Stepped once per cycle, it performs in order:
//!
//! 1. completion check with the state left by the previous cycle — the job
//!    finishes once either loader is done and drained, since no further
//!    collisions are possible;
//! 2. up to one read request per loader (gated by FIFO headroom);
//! 3. at most one index comparison: equal indices trigger a MAC and pop both
//!    sides, otherwise the side with the smaller index is popped.
//!
//! Entries granted by memory are pushed in with [`SdpeState::deliver`] before
//! the step, so same-cycle enqueue-then-compare is allowed. Completed jobs
//! with a nonzero accumulator enter the result queue (stalling in a draining
//! phase when it is full); zero accumulators are dropped at the source, which
//! is observationally identical to the read-back check because the result
//! region is preallocated to zeros.

use std::collections::VecDeque;

use crate::csf::Entry;
use crate::jobgen::Job;

/// Which operand a loader (or read request) belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// A read request for one entry offset of one operand. The generation tags
/// the owning job so late grants for an abandoned job are discarded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReadRequest {
    pub side: Side,
    pub offset: usize,
    pub generation: u64,
}

/// What one step produced: read requests to forward to memory, and the
/// completed job, if any.
#[derive(Debug, Default)]
pub struct StepEvents {
    pub requests: Vec<ReadRequest>,
    pub completed: Option<CompletedJob>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompletedJob {
    pub job_number: usize,
    pub dest_index: usize,
    pub value: f64,
    /// False when the zero-accumulator result was dropped.
    pub emitted: bool,
}

/// A fiber loader: a bounded FIFO of fetched entries plus the fetch cursor
/// over the job's entry range.
#[derive(Debug)]
pub struct FiberLoader {
    fifo: VecDeque<Entry>,
    depth: usize,
    cursor: usize,
    end: usize,
    delivery_cursor: usize,
    outstanding: usize,
    generation: u64,
}

impl FiberLoader {
    fn new(depth: usize) -> Self {
        Self {
            fifo: VecDeque::with_capacity(depth),
            depth,
            cursor: 0,
            end: 0,
            delivery_cursor: 0,
            outstanding: 0,
            generation: 0,
        }
    }

    fn arm(&mut self, start: usize, end: usize) {
        self.fifo.clear();
        self.cursor = start;
        self.end = end;
        self.delivery_cursor = start;
        self.outstanding = 0;
        self.generation += 1;
    }

    /// True once the full range has been requested and every grant has been
    /// enqueued.
    fn done(&self) -> bool {
        self.cursor == self.end && self.outstanding == 0
    }

    /// Done and nothing left to consume.
    fn exhausted(&self) -> bool {
        self.done() && self.fifo.is_empty()
    }

    /// The offset to request this cycle, if the range is unfinished and the
    /// FIFO has headroom for the response.
    fn next_request(&mut self) -> Option<usize> {
        if self.cursor < self.end && self.fifo.len() + self.outstanding < self.depth {
            let offset = self.cursor;
            self.cursor += 1;
            self.outstanding += 1;
            Some(offset)
        } else {
            None
        }
    }

    fn deliver(&mut self, entry: Entry, offset: usize, generation: u64) {
        if generation != self.generation {
            // Grant for an abandoned job; the data is discarded.
            return;
        }
        assert!(
            offset == self.delivery_cursor && offset < self.cursor,
            "grant for offset {offset} never requested (expected {})",
            self.delivery_cursor
        );
        self.delivery_cursor += 1;
        self.outstanding -= 1;
        self.fifo.push_back(entry);
        debug_assert!(self.fifo.len() <= self.depth);
    }

    #[cfg(test)]
    fn preload(&mut self, entries: &[Entry]) {
        assert!(entries.len() <= self.depth);
        self.fifo.extend(entries.iter().copied());
        self.cursor = self.end;
        self.delivery_cursor = self.end;
        self.outstanding = 0;
    }
}

#[derive(Debug, PartialEq, Eq, Clone, Copy)]
enum Phase {
    Idle,
    Running,
    /// Job finished but its result is waiting for result-queue space.
    Draining,
}

/// Per-engine state: loader pair, accumulator, local job slot, result queue.
#[derive(Debug)]
pub struct SdpeState {
    loader_a: FiberLoader,
    loader_b: FiberLoader,
    accumulator: f64,
    active: Option<Job>,
    slot: Option<Job>,
    phase: Phase,
    held_result: Option<CompletedJob>,
    result_queue: VecDeque<(usize, f64)>,
    result_queue_depth: usize,
    /// Comparison and MAC counters, accumulated across jobs.
    pub comparisons: u64,
    pub mac_count: u64,
}

impl SdpeState {
    pub fn new(fifo_depth: usize, result_queue_depth: usize) -> Self {
        Self {
            loader_a: FiberLoader::new(fifo_depth),
            loader_b: FiberLoader::new(fifo_depth),
            accumulator: 0.0,
            active: None,
            slot: None,
            phase: Phase::Idle,
            held_result: None,
            result_queue: VecDeque::with_capacity(result_queue_depth),
            result_queue_depth,
            comparisons: 0,
            mac_count: 0,
        }
    }

    /// Offers a job. Accepted if the engine is idle (starts immediately) or
    /// the local slot is free (buffered); rejection is a normal outcome.
    pub fn assign_job(&mut self, job: Job) -> bool {
        if self.phase == Phase::Idle {
            self.activate(job);
            true
        } else if self.slot.is_none() {
            self.slot = Some(job);
            true
        } else {
            false
        }
    }

    fn activate(&mut self, job: Job) {
        self.loader_a.arm(job.a_start, job.a_end);
        self.loader_b.arm(job.b_start, job.b_end);
        self.accumulator = 0.0;
        self.active = Some(job);
        self.phase = Phase::Running;
    }

    /// Current loader generations, `(A, B)`. Requests carry these tags.
    pub fn generations(&self) -> (u64, u64) {
        (self.loader_a.generation, self.loader_b.generation)
    }

    /// Routes a granted entry to the owning loader.
    pub fn deliver(&mut self, side: Side, entry: Entry, offset: usize, generation: u64) {
        match side {
            Side::A => self.loader_a.deliver(entry, offset, generation),
            Side::B => self.loader_b.deliver(entry, offset, generation),
        }
    }

    /// True when a job is active or a finished result is still draining.
    pub fn is_busy(&self) -> bool {
        self.phase != Phase::Idle
    }

    /// True when the local slot can take another job.
    pub fn slot_free(&self) -> bool {
        self.phase == Phase::Idle || self.slot.is_none()
    }

    pub fn result_queue_len(&self) -> usize {
        self.result_queue.len()
    }

    /// Removes and returns the oldest queued result.
    pub fn pop_result(&mut self) -> Option<(usize, f64)> {
        self.result_queue.pop_front()
    }

    /// Advances one cycle. Deliveries for this cycle must already have been
    /// pushed in via [`deliver`](Self::deliver).
    pub fn step(&mut self) -> StepEvents {
        let mut events = StepEvents::default();
        match self.phase {
            Phase::Idle => return events,
            Phase::Draining => {
                if self.result_queue.len() < self.result_queue_depth {
                    let done = self.held_result.take().expect("draining holds a result");
                    self.result_queue.push_back((done.dest_index, done.value));
                    events.completed = Some(done);
                    self.finish_job();
                }
                return events;
            }
            Phase::Running => {}
        }
        let job = self.active.expect("running phase has an active job");

        // Completion check against the state left by the previous cycle: once
        // either side is exhausted no further collision can occur, even if
        // the other loader still has unread entries.
        if self.loader_a.exhausted() || self.loader_b.exhausted() {
            let value = self.accumulator;
            let done = CompletedJob {
                job_number: job.job_number,
                dest_index: job.dest_index,
                value,
                emitted: value != 0.0,
            };
            if done.emitted {
                if self.result_queue.len() < self.result_queue_depth {
                    self.result_queue.push_back((done.dest_index, done.value));
                } else {
                    self.held_result = Some(done);
                    self.phase = Phase::Draining;
                    return events;
                }
            }
            events.completed = Some(done);
            self.finish_job();
            return events;
        }

        // Fetch stage: up to one request per loader per cycle.
        let (gen_a, gen_b) = self.generations();
        if let Some(offset) = self.loader_a.next_request() {
            events.requests.push(ReadRequest {
                side: Side::A,
                offset,
                generation: gen_a,
            });
        }
        if let Some(offset) = self.loader_b.next_request() {
            events.requests.push(ReadRequest {
                side: Side::B,
                offset,
                generation: gen_b,
            });
        }

        // Intersection stage: one comparison when both heads are present.
        if let (Some(&head_a), Some(&head_b)) =
            (self.loader_a.fifo.front(), self.loader_b.fifo.front())
        {
            self.comparisons += 1;
            match head_a.index.cmp(&head_b.index) {
                std::cmp::Ordering::Equal => {
                    self.accumulator += head_a.value * head_b.value;
                    self.mac_count += 1;
                    self.loader_a.fifo.pop_front();
                    self.loader_b.fifo.pop_front();
                }
                std::cmp::Ordering::Greater => {
                    self.loader_b.fifo.pop_front();
                }
                std::cmp::Ordering::Less => {
                    self.loader_a.fifo.pop_front();
                }
            }
        }
        events
    }

    /// Clears the finished job and promotes the buffered one; the promoted
    /// job does no work until the next cycle.
    fn finish_job(&mut self) {
        self.active = None;
        self.phase = Phase::Idle;
        if let Some(next) = self.slot.take() {
            self.activate(next);
        }
    }
}
