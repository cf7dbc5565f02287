//! Top-level cycle-stepped simulation.
//!
//! Each cycle the engine, in order: (1) collects up to `write_ports`
//! completed results into the result region — result collection precedes job
//! assignment; (2) assigns at most one job to the next round-robin SDPE with
//! a free local slot; (3) steps tensor memory (deliveries, then grant
//! arbitration); (4) steps every SDPE, forwarding its read requests to
//! memory. The run terminates when every job has completed, every result
//! queue has drained, and no read request is still waiting for a grant, so
//! the exported region is always consistent and grant bookkeeping balances.
//!
//! Timing knobs never change arithmetic: the result is bit-identical to
//! [`crate::oracle::contract_csf_reference`] for every configuration.

use serde::Serialize;

use crate::csf::CsfTensor;
use crate::jobgen::{self, Job};
use crate::memory::{MemoryConfig, TensorMemory};
use crate::sdpe::SdpeState;
use crate::shape::DenseTensor;
use crate::{Error, Result};

/// Simulation parameters. `clock_ghz` only scales the reported time; it does
/// not affect cycle counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub sdpe_count: usize,
    pub fifo_depth: usize,
    pub result_queue_depth: usize,
    pub memory: MemoryConfig,
    pub clock_ghz: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            sdpe_count: 8,
            fifo_depth: 8,
            result_queue_depth: 4,
            memory: MemoryConfig::default(),
            clock_ghz: 1.0,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sdpe_count == 0 || self.fifo_depth == 0 || self.result_queue_depth == 0 {
            return Err(Error::InvalidConfig(
                "sdpe_count, fifo_depth and result_queue_depth must be >= 1".into(),
            ));
        }
        self.memory.validate()?;
        if !(self.clock_ghz > 0.0 && self.clock_ghz.is_finite()) {
            return Err(Error::InvalidConfig("clock_ghz must be positive".into()));
        }
        Ok(())
    }
}

/// What one simulation did, cycle- and event-wise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimStats {
    pub total_cycles: u64,
    /// Simulated wall time: `total_cycles / (clock_ghz * 1000)` microseconds.
    pub time_us: f64,
    pub job_count: u64,
    pub jobs_dispatched: u64,
    pub jobs_completed: u64,
    pub mac_count: u64,
    pub comparisons: u64,
    pub entries_fetched: u64,
    pub results_written: u64,
    /// Cycles in which at least one read request was left waiting after
    /// arbitration.
    pub memory_stall_cycles: u64,
    /// Per-SDPE cycles with an active (or draining) job.
    pub busy_cycles: Vec<u64>,
    /// Per-SDPE cycles without one. `busy + idle == total_cycles` each.
    pub idle_cycles: Vec<u64>,
}

/// Round-robin dispatch: the first SDPE at or after `cursor` whose local
/// slot is free.
pub fn dispatch_policy(cursor: usize, sdpes: &[SdpeState]) -> Option<usize> {
    let n = sdpes.len();
    (0..n)
        .map(|k| (cursor + k) % n)
        .find(|&i| sdpes[i].slot_free())
}

/// Runs the contraction and returns the dense result region plus statistics.
pub fn simulate(
    a: &CsfTensor,
    b: &CsfTensor,
    cfg: &EngineConfig,
) -> Result<(DenseTensor, SimStats)> {
    cfg.validate()?;
    let plan = jobgen::plan(a, b)?;
    let job_count = plan.job_count as u64;
    let mut memory =
        TensorMemory::new(a, b, plan.result_shape.clone(), cfg.memory, cfg.sdpe_count)?;
    let mut sdpes: Vec<SdpeState> = (0..cfg.sdpe_count)
        .map(|_| SdpeState::new(cfg.fifo_depth, cfg.result_queue_depth))
        .collect();
    let n = cfg.sdpe_count;

    let mut jobs = jobgen::all_jobs(&plan, a, b);
    let mut next_job: Option<Job> = jobs.next();

    let mut dispatch_cursor = 0usize;
    let mut collect_cursor = 0usize;
    let mut jobs_dispatched = 0u64;
    let mut jobs_completed = 0u64;
    let mut busy_cycles = vec![0u64; n];
    let mut idle_cycles = vec![0u64; n];
    let mut cycle = 0u64;
    let mut last_progress = (0u64, 0u64);
    let mut last_progress_cycle = 0u64;

    loop {
        // (1) Result collection, before assignment.
        'ports: for _ in 0..cfg.memory.write_ports {
            for k in 0..n {
                let i = (collect_cursor + k) % n;
                if let Some((dest, value)) = sdpes[i].pop_result() {
                    memory.write_result(dest, value);
                    collect_cursor = (i + 1) % n;
                    continue 'ports;
                }
            }
            break;
        }

        // (2) At most one job assigned per cycle.
        if let Some(job) = next_job {
            if let Some(i) = dispatch_policy(dispatch_cursor, &sdpes) {
                let accepted = sdpes[i].assign_job(job);
                debug_assert!(accepted);
                dispatch_cursor = (i + 1) % n;
                jobs_dispatched += 1;
                next_job = jobs.next();
            }
        }

        // (3) Memory: deliveries due this cycle, then new grants.
        for d in memory.step(cycle) {
            sdpes[d.sdpe].deliver(d.side, d.entry, d.offset, d.generation);
        }

        // (4) Every SDPE advances one cycle.
        for (i, sdpe) in sdpes.iter_mut().enumerate() {
            if sdpe.is_busy() {
                busy_cycles[i] += 1;
            } else {
                idle_cycles[i] += 1;
            }
            let events = sdpe.step();
            for req in events.requests {
                memory.request_read(i, req.side, req.offset, req.generation);
            }
            if events.completed.is_some() {
                jobs_completed += 1;
            }
        }

        cycle += 1;
        if jobs_completed == job_count
            && sdpes.iter().all(|s| s.result_queue_len() == 0)
            && memory.quiescent()
        {
            break;
        }

        // Watchdog against scheduling bugs; any legal configuration makes
        // progress far more often than this.
        let progress = (
            jobs_completed,
            memory.grants_issued() + memory.results_written(),
        );
        if progress != last_progress {
            last_progress = progress;
            last_progress_cycle = cycle;
        } else if cycle - last_progress_cycle > 1_000_000 {
            panic!("simulation stalled at cycle {cycle}: {jobs_completed}/{job_count} jobs");
        }
    }

    assert_eq!(jobs_dispatched, job_count);
    assert_eq!(
        memory.requests_received(),
        memory.grants_issued(),
        "grant conservation violated"
    );

    let stats = SimStats {
        total_cycles: cycle,
        time_us: cycle as f64 / (cfg.clock_ghz * 1000.0),
        job_count,
        jobs_dispatched,
        jobs_completed,
        mac_count: sdpes.iter().map(|s| s.mac_count).sum(),
        comparisons: sdpes.iter().map(|s| s.comparisons).sum(),
        entries_fetched: memory.grants_issued(),
        results_written: memory.results_written(),
        memory_stall_cycles: memory.stall_cycles(),
        busy_cycles,
        idle_cycles,
    };
    Ok((memory.export_result(), stats))
}
