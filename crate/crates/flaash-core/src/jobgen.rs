//! Job generation: turning a contraction into fiber-pair dot products.
//!
//! Every fiber of A is paired with every fiber of B. Jobs are numbered so
//! that `job / b_fiber_count` selects the A fiber and `job % b_fiber_count`
//! selects the B fiber, which makes the destination enumeration row-major
//! over A's free modes then B's — the result region needs no coordinate
//! arithmetic at write time. Index-to-offset translation happens here; the
//! engines only ever see entry ranges.

use crate::csf::CsfTensor;
use crate::oracle;
use crate::shape::Shape;
use crate::{Error, Result};

/// One fiber-pair dot product: half-open entry ranges into each operand's
/// entry array, plus the flat destination index in the result region.
///
/// The range bounds permit partial (chunked) dot products, but the generator
/// always emits whole fibers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Job {
    pub job_number: usize,
    pub a_start: usize,
    pub a_end: usize,
    pub b_start: usize,
    pub b_end: usize,
    pub dest_index: usize,
}

/// Dimensions of a contraction's job space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JobPlan {
    pub job_count: usize,
    pub a_fiber_count: usize,
    pub b_fiber_count: usize,
    pub result_shape: Shape,
}

/// Plans the contraction: `job_count = a_fibers * b_fibers`, which also
/// equals the result volume.
pub fn plan(a: &CsfTensor, b: &CsfTensor) -> Result<JobPlan> {
    let result_shape = oracle::result_shape(
        a.shape(),
        a.contraction_mode(),
        b.shape(),
        b.contraction_mode(),
    )?;
    let a_fiber_count = a.fiber_count();
    let b_fiber_count = b.fiber_count();
    Ok(JobPlan {
        job_count: a_fiber_count * b_fiber_count,
        a_fiber_count,
        b_fiber_count,
        result_shape,
    })
}

/// Materializes one job by number: A fiber `job / b_fibers`, B fiber
/// `job % b_fibers`, destination equal to the job number.
pub fn job_for(plan: &JobPlan, a: &CsfTensor, b: &CsfTensor, job_number: usize) -> Result<Job> {
    if job_number >= plan.job_count {
        return Err(Error::JobOutOfRange {
            job: job_number,
            count: plan.job_count,
        });
    }
    let a_fiber = job_number / plan.b_fiber_count;
    let b_fiber = job_number % plan.b_fiber_count;
    let (a_start, a_end) = a.fiber_range(a_fiber)?;
    let (b_start, b_end) = b.fiber_range(b_fiber)?;
    Ok(Job {
        job_number,
        a_start,
        a_end,
        b_start,
        b_end,
        dest_index: job_number,
    })
}

/// Lazy ordered stream of all jobs, `0..job_count`. Empty fibers still
/// occupy a job.
pub fn all_jobs<'t>(
    plan: &JobPlan,
    a: &'t CsfTensor,
    b: &'t CsfTensor,
) -> impl Iterator<Item = Job> + 't {
    let plan = plan.clone();
    (0..plan.job_count).map(move |n| {
        job_for(&plan, a, b, n).expect("job numbers within plan bounds are always valid")
    })
}
