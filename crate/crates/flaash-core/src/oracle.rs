//! Reference contraction implementations.
//!
//! Two independent routes compute the same contraction:
//!
//! - [`contract_dense`] walks full coordinate space (including zeros) and is
//!   the brute-force ground truth.
//! - [`contract_csf_reference`] pairs CSF fibers and runs the two-pointer
//!   [`sparse_dot`]; the simulator must match it bit-exactly.
//!
//! All accumulation happens in increasing contraction-index order so the two
//! routes and the simulator differ only by additions of exact zeros, which do
//! not change the bits of a finite accumulator.

use crate::csf::{CsfTensor, Entry};
use crate::shape::{coords_iter, DenseTensor, Shape};
use crate::{Error, Result};

/// Which mode of each operand is contracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContractionSpec {
    pub mode_a: usize,
    pub mode_b: usize,
}

/// Shape of the contraction result: A's shape then B's shape with both
/// contraction modes removed. Two order-1 operands yield a scalar,
/// represented as shape `[1]`.
pub fn result_shape(a: &Shape, mode_a: usize, b: &Shape, mode_b: usize) -> Result<Shape> {
    a.check_mode(mode_a)?;
    b.check_mode(mode_b)?;
    if a.len(mode_a) != b.len(mode_b) {
        return Err(Error::ContractionLengthMismatch {
            a: a.len(mode_a),
            b: b.len(mode_b),
        });
    }
    let mut lengths = a.free_lengths(mode_a);
    lengths.extend(b.free_lengths(mode_b));
    if lengths.is_empty() {
        lengths.push(1);
    }
    Shape::new(lengths)
}

/// Brute-force dense contraction:
/// `C[{a}{b}] = sum_i A[{a}, i] * B[{b}, i]`, summed in increasing `i`.
///
/// The result is laid out row-major over A's free modes followed by B's free
/// modes. This path never touches CSF structures.
pub fn contract_dense(
    a: &DenseTensor,
    b: &DenseTensor,
    spec: ContractionSpec,
) -> Result<DenseTensor> {
    let out_shape = result_shape(a.shape(), spec.mode_a, b.shape(), spec.mode_b)?;
    let k = a.shape().len(spec.mode_a);
    let mut out = DenseTensor::zeros(out_shape);

    let a_strides = a.shape().strides();
    let b_strides = b.shape().strides();
    let a_free: Vec<usize> = (0..a.shape().order())
        .filter(|&m| m != spec.mode_a)
        .collect();
    let b_free: Vec<usize> = (0..b.shape().order())
        .filter(|&m| m != spec.mode_b)
        .collect();
    let a_free_lengths = a.shape().free_lengths(spec.mode_a);
    let b_free_lengths = b.shape().free_lengths(spec.mode_b);

    let mut flat_out = 0usize;
    for ca in coords_iter(&a_free_lengths) {
        let a_base: usize = ca
            .iter()
            .zip(&a_free)
            .map(|(&c, &m)| c * a_strides[m])
            .sum();
        for cb in coords_iter(&b_free_lengths) {
            let b_base: usize = cb
                .iter()
                .zip(&b_free)
                .map(|(&c, &m)| c * b_strides[m])
                .sum();
            let mut acc = 0.0f64;
            for i in 0..k {
                acc += a.values()[a_base + i * a_strides[spec.mode_a]]
                    * b.values()[b_base + i * b_strides[spec.mode_b]];
            }
            out.values_mut()[flat_out] = acc;
            flat_out += 1;
        }
    }
    Ok(out)
}

/// Two-pointer sparse dot product over sorted entry slices, accumulating in
/// increasing index order. Returns 0.0 for disjoint or empty inputs.
pub fn sparse_dot(fa: &[Entry], fb: &[Entry]) -> f64 {
    sparse_dot_with_collisions(fa, fb).0
}

/// [`sparse_dot`] plus the number of index collisions (MAC events).
pub fn sparse_dot_with_collisions(fa: &[Entry], fb: &[Entry]) -> (f64, u64) {
    let mut i = 0;
    let mut j = 0;
    let mut acc = 0.0f64;
    let mut collisions = 0u64;
    while i < fa.len() && j < fb.len() {
        match fa[i].index.cmp(&fb[j].index) {
            std::cmp::Ordering::Equal => {
                acc += fa[i].value * fb[j].value;
                collisions += 1;
                i += 1;
                j += 1;
            }
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Less => i += 1,
        }
    }
    (acc, collisions)
}

/// Reference CSF contraction: every fiber of A paired with every fiber of B,
/// each pair reduced by [`sparse_dot`], written to the row-major destination.
///
/// This is the functional model the simulator must reproduce bit-for-bit.
pub fn contract_csf_reference(a: &CsfTensor, b: &CsfTensor) -> Result<DenseTensor> {
    let out_shape = result_shape(
        a.shape(),
        a.contraction_mode(),
        b.shape(),
        b.contraction_mode(),
    )?;
    let mut out = DenseTensor::zeros(out_shape);
    let b_fibers = b.fiber_count();
    for fa in 0..a.fiber_count() {
        let slice_a = a.fiber_slice(fa)?;
        for fb in 0..b_fibers {
            let slice_b = b.fiber_slice(fb)?;
            let value = sparse_dot(slice_a, slice_b);
            if value != 0.0 {
                out.values_mut()[fa * b_fibers + fb] = value;
            }
        }
    }
    Ok(out)
}

/// Total collision count over all fiber pairs; the simulator's MAC counter
/// must equal this.
pub fn total_collisions(a: &CsfTensor, b: &CsfTensor) -> Result<u64> {
    let mut total = 0u64;
    for fa in 0..a.fiber_count() {
        let slice_a = a.fiber_slice(fa)?;
        for fb in 0..b.fiber_count() {
            total += sparse_dot_with_collisions(slice_a, b.fiber_slice(fb)?).1;
        }
    }
    Ok(total)
}

/// First element where `actual` differs from `expected` by more than
/// `rel_tol` relative error, reported with its multi-coordinates.
pub fn first_mismatch(
    expected: &DenseTensor,
    actual: &DenseTensor,
    rel_tol: f64,
) -> Option<(Vec<usize>, f64, f64)> {
    debug_assert_eq!(expected.shape(), actual.shape());
    for (flat, (&e, &a)) in expected.values().iter().zip(actual.values()).enumerate() {
        let diff = (e - a).abs();
        let tol = rel_tol * e.abs().max(a.abs());
        if diff > tol {
            let strides = expected.shape().strides();
            let mut coords = Vec::with_capacity(strides.len());
            let mut rem = flat;
            for s in strides {
                coords.push(rem / s);
                rem %= s;
            }
            return Some((coords, e, a));
        }
    }
    None
}
