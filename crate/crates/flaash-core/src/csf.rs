//! Compressed-sparse-fiber tensors.
//!
//! A CSF tensor fixes one contraction mode and enumerates all fibers along
//! that mode in row-major order over the remaining (free) modes. Each fiber
//! stores its nonzero `(index, value)` entries in increasing index order;
//! a shared offsets array of length `fiber_count + 1` locates each fiber's
//! run, so the half-open entry range of fiber `f` is
//! `offsets[f] .. offsets[f + 1]`. Storage is exactly NNZ entry records plus
//! the offsets array, independent of tensor volume.

use crate::shape::{DenseTensor, Shape};
use crate::{Error, Result};

/// One stored nonzero: its position along the contraction-mode fiber and its
/// value. Zeros are never stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub index: usize,
    pub value: f64,
}

/// A tensor in compressed-sparse-fiber form.
#[derive(Debug, Clone, PartialEq)]
pub struct CsfTensor {
    shape: Shape,
    contraction_mode: usize,
    fiber_offsets: Vec<usize>,
    entries: Vec<Entry>,
}

impl CsfTensor {
    /// Builds a CSF tensor from raw parts, validating every structural
    /// invariant (offset monotonicity and bounds, strict index ordering
    /// within fibers, no stored zeros).
    pub fn from_parts(
        shape: Shape,
        contraction_mode: usize,
        fiber_offsets: Vec<usize>,
        entries: Vec<Entry>,
    ) -> Result<Self> {
        shape.check_mode(contraction_mode)?;
        let fiber_count = shape.free_volume(contraction_mode);
        if fiber_offsets.len() != fiber_count + 1 {
            return Err(Error::Format(format!(
                "expected {} fiber offsets, got {}",
                fiber_count + 1,
                fiber_offsets.len()
            )));
        }
        if fiber_offsets[0] != 0 || fiber_offsets[fiber_count] != entries.len() {
            return Err(Error::Format(
                "fiber offsets must start at 0 and end at the entry count".into(),
            ));
        }
        if fiber_offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Format("fiber offsets must be non-decreasing".into()));
        }
        let k = shape.len(contraction_mode);
        for f in 0..fiber_count {
            let fiber = &entries[fiber_offsets[f]..fiber_offsets[f + 1]];
            for pair in fiber.windows(2) {
                if pair[0].index >= pair[1].index {
                    return Err(Error::Format(format!(
                        "fiber {f} indices not strictly increasing"
                    )));
                }
            }
            for e in fiber {
                if e.index >= k {
                    return Err(Error::Format(format!(
                        "entry index {} out of range for contraction length {k}",
                        e.index
                    )));
                }
                if e.value == 0.0 {
                    return Err(Error::Format("stored zero value".into()));
                }
                if !e.value.is_finite() {
                    return Err(Error::Format("stored non-finite value".into()));
                }
            }
        }
        Ok(Self {
            shape,
            contraction_mode,
            fiber_offsets,
            entries,
        })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn contraction_mode(&self) -> usize {
        self.contraction_mode
    }

    /// Length of the contracted mode.
    pub fn contraction_len(&self) -> usize {
        self.shape.len(self.contraction_mode)
    }

    pub fn fiber_count(&self) -> usize {
        self.fiber_offsets.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn fiber_offsets(&self) -> &[usize] {
        &self.fiber_offsets
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// The contiguous entry slice of one fiber. Empty fibers yield an empty
    /// slice.
    pub fn fiber_slice(&self, fiber: usize) -> Result<&[Entry]> {
        if fiber >= self.fiber_count() {
            return Err(Error::FiberOutOfRange {
                fiber,
                count: self.fiber_count(),
            });
        }
        Ok(&self.entries[self.fiber_offsets[fiber]..self.fiber_offsets[fiber + 1]])
    }

    /// The half-open entry-offset range of one fiber.
    pub fn fiber_range(&self, fiber: usize) -> Result<(usize, usize)> {
        if fiber >= self.fiber_count() {
            return Err(Error::FiberOutOfRange {
                fiber,
                count: self.fiber_count(),
            });
        }
        Ok((self.fiber_offsets[fiber], self.fiber_offsets[fiber + 1]))
    }
}

/// Compresses a dense tensor into CSF form along `contraction_mode`.
///
/// Fibers are enumerated row-major over the free modes; within a fiber,
/// entries are scanned (and therefore stored) in increasing contraction
/// index. `csf_to_dense` inverts this bit-exactly.
pub fn dense_to_csf(t: &DenseTensor, contraction_mode: usize) -> Result<CsfTensor> {
    t.shape().check_mode(contraction_mode)?;
    let fiber_count = t.shape().free_volume(contraction_mode);
    let k = t.shape().len(contraction_mode);
    let values = t.values();

    let mut fiber_offsets = Vec::with_capacity(fiber_count + 1);
    let mut entries = Vec::new();
    fiber_offsets.push(0);
    for fiber in 0..fiber_count {
        let (base, stride) = t.shape().fiber_base_and_stride(contraction_mode, fiber);
        for index in 0..k {
            let v = values[base + index * stride];
            if v != 0.0 {
                entries.push(Entry { index, value: v });
            }
        }
        fiber_offsets.push(entries.len());
    }
    Ok(CsfTensor {
        shape: t.shape().clone(),
        contraction_mode,
        fiber_offsets,
        entries,
    })
}

/// Expands a CSF tensor back to dense form; unstored positions are 0.0.
pub fn csf_to_dense(t: &CsfTensor) -> DenseTensor {
    let mut dense = DenseTensor::zeros(t.shape().clone());
    for fiber in 0..t.fiber_count() {
        let (base, stride) = t.shape().fiber_base_and_stride(t.contraction_mode, fiber);
        let slice = &t.entries[t.fiber_offsets[fiber]..t.fiber_offsets[fiber + 1]];
        let values = dense.values_mut();
        for e in slice {
            values[base + e.index * stride] = e.value;
        }
    }
    dense
}

/// Sparsifies a simulation result region into CSF form.
///
/// Identical to [`dense_to_csf`]; named separately because it is the
/// driver-side post-processing step that follows a simulated contraction.
pub fn sparsify_result(dense: &DenseTensor, contraction_mode: usize) -> Result<CsfTensor> {
    dense_to_csf(dense, contraction_mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix_2x3() -> DenseTensor {
        let shape = Shape::new(vec![2, 3]).unwrap();
        DenseTensor::from_values(shape, vec![0.0, 5.0, 0.0, 7.0, 0.0, 9.0]).unwrap()
    }

    #[test]
    fn dense_to_csf_matrix_example() {
        let csf = dense_to_csf(&matrix_2x3(), 1).unwrap();
        assert_eq!(csf.fiber_offsets(), &[0, 1, 3]);
        assert_eq!(
            csf.entries(),
            &[
                Entry {
                    index: 1,
                    value: 5.0
                },
                Entry {
                    index: 0,
                    value: 7.0
                },
                Entry {
                    index: 2,
                    value: 9.0
                },
            ]
        );
    }

    #[test]
    fn dense_to_csf_all_zero() {
        let shape = Shape::new(vec![3, 4]).unwrap();
        let csf = dense_to_csf(&DenseTensor::zeros(shape), 0).unwrap();
        assert_eq!(csf.nnz(), 0);
        assert!(csf.fiber_offsets().iter().all(|&o| o == 0));
        assert_eq!(csf.fiber_offsets().len(), 5);
    }

    #[test]
    fn dense_to_csf_identity_matrix() {
        let shape = Shape::new(vec![2, 2]).unwrap();
        let t = DenseTensor::from_values(shape, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let csf = dense_to_csf(&t, 1).unwrap();
        assert_eq!(csf.fiber_offsets(), &[0, 1, 2]);
        assert_eq!(
            csf.entries(),
            &[
                Entry {
                    index: 0,
                    value: 1.0
                },
                Entry {
                    index: 1,
                    value: 1.0
                },
            ]
        );
    }

    #[test]
    fn dense_to_csf_rejects_bad_mode() {
        assert!(matches!(
            dense_to_csf(&matrix_2x3(), 2),
            Err(Error::ModeOutOfRange { mode: 2, order: 2 })
        ));
    }

    #[test]
    fn csf_to_dense_inverts_matrix_example() {
        let t = matrix_2x3();
        let csf = dense_to_csf(&t, 1).unwrap();
        assert_eq!(csf_to_dense(&csf), t);
    }

    #[test]
    fn csf_to_dense_empty_entries() {
        let shape = Shape::new(vec![2, 2]).unwrap();
        let csf = CsfTensor::from_parts(shape.clone(), 0, vec![0, 0, 0], vec![]).unwrap();
        assert_eq!(csf_to_dense(&csf), DenseTensor::zeros(shape));
    }

    #[test]
    fn single_fiber_shape_scatters_entries() {
        let shape = Shape::new(vec![1, 1, 5]).unwrap();
        let entries = vec![
            Entry {
                index: 1,
                value: 2.0,
            },
            Entry {
                index: 4,
                value: -3.0,
            },
        ];
        let csf = CsfTensor::from_parts(shape, 2, vec![0, 2], entries).unwrap();
        assert_eq!(csf.fiber_count(), 1);
        assert_eq!(csf_to_dense(&csf).values(), &[0.0, 2.0, 0.0, 0.0, -3.0]);
    }

    #[test]
    fn fiber_slice_matches_offsets() {
        let csf = dense_to_csf(&matrix_2x3(), 1).unwrap();
        assert_eq!(csf.fiber_slice(0).unwrap().len(), 1);
        assert_eq!(csf.fiber_slice(1).unwrap().len(), 2);
        assert!(matches!(
            csf.fiber_slice(2),
            Err(Error::FiberOutOfRange { fiber: 2, count: 2 })
        ));
        // Last fiber ends exactly at NNZ.
        assert_eq!(csf.fiber_range(1).unwrap(), (1, 3));
    }

    #[test]
    fn non_last_mode_contraction_round_trips() {
        // 2x3 matrix contracted along mode 0: fibers are the three columns.
        let t = matrix_2x3();
        let csf = dense_to_csf(&t, 0).unwrap();
        assert_eq!(csf.fiber_count(), 3);
        assert_eq!(csf.fiber_offsets(), &[0, 1, 2, 3]);
        assert_eq!(csf_to_dense(&csf), t);
    }

    #[test]
    fn from_parts_rejects_violations() {
        let shape = Shape::new(vec![2, 2]).unwrap();
        // Unsorted fiber indices.
        let bad = CsfTensor::from_parts(
            shape.clone(),
            1,
            vec![0, 2, 2],
            vec![
                Entry {
                    index: 1,
                    value: 1.0,
                },
                Entry {
                    index: 0,
                    value: 2.0,
                },
            ],
        );
        assert!(bad.is_err());
        // Stored zero.
        let bad = CsfTensor::from_parts(
            shape.clone(),
            1,
            vec![0, 1, 1],
            vec![Entry {
                index: 0,
                value: 0.0,
            }],
        );
        assert!(bad.is_err());
        // Offsets not ending at entry count.
        let bad = CsfTensor::from_parts(shape, 1, vec![0, 1, 2], vec![]);
        assert!(bad.is_err());
    }
}
