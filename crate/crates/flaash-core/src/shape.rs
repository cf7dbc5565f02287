//! Tensor shapes and dense row-major tensors.
//!
//! A tensor has one length per mode; the number of modes is its order. Dense
//! tensors store `f64` values in row-major order (last mode fastest), which is
//! also the layout of the simulator's preallocated result region.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// An ordered list of mode lengths. Every length is >= 1 and the total volume
/// is checked against overflow at construction time.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    mode_lengths: Vec<usize>,
}

impl Shape {
    pub fn new(mode_lengths: Vec<usize>) -> Result<Self> {
        if mode_lengths.is_empty() {
            return Err(Error::EmptyShape);
        }
        if mode_lengths.contains(&0) {
            return Err(Error::ZeroModeLength);
        }
        mode_lengths
            .iter()
            .try_fold(1usize, |acc, &l| acc.checked_mul(l))
            .ok_or(Error::VolumeOverflow)?;
        Ok(Self { mode_lengths })
    }

    /// Number of modes.
    pub fn order(&self) -> usize {
        self.mode_lengths.len()
    }

    /// Length of one mode.
    pub fn len(&self, mode: usize) -> usize {
        self.mode_lengths[mode]
    }

    pub fn mode_lengths(&self) -> &[usize] {
        &self.mode_lengths
    }

    /// Product of all mode lengths. Cannot overflow (checked at construction).
    pub fn volume(&self) -> usize {
        self.mode_lengths.iter().product()
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.order() {
            Ok(())
        } else {
            Err(Error::ModeOutOfRange {
                mode,
                order: self.order(),
            })
        }
    }

    /// Volume of the shape with `mode` removed (1 for an order-1 tensor).
    pub fn free_volume(&self, mode: usize) -> usize {
        self.mode_lengths
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != mode)
            .map(|(_, &l)| l)
            .product()
    }

    /// The non-contracted mode lengths, in mode order.
    pub fn free_lengths(&self, mode: usize) -> Vec<usize> {
        self.mode_lengths
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != mode)
            .map(|(_, &l)| l)
            .collect()
    }

    /// Row-major strides (last mode has stride 1).
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.order()];
        for m in (0..self.order().saturating_sub(1)).rev() {
            strides[m] = strides[m + 1] * self.mode_lengths[m + 1];
        }
        strides
    }

    /// Flat row-major index of full coordinates.
    pub fn flat_index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.order());
        let strides = self.strides();
        coords.iter().zip(&strides).map(|(&c, &s)| c * s).sum()
    }

    /// Base flat offset of a fiber along `mode`, plus the stride between
    /// consecutive elements of that fiber.
    ///
    /// Fibers are numbered row-major over the free modes (the contraction
    /// mode is logically moved last), so `fiber` ranges over
    /// `0..free_volume(mode)`.
    pub fn fiber_base_and_stride(&self, mode: usize, fiber: usize) -> (usize, usize) {
        let strides = self.strides();
        let mut base = 0usize;
        let mut rem = fiber;
        // Decode the fiber number into free-mode coordinates, most-significant
        // (earliest free mode) first.
        let free: Vec<usize> = (0..self.order()).filter(|&m| m != mode).collect();
        for &m in &free {
            let tail: usize = free
                .iter()
                .filter(|&&other| other > m)
                .map(|&other| self.mode_lengths[other])
                .product();
            let coord = rem / tail;
            rem %= tail;
            base += coord * strides[m];
        }
        (base, strides[mode])
    }
}

/// A dense tensor: a shape plus a flat row-major `f64` value array.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Shape,
    values: Vec<f64>,
}

impl DenseTensor {
    pub fn zeros(shape: Shape) -> Self {
        let volume = shape.volume();
        Self {
            shape,
            values: vec![0.0; volume],
        }
    }

    pub fn from_values(shape: Shape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.volume() {
            return Err(Error::ValueCountMismatch {
                got: values.len(),
                want: shape.volume(),
            });
        }
        Ok(Self { shape, values })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, coords: &[usize]) -> f64 {
        self.values[self.shape.flat_index(coords)]
    }

    pub fn set(&mut self, coords: &[usize], value: f64) {
        let idx = self.shape.flat_index(coords);
        self.values[idx] = value;
    }

    /// Number of stored nonzero values.
    pub fn nnz(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0.0).count()
    }
}

/// Iterates all coordinate tuples of a shape in row-major order.
pub fn coords_iter(lengths: &[usize]) -> CoordsIter {
    CoordsIter {
        lengths: lengths.to_vec(),
        next: if lengths.contains(&0) {
            None
        } else {
            Some(vec![0; lengths.len()])
        },
    }
}

pub struct CoordsIter {
    lengths: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for CoordsIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.clone()?;
        // Odometer increment, last mode fastest.
        let mut carry = true;
        let mut next = current.clone();
        for m in (0..self.lengths.len()).rev() {
            next[m] += 1;
            if next[m] < self.lengths[m] {
                carry = false;
                break;
            }
            next[m] = 0;
        }
        self.next = if carry || self.lengths.is_empty() {
            None
        } else {
            Some(next)
        };
        Some(current)
    }
}
