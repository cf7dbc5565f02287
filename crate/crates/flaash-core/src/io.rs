//! The `csft-v1` tensor interchange format.
//!
//! A single JSON document:
//!
//! ```json
//! {"format":"csft-v1","shape":[...],"contraction_mode":M,
//!  "coords":[[c0,...,cN-1],...],"values":[...]}
//! ```
//!
//! Coordinates are full, 0-based, and sorted lexicographically; values are
//! finite and nonzero, one per coordinate. Loading rejects duplicate,
//! unsorted or out-of-range coordinates and zero values, then builds the CSF
//! structure for the document's contraction mode. Writing is deterministic,
//! so identical tensors produce byte-identical documents.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::csf::{CsfTensor, Entry};
use crate::shape::{coords_iter, Shape};
use crate::{Error, Result};

pub const FORMAT_NAME: &str = "csft-v1";

#[derive(Debug, Serialize, Deserialize)]
struct CsftDoc {
    format: String,
    shape: Vec<usize>,
    contraction_mode: usize,
    coords: Vec<Vec<usize>>,
    values: Vec<f64>,
}

/// Serializes a CSF tensor to a `csft-v1` JSON string.
pub fn to_json(t: &CsfTensor) -> Result<String> {
    let mode = t.contraction_mode();
    let free_lengths = t.shape().free_lengths(mode);
    let mut cells: Vec<(Vec<usize>, f64)> = Vec::with_capacity(t.nnz());
    for (fiber, free_coords) in coords_iter(&free_lengths).enumerate() {
        for e in t.fiber_slice(fiber)? {
            let mut coords = free_coords.clone();
            coords.insert(mode, e.index);
            cells.push((coords, e.value));
        }
    }
    cells.sort_by(|x, y| x.0.cmp(&y.0));
    let (coords, values) = cells.into_iter().unzip();
    let doc = CsftDoc {
        format: FORMAT_NAME.to_string(),
        shape: t.shape().mode_lengths().to_vec(),
        contraction_mode: mode,
        coords,
        values,
    };
    Ok(serde_json::to_string(&doc)?)
}

/// Parses and validates a `csft-v1` JSON string, building CSF for the
/// document's contraction mode (or `mode_override` when given).
pub fn from_json(json: &str, mode_override: Option<usize>) -> Result<CsfTensor> {
    let doc: CsftDoc = serde_json::from_str(json)?;
    if doc.format != FORMAT_NAME {
        return Err(Error::Format(format!(
            "unsupported format {:?}, expected {FORMAT_NAME:?}",
            doc.format
        )));
    }
    let shape = Shape::new(doc.shape)?;
    shape.check_mode(doc.contraction_mode)?;
    let mode = mode_override.unwrap_or(doc.contraction_mode);
    shape.check_mode(mode)?;
    if doc.coords.len() != doc.values.len() {
        return Err(Error::Format(format!(
            "{} coords but {} values",
            doc.coords.len(),
            doc.values.len()
        )));
    }
    for (i, coords) in doc.coords.iter().enumerate() {
        if coords.len() != shape.order() {
            return Err(Error::Format(format!(
                "coordinate {i} has {} components, expected {}",
                coords.len(),
                shape.order()
            )));
        }
        for (m, &c) in coords.iter().enumerate() {
            if c >= shape.len(m) {
                return Err(Error::Format(format!(
                    "coordinate {coords:?} out of range for shape {:?}",
                    shape.mode_lengths()
                )));
            }
        }
        if i > 0 {
            match doc.coords[i - 1].cmp(coords) {
                std::cmp::Ordering::Less => {}
                std::cmp::Ordering::Equal => {
                    return Err(Error::Format(format!("duplicate coordinate {coords:?}")))
                }
                std::cmp::Ordering::Greater => {
                    return Err(Error::Format(
                        "coordinates not sorted lexicographically".into(),
                    ))
                }
            }
        }
    }
    for (i, &v) in doc.values.iter().enumerate() {
        if v == 0.0 {
            return Err(Error::Format(format!("zero value at position {i}")));
        }
        if !v.is_finite() {
            return Err(Error::Format(format!("non-finite value at position {i}")));
        }
    }

    // Row-major strides over the free modes, for fiber ranking.
    let free: Vec<usize> = (0..shape.order()).filter(|&m| m != mode).collect();
    let mut free_strides = vec![1usize; free.len()];
    for i in (0..free.len().saturating_sub(1)).rev() {
        free_strides[i] = free_strides[i + 1] * shape.len(free[i + 1]);
    }

    let mut keyed: Vec<(usize, Entry)> = doc
        .coords
        .iter()
        .zip(&doc.values)
        .map(|(coords, &value)| {
            let fiber: usize = free
                .iter()
                .zip(&free_strides)
                .map(|(&m, &s)| coords[m] * s)
                .sum();
            (
                fiber,
                Entry {
                    index: coords[mode],
                    value,
                },
            )
        })
        .collect();
    keyed.sort_by_key(|&(fiber, entry)| (fiber, entry.index));

    let fiber_count = shape.free_volume(mode);
    let mut fiber_offsets = Vec::with_capacity(fiber_count + 1);
    let mut entries = Vec::with_capacity(keyed.len());
    fiber_offsets.push(0);
    let mut current = 0;
    for (fiber, entry) in keyed {
        while current < fiber {
            fiber_offsets.push(entries.len());
            current += 1;
        }
        entries.push(entry);
    }
    while current < fiber_count {
        fiber_offsets.push(entries.len());
        current += 1;
    }
    CsfTensor::from_parts(shape, mode, fiber_offsets, entries)
}

/// Shape recorded in a `csft-v1` document, without building the tensor.
pub fn peek_shape(json: &str) -> Result<Vec<usize>> {
    #[derive(Deserialize)]
    struct Head {
        format: String,
        shape: Vec<usize>,
    }
    let head: Head = serde_json::from_str(json)?;
    if head.format != FORMAT_NAME {
        return Err(Error::Format(format!(
            "unsupported format {:?}, expected {FORMAT_NAME:?}",
            head.format
        )));
    }
    Ok(head.shape)
}

pub fn save_csft(t: &CsfTensor, path: &Path) -> Result<()> {
    fs::write(path, to_json(t)?)?;
    Ok(())
}

pub fn load_csft(path: &Path, mode_override: Option<usize>) -> Result<CsfTensor> {
    from_json(&fs::read_to_string(path)?, mode_override)
}
