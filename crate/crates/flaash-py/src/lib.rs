//! Python bindings for the sparse-contraction library and simulator.
//!
//! Exposes the dense/CSF tensor types, the reference oracles, and
//! `simulate()` as an in-process module; see `python/smoke_test.py` at the
//! repository root for a usage example.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use flaash_core::csf;
use flaash_core::engine;
use flaash_core::io;
use flaash_core::memory::MemoryConfig;
use flaash_core::oracle;
use flaash_core::random;
use flaash_core::shape;

fn err(e: flaash_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A dense row-major tensor of float64 values.
#[pyclass(name = "DenseTensor")]
struct PyDenseTensor {
    inner: shape::DenseTensor,
}

#[pymethods]
impl PyDenseTensor {
    #[new]
    fn new(shape: Vec<usize>, values: Vec<f64>) -> PyResult<Self> {
        let shape = shape::Shape::new(shape).map_err(err)?;
        Ok(Self {
            inner: shape::DenseTensor::from_values(shape, values).map_err(err)?,
        })
    }

    #[staticmethod]
    fn zeros(shape: Vec<usize>) -> PyResult<Self> {
        let shape = shape::Shape::new(shape).map_err(err)?;
        Ok(Self {
            inner: shape::DenseTensor::zeros(shape),
        })
    }

    #[getter]
    fn shape(&self) -> Vec<usize> {
        self.inner.shape().mode_lengths().to_vec()
    }

    /// Flat row-major values (last mode fastest).
    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn get(&self, coords: Vec<usize>) -> PyResult<f64> {
        if coords.len() != self.inner.shape().order()
            || coords
                .iter()
                .zip(self.inner.shape().mode_lengths())
                .any(|(&c, &l)| c >= l)
        {
            return Err(PyValueError::new_err(format!(
                "coordinates {coords:?} invalid for shape {:?}",
                self.inner.shape().mode_lengths()
            )));
        }
        Ok(self.inner.get(&coords))
    }

    fn nnz(&self) -> usize {
        self.inner.nnz()
    }

    /// Compress along `mode` into CSF form.
    fn to_csf(&self, mode: usize) -> PyResult<PyCsfTensor> {
        Ok(PyCsfTensor {
            inner: csf::dense_to_csf(&self.inner, mode).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "DenseTensor(shape={:?}, nnz={})",
            self.inner.shape().mode_lengths(),
            self.inner.nnz()
        )
    }
}

/// A compressed-sparse-fiber tensor.
#[pyclass(name = "CsfTensor")]
struct PyCsfTensor {
    inner: csf::CsfTensor,
}

#[pymethods]
impl PyCsfTensor {
    #[getter]
    fn shape(&self) -> Vec<usize> {
        self.inner.shape().mode_lengths().to_vec()
    }

    #[getter]
    fn contraction_mode(&self) -> usize {
        self.inner.contraction_mode()
    }

    #[getter]
    fn fiber_offsets(&self) -> Vec<usize> {
        self.inner.fiber_offsets().to_vec()
    }

    fn nnz(&self) -> usize {
        self.inner.nnz()
    }

    fn fiber_count(&self) -> usize {
        self.inner.fiber_count()
    }

    /// `(index, value)` entries of one fiber.
    fn fiber(&self, fiber: usize) -> PyResult<Vec<(usize, f64)>> {
        Ok(self
            .inner
            .fiber_slice(fiber)
            .map_err(err)?
            .iter()
            .map(|e| (e.index, e.value))
            .collect())
    }

    fn to_dense(&self) -> PyDenseTensor {
        PyDenseTensor {
            inner: csf::csf_to_dense(&self.inner),
        }
    }

    /// Write as csft-v1 JSON.
    fn save(&self, path: &str) -> PyResult<()> {
        io::save_csft(&self.inner, std::path::Path::new(path)).map_err(err)
    }

    /// Load a csft-v1 file, optionally rebuilding for another mode.
    #[staticmethod]
    #[pyo3(signature = (path, mode=None))]
    fn load(path: &str, mode: Option<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: io::load_csft(std::path::Path::new(path), mode).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "CsfTensor(shape={:?}, mode={}, nnz={})",
            self.inner.shape().mode_lengths(),
            self.inner.contraction_mode(),
            self.inner.nnz()
        )
    }
}

/// Cycle counts and event totals from one simulation.
#[pyclass(name = "SimStats")]
struct PySimStats {
    inner: engine::SimStats,
}

#[pymethods]
impl PySimStats {
    #[getter]
    fn total_cycles(&self) -> u64 {
        self.inner.total_cycles
    }

    #[getter]
    fn time_us(&self) -> f64 {
        self.inner.time_us
    }

    #[getter]
    fn job_count(&self) -> u64 {
        self.inner.job_count
    }

    #[getter]
    fn jobs_dispatched(&self) -> u64 {
        self.inner.jobs_dispatched
    }

    #[getter]
    fn jobs_completed(&self) -> u64 {
        self.inner.jobs_completed
    }

    #[getter]
    fn mac_count(&self) -> u64 {
        self.inner.mac_count
    }

    #[getter]
    fn comparisons(&self) -> u64 {
        self.inner.comparisons
    }

    #[getter]
    fn entries_fetched(&self) -> u64 {
        self.inner.entries_fetched
    }

    #[getter]
    fn results_written(&self) -> u64 {
        self.inner.results_written
    }

    #[getter]
    fn memory_stall_cycles(&self) -> u64 {
        self.inner.memory_stall_cycles
    }

    #[getter]
    fn busy_cycles(&self) -> Vec<u64> {
        self.inner.busy_cycles.clone()
    }

    #[getter]
    fn idle_cycles(&self) -> Vec<u64> {
        self.inner.idle_cycles.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "SimStats(cycles={}, jobs={}, macs={}, time_us={:.3})",
            self.inner.total_cycles, self.inner.job_count, self.inner.mac_count, self.inner.time_us
        )
    }
}

/// Seeded random tensor: each element nonzero with probability `density`.
#[pyfunction]
fn random_tensor(shape: Vec<usize>, density: f64, seed: u64) -> PyResult<PyDenseTensor> {
    let shape = shape::Shape::new(shape).map_err(err)?;
    let cfg = random::DensityConfig::new(density, seed).map_err(err)?;
    Ok(PyDenseTensor {
        inner: random::random_tensor(&shape, &cfg).map_err(err)?,
    })
}

/// Seeded random tensor with exactly `nnz` nonzeros.
#[pyfunction]
fn random_tensor_with_nnz(shape: Vec<usize>, nnz: usize, seed: u64) -> PyResult<PyDenseTensor> {
    let shape = shape::Shape::new(shape).map_err(err)?;
    Ok(PyDenseTensor {
        inner: random::random_tensor_with_nnz(&shape, nnz, seed).map_err(err)?,
    })
}

/// Result shape of contracting `a` (along `mode_a`) with `b` (along `mode_b`).
#[pyfunction]
fn result_shape(
    a: Vec<usize>,
    mode_a: usize,
    b: Vec<usize>,
    mode_b: usize,
) -> PyResult<Vec<usize>> {
    let sa = shape::Shape::new(a).map_err(err)?;
    let sb = shape::Shape::new(b).map_err(err)?;
    Ok(oracle::result_shape(&sa, mode_a, &sb, mode_b)
        .map_err(err)?
        .mode_lengths()
        .to_vec())
}

/// Brute-force dense contraction (ground truth).
#[pyfunction]
fn contract_dense(
    a: &PyDenseTensor,
    b: &PyDenseTensor,
    mode_a: usize,
    mode_b: usize,
) -> PyResult<PyDenseTensor> {
    Ok(PyDenseTensor {
        inner: oracle::contract_dense(
            &a.inner,
            &b.inner,
            oracle::ContractionSpec { mode_a, mode_b },
        )
        .map_err(err)?,
    })
}

/// Reference CSF contraction; the simulator matches it bit-exactly.
#[pyfunction]
fn contract_reference(a: &PyCsfTensor, b: &PyCsfTensor) -> PyResult<PyDenseTensor> {
    Ok(PyDenseTensor {
        inner: oracle::contract_csf_reference(&a.inner, &b.inner).map_err(err)?,
    })
}

/// Two-pointer sparse dot product over `(index, value)` lists.
#[pyfunction]
fn sparse_dot(fa: Vec<(usize, f64)>, fb: Vec<(usize, f64)>) -> f64 {
    let to_entries = |f: Vec<(usize, f64)>| {
        f.into_iter()
            .map(|(index, value)| csf::Entry { index, value })
            .collect::<Vec<_>>()
    };
    oracle::sparse_dot(&to_entries(fa), &to_entries(fb))
}

/// Run the cycle-level simulation; returns `(DenseTensor, SimStats)`.
#[pyfunction]
#[pyo3(signature = (a, b, sdpes=8, fifo_depth=8, result_queue_depth=4,
                    read_bandwidth=4, read_latency=1, write_ports=1, clock_ghz=1.0))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    a: &PyCsfTensor,
    b: &PyCsfTensor,
    sdpes: usize,
    fifo_depth: usize,
    result_queue_depth: usize,
    read_bandwidth: usize,
    read_latency: u64,
    write_ports: usize,
    clock_ghz: f64,
) -> PyResult<(PyDenseTensor, PySimStats)> {
    let cfg = engine::EngineConfig {
        sdpe_count: sdpes,
        fifo_depth,
        result_queue_depth,
        memory: MemoryConfig {
            read_bandwidth,
            read_latency,
            write_ports,
        },
        clock_ghz,
    };
    let (result, stats) = engine::simulate(&a.inner, &b.inner, &cfg).map_err(err)?;
    Ok((PyDenseTensor { inner: result }, PySimStats { inner: stats }))
}

#[pymodule]
fn flaash_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDenseTensor>()?;
    m.add_class::<PyCsfTensor>()?;
    m.add_class::<PySimStats>()?;
    m.add_function(wrap_pyfunction!(random_tensor, m)?)?;
    m.add_function(wrap_pyfunction!(random_tensor_with_nnz, m)?)?;
    m.add_function(wrap_pyfunction!(result_shape, m)?)?;
    m.add_function(wrap_pyfunction!(contract_dense, m)?)?;
    m.add_function(wrap_pyfunction!(contract_reference, m)?)?;
    m.add_function(wrap_pyfunction!(sparse_dot, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
