//! Preset experiment grids.
//!
//! Each preset fixes operand shapes and generation parameters and varies one
//! knob, mirroring the synthetic workloads the simulator is meant to
//! characterize: SDPE scaling, volume scaling at constant NNZ, order scaling
//! at constant NNZ, and density sensitivity for three tensor-times-matrix
//! shapes. Rows are deterministic functions of the preset and seed.

use crate::csf::{dense_to_csf, CsfTensor};
use crate::engine::{simulate, EngineConfig, SimStats};
use crate::memory::MemoryConfig;
use crate::random::{random_tensor, random_tensor_with_nnz, DensityConfig};
use crate::shape::Shape;
use crate::{Error, Result};

/// Known sweep presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepPreset {
    SdpeSweep,
    VolumeSweep,
    OrderSweep,
    DensitySweepA,
    DensitySweepB,
    DensitySweepC,
}

impl SweepPreset {
    pub const ALL: [SweepPreset; 6] = [
        SweepPreset::SdpeSweep,
        SweepPreset::VolumeSweep,
        SweepPreset::OrderSweep,
        SweepPreset::DensitySweepA,
        SweepPreset::DensitySweepB,
        SweepPreset::DensitySweepC,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepPreset::SdpeSweep => "sdpe-sweep",
            SweepPreset::VolumeSweep => "volume-sweep",
            SweepPreset::OrderSweep => "order-sweep",
            SweepPreset::DensitySweepA => "density-sweep-a",
            SweepPreset::DensitySweepB => "density-sweep-b",
            SweepPreset::DensitySweepC => "density-sweep-c",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown preset {name:?}")))
    }
}

/// How one operand is generated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GenSpec {
    /// Bernoulli per element.
    Density(f64),
    /// Exactly this many nonzeros at distinct random positions.
    ExactNnz(usize),
}

impl GenSpec {
    pub fn describe(self) -> String {
        match self {
            GenSpec::Density(d) => format!("density={d}"),
            GenSpec::ExactNnz(n) => format!("nnz={n}"),
        }
    }
}

/// One grid point: operand recipes plus the engine configuration to run.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub preset: &'static str,
    /// Human-readable swept parameter, e.g. `sdpes=8` or `density=0.01`.
    pub param: String,
    pub seed: u64,
    pub shape_a: Vec<usize>,
    pub shape_b: Vec<usize>,
    pub gen_a: GenSpec,
    pub gen_b: GenSpec,
    pub config: EngineConfig,
}

/// A completed grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub point: SweepPoint,
    pub nnz_a: usize,
    pub nnz_b: usize,
    pub stats: SimStats,
}

const B_SEED_SALT: u64 = 0xA5A5_5A5A_0F0F_F0F0;

/// SDPE counts swept by `sdpe-sweep`.
pub const SDPE_COUNTS: [usize; 7] = [1, 2, 4, 8, 16, 32, 64];
/// Contraction lengths swept by `volume-sweep`.
pub const VOLUME_LENGTHS: [usize; 4] = [512, 1024, 2048, 3584];
/// Operand orders swept by `order-sweep`.
pub const ORDERS: [usize; 5] = [3, 4, 5, 6, 7];
/// Tensor densities swept by the density presets.
pub const DENSITIES: [f64; 6] = [0.005, 0.01, 0.02, 0.03, 0.04, 0.05];

/// NNZ held constant per operand in `volume-sweep` (matches 10% of the
/// smallest volume).
pub const VOLUME_SWEEP_NNZ: (usize, usize) = (1280, 256);
/// NNZ held constant per operand in `order-sweep`; small enough that job
/// dispatch dominates at high orders.
pub const ORDER_SWEEP_NNZ: (usize, usize) = (256, 16);

/// The full grid of a preset for the given seeds, in deterministic order:
/// the swept parameter varies in the outer loop, seeds in the inner loop.
pub fn grid(preset: SweepPreset, seeds: &[u64]) -> Vec<SweepPoint> {
    let mut points = Vec::new();
    match preset {
        SweepPreset::SdpeSweep => {
            for &sdpes in &SDPE_COUNTS {
                for &seed in seeds {
                    points.push(SweepPoint {
                        preset: preset.name(),
                        param: format!("sdpes={sdpes}"),
                        seed,
                        shape_a: vec![7, 7, 512],
                        shape_b: vec![7, 512],
                        gen_a: GenSpec::Density(0.10),
                        gen_b: GenSpec::Density(0.50),
                        // A wider read interface than the CLI default, so the
                        // memory system can feed the largest engine counts in
                        // the grid; contraction time then scales with engine
                        // count until it saturates past 32.
                        config: EngineConfig {
                            sdpe_count: sdpes,
                            memory: MemoryConfig {
                                read_bandwidth: 32,
                                ..MemoryConfig::default()
                            },
                            ..EngineConfig::default()
                        },
                    });
                }
            }
        }
        SweepPreset::VolumeSweep => {
            for &n in &VOLUME_LENGTHS {
                for &seed in seeds {
                    points.push(SweepPoint {
                        preset: preset.name(),
                        param: format!("n={n}"),
                        seed,
                        shape_a: vec![5, 5, n],
                        shape_b: vec![5, n],
                        gen_a: GenSpec::ExactNnz(VOLUME_SWEEP_NNZ.0),
                        gen_b: GenSpec::ExactNnz(VOLUME_SWEEP_NNZ.1),
                        config: EngineConfig::default(),
                    });
                }
            }
        }
        SweepPreset::OrderSweep => {
            for &order in &ORDERS {
                for &seed in seeds {
                    let mut shape_a = vec![3; order - 1];
                    shape_a.push(512);
                    points.push(SweepPoint {
                        preset: preset.name(),
                        param: format!("order={order}"),
                        seed,
                        shape_a,
                        shape_b: vec![3, 512],
                        gen_a: GenSpec::ExactNnz(ORDER_SWEEP_NNZ.0),
                        gen_b: GenSpec::ExactNnz(ORDER_SWEEP_NNZ.1),
                        config: EngineConfig::default(),
                    });
                }
            }
        }
        SweepPreset::DensitySweepA | SweepPreset::DensitySweepB | SweepPreset::DensitySweepC => {
            let (shape_a, shape_b): (Vec<usize>, Vec<usize>) = match preset {
                SweepPreset::DensitySweepA => (vec![3, 3, 1024], vec![3, 1024]),
                SweepPreset::DensitySweepB => (vec![7, 7, 512], vec![7, 512]),
                _ => (vec![10, 10, 100], vec![10, 100]),
            };
            for &density in &DENSITIES {
                for &seed in seeds {
                    points.push(SweepPoint {
                        preset: preset.name(),
                        param: format!("density={density}"),
                        seed,
                        shape_a: shape_a.clone(),
                        shape_b: shape_b.clone(),
                        gen_a: GenSpec::Density(density),
                        gen_b: GenSpec::Density(0.50),
                        config: EngineConfig::default(),
                    });
                }
            }
        }
    }
    points
}

/// Generates a point's operand along its last mode.
fn generate(shape_lengths: &[usize], spec: GenSpec, seed: u64) -> Result<CsfTensor> {
    let shape = Shape::new(shape_lengths.to_vec())?;
    let dense = match spec {
        GenSpec::Density(d) => random_tensor(&shape, &DensityConfig::new(d, seed)?)?,
        GenSpec::ExactNnz(n) => random_tensor_with_nnz(&shape, n, seed)?,
    };
    dense_to_csf(&dense, shape_lengths.len() - 1)
}

/// Runs one grid point.
pub fn run_point(point: &SweepPoint) -> Result<SweepRow> {
    let a = generate(&point.shape_a, point.gen_a, point.seed)?;
    let b = generate(&point.shape_b, point.gen_b, point.seed ^ B_SEED_SALT)?;
    let (_, stats) = simulate(&a, &b, &point.config)?;
    Ok(SweepRow {
        point: point.clone(),
        nnz_a: a.nnz(),
        nnz_b: b.nnz(),
        stats,
    })
}

/// Runs a whole preset grid in order.
pub fn run(preset: SweepPreset, seeds: &[u64]) -> Result<Vec<SweepRow>> {
    grid(preset, seeds).iter().map(run_point).collect()
}
