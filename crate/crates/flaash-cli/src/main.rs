//! `flaash`: generate sparse tensors, contract them on the simulated
//! accelerator, verify against the reference oracles, and run sweep presets.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 usage or input error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use flaash_core::csf::{csf_to_dense, dense_to_csf, sparsify_result, CsfTensor};
use flaash_core::engine::{simulate, EngineConfig, SimStats};
use flaash_core::io;
use flaash_core::memory::MemoryConfig;
use flaash_core::oracle::{self, ContractionSpec};
use flaash_core::random::{random_tensor, DensityConfig};
use flaash_core::shape::Shape;
use flaash_core::sweep::{self, SweepPreset};

#[derive(Parser)]
#[command(
    name = "flaash",
    version,
    about = "Sparse tensor contraction on a simulated dot-product-engine accelerator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random sparse tensor and write it as csft-v1 JSON.
    Gen {
        /// Mode lengths, comma-separated, e.g. 7,7,512.
        #[arg(long, value_delimiter = ',', required = true)]
        shape: Vec<usize>,
        /// Probability that an element is nonzero, in (0, 1].
        #[arg(long)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Contract two csft-v1 tensors on the simulated accelerator.
    Contract {
        a: PathBuf,
        b: PathBuf,
        /// Contraction mode of A (default: its last mode).
        #[arg(long)]
        mode_a: Option<usize>,
        /// Contraction mode of B (default: its last mode).
        #[arg(long)]
        mode_b: Option<usize>,
        #[command(flatten)]
        engine: EngineArgs,
        /// Result file (csft-v1, sparsified along its last mode).
        #[arg(short, long)]
        out: PathBuf,
        /// Also write a one-row stats CSV.
        #[arg(long)]
        stats: Option<PathBuf>,
    },
    /// Simulate and check the result against both reference oracles.
    Verify {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        mode_a: Option<usize>,
        #[arg(long)]
        mode_b: Option<usize>,
        #[command(flatten)]
        engine: EngineArgs,
    },
    /// Run a preset experiment grid and write one CSV row per point/seed.
    Sweep {
        /// One of: sdpe-sweep, volume-sweep, order-sweep, density-sweep-a,
        /// density-sweep-b, density-sweep-c.
        #[arg(long)]
        preset: String,
        /// Seeds, comma-separated.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct EngineArgs {
    #[arg(long, default_value_t = 8)]
    sdpes: usize,
    #[arg(long, default_value_t = 8)]
    fifo_depth: usize,
    #[arg(long, default_value_t = 4)]
    result_queue_depth: usize,
    #[arg(long, default_value_t = 4)]
    read_bandwidth: usize,
    #[arg(long, default_value_t = 1)]
    read_latency: u64,
    #[arg(long, default_value_t = 1)]
    write_ports: usize,
    #[arg(long, default_value_t = 1.0)]
    clock_ghz: f64,
}

impl EngineArgs {
    fn to_config(&self) -> EngineConfig {
        EngineConfig {
            sdpe_count: self.sdpes,
            fifo_depth: self.fifo_depth,
            result_queue_depth: self.result_queue_depth,
            memory: MemoryConfig {
                read_bandwidth: self.read_bandwidth,
                read_latency: self.read_latency,
                write_ports: self.write_ports,
            },
            clock_ghz: self.clock_ghz,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Gen {
            shape,
            density,
            seed,
            out,
        } => {
            let shape = Shape::new(shape)?;
            let dense = random_tensor(&shape, &DensityConfig::new(density, seed)?)?;
            let csf = dense_to_csf(&dense, shape.order() - 1)?;
            io::save_csft(&csf, &out).with_context(|| format!("writing {}", out.display()))?;
            println!(
                "wrote {} (shape {:?}, nnz {})",
                out.display(),
                shape.mode_lengths(),
                csf.nnz()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Contract {
            a,
            b,
            mode_a,
            mode_b,
            engine,
            out,
            stats,
        } => {
            let ta = load_operand(&a, mode_a)?;
            let tb = load_operand(&b, mode_b)?;
            let cfg = engine.to_config();
            let (result, sim_stats) = simulate(&ta, &tb, &cfg)?;
            let result_mode = result.shape().order() - 1;
            let sparse = sparsify_result(&result, result_mode)?;
            io::save_csft(&sparse, &out).with_context(|| format!("writing {}", out.display()))?;
            if let Some(stats_path) = stats {
                let csv = contract_stats_csv(&a, &b, &ta, &tb, &cfg, &sim_stats);
                fs::write(&stats_path, csv)
                    .with_context(|| format!("writing {}", stats_path.display()))?;
            }
            println!(
                "contracted {} . {} -> {} ({} jobs, {} cycles, {:.3} us simulated, result nnz {})",
                a.display(),
                b.display(),
                out.display(),
                sim_stats.job_count,
                sim_stats.total_cycles,
                sim_stats.time_us,
                sparse.nnz()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            a,
            b,
            mode_a,
            mode_b,
            engine,
        } => {
            let ta = load_operand(&a, mode_a)?;
            let tb = load_operand(&b, mode_b)?;
            let cfg = engine.to_config();
            let (result, _) = simulate(&ta, &tb, &cfg)?;

            let reference = oracle::contract_csf_reference(&ta, &tb)?;
            let ref_bits_equal = result
                .values()
                .iter()
                .zip(reference.values())
                .all(|(x, y)| x.to_bits() == y.to_bits());
            if !ref_bits_equal {
                let (coords, want, got) =
                    oracle::first_mismatch(&reference, &result, 0.0).expect("differs");
                println!("FAIL: simulator != csf reference at {coords:?}: {want} vs {got}");
                return Ok(ExitCode::from(1));
            }
            println!("ok: simulator output bit-exact with csf reference");

            let spec = ContractionSpec {
                mode_a: ta.contraction_mode(),
                mode_b: tb.contraction_mode(),
            };
            let dense = oracle::contract_dense(&csf_to_dense(&ta), &csf_to_dense(&tb), spec)?;
            if let Some((coords, want, got)) = oracle::first_mismatch(&dense, &result, 1e-12) {
                println!("FAIL: simulator vs dense oracle at {coords:?}: {want} vs {got}");
                return Ok(ExitCode::from(1));
            }
            println!("ok: simulator output within 1e-12 relative of dense oracle");
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { preset, seeds, out } => {
            let preset = SweepPreset::parse(&preset)?;
            if seeds.is_empty() {
                bail!("at least one seed is required");
            }
            let rows = sweep::run(preset, &seeds)?;
            fs::write(&out, sweep_csv(&rows))
                .with_context(|| format!("writing {}", out.display()))?;
            println!("wrote {} ({} rows)", out.display(), rows.len());
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Loads an operand, contracting along `mode` when given, else its last mode.
fn load_operand(path: &Path, mode: Option<usize>) -> Result<CsfTensor> {
    let json = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let order = io::peek_shape(&json)?.len();
    let mode = mode.unwrap_or(order.saturating_sub(1));
    io::from_json(&json, Some(mode)).with_context(|| format!("loading {}", path.display()))
}

fn join<T: std::fmt::Display>(items: &[T], sep: &str) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}

const STATS_COLUMNS: &str = "job_count,total_cycles,time_us,jobs_dispatched,jobs_completed,\
mac_count,comparisons,entries_fetched,results_written,memory_stall_cycles,busy_cycles,idle_cycles";

fn stats_fields(stats: &SimStats) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        stats.job_count,
        stats.total_cycles,
        stats.time_us,
        stats.jobs_dispatched,
        stats.jobs_completed,
        stats.mac_count,
        stats.comparisons,
        stats.entries_fetched,
        stats.results_written,
        stats.memory_stall_cycles,
        join(&stats.busy_cycles, ";"),
        join(&stats.idle_cycles, ";"),
    )
}

fn config_fields(cfg: &EngineConfig) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        cfg.sdpe_count,
        cfg.fifo_depth,
        cfg.result_queue_depth,
        cfg.memory.read_bandwidth,
        cfg.memory.read_latency,
        cfg.memory.write_ports,
        cfg.clock_ghz,
    )
}

const CONFIG_COLUMNS: &str =
    "sdpe_count,fifo_depth,result_queue_depth,read_bandwidth,read_latency,write_ports,clock_ghz";

fn contract_stats_csv(
    a: &Path,
    b: &Path,
    ta: &CsfTensor,
    tb: &CsfTensor,
    cfg: &EngineConfig,
    stats: &SimStats,
) -> String {
    let mut csv = String::new();
    let _ = writeln!(
        csv,
        "a_file,b_file,mode_a,mode_b,nnz_a,nnz_b,{CONFIG_COLUMNS},{STATS_COLUMNS}"
    );
    let _ = writeln!(
        csv,
        "{},{},{},{},{},{},{},{}",
        a.display(),
        b.display(),
        ta.contraction_mode(),
        tb.contraction_mode(),
        ta.nnz(),
        tb.nnz(),
        config_fields(cfg),
        stats_fields(stats),
    );
    csv
}

fn sweep_csv(rows: &[sweep::SweepRow]) -> String {
    let mut csv = String::new();
    let _ = writeln!(
        csv,
        "preset,param,seed,shape_a,shape_b,gen_a,gen_b,nnz_a,nnz_b,{CONFIG_COLUMNS},{STATS_COLUMNS}"
    );
    for row in rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{}",
            row.point.preset,
            row.point.param,
            row.point.seed,
            join(&row.point.shape_a, "x"),
            join(&row.point.shape_b, "x"),
            row.point.gen_a.describe(),
            row.point.gen_b.describe(),
            row.nnz_a,
            row.nnz_b,
            config_fields(&row.point.config),
            stats_fields(&row.stats),
        );
    }
    csv
}
