//! Property-based invariants over randomized tensors, contractions and
//! engine configurations.

use proptest::prelude::*;

use flaash_core::csf::{csf_to_dense, dense_to_csf, CsfTensor, Entry};
use flaash_core::engine::{simulate, EngineConfig};
use flaash_core::jobgen;
use flaash_core::memory::MemoryConfig;
use flaash_core::oracle::{
    self, contract_csf_reference, contract_dense, sparse_dot, sparse_dot_with_collisions,
    ContractionSpec,
};
use flaash_core::random::{random_tensor, DensityConfig};
use flaash_core::shape::{DenseTensor, Shape};

fn bits(t: &DenseTensor) -> Vec<u64> {
    t.values().iter().map(|v| v.to_bits()).collect()
}

/// A small dense tensor (zeros included) plus a valid contraction mode.
fn arb_dense_with_mode() -> impl Strategy<Value = (DenseTensor, usize)> {
    prop::collection::vec(1usize..=6, 1..=4)
        .prop_filter("volume capped", |lengths| {
            lengths.iter().product::<usize>() <= 360
        })
        .prop_flat_map(|lengths| {
            let volume: usize = lengths.iter().product();
            let order = lengths.len();
            (
                Just(lengths),
                prop::collection::vec(prop_oneof![2 => Just(0.0f64), 3 => -1.0f64..1.0], volume),
                0..order,
            )
        })
        .prop_map(|(lengths, mut values, mode)| {
            for v in values.iter_mut() {
                // Canonicalize -0.0: stored values must be nonzero, and the
                // round-trip contract treats both zeros as "not stored".
                if *v == 0.0 {
                    *v = 0.0;
                }
            }
            let shape = Shape::new(lengths).unwrap();
            (DenseTensor::from_values(shape, values).unwrap(), mode)
        })
}

/// A contraction-compatible operand pair in CSF form, built from seeded
/// random tensors so shapes and sparsity vary widely.
#[derive(Debug, Clone)]
struct OperandPair {
    a: CsfTensor,
    b: CsfTensor,
    dense_a: DenseTensor,
    dense_b: DenseTensor,
}

fn arb_operand_pair() -> impl Strategy<Value = OperandPair> {
    let free = || prop::collection::vec(1usize..=4, 0..=2);
    (
        1usize..=8,
        free(),
        free(),
        0.05f64..=1.0,
        0.05f64..=1.0,
        any::<u64>(),
    )
        .prop_flat_map(|(k, free_a, free_b, da, db, seed)| {
            let pos_a = 0..=free_a.len();
            let pos_b = 0..=free_b.len();
            (Just((k, free_a, free_b, da, db, seed)), pos_a, pos_b)
        })
        .prop_map(|((k, free_a, free_b, da, db, seed), pos_a, pos_b)| {
            let mut la = free_a;
            la.insert(pos_a, k);
            let mut lb = free_b;
            lb.insert(pos_b, k);
            let sa = Shape::new(la).unwrap();
            let sb = Shape::new(lb).unwrap();
            let dense_a = random_tensor(&sa, &DensityConfig::new(da, seed).unwrap()).unwrap();
            let dense_b =
                random_tensor(&sb, &DensityConfig::new(db, seed ^ 0xDEAD_BEEF).unwrap()).unwrap();
            OperandPair {
                a: dense_to_csf(&dense_a, pos_a).unwrap(),
                b: dense_to_csf(&dense_b, pos_b).unwrap(),
                dense_a,
                dense_b,
            }
        })
}

fn arb_engine_config() -> impl Strategy<Value = EngineConfig> {
    (
        1usize..=9,
        1usize..=9,
        1usize..=4,
        1usize..=8,
        1u64..=4,
        1usize..=2,
    )
        .prop_map(|(sdpes, fifo, rq, bw, lat, ports)| EngineConfig {
            sdpe_count: sdpes,
            fifo_depth: fifo,
            result_queue_depth: rq,
            memory: MemoryConfig {
                read_bandwidth: bw,
                read_latency: lat,
                write_ports: ports,
            },
            clock_ghz: 1.0,
        })
}

/// Sorted sparse fiber as plain entries.
fn arb_fiber() -> impl Strategy<Value = Vec<Entry>> {
    prop::collection::btree_set(0usize..64, 0..12).prop_flat_map(|indices| {
        let n = indices.len();
        prop::collection::vec((-1.0f64..1.0).prop_filter("nonzero", |v| *v != 0.0), n).prop_map(
            move |values| {
                indices
                    .iter()
                    .zip(&values)
                    .map(|(&index, &value)| Entry { index, value })
                    .collect()
            },
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    /// Round-trip and structural CSF invariants.
    #[test]
    fn csf_roundtrip_and_structure((dense, mode) in arb_dense_with_mode()) {
        let csf = dense_to_csf(&dense, mode).unwrap();
        // Bit-exact round trip.
        prop_assert_eq!(bits(&csf_to_dense(&csf)), bits(&dense));
        // No stored zeros; strict monotonicity inside fibers; offsets
        // partition the entry array.
        prop_assert!(csf.entries().iter().all(|e| e.value != 0.0));
        let offsets = csf.fiber_offsets();
        prop_assert_eq!(offsets[0], 0);
        prop_assert_eq!(*offsets.last().unwrap(), csf.nnz());
        prop_assert!(offsets.windows(2).all(|w| w[0] <= w[1]));
        let mut covered = 0;
        for f in 0..csf.fiber_count() {
            let slice = csf.fiber_slice(f).unwrap();
            covered += slice.len();
            prop_assert!(slice.windows(2).all(|w| w[0].index < w[1].index));
        }
        prop_assert_eq!(covered, csf.nnz());
        // Storage is exactly NNZ records.
        prop_assert_eq!(csf.entries().len(), dense.values().iter().filter(|&&v| v != 0.0).count());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    /// sparse_dot is bit-exactly symmetric and counts collisions exactly.
    #[test]
    fn sparse_dot_symmetry_and_collisions(fa in arb_fiber(), fb in arb_fiber()) {
        let (ab, cab) = sparse_dot_with_collisions(&fa, &fb);
        let (ba, cba) = sparse_dot_with_collisions(&fb, &fa);
        prop_assert_eq!(ab.to_bits(), ba.to_bits());
        prop_assert_eq!(cab, cba);
        // Collision count == |support intersection|, by brute force.
        let support: std::collections::BTreeSet<usize> = fa.iter().map(|e| e.index).collect();
        let expected = fb.iter().filter(|e| support.contains(&e.index)).count() as u64;
        prop_assert_eq!(cab, expected);
        // Disjoint or empty inputs produce exactly 0.0.
        if expected == 0 {
            prop_assert_eq!(ab.to_bits(), 0.0f64.to_bits());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Job enumeration is a bijection onto the fiber Cartesian product with
    /// row-major destinations.
    #[test]
    fn job_bijection(pair in arb_operand_pair()) {
        let plan = jobgen::plan(&pair.a, &pair.b).unwrap();
        prop_assert_eq!(plan.job_count, pair.a.fiber_count() * pair.b.fiber_count());
        prop_assert_eq!(plan.job_count, plan.result_shape.volume());
        let mut seen_pairs = std::collections::BTreeSet::new();
        let mut seen_dests = std::collections::BTreeSet::new();
        let mut count = 0usize;
        for (n, job) in jobgen::all_jobs(&plan, &pair.a, &pair.b).enumerate() {
            prop_assert_eq!(job.job_number, n);
            prop_assert_eq!(job.dest_index, n);
            prop_assert!(job.a_start <= job.a_end && job.a_end <= pair.a.nnz());
            prop_assert!(job.b_start <= job.b_end && job.b_end <= pair.b.nnz());
            let a_fiber = n / plan.b_fiber_count;
            let b_fiber = n % plan.b_fiber_count;
            prop_assert_eq!((job.a_start, job.a_end), pair.a.fiber_range(a_fiber).unwrap());
            prop_assert_eq!((job.b_start, job.b_end), pair.b.fiber_range(b_fiber).unwrap());
            seen_pairs.insert((a_fiber, b_fiber));
            seen_dests.insert(job.dest_index);
            count += 1;
        }
        prop_assert_eq!(count, plan.job_count);
        prop_assert_eq!(seen_pairs.len(), plan.job_count);
        prop_assert_eq!(seen_dests.len(), plan.job_count);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    /// The simulator is functionally exact under arbitrary timing knobs, and
    /// its statistics respect the accounting invariants.
    #[test]
    fn simulator_matches_oracles(pair in arb_operand_pair(), cfg in arb_engine_config()) {
        let (result, stats) = simulate(&pair.a, &pair.b, &cfg).unwrap();
        let reference = contract_csf_reference(&pair.a, &pair.b).unwrap();
        prop_assert_eq!(bits(&result), bits(&reference));

        let spec = ContractionSpec {
            mode_a: pair.a.contraction_mode(),
            mode_b: pair.b.contraction_mode(),
        };
        let dense = contract_dense(&pair.dense_a, &pair.dense_b, spec).unwrap();
        prop_assert!(oracle::first_mismatch(&dense, &result, 1e-12).is_none());

        // MAC and zero-skip accounting.
        prop_assert_eq!(stats.mac_count, oracle::total_collisions(&pair.a, &pair.b).unwrap());
        let result_nnz = result.values().iter().filter(|&&v| v != 0.0).count() as u64;
        prop_assert_eq!(stats.results_written, result_nnz);
        prop_assert_eq!(stats.jobs_completed, stats.job_count);
        prop_assert!(stats.results_written <= stats.jobs_completed);

        // Dispatch and bandwidth lower bounds.
        prop_assert!(stats.total_cycles >= stats.job_count);
        prop_assert!(
            stats.total_cycles * cfg.memory.read_bandwidth as u64 >= stats.entries_fetched
        );
        for i in 0..cfg.sdpe_count {
            prop_assert_eq!(stats.busy_cycles[i] + stats.idle_cycles[i], stats.total_cycles);
        }
        // Fetches never exceed the requested ranges.
        let per_job: u64 = jobgen::all_jobs(&jobgen::plan(&pair.a, &pair.b).unwrap(), &pair.a, &pair.b)
            .map(|j| ((j.a_end - j.a_start) + (j.b_end - j.b_start)) as u64)
            .sum();
        prop_assert!(stats.entries_fetched <= per_job);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// Timing knobs never change the arithmetic: same MACs, same
    /// comparisons, same result bits.
    #[test]
    fn work_conservation(pair in arb_operand_pair(), cfg1 in arb_engine_config(), cfg2 in arb_engine_config()) {
        let (r1, s1) = simulate(&pair.a, &pair.b, &cfg1).unwrap();
        let (r2, s2) = simulate(&pair.a, &pair.b, &cfg2).unwrap();
        prop_assert_eq!(s1.mac_count, s2.mac_count);
        prop_assert_eq!(s1.comparisons, s2.comparisons);
        prop_assert_eq!(s1.results_written, s2.results_written);
        prop_assert_eq!(bits(&r1), bits(&r2));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// sparsify_result is dense_to_csf and round-trips bit-exactly.
    #[test]
    fn sparsify_roundtrip((dense, mode) in arb_dense_with_mode()) {
        let sparsified = flaash_core::csf::sparsify_result(&dense, mode).unwrap();
        prop_assert_eq!(&sparsified, &dense_to_csf(&dense, mode).unwrap());
        prop_assert_eq!(bits(&csf_to_dense(&sparsified)), bits(&dense));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    /// Bilinearity: contract(alpha * A, B) == alpha * contract(A, B).
    #[test]
    fn contraction_is_bilinear(pair in arb_operand_pair(), alpha in -4.0f64..4.0) {
        let spec = ContractionSpec {
            mode_a: pair.a.contraction_mode(),
            mode_b: pair.b.contraction_mode(),
        };
        let base = contract_dense(&pair.dense_a, &pair.dense_b, spec).unwrap();
        let scaled_a = DenseTensor::from_values(
            pair.dense_a.shape().clone(),
            pair.dense_a.values().iter().map(|v| alpha * v).collect(),
        ).unwrap();
        let scaled = contract_dense(&scaled_a, &pair.dense_b, spec).unwrap();
        for (s, b) in scaled.values().iter().zip(base.values()) {
            let want = alpha * b;
            let tol = 1e-12 * want.abs().max(s.abs());
            prop_assert!((s - want).abs() <= tol, "{s} vs {want}");
        }
    }

    /// Generation is a pure function of (shape, density, seed).
    #[test]
    fn generation_determinism(seed in any::<u64>(), density in 0.01f64..=1.0) {
        let shape = Shape::new(vec![6, 7]).unwrap();
        let cfg = DensityConfig::new(density, seed).unwrap();
        let a = random_tensor(&shape, &cfg).unwrap();
        let b = random_tensor(&shape, &cfg).unwrap();
        prop_assert_eq!(bits(&a), bits(&b));
        prop_assert!(a.values().iter().all(|&v| v == 0.0 || ((-1.0..1.0).contains(&v) && v != 0.0)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(80))]

    /// csft-v1 documents round-trip bit-exactly through JSON.
    #[test]
    fn csft_json_roundtrip((dense, mode) in arb_dense_with_mode()) {
        let t = dense_to_csf(&dense, mode).unwrap();
        let json = flaash_core::io::to_json(&t).unwrap();
        let back = flaash_core::io::from_json(&json, None).unwrap();
        prop_assert_eq!(&back, &t);
    }
}

/// Bit-identical stats and result across repeated runs.
#[test]
fn simulation_determinism_three_runs() {
    let sa = Shape::new(vec![4, 4, 32]).unwrap();
    let sb = Shape::new(vec![4, 32]).unwrap();
    let a = random_tensor(&sa, &DensityConfig::new(0.2, 77).unwrap()).unwrap();
    let b = random_tensor(&sb, &DensityConfig::new(0.5, 78).unwrap()).unwrap();
    let ca = dense_to_csf(&a, 2).unwrap();
    let cb = dense_to_csf(&b, 1).unwrap();
    let cfg = EngineConfig::default();
    let runs: Vec<_> = (0..3).map(|_| simulate(&ca, &cb, &cfg).unwrap()).collect();
    for (result, stats) in &runs[1..] {
        assert_eq!(stats, &runs[0].1);
        assert_eq!(bits(result), bits(&runs[0].0));
    }
}

/// One-hot sifting: contracting with one-hot fibers selects A's elements.
#[test]
fn one_hot_contraction_selects_elements() {
    let sa = Shape::new(vec![3, 5]).unwrap();
    let dense_a = random_tensor(&sa, &DensityConfig::new(1.0, 5).unwrap()).unwrap();
    // B's two fibers are one-hot at index 2 and 4.
    let sb = Shape::new(vec![2, 5]).unwrap();
    let mut dense_b = DenseTensor::zeros(sb);
    dense_b.set(&[0, 2], 1.0);
    dense_b.set(&[1, 4], 1.0);
    let spec = ContractionSpec {
        mode_a: 1,
        mode_b: 1,
    };
    let c = contract_dense(&dense_a, &dense_b, spec).unwrap();
    for i in 0..3 {
        assert_eq!(c.get(&[i, 0]), dense_a.get(&[i, 2]));
        assert_eq!(c.get(&[i, 1]), dense_a.get(&[i, 4]));
    }
    // Identical fibers: self dot equals the sum of squares.
    let fa = dense_to_csf(&dense_a, 1).unwrap();
    let fiber = fa.fiber_slice(0).unwrap();
    let expected: f64 = fiber.iter().map(|e| e.value * e.value).sum();
    assert_eq!(sparse_dot(fiber, fiber), expected);
}
