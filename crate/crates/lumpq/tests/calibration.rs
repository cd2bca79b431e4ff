//! Calibration pre-runs behind `#[ignore]`: these print the measured
//! statistics that the frozen thresholds in the test suites came from.
//! Run with `cargo test -p lumpq --test calibration -- --ignored --nocapture`.

use lumpq::generate::{generate_instance, GeneratorClass, InstanceSpec};
use lumpq::markov::{commutation_residual, lump, spectrum, stationary_distribution};
use lumpq::methods::{detect_general, detect_metastable, run_method, MethodKind};
use lumpq::metrics::partitions_match;

#[test]
#[ignore]
fn exact_recovery_rates_at_zero_epsilon() {
    for &n in &[60usize, 200] {
        for class in [
            GeneratorClass::BlockDiag,
            GeneratorClass::SparseMasked,
            GeneratorClass::BlockStoch,
        ] {
            let delta = match class {
                GeneratorClass::SparseMasked => Some(0.2),
                _ => None,
            };
            let mut meta_hits = 0usize;
            let mut gen_hits = 0usize;
            let mut gen_delta_max = 0.0f64;
            let mut errors = 0usize;
            for seed in 0..50u64 {
                let inst = generate_instance(&InstanceSpec {
                    class,
                    n,
                    m: None,
                    epsilon: 0.0,
                    delta,
                    seed,
                })
                .unwrap();
                let k = inst.truth.k();
                if class != GeneratorClass::BlockStoch {
                    match detect_metastable(&inst.matrix, k, seed) {
                        Ok(r) if partitions_match(&r.partition, &inst.truth) && r.delta < 1e-10 => {
                            meta_hits += 1
                        }
                        Ok(_) => {}
                        Err(_) => errors += 1,
                    }
                }
                match detect_general(&inst.matrix, k, k, 10, seed) {
                    Ok(r) if partitions_match(&r.partition, &inst.truth) && r.delta < 1e-10 => {
                        gen_hits += 1
                    }
                    Ok(r) => gen_delta_max = gen_delta_max.max(r.delta),
                    Err(_) => errors += 1,
                }
            }
            println!(
                "n={n} class={}: metastable {}/50, general {}/50 (worst miss delta {:.3}, {} errors)",
                class.token(),
                meta_hits,
                gen_hits,
                gen_delta_max,
                errors
            );
        }
    }
}

#[test]
#[ignore]
fn block_stochastic_spectrum_separation() {
    let mut per_instance_sep = 0usize;
    let mut above_tenth = Vec::new();
    let mut min_reduced = f64::INFINITY;
    let mut max_bulk = 0.0f64;
    for seed in 0..100u64 {
        let inst = generate_instance(&InstanceSpec {
            class: GeneratorClass::BlockStoch,
            n: 200,
            m: Some(3),
            epsilon: 0.0,
            delta: None,
            seed,
        })
        .unwrap();
        let v = stationary_distribution(&inst.matrix).unwrap();
        let lumped = lump(&inst.matrix, &inst.truth, &v).unwrap();
        let small = spectrum(&lumped.to_transition_matrix().unwrap()).unwrap();
        let big = spectrum(&inst.matrix).unwrap();
        // match each reduced eigenvalue to its closest counterpart
        let mut used = vec![false; big.eigenvalues().len()];
        for e in small.eigenvalues() {
            let (idx, _) = big
                .eigenvalues()
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .map(|(i, b)| (i, (e - b).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            used[idx] = true;
        }
        let bulk_max = big
            .eigenvalues()
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(_, e)| e.norm())
            .fold(0.0f64, f64::max);
        let reduced_min = small
            .eigenvalues()
            .iter()
            .skip(1)
            .map(|e| e.norm())
            .fold(f64::INFINITY, f64::min);
        min_reduced = min_reduced.min(reduced_min);
        max_bulk = max_bulk.max(bulk_max);
        if reduced_min > bulk_max {
            per_instance_sep += 1;
        }
        let count_above = big.eigenvalues().iter().filter(|e| e.norm() > 0.1).count();
        above_tenth.push(count_above);
    }
    let exactly_three = above_tenth.iter().filter(|&&c| c == 3).count();
    println!(
        "per-instance separation {per_instance_sep}/100, exactly-3-above-0.1 {exactly_three}/100"
    );
    println!("min reduced modulus {min_reduced:.4}, max bulk modulus {max_bulk:.4}");
    let mut sorted = above_tenth.clone();
    sorted.sort();
    println!("counts above 0.1: min {:?} max {:?}", sorted.first(), sorted.last());
}

#[test]
#[ignore]
fn worked_example_p_eigs_tie() {
    use lumpq::markov::{Partition, TransitionMatrix};
    use ndarray::array;
    let p = TransitionMatrix::new(array![
        [0.75, 0.0, 0.25],
        [0.25, 0.5, 0.25],
        [0.0, 0.5, 0.5]
    ])
    .unwrap();
    let target = Partition::from_labels(vec![0, 0, 1]).unwrap();
    for seed in 0..20u64 {
        let r = lumpq::methods::baseline_p_eigenvectors(&p, 2, seed).unwrap();
        println!(
            "seed {seed}: partition {:?} delta {:.4} match {}",
            r.partition.labels(),
            r.delta,
            partitions_match(&r.partition, &target)
        );
    }
}

#[test]
#[ignore]
fn desk_scale_orderings() {
    use lumpq::sweep::{cell_stats, run_sweep, KPolicy, SweepConfig};
    let cfg = SweepConfig {
        class: GeneratorClass::BlockDiag,
        n: 200,
        m: None,
        epsilon_grid: vec![0.1, 0.3, 0.5, 0.7, 0.9],
        delta: None,
        trials: 8,
        methods: vec![
            MethodKind::QMetastable,
            MethodKind::PEigs,
            MethodKind::Svd,
            MethodKind::Froyland,
            MethodKind::IterCluster,
        ],
        master_seed: 0,
        k_policy: KPolicy::TruthM,
        record_timing: false,
    };
    let records = run_sweep(&cfg).unwrap();
    for &eps in &cfg.epsilon_grid {
        let cells: Vec<String> = cfg
            .methods
            .iter()
            .map(|&m| {
                let (mean, se, _) = cell_stats(&records, eps, m, true).unwrap();
                format!("{}={mean:.3}±{se:.3}", m.token())
            })
            .collect();
        println!("tau eps={eps}: {}", cells.join("  "));
    }

    let cfg = SweepConfig {
        class: GeneratorClass::BlockStoch,
        n: 200,
        m: None,
        epsilon_grid: vec![0.1, 0.2, 0.3, 0.4, 0.5],
        delta: None,
        trials: 8,
        methods: vec![
            MethodKind::QGeneral,
            MethodKind::PEigs,
            MethodKind::Svd,
            MethodKind::IterCluster,
        ],
        master_seed: 0,
        k_policy: KPolicy::TruthM,
        record_timing: false,
    };
    let records = run_sweep(&cfg).unwrap();
    for &eps in &cfg.epsilon_grid {
        let cells: Vec<String> = cfg
            .methods
            .iter()
            .map(|&m| {
                let (mean, se, _) = cell_stats(&records, eps, m, false).unwrap();
                format!("{}={mean:.3}±{se:.3}", m.token())
            })
            .collect();
        println!("delta eps={eps}: {}", cells.join("  "));
    }
}

#[test]
#[ignore]
fn method_wall_times() {
    use std::time::Instant;
    let inst = generate_instance(&InstanceSpec {
        class: GeneratorClass::BlockStoch,
        n: 200,
        m: Some(3),
        epsilon: 0.3,
        delta: None,
        seed: 0,
    })
    .unwrap();
    for method in [
        MethodKind::QMetastable,
        MethodKind::QGeneral,
        MethodKind::PEigs,
        MethodKind::Svd,
        MethodKind::Froyland,
        MethodKind::IterCluster,
    ] {
        let t = Instant::now();
        let r = run_method(&inst.matrix, method, 3, 0).unwrap();
        println!(
            "{}: {:?} delta {:.4}",
            method.token(),
            t.elapsed(),
            r.delta
        );
    }
    let t = Instant::now();
    let _ = commutation_residual(&inst.matrix, &inst.truth).unwrap();
    println!("residual alone: {:?}", t.elapsed());
}
