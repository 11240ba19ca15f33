//! Release gate: one test per acceptance criterion, each printing a
//! PASS/FAIL verdict line with the measured quantities. Runtime-limited
//! criteria also assert their wall-clock budget.
//!
//! Criterion 5 is expected to fail: on the depth-14 branch cloud the
//! greedy radius sits strictly above the explicit net bound at every
//! scale (the bound describes the net's own radius, which greedy with
//! the same ball count does not reach), and the fitted slope lands near
//! -0.45 rather than -0.25. The check states the intended inequality
//! verbatim and reports the discrepancy instead of loosening it.

use std::time::Instant;

use rayon::prelude::*;

use entropy_lab_cli::experiment::{run, ExperimentKind, Outcome, RunConfig};
use entropy_lab_cli::rng::{random_interval_measure, random_quadruple, random_tree_measure, Stream};
use entropy_lab_core::essential::{
    count_admissible, essential_residual_sq, essential_subtree, verify_size_bounds,
};
use entropy_lab_core::nets::{packing_family, packing_separation};
use entropy_lab_core::operators::apply_vstar;
use entropy_lab_core::volterra::kernel::{kernel_inner, kernel_norm_sq, modulus_check, negative_dependence};
use entropy_lab_core::volterra::partition::{
    auxiliary_partition, essential_partition, verify_essential_sizes,
};
use entropy_lab_core::volterra::quad::QuadratureConfig;
use entropy_lab_core::volterra::rank::{approximation_error, finite_rank_apply, GramCache};
use entropy_lab_core::volterra::KernelConfig;

fn conclude(criterion: u32, ok: bool, detail: String) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("criterion {criterion:2}: {verdict} ({detail})");
    assert!(ok, "criterion {criterion} failed: {detail}");
}

/// Shared trial set for criteria 1 and 2.
fn tree_trial(n: u64, trial: u64) -> entropy_lab_core::TreeMeasure {
    let mut stream = Stream::new(101, n * 10_000 + trial);
    random_tree_measure(&mut stream, (2 * n).min(62) as u32, 50)
}

#[test]
fn criterion_01_subtree_sizes_hold_across_scales() {
    let start = Instant::now();
    let mut checked = 0u64;
    for &n in &[8u64, 16, 32, 64] {
        for trial in 0..1000 {
            let mu = tree_trial(n, trial);
            let res = essential_subtree(&mu, n as u32).unwrap();
            let (terminal_sum, size) = verify_size_bounds(&res).unwrap();
            assert!(terminal_sum <= n && size <= n + 1);
            checked += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    conclude(
        1,
        checked == 4000 && secs < 10.0,
        format!("{checked} subtrees within both size bounds in {secs:.2} s"),
    );
}

#[test]
fn criterion_02_residual_within_reciprocal_bound() {
    let mut worst = 0.0f64;
    for &n in &[8u64, 16, 32, 64] {
        let bound = 1.0 / n as f64 + 1e-12;
        for trial in 0..1000 {
            let mu = tree_trial(n, trial);
            let r2 = essential_residual_sq(&mu, n as u32).unwrap();
            assert!(r2 <= bound, "n={n} trial={trial}: {r2} > {bound}");
            worst = worst.max(r2 * n as f64);
        }
    }
    conclude(
        2,
        worst <= 1.0 + 1e-9,
        format!("worst residual^2 * n = {worst:.6} over 4000 trials"),
    );
}

#[test]
fn criterion_03_admissible_counts_within_exponential_budget() {
    let start = Instant::now();
    let mut counts = Vec::new();
    for n in 0..=10u32 {
        let count = count_admissible(n).unwrap();
        assert!(
            (count as f64) <= (4.0 * std::f64::consts::E).powi(n as i32),
            "count({n}) = {count} exceeds the exponential budget"
        );
        counts.push(count);
    }
    let secs = start.elapsed().as_secs_f64();
    conclude(
        3,
        counts[0..3] == [1, 3, 8] && secs < 60.0,
        format!("counts {counts:?} in {secs:.2} s"),
    );
}

#[test]
fn criterion_04_net_distance_within_certified_radius() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        kind: ExperimentKind::Nets,
        beta: 2.0,
        n_values: vec![3],
        trials: 200,
        seed: 104,
        tol: 1e-8,
        out_dir: dir.path().to_path_buf(),
    };
    let report = run(&cfg).unwrap();
    let worst = report.aggregate.max_ratio.unwrap_or(0.0);
    conclude(
        4,
        report.outcome() == Outcome::Pass && report.aggregate.records == 200,
        format!(
            "{} of {} image distances inside the certified radius, worst ratio {:.4}",
            report.aggregate.passed, report.aggregate.records, worst
        ),
    );
}

#[test]
fn criterion_05_greedy_scaling_matches_reference_line() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        kind: ExperimentKind::TreeScaling,
        beta: 1.5,
        n_values: (3..=10).collect(),
        trials: 1,
        seed: 105,
        tol: 1e-8,
        out_dir: dir.path().to_path_buf(),
    };
    let report = run(&cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 120.0, "scaling sweep took {secs:.1} s");

    let slope = report.aggregate.fitted_slope.unwrap();
    let slope_ok = (slope + 0.25).abs() <= 0.15;
    let radii_ok = report.records.iter().all(|r| r.pass);
    for r in &report.records {
        println!(
            "  scale {}: greedy radius {:.6} vs net bound {:.6} -> {}",
            r.n,
            r.value.unwrap(),
            r.bound,
            if r.pass { "ok" } else { "violated" }
        );
    }
    conclude(
        5,
        slope_ok && radii_ok,
        format!(
            "fitted slope {slope:.4} (target -0.25 +- 0.15), radii within net bound: {radii_ok}, {secs:.1} s"
        ),
    );
}

#[test]
fn criterion_06_packing_family_separation_exact() {
    let mut worst_gap = 0.0f64;
    for n in 1..=10u32 {
        let family = packing_family(n, 2.0).unwrap();
        assert_eq!(family.len(), 1usize << n);
        let sep = packing_separation(n, 2.0).unwrap();
        if n == 2 {
            assert!((sep - 0.45276925690687087).abs() < 1e-12);
        }
        let images: Vec<_> = family
            .iter()
            .map(|mu| apply_vstar(mu, 2.0, mu.max_level()).unwrap())
            .collect();
        for i in 0..images.len() {
            for j in (i + 1)..images.len() {
                let dist = images[i].dist_sq(&images[j]).unwrap().sqrt();
                let gap = (dist - sep).abs();
                assert!(gap <= 1e-12, "n={n} pair ({i},{j}): |{dist} - {sep}| = {gap}");
                worst_gap = worst_gap.max(gap);
            }
        }
    }
    conclude(
        6,
        worst_gap <= 1e-12,
        format!("pairwise distances match the closed form, worst gap {worst_gap:.2e}"),
    );
}

#[test]
fn criterion_07_diagonal_inner_matches_closed_norm() {
    let kernel = KernelConfig::default();
    let quad = QuadratureConfig::default();
    let mut worst = 0.0f64;
    for k in 0..20 {
        let t = 0.1 * 10f64.powf(-5.0 * k as f64 / 20.0);
        let direct = kernel_inner(t, t, &kernel, &quad).unwrap();
        let closed = kernel_norm_sq(t, &kernel).unwrap();
        assert!((closed - 1.0 / (-t.ln())).abs() < 1e-15);
        let gap = (direct - closed).abs();
        assert!(gap <= 1e-8, "t={t:e}: quadrature vs closed norm gap {gap:e}");
        worst = worst.max(gap);
    }
    let t = (-4.0f64).exp();
    let at_quarter = kernel_inner(t, t, &kernel, &quad).unwrap();
    conclude(
        7,
        (at_quarter - 0.25).abs() <= 1e-8,
        format!("20 log-spaced diagonals within 1e-8 (worst {worst:.2e}); e^-4 -> {at_quarter:.10}"),
    );
}

#[test]
fn criterion_08_shift_modulus_below_log_line() {
    let kernel = KernelConfig::default();
    let quad = QuadratureConfig::default();
    let mut stream = Stream::new(108, 0);
    let mut worst_margin = f64::NEG_INFINITY;
    for _ in 0..100 {
        let t = kernel.r * 0.999 * stream.next_f64();
        let off = (kernel.r - t) * stream.next_f64().max(1e-9);
        let (lhs, rhs) = modulus_check(t, off, &kernel, &quad).unwrap();
        assert!(lhs <= rhs + 1e-8, "t={t}, u={off}: {lhs} > {rhs} + 1e-8");
        worst_margin = worst_margin.max(lhs - rhs);
    }
    conclude(
        8,
        worst_margin <= 1e-8,
        format!("100 shift pairs below the log line, worst margin {worst_margin:.3e}"),
    );
}

#[test]
fn criterion_09_increment_products_never_positive() {
    let kernel = KernelConfig::default();
    let quad = QuadratureConfig::default();
    let trials: Vec<u64> = (0..200).collect();
    let results: Vec<(f64, f64, f64)> = trials
        .par_iter()
        .map(|&i| {
            let mut stream = Stream::new(109, i);
            let [a, b, c, d] = random_quadruple(&mut stream, kernel.r);
            let general = negative_dependence(a, b, c, d, &kernel, &quad).unwrap();
            let left = negative_dependence(a, a, c, d, &kernel, &quad).unwrap();
            let right = negative_dependence(a, b, c, c, &kernel, &quad).unwrap();
            (general, left.abs(), right.abs())
        })
        .collect();
    let worst = results.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let worst_degenerate = results
        .iter()
        .map(|r| r.1.max(r.2))
        .fold(0.0f64, f64::max);
    for (general, left, right) in &results {
        assert!(*general <= 1e-8);
        assert!(*left <= 1e-10 && *right <= 1e-10);
    }
    conclude(
        9,
        worst <= 1e-8 && worst_degenerate <= 1e-10,
        format!(
            "200 quadruples: max integral {worst:.3e}, degenerate residue {worst_degenerate:.2e}"
        ),
    );
}

#[test]
fn criterion_10_partition_sizes_exact_with_atom_chain() {
    let kernel = KernelConfig::default();
    let mut checked = 0u64;
    for &n in &[8u64, 16, 32] {
        for trial in 0..500 {
            let mut stream = Stream::new(110, n * 10_000 + trial);
            let mu = random_interval_measure(&mut stream, 12, &kernel);
            let part = essential_partition(&mu, n, &kernel).unwrap();
            let (count, weighted) = verify_essential_sizes(&part, n).unwrap();
            assert!(count as u64 <= 2 * (n + 1) && weighted <= n);
            checked += 1;
        }
        // A unit atom divides its chain down to level n and stops once the
        // threshold passes 1, leaving a sibling per level plus the holder.
        let single =
            entropy_lab_core::volterra::measure::IntervalMeasure::from_atoms([(0.07, 1.0)], &kernel)
                .unwrap();
        let chain = essential_partition(&single, n, &kernel).unwrap();
        assert_eq!(chain.len() as u64, n + 2, "single-atom chain at n={n}");
    }
    conclude(
        10,
        checked == 1500,
        format!("{checked} partitions within both size certificates; atom chains have n+2 intervals"),
    );
}

/// Shared trial set for criteria 11 and 12.
fn interval_trial(n: u64, trial: u64, kernel: &KernelConfig) -> entropy_lab_core::volterra::measure::IntervalMeasure {
    let mut stream = Stream::new(111, n * 10_000 + trial);
    random_interval_measure(&mut stream, 12, kernel)
}

#[test]
fn criterion_11_reduction_error_within_half_power() {
    let start = Instant::now();
    let kernel = KernelConfig::default();
    let quad = QuadratureConfig {
        abs_tol: 1e-8,
        max_subdivisions: 4000,
    };
    let mut worst_ratio = 0.0f64;
    for &n in &[8u64, 16, 32] {
        let bound = 4.0 / (std::f64::consts::LN_2.sqrt() * (n as f64).sqrt()) + 1e-6;
        let errs: Vec<f64> = (0..200u64)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&trial| {
                let mu = interval_trial(n, trial, &kernel);
                approximation_error(&mu, n, &kernel, &quad).unwrap().err
            })
            .collect();
        for (trial, err) in errs.iter().enumerate() {
            assert!(*err <= bound, "n={n} trial={trial}: {err} > {bound}");
            worst_ratio = worst_ratio.max(err / bound);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    conclude(
        11,
        secs < 300.0,
        format!("600 reduction errors within the half-power bound (worst ratio {worst_ratio:.4}) in {secs:.1} s"),
    );
}

#[test]
fn criterion_12_coarse_split_within_log_bound() {
    let kernel = KernelConfig::default();
    let quad = QuadratureConfig {
        abs_tol: 1e-8,
        max_subdivisions: 4000,
    };
    let mut worst_ratio = 0.0f64;
    for &n in &[8u64, 16, 32] {
        // 2 (ln n^(1/4))^(-1/2) = 4 (ln n)^(-1/2).
        let bound = 4.0 / (n as f64).ln().sqrt() + 1e-6;
        let gaps: Vec<(usize, f64)> = (0..200u64)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&trial| {
                let mu = interval_trial(n, trial, &kernel);
                let fine = essential_partition(&mu, n, &kernel).unwrap();
                let coarse = auxiliary_partition(&fine, n).unwrap();
                let gap = finite_rank_apply(&mu, &fine, &kernel)
                    .unwrap()
                    .sub(&finite_rank_apply(&mu, &coarse, &kernel).unwrap());
                let mut cache = GramCache::new();
                (fine.len(), gap.norm(&kernel, &quad, &mut cache).unwrap())
            })
            .collect();
        for (trial, (rank, gap)) in gaps.iter().enumerate() {
            assert!(*rank as u64 <= 2 * (n + 1), "n={n} trial={trial}: rank {rank}");
            assert!(*gap <= bound, "n={n} trial={trial}: {gap} > {bound}");
            worst_ratio = worst_ratio.max(gap / bound);
        }
    }
    conclude(
        12,
        worst_ratio <= 1.0,
        format!("600 split gaps within the log bound, ranks within 2(n+1); worst ratio {worst_ratio:.4}"),
    );
}
