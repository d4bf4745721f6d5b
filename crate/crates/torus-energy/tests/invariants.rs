//! Cross-module invariants: Poisson-summation consistency, triplet closure,
//! alignment optimality against a brute-force shift scan, and determinism
//! across worker counts.

use proptest::prelude::*;
use rayon::prelude::*;

use torus_energy::*;

#[test]
fn poisson_summation_consistency() {
    // evaluate() agrees with the direct Gaussian image sum within the
    // certified tail bound, over 100 random points per (dimension, width)
    let mut state = 0x12345678u64;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    for d in 1..=2usize {
        let cell = if d == 1 { Cell::unit_1d() } else { Cell::rect_2d() };
        for &t in &[0.5, 1.0, 4.0] {
            let kernel = FourierKernel::gaussian(t, &cell, 24).unwrap();
            for _ in 0..100 {
                let x: Vec<f64> = cell.periods().iter().map(|&l| next() * l).collect();
                let mut image = 0.0;
                match d {
                    1 => {
                        for j in -8i64..=8 {
                            image += (-t * (x[0] - j as f64 * cell.periods()[0]).powi(2)).exp();
                        }
                    }
                    _ => {
                        for j1 in -8i64..=8 {
                            for j2 in -8i64..=8 {
                                let dx = x[0] - j1 as f64 * cell.periods()[0];
                                let dy = x[1] - j2 as f64 * cell.periods()[1];
                                image += (-t * (dx * dx + dy * dy)).exp();
                            }
                        }
                    }
                }
                let diff = (kernel.evaluate(&x) - image).abs();
                assert!(
                    diff <= kernel.tail_bound() + 1e-10,
                    "d={} t={} x={:?}: diff {} vs tail {}",
                    d,
                    t,
                    x,
                    diff,
                    kernel.tail_bound()
                );
            }
        }
    }
}

#[test]
fn triplet_closure_for_random_generators() {
    let mut seed = 0u64;
    for l in [3usize, 6] {
        for _ in 0..25 {
            let config =
                random_configuration(2 * l * l, &Cell::rect_2d(), seed, Some(TripletConstraint { triplet: l }))
                    .unwrap();
            seed += 1;
            assert!(config.triplet_residual().unwrap() <= 1e-14);
        }
    }
}

/// Sup defect of the min-cost matching at a fixed shift (oracle-side
/// reimplementation, independent of the alignment code path).
fn sup_defect_at_shift(config: &Configuration, reference: &Configuration, shift: f64) -> f64 {
    let n = config.len();
    let cell = &config.cell;
    let moved: Vec<f64> = config
        .points
        .iter()
        .map(|p| Cell::wrap_coord(p[0] + shift, 1.0))
        .collect();
    let cost: Vec<Vec<f64>> = moved
        .iter()
        .map(|&x| {
            reference
                .points
                .iter()
                .map(|t| {
                    let d = cell.distance(&[x], t);
                    d * d
                })
                .collect()
        })
        .collect();
    // minimal-cost matching by exhaustive permutation (N <= 8)
    fn rec(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if acc >= *best {
            return;
        }
        if row == cost.len() {
            *best = acc;
            return;
        }
        for j in 0..cost.len() {
            if !used[j] {
                used[j] = true;
                rec(cost, row + 1, used, acc + cost[row][j], best);
                used[j] = false;
            }
        }
    }
    let mut best_total = f64::INFINITY;
    rec(&cost, 0, &mut vec![false; n], 0.0, &mut best_total);
    // recover a matching attaining the optimum, then take its sup defect
    fn rec_perm(
        cost: &[Vec<f64>],
        row: usize,
        used: &mut Vec<bool>,
        acc: f64,
        target: f64,
        perm: &mut Vec<usize>,
        out: &mut Option<Vec<usize>>,
    ) {
        if out.is_some() || acc > target + 1e-15 {
            return;
        }
        if row == cost.len() {
            *out = Some(perm.clone());
            return;
        }
        for j in 0..cost.len() {
            if !used[j] {
                used[j] = true;
                perm.push(j);
                rec_perm(cost, row + 1, used, acc + cost[row][j], target, perm, out);
                perm.pop();
                used[j] = false;
            }
        }
    }
    let mut perm_out = None;
    rec_perm(
        &cost,
        0,
        &mut vec![false; n],
        0.0,
        best_total,
        &mut Vec::new(),
        &mut perm_out,
    );
    let perm = perm_out.unwrap();
    perm.iter()
        .enumerate()
        .map(|(i, &j)| cost[i][j].sqrt())
        .fold(0.0f64, f64::max)
}

#[test]
fn alignment_matches_brute_force_shift_scan_1d() {
    for (n, seed) in [(5usize, 1u64), (8, 2)] {
        let config = random_configuration(n, &Cell::unit_1d(), seed, None).unwrap();
        let reference = random_configuration(n, &Cell::unit_1d(), seed + 100, None).unwrap();
        let (_, report) = canonicalize_translation(&config, &reference).unwrap();
        let grid = 1_000_000usize;
        let grid_best = (0..grid)
            .into_par_iter()
            .map(|i| sup_defect_at_shift(&config, &reference, i as f64 / grid as f64))
            .reduce(|| f64::INFINITY, f64::min);
        assert!(
            report.sup_norm <= grid_best + 1e-9,
            "N={}: aligned sup {} vs grid best {}",
            n,
            report.sup_norm,
            grid_best
        );
    }
}

#[test]
fn minimize_is_deterministic_across_worker_counts() {
    let kernel = FourierKernel::gaussian(1.0, &Cell::unit_1d(), 16).unwrap();
    let opts = MinimizeOptions {
        starts: 6,
        seed: 31,
        max_iters: 3000,
        ..Default::default()
    };
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| minimize(&kernel, MinimizeTarget::Free { n_points: 6 }, &opts).unwrap())
    };
    let a = run(1);
    let b = run(4);
    assert_eq!(a.best.points, b.best.points);
    assert_eq!(a.best_gap, b.best_gap);
    for (x, y) in a.per_start.iter().zip(&b.per_start) {
        assert_eq!(x.gap, y.gap);
        assert_eq!(x.iterations, y.iterations);
        assert_eq!(x.grad_norm, y.grad_norm);
    }
}

#[test]
fn tiny_instance_matches_grid_search_n2() {
    let kernel = FourierKernel::gaussian(1.0, &Cell::unit_1d(), 32).unwrap();
    let opts = MinimizeOptions {
        starts: 4,
        seed: 17,
        ..Default::default()
    };
    let result = minimize(&kernel, MinimizeTarget::Free { n_points: 2 }, &opts).unwrap();
    let grid = 400usize;
    let mut grid_min = f64::INFINITY;
    for i in 0..grid {
        let c = Configuration::new(Cell::unit_1d(), vec![vec![0.0], vec![i as f64 / grid as f64]])
            .unwrap();
        grid_min = grid_min.min(spectral_gap(&kernel, &c, 32).unwrap());
    }
    assert!(result.best_gap <= grid_min + 1e-12);
    let mut second_moment = 0.0;
    for (mode, a) in kernel.modes() {
        second_moment += a * (mode[0] * mode[0]) as f64;
    }
    let lambda_max = 16.0 * std::f64::consts::PI.powi(2) / 2.0 * second_moment;
    let h = 1.0 / grid as f64;
    assert!(grid_min - result.best_gap <= 0.5 * lambda_max * h * h / 4.0 + 1e-18);
}

proptest! {
    #[test]
    fn wrapping_is_idempotent(coords in proptest::collection::vec(-10.0f64..10.0, 1..20)) {
        let cell = Cell::unit_1d();
        let pts: Vec<Vec<f64>> = coords.iter().map(|&x| vec![x]).collect();
        let config = Configuration::new(cell, pts).unwrap();
        for p in &config.points {
            prop_assert!((0.0..1.0).contains(&p[0]));
            prop_assert_eq!(config.cell.wrap(p), p.clone());
        }
    }

    #[test]
    fn periodic_distance_below_euclidean(
        x in 0.0f64..1.0, y in 0.0f64..1.0,
        u in 0.0f64..1.0, v in 0.0f64..1.0,
    ) {
        let cell = Cell::rect_2d();
        let s3 = 3.0f64.sqrt();
        let a = [x * s3, y];
        let b = [u * s3, v];
        let direct = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        prop_assert!(periodic_distance(&a, &b, &cell) <= direct + 1e-12);
    }

    #[test]
    fn custom_kernel_symmetrization(vals in proptest::collection::vec(0.0f64..2.0, 9)) {
        let cell = Cell::unit_1d();
        let table = vals.clone();
        let kernel = FourierKernel::from_rule(&cell, 4, move |m| table[(m[0] + 4) as usize]).unwrap();
        for n in 0..=4i64 {
            prop_assert_eq!(
                kernel.coefficient(&[n]).unwrap(),
                kernel.coefficient(&[-n]).unwrap()
            );
        }
    }
}
