use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::cell::Cell;
use crate::config::{expand_triplet, random_configuration, Configuration, TripletConstraint};
use crate::error::{Error, Result};
use crate::kernel::FourierKernel;
use crate::spectral::{gap_gradient_capped, spectral_gap};
use crate::align::DefectReport;

/// What to minimize over: `N` free points, or triplet-constrained
/// configurations with `2L^2` points generated by `2L^2/3` free generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MinimizeTarget {
    Free { n_points: usize },
    Triplet { l: usize },
}

impl MinimizeTarget {
    pub fn n_points(&self) -> usize {
        match *self {
            MinimizeTarget::Free { n_points } => n_points,
            MinimizeTarget::Triplet { l } => 2 * l * l,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub starts: usize,
    /// Iteration cap per continuation stage.
    pub max_iters: usize,
    /// Convergence threshold on the gradient sup-norm; `None` selects the
    /// default `1e-10 * N`.
    pub grad_tol: Option<f64>,
    pub step_init: f64,
    pub backtrack_factor: f64,
    pub armijo_c: f64,
    pub seed: u64,
    /// Mode cap for the objective; `None` uses the kernel's full box.
    pub mode_cap: Option<usize>,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            starts: 20,
            max_iters: 100_000,
            grad_tol: None,
            step_init: 0.1,
            backtrack_factor: 0.5,
            armijo_c: 1e-4,
            seed: 0,
            mode_cap: None,
        }
    }
}

impl MinimizeOptions {
    fn validate(&self) -> Result<()> {
        if self.starts < 1 {
            return Err(Error::InvalidParameter("starts must be >= 1".into()));
        }
        if !(self.step_init > 0.0) {
            return Err(Error::InvalidParameter("step_init must be positive".into()));
        }
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::InvalidParameter(
                "backtrack_factor must lie in (0, 1)".into(),
            ));
        }
        if !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return Err(Error::InvalidParameter("armijo_c must lie in (0, 1)".into()));
        }
        if let Some(t) = self.grad_tol {
            if !(t > 0.0) {
                return Err(Error::InvalidParameter("grad_tol must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Outcome of one start.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StartRecord {
    pub seed: u64,
    pub gap: f64,
    pub iterations: usize,
    pub grad_norm: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinimizationResult {
    pub best: Configuration,
    pub best_gap: f64,
    pub per_start: Vec<StartRecord>,
    /// Filled by the theorem-verification drivers when a target is supplied.
    pub defect: Option<DefectReport>,
}

/// One row of the optional per-start descent trace.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub start: usize,
    pub iter: usize,
    pub gap: f64,
    pub grad_norm: f64,
}

/// Modes whose coefficients must stay strictly positive for the target to be
/// pinned by the spectral gap: `1..ceil(N/2)` in one dimension, the triplet
/// mode set `S_1` in two.
fn needed_modes(target: MinimizeTarget, dim: usize) -> Vec<[i64; 2]> {
    match target {
        MinimizeTarget::Free { n_points } if dim == 1 => {
            let half = n_points.div_ceil(2).max(1) as i64;
            (1..=half).map(|n| [n, 0]).collect()
        }
        MinimizeTarget::Triplet { l } => s1_box(l as i64),
        MinimizeTarget::Free { n_points } => {
            // heuristic scale for unconstrained 2D targets
            let l_eff = ((n_points as f64 / 2.0).sqrt().ceil() as i64).max(1);
            s1_box(l_eff)
        }
    }
}

fn s1_box(l: i64) -> Vec<[i64; 2]> {
    let mut v = Vec::new();
    for m in -(2 * l / 3)..=(2 * l / 3) {
        for n in -l..=l {
            if (m, n) != (0, 0) && 3 * m.abs() <= 2 * l {
                v.push([m, n]);
            }
        }
    }
    v
}

/// Continuation schedule: exponents `gamma` applied to the kernel
/// coefficients so that each stage's span `max a^g / min a^g` over the
/// needed modes stays near `e^TAU`. Ends with the untempered kernel.
fn tempering_schedule(kernel: &FourierKernel, needed: &[[i64; 2]]) -> Vec<f64> {
    const TAU: f64 = 8.0;
    let mut a_max: f64 = 0.0;
    for (mode, a) in kernel.modes() {
        if mode != [0, 0] {
            a_max = a_max.max(a);
        }
    }
    let mut a_min = f64::INFINITY;
    for m in needed {
        if let Some(a) = kernel.coefficient_opt(m) {
            if a > 0.0 {
                a_min = a_min.min(a);
            }
        }
    }
    if !(a_max > 0.0) || !a_min.is_finite() {
        return vec![1.0];
    }
    let sigma = (a_max / a_min).ln();
    if !sigma.is_finite() || sigma <= TAU {
        return vec![1.0];
    }
    let mut gammas = Vec::new();
    let mut g = TAU / sigma;
    while g < 1.0 {
        gammas.push(g);
        g *= 2.0;
    }
    gammas.push(1.0);
    gammas
}

/// Internal objective: gap and gradient over the free parameters, evaluated
/// with per-point phase power tables. Deterministic summation order.
struct GapObjective {
    periods: Vec<f64>,
    dim: usize,
    cap: i64,
    /// `(mode, coefficient, weight)` over a symmetry-reduced half box;
    /// weight 2 accounts for the mirrored mode.
    modes: Vec<([i64; 2], f64, f64)>,
    n_gen: usize,
    n_points: usize,
    triplet_l: Option<usize>,
}

impl GapObjective {
    fn new(kernel: &FourierKernel, target: MinimizeTarget, cap: usize) -> Self {
        let dim = kernel.dim();
        let mut modes = Vec::new();
        for (mode, a) in kernel.modes() {
            if a <= 0.0 || mode == [0, 0] {
                continue;
            }
            if mode[0].abs() > cap as i64 || mode[1].abs() > cap as i64 {
                continue;
            }
            // keep the lexicographically positive representative
            if mode[0] > 0 || (mode[0] == 0 && mode[1] > 0) {
                modes.push((mode, a, 2.0));
            }
        }
        let (n_gen, n_points, triplet_l) = match target {
            MinimizeTarget::Free { n_points } => (n_points, n_points, None),
            MinimizeTarget::Triplet { l } => (2 * l * l / 3, 2 * l * l, Some(l)),
        };
        GapObjective {
            periods: kernel.cell().periods().to_vec(),
            dim,
            cap: cap as i64,
            modes,
            n_gen,
            n_points,
            triplet_l,
        }
    }

    /// Expand generators (flat layout) into the full point list.
    fn expand(&self, gen: &[f64]) -> Vec<f64> {
        match self.triplet_l {
            None => gen.to_vec(),
            Some(l) => {
                let (u, v) = crate::config::triplet_shifts(l);
                let g = self.n_gen;
                let mut pts = vec![0.0; self.n_points * 2];
                pts[..g * 2].copy_from_slice(gen);
                for k in 0..g {
                    for (r, shift) in [(g, u), (2 * g, v)] {
                        pts[(r + k) * 2] = gen[k * 2] + shift[0];
                        pts[(r + k) * 2 + 1] = gen[k * 2 + 1] + shift[1];
                    }
                }
                pts
            }
        }
    }

    /// Power tables `u^p` for `p = 0..cap` per point and axis.
    fn power_tables(&self, pts: &[f64]) -> Vec<Vec<Complex64>> {
        let m = self.cap as usize;
        let mut tables = Vec::with_capacity(self.n_points * self.dim);
        for k in 0..self.n_points {
            for i in 0..self.dim {
                let x = pts[k * self.dim + i] / self.periods[i];
                let (s, c) = (2.0 * PI * x).sin_cos();
                let u = Complex64::new(c, s);
                let mut row = Vec::with_capacity(m + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                row.push(acc);
                for _ in 0..m {
                    acc *= u;
                    row.push(acc);
                }
                tables.push(row);
            }
        }
        tables
    }

    fn phase(&self, tables: &[Vec<Complex64>], k: usize, mode: &[i64; 2]) -> Complex64 {
        let px = {
            let t = &tables[k * self.dim];
            let p = mode[0];
            if p >= 0 {
                t[p as usize]
            } else {
                t[(-p) as usize].conj()
            }
        };
        if self.dim == 1 {
            return px;
        }
        let py = {
            let t = &tables[k * self.dim + 1];
            let q = mode[1];
            if q >= 0 {
                t[q as usize]
            } else {
                t[(-q) as usize].conj()
            }
        };
        px * py
    }

    /// Gap only.
    fn gap(&self, gen: &[f64]) -> f64 {
        let pts = self.expand(gen);
        let tables = self.power_tables(&pts);
        let inv_n2 = 1.0 / (self.n_points * self.n_points) as f64;
        let mut gap = 0.0;
        for (mode, a, w) in &self.modes {
            let mut b = Complex64::new(0.0, 0.0);
            for k in 0..self.n_points {
                b += self.phase(&tables, k, mode);
            }
            gap += w * a * b.norm_sqr() * inv_n2;
        }
        gap
    }

    /// Gap, gradient over the free parameters (flat), and gradient sup-norm.
    fn gap_grad(&self, gen: &[f64]) -> (f64, Vec<f64>, f64) {
        let pts = self.expand(gen);
        let tables = self.power_tables(&pts);
        let n = self.n_points as f64;
        let inv_n2 = 1.0 / (n * n);
        let mut gap = 0.0;
        let mut grad_pts = vec![0.0; self.n_points * self.dim];
        for (mode, a, w) in &self.modes {
            let mut big_b = Complex64::new(0.0, 0.0);
            for k in 0..self.n_points {
                big_b += self.phase(&tables, k, mode);
            }
            gap += w * a * big_b.norm_sqr() * inv_n2;
            let scale = -4.0 * PI * a * w * inv_n2;
            for k in 0..self.n_points {
                let ph = self.phase(&tables, k, mode);
                let im = big_b.re * ph.im - big_b.im * ph.re; // Im(conj(B) ph)
                for i in 0..self.dim {
                    grad_pts[k * self.dim + i] += scale * im * mode[i] as f64 / self.periods[i];
                }
            }
        }
        // fold replica gradients onto the generators
        let mut grad = vec![0.0; self.n_gen * self.dim];
        for k in 0..self.n_points {
            let g = k % self.n_gen;
            for i in 0..self.dim {
                grad[g * self.dim + i] += grad_pts[k * self.dim + i];
            }
        }
        let sup = grad.iter().map(|x| x.abs()).fold(0.0f64, f64::max);
        (gap, grad, sup)
    }
}

/// Projected gradient descent with adaptive two-sided Armijo backtracking on
/// one (possibly tempered) objective. Coordinates are wrapped every step;
/// accepted steps are strictly decreasing in the stage objective. Returns
/// the number of accepted steps.
fn descend_stage(
    obj: &GapObjective,
    gen: &mut Vec<f64>,
    opts: &MinimizeOptions,
    grad_tol: f64,
    stall_exit: bool,
    trace: &mut Option<(usize, &mut Vec<TraceRow>)>,
) -> usize {
    const MIN_STEP: f64 = 1e-18;
    const MAX_STEP: f64 = 1e9;
    const STALL_WINDOW: usize = 500;
    let beta = opts.backtrack_factor;
    let mut step = opts.step_init;
    let mut iterations = 0;
    let mut window_grad = f64::INFINITY;
    let (mut gap, mut grad, mut sup) = obj.gap_grad(gen);
    loop {
        if let Some((start, rows)) = trace {
            rows.push(TraceRow {
                start: *start,
                iter: iterations,
                gap,
                grad_norm: sup,
            });
        }
        if sup <= grad_tol || iterations >= opts.max_iters {
            return iterations;
        }
        // intermediate continuation stages exit once the gradient stops
        // contracting; the next stage re-conditions and resumes
        if stall_exit && iterations % STALL_WINDOW == 0 {
            if sup > window_grad * 0.98 {
                return iterations;
            }
            window_grad = sup;
        }
        let g2: f64 = grad.iter().map(|x| x * x).sum();
        let trial = |eta: f64| -> (Vec<f64>, f64) {
            let mut moved: Vec<f64> = gen
                .iter()
                .zip(grad.iter())
                .map(|(&x, &g)| x - eta * g)
                .collect();
            for (j, x) in moved.iter_mut().enumerate() {
                let l = obj.periods[j % obj.dim];
                *x = Cell::wrap_coord(*x, l);
            }
            let val = obj.gap(&moved);
            (moved, val)
        };
        let armijo = |val: f64, eta: f64| val <= gap - opts.armijo_c * eta * g2;
        let (mut cand, mut val) = trial(step);
        if armijo(val, step) {
            // grow while the stronger step still satisfies the condition
            while step / beta <= MAX_STEP {
                let bigger = step / beta;
                let (c2, v2) = trial(bigger);
                if armijo(v2, bigger) && v2 <= val {
                    step = bigger;
                    cand = c2;
                    val = v2;
                } else {
                    break;
                }
            }
        } else {
            let mut ok = false;
            while step > MIN_STEP {
                step *= beta;
                let (c2, v2) = trial(step);
                if armijo(v2, step) {
                    cand = c2;
                    ok = true;
                    break;
                }
            }
            if !ok {
                // no descent possible at the floating-point floor
                return iterations;
            }
        }
        *gen = cand;
        iterations += 1;
        let (g_new, grad_new, sup_new) = obj.gap_grad(gen);
        debug_assert!(g_new <= gap + gap.abs() * 1e-12 + 1e-300);
        gap = g_new;
        grad = grad_new;
        sup = sup_new;
    }
}

fn flat_generators(config: &Configuration) -> Vec<f64> {
    config
        .generators()
        .iter()
        .flat_map(|p| p.iter().copied())
        .collect()
}

fn config_from_flat(
    gen: &[f64],
    cell: &Cell,
    target: MinimizeTarget,
) -> Result<Configuration> {
    let d = cell.dim();
    let pts: Vec<Vec<f64>> = gen.chunks(d).map(|c| cell.wrap(c)).collect();
    match target {
        MinimizeTarget::Free { .. } => Configuration::new(cell.clone(), pts),
        MinimizeTarget::Triplet { l } => expand_triplet(&pts, l),
    }
}

fn validate_target(kernel: &FourierKernel, target: MinimizeTarget) -> Result<()> {
    match target {
        MinimizeTarget::Free { n_points } => {
            if n_points < 1 {
                return Err(Error::BadPointCount("N must be >= 1".into()));
            }
        }
        MinimizeTarget::Triplet { l } => {
            if l % 3 != 0 {
                return Err(Error::LNotDivisibleBy3);
            }
            if l < 3 {
                return Err(Error::LTooSmall(l));
            }
            if kernel.dim() != 2 {
                return Err(Error::NotTwoDimensional);
            }
            if kernel.cell() != &Cell::rect_2d() {
                return Err(Error::TripletCell);
            }
        }
    }
    // the gap only pins the target if the coefficients it relies on are
    // strictly positive at working precision
    for m in needed_modes(target, kernel.dim()) {
        match kernel.coefficient_opt(&m) {
            Some(a) if a > 0.0 => {}
            Some(_) => {
                return Err(Error::PositivityViolated {
                    mode: m[..kernel.dim()].to_vec(),
                })
            }
            None => {
                return Err(Error::ModeOutsideBox {
                    mode: m[..kernel.dim()].to_vec(),
                    cap: kernel.mode_cap(),
                })
            }
        }
    }
    Ok(())
}

/// Multi-start minimization of the spectral gap.
///
/// Each start runs projected gradient descent with Armijo backtracking. For
/// sharply decaying kernels the coefficient span makes plain descent
/// numerically stiff, so each start passes through a deterministic
/// power-tempering continuation (`a_n^gamma`, `gamma` increasing to 1); the
/// final stage and every reported quantity use the untempered kernel. The
/// winner is the lexicographic minimum of `(gap, seed)`.
pub fn minimize(
    kernel: &FourierKernel,
    target: MinimizeTarget,
    options: &MinimizeOptions,
) -> Result<MinimizationResult> {
    minimize_impl(kernel, target, options, None)
}

/// Like [`minimize`], additionally collecting a per-start descent trace of
/// the final (untempered) stage.
pub fn minimize_traced(
    kernel: &FourierKernel,
    target: MinimizeTarget,
    options: &MinimizeOptions,
    trace: &mut Vec<TraceRow>,
) -> Result<MinimizationResult> {
    let mut rows = Vec::new();
    let result = minimize_impl(kernel, target, options, Some(&mut rows))?;
    *trace = rows;
    Ok(result)
}

fn minimize_impl(
    kernel: &FourierKernel,
    target: MinimizeTarget,
    options: &MinimizeOptions,
    trace: Option<&mut Vec<TraceRow>>,
) -> Result<MinimizationResult> {
    options.validate()?;
    validate_target(kernel, target)?;
    let cap = match options.mode_cap {
        Some(c) => {
            if c > kernel.mode_cap() {
                return Err(Error::CapExceedsStorage {
                    requested: c,
                    stored: kernel.mode_cap(),
                });
            }
            c
        }
        None => kernel.mode_cap(),
    };
    let n_points = target.n_points();
    let grad_tol = options.grad_tol.unwrap_or(1e-10 * n_points as f64);
    let constraint = match target {
        MinimizeTarget::Free { .. } => None,
        MinimizeTarget::Triplet { l } => Some(TripletConstraint { triplet: l }),
    };
    let needed = needed_modes(target, kernel.dim());
    let gammas = tempering_schedule(kernel, &needed);
    // intermediate stages converge to a scale-relative tolerance tight
    // enough that the final defect is set by the user's tolerance, not by
    // stage hand-off error
    let a_scale: f64 = kernel
        .modes()
        .filter(|(m, _)| *m != [0, 0])
        .map(|(_, a)| a)
        .fold(0.0, f64::max);

    let run_start = |s: usize| -> Result<(StartRecord, Vec<f64>, Vec<TraceRow>)> {
        let seed = options.seed.wrapping_add(s as u64);
        let start_config = random_configuration(n_points, kernel.cell(), seed, constraint)?;
        let mut gen = flat_generators(&start_config);
        let mut total_iter = 0usize;
        let mut rows = Vec::new();
        for (si, &gamma) in gammas.iter().enumerate() {
            let last = si + 1 == gammas.len();
            let stage_kernel;
            let k_ref = if gamma == 1.0 {
                kernel
            } else {
                stage_kernel = kernel.tempered(gamma);
                &stage_kernel
            };
            let obj = GapObjective::new(k_ref, target, cap);
            let stage_scale: f64 = obj
                .modes
                .iter()
                .map(|&(_, a, _)| a)
                .fold(0.0, f64::max);
            let tol = if last {
                grad_tol
            } else {
                (1e-12 * stage_scale * n_points as f64).min(grad_tol * stage_scale / a_scale)
            };
            let mut tr = if last && trace.is_some() {
                Some((s, &mut rows))
            } else {
                None
            };
            let stage_iters = descend_stage(&obj, &mut gen, options, tol, !last, &mut tr);
            if std::env::var("TORUS_STAGE_DEBUG").is_ok() {
                let (g, _, sup) = obj.gap_grad(&gen);
                eprintln!(
                    "  [start {} stage {}/{} gamma={:.4}] iters={} gap={:.3e} grad={:.3e} tol={:.3e}",
                    s, si + 1, gammas.len(), gamma, stage_iters, g, sup, tol
                );
            }
            total_iter += stage_iters;
            if options.max_iters == 0 {
                break;
            }
        }
        // report gap and gradient through the public evaluation path
        let config = config_from_flat(&gen, kernel.cell(), target)?;
        let gap = spectral_gap(kernel, &config, cap)?;
        let grad = gap_gradient_capped(kernel, &config, cap)?;
        let sup = grad
            .iter()
            .flat_map(|g| g.iter().map(|x| x.abs()))
            .fold(0.0f64, f64::max);
        let converged = options.max_iters > 0 && sup <= grad_tol;
        Ok((
            StartRecord {
                seed,
                gap,
                iterations: total_iter,
                grad_norm: sup,
                converged,
            },
            gen,
            rows,
        ))
    };

    let outcomes: Vec<Result<(StartRecord, Vec<f64>, Vec<TraceRow>)>> =
        (0..options.starts).into_par_iter().map(run_start).collect();
    let mut per_start = Vec::with_capacity(options.starts);
    let mut best: Option<(f64, u64, Vec<f64>)> = None;
    let mut all_rows = Vec::new();
    for o in outcomes {
        let (record, gen, rows) = o?;
        let better = match &best {
            None => true,
            Some((g, s, _)) => record.gap < *g || (record.gap == *g && record.seed < *s),
        };
        if better {
            best = Some((record.gap, record.seed, gen));
        }
        per_start.push(record);
        all_rows.extend(rows);
    }
    if let Some(t) = trace {
        *t = all_rows;
    }
    let (best_gap, _, gen) = best.expect("at least one start");
    let best_config = config_from_flat(&gen, kernel.cell(), target)?;
    Ok(MinimizationResult {
        best: best_config,
        best_gap,
        per_start,
        defect: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::equidistant_1d;

    fn gaussian_1d(t: f64, cap: usize) -> FourierKernel {
        FourierKernel::gaussian(t, &Cell::unit_1d(), cap).unwrap()
    }

    #[test]
    fn zero_iters_returns_start_unconverged() {
        let k = gaussian_1d(1.0, 16);
        let opts = MinimizeOptions {
            starts: 1,
            max_iters: 0,
            seed: 5,
            ..Default::default()
        };
        let r = minimize(&k, MinimizeTarget::Free { n_points: 4 }, &opts).unwrap();
        let start = random_configuration(4, &Cell::unit_1d(), 5, None).unwrap();
        assert_eq!(r.best.points, start.points);
        assert!(!r.per_start[0].converged);
    }

    #[test]
    fn small_1d_minimization_reaches_equidistant_gap() {
        let k = gaussian_1d(1.0, 16);
        let opts = MinimizeOptions {
            starts: 8,
            seed: 1,
            ..Default::default()
        };
        let r = minimize(&k, MinimizeTarget::Free { n_points: 4 }, &opts).unwrap();
        let eq = equidistant_1d(4).unwrap();
        let eq_gap = spectral_gap(&k, &eq, 16).unwrap();
        assert!(
            (r.best_gap - eq_gap).abs() <= 1e-10,
            "best {} vs equidistant {}",
            r.best_gap,
            eq_gap
        );
    }

    #[test]
    fn determinism_across_repeat_runs() {
        let k = gaussian_1d(1.0, 12);
        let opts = MinimizeOptions {
            starts: 4,
            seed: 9,
            max_iters: 2000,
            ..Default::default()
        };
        let a = minimize(&k, MinimizeTarget::Free { n_points: 3 }, &opts).unwrap();
        let b = minimize(&k, MinimizeTarget::Free { n_points: 3 }, &opts).unwrap();
        assert_eq!(a.best.points, b.best.points);
        assert_eq!(a.best_gap, b.best_gap);
        for (x, y) in a.per_start.iter().zip(&b.per_start) {
            assert_eq!(x.gap, y.gap);
            assert_eq!(x.iterations, y.iterations);
        }
    }

    #[test]
    fn best_gap_reproduces_on_reevaluation() {
        let k = gaussian_1d(1.0, 16);
        let opts = MinimizeOptions {
            starts: 3,
            seed: 2,
            ..Default::default()
        };
        let r = minimize(&k, MinimizeTarget::Free { n_points: 5 }, &opts).unwrap();
        let re = spectral_gap(&k, &r.best, 16).unwrap();
        assert_eq!(re, r.best_gap);
    }

    #[test]
    fn converged_runs_satisfy_tolerance_on_recheck() {
        let k = gaussian_1d(1.0, 16);
        let opts = MinimizeOptions {
            starts: 4,
            seed: 3,
            ..Default::default()
        };
        let r = minimize(&k, MinimizeTarget::Free { n_points: 4 }, &opts).unwrap();
        let tol = 1e-10 * 4.0;
        for rec in &r.per_start {
            if rec.converged {
                assert!(rec.grad_norm <= tol);
            }
        }
    }

    #[test]
    fn rejects_constant_kernel() {
        let k = FourierKernel::from_rule(&Cell::unit_1d(), 8, |m| if m[0] == 0 { 1.0 } else { 0.0 })
            .unwrap();
        let e = minimize(
            &k,
            MinimizeTarget::Free { n_points: 4 },
            &MinimizeOptions::default(),
        );
        assert!(matches!(e, Err(Error::PositivityViolated { .. })));
    }

    #[test]
    fn rejects_bad_triplet_l() {
        let k = FourierKernel::gaussian(1.0, &Cell::rect_2d(), 8).unwrap();
        let e = minimize(
            &k,
            MinimizeTarget::Triplet { l: 4 },
            &MinimizeOptions::default(),
        );
        assert!(matches!(e, Err(Error::LNotDivisibleBy3)));
    }

    #[test]
    fn monotone_descent_within_final_stage() {
        let k = gaussian_1d(4.0, 12);
        let opts = MinimizeOptions {
            starts: 2,
            seed: 4,
            max_iters: 5000,
            ..Default::default()
        };
        let mut trace = Vec::new();
        minimize_traced(&k, MinimizeTarget::Free { n_points: 4 }, &opts, &mut trace).unwrap();
        for w in trace.windows(2) {
            if w[0].start == w[1].start {
                assert!(w[1].gap <= w[0].gap * (1.0 + 1e-12) + 1e-300);
            }
        }
    }

    #[test]
    fn objective_matches_public_gap() {
        let k = FourierKernel::gaussian(2.0, &Cell::rect_2d(), 6).unwrap();
        let c = random_configuration(18, &Cell::rect_2d(), 21, Some(TripletConstraint { triplet: 3 }))
            .unwrap();
        let obj = GapObjective::new(&k, MinimizeTarget::Triplet { l: 3 }, 6);
        let flat = flat_generators(&c);
        let internal = obj.gap(&flat);
        let public = spectral_gap(&k, &c, 6).unwrap();
        assert!(
            (internal - public).abs() <= 1e-12 * public.max(1e-300),
            "{} vs {}",
            internal,
            public
        );
        // gradient agreement with the public analytic path
        let (_, grad, _) = obj.gap_grad(&flat);
        let public_grad = gap_gradient_capped(&k, &c, 6).unwrap();
        for (gi, pg) in grad.chunks(2).zip(&public_grad) {
            assert!((gi[0] - pg[0]).abs() <= 1e-10 * (1.0 + pg[0].abs()));
            assert!((gi[1] - pg[1]).abs() <= 1e-10 * (1.0 + pg[1].abs()));
        }
    }
}
