use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::kernel::{mode_box, FourierKernel};

/// Structure factor of the empirical measure at a single mode:
/// `b_n = (1/N) sum_k e(n . L^{-1} x_k)` with `e(s) = exp(2 pi i s)`.
/// In two dimensions this is `b_pq = (1/N) sum_k e(p x_k / sqrt(3) + q y_k)`
/// on the paper cell.
pub fn structure_factor(config: &Configuration, mode: &[i64]) -> Complex64 {
    let periods = config.cell.periods();
    let mut sum = Complex64::new(0.0, 0.0);
    for p in &config.points {
        let mut phase = mode[0] as f64 * p[0] / periods[0];
        if periods.len() > 1 && mode.len() > 1 {
            phase += mode[1] as f64 * p[1] / periods[1];
        }
        let (s, c) = (2.0 * PI * phase).sin_cos();
        sum += Complex64::new(c, s);
    }
    sum / config.len() as f64
}

/// Dense grid of structure factors over the mode box `{-M..M}^d`.
#[derive(Debug, Clone)]
pub struct StructureFactor {
    dim: usize,
    mode_cap: usize,
    n_points: usize,
    values: Vec<Complex64>,
}

impl StructureFactor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode_cap(&self) -> usize {
        self.mode_cap
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn value(&self, mode: &[i64]) -> Option<Complex64> {
        let m = self.mode_cap as i64;
        match self.dim {
            1 => {
                if mode[0].abs() > m {
                    None
                } else {
                    Some(self.values[(mode[0] + m) as usize])
                }
            }
            _ => {
                if mode[0].abs() > m || mode[1].abs() > m {
                    None
                } else {
                    let side = 2 * m + 1;
                    Some(self.values[((mode[0] + m) * side + (mode[1] + m)) as usize])
                }
            }
        }
    }

    /// All `(mode, b_mode)` pairs in lexicographic mode order.
    pub fn entries(&self) -> impl Iterator<Item = ([i64; 2], Complex64)> + '_ {
        mode_box(self.dim, self.mode_cap)
            .into_iter()
            .zip(self.values.iter().copied())
    }

    /// CSV rows `n1[,n2],re,im,abs`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if self.dim == 1 {
            out.push_str("n1,re,im,abs\n");
            for (mode, b) in self.entries() {
                out.push_str(&format!(
                    "{},{:.16e},{:.16e},{:.16e}\n",
                    mode[0],
                    b.re,
                    b.im,
                    b.norm()
                ));
            }
        } else {
            out.push_str("n1,n2,re,im,abs\n");
            for (mode, b) in self.entries() {
                out.push_str(&format!(
                    "{},{},{:.16e},{:.16e},{:.16e}\n",
                    mode[0],
                    mode[1],
                    b.re,
                    b.im,
                    b.norm()
                ));
            }
        }
        out
    }
}

/// Compute all structure factors in the mode box. Each mode uses the same
/// arithmetic as [`structure_factor`], so grid values agree with pointwise
/// calls bit for bit.
pub fn structure_factor_grid(config: &Configuration, mode_cap: usize) -> Result<StructureFactor> {
    if mode_cap < 1 {
        return Err(Error::ModeCapTooSmall(mode_cap));
    }
    let dim = config.dim();
    let values = mode_box(dim, mode_cap)
        .into_iter()
        .map(|m| structure_factor(config, &m))
        .collect();
    Ok(StructureFactor {
        dim,
        mode_cap,
        n_points: config.len(),
        values,
    })
}

/// Energy quantities of a configuration under a kernel, all under the fixed
/// normalization `direct = a_0 + gap` (uniform energy equals `a_0`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyReport {
    /// `J = (1/N^2) sum_{m,k} f(x_m - x_k)`, diagonal included.
    pub direct_energy: f64,
    /// Spectral gap `sum_{n != 0} a_n |b_n|^2`.
    pub gap: f64,
    /// Pair energy `E_f` (undefined for a single point).
    pub pair_energy: Option<f64>,
    /// Certified truncation error of the gap (kernel tail bound, `|b| <= 1`).
    pub tail_bound: f64,
    pub mode_cap_used: usize,
}

fn check_cells(kernel: &FourierKernel, config: &Configuration) -> Result<()> {
    if kernel.cell() != &config.cell {
        return Err(Error::CellMismatch);
    }
    Ok(())
}

/// Canonical point ordering so that symmetric pair sums do not depend on the
/// labeling of the points.
fn sorted_indices(config: &Configuration) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..config.len()).collect();
    idx.sort_by(|&a, &b| {
        config.points[a]
            .partial_cmp(&config.points[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    idx
}

/// Direct double-sum energy `(1/N^2) sum_{m,k} f(x_m - x_k)` evaluated with
/// the truncated kernel.
pub fn energy_direct(kernel: &FourierKernel, config: &Configuration) -> Result<f64> {
    check_cells(kernel, config)?;
    let n = config.len();
    let idx = sorted_indices(config);
    let mut off = 0.0;
    for a in 0..n {
        for b in (a + 1)..n {
            let (i, j) = (idx[a], idx[b]);
            let diff: Vec<f64> = config.points[i]
                .iter()
                .zip(&config.points[j])
                .map(|(&x, &y)| x - y)
                .collect();
            off += kernel.evaluate(&diff);
        }
    }
    Ok((2.0 * off + n as f64 * kernel.value_at_zero()) / (n * n) as f64)
}

/// Pair energy `E_f = (1/(N(N-1))) sum_{m != k} f(x_m - x_k)`.
pub fn pair_energy(kernel: &FourierKernel, config: &Configuration) -> Result<f64> {
    check_cells(kernel, config)?;
    let n = config.len();
    if n < 2 {
        return Err(Error::TooFewPoints { need: 2, got: n });
    }
    let idx = sorted_indices(config);
    let mut off = 0.0;
    for a in 0..n {
        for b in (a + 1)..n {
            let (i, j) = (idx[a], idx[b]);
            let diff: Vec<f64> = config.points[i]
                .iter()
                .zip(&config.points[j])
                .map(|(&x, &y)| x - y)
                .collect();
            off += kernel.evaluate(&diff);
        }
    }
    Ok(2.0 * off / (n * (n - 1)) as f64)
}

/// Spectral gap `sum_{0 < |n|_inf <= cap} a_n |b_n|^2` at an explicit cap.
pub fn spectral_gap(kernel: &FourierKernel, config: &Configuration, cap: usize) -> Result<f64> {
    check_cells(kernel, config)?;
    if cap > kernel.mode_cap() {
        return Err(Error::CapExceedsStorage {
            requested: cap,
            stored: kernel.mode_cap(),
        });
    }
    let mut gap = 0.0;
    for mode in mode_box(config.dim(), cap) {
        if mode == [0, 0] {
            continue;
        }
        let a = kernel.coefficient_opt(&mode).unwrap_or(0.0);
        if a == 0.0 {
            continue;
        }
        gap += a * structure_factor(config, &mode).norm_sqr();
    }
    Ok(gap)
}

/// Full energy report over the kernel's stored mode box: direct energy,
/// spectral gap, pair energy, and the certified truncation bound. The
/// identity `direct = a_0 + gap` holds up to the tail bound and rounding.
pub fn energy_gap_spectral(kernel: &FourierKernel, config: &Configuration) -> Result<EnergyReport> {
    let gap = spectral_gap(kernel, config, kernel.mode_cap())?;
    let direct = energy_direct(kernel, config)?;
    let pair = if config.len() >= 2 {
        Some(pair_energy(kernel, config)?)
    } else {
        None
    };
    Ok(EnergyReport {
        direct_energy: direct,
        gap,
        pair_energy: pair,
        tail_bound: kernel.tail_bound(),
        mode_cap_used: kernel.mode_cap(),
    })
}

/// Analytic gradient of the spectral gap with respect to the free
/// coordinates: `d gap / d x_k = -(4 pi / N) sum_{n != 0} a_n
/// Im(conj(b_n) e(n . L^{-1} x_k)) (L^{-1} n)`. Under the triplet constraint
/// the replica gradients are accumulated onto their generators, so the
/// result has one entry per free point.
pub fn gap_gradient(kernel: &FourierKernel, config: &Configuration) -> Result<Vec<Vec<f64>>> {
    gap_gradient_capped(kernel, config, kernel.mode_cap())
}

pub fn gap_gradient_capped(
    kernel: &FourierKernel,
    config: &Configuration,
    cap: usize,
) -> Result<Vec<Vec<f64>>> {
    check_cells(kernel, config)?;
    if cap > kernel.mode_cap() {
        return Err(Error::CapExceedsStorage {
            requested: cap,
            stored: kernel.mode_cap(),
        });
    }
    let n = config.len() as f64;
    let d = config.dim();
    let periods = config.cell.periods();
    let mut grad = vec![vec![0.0; d]; config.len()];
    for mode in mode_box(d, cap) {
        if mode == [0, 0] {
            continue;
        }
        let a = kernel.coefficient_opt(&mode).unwrap_or(0.0);
        if a == 0.0 {
            continue;
        }
        let b = structure_factor(config, &mode);
        let scale = -4.0 * PI * a / n;
        for (k, p) in config.points.iter().enumerate() {
            let mut phase = mode[0] as f64 * p[0] / periods[0];
            if d > 1 {
                phase += mode[1] as f64 * p[1] / periods[1];
            }
            let (s, c) = (2.0 * PI * phase).sin_cos();
            let im = b.re * s - b.im * c; // Im(conj(b) e(phase))
            for i in 0..d {
                grad[k][i] += scale * im * mode[i] as f64 / periods[i];
            }
        }
    }
    let g = config.n_generators();
    if g == config.len() {
        return Ok(grad);
    }
    let mut folded = vec![vec![0.0; d]; g];
    for (k, gk) in grad.iter().enumerate() {
        for i in 0..d {
            folded[k % g][i] += gk[i];
        }
    }
    Ok(folded)
}
