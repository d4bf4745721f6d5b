use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{min_separation, Configuration};
use crate::error::{Error, Result};
use crate::kernel::{check_decay_1d, FourierKernel};
use crate::spectral::structure_factor;

/// Default constant in the separation lower bound `min_sep >= c / L`.
pub const DEFAULT_SEPARATION_C: f64 = 0.20710678118654752; // (sqrt(2) - 1) / 2

/// Square-lattice upper bound on the minimal gap:
/// `sum_{n != 0} a_{Kn}` over stored modes plus the kernel tail bound.
/// Under the fixed normalization this equals the gap of the square lattice.
pub fn square_lattice_upper_bound(kernel: &FourierKernel, k: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::BadPointCount("K must be >= 1".into()));
    }
    if k > kernel.mode_cap() {
        return Err(Error::ModeOutsideBox {
            mode: vec![k as i64],
            cap: kernel.mode_cap(),
        });
    }
    let ki = k as i64;
    let cap = kernel.mode_cap() as i64;
    let mut sum = kernel.tail_bound();
    match kernel.dim() {
        1 => {
            let mut j = ki;
            while j <= cap {
                sum += kernel.coefficient(&[j])? + kernel.coefficient(&[-j])?;
                j += ki;
            }
        }
        _ => {
            let r = cap / ki;
            for p in -r..=r {
                for q in -r..=r {
                    if (p, q) == (0, 0) {
                        continue;
                    }
                    sum += kernel.coefficient(&[p * ki, q * ki])?;
                }
            }
        }
    }
    Ok(sum)
}

/// Certified bound `|b_mode| <= sqrt(gap / a_mode)` valid for any
/// configuration whose gap does not exceed `gap`.
pub fn coefficient_bound(gap: f64, kernel: &FourierKernel, mode: &[i64]) -> Result<f64> {
    let a = kernel.coefficient(mode)?;
    if a <= 0.0 {
        return Err(Error::PositivityViolated {
            mode: mode.to_vec(),
        });
    }
    Ok((gap / a).sqrt())
}

/// Newton-identity diagnostics for a 1D configuration: elementary symmetric
/// values `e_k` of `z_k = e(x_k)` computed from the power sums via
/// `k e_k = sum_{m=1..k} (-1)^{m-1} e_{k-m} p_m`, the defects
/// `|e_k - (-1)^{k-1} (N/k) b_k|`, and the hypothesis right-hand side
/// `2 C0 N^2 eps_N / (k^2 a_k)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NewtonReport {
    pub n: usize,
    pub k: usize,
    /// `e_1..e_K` as `(re, im)` pairs.
    pub e: Vec<[f64; 2]>,
    pub defects: Vec<f64>,
    pub bound_rhs: Vec<f64>,
}

pub fn newton_elementary(
    config: &Configuration,
    k_max: usize,
    kernel: &FourierKernel,
) -> Result<NewtonReport> {
    if config.dim() != 1 {
        return Err(Error::NotOneDimensional);
    }
    let n = config.len();
    if k_max < 1 || 2 * k_max > n {
        return Err(Error::NewtonRange { k: k_max, n });
    }
    let nf = n as f64;
    // power sums p_m = N b_m
    let b: Vec<Complex64> = (1..=k_max as i64)
        .map(|m| structure_factor(config, &[m]))
        .collect();
    let p: Vec<Complex64> = b.iter().map(|&bm| bm * nf).collect();
    let mut e = vec![Complex64::new(1.0, 0.0)]; // e_0
    for k in 1..=k_max {
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 1..=k {
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * e[k - m] * p[m - 1];
        }
        e.push(acc / k as f64);
    }
    let defects: Vec<f64> = (1..=k_max)
        .map(|k| {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            (e[k] - sign * (nf / k as f64) * b[k - 1]).norm()
        })
        .collect();
    let decay = check_decay_1d(kernel, n)?;
    let bound_rhs: Vec<f64> = (1..=k_max)
        .map(|k| {
            let ak = kernel.coefficient(&[k as i64]).unwrap_or(f64::NAN);
            2.0 * decay.c0 * nf * nf * decay.epsilon / ((k * k) as f64 * ak)
        })
        .collect();
    Ok(NewtonReport {
        n,
        k: k_max,
        e: e[1..].iter().map(|z| [z.re, z.im]).collect(),
        defects,
        bound_rhs,
    })
}

/// The triplet phase factor `1 + e(m/L) + e((m+n)/(2L))` that multiplies the
/// generator sum in the structure factor of a triplet configuration.
pub fn triplet_factor(m: i64, n: i64, l: usize) -> Result<Complex64> {
    if l % 3 != 0 {
        return Err(Error::LNotDivisibleBy3);
    }
    if l < 3 {
        return Err(Error::LTooSmall(l));
    }
    let lf = l as f64;
    let e = |s: f64| Complex64::new(0.0, 2.0 * PI * s).exp();
    Ok(Complex64::new(1.0, 0.0) + e(m as f64 / lf) + e((m + n) as f64 / (2.0 * lf)))
}

/// Exceptional modes are the zero set of the triplet factor; everywhere else
/// the factor modulus is at least `1/L`.
pub fn is_exceptional(m: i64, n: i64, l: usize) -> Result<bool> {
    Ok(triplet_factor(m, n, l)?.norm() < 1.0 / l as f64)
}

/// The mode set `S_1 = {(m, n) != 0 : max(3|m|/2, |n|) <= L}`.
pub fn s1_modes(l: usize) -> Vec<[i64; 2]> {
    let li = l as i64;
    let mut v = Vec::new();
    for m in -(2 * li / 3)..=(2 * li / 3) {
        for n in -li..=li {
            if (m, n) != (0, 0) && 3 * m.abs() <= 2 * li {
                v.push([m, n]);
            }
        }
    }
    v
}

/// Gram-matrix deviation of the lattice tangent basis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisCheck {
    pub l: usize,
    pub max_offdiag: f64,
    pub max_diag_error: f64,
}

/// Builds the vectors `V_mn` indexed over `I_L = [1, 2L/3] x [1, L]` with
/// entries proportional to `exp(i pi (6mk + 4nj + n(1 + (-1)^k)) / (2L))`,
/// normalized to unit length, and reports the worst Gram-matrix deviations
/// from exact orthonormality.
pub fn orthonormality_check(l: usize) -> Result<BasisCheck> {
    if l % 3 != 0 {
        return Err(Error::LNotDivisibleBy3);
    }
    if l < 3 {
        return Err(Error::LTooSmall(l));
    }
    let g = 2 * l * l / 3;
    let norm = (3.0 / (2.0 * (l * l) as f64)).sqrt();
    let lf = l as f64;
    let mut vectors = Vec::with_capacity(g);
    for m in 1..=(2 * l / 3) {
        for n in 1..=l {
            let mut v = Vec::with_capacity(g);
            for k in 1..=(2 * l / 3) {
                let parity = if k % 2 == 0 { 2.0 } else { 0.0 };
                for j in 1..=l {
                    let arg = PI * (6.0 * (m * k) as f64 + 4.0 * (n * j) as f64 + n as f64 * parity)
                        / (2.0 * lf);
                    v.push(Complex64::new(0.0, arg).exp() * norm);
                }
            }
            vectors.push(v);
        }
    }
    debug_assert_eq!(vectors.len(), g);
    let mut max_offdiag: f64 = 0.0;
    let mut max_diag_error: f64 = 0.0;
    for (i, vi) in vectors.iter().enumerate() {
        for (j, vj) in vectors.iter().enumerate() {
            let mut inner = Complex64::new(0.0, 0.0);
            for (a, b) in vi.iter().zip(vj) {
                inner += a * b.conj();
            }
            if i == j {
                max_diag_error = max_diag_error.max((inner.re - 1.0).abs().max(inner.im.abs()));
            } else {
                max_offdiag = max_offdiag.max(inner.norm());
            }
        }
    }
    Ok(BasisCheck {
        l,
        max_offdiag,
        max_diag_error,
    })
}

/// Positivity audit of the quadratic form built from the coefficient pairs
/// `a = 4(L/3 - m)^2 + 4L^2/9`, `b = 4(L/3 - m)(L/2 - n)`,
/// `c = 4(L/2 - n)^2 + L^2` over `(m, n) in [1, 2L/3] x [1, L]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadraticFormReport {
    pub l: usize,
    pub min_value: f64,
    pub argmin: (usize, usize),
    pub threshold: f64,
    pub passed: bool,
    /// Largest deviation from the closed-form expansion
    /// `ac - b^2 = 4L^2(L/3-m)^2 + (16/9)L^2(L/2-n)^2 + (4/9)L^4`.
    pub expansion_error: f64,
}

pub fn quadratic_form_check(l: usize) -> Result<QuadraticFormReport> {
    if l < 3 {
        return Err(Error::LTooSmall(l));
    }
    let lf = l as f64;
    let mut min_value = f64::INFINITY;
    let mut argmin = (1, 1);
    let mut expansion_error: f64 = 0.0;
    for m in 1..=(2 * l / 3) {
        for n in 1..=l {
            let dm = lf / 3.0 - m as f64;
            let dn = lf / 2.0 - n as f64;
            let a = 4.0 * dm * dm + 4.0 * lf * lf / 9.0;
            let b = 4.0 * dm * dn;
            let c = 4.0 * dn * dn + lf * lf;
            let v = a * c - b * b;
            let closed = 4.0 * lf * lf * dm * dm + 16.0 / 9.0 * lf * lf * dn * dn
                + 4.0 / 9.0 * lf.powi(4);
            expansion_error = expansion_error.max((v - closed).abs() / closed);
            if v < min_value {
                min_value = v;
                argmin = (m, n);
            }
        }
    }
    let threshold = 26.0 / 9.0 * lf * lf;
    Ok(QuadraticFormReport {
        l,
        min_value,
        argmin,
        threshold,
        passed: min_value >= threshold,
        expansion_error,
    })
}

/// Separation certificate: `min_separation(config) >= c / L`.
pub fn separation_check(config: &Configuration, l: usize, c: f64) -> Result<bool> {
    Ok(min_separation(config)? >= c / l as f64)
}

/// A certificate outcome with the numbers behind it, for aggregation into a
/// certification document.
#[derive(Debug, Clone, Serialize)]
pub struct CertificateBlock {
    pub name: String,
    pub values: serde_json::Value,
    pub threshold: f64,
    pub passed: bool,
}
