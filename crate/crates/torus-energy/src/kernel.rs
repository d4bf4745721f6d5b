use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cell::Cell;
use crate::error::{Error, Result};

/// Iterate all integer modes with max-norm at most `cap`, in lexicographic
/// order. The second component is always 0 in one dimension.
pub fn mode_box(dim: usize, cap: usize) -> Vec<[i64; 2]> {
    let m = cap as i64;
    let mut out = Vec::new();
    match dim {
        1 => {
            for n in -m..=m {
                out.push([n, 0]);
            }
        }
        _ => {
            for p in -m..=m {
                for q in -m..=m {
                    out.push([p, q]);
                }
            }
        }
    }
    out
}

/// Periodic pair potential stored through its Fourier coefficients
/// `a_n >= 0` on the dense mode box `{-M..M}^d`.
///
/// The expansion convention is `f(x) = sum_n a_n e(n . L^{-1} x)` with
/// `e(s) = exp(2 pi i s)` and `L = diag(periods)`; coefficient symmetry
/// `a_n = a_{-n}` makes `f` real. `tail_bound` is a certified upper bound
/// on the sum of all omitted coefficients.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FourierKernel {
    cell: Cell,
    mode_cap: usize,
    coeffs: Vec<f64>,
    tail_bound: f64,
}

impl FourierKernel {
    fn index(&self, mode: &[i64; 2]) -> Option<usize> {
        let m = self.mode_cap as i64;
        match self.cell.dim() {
            1 => {
                if mode[0].abs() > m || mode[1] != 0 {
                    None
                } else {
                    Some((mode[0] + m) as usize)
                }
            }
            _ => {
                if mode[0].abs() > m || mode[1].abs() > m {
                    None
                } else {
                    let side = 2 * m + 1;
                    Some(((mode[0] + m) * side + (mode[1] + m)) as usize)
                }
            }
        }
    }

    fn from_fn(cell: Cell, mode_cap: usize, tail_bound: f64, f: impl Fn(&[i64; 2]) -> f64) -> Self {
        let modes = mode_box(cell.dim(), mode_cap);
        let coeffs = modes.iter().map(f).collect();
        FourierKernel {
            cell,
            mode_cap,
            coeffs,
            tail_bound,
        }
    }

    /// Periodized Gaussian `f(x) = sum_j exp(-t |x - L j|^2)`.
    ///
    /// Coefficients `a_n = (pi/t)^{d/2} / |Q| * exp(-pi^2 |L^{-1} n|^2 / t)`.
    pub fn gaussian(t: f64, cell: &Cell, mode_cap: usize) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::NonPositiveT(t));
        }
        if mode_cap < 1 {
            return Err(Error::ModeCapTooSmall(mode_cap));
        }
        let d = cell.dim();
        let amp = (PI / t).powf(d as f64 / 2.0) / cell.volume();
        let periods = cell.periods().to_vec();
        let decay: Vec<f64> = periods.iter().map(|l| PI * PI / (t * l * l)).collect();
        let tail = amp * tensored_gaussian_tail(&decay, mode_cap);
        Ok(Self::from_fn(cell.clone(), mode_cap, tail, |mode| {
            let s: f64 = mode
                .iter()
                .zip(&decay)
                .map(|(&n, &c)| c * (n * n) as f64)
                .sum();
            amp * (-s).exp()
        }))
    }

    /// Spectral heat kernel: `a_0 = 0`, `a_w = exp(-4 pi^2 |L^{-1} w|^2 t)`.
    pub fn heat(t: f64, cell: &Cell, mode_cap: usize) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::NonPositiveT(t));
        }
        if mode_cap < 1 {
            return Err(Error::ModeCapTooSmall(mode_cap));
        }
        let periods = cell.periods().to_vec();
        let decay: Vec<f64> = periods
            .iter()
            .map(|l| 4.0 * PI * PI * t / (l * l))
            .collect();
        let tail = tensored_gaussian_tail(&decay, mode_cap);
        Ok(Self::from_fn(cell.clone(), mode_cap, tail, |mode| {
            if mode[0] == 0 && mode[1] == 0 {
                return 0.0;
            }
            let s: f64 = mode
                .iter()
                .zip(&decay)
                .map(|(&n, &c)| c * (n * n) as f64)
                .sum();
            (-s).exp()
        }))
    }

    /// Green's kernel of the periodic inverse Laplacian:
    /// `a_0 = 0`, `a_w = 1 / (4 pi^2 |L^{-1} w|^2)`.
    ///
    /// This kernel violates the rapid-decay hypotheses and is flagged as such
    /// by the decay checks; it is provided for exploration. In two dimensions
    /// the omitted-coefficient sum diverges, so `tail_bound` is infinite.
    pub fn inverse_laplacian(cell: &Cell, mode_cap: usize) -> Result<Self> {
        if mode_cap < 1 {
            return Err(Error::ModeCapTooSmall(mode_cap));
        }
        let periods = cell.periods().to_vec();
        let tail = match cell.dim() {
            // sum_{|n|>M} l^2/(4 pi^2 n^2) <= l^2/(2 pi^2 M) by integral comparison
            1 => periods[0] * periods[0] / (2.0 * PI * PI * mode_cap as f64),
            _ => f64::INFINITY,
        };
        let p = periods.clone();
        Ok(Self::from_fn(cell.clone(), mode_cap, tail, move |mode| {
            if mode[0] == 0 && mode[1] == 0 {
                return 0.0;
            }
            let s: f64 = mode
                .iter()
                .zip(&p)
                .map(|(&n, &l)| (n as f64 / l).powi(2))
                .sum();
            1.0 / (4.0 * PI * PI * s)
        }))
    }

    /// Kernel from an arbitrary coefficient rule. Values are symmetrized
    /// (`a_n = a_{-n}`); negative or non-finite values are an error.
    pub fn from_rule(cell: &Cell, mode_cap: usize, rule: impl Fn(&[i64; 2]) -> f64) -> Result<Self> {
        if mode_cap < 1 {
            return Err(Error::ModeCapTooSmall(mode_cap));
        }
        let modes = mode_box(cell.dim(), mode_cap);
        let mut values = Vec::with_capacity(modes.len());
        for m in &modes {
            let v = rule(m);
            if !v.is_finite() {
                return Err(Error::NonFiniteCoefficient { mode: mode_vec(m, cell.dim()) });
            }
            if v < 0.0 {
                return Err(Error::NegativeCoefficient {
                    mode: mode_vec(m, cell.dim()),
                    value: v,
                });
            }
            values.push(v);
        }
        let mut kernel = FourierKernel {
            cell: cell.clone(),
            mode_cap,
            coeffs: values,
            tail_bound: 0.0,
        };
        // symmetrize in place
        let coeffs = kernel.coeffs.clone();
        for (i, m) in modes.iter().enumerate() {
            let j = kernel.index(&[-m[0], -m[1]]).expect("mirror mode stored");
            kernel.coeffs[i] = 0.5 * (coeffs[i] + coeffs[j]);
        }
        Ok(kernel)
    }

    /// Kernel from an explicit mode -> coefficient table; unlisted modes are 0.
    pub fn from_table(cell: &Cell, mode_cap: usize, entries: &[(Vec<i64>, f64)]) -> Result<Self> {
        let d = cell.dim();
        let mut map = std::collections::HashMap::new();
        for (mode, value) in entries {
            if mode.len() != d {
                return Err(Error::KernelSpec(format!(
                    "table mode {:?} has wrong dimension, expected {}",
                    mode, d
                )));
            }
            let key = [mode[0], if d == 2 { mode[1] } else { 0 }];
            map.insert(key, *value);
        }
        Self::from_rule(cell, mode_cap, |m| {
            map.get(m)
                .or_else(|| map.get(&[-m[0], -m[1]]))
                .copied()
                .unwrap_or(0.0)
        })
    }

    pub fn cell(&self) -> &Cell {
        &self.cell
    }

    pub fn dim(&self) -> usize {
        self.cell.dim()
    }

    pub fn mode_cap(&self) -> usize {
        self.mode_cap
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    /// Stored coefficient at `mode`; errors outside the box.
    pub fn coefficient(&self, mode: &[i64]) -> Result<f64> {
        let m = [mode[0], if mode.len() > 1 { mode[1] } else { 0 }];
        self.index(&m)
            .map(|i| self.coeffs[i])
            .ok_or(Error::ModeOutsideBox {
                mode: mode.to_vec(),
                cap: self.mode_cap,
            })
    }

    /// Coefficient lookup without bounds error.
    pub fn coefficient_opt(&self, mode: &[i64; 2]) -> Option<f64> {
        self.index(mode).map(|i| self.coeffs[i])
    }

    /// All stored `(mode, coefficient)` pairs in lexicographic mode order.
    pub fn modes(&self) -> impl Iterator<Item = ([i64; 2], f64)> + '_ {
        mode_box(self.cell.dim(), self.mode_cap)
            .into_iter()
            .zip(self.coeffs.iter().copied())
    }

    /// `f(0) = sum_n a_n` of the truncated kernel.
    pub fn value_at_zero(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    /// Evaluate the truncated expansion at a point of the cell:
    /// `sum_n a_n cos(2 pi n . L^{-1} x)`. Truncation error is at most
    /// `tail_bound`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let x = self.cell.wrap(x);
        let periods = self.cell.periods();
        let mut sum = 0.0;
        for (mode, a) in self.modes() {
            if a == 0.0 {
                continue;
            }
            let mut phase = mode[0] as f64 * x[0] / periods[0];
            if periods.len() > 1 {
                phase += mode[1] as f64 * x[1] / periods[1];
            }
            sum += a * (2.0 * PI * phase).cos();
        }
        sum
    }

    /// Power-tempered copy: coefficients `a_n^gamma` (zeros stay zero).
    /// Used by the minimizer's continuation schedule; the tail bound is not
    /// carried over.
    pub(crate) fn tempered(&self, gamma: f64) -> FourierKernel {
        FourierKernel {
            cell: self.cell.clone(),
            mode_cap: self.mode_cap,
            coeffs: self
                .coeffs
                .iter()
                .map(|&a| if a > 0.0 { (gamma * a.ln()).exp() } else { 0.0 })
                .collect(),
            tail_bound: 0.0,
        }
    }

    /// CSV table of the stored coefficients, rows `n1[,n2],a`.
    pub fn table_csv(&self) -> String {
        let mut out = String::new();
        if self.dim() == 1 {
            out.push_str("n1,a\n");
            for (mode, a) in self.modes() {
                out.push_str(&format!("{},{:.16e}\n", mode[0], a));
            }
        } else {
            out.push_str("n1,n2,a\n");
            for (mode, a) in self.modes() {
                out.push_str(&format!("{},{},{:.16e}\n", mode[0], mode[1], a));
            }
        }
        out
    }
}

fn mode_vec(mode: &[i64; 2], dim: usize) -> Vec<i64> {
    mode[..dim].to_vec()
}

/// Certified bound on `sum_{n outside box} exp(-sum_i c_i n_i^2)` using the
/// per-axis comparison `sum_{n>M} e^{-c n^2} <= e^{-c M^2} / (1 - e^{-c(2M+1)})`
/// tensored across dimensions.
fn tensored_gaussian_tail(decay: &[f64], cap: usize) -> f64 {
    let m = cap as f64;
    let one_sided: Vec<f64> = decay
        .iter()
        .map(|&c| (-c * m * m).exp() / (1.0 - (-c * (2.0 * m + 1.0)).exp()))
        .collect();
    let full: Vec<f64> = decay
        .iter()
        .map(|&c| (1.0 + (-c).exp()) / (1.0 - (-c).exp()))
        .collect();
    match decay.len() {
        1 => 2.0 * one_sided[0],
        _ => 2.0 * one_sided[0] * full[1] + full[0] * 2.0 * one_sided[1],
    }
}

/// Outcome of the coefficient-decay hypothesis checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayReport {
    /// Best constant observed in the 1D decay hypothesis, or the
    /// max-coefficient ratio in 2D.
    pub c0: f64,
    /// Tail sum at lattice-multiple modes (eps_N in 1D, eps_L in 2D).
    pub epsilon: f64,
    /// Second-moment tail sum (2D only, zero in 1D).
    pub epsilon_tilde: f64,
    /// Finite-size hypothesis ratio compared against the threshold.
    pub ratio: f64,
    /// Exponential rate used in the 2D ratio (zero in 1D).
    pub lambda: f64,
    pub passed: bool,
}

/// Default finite-size pass threshold for the decay ratios.
pub const DEFAULT_RATIO_THRESHOLD: f64 = 1.0;
/// Default exponential rate for the 2D decay check.
pub const DEFAULT_LAMBDA: f64 = 0.1;

/// 1D decay check: computes the hypothesis constant
/// `C0 = max_k (max_{m<=k} 1/(m^2 a_m)) k^2 a_k`, the tail sum
/// `eps_N = sum_{n != 0} a_{nN}` (over stored modes, plus the kernel tail
/// bound) and the finite-size ratio `N^2 eps_N / a_{floor(N/2)}`.
pub fn check_decay_1d(kernel: &FourierKernel, n_points: usize) -> Result<DecayReport> {
    check_decay_1d_with(kernel, n_points, DEFAULT_RATIO_THRESHOLD)
}

pub fn check_decay_1d_with(
    kernel: &FourierKernel,
    n_points: usize,
    threshold: f64,
) -> Result<DecayReport> {
    if kernel.dim() != 1 {
        return Err(Error::NotOneDimensional);
    }
    let cap = kernel.mode_cap();
    if n_points < 2 || n_points > cap {
        return Err(Error::InvalidParameter(format!(
            "need 2 <= N <= mode_cap, got N={}, mode_cap={}",
            n_points, cap
        )));
    }
    let a = |k: i64| kernel.coefficient_opt(&[k, 0]).unwrap_or(0.0);
    // positivity must hold through the denominator mode floor(N/2); far
    // modes may underflow to zero at working precision without spoiling
    // the evaluated quantities
    for k in 1..=(n_points / 2).max(1) as i64 {
        if a(k) <= 0.0 {
            return Err(Error::PositivityViolated { mode: vec![k] });
        }
    }
    // scan over the leading positive prefix; far modes that underflowed to
    // zero are treated as beyond the stored box
    let mut c0: f64 = 0.0;
    let mut inner_max = f64::MIN;
    for k in 1..=cap as i64 {
        let ak = a(k);
        if ak <= 0.0 {
            break;
        }
        let kk = (k * k) as f64;
        inner_max = inner_max.max(1.0 / (kk * ak));
        c0 = c0.max(inner_max * kk * ak);
    }
    let mut eps = kernel.tail_bound();
    let mut j = n_points as i64;
    while j <= cap as i64 {
        eps += a(j) + a(-j);
        j += n_points as i64;
    }
    let half = (n_points / 2) as i64;
    let ratio = (n_points * n_points) as f64 * eps / a(half);
    Ok(DecayReport {
        c0,
        epsilon: eps,
        epsilon_tilde: 0.0,
        ratio,
        lambda: 0.0,
        passed: ratio < threshold,
    })
}

/// 2D decay check for the triplet setting: computes
/// `eps_L = 1/2 sum_{(p,q) != 0} a_{pL,qL} [1 + (-1)^{p+q}]`, its
/// second-moment variant `eps~_L`, and the ratio
/// `e^{lambda L} eps~_L / a_{2L/3, L}`.
pub fn check_decay_2d(kernel: &FourierKernel, l: usize, lambda: f64) -> Result<DecayReport> {
    check_decay_2d_with(kernel, l, lambda, DEFAULT_RATIO_THRESHOLD)
}

pub fn check_decay_2d_with(
    kernel: &FourierKernel,
    l: usize,
    lambda: f64,
    threshold: f64,
) -> Result<DecayReport> {
    if kernel.dim() != 2 {
        return Err(Error::NotTwoDimensional);
    }
    if l % 3 != 0 {
        return Err(Error::LNotDivisibleBy3);
    }
    if l < 3 {
        return Err(Error::LTooSmall(l));
    }
    let cap = kernel.mode_cap();
    if l > cap {
        return Err(Error::InvalidParameter(format!(
            "need L <= mode_cap, got L={}, mode_cap={}",
            l, cap
        )));
    }
    let li = l as i64;
    let corner = [2 * li / 3, li];
    let a_corner = kernel.coefficient(&corner)?;
    if a_corner <= 0.0 {
        return Err(Error::PositivityViolated {
            mode: corner.to_vec(),
        });
    }
    let mut eps = 0.0;
    let mut eps_tilde = 0.0;
    let pmax = (cap as i64) / li;
    for p in -pmax..=pmax {
        for q in -pmax..=pmax {
            if p == 0 && q == 0 {
                continue;
            }
            let parity = if (p + q) % 2 == 0 { 2.0 } else { 0.0 };
            if parity == 0.0 {
                continue;
            }
            let apq = kernel.coefficient_opt(&[p * li, q * li]).unwrap_or(0.0);
            eps += 0.5 * parity * apq;
            eps_tilde += 0.5 * parity * ((p * p + q * q) as f64) * apq;
        }
    }
    eps_tilde *= (l * l) as f64;
    let mut a_max: f64 = 0.0;
    for m in -(2 * li / 3)..=(2 * li / 3) {
        for n in -li..=li {
            a_max = a_max.max(kernel.coefficient_opt(&[m, n]).unwrap_or(0.0));
        }
    }
    let ratio = (lambda * l as f64).exp() * eps_tilde / a_corner;
    Ok(DecayReport {
        c0: a_corner / a_max,
        epsilon: eps,
        epsilon_tilde: eps_tilde,
        ratio,
        lambda,
        passed: ratio < threshold,
    })
}

/// JSON description of a kernel, as ingested by the CLI:
/// `{"type": "gaussian"|"heat"|"inv_laplacian"|"table", "t": .., "cell": [..],
///   "mode_cap": .., "table": [[n1, n2, a], ..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelSpec {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    pub cell: Vec<f64>,
    pub mode_cap: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<f64>>>,
}

impl KernelSpec {
    pub fn build(&self) -> Result<FourierKernel> {
        let cell = Cell::new(self.cell.clone())?;
        match self.kind.as_str() {
            "gaussian" => {
                let t = self
                    .t
                    .ok_or_else(|| Error::KernelSpec("gaussian kernel needs \"t\"".into()))?;
                FourierKernel::gaussian(t, &cell, self.mode_cap)
            }
            "heat" => {
                let t = self
                    .t
                    .ok_or_else(|| Error::KernelSpec("heat kernel needs \"t\"".into()))?;
                FourierKernel::heat(t, &cell, self.mode_cap)
            }
            "inv_laplacian" => FourierKernel::inverse_laplacian(&cell, self.mode_cap),
            "table" => {
                let rows = self
                    .table
                    .as_ref()
                    .ok_or_else(|| Error::KernelSpec("table kernel needs \"table\"".into()))?;
                let d = cell.dim();
                let mut entries = Vec::with_capacity(rows.len());
                for row in rows {
                    if row.len() != d + 1 {
                        return Err(Error::KernelSpec(format!(
                            "table row {:?} must have {} entries",
                            row,
                            d + 1
                        )));
                    }
                    let mut mode = Vec::with_capacity(d);
                    for &c in &row[..d] {
                        if c.fract() != 0.0 {
                            return Err(Error::KernelSpec(format!(
                                "non-integer mode component {} in table",
                                c
                            )));
                        }
                        mode.push(c as i64);
                    }
                    entries.push((mode, row[d]));
                }
                FourierKernel::from_table(&cell, self.mode_cap, &entries)
            }
            other => Err(Error::KernelSpec(format!("unknown kernel type {:?}", other))),
        }
    }
}
