use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rectangular torus cell `Q = [0, l_1) x ... x [0, l_d)` with `d` in {1, 2}.
///
/// The diagonal period matrix `diag(l_1, ..., l_d)` maps integer vectors to
/// the period lattice; all distances are taken modulo that lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cell {
    periods: Vec<f64>,
}

impl Cell {
    pub fn new(periods: Vec<f64>) -> Result<Self> {
        if periods.is_empty() || periods.len() > 2 {
            return Err(Error::BadDimension(periods.len()));
        }
        if periods.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::NonPositivePeriod);
        }
        Ok(Cell { periods })
    }

    /// The unit circle `[0, 1)`.
    pub fn unit_1d() -> Self {
        Cell { periods: vec![1.0] }
    }

    /// The rectangle `[0, sqrt(3)) x [0, 1)` hosting the triangular lattice.
    pub fn rect_2d() -> Self {
        Cell {
            periods: vec![3.0_f64.sqrt(), 1.0],
        }
    }

    pub fn dim(&self) -> usize {
        self.periods.len()
    }

    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    /// Cell volume `|Q| = prod l_i`.
    pub fn volume(&self) -> f64 {
        self.periods.iter().product()
    }

    /// Wrap a single coordinate into `[0, l)`.
    pub fn wrap_coord(x: f64, l: f64) -> f64 {
        let mut y = x.rem_euclid(l);
        // rem_euclid can round up to l for tiny negative inputs
        if y >= l {
            y = 0.0;
        }
        y
    }

    /// Wrap a point into the cell, coordinate by coordinate.
    pub fn wrap(&self, p: &[f64]) -> Vec<f64> {
        p.iter()
            .zip(&self.periods)
            .map(|(&x, &l)| Self::wrap_coord(x, l))
            .collect()
    }

    /// Signed displacement `x - y` wrapped into `[-l/2, l/2)` per coordinate,
    /// i.e. the minimal-image difference vector.
    pub fn min_image(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(y)
            .zip(&self.periods)
            .map(|((&a, &b), &l)| {
                let mut d = (a - b).rem_euclid(l);
                if d >= l / 2.0 {
                    d -= l;
                }
                d
            })
            .collect()
    }

    /// Periodic (torus) distance: `min_i |x - y - L i|` over integer images.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        self.min_image(x, y)
            .iter()
            .map(|d| d * d)
            .sum::<f64>()
            .sqrt()
    }
}
