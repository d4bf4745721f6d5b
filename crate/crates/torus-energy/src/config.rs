use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cell::Cell;
use crate::error::{Error, Result};

/// Triplet constraint metadata: the configuration is the union of the first
/// `2L^2/3` points (the free generators) with two rigidly shifted copies,
/// shifted by `(sqrt(3)/(2L), 1/(2L))` and `(sqrt(3)/L, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletConstraint {
    pub triplet: usize,
}

/// N points on a rectangular torus, coordinates wrapped into the cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub cell: Cell,
    pub points: Vec<Vec<f64>>,
    pub constraint: Option<TripletConstraint>,
}

/// The two triplet shift vectors for a given `L` on the `(sqrt(3), 1)` cell.
pub fn triplet_shifts(l: usize) -> ([f64; 2], [f64; 2]) {
    let s3 = 3.0_f64.sqrt();
    let lf = l as f64;
    ([s3 / (2.0 * lf), 1.0 / (2.0 * lf)], [s3 / lf, 0.0])
}

fn require_triplet_cell(cell: &Cell) -> Result<()> {
    if cell != &Cell::rect_2d() {
        return Err(Error::TripletCell);
    }
    Ok(())
}

fn check_l(l: usize) -> Result<()> {
    if l < 3 {
        return Err(Error::LTooSmall(l));
    }
    if l % 3 != 0 {
        return Err(Error::LNotDivisibleBy3);
    }
    Ok(())
}

impl Configuration {
    pub fn new(cell: Cell, points: Vec<Vec<f64>>) -> Result<Self> {
        let d = cell.dim();
        if points.is_empty() {
            return Err(Error::BadPointCount("need at least one point".into()));
        }
        let wrapped = points
            .iter()
            .map(|p| {
                if p.len() != d {
                    Err(Error::BadDimension(p.len()))
                } else {
                    Ok(cell.wrap(p))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Configuration {
            cell,
            points: wrapped,
            constraint: None,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.cell.dim()
    }

    /// Number of free points: all of them, or `2L^2/3` under the triplet
    /// constraint.
    pub fn n_generators(&self) -> usize {
        match self.constraint {
            Some(TripletConstraint { triplet: l }) => 2 * l * l / 3,
            None => self.points.len(),
        }
    }

    /// The free generator points (a prefix of `points`).
    pub fn generators(&self) -> &[Vec<f64>] {
        &self.points[..self.n_generators()]
    }

    /// Rigid translation by `shift`, wrapped back into the cell.
    pub fn translate(&self, shift: &[f64]) -> Configuration {
        let points = self
            .points
            .iter()
            .map(|p| {
                self.cell
                    .wrap(&p.iter().zip(shift).map(|(&x, &s)| x + s).collect::<Vec<_>>())
            })
            .collect();
        Configuration {
            cell: self.cell.clone(),
            points,
            constraint: self.constraint,
        }
    }

    /// Mean of the generator points (raw coordinates of the wrapped
    /// representatives).
    pub fn generator_centroid(&self) -> Vec<f64> {
        let d = self.dim();
        let gens = self.generators();
        let mut c = vec![0.0; d];
        for p in gens {
            for i in 0..d {
                c[i] += p[i];
            }
        }
        for v in &mut c {
            *v /= gens.len() as f64;
        }
        c
    }

    /// Translate so that the generator centroid is the cell midpoint
    /// `(l_1/2, ..., l_d/2)`. For a triplet configuration this realizes the
    /// centroid normalization of the 2D setup.
    pub fn normalize_centroid(&self) -> Configuration {
        let c = self.generator_centroid();
        let shift: Vec<f64> = self
            .cell
            .periods()
            .iter()
            .zip(&c)
            .map(|(&l, &x)| l / 2.0 - x)
            .collect();
        self.translate(&shift)
    }

    /// Verify the two triplet shift relations to the given tolerance
    /// (periodic metric). Returns the largest violation.
    pub fn triplet_residual(&self) -> Result<f64> {
        let l = match self.constraint {
            Some(TripletConstraint { triplet: l }) => l,
            None => {
                return Err(Error::ConstraintMismatch(
                    "configuration carries no triplet constraint".into(),
                ))
            }
        };
        let g = 2 * l * l / 3;
        if self.points.len() != 3 * g {
            return Err(Error::ConstraintMismatch(format!(
                "expected {} points under triplet({}), got {}",
                3 * g,
                l,
                self.points.len()
            )));
        }
        let (u, v) = triplet_shifts(l);
        let mut worst: f64 = 0.0;
        for k in 0..g {
            let su = self.cell.wrap(&[self.points[k][0] + u[0], self.points[k][1] + u[1]]);
            let sv = self.cell.wrap(&[self.points[k][0] + v[0], self.points[k][1] + v[1]]);
            worst = worst.max(self.cell.distance(&su, &self.points[k + g]));
            worst = worst.max(self.cell.distance(&sv, &self.points[k + 2 * g]));
        }
        Ok(worst)
    }
}

/// Periodic distance between two points of a cell.
pub fn periodic_distance(x: &[f64], y: &[f64], cell: &Cell) -> f64 {
    cell.distance(x, y)
}

/// The equidistant N-point configuration `x_k = (2k - N - 1) / (2N)` on the
/// unit circle.
pub fn equidistant_1d(n: usize) -> Result<Configuration> {
    if n < 1 {
        return Err(Error::BadPointCount(format!("N must be >= 1, got {}", n)));
    }
    let cell = Cell::unit_1d();
    let points = (1..=n)
        .map(|k| vec![Cell::wrap_coord((2 * k as i64 - n as i64 - 1) as f64 / (2.0 * n as f64), 1.0)])
        .collect();
    Ok(Configuration {
        cell,
        points,
        constraint: None,
    })
}

/// The square lattice `L . (n / K)` for `n` in `{0..K-1}^d`; `N = K^d`.
pub fn square_lattice(k: usize, cell: &Cell) -> Result<Configuration> {
    if k < 1 {
        return Err(Error::BadPointCount(format!("K must be >= 1, got {}", k)));
    }
    let d = cell.dim();
    let periods = cell.periods();
    let mut points = Vec::with_capacity(k.pow(d as u32));
    match d {
        1 => {
            for i in 0..k {
                points.push(vec![periods[0] * i as f64 / k as f64]);
            }
        }
        _ => {
            for i in 0..k {
                for j in 0..k {
                    points.push(vec![
                        periods[0] * i as f64 / k as f64,
                        periods[1] * j as f64 / k as f64,
                    ]);
                }
            }
        }
    }
    Ok(Configuration {
        cell: cell.clone(),
        points,
        constraint: None,
    })
}

/// Canonical generator set of the triangular lattice: for
/// `(k, j) in [1, 2L/3] x [1, L]`,
/// `x = 3 sqrt(3) (2k - 1) / (4L)`, `y = (4j + 1 + (-1)^k) / (4L)`.
pub fn triangular_generators(l: usize) -> Result<Vec<Vec<f64>>> {
    check_l(l)?;
    let s3 = 3.0_f64.sqrt();
    let lf = l as f64;
    let mut gens = Vec::with_capacity(2 * l * l / 3);
    for k in 1..=(2 * l / 3) {
        let x = 3.0 * s3 * (2.0 * k as f64 - 1.0) / (4.0 * lf);
        let parity = if k % 2 == 0 { 2.0 } else { 0.0 };
        for j in 1..=l {
            let y = (4.0 * j as f64 + parity) / (4.0 * lf);
            gens.push(vec![x, y]);
        }
    }
    Ok(gens)
}

/// The triangular lattice with `N = 2L^2` points on the `(sqrt(3), 1)` cell,
/// built by expanding the canonical generators through the triplet shifts.
pub fn triangular_lattice(l: usize) -> Result<Configuration> {
    expand_triplet(&triangular_generators(l)?, l)
}

/// Expand `2L^2/3` free generator points into the full `2L^2`-point
/// configuration via the two triplet shifts, recording the constraint.
pub fn expand_triplet(free_points: &[Vec<f64>], l: usize) -> Result<Configuration> {
    check_l(l)?;
    let g = 2 * l * l / 3;
    if free_points.len() != g {
        return Err(Error::GeneratorCount {
            expected: g,
            got: free_points.len(),
        });
    }
    let cell = Cell::rect_2d();
    let (u, v) = triplet_shifts(l);
    let mut points = Vec::with_capacity(3 * g);
    for p in free_points {
        if p.len() != 2 {
            return Err(Error::BadDimension(p.len()));
        }
        points.push(cell.wrap(p));
    }
    for shift in [u, v] {
        for k in 0..g {
            points.push(cell.wrap(&[points[k][0] + shift[0], points[k][1] + shift[1]]));
        }
    }
    Ok(Configuration {
        cell,
        points,
        constraint: Some(TripletConstraint { triplet: l }),
    })
}

/// Uniform random configuration, reproducible per seed. Under the triplet
/// constraint only the generators are sampled and then expanded, and `n`
/// must equal `2L^2`.
pub fn random_configuration(
    n: usize,
    cell: &Cell,
    seed: u64,
    constraint: Option<TripletConstraint>,
) -> Result<Configuration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match constraint {
        None => {
            if n < 1 {
                return Err(Error::BadPointCount("N must be >= 1".into()));
            }
            let d = cell.dim();
            let periods = cell.periods();
            let points = (0..n)
                .map(|_| (0..d).map(|i| rng.gen::<f64>() * periods[i]).collect())
                .collect();
            Ok(Configuration {
                cell: cell.clone(),
                points,
                constraint: None,
            })
        }
        Some(TripletConstraint { triplet: l }) => {
            check_l(l)?;
            require_triplet_cell(cell)?;
            if n != 2 * l * l {
                return Err(Error::ConstraintMismatch(format!(
                    "triplet({}) requires N = 2L^2 = {}, got {}",
                    l,
                    2 * l * l,
                    n
                )));
            }
            let periods = cell.periods();
            let g = 2 * l * l / 3;
            let gens: Vec<Vec<f64>> = (0..g)
                .map(|_| {
                    vec![
                        rng.gen::<f64>() * periods[0],
                        rng.gen::<f64>() * periods[1],
                    ]
                })
                .collect();
            expand_triplet(&gens, l)
        }
    }
}

/// Minimal pairwise periodic distance.
pub fn min_separation(config: &Configuration) -> Result<f64> {
    let n = config.len();
    if n < 2 {
        return Err(Error::TooFewPoints { need: 2, got: n });
    }
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            best = best.min(config.cell.distance(&config.points[i], &config.points[j]));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn equidistant_small_cases() {
        let c = equidistant_1d(2).unwrap();
        let mut xs: Vec<f64> = c.points.iter().map(|p| p[0]).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_relative_eq!(xs[0], 0.25, max_relative = 1e-15);
        assert_relative_eq!(xs[1], 0.75, max_relative = 1e-15);

        let c4 = equidistant_1d(4).unwrap();
        let mut xs: Vec<f64> = c4.points.iter().map(|p| p[0]).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in xs.windows(2) {
            assert_relative_eq!(w[1] - w[0], 0.25, max_relative = 1e-13);
        }
    }

    #[test]
    fn equidistant_min_separation() {
        for n in [2usize, 5, 16, 64] {
            let c = equidistant_1d(n).unwrap();
            assert_relative_eq!(min_separation(&c).unwrap(), 1.0 / n as f64, epsilon = 1e-13);
        }
    }

    #[test]
    fn square_lattice_cases() {
        let c = square_lattice(1, &Cell::unit_1d()).unwrap();
        assert_eq!(c.points, vec![vec![0.0]]);
        let c = square_lattice(2, &Cell::new(vec![1.0, 1.0]).unwrap()).unwrap();
        assert_eq!(c.len(), 4);
        let mut pts = c.points.clone();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(
            pts,
            vec![
                vec![0.0, 0.0],
                vec![0.0, 0.5],
                vec![0.5, 0.0],
                vec![0.5, 0.5]
            ]
        );
    }

    #[test]
    fn triangular_lattice_basics() {
        let c = triangular_lattice(3).unwrap();
        assert_eq!(c.len(), 18);
        assert_eq!(c.n_generators(), 6);
        // nearest neighbor of the triangular arrangement sits at distance 1/L
        assert_relative_eq!(min_separation(&c).unwrap(), 1.0 / 3.0, epsilon = 1e-12);
        assert!(c.triplet_residual().unwrap() < 1e-15);
        assert!(triangular_lattice(4).is_err());
        assert!(triangular_lattice(0).is_err());
    }

    #[test]
    fn triangular_centroid_after_normalization() {
        let c = triangular_lattice(3).unwrap().normalize_centroid();
        let cen = c.generator_centroid();
        assert_relative_eq!(cen[0], 3.0_f64.sqrt() / 2.0, epsilon = 1e-12);
        assert_relative_eq!(cen[1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn expand_triplet_matches_lattice_as_set() {
        let gens = triangular_generators(3).unwrap();
        let a = expand_triplet(&gens, 3).unwrap();
        let b = triangular_lattice(3).unwrap();
        let mut pa = a.points.clone();
        let mut pb = b.points.clone();
        let key = |p: &Vec<f64>| (p[0] * 1e12).round() as i64 * 1_000_000 + (p[1] * 1e12).round() as i64 % 1_000_000;
        pa.sort_by_key(key);
        pb.sort_by_key(key);
        for (x, y) in pa.iter().zip(&pb) {
            assert!(a.cell.distance(x, y) < 1e-12);
        }
    }

    #[test]
    fn expand_triplet_rejects_wrong_count() {
        let e = expand_triplet(&[vec![0.0, 0.0]], 3);
        assert!(matches!(e, Err(Error::GeneratorCount { expected: 6, got: 1 })));
    }

    #[test]
    fn random_configuration_is_deterministic() {
        let cell = Cell::unit_1d();
        let a = random_configuration(100, &cell, 42, None).unwrap();
        let b = random_configuration(100, &cell, 42, None).unwrap();
        assert_eq!(a, b);
        assert!(a.points.iter().all(|p| (0.0..1.0).contains(&p[0])));
        let c = random_configuration(100, &cell, 43, None).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_triplet_satisfies_closure() {
        let cell = Cell::rect_2d();
        let c = random_configuration(18, &cell, 7, Some(TripletConstraint { triplet: 3 })).unwrap();
        assert_eq!(c.len(), 18);
        assert!(c.triplet_residual().unwrap() < 1e-14);
        // N mismatch is rejected
        assert!(random_configuration(17, &cell, 7, Some(TripletConstraint { triplet: 3 })).is_err());
    }

    #[test]
    fn rewrapping_is_identity() {
        let c = random_configuration(40, &Cell::rect_2d(), 5, None).unwrap();
        for p in &c.points {
            assert_eq!(&c.cell.wrap(p), p);
        }
    }

    #[test]
    fn coincident_points_have_zero_separation() {
        let cell = Cell::unit_1d();
        let c = Configuration::new(cell, vec![vec![0.3], vec![0.3]]).unwrap();
        assert_eq!(min_separation(&c).unwrap(), 0.0);
    }

    #[test]
    fn json_round_trip_is_bitwise() {
        let c = random_configuration(18, &Cell::rect_2d(), 9, Some(TripletConstraint { triplet: 3 }))
            .unwrap();
        let json = serde_json::to_string(&c).unwrap();
        let back: Configuration = serde_json::from_str(&json).unwrap();
        assert_eq!(c, back);
        // schema shape: constraint is {"triplet": L}
        assert!(json.contains("\"constraint\":{\"triplet\":3}"));
    }
}
