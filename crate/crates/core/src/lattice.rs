//! Hexagonal cell torus with a hierarchical index-3 partition.
//!
//! Cell centers sit on a triangular lattice written in axial coordinates
//! `(a, b)` with basis vectors at 0 and 60 degrees. The map
//! `M(x, y) = (x - y, x + 2y)` sends the lattice onto its index-3
//! sublattice (a rotation by 30 degrees and a scaling by sqrt(3)). Level `i`
//! of the partition is the coset structure of `M^i Z^2`, and the torus of
//! `L = 3^m` cells is the quotient by `M^m Z^2`. Every cell therefore has a
//! unique base-3 digit string `(d_0, ..., d_{m-1})`, where `d_i` is its color
//! at level `i`, and cells sharing a pilot at depth `i` are exactly those
//! agreeing on the first `i` digits.

use rand::Rng;

use crate::{Error, Result};

/// Canonical axial coordinate of a cell on the torus.
///
/// Values are only produced by [`CellGrid`], which reduces them to a fixed
/// representative, so equality of `CellCoord`s is equality of cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellCoord {
    a: i64,
    b: i64,
}

impl CellCoord {
    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }
}

/// A point in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub fn new(x: f64, y: f64) -> Self {
        Point2D { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl std::ops::Sub for Point2D {
    type Output = Point2D;

    fn sub(self, rhs: Point2D) -> Point2D {
        Point2D::new(self.x - rhs.x, self.y - rhs.y)
    }
}

const SQRT3: f64 = 1.732_050_807_568_877_2;

fn refine(x: i64, y: i64) -> (i64, i64) {
    (x - y, x + 2 * y)
}

/// Digit `d` and the coarser coordinate `c'` with `c = (d, 0) + M c'`.
fn split_digit(a: i64, b: i64) -> (u8, i64, i64) {
    let d = (a - b).rem_euclid(3);
    let a = a - d;
    let y = (b - a) / 3;
    let x = a + y;
    (d as u8, x, y)
}

/// The `L = 3^m` cell torus.
#[derive(Debug, Clone)]
pub struct CellGrid {
    order: u32,
    cell_radius: f64,
    hole_ratio: f64,
    cells: Vec<CellCoord>,
    /// Real-space periods of the torus, in units of the cell radius.
    periods: [Point2D; 2],
}

impl CellGrid {
    /// Builds the torus of `3^order` cells with hexagon circumradius
    /// `cell_radius` and a user-free hole of `hole_ratio * cell_radius`
    /// around every base station.
    pub fn new(order: u32, cell_radius: f64, hole_ratio: f64) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidOrder(order));
        }
        if order > 12 {
            return Err(Error::InvalidParameter(format!("partition order {order} is too large")));
        }
        if !(cell_radius.is_finite() && cell_radius > 0.0) {
            return Err(Error::InvalidParameter(format!("cell radius must be positive, got {cell_radius}")));
        }
        if !(0.0..1.0).contains(&hole_ratio) {
            return Err(Error::InvalidParameter(format!("hole ratio must lie in [0, 1), got {hole_ratio}")));
        }
        let count = 3usize.pow(order);
        let cells = (0..count).map(|i| Self::from_index(order, i)).collect();
        let period = |mut x: i64, mut y: i64| {
            for _ in 0..order {
                (x, y) = refine(x, y);
            }
            axial_to_unit(x as f64, y as f64)
        };
        let periods = [period(1, 0), period(0, 1)];
        Ok(CellGrid { order, cell_radius, hole_ratio, cells, periods })
    }

    /// Same geometry with a different cell radius.
    pub fn with_radius(&self, cell_radius: f64) -> Result<Self> {
        Self::new(self.order, cell_radius, self.hole_ratio)
    }

    fn from_index(order: u32, mut index: usize) -> CellCoord {
        let mut digits = Vec::with_capacity(order as usize);
        for _ in 0..order {
            digits.push((index % 3) as i64);
            index /= 3;
        }
        let (mut a, mut b) = (0i64, 0i64);
        for &d in digits.iter().rev() {
            let (x, y) = refine(a, b);
            a = x + d;
            b = y;
        }
        CellCoord { a, b }
    }

    /// Partition order `m`.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Number of partition depths, `m`; valid depths are `0..m`.
    pub fn depths(&self) -> usize {
        self.order as usize
    }

    pub fn cell_radius(&self) -> f64 {
        self.cell_radius
    }

    pub fn hole_ratio(&self) -> f64 {
        self.hole_ratio
    }

    /// All cells, ordered by [`CellGrid::index`].
    pub fn cells(&self) -> &[CellCoord] {
        &self.cells
    }

    /// Reduces an arbitrary axial coordinate onto the torus.
    pub fn coord(&self, a: i64, b: i64) -> CellCoord {
        self.cells[self.index_of(a, b)]
    }

    fn index_of(&self, mut a: i64, mut b: i64) -> usize {
        let mut index = 0usize;
        let mut place = 1usize;
        for _ in 0..self.order {
            let (d, x, y) = split_digit(a, b);
            index += d as usize * place;
            place *= 3;
            a = x;
            b = y;
        }
        index
    }

    /// Position of `c` in [`CellGrid::cells`]; its base-3 digits are the colors.
    pub fn index(&self, c: CellCoord) -> usize {
        self.index_of(c.a, c.b)
    }

    /// Color sequence of `c` over all levels.
    pub fn colors(&self, c: CellCoord) -> Vec<u8> {
        let mut index = self.index(c);
        (0..self.order)
            .map(|_| {
                let d = (index % 3) as u8;
                index /= 3;
                d
            })
            .collect()
    }

    /// Coset of `c` under the `level`-th index-3 refinement.
    pub fn color(&self, c: CellCoord, level: usize) -> Result<u8> {
        if level >= self.depths() {
            return Err(Error::Depth { depth: level, levels: self.depths() });
        }
        Ok(((self.index(c) / 3usize.pow(level as u32)) % 3) as u8)
    }

    /// Cells sharing a pilot with `home` at `depth`, `home` included,
    /// ordered by cell index.
    pub fn pilot_group(&self, home: CellCoord, depth: usize) -> Result<Vec<CellCoord>> {
        if depth >= self.depths() {
            return Err(Error::Depth { depth, levels: self.depths() });
        }
        let stride = 3usize.pow(depth as u32);
        let prefix = self.index(home) % stride;
        Ok((0..self.num_cells() / stride).map(|k| self.cells[prefix + k * stride]).collect())
    }

    /// Base-station position of `c`.
    pub fn center(&self, c: CellCoord) -> Point2D {
        let p = axial_to_unit(c.a as f64, c.b as f64);
        Point2D::new(p.x * self.cell_radius, p.y * self.cell_radius)
    }

    /// Shortest distance between `p` and `q` on the torus.
    pub fn torus_distance(&self, p: Point2D, q: Point2D) -> f64 {
        let r = self.cell_radius;
        let d = Point2D::new((p.x - q.x) / r, (p.y - q.y) / r);
        unit_torus_distance(&self.periods, d) * r
    }

    /// Draws a user uniformly over the hexagon of `c`, outside its hole.
    pub fn sample_user_position<R: Rng + ?Sized>(&self, c: CellCoord, rng: &mut R) -> Point2D {
        let u = sample_unit_offset(self.hole_ratio, rng);
        let center = self.center(c);
        Point2D::new(center.x + u.x * self.cell_radius, center.y + u.y * self.cell_radius)
    }

    /// Whether `p` lies in the user region of `c` (inside the hexagon,
    /// outside the hole).
    pub fn in_user_region(&self, c: CellCoord, p: Point2D) -> bool {
        let d = p - self.center(c);
        let u = Point2D::new(d.x / self.cell_radius, d.y / self.cell_radius);
        in_unit_hexagon(u) && u.norm() >= self.hole_ratio
    }

    pub(crate) fn unit_center(&self, c: CellCoord) -> Point2D {
        axial_to_unit(c.a as f64, c.b as f64)
    }

    pub(crate) fn unit_distance(&self, p: Point2D, q: Point2D) -> f64 {
        unit_torus_distance(&self.periods, p - q)
    }
}

/// Axial lattice coordinate to the plane, in units of the cell radius
/// (neighboring centers are sqrt(3) apart).
fn axial_to_unit(a: f64, b: f64) -> Point2D {
    Point2D::new(SQRT3 * (a + 0.5 * b), 1.5 * b)
}

fn unit_torus_distance(periods: &[Point2D; 2], d: Point2D) -> f64 {
    let [u, v] = periods;
    let det = u.x * v.y - u.y * v.x;
    let f1 = (d.x * v.y - d.y * v.x) / det;
    let f2 = (u.x * d.y - u.y * d.x) / det;
    let (n1, n2) = (f1.round(), f2.round());
    let base = Point2D::new(d.x - n1 * u.x - n2 * v.x, d.y - n1 * u.y - n2 * v.y);
    let mut best = f64::INFINITY;
    for i in -1..=1 {
        for j in -1..=1 {
            let (i, j) = (i as f64, j as f64);
            let x = base.x + i * u.x + j * v.x;
            let y = base.y + i * u.y + j * v.y;
            best = best.min(x.hypot(y));
        }
    }
    best
}

/// Pointy-top hexagon with unit circumradius.
fn in_unit_hexagon(p: Point2D) -> bool {
    let apothem = SQRT3 / 2.0;
    p.x.abs() <= apothem
        && (0.5 * p.x + 0.5 * SQRT3 * p.y).abs() <= apothem
        && (-0.5 * p.x + 0.5 * SQRT3 * p.y).abs() <= apothem
}

/// Rejection sampler over the bounding box of the unit hexagon.
pub(crate) fn sample_unit_offset<R: Rng + ?Sized>(hole_ratio: f64, rng: &mut R) -> Point2D {
    let apothem = SQRT3 / 2.0;
    loop {
        let x = (2.0 * rng.random::<f64>() - 1.0) * apothem;
        let y = 2.0 * rng.random::<f64>() - 1.0;
        let p = Point2D::new(x, y);
        if in_unit_hexagon(p) && p.norm() >= hole_ratio {
            return p;
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn grid(order: u32) -> CellGrid {
        CellGrid::new(order, 500.0, 0.14).unwrap()
    }

    #[test]
    fn build_sizes_and_errors() {
        assert_eq!(grid(2).num_cells(), 9);
        assert_eq!(grid(4).num_cells(), 81);
        assert_eq!(CellGrid::new(1, 500.0, 0.14).unwrap_err(), Error::InvalidOrder(1));
        assert!(matches!(CellGrid::new(2, 0.0, 0.14), Err(Error::InvalidParameter(_))));
        assert!(matches!(CellGrid::new(2, -3.0, 0.14), Err(Error::InvalidParameter(_))));
        assert!(matches!(CellGrid::new(2, 1.0, 1.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn coordinates_reduce_canonically() {
        let g = grid(3);
        for &c in g.cells() {
            assert_eq!(g.coord(c.a, c.b), c);
        }
        // Adding a torus period maps a cell to itself.
        let (mut pa, mut pb) = (1, 0);
        for _ in 0..3 {
            (pa, pb) = refine(pa, pb);
        }
        let c = g.cells()[7];
        assert_eq!(g.coord(c.a + pa, c.b + pb), c);
        assert_eq!(g.coord(c.a - 2 * pa, c.b - 2 * pb), c);
        assert_ne!(g.coord(c.a + 1, c.b), c);
    }

    #[test]
    fn level_zero_colors_split_evenly() {
        let g = grid(2);
        let mut counts = [0; 3];
        for &c in g.cells() {
            let col = g.color(c, 0).unwrap();
            assert_eq!(col as i64, (c.a - c.b).rem_euclid(3));
            counts[col as usize] += 1;
        }
        assert_eq!(counts, [3, 3, 3]);
        assert!(matches!(g.color(g.cells()[0], 2), Err(Error::Depth { .. })));
    }

    #[test]
    fn color_sequences_identify_cells() {
        for order in 2..=5 {
            let g = grid(order);
            let seqs: HashSet<Vec<u8>> = g
                .cells()
                .iter()
                .map(|&c| (0..g.depths()).map(|l| g.color(c, l).unwrap()).collect())
                .collect();
            assert_eq!(seqs.len(), g.num_cells());
        }
    }

    #[test]
    fn level_zero_color_is_constant_on_groups() {
        let g = grid(4);
        for &home in g.cells() {
            let group = g.pilot_group(home, 1).unwrap();
            assert_eq!(group.len(), 27);
            let col = g.color(home, 0).unwrap();
            assert!(group.iter().all(|&c| g.color(c, 0).unwrap() == col));
        }
    }

    #[test]
    fn pilot_group_sizes() {
        let g = grid(4);
        let home = g.cells()[40];
        assert_eq!(g.pilot_group(home, 0).unwrap().len(), 81);
        assert_eq!(g.pilot_group(home, 3).unwrap().len(), 3);
        assert!(g.pilot_group(home, 3).unwrap().contains(&home));
        assert!(matches!(g.pilot_group(home, 4), Err(Error::Depth { depth: 4, levels: 4 })));
        for depth in 0..4 {
            let mut seen = HashSet::new();
            for &c in g.cells() {
                let mut group = g.pilot_group(c, depth).unwrap();
                group.sort();
                seen.insert(group);
            }
            assert_eq!(seen.len(), 3usize.pow(depth as u32));
            assert_eq!(seen.iter().map(Vec::len).sum::<usize>(), 81);
        }
    }

    #[test]
    fn neighbors_are_sqrt3_radii_apart() {
        let g = grid(3);
        let r = g.cell_radius();
        let origin = g.center(g.coord(0, 0));
        for (a, b) in [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)] {
            let p = g.center(g.coord(a, b));
            let d = g.torus_distance(origin, p);
            assert!((d - SQRT3 * r).abs() < 1e-9 * r, "{a},{b}: {d}");
        }
        // Direct construction of the neighbor offset in the plane.
        let dx = SQRT3 * r;
        let q = Point2D::new(origin.x + dx * 0.5, origin.y + dx * SQRT3 / 2.0);
        assert!((g.torus_distance(origin, q) - dx).abs() < 1e-9 * r);
        assert_eq!(g.torus_distance(origin, origin), 0.0);
    }

    #[test]
    fn torus_wraps_across_the_boundary() {
        let g = grid(2);
        // Every cell of the 9-cell torus is within one hop of every other
        // cell, or two hops at most.
        for &c in g.cells() {
            for &d in g.cells() {
                let dist = g.torus_distance(g.center(c), g.center(d)) / g.cell_radius();
                assert!(dist <= 3.0 + 1e-9, "{dist}");
            }
        }
    }

    #[test]
    fn sampled_users_respect_support() {
        let g = grid(2);
        let c = g.cells()[4];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let center = g.center(c);
        for _ in 0..100_000 {
            let p = g.sample_user_position(c, &mut rng);
            assert!((p - center).norm() >= 0.14 * g.cell_radius() - 1e-9);
            assert!(g.in_user_region(c, p));
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = grid(3);
        let c = g.cells()[5];
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..50).map(|_| g.sample_user_position(c, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
        assert_ne!(draw(11), draw(12));
    }
}
