use super::{CellSet, Grid, Point};
use crate::error::{Error, Result};
use serde::{Serialize, Serializer};

/// Axis-parallel cube made of whole grid cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cube {
    grid: Grid,
    lo: [usize; 2],
    side: usize,
}

impl Cube {
    /// Cube whose lower-corner cell has axis indices `lo` and whose side spans `side` cells.
    pub fn new(grid: Grid, lo: [usize; 2], side: usize) -> Result<Self> {
        if side == 0 {
            return Err(Error::Empty("cube"));
        }
        let m = grid.per_axis();
        let lo = if grid.dim() == 1 { [lo[0], 0] } else { lo };
        for &a in lo.iter().take(grid.dim()) {
            if a + side > m {
                return Err(Error::OutOfDomain(format!("cube of {side} cells at index {a} exceeds {m} cells")));
            }
        }
        Ok(Self { grid, lo, side })
    }

    /// Cube with lower corner `lower` and side length `side`, both snapped to the nearest cell edges.
    pub fn from_corner(grid: Grid, lower: &[f64], side: f64) -> Result<Self> {
        let h = grid.h();
        let k = (side / h).round();
        if !(k >= 1.0) {
            return Err(Error::InvalidParameter(format!("side {side} is below one cell")));
        }
        let mut lo = [0usize; 2];
        for (d, slot) in lo.iter_mut().enumerate().take(grid.dim()) {
            let u = ((lower[d] + grid.half_width()) / h).round();
            if u < 0.0 {
                return Err(Error::OutOfDomain(format!("lower corner {} below the box", lower[d])));
            }
            *slot = u as usize;
        }
        Self::new(grid, lo, k as usize)
    }

    /// Cube `[a, b]` on a one-dimensional grid, or `[a, b]^2` on a planar one.
    pub fn interval(grid: Grid, a: f64, b: f64) -> Result<Self> {
        Self::from_corner(grid, &[a, a], b - a)
    }

    /// Cube of side `side` centred at `center`, snapped to whole cells.
    pub fn centered(grid: Grid, center: &[f64], side: f64) -> Result<Self> {
        let lower = [center[0] - side / 2.0, center.get(1).copied().unwrap_or(0.0) - side / 2.0];
        Self::from_corner(grid, &lower, side)
    }

    /// `R_k = [-2^k, 2^k]^n`.
    pub fn origin_box(grid: Grid, k: i32) -> Result<Self> {
        let r = 2f64.powi(k);
        Self::from_corner(grid, &[-r, -r], 2.0 * r)
    }

    /// The whole grid box.
    pub fn domain(grid: Grid) -> Self {
        Self { grid, lo: [0, 0], side: grid.per_axis() }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn side_cells(&self) -> usize {
        self.side
    }

    pub fn lower_index(&self) -> [usize; 2] {
        self.lo
    }

    pub fn side(&self) -> f64 {
        self.side as f64 * self.grid.h()
    }

    pub fn lower(&self) -> Point {
        let n = self.grid.dim();
        [self.grid.edge(self.lo[0]), if n == 2 { self.grid.edge(self.lo[1]) } else { 0.0 }]
    }

    pub fn upper(&self) -> Point {
        let lo = self.lower();
        let s = self.side();
        [lo[0] + s, if self.grid.dim() == 2 { lo[1] + s } else { 0.0 }]
    }

    pub fn center(&self) -> Point {
        let lo = self.lower();
        let s = self.side() / 2.0;
        [lo[0] + s, if self.grid.dim() == 2 { lo[1] + s } else { 0.0 }]
    }

    pub fn cell_count(&self) -> usize {
        self.side.pow(self.grid.dim() as u32)
    }

    pub fn measure(&self) -> f64 {
        self.cell_count() as f64 * self.grid.cell_measure()
    }

    /// Flat indices of the cube's cells in ascending order.
    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        let rows = if self.grid.dim() == 1 { 1 } else { self.side };
        (0..rows).flat_map(move |r| {
            (0..self.side).map(move |c| self.grid.flat([self.lo[0] + c, self.lo[1] + r]))
        })
    }

    pub fn cell_set(&self) -> CellSet {
        CellSet::from_sorted_unchecked(self.grid, self.cells().collect())
    }

    pub fn contains_cell(&self, idx: usize) -> bool {
        let a = self.grid.axes(idx);
        (0..self.grid.dim()).all(|d| a[d] >= self.lo[d] && a[d] < self.lo[d] + self.side)
    }

    /// Closed containment of a point.
    pub fn contains_point(&self, x: &[f64]) -> bool {
        let lo = self.lower();
        let hi = self.upper();
        (0..self.grid.dim()).all(|d| x[d] >= lo[d] && x[d] <= hi[d])
    }

    /// True when `other` lies inside `self`.
    pub fn contains_cube(&self, other: &Cube) -> bool {
        (0..self.grid.dim())
            .all(|d| other.lo[d] >= self.lo[d] && other.lo[d] + other.side <= self.lo[d] + self.side)
    }

    /// True when the cubes share at least one cell.
    pub fn overlaps(&self, other: &Cube) -> bool {
        (0..self.grid.dim())
            .all(|d| self.lo[d] < other.lo[d] + other.side && other.lo[d] < self.lo[d] + self.side)
    }

    /// True when the closed cube misses the closed box `[-d, d]^n`.
    pub fn misses_box(&self, d: f64) -> bool {
        let lo = self.lower();
        let hi = self.upper();
        (0..self.grid.dim()).any(|k| hi[k] < -d || lo[k] > d)
    }

    /// Concentric cube with side multiplied by `factor`, rounded to whole cells.
    pub fn dilate(&self, factor: f64) -> Result<Self> {
        let k = (self.side as f64 * factor).round().max(1.0) as i64;
        let grow = k - self.side as i64;
        let shift = grow.div_euclid(2);
        let mut lo = [0usize; 2];
        for d in 0..self.grid.dim() {
            let v = self.lo[d] as i64 - shift;
            if v < 0 {
                return Err(Error::OutOfDomain(format!("dilation by {factor} leaves the box")));
            }
            lo[d] = v as usize;
        }
        Self::new(self.grid, lo, k as usize)
    }

    /// Translate by whole cells.
    pub fn translate(&self, offset: [i64; 2]) -> Result<Self> {
        let mut lo = [0usize; 2];
        for d in 0..self.grid.dim() {
            let v = self.lo[d] as i64 + offset[d];
            if v < 0 {
                return Err(Error::OutOfDomain("translation leaves the box".into()));
            }
            lo[d] = v as usize;
        }
        Self::new(self.grid, lo, self.side)
    }
}

#[derive(Serialize)]
struct CubeView {
    lower: Vec<f64>,
    side: f64,
    center: Vec<f64>,
    measure: f64,
}

impl Serialize for Cube {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.grid.dim();
        CubeView {
            lower: self.lower()[..n].to_vec(),
            side: self.side(),
            center: self.center()[..n].to_vec(),
            measure: self.measure(),
        }
        .serialize(s)
    }
}
