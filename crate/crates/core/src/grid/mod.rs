//! Uniform cell-centred grids on `[-2^L, 2^L]^n`, cube geometry, quadrature and mollification.

mod cellset;
mod cube;
mod function;
pub mod generators;
pub mod io;
mod quadrature;

pub use cellset::{CellPairSet, CellSet};
pub use cube::Cube;
pub use function::{ComplexFunction, GridFunction, RealFunction, Scalar, ScalarKind};
pub use quadrature::{bump, integrate, lq_norm, mollify, smooth_cutoff};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A point of the plane; for `n = 1` only the first coordinate is used.
pub type Point = [f64; 2];

const MAX_CELLS: usize = 1 << 24;

/// Uniform grid of `2^{L+s+1}` cells per axis with cell size `h = 2^{-s}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    n: usize,
    l: i32,
    s: i32,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
struct GridSpec {
    n: usize,
    #[serde(rename = "L")]
    l: i32,
    s: i32,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;
    fn try_from(g: GridSpec) -> Result<Self> {
        Grid::new(g.n, g.l, g.s)
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        GridSpec { n: g.n, l: g.l, s: g.s }
    }
}

impl Grid {
    pub fn new(n: usize, l: i32, s: i32) -> Result<Self> {
        if n != 1 && n != 2 {
            return Err(Error::InvalidGrid(format!("dimension {n} not in {{1, 2}}")));
        }
        if !(-30..=30).contains(&s) || !(-30..=30).contains(&l) {
            return Err(Error::InvalidGrid(format!("L = {l}, s = {s} out of range")));
        }
        let e = l + s + 1;
        if e < 2 {
            return Err(Error::InvalidGrid(format!("L + s + 1 = {e} gives fewer than 4 cells per axis")));
        }
        let per_axis = 1usize << e;
        if per_axis.checked_pow(n as u32).is_none_or(|c| c > MAX_CELLS) {
            return Err(Error::InvalidGrid(format!("{per_axis}^{n} cells exceeds the supported size")));
        }
        Ok(Self { n, l, s })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Box exponent `L`.
    pub fn box_exponent(&self) -> i32 {
        self.l
    }

    /// Resolution exponent `s`.
    pub fn resolution(&self) -> i32 {
        self.s
    }

    pub fn h(&self) -> f64 {
        2f64.powi(-self.s)
    }

    pub fn half_width(&self) -> f64 {
        2f64.powi(self.l)
    }

    pub fn per_axis(&self) -> usize {
        1usize << (self.l + self.s + 1)
    }

    pub fn len(&self) -> usize {
        self.per_axis().pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_measure(&self) -> f64 {
        self.h().powi(self.n as i32)
    }

    /// Centre coordinate of axis index `i`.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width() + (i as f64 + 0.5) * self.h()
    }

    /// Coordinate of the lower edge of axis index `i`.
    pub fn edge(&self, i: usize) -> f64 {
        -self.half_width() + i as f64 * self.h()
    }

    pub fn axes(&self, idx: usize) -> [usize; 2] {
        if self.n == 1 {
            [idx, 0]
        } else {
            let m = self.per_axis();
            [idx % m, idx / m]
        }
    }

    pub fn flat(&self, axes: [usize; 2]) -> usize {
        if self.n == 1 {
            axes[0]
        } else {
            axes[1] * self.per_axis() + axes[0]
        }
    }

    pub fn center(&self, idx: usize) -> Point {
        let a = self.axes(idx);
        if self.n == 1 {
            [self.coord(a[0]), 0.0]
        } else {
            [self.coord(a[0]), self.coord(a[1])]
        }
    }

    /// Index of the cell `[edge, edge + h)` holding `x`, if inside the box.
    pub fn cell_of(&self, x: &[f64]) -> Option<usize> {
        let mut axes = [0usize; 2];
        for (k, slot) in axes.iter_mut().enumerate().take(self.n) {
            let u = ((x[k] + self.half_width()) / self.h()).floor();
            if u < 0.0 || u >= self.per_axis() as f64 {
                return None;
            }
            *slot = u as usize;
        }
        Some(self.flat(axes))
    }

    /// Euclidean norm of `x` restricted to this grid's dimension.
    pub fn norm(&self, x: Point) -> f64 {
        if self.n == 1 {
            x[0].abs()
        } else {
            x[0].hypot(x[1])
        }
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}
