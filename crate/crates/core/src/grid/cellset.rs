use super::Grid;
use crate::error::{Error, Result};

/// Sorted set of distinct cell indices on one grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellSet {
    grid: Grid,
    cells: Vec<usize>,
}

impl CellSet {
    pub fn new(grid: Grid, mut cells: Vec<usize>) -> Result<Self> {
        cells.sort_unstable();
        cells.dedup();
        if let Some(&last) = cells.last() {
            if last >= grid.len() {
                return Err(Error::OutOfDomain(format!("cell {last} not on the grid")));
            }
        }
        Ok(Self { grid, cells })
    }

    pub(crate) fn from_sorted_unchecked(grid: Grid, cells: Vec<usize>) -> Self {
        debug_assert!(cells.windows(2).all(|w| w[0] < w[1]));
        Self { grid, cells }
    }

    pub fn all(grid: Grid) -> Self {
        Self { grid, cells: (0..grid.len()).collect() }
    }

    pub fn empty(grid: Grid) -> Self {
        Self { grid, cells: Vec::new() }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.cells.len() as f64 * self.grid.cell_measure()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.cells.binary_search(&idx).is_ok()
    }

    pub fn union(&self, other: &CellSet) -> Result<CellSet> {
        self.grid.check_same(&other.grid)?;
        let mut v = self.cells.clone();
        v.extend_from_slice(&other.cells);
        CellSet::new(self.grid, v)
    }

    pub fn difference(&self, other: &CellSet) -> Result<CellSet> {
        self.grid.check_same(&other.grid)?;
        let cells = self.cells.iter().copied().filter(|c| !other.contains(*c)).collect();
        Ok(Self::from_sorted_unchecked(self.grid, cells))
    }

    pub fn intersection(&self, other: &CellSet) -> Result<CellSet> {
        self.grid.check_same(&other.grid)?;
        let cells = self.cells.iter().copied().filter(|c| other.contains(*c)).collect();
        Ok(Self::from_sorted_unchecked(self.grid, cells))
    }

    pub fn is_disjoint(&self, other: &CellSet) -> bool {
        self.cells.iter().all(|c| !other.contains(*c))
    }
}

/// Subset of `rows × cols` stored as a membership mask in row-major order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellPairSet {
    rows: CellSet,
    cols: CellSet,
    member: Vec<bool>,
}

impl CellPairSet {
    /// Pairs `(x, y)` for which `keep(x, y)` holds.
    pub fn from_predicate(rows: CellSet, cols: CellSet, mut keep: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        rows.grid.check_same(&cols.grid)?;
        let mut member = Vec::with_capacity(rows.len() * cols.len());
        for x in rows.iter() {
            for y in cols.iter() {
                member.push(keep(x, y));
            }
        }
        Ok(Self { rows, cols, member })
    }

    pub fn rows(&self) -> &CellSet {
        &self.rows
    }

    pub fn cols(&self) -> &CellSet {
        &self.cols
    }

    pub fn count(&self) -> usize {
        self.member.iter().filter(|&&b| b).count()
    }

    /// Product measure of the pair set.
    pub fn measure(&self) -> f64 {
        self.count() as f64 * self.rows.grid.cell_measure().powi(2)
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        match (self.rows.cells.binary_search(&x), self.cols.cells.binary_search(&y)) {
            (Ok(i), Ok(j)) => self.member[i * self.cols.len() + j],
            _ => false,
        }
    }

    /// Number of member pairs whose row cell lies outside `removed`.
    pub fn count_rows_outside(&self, removed: &CellSet) -> usize {
        let w = self.cols.len();
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, x)| !removed.contains(*x))
            .map(|(i, _)| self.member[i * w..(i + 1) * w].iter().filter(|&&b| b).count())
            .sum()
    }
}
