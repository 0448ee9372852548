//! Dense quadrature for singular and fractional integrals, their commutators with symbols, and
//! maximal operators over a cube family.

mod kernel;

pub use kernel::{KernelDescriptor, KernelSpec, Modulus, NamedKernel, ANGLE_SAMPLES};

use crate::error::{invalid, Error, Result};
use crate::grid::{lq_norm, CellSet, Cube, Grid, Point, RealFunction};
use crate::numeric::{compensated_sum, ls_slope, CompensatedSum};
use crate::oscillation::CubeFamily;
use rayon::prelude::*;
use serde::Serialize;

/// Symbol factor multiplying the kernel.
#[derive(Clone, Debug)]
enum Symbols {
    Power { b: RealFunction, m: u32 },
    Multilinear(Vec<RealFunction>),
}

/// `T_b^m` (power form) or `[b_m, ... [b_1, T]]` (multilinear form).
#[derive(Clone, Debug)]
pub struct SymbolPowerCommutator {
    kernel: KernelSpec,
    symbols: Symbols,
}

impl SymbolPowerCommutator {
    pub fn new(kernel: KernelSpec, b: RealFunction, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(invalid("commutator order must be at least 1"));
        }
        check_dim(&kernel, b.grid())?;
        Ok(Self { kernel, symbols: Symbols::Power { b, m } })
    }

    pub fn multilinear(kernel: KernelSpec, bs: Vec<RealFunction>) -> Result<Self> {
        let first = bs.first().ok_or(Error::Empty("symbol list"))?;
        check_dim(&kernel, first.grid())?;
        for b in &bs[1..] {
            first.grid().check_same(&b.grid())?;
        }
        Ok(Self { kernel, symbols: Symbols::Multilinear(bs) })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn order(&self) -> u32 {
        match &self.symbols {
            Symbols::Power { m, .. } => *m,
            Symbols::Multilinear(bs) => bs.len() as u32,
        }
    }

    pub fn with_kernel(&self, kernel: KernelSpec) -> Self {
        Self { kernel, symbols: self.symbols.clone() }
    }

    fn grid(&self) -> Grid {
        match &self.symbols {
            Symbols::Power { b, .. } => b.grid(),
            Symbols::Multilinear(bs) => bs[0].grid(),
        }
    }

    fn symbol_values_at_cell(&self, i: usize) -> Vec<f64> {
        match &self.symbols {
            Symbols::Power { b, .. } => vec![b.get(i)],
            Symbols::Multilinear(bs) => bs.iter().map(|b| b.get(i)).collect(),
        }
    }

    fn symbol_values_at(&self, x: &[f64]) -> Vec<f64> {
        match &self.symbols {
            Symbols::Power { b, .. } => vec![b.sample(x)],
            Symbols::Multilinear(bs) => bs.iter().map(|b| b.sample(x)).collect(),
        }
    }

    fn factor(&self, bx: &[f64], j: usize) -> f64 {
        match &self.symbols {
            Symbols::Power { b, m } => (bx[0] - b.get(j)).powi(*m as i32),
            Symbols::Multilinear(bs) => bs.iter().zip(bx).map(|(b, x)| x - b.get(j)).product(),
        }
    }
}

fn check_dim(k: &KernelSpec, g: Grid) -> Result<()> {
    if k.dim() == g.dim() {
        Ok(())
    } else {
        Err(invalid(format!("kernel dimension {} on a grid of dimension {}", k.dim(), g.dim())))
    }
}

/// Support cells and values of the input.
struct Source<'a> {
    grid: Grid,
    cells: Vec<usize>,
    f: &'a RealFunction,
}

impl<'a> Source<'a> {
    fn new(k: &KernelSpec, f: &'a RealFunction) -> Result<Self> {
        check_dim(k, f.grid())?;
        Ok(Self { grid: f.grid(), cells: f.support(), f })
    }

    /// `Σ_{j ≠ skip} K(x, y_j) w(j) f(y_j) h^n` in ascending cell order.
    fn sum(&self, k: &KernelSpec, x: Point, skip: Option<usize>, w: impl Fn(usize) -> f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for &j in &self.cells {
            if Some(j) == skip {
                continue;
            }
            let kv = k.eval(x, self.grid.center(j));
            if kv != 0.0 {
                acc.add(kv * w(j) * self.f.get(j));
            }
        }
        acc.value() * self.grid.cell_measure()
    }
}

fn center_cell(g: Grid, x: &[f64]) -> Option<usize> {
    let idx = g.cell_of(x)?;
    let c = g.center(idx);
    (c[0] == x[0] && (g.dim() == 1 || c[1] == x[1])).then_some(idx)
}

fn as_point(x: &[f64]) -> Point {
    [x[0], x.get(1).copied().unwrap_or(0.0)]
}

/// `T_K f` at every cell centre; the diagonal cell is omitted.
pub fn apply(k: &KernelSpec, f: &RealFunction) -> Result<RealFunction> {
    let vals = apply_on(k, f, &CellSet::all(f.grid()))?;
    RealFunction::new(f.grid(), vals)
}

/// `T_K f` at the centres of `targets`, in ascending cell order.
pub fn apply_on(k: &KernelSpec, f: &RealFunction, targets: &CellSet) -> Result<Vec<f64>> {
    let src = Source::new(k, f)?;
    f.grid().check_same(&targets.grid())?;
    Ok(targets.cells().par_iter().map(|&i| src.sum(k, src.grid.center(i), Some(i), |_| 1.0)).collect())
}

/// `T_K f(x)` at an arbitrary point; a cell whose centre equals `x` is omitted.
pub fn apply_at(k: &KernelSpec, f: &RealFunction, x: &[f64]) -> Result<f64> {
    let src = Source::new(k, f)?;
    Ok(src.sum(k, as_point(x), center_cell(src.grid, x), |_| 1.0))
}

pub fn commutator(c: &SymbolPowerCommutator, f: &RealFunction) -> Result<RealFunction> {
    let vals = commutator_on(c, f, &CellSet::all(f.grid()))?;
    RealFunction::new(f.grid(), vals)
}

pub fn commutator_on(c: &SymbolPowerCommutator, f: &RealFunction, targets: &CellSet) -> Result<Vec<f64>> {
    let src = Source::new(&c.kernel, f)?;
    c.grid().check_same(&f.grid())?;
    f.grid().check_same(&targets.grid())?;
    Ok(targets
        .cells()
        .par_iter()
        .map(|&i| {
            let bx = c.symbol_values_at_cell(i);
            src.sum(&c.kernel, src.grid.center(i), Some(i), |j| c.factor(&bx, j))
        })
        .collect())
}

/// Commutator at an arbitrary point; the symbols are interpolated at `x`.
pub fn commutator_at(c: &SymbolPowerCommutator, f: &RealFunction, x: &[f64]) -> Result<f64> {
    let src = Source::new(&c.kernel, f)?;
    c.grid().check_same(&f.grid())?;
    let bx = c.symbol_values_at(x);
    Ok(src.sum(&c.kernel, as_point(x), center_cell(src.grid, x), |j| c.factor(&bx, j)))
}

pub fn multilinear_commutator(bs: &[RealFunction], k: &KernelSpec, f: &RealFunction) -> Result<RealFunction> {
    commutator(&SymbolPowerCommutator::multilinear(k.clone(), bs.to_vec())?, f)
}

fn check_alpha(alpha: f64, n: usize) -> Result<()> {
    if alpha >= 0.0 && alpha < n as f64 {
        Ok(())
    } else {
        Err(invalid(format!("α = {alpha} not in [0, {n})")))
    }
}

/// `|Q|^{α/n - 1} ∫_Q |f|` for every family cube.
pub fn cube_averages(f: &RealFunction, alpha: f64, fam: &CubeFamily) -> Result<Vec<f64>> {
    check_alpha(alpha, f.grid().dim())?;
    f.grid().check_same(&fam.grid())?;
    let n = f.grid().dim() as f64;
    let cm = f.grid().cell_measure();
    Ok(fam
        .cubes()
        .par_iter()
        .map(|q| {
            compensated_sum(q.cells().map(|i| f.get(i).abs())) * cm * q.measure().powf(alpha / n - 1.0)
        })
        .collect())
}

/// `M_α f` over the family; zero at cells no family cube contains.
pub fn maximal(f: &RealFunction, alpha: f64, fam: &CubeFamily) -> Result<RealFunction> {
    let avg = cube_averages(f, alpha, fam)?;
    let mut out = vec![0.0f64; f.len()];
    for (q, a) in fam.cubes().iter().zip(avg) {
        for i in q.cells() {
            if a > out[i] {
                out[i] = a;
            }
        }
    }
    RealFunction::new(f.grid(), out)
}

/// `M_α f` restricted to the cells of `window`, in ascending cell order.
pub fn maximal_on(f: &RealFunction, alpha: f64, fam: &CubeFamily, window: &Cube) -> Result<Vec<f64>> {
    check_alpha(alpha, f.grid().dim())?;
    let g = f.grid();
    let n = g.dim();
    let cm = g.cell_measure();
    let (wlo, ws) = (window.lower_index(), window.side_cells());
    let hits: Vec<(usize, f64)> = fam
        .cubes()
        .par_iter()
        .enumerate()
        .filter(|(_, q)| q.overlaps(window))
        .map(|(qi, q)| (qi, compensated_sum(q.cells().map(|i| f.get(i).abs())) * cm * q.measure().powf(alpha / n as f64 - 1.0)))
        .collect();
    let mut out = vec![0.0f64; ws.pow(n as u32)];
    for (qi, a) in hits {
        let q = &fam.cubes()[qi];
        let (qlo, qs) = (q.lower_index(), q.side_cells());
        let range = |ax: usize| (qlo[ax].max(wlo[ax]), (qlo[ax] + qs).min(wlo[ax] + ws));
        let (x0, x1) = range(0);
        let (y0, y1) = if n == 2 { range(1) } else { (0, 1) };
        for iy in y0..y1 {
            for ix in x0..x1 {
                let local = if n == 2 { (iy - wlo[1]) * ws + ix - wlo[0] } else { ix - wlo[0] };
                if a > out[local] {
                    out[local] = a;
                }
            }
        }
    }
    Ok(out)
}

/// `M_α f(x)` over family cubes whose closure contains `x`.
pub fn maximal_at(f: &RealFunction, alpha: f64, fam: &CubeFamily, x: &[f64]) -> Result<f64> {
    check_alpha(alpha, f.grid().dim())?;
    let n = f.grid().dim() as f64;
    let cm = f.grid().cell_measure();
    Ok(fam
        .cubes()
        .par_iter()
        .filter(|q| q.contains_point(x))
        .map(|q| {
            compensated_sum(q.cells().map(|i| f.get(i).abs())) * cm * q.measure().powf(alpha / n - 1.0)
        })
        .reduce(|| 0.0, f64::max))
}

/// `T* f = max_δ |T_{K^δ} f|` over the given truncation radii.
pub fn maximal_truncation(k: &KernelSpec, f: &RealFunction, deltas: &[f64]) -> Result<RealFunction> {
    if deltas.is_empty() {
        return Err(Error::Empty("truncation radii"));
    }
    let mut out = vec![0.0f64; f.len()];
    for &d in deltas {
        let t = apply(&k.with_truncation(d)?, f)?;
        for (o, v) in out.iter_mut().zip(t.values()) {
            *o = o.max(v.abs());
        }
    }
    RealFunction::new(f.grid(), out)
}

/// Radii `2^{-k}` for `k` in `k_lo..=k_hi`.
pub fn dyadic_radii(k_lo: i32, k_hi: i32) -> Vec<f64> {
    (k_lo..=k_hi).map(|k| 2f64.powi(-k)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationFit {
    pub deltas: Vec<f64>,
    pub errors: Vec<f64>,
    /// Slope of `log e` against `log δ`; `None` when some error vanishes.
    pub exponent: Option<f64>,
}

impl TruncationFit {
    pub fn is_degenerate(&self) -> bool {
        self.exponent.is_none()
    }
}

/// `L²` distance between truncated and untruncated commutators as `δ` shrinks.
pub fn truncation_error_scaling(
    c: &SymbolPowerCommutator,
    f: &RealFunction,
    deltas: &[f64],
) -> Result<TruncationFit> {
    let h = f.grid().h();
    if deltas.len() < 2 {
        return Err(invalid("need at least two truncation radii"));
    }
    if let Some(d) = deltas.iter().find(|&&d| !(d >= 4.0 * h)) {
        return Err(invalid(format!("radius {d} below the resolution limit 4h = {}", 4.0 * h)));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("truncation radii must decrease"));
    }
    let all = CellSet::all(f.grid());
    let base = commutator(&c.with_kernel(c.kernel.without_truncation()), f)?;
    let errors = deltas
        .iter()
        .map(|&d| {
            let t = commutator(&c.with_kernel(c.kernel.with_truncation(d)?), f)?;
            lq_norm(&t.sub(&base)?, &all, None, 2.0)
        })
        .collect::<Result<Vec<_>>>()?;
    let exponent = if errors.iter().all(|&e| e > 0.0) {
        let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
        let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
        ls_slope(&xs, &ys)
    } else {
        None
    };
    Ok(TruncationFit { deltas: deltas.to_vec(), errors, exponent })
}

/// `|K^δ(x,y) - K^δ(x',y)|·|x-y|^{n-α} / ρ̃(|x-x'|/|x-y|)` for a triple with `|x-y| > 2|x-x'|`.
pub fn smoothness_ratio(k: &KernelSpec, x: Point, xp: Point, y: Point) -> Option<f64> {
    let d = |a: Point, b: Point| (a[0] - b[0]).hypot(a[1] - b[1]);
    let r = d(x, y);
    let t = d(x, xp);
    if t == 0.0 || r <= 2.0 * t {
        return None;
    }
    let diff = (k.eval(x, y) - k.eval(xp, y)).abs();
    Some(diff * r.powf(k.dim() as f64 - k.alpha()) / k.modulus().tilde(t / r))
}

#[cfg(test)]
mod tests;
