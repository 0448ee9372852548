use super::{CellSet, Grid, Point};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarKind {
    Real,
    Complex,
}

/// Cell value type: `f64` or `Complex64`.
pub trait Scalar:
    Copy + Debug + PartialEq + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + 'static
{
    const KIND: ScalarKind;
    fn modulus(self) -> f64;
    fn is_finite_value(self) -> bool;
    fn from_re(x: f64) -> Self;
    /// Builds a value from real and imaginary parts; real scalars drop the imaginary part.
    fn from_parts(re: f64, im: f64) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn scaled(self, a: f64) -> Self;
    fn to_complex(self) -> Complex64 {
        Complex64::new(self.re(), self.im())
    }
}

impl Scalar for f64 {
    const KIND: ScalarKind = ScalarKind::Real;
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
    fn from_re(x: f64) -> Self {
        x
    }
    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }
    fn re(self) -> f64 {
        self
    }
    fn im(self) -> f64 {
        0.0
    }
    fn scaled(self, a: f64) -> Self {
        self * a
    }
}

impl Scalar for Complex64 {
    const KIND: ScalarKind = ScalarKind::Complex;
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
    fn re(self) -> f64 {
        self.re
    }
    fn im(self) -> f64 {
        self.im
    }
    fn scaled(self, a: f64) -> Self {
        self * a
    }
}

/// One finite value per grid cell.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T: Scalar> {
    grid: Grid,
    values: Vec<T>,
}

pub type RealFunction = GridFunction<f64>;
pub type ComplexFunction = GridFunction<Complex64>;

impl<T: Scalar> GridFunction<T> {
    pub fn new(grid: Grid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite_value()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    /// Sample `f` at every cell centre.
    pub fn from_fn(grid: Grid, f: impl Fn(Point) -> T) -> Result<Self> {
        Self::new(grid, (0..grid.len()).map(|i| f(grid.center(i))).collect())
    }

    pub fn constant(grid: Grid, c: T) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    pub fn kind(&self) -> ScalarKind {
        T::KIND
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, idx: usize) -> T {
        self.values[idx]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Result<GridFunction<U>> {
        GridFunction::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with<U: Scalar, V: Scalar>(
        &self,
        other: &GridFunction<U>,
        f: impl Fn(T, U) -> V,
    ) -> Result<GridFunction<V>> {
        self.grid.check_same(&other.grid)?;
        GridFunction::new(self.grid, self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, a: f64) -> Result<Self> {
        self.map(|v| v.scaled(a))
    }

    pub fn shift(&self, c: T) -> Result<Self> {
        self.map(|v| v + c)
    }

    /// Pointwise modulus.
    pub fn modulus(&self) -> RealFunction {
        GridFunction { grid: self.grid, values: self.values.iter().map(|v| v.modulus()).collect() }
    }

    /// Values on the cells of `s`, ascending cell order.
    pub fn gather(&self, s: &CellSet) -> Vec<T> {
        s.iter().map(|i| self.values[i]).collect()
    }

    /// `self` on `s`, zero elsewhere.
    pub fn restrict(&self, s: &CellSet) -> Result<Self> {
        self.grid.check_same(&s.grid())?;
        let mut values = vec![T::from_re(0.0); self.grid.len()];
        for i in s.iter() {
            values[i] = self.values[i];
        }
        Ok(Self { grid: self.grid, values })
    }

    /// `x ↦ self(x + z)` for a whole-cell offset `z`, zero where `x + z` leaves the box.
    pub fn shifted(&self, offset: [i64; 2]) -> Self {
        let m = self.grid.per_axis() as i64;
        let n = self.grid.dim();
        let values = (0..self.grid.len())
            .map(|i| {
                let a = self.grid.axes(i);
                let mut b = [0usize; 2];
                for d in 0..n {
                    let v = a[d] as i64 + offset[d];
                    if v < 0 || v >= m {
                        return T::from_re(0.0);
                    }
                    b[d] = v as usize;
                }
                self.values[self.grid.flat(b)]
            })
            .collect();
        Self { grid: self.grid, values }
    }

    /// Indices of cells with non-zero value, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&i| self.values[i] != T::from_re(0.0)).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.modulus()).fold(0.0, f64::max)
    }
}

impl RealFunction {
    pub fn to_complex(&self) -> ComplexFunction {
        GridFunction { grid: self.grid, values: self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect() }
    }

    /// Piecewise-linear interpolation between cell centres, clamped at the box edge.
    pub fn sample(&self, x: &[f64]) -> f64 {
        let g = self.grid;
        let m = g.per_axis();
        let locate = |t: f64| {
            let u = ((t + g.half_width()) / g.h() - 0.5).clamp(0.0, (m - 1) as f64);
            let i = (u.floor() as usize).min(m.saturating_sub(2));
            (i, u - i as f64)
        };
        let (i, a) = locate(x[0]);
        if g.dim() == 1 {
            return self.values[i] * (1.0 - a) + self.values[i + 1] * a;
        }
        let (j, b) = locate(x[1]);
        let v = |ii: usize, jj: usize| self.values[g.flat([ii, jj])];
        (v(i, j) * (1.0 - a) + v(i + 1, j) * a) * (1.0 - b) + (v(i, j + 1) * (1.0 - a) + v(i + 1, j + 1) * a) * b
    }
}

impl ComplexFunction {
    pub fn real_part(&self) -> RealFunction {
        GridFunction { grid: self.grid, values: self.values.iter().map(|v| v.re).collect() }
    }

    pub fn imag_part(&self) -> RealFunction {
        GridFunction { grid: self.grid, values: self.values.iter().map(|v| v.im).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonfinite_and_wrong_length() {
        let g = Grid::new(1, 1, 1).unwrap();
        assert!(matches!(RealFunction::new(g, vec![0.0; 3]), Err(Error::LengthMismatch { .. })));
        let mut v = vec![0.0; g.len()];
        v[2] = f64::NAN;
        assert!(matches!(RealFunction::new(g, v), Err(Error::NonFinite(2))));
    }

    #[test]
    fn linear_sample_is_exact() {
        let g = Grid::new(1, 2, 3).unwrap();
        let f = RealFunction::from_fn(g, |x| 2.0 * x[0] - 1.0).unwrap();
        for x in [-1.3, 0.0, 2.0, 3.1] {
            assert!((f.sample(&[x]) - (2.0 * x - 1.0)).abs() < 1e-12);
        }
        let g2 = Grid::new(2, 1, 2).unwrap();
        let f2 = RealFunction::from_fn(g2, |x| x[0] + 3.0 * x[1]).unwrap();
        assert!((f2.sample(&[0.3, -0.7]) - (0.3 - 2.1)).abs() < 1e-12);
    }

    #[test]
    fn shift_by_cells() {
        let g = Grid::new(1, 1, 1).unwrap();
        let f = RealFunction::from_fn(g, |x| x[0]).unwrap();
        let s = f.shifted([1, 0]);
        assert_eq!(s.get(0), f.get(1));
        assert_eq!(s.get(g.len() - 1), 0.0);
    }
}
