//! Means, medians, mean oscillation, local mean oscillation and BMO estimates over cube families.

mod family;
mod report;

pub use family::{CubeFamily, FamilyDescriptor, FamilySpec, MIN_CELLS_PER_SIDE};
pub use report::{oscillation_report, CubeRecord, OscillationReport};

use crate::error::{invalid, Error, Result};
use crate::grid::{Cube, GridFunction, RealFunction, Scalar};
use crate::numeric::CompensatedSum;
use crate::rearrange::rearranged_value;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// `[m_min, m_max]`, the set of valid medians; `m_min` is the representative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MedianInterval {
    pub lower: f64,
    pub upper: f64,
}

impl MedianInterval {
    pub fn representative(&self) -> f64 {
        self.lower
    }

    pub fn contains(&self, m: f64) -> bool {
        m >= self.lower && m <= self.upper
    }

    /// Gap between two intervals, zero when they meet.
    pub fn distance(&self, other: &MedianInterval) -> f64 {
        (other.lower - self.upper).max(self.lower - other.upper).max(0.0)
    }

    /// Point of the interval nearest to `c`.
    pub fn nearest(&self, c: f64) -> f64 {
        c.clamp(self.lower, self.upper)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanOscillation<T> {
    pub average: T,
    pub oscillation: f64,
}

/// Where the infimum over centres is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centers {
    Real,
    Complex,
}

/// Oscillation functional used for suprema over a family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OscMethod {
    Mean,
    Local { lambda: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BmoEstimate {
    pub value: f64,
    pub cube_index: usize,
    pub cube: Cube,
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("λ = {lambda} not in (0, 1)")))
    }
}

fn cube_values<T: Scalar>(f: &GridFunction<T>, q: &Cube) -> Result<Vec<T>> {
    f.grid().check_same(&q.grid())?;
    Ok(q.cells().map(|i| f.get(i)).collect())
}

fn average<T: Scalar>(values: &[T]) -> T {
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for v in values {
        re.add(v.re());
        im.add(v.im());
    }
    let k = values.len() as f64;
    T::from_parts(re.value() / k, im.value() / k)
}

fn mean_abs_dev<T: Scalar>(values: &[T], c: T) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add((*v - c).modulus());
    }
    acc.value() / values.len() as f64
}

/// `O(f;Q) = (1/|Q|)∫_Q |f - f_Q|`, with `f_Q`.
pub fn mean_oscillation<T: Scalar>(f: &GridFunction<T>, q: &Cube) -> Result<MeanOscillation<T>> {
    let v = cube_values(f, q)?;
    let avg = average(&v);
    Ok(MeanOscillation { average: avg, oscillation: mean_abs_dev(&v, avg) })
}

/// Median interval of a list of equally weighted values. Reorders `values`.
pub fn median_of(values: &mut [f64]) -> Result<MedianInterval> {
    if values.is_empty() {
        return Err(Error::Empty("cube"));
    }
    values.sort_unstable_by(f64::total_cmp);
    let k = values.len();
    Ok(MedianInterval { lower: values[k.div_ceil(2) - 1], upper: values[k / 2] })
}

/// Median interval of `f` over `Q`.
pub fn median(f: &RealFunction, q: &Cube) -> Result<MedianInterval> {
    median_of(&mut cube_values(f, q)?)
}

fn lambda_rank(lambda: f64, k: usize) -> usize {
    ((lambda * k as f64).ceil() as usize).max(1)
}

/// `a_λ` of equally weighted values about their representative median.
pub fn local_osc_of(values: &[f64], lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let mut sorted = values.to_vec();
    let m = median_of(&mut sorted)?.representative();
    let mut dev: Vec<f64> = values.iter().map(|v| (v - m).abs()).collect();
    let k = dev.len() as f64;
    rearranged_value(&mut dev, lambda * k, 1.0)
}

/// `a_λ(f;Q) = ((f - m_f(Q))χ_Q)*(λ|Q|)`.
pub fn local_osc(f: &RealFunction, q: &Cube, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let v = cube_values(f, q)?;
    let mut dev = v.clone();
    let m = median_of(&mut dev)?.representative();
    let mut dev: Vec<f64> = v.iter().map(|x| (x - m).abs()).collect();
    rearranged_value(&mut dev, lambda * q.measure(), q.grid().cell_measure())
}

/// Half-length of the shortest window of sorted values holding more than `(1-λ)` of them.
pub fn shortest_window(values: &[f64], lambda: f64) -> Result<(f64, f64)> {
    check_lambda(lambda)?;
    if values.is_empty() {
        return Err(Error::Empty("cube"));
    }
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    let k = v.len();
    let need = k - lambda_rank(lambda, k) + 1;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=k - need {
        let w = (v[i + need - 1] - v[i]) / 2.0;
        if w < best.0 {
            best = (w, v[i] + w);
        }
    }
    Ok(best)
}

fn rank_distance(values: &[Complex64], c: Complex64, rank: usize, scratch: &mut Vec<f64>) -> f64 {
    scratch.clear();
    scratch.extend(values.iter().map(|v| (v - c).norm()));
    let (_, x, _) = scratch.select_nth_unstable_by(rank - 1, |a, b| b.total_cmp(a));
    *x
}

fn pattern_search(
    values: &[Complex64],
    rank: usize,
    starts: &[Complex64],
    box_lo: Complex64,
    box_hi: Complex64,
    along_real: bool,
) -> f64 {
    let mut scratch = Vec::with_capacity(values.len());
    let mut eval = |c: Complex64| rank_distance(values, c, rank, &mut scratch);
    let span = (box_hi - box_lo).norm().max(f64::MIN_POSITIVE);
    let mut best_c = starts[0];
    let mut best = eval(best_c);
    let consider = |c: Complex64, best: &mut f64, best_c: &mut Complex64, eval: &mut dyn FnMut(Complex64) -> f64| {
        let r = eval(c);
        if r < *best {
            *best = r;
            *best_c = c;
        }
    };
    for &s in &starts[1..] {
        consider(s, &mut best, &mut best_c, &mut eval);
    }
    const COARSE: usize = 33;
    let rows = if along_real { 1 } else { COARSE };
    for a in 0..COARSE {
        for b in 0..rows {
            let re = box_lo.re + (box_hi.re - box_lo.re) * a as f64 / (COARSE - 1) as f64;
            let im = if along_real { 0.0 } else { box_lo.im + (box_hi.im - box_lo.im) * b as f64 / (COARSE - 1) as f64 };
            consider(Complex64::new(re, im), &mut best, &mut best_c, &mut eval);
        }
    }
    let dirs: &[(f64, f64)] = if along_real {
        &[(1.0, 0.0), (-1.0, 0.0)]
    } else {
        &[(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
    };
    let mut step = span / (COARSE - 1) as f64;
    let floor = 1e-8 * span.max(1.0);
    while step > floor {
        let centre = best_c;
        let before = best;
        for (dx, dy) in dirs {
            consider(centre + Complex64::new(dx * step, dy * step), &mut best, &mut best_c, &mut eval);
        }
        if best >= before {
            step /= 2.0;
        }
    }
    best
}

/// `Õ(f;Q) = inf_c (1/|Q|)∫_Q |f - c|` and a minimising centre.
pub fn inf_mean_oscillation<T: Scalar>(f: &GridFunction<T>, q: &Cube) -> Result<(f64, Complex64)> {
    let v = cube_values(f, q)?;
    if v.is_empty() {
        return Err(Error::Empty("cube"));
    }
    if T::KIND == crate::grid::ScalarKind::Real {
        let mut re: Vec<f64> = v.iter().map(|x| x.re()).collect();
        let m = median_of(&mut re)?.representative();
        return Ok((mean_abs_dev(&v, T::from_re(m)), Complex64::new(m, 0.0)));
    }
    let z: Vec<Complex64> = v.iter().map(|x| x.to_complex()).collect();
    let c = geometric_median(&z)?;
    let at = |c: Complex64| {
        let mut acc = CompensatedSum::new();
        for p in &z {
            acc.add((p - c).norm());
        }
        acc.value() / z.len() as f64
    };
    let mean = average(&z);
    let (a, b) = (at(c), at(mean));
    Ok(if a <= b { (a, c) } else { (b, mean) })
}

/// Minimiser of `Σ|z_i - c|` by cyclic line searches along four fixed directions.
fn geometric_median(z: &[Complex64]) -> Result<Complex64> {
    let mut re: Vec<f64> = z.iter().map(|p| p.re).collect();
    let mut im: Vec<f64> = z.iter().map(|p| p.im).collect();
    let mut c = Complex64::new(median_of(&mut re)?.representative(), median_of(&mut im)?.representative());
    let spread = z.iter().map(|p| (p - c).norm()).fold(0.0, f64::max);
    if spread == 0.0 {
        return Ok(c);
    }
    let obj = |c: Complex64| z.iter().map(|p| (p - c).norm()).sum::<f64>();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let dirs = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(s, s), Complex64::new(s, -s)];
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..500 {
        let start = c;
        for d in dirs {
            let (mut a, mut b) = (-spread, spread);
            let mut x1 = b - golden * (b - a);
            let mut x2 = a + golden * (b - a);
            let (mut f1, mut f2) = (obj(c + d * x1), obj(c + d * x2));
            while b - a > 1e-13 * spread {
                if f1 <= f2 {
                    b = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = b - golden * (b - a);
                    f1 = obj(c + d * x1);
                } else {
                    a = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = a + golden * (b - a);
                    f2 = obj(c + d * x2);
                }
            }
            let t = 0.5 * (a + b);
            if obj(c + d * t) < obj(c) {
                c += d * t;
            }
        }
        if (c - start).norm() <= 1e-10 * spread {
            break;
        }
    }
    Ok(c)
}

/// `ã_λ` (real centres) or `ā_λ` (complex centres): `inf_c ((f - c)χ_Q)*(λ|Q|)`.
///
/// Real data with complex centres reduce to the real window: leaving the real axis only
/// lengthens every distance.
pub fn local_osc_inf<T: Scalar>(f: &GridFunction<T>, q: &Cube, lambda: f64, centers: Centers) -> Result<f64> {
    check_lambda(lambda)?;
    let v = cube_values(f, q)?;
    if v.is_empty() {
        return Err(Error::Empty("cube"));
    }
    if T::KIND == crate::grid::ScalarKind::Real {
        let re: Vec<f64> = v.iter().map(|x| x.re()).collect();
        return Ok(shortest_window(&re, lambda)?.0);
    }
    let z: Vec<Complex64> = v.iter().map(|x| x.to_complex()).collect();
    let rank = lambda_rank(lambda, z.len());
    let lo = Complex64::new(
        z.iter().map(|p| p.re).fold(f64::INFINITY, f64::min),
        z.iter().map(|p| p.im).fold(f64::INFINITY, f64::min),
    );
    let hi = Complex64::new(
        z.iter().map(|p| p.re).fold(f64::NEG_INFINITY, f64::max),
        z.iter().map(|p| p.im).fold(f64::NEG_INFINITY, f64::max),
    );
    let mut re: Vec<f64> = z.iter().map(|p| p.re).collect();
    let med_re = median_of(&mut re)?.representative();
    let along_real = centers == Centers::Real;
    let mut starts = vec![Complex64::new(med_re, 0.0)];
    if !along_real {
        let mut im: Vec<f64> = z.iter().map(|p| p.im).collect();
        starts.push(Complex64::new(med_re, median_of(&mut im)?.representative()));
        starts.push(geometric_median(&z)?);
    }
    let (lo, hi) = if along_real { (Complex64::new(lo.re, 0.0), Complex64::new(hi.re, 0.0)) } else { (lo, hi) };
    Ok(pattern_search(&z, rank, &starts, lo, hi, along_real))
}

/// Supremum of the chosen oscillation over the family, with the first attaining cube.
pub fn bmo_norm(f: &RealFunction, fam: &CubeFamily, method: OscMethod) -> Result<BmoEstimate> {
    if fam.is_empty() {
        return Err(Error::Empty("cube family"));
    }
    f.grid().check_same(&fam.grid())?;
    if let OscMethod::Local { lambda } = method {
        check_lambda(lambda)?;
    }
    let vals: Vec<f64> = fam
        .cubes()
        .par_iter()
        .map(|q| match method {
            OscMethod::Mean => mean_oscillation(f, q).map(|m| m.oscillation),
            OscMethod::Local { lambda } => local_osc(f, q, lambda),
        })
        .collect::<Result<_>>()?;
    let (cube_index, value) = argmax(&vals);
    Ok(BmoEstimate { value, cube_index, cube: fam.cubes()[cube_index] })
}

/// Nested cubes from `outer` to `inner` in `1 + ⌊log_{1/(1/2+λ)}(|outer|/|inner|)⌋` steps, sides
/// interpolated geometrically and corners linearly.
pub fn median_chain(outer: &Cube, inner: &Cube, lambda: f64) -> Result<Vec<Cube>> {
    if !(lambda > 0.0 && lambda < 0.5) {
        return Err(invalid(format!("λ = {lambda} not in (0, 1/2)")));
    }
    if !outer.contains_cube(inner) {
        return Err(invalid("inner cube is not contained in the outer cube"));
    }
    let grid = outer.grid();
    let n = grid.dim();
    let ratio = outer.measure() / inner.measure();
    let steps = 1 + (ratio.ln() / (0.5 + lambda).recip().ln() + 1e-12).floor() as usize;
    let (s0, st) = (outer.side_cells() as f64, inner.side_cells() as f64);
    let (lo0, lot) = (outer.lower_index(), inner.lower_index());
    let mut chain = vec![*outer];
    for i in 1..steps {
        let side = (s0 * (st / s0).powf(i as f64 / steps as f64)).round();
        let u = s0 - side;
        let mut lo = [0usize; 2];
        for d in 0..n {
            let a = if s0 > st { (lot[d] as f64 - lo0[d] as f64) / (s0 - st) } else { 0.0 };
            lo[d] = (lo0[d] as f64 + a * u).round() as usize;
        }
        chain.push(Cube::new(grid, lo, side as usize)?);
    }
    chain.push(*inner);
    Ok(chain)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MedianRegularity {
    pub steps: usize,
    /// Gap between the median intervals of the outer and inner cube.
    pub distance: f64,
    /// `steps · max a_λ` over every cube of the chain but the last.
    pub bound: f64,
    /// Whether every link has measure ratio above `1/2 + λ`.
    pub links_admissible: bool,
    /// `(gap, a_λ(outer link))` per link.
    pub links: Vec<(f64, f64)>,
}

/// Compares the median intervals of nested cubes with the oscillation along [`median_chain`].
pub fn median_regularity(f: &RealFunction, outer: &Cube, inner: &Cube, lambda: f64) -> Result<MedianRegularity> {
    let chain = median_chain(outer, inner, lambda)?;
    let medians = chain.iter().map(|q| median(f, q)).collect::<Result<Vec<_>>>()?;
    let links = chain
        .windows(2)
        .zip(medians.windows(2))
        .map(|(c, m)| Ok((m[0].distance(&m[1]), local_osc(f, &c[0], lambda)?)))
        .collect::<Result<Vec<_>>>()?;
    let steps = links.len();
    let top = links.iter().map(|l| l.1).fold(0.0, f64::max);
    Ok(MedianRegularity {
        steps,
        distance: medians[0].distance(&medians[steps]),
        bound: steps as f64 * top,
        links_admissible: chain.windows(2).all(|c| c[1].measure() > (0.5 + lambda) * c[0].measure()),
        links,
    })
}

/// First index of the maximum.
pub(crate) fn argmax(vals: &[f64]) -> (usize, f64) {
    let mut best = (0, vals[0]);
    for (i, &v) in vals.iter().enumerate().skip(1) {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}
