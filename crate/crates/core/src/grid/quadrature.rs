use super::{CellSet, Grid, GridFunction, RealFunction, Scalar};
use crate::error::{invalid, Error, Result};
use crate::numeric::CompensatedSum;
use rayon::prelude::*;

/// `∫_S f w` as `Σ f·w·h^n` over ascending cells with compensated summation.
pub fn integrate(f: &RealFunction, s: &CellSet, w: Option<&RealFunction>) -> Result<f64> {
    let g = f.grid();
    g.check_same(&s.grid())?;
    let mut acc = CompensatedSum::new();
    match w {
        Some(w) => {
            g.check_same(&w.grid())?;
            for i in s.iter() {
                acc.add(f.get(i) * w.get(i));
            }
        }
        None => {
            for i in s.iter() {
                acc.add(f.get(i));
            }
        }
    }
    Ok(acc.value() * g.cell_measure())
}

/// `(Σ_S |g|^q w^q h^n)^{1/q}`; `w = None` means the unit weight.
pub fn lq_norm<T: Scalar>(g: &GridFunction<T>, s: &CellSet, w: Option<&RealFunction>, q: f64) -> Result<f64> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(invalid(format!("exponent q = {q} must be finite and positive")));
    }
    let grid = g.grid();
    grid.check_same(&s.grid())?;
    if let Some(w) = w {
        grid.check_same(&w.grid())?;
    }
    let mut acc = CompensatedSum::new();
    for i in s.iter() {
        let a = match w {
            Some(w) => g.get(i).modulus() * w.get(i),
            None => g.get(i).modulus(),
        };
        if a != 0.0 {
            acc.add(a.powf(q));
        }
    }
    Ok((acc.value() * grid.cell_measure()).powf(1.0 / q))
}

/// `e^{-1/(1-r²)}` on `r < 1`, zero beyond.
pub fn bump(r: f64) -> f64 {
    if r.abs() < 1.0 {
        (-1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

/// Smooth radial cutoff: 1 on `r ≤ 1/2`, 0 on `r ≥ 1`, built from the same exponential profile as [`bump`].
pub fn smooth_cutoff(r: f64) -> f64 {
    if r <= 0.5 {
        return 1.0;
    }
    if r >= 1.0 {
        return 0.0;
    }
    let u = 2.0 * (1.0 - r);
    let a = (-1.0 / u).exp();
    let b = (-1.0 / (1.0 - u)).exp();
    a / (a + b)
}

struct Stencil {
    offsets: Vec<[i64; 2]>,
    weights: Vec<f64>,
}

fn stencil(grid: Grid, t: f64) -> Stencil {
    let h = grid.h();
    let reach = (t / h).ceil() as i64;
    let rows = if grid.dim() == 1 { 0 } else { reach };
    let mut offsets = Vec::new();
    let mut raw = Vec::new();
    for dy in -rows..=rows {
        for dx in -reach..=reach {
            let r = ((dx * dx + dy * dy) as f64).sqrt() * h / t;
            let v = bump(r);
            if v > 0.0 {
                offsets.push([dx, dy]);
                raw.push(v);
            }
        }
    }
    let total: f64 = raw.iter().sum();
    Stencil { offsets, weights: raw.into_iter().map(|v| v / total).collect() }
}

/// Convolution with the unit-mass bump of radius `t`; cells near the edge see `g` extended by
/// its nearest boundary value.
pub fn mollify(g: &RealFunction, t: f64) -> Result<RealFunction> {
    let grid = g.grid();
    if !(t >= 2.0 * grid.h()) {
        return Err(Error::InvalidParameter(format!("mollifier radius {t} is below two cells")));
    }
    let st = stencil(grid, t);
    let m = grid.per_axis() as i64;
    let n = grid.dim();
    let vals = g.values();
    let out: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let a = grid.axes(i);
            let mut acc = CompensatedSum::new();
            for (off, w) in st.offsets.iter().zip(&st.weights) {
                let mut b = [0usize; 2];
                for d in 0..n {
                    b[d] = (a[d] as i64 + off[d]).clamp(0, m - 1) as usize;
                }
                acc.add(w * vals[grid.flat(b)]);
            }
            acc.value()
        })
        .collect();
    RealFunction::new(grid, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Cube;

    fn g1() -> Grid {
        Grid::new(1, 1, 6).unwrap()
    }

    #[test]
    fn indicator_mass_is_one() {
        let g = g1();
        let f = RealFunction::from_fn(g, |x| if (0.0..=1.0).contains(&x[0]) { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(integrate(&f, &CellSet::all(g), None).unwrap(), 1.0);
    }

    #[test]
    fn constant_product() {
        let g = g1();
        let q = Cube::interval(g, 0.0, 1.0).unwrap().cell_set();
        let f = RealFunction::constant(g, 3.0);
        let w = RealFunction::constant(g, 2.0);
        assert_eq!(integrate(&f, &q, Some(&w)).unwrap(), 6.0);
    }

    #[test]
    fn norms_of_simple_functions() {
        let g = g1();
        let f = RealFunction::from_fn(g, |x| if (0.0..=1.0).contains(&x[0]) { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(lq_norm(&f, &CellSet::all(g), None, 2.0).unwrap(), 1.0);
        let z = RealFunction::constant(g, 0.0);
        assert_eq!(lq_norm(&z, &CellSet::all(g), None, 3.0).unwrap(), 0.0);
        assert!(lq_norm(&f, &CellSet::all(g), None, 0.0).is_err());
    }

    #[test]
    fn mixed_grids_rejected() {
        let f = RealFunction::constant(g1(), 1.0);
        let s = CellSet::all(Grid::new(1, 1, 5).unwrap());
        assert!(matches!(integrate(&f, &s, None), Err(Error::GridMismatch)));
    }

    #[test]
    fn mollify_preserves_constants_and_lines() {
        let g = g1();
        let c = mollify(&RealFunction::constant(g, 2.5), 0.1).unwrap();
        assert!(c.values().iter().all(|v| (v - 2.5).abs() < 1e-14));
        let h = g.h();
        let f = RealFunction::from_fn(g, |x| x[0]).unwrap();
        let m = mollify(&f, 8.0 * h).unwrap();
        for i in 16..g.len() - 16 {
            assert!((m.get(i) - f.get(i)).abs() < 1e-6);
        }
        assert!(mollify(&f, h).is_err());
    }

    #[test]
    fn cutoff_profile() {
        assert_eq!(smooth_cutoff(0.3), 1.0);
        assert_eq!(smooth_cutoff(1.2), 0.0);
        let mid = smooth_cutoff(0.75);
        assert!((mid - 0.5).abs() < 1e-12);
        assert!(smooth_cutoff(0.6) > smooth_cutoff(0.9));
    }
}
