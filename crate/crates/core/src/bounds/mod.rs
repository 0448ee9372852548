//! Lower and upper estimates for commutator images of normalised indicators, and witness
//! sequences whose images stay separated.

mod witness;

pub use witness::{witness_sequence, RatioPolicy, Scenario, WitnessParams, WitnessReport};

use crate::error::{invalid, Error, Result};
use crate::grid::{lq_norm, CellPairSet, CellSet, Cube, Point, RealFunction};
use crate::numeric::{compensated_sum, ls_slope};
use crate::operators::{commutator_on, KernelSpec, SymbolPowerCommutator};
use crate::oscillation::{local_osc, median, shortest_window};
use crate::weights::Weight;
use serde::Serialize;

/// Which oscillation the constructed sets certify via `min_{E×F} |b(x) - b(y)|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certifies {
    LocalOsc,
    ShortestWindow,
    Neither,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ConstructionChecks {
    pub e_measure: bool,
    pub f_measure: bool,
    pub g_measure: bool,
    pub kernel_floor: bool,
    pub constant_signs: bool,
}

impl ConstructionChecks {
    pub fn all(&self) -> bool {
        self.e_measure && self.f_measure && self.g_measure && self.kernel_floor && self.constant_signs
    }
}

/// Cube `Q`, its far translate `P`, and the sets `E ⊂ Q`, `F ⊂ P`, `G ⊂ E×F`.
#[derive(Clone, Debug)]
pub struct LowerBoundConstruction {
    pub q: Cube,
    pub p: Cube,
    pub e: CellSet,
    pub f: CellSet,
    pub g: CellPairSet,
    pub lambda: f64,
    pub eps0: f64,
    pub k0: usize,
    pub theta0: Point,
    pub omega_sign: f64,
    /// Sign of `b(x) - b(y)` on `E×F` (`+1` when `b` is constant).
    pub b_sign: f64,
    pub median_p: f64,
    pub min_gap: f64,
    pub a_lambda: f64,
    pub a_tilde: f64,
    pub certifies: Certifies,
    pub checks: ConstructionChecks,
}

#[derive(Serialize)]
struct ConstructionSummary<'a> {
    q: &'a Cube,
    p: &'a Cube,
    e_measure: f64,
    f_measure: f64,
    g_measure: f64,
    lambda: f64,
    eps0: f64,
    k0: usize,
    theta0: Point,
    omega_sign: f64,
    b_sign: f64,
    median_p: f64,
    min_gap: f64,
    a_lambda: f64,
    a_tilde: f64,
    certifies: Certifies,
    checks: ConstructionChecks,
}

impl Serialize for LowerBoundConstruction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ConstructionSummary {
            q: &self.q,
            p: &self.p,
            e_measure: self.e.measure(),
            f_measure: self.f.measure(),
            g_measure: self.g.measure(),
            lambda: self.lambda,
            eps0: self.eps0,
            k0: self.k0,
            theta0: self.theta0,
            omega_sign: self.omega_sign,
            b_sign: self.b_sign,
            median_p: self.median_p,
            min_gap: self.min_gap,
            a_lambda: self.a_lambda,
            a_tilde: self.a_tilde,
            certifies: self.certifies,
            checks: self.checks,
        }
        .serialize(s)
    }
}

const K0_SEARCH: usize = 64;

/// Offset of `P` from `Q` in cells for a given `k_0`.
fn translate_cells(side: usize, k0: usize, theta: Point, n: usize) -> [i64; 2] {
    let mut off = [0i64; 2];
    for d in 0..n {
        off[d] = -((k0 * side) as f64 * theta[d]).round() as i64;
    }
    off
}

/// Pairs `(x, y) ∈ Q×P` with `s·Ω(x - y) < ε_0`, counted through the difference set.
fn bad_pair_count(k: &KernelSpec, side: usize, off: [i64; 2], h: f64, sign: f64, eps0: f64) -> usize {
    let c = side as i64;
    let n = k.dim();
    let range: Vec<i64> = (-(c - 1)..c).collect();
    let ys: &[i64] = if n == 1 { &[0] } else { &range };
    let mut bad = 0usize;
    for &dy in ys {
        for &dx in &range {
            // x - y = -(offset) + (a - b) cells
            let z = [h * (dx - off[0]) as f64, h * (dy - off[1]) as f64];
            if sign * k.omega(z) < eps0 {
                let mult = (c - dx.abs()) as usize * if n == 1 { 1 } else { (c - dy.abs()) as usize };
                bad += mult;
            }
        }
    }
    bad
}

/// Builds `P, E, F, G` for the cube `Q`.
pub fn construct_sets(q: &Cube, b: &RealFunction, lambda: f64, k: &KernelSpec) -> Result<LowerBoundConstruction> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(invalid(format!("λ = {lambda} not in (0, 1)")));
    }
    let grid = q.grid();
    grid.check_same(&b.grid())?;
    let n = grid.dim();
    if k.dim() != n {
        return Err(invalid("kernel and grid dimensions differ"));
    }
    let (theta0, idx) = k.argmax_direction().ok_or_else(|| invalid("the set construction needs a homogeneous kernel"))?;
    let top = k.omega_table().map(|o| o[idx]).unwrap_or(0.0);
    if top == 0.0 {
        return Err(Error::NotFindable("Ω vanishes on the whole angle table".into()));
    }
    let omega_sign = top.signum();
    let eps0 = top.abs() / 2.0;
    let side = q.side_cells();
    let cells_q = q.cell_count();
    let h = grid.h();
    let qm = q.measure();
    let budget = lambda * qm * qm / 8.0;
    let start = (10.0 * (n as f64).sqrt()).floor() as usize + 1;
    let mut found = None;
    for k0 in start..start + K0_SEARCH {
        let off = translate_cells(side, k0, theta0, n);
        let bad = bad_pair_count(k, side, off, h, omega_sign, eps0);
        if bad as f64 * grid.cell_measure().powi(2) <= budget {
            found = Some((k0, off));
            break;
        }
    }
    let (k0, off) = found.ok_or_else(|| Error::NotFindable("no k_0 meets the cone condition".into()))?;
    let p = q.translate(off)?;

    let mp = median(b, &p)?.representative();
    let mut ranked: Vec<usize> = q.cells().collect();
    ranked.sort_by(|&x, &y| (b.get(y) - mp).abs().total_cmp(&(b.get(x) - mp).abs()).then(x.cmp(&y)));
    let top_count = ((lambda * cells_q as f64).ceil() as usize).max(1);
    let positives = ranked[..top_count].iter().filter(|&&i| b.get(i) >= mp).count();
    let b_sign = if 2 * positives >= top_count { 1.0 } else { -1.0 };
    let e_count = ((lambda * cells_q as f64 / 2.0).round() as usize).max(1);
    let e_cells: Vec<usize> = ranked
        .iter()
        .copied()
        .filter(|&i| b_sign * (b.get(i) - mp) >= 0.0)
        .take(e_count)
        .collect();
    let mut p_ranked: Vec<usize> = p.cells().filter(|&i| b_sign * (mp - b.get(i)) >= 0.0).collect();
    p_ranked.sort_by(|&x, &y| (b.get(y) - mp).abs().total_cmp(&(b.get(x) - mp).abs()).then(x.cmp(&y)));
    let f_count = (cells_q as f64 / 2.0).round() as usize;
    let f_cells: Vec<usize> = p_ranked.into_iter().take(f_count).collect();
    let e = CellSet::new(grid, e_cells)?;
    let f = CellSet::new(grid, f_cells)?;

    let g = CellPairSet::from_predicate(e.clone(), f.clone(), |x, y| {
        let (cx, cy) = (grid.center(x), grid.center(y));
        omega_sign * k.omega([cx[0] - cy[0], cx[1] - cy[1]]) >= eps0
    })?;

    let diffs = e.iter().flat_map(|x| f.iter().map(move |y| b.get(x) - b.get(y)));
    let (mut lo, mut hi, mut min_gap) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY);
    for d in diffs {
        lo = lo.min(d);
        hi = hi.max(d);
        min_gap = min_gap.min(d.abs());
    }
    let mut omega_signs_ok = true;
    for x in e.iter() {
        for y in f.iter() {
            let (cx, cy) = (grid.center(x), grid.center(y));
            if omega_sign * k.omega([cx[0] - cy[0], cx[1] - cy[1]]) < 0.0 {
                omega_signs_ok = false;
            }
        }
    }
    let constant_b = lo >= 0.0 || hi <= 0.0;
    let a_lambda = local_osc(b, q, lambda)?;
    let a_tilde = shortest_window(&b.gather(&q.cell_set()), lambda)?.0;
    let certifies = if min_gap >= a_lambda {
        Certifies::LocalOsc
    } else if min_gap >= a_tilde {
        Certifies::ShortestWindow
    } else {
        Certifies::Neither
    };
    let cm = grid.cell_measure();
    let kernel_floor = e.iter().all(|x| {
        f.iter().all(|y| {
            if !g.contains(x, y) {
                return true;
            }
            let (cx, cy) = (grid.center(x), grid.center(y));
            k.omega([cx[0] - cy[0], cx[1] - cy[1]]).abs() >= eps0
        })
    });
    let checks = ConstructionChecks {
        e_measure: (e.measure() - lambda * qm / 2.0).abs() <= cm,
        f_measure: (f.measure() - qm / 2.0).abs() <= cm,
        g_measure: g.measure() >= lambda * qm * qm / 8.0 - 1e-12 * qm * qm,
        kernel_floor,
        constant_signs: constant_b && omega_signs_ok,
    };
    Ok(LowerBoundConstruction {
        q: *q,
        p,
        e,
        f,
        g,
        lambda,
        eps0,
        k0,
        theta0,
        omega_sign,
        b_sign,
        median_p: mp,
        min_gap,
        a_lambda,
        a_tilde,
        certifies,
        checks,
    })
}

/// `(∫_F ω^p)^{-1/p} χ_F`.
pub fn normalized_indicator(fset: &CellSet, w: &Weight, p: f64) -> Result<RealFunction> {
    let grid = fset.grid();
    let mass = compensated_sum(fset.iter().map(|i| w.get(i).powf(p))) * grid.cell_measure();
    if !(mass > 0.0) {
        return Err(Error::Empty("the set F"));
    }
    let c = mass.powf(-1.0 / p);
    let mut v = vec![0.0; grid.len()];
    for i in fset.iter() {
        v[i] = c;
    }
    RealFunction::new(grid, v)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowerEstimate {
    pub lhs: f64,
    pub a_lambda_m: f64,
    /// `lhs / a_λ^m`, absent when `a_λ = 0`.
    pub ratio: Option<f64>,
    pub removed_measure: f64,
    /// `|((E∖B)×F) ∩ G|` in cell pairs.
    pub pairs_kept: usize,
    /// `|G| - |B|·|F|` in cell pairs.
    pub pairs_floor: i64,
}

/// `‖T_b^m f‖_{L^q(E∖B, ω^q)}` against `a_λ(b; Q)^m`.
pub fn lower_estimate(
    cons: &LowerBoundConstruction,
    b: &RealFunction,
    m: u32,
    k: &KernelSpec,
    w: &Weight,
    p: f64,
    q: f64,
    removed: &CellSet,
) -> Result<LowerEstimate> {
    if removed.measure() > cons.lambda / 8.0 * cons.q.measure() + 1e-12 {
        return Err(invalid(format!(
            "removed set of measure {} exceeds λ|Q|/8 = {}",
            removed.measure(),
            cons.lambda / 8.0 * cons.q.measure()
        )));
    }
    let f = normalized_indicator(&cons.f, w, p)?;
    let c = SymbolPowerCommutator::new(k.clone(), b.clone(), m)?;
    let targets = cons.e.difference(removed)?;
    let image = commutator_on(&c, &f, &targets)?;
    let grid = b.grid();
    let mut full = vec![0.0; grid.len()];
    for (&i, v) in targets.cells().iter().zip(image) {
        full[i] = v;
    }
    let lhs = lq_norm(&RealFunction::new(grid, full)?, &targets, Some(w.function()), q)?;
    let a_m = cons.a_lambda.powi(m as i32);
    let b_in_e = removed.intersection(&cons.e)?.len() as i64;
    Ok(LowerEstimate {
        lhs,
        a_lambda_m: a_m,
        ratio: (a_m > 0.0).then(|| lhs / a_m),
        removed_measure: removed.measure(),
        pairs_kept: cons.g.count_rows_outside(removed),
        pairs_floor: cons.g.count() as i64 - b_in_e * cons.f.len() as i64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpperProfile {
    pub d: Vec<i32>,
    pub u: Vec<f64>,
    /// Least-squares slope of `log_2(u_d / d^m)` against `d`.
    pub slope: Option<f64>,
    /// Whether `2^d Q` contains `P`, which the decay needs.
    pub contains_p: Vec<bool>,
}

/// Cells whose centres lie in the closed concentric dilate `t·Q` (clipped to the box).
pub(crate) fn dilate_cells(q: &Cube, t: f64) -> Vec<bool> {
    let grid = q.grid();
    let c = q.center();
    let r = t * q.side() / 2.0;
    (0..grid.len())
        .map(|i| {
            let x = grid.center(i);
            (0..grid.dim()).all(|d| (x[d] - c[d]).abs() <= r)
        })
        .collect()
}

/// `u_d = ‖T_b^m f‖_{L^q(2^{d+1}Q ∖ 2^d Q, ω^q)}` for `d` in `d_range`.
pub fn upper_profile(
    cons: &LowerBoundConstruction,
    b: &RealFunction,
    m: u32,
    k: &KernelSpec,
    w: &Weight,
    p: f64,
    q: f64,
    d_range: std::ops::RangeInclusive<i32>,
) -> Result<UpperProfile> {
    let grid = b.grid();
    let f = normalized_indicator(&cons.f, w, p)?;
    let c = SymbolPowerCommutator::new(k.clone(), b.clone(), m)?;
    let (mut ds, mut us, mut inside) = (Vec::new(), Vec::new(), Vec::new());
    for d in d_range {
        if d < 1 {
            return Err(invalid("annulus index d must be at least 1"));
        }
        let outer = cons.q.dilate(2f64.powi(d + 1)).map_err(|_| {
            Error::OutOfDomain(format!("annulus 2^{}Q leaves the box", d + 1))
        })?;
        let inner = cons.q.dilate(2f64.powi(d))?;
        let ring = outer.cell_set().difference(&inner.cell_set())?;
        let vals = commutator_on(&c, &f, &ring)?;
        let mut full = vec![0.0; grid.len()];
        for (&i, v) in ring.cells().iter().zip(vals) {
            full[i] = v;
        }
        us.push(lq_norm(&RealFunction::new(grid, full)?, &ring, Some(w.function()), q)?);
        inside.push(inner.contains_cube(&cons.p));
        ds.push(d);
    }
    let slope = if us.iter().all(|&u| u > 0.0) {
        let xs: Vec<f64> = ds.iter().map(|&d| d as f64).collect();
        let ys: Vec<f64> = ds.iter().zip(&us).map(|(&d, u)| (u / (d as f64).powi(m as i32)).log2()).collect();
        ls_slope(&xs, &ys)
    } else {
        None
    };
    Ok(UpperProfile { d: ds, u: us, slope, contains_p: inside })
}
