//! Vanishing-oscillation diagnostics and the piecewise-median smooth approximant.

use crate::error::{invalid, Error, Result};
use crate::grid::{mollify, Cube, Grid, RealFunction};
use crate::oscillation::{
    bmo_norm, local_osc, mean_oscillation, median, shortest_window, CubeFamily, OscMethod,
};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    /// Cube measure for the scale curves, half-width `d` for the far-field curve.
    pub x: f64,
    pub value: f64,
    pub cubes: usize,
}

/// Suprema of the oscillation by cube size and by distance from the origin.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitProfile {
    pub method: OscMethod,
    /// Measures decreasing towards the finest family scale.
    pub small_scale: Vec<CurvePoint>,
    /// Measures increasing towards the coarsest family scale.
    pub large_scale: Vec<CurvePoint>,
    /// `d = 2^j` increasing; cubes whose closure misses `[-d, d]^n`.
    pub far_field: Vec<CurvePoint>,
}

fn cube_osc(f: &RealFunction, q: &Cube, method: OscMethod) -> Result<f64> {
    match method {
        OscMethod::Mean => mean_oscillation(f, q).map(|m| m.oscillation),
        OscMethod::Local { lambda } => Ok(shortest_window(&f.gather(&q.cell_set()), lambda)?.0),
    }
}

fn per_cube(f: &RealFunction, fam: &CubeFamily, osc: impl Fn(&Cube) -> Result<f64> + Sync + Send) -> Result<Vec<f64>> {
    if fam.is_empty() {
        return Err(Error::Empty("cube family"));
    }
    f.grid().check_same(&fam.grid())?;
    fam.cubes().par_iter().map(osc).collect()
}

fn level(q: &Cube) -> i32 {
    q.side().log2().round() as i32
}

pub fn limit_profile(f: &RealFunction, fam: &CubeFamily, method: OscMethod) -> Result<LimitProfile> {
    let vals = per_cube(f, fam, |q| cube_osc(f, q, method))?;
    let n = f.grid().dim() as i32;
    let mut by_level: BTreeMap<i32, (f64, usize)> = BTreeMap::new();
    for (q, &v) in fam.cubes().iter().zip(&vals) {
        let e = by_level.entry(level(q)).or_insert((0.0, 0));
        e.0 = e.0.max(v);
        e.1 += 1;
    }
    let point = |k: i32, (value, cubes): (f64, usize)| CurvePoint { x: 2f64.powi(n * k), value, cubes };
    let small_scale = by_level.iter().rev().filter(|(&k, _)| k <= 0).map(|(&k, &e)| point(k, e)).collect();
    let large_scale = by_level.iter().filter(|(&k, _)| k >= 0).map(|(&k, &e)| point(k, e)).collect();
    let lo = *by_level.keys().next().unwrap_or(&0);
    let far_field = (lo..f.grid().box_exponent())
        .filter_map(|j| {
            let d = 2f64.powi(j);
            let (value, cubes) = fam
                .cubes()
                .iter()
                .zip(&vals)
                .filter(|(q, _)| q.misses_box(d))
                .fold((0.0f64, 0usize), |(m, c), (_, &v)| (m.max(v), c + 1));
            (cubes > 0).then_some(CurvePoint { x: d, value, cubes })
        })
        .collect();
    Ok(LimitProfile { method, small_scale, large_scale, far_field })
}

/// Pass/fail of each condition at the extreme end of its curve. Finite scales cannot settle
/// membership, so `conclusive` is always false.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CmoVerdict {
    pub small_scale: bool,
    pub large_scale: bool,
    pub far_field: bool,
    pub conclusive: bool,
}

pub fn cmo_check(profile: &LimitProfile, thresholds: [f64; 3]) -> CmoVerdict {
    let ok = |c: &[CurvePoint], t: f64| c.last().is_none_or(|p| p.value <= t);
    CmoVerdict {
        small_scale: ok(&profile.small_scale, thresholds[0]),
        large_scale: ok(&profile.large_scale, thresholds[1]),
        far_field: ok(&profile.far_field, thresholds[2]),
        conclusive: false,
    }
}

/// Integer parameters of the construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ApproximantParams {
    pub i_eps: i32,
    pub j_eps: i32,
    pub k_eps: i32,
    pub d1: i32,
    pub d2: i32,
    pub d3: i32,
    pub lambda: f64,
    pub lambda_tilde: f64,
    pub v: i32,
    pub t: f64,
}

/// `d_3 = d_2 + 4 + ⌈log_2 (4/(1-2λ))^{1/n}⌉`.
pub fn d3_from(d2: i32, lambda: f64, n: usize) -> i32 {
    d2 + 4 + ((4.0 / (1.0 - 2.0 * lambda)).log2() / n as f64 - 1e-12).ceil() as i32
}

/// `λ̃ = (2λ + 1)/4`.
pub fn lambda_tilde(lambda: f64) -> f64 {
    (2.0 * lambda + 1.0) / 4.0
}

/// `v = max(3 + ⌊log_2 (((1+2λ)/(4λ))^{1/n} - 1)^{-1}⌋, 0)`.
pub fn v_from(lambda: f64, n: usize) -> i32 {
    let r = ((1.0 + 2.0 * lambda) / (4.0 * lambda)).powf(1.0 / n as f64) - 1.0;
    (3 + ((1.0 / r).log2() + 1e-12).floor() as i32).max(0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Certificate {
    /// `sup_Q ã_λ̃(f - g_ε; Q)` over the family.
    pub local_sup: f64,
    /// Mean-oscillation norm of `f - g_{ε,t}` over the family.
    pub bmo: f64,
    /// `bmo / ε`.
    pub constant: f64,
    /// Largest jump of `g_ε` between touching tiles, over `ε`.
    pub jump_constant: f64,
    /// `sup |g_ε * φ_t - g_ε| / ε`.
    pub smoothing_constant: f64,
    pub smoothing_bound_met: bool,
    /// `m_f(R_{d_3})`.
    pub offset: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ApproximantResult {
    pub epsilon: f64,
    pub params: ApproximantParams,
    pub tiles: usize,
    pub certificate: Certificate,
    #[serde(skip)]
    pub g_eps: RealFunction,
    #[serde(skip)]
    pub g_eps_t: RealFunction,
}

/// Tolerance `C` in `sup |g_ε * φ_t - g_ε| ≤ C ε` when choosing `t`.
pub const SMOOTHING_TOLERANCE: f64 = 2.0;

fn not_findable(what: &str) -> Error {
    Error::NotFindable(what.to_string())
}

/// Largest `i` with `sup{a_λ(Q) : l(Q) ≤ 2^{i+1}} < ε`, capped at `cap`.
fn find_i(levels: &BTreeMap<i32, f64>, eps: f64, cap: i32) -> Result<i32> {
    let first = *levels.keys().next().ok_or(Error::Empty("cube family"))?;
    let mut worst = 0.0f64;
    let mut best = None;
    for i in (first - 1)..=cap {
        if let Some(&v) = levels.get(&(i + 1)) {
            worst = worst.max(v);
        }
        if worst < eps {
            best = Some(i);
        } else {
            break;
        }
    }
    best.ok_or_else(|| not_findable(&format!("small-scale oscillation reaches ε = {eps} at the finest scale")))
}

/// Smallest `j` with `sup{a_λ(Q) : l(Q) ≥ 2^j} < ε`.
fn find_j(levels: &BTreeMap<i32, f64>, eps: f64) -> Result<i32> {
    let mut best = None;
    let mut worst = 0.0f64;
    for (&k, &v) in levels.iter().rev() {
        worst = worst.max(v);
        if worst < eps {
            best = Some(k);
        } else {
            break;
        }
    }
    best.ok_or_else(|| not_findable(&format!("large-scale oscillation reaches ε = {eps} at the coarsest scale")))
}

fn tile_of(grid: Grid, idx: usize, i_eps: i32, d1: i32) -> (usize, [usize; 2]) {
    let c = grid.center(idx);
    let r = (0..grid.dim()).map(|d| c[d].abs()).fold(0.0f64, f64::max);
    let m = r.log2().ceil() as i32;
    let side = 2f64.powi(if m <= d1 { i_eps } else { i_eps + m - d1 });
    let cells = (side / grid.h()).round() as usize;
    let mut lo = [0usize; 2];
    for d in 0..grid.dim() {
        let k = (c[d] / side).floor();
        lo[d] = ((k * side + grid.half_width()) / grid.h()).round() as usize;
    }
    (cells, lo)
}

/// Largest one-cell difference of `f` along any axis.
pub fn one_cell_slack(f: &RealFunction) -> f64 {
    let g = f.grid();
    let m = g.per_axis();
    let v = f.values();
    let mut worst = 0.0f64;
    for i in 0..v.len() {
        let a = g.axes(i);
        if a[0] + 1 < m {
            worst = worst.max((v[i] - v[i + 1]).abs());
        }
        if g.dim() == 2 && a[1] + 1 < m {
            worst = worst.max((v[i] - v[i + m]).abs());
        }
    }
    worst
}

fn max_tile_jump(g_eps: &RealFunction, tile_ids: &[usize]) -> f64 {
    let grid = g_eps.grid();
    let m = grid.per_axis();
    let v = g_eps.values();
    let mut worst = 0.0f64;
    let mut check = |i: usize, j: usize| {
        if tile_ids[i] != tile_ids[j] {
            worst = worst.max((v[i] - v[j]).abs());
        }
    };
    for i in 0..v.len() {
        let a = grid.axes(i);
        if a[0] + 1 < m {
            check(i, i + 1);
        }
        if grid.dim() == 2 && a[1] + 1 < m {
            check(i, i + m);
            if a[0] + 1 < m {
                check(i, i + m + 1);
            }
            if a[0] > 0 {
                check(i, i + m - 1);
            }
        }
    }
    worst
}

/// Piecewise-median approximant `g_ε` and its mollified, recentred version `g_{ε,t}`.
pub fn build_approximant(f: &RealFunction, eps: f64, lambda: f64, fam: &CubeFamily) -> Result<ApproximantResult> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid(format!("ε = {eps} must be positive")));
    }
    if !(lambda > 0.0 && lambda < 0.5) {
        return Err(invalid(format!("λ = {lambda} not in (0, 1/2)")));
    }
    let grid = f.grid();
    let n = grid.dim();
    let l = grid.box_exponent();
    let osc = per_cube(f, fam, |q| local_osc(f, q, lambda))?;
    let mut levels: BTreeMap<i32, f64> = BTreeMap::new();
    for (q, &v) in fam.cubes().iter().zip(&osc) {
        let e = levels.entry(level(q)).or_insert(0.0);
        *e = e.max(v);
    }

    let i_eps = find_i(&levels, eps, l - 3)?;
    let j_eps = find_j(&levels, eps)?;
    let far_ok = |k: i32| {
        let d = 2f64.powi(k);
        fam.cubes().iter().zip(&osc).all(|(q, &v)| !q.misses_box(d) || v < eps)
    };
    let k_eps = ((i_eps + 2)..=l).find(|&k| far_ok(k)).unwrap_or(l);
    let d1 = k_eps + 1;

    let tile_keys: Vec<(usize, [usize; 2])> = (0..grid.len()).map(|i| tile_of(grid, i, i_eps, d1)).collect();
    let mut tiles: BTreeMap<(usize, [usize; 2]), usize> = BTreeMap::new();
    for key in &tile_keys {
        let next = tiles.len();
        tiles.entry(*key).or_insert(next);
    }
    let tile_list: Vec<(usize, [usize; 2])> = {
        let mut v = vec![(0, [0, 0]); tiles.len()];
        for (k, &id) in &tiles {
            v[id] = *k;
        }
        v
    };
    let tile_medians: Vec<f64> = tile_list
        .par_iter()
        .map(|&(side, lo)| median(f, &Cube::new(grid, lo, side)?).map(|m| m.representative()))
        .collect::<Result<_>>()?;
    let tile_ids: Vec<usize> = tile_keys.iter().map(|k| tiles[k]).collect();

    // Median comparisons on the annuli R_m \ R_{m-1}.
    let m_lo = (-grid.resolution() + 1).max(j_eps.min(l));
    let box_median = |m: i32| median(f, &Cube::origin_box(grid, m)?).map(|x| x.representative());
    let mut annulus_ok = BTreeMap::new();
    for m in m_lo..=l {
        let rm = box_median(m)?;
        let prev = box_median(m - 1)?;
        let inner = 2f64.powi(m - 1);
        let outer = 2f64.powi(m);
        let mut ok = (rm - prev).abs() < eps;
        if ok {
            ok = (0..grid.len()).all(|i| {
                let c = grid.center(i);
                let r = (0..n).map(|d| c[d].abs()).fold(0.0f64, f64::max);
                r <= inner || r > outer || (tile_medians[tile_ids[i]] - rm).abs() < eps / 2.0
            });
        }
        annulus_ok.insert(m, ok);
    }
    let d2 = (m_lo..=l)
        .find(|&d| (d..=l).all(|m| annulus_ok[&m]))
        .ok_or_else(|| not_findable("tile medians never settle to the box medians"))?;
    let d3 = d3_from(d2, lambda, n);
    if d3 > l {
        return Err(Error::OutOfDomain(format!("d_3 = {d3} exceeds L = {l}")));
    }

    let offset = box_median(d3)?;
    let outer = 2f64.powi(d3);
    let g_vals: Vec<f64> = (0..grid.len())
        .map(|i| {
            let c = grid.center(i);
            let r = (0..n).map(|d| c[d].abs()).fold(0.0f64, f64::max);
            if r <= outer {
                tile_medians[tile_ids[i]]
            } else {
                offset
            }
        })
        .collect();
    let g_eps = RealFunction::new(grid, g_vals)?;
    let outside_id = tiles.len();
    let region_ids: Vec<usize> = (0..grid.len())
        .map(|i| {
            let c = grid.center(i);
            let r = (0..n).map(|d| c[d].abs()).fold(0.0f64, f64::max);
            if r <= outer {
                tile_ids[i]
            } else {
                outside_id
            }
        })
        .collect();
    let jump = max_tile_jump(&g_eps, &region_ids);

    let min_side = 2f64.powi(i_eps);
    let floor_t = 2.0 * grid.h();
    let mut candidates: Vec<f64> = std::iter::successors(Some(min_side / 4.0), |t| Some(t / 2.0))
        .take_while(|&t| t >= floor_t)
        .collect();
    if candidates.is_empty() {
        candidates.push(floor_t);
    }
    let mut chosen = None;
    for &t in &candidates {
        let sm = mollify(&g_eps, t)?;
        let gap = sm.values().iter().zip(g_eps.values()).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        let met = gap <= SMOOTHING_TOLERANCE * eps;
        let last = t == *candidates.last().unwrap_or(&t);
        if met || last {
            chosen = Some((t, sm, gap, met));
            break;
        }
    }
    let (t, smoothed, gap, met) = chosen.ok_or_else(|| not_findable("no mollifier radius"))?;
    let g_eps_t = smoothed.shift(-offset)?;

    let lt = lambda_tilde(lambda);
    let diff = f.sub(&g_eps)?;
    let local_sup = per_cube(&diff, fam, |q| Ok(shortest_window(&diff.gather(&q.cell_set()), lt)?.0))?
        .into_iter()
        .fold(0.0f64, f64::max);
    let bmo = bmo_norm(&f.sub(&g_eps_t)?, fam, OscMethod::Mean)?.value;

    Ok(ApproximantResult {
        epsilon: eps,
        params: ApproximantParams {
            i_eps,
            j_eps,
            k_eps,
            d1,
            d2,
            d3,
            lambda,
            lambda_tilde: lt,
            v: v_from(lambda, n),
            t,
        },
        tiles: tiles.len(),
        certificate: Certificate {
            local_sup,
            bmo,
            constant: bmo / eps,
            jump_constant: jump / eps,
            smoothing_constant: gap / eps,
            smoothing_bound_met: met,
            offset,
        },
        g_eps,
        g_eps_t,
    })
}

#[cfg(test)]
mod tests;
