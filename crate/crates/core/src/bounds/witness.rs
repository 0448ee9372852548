use super::{construct_sets, dilate_cells, normalized_indicator, LowerBoundConstruction};
use crate::error::{invalid, Error, Result};
use crate::grid::{lq_norm, CellSet, Cube, RealFunction};
use crate::operators::{commutator, KernelSpec, SymbolPowerCommutator};
use crate::weights::Weight;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Cubes shrinking towards a point.
    Shrinking,
    /// Cubes of bounded size escaping to infinity.
    Translating,
}

/// Whether a violated spacing condition aborts the run or is only recorded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioPolicy {
    #[default]
    Enforce,
    Report,
}

#[derive(Clone, Debug)]
pub struct WitnessParams {
    pub scenario: Scenario,
    pub cubes: Vec<Cube>,
    pub lambda: f64,
    pub p: f64,
    pub q: f64,
    pub policy: RatioPolicy,
    /// Largest dilation exponent tried when calibrating `d_0`.
    pub max_d: i32,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    pub scenario: Scenario,
    pub cubes: Vec<Cube>,
    /// `B_j` in the shrinking scenario (none for the first cube).
    pub removed: Vec<Option<Cube>>,
    pub functions: Vec<String>,
    pub distances: Vec<Vec<f64>>,
    pub min_off_diagonal: f64,
    /// `D_{j,j+1}`.
    pub consecutive: Vec<f64>,
    /// `a_λ(b; Q_j)`.
    pub oscillations: Vec<f64>,
    /// `‖T_b^m f_j‖` on `E_j` after the worst removal of measure at most `λ|Q_j|/8`.
    pub lower: Vec<f64>,
    pub c0: f64,
    pub theta0: f64,
    pub d0: Option<i32>,
    /// `2 C_0 θ_0^m`.
    pub floor: f64,
    /// Whether the spacing condition of the scenario holds.
    pub spacing_ok: bool,
    pub constructions: Vec<LowerBoundConstruction>,
}

fn norm_on(g: &RealFunction, cells: &CellSet, w: &Weight, q: f64) -> Result<f64> {
    lq_norm(g, cells, Some(w.function()), q)
}

fn closed_disjoint(a: &Cube, b: &Cube, t: f64) -> bool {
    let (ca, cb) = (a.center(), b.center());
    let (ra, rb) = (t * a.side() / 2.0, t * b.side() / 2.0);
    (0..a.grid().dim()).any(|d| (ca[d] - cb[d]).abs() > ra + rb)
}

/// Norm over `E` after deleting the `⌊λK/8⌋` cells that contribute most, `K` the cell count of `Q`.
fn worst_removal_norm(g: &RealFunction, c: &LowerBoundConstruction, w: &Weight, q: f64) -> Result<f64> {
    let drop = (c.lambda * c.q.cell_set().len() as f64 / 8.0).floor() as usize;
    let mut cells: Vec<(f64, usize)> =
        c.e.iter().map(|i| ((g.get(i).abs() * w.get(i)).powf(q), i)).collect();
    cells.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let kept = CellSet::new(g.grid(), cells.into_iter().skip(drop).map(|(_, i)| i).collect())?;
    norm_on(g, &kept, w, q)
}

/// Normalised indicators on the sets `F_j` and the pairwise distances of their commutator images.
pub fn witness_sequence(
    b: &RealFunction,
    m: u32,
    k: &KernelSpec,
    w: &Weight,
    params: &WitnessParams,
) -> Result<WitnessReport> {
    let cubes = &params.cubes;
    if cubes.len() < 2 {
        return Err(invalid("a witness sequence needs at least two cubes"));
    }
    let grid = b.grid();
    let n = grid.dim() as f64;
    let (p, q) = (params.p, params.q);
    let cons: Vec<LowerBoundConstruction> =
        cubes.par_iter().map(|c| construct_sets(c, b, params.lambda, k)).collect::<Result<_>>()?;
    let op = SymbolPowerCommutator::new(k.clone(), b.clone(), m)?;
    let images: Vec<RealFunction> = cons
        .iter()
        .map(|c| normalized_indicator(&c.f, w, p).and_then(|f| commutator(&op, &f)))
        .collect::<Result<_>>()?;

    let removed: Vec<Option<Cube>> = match params.scenario {
        Scenario::Shrinking => std::iter::once(Ok(None))
            .chain(cubes.windows(2).map(|pair| {
                let t = (pair[0].measure() / pair[1].measure()).powf(1.0 / (2.0 * n));
                pair[1].dilate(t).map(Some)
            }))
            .collect::<Result<_>>()?,
        Scenario::Translating => vec![None; cubes.len()],
    };

    let lower: Vec<f64> = cons
        .iter()
        .zip(&images)
        .map(|(c, g)| worst_removal_norm(g, c, w, q))
        .collect::<Result<_>>()?;
    let oscillations: Vec<f64> = cons.iter().map(|c| c.a_lambda).collect();
    let theta0 = oscillations.iter().copied().fold(f64::INFINITY, f64::min);
    let c0 = lower
        .iter()
        .zip(&oscillations)
        .filter(|(_, &a)| a > 0.0)
        .map(|(l, a)| l / (2.0 * a.powi(m as i32)))
        .fold(f64::INFINITY, f64::min);
    let c0 = if c0.is_finite() { c0 } else { 0.0 };
    let target = c0 * theta0.powi(m as i32);

    let mut d0 = None;
    for d in 1..=params.max_d {
        let mut ok = true;
        for (c, g) in cubes.iter().zip(&images) {
            let mask = dilate_cells(c, 2f64.powi(d));
            let outside = CellSet::new(grid, (0..grid.len()).filter(|&i| !mask[i]).collect())?;
            if norm_on(g, &outside, w, q)? > target {
                ok = false;
                break;
            }
        }
        if ok {
            d0 = Some(d);
            break;
        }
    }

    let spacing_ok = match (params.scenario, d0) {
        (_, None) => false,
        (Scenario::Shrinking, Some(d)) => {
            let bound = (params.lambda.powi(2) / 64.0).min(2f64.powf(-2.0 * d as f64 * n));
            cubes.windows(2).all(|pair| pair[1].measure() / pair[0].measure() <= bound)
        }
        (Scenario::Translating, Some(d)) => {
            let t = 2f64.powi(d);
            (0..cubes.len()).all(|i| (i + 1..cubes.len()).all(|j| closed_disjoint(&cubes[i], &cubes[j], t)))
        }
    };
    if !spacing_ok && params.policy == RatioPolicy::Enforce {
        return Err(Error::InvalidParameter(format!(
            "cube sequence violates the spacing condition (d_0 = {d0:?})"
        )));
    }

    let all = CellSet::all(grid);
    let count = cubes.len();
    let pairs: Vec<(usize, usize)> = (0..count).flat_map(|j| (j + 1..count).map(move |k| (j, k))).collect();
    let vals: Vec<f64> = pairs
        .par_iter()
        .map(|&(j, k)| norm_on(&images[j].sub(&images[k])?, &all, w, q))
        .collect::<Result<_>>()?;
    let mut distances = vec![vec![0.0; count]; count];
    for (&(j, k), &v) in pairs.iter().zip(&vals) {
        distances[j][k] = v;
        distances[k][j] = v;
    }
    let min_off_diagonal = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let consecutive = (0..count - 1).map(|j| distances[j][j + 1]).collect();
    let functions = cons
        .iter()
        .enumerate()
        .map(|(j, c)| format!("f_{}: normalised indicator of F_{} ({} cells)", j + 1, j + 1, c.f.len()))
        .collect();
    Ok(WitnessReport {
        scenario: params.scenario,
        cubes: cubes.clone(),
        removed,
        functions,
        distances,
        min_off_diagonal,
        consecutive,
        oscillations,
        lower,
        c0,
        theta0,
        d0,
        floor: 2.0 * target,
        spacing_ok,
        constructions: cons,
    })
}
