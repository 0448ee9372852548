//! Muckenhoupt constants over a cube family, dual weights, reverse Hölder thresholds and
//! conjugation by exponentials of symbols.

use crate::error::{invalid, Error, Result};
use crate::grid::{CellSet, Cube, RealFunction};
use crate::numeric::{bisect_last_true, compensated_sum};
use crate::operators::maximal_on;
use crate::oscillation::{CubeFamily, FamilyDescriptor};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

/// Exponents `(p, q, α)` tied by `1/q = 1/p - α/n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Exponents {
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
}

impl Exponents {
    pub fn new(p: f64, alpha: f64, n: usize) -> Result<Self> {
        check_p(p)?;
        let inv_q = 1.0 / p - alpha / n as f64;
        if !(alpha >= 0.0 && inv_q > 0.0) {
            return Err(invalid(format!("no finite q for p = {p}, α = {alpha}, n = {n}")));
        }
        Ok(Self { p, q: 1.0 / inv_q, alpha })
    }

    /// Checks an explicit triple.
    pub fn with_q(p: f64, q: f64, alpha: f64, n: usize) -> Result<Self> {
        let e = Self::new(p, alpha, n)?;
        if ((1.0 / q) - (1.0 / e.q)).abs() > 1e-12 {
            return Err(invalid(format!("1/q = {} but 1/p - α/n = {}", 1.0 / q, 1.0 / e.q)));
        }
        Ok(Self { q, ..e })
    }
}

/// Positive finite weight on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Weight {
    w: RealFunction,
    exponents: Option<Exponents>,
}

impl Weight {
    pub fn new(w: RealFunction) -> Result<Self> {
        if let Some(i) = w.values().iter().position(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(invalid(format!("weight value {} at cell {i} is not positive", w.get(i))));
        }
        Ok(Self { w, exponents: None })
    }

    pub fn with_exponents(mut self, e: Exponents) -> Result<Self> {
        if e.alpha >= self.w.grid().dim() as f64 {
            return Err(invalid(format!("α = {} too large", e.alpha)));
        }
        self.exponents = Some(e);
        Ok(self)
    }

    pub fn exponents(&self) -> Option<Exponents> {
        self.exponents
    }

    pub fn function(&self) -> &RealFunction {
        &self.w
    }

    pub fn get(&self, i: usize) -> f64 {
        self.w.get(i)
    }

    pub fn powf(&self, r: f64) -> Result<Self> {
        Self::new(self.w.map(|v| v.powf(r))?)
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        Self::new(self.w.scale(c)?)
    }

    /// `ω(E) = ∫_E ω`.
    pub fn measure(&self, e: &CellSet) -> f64 {
        compensated_sum(e.iter().map(|i| self.w.get(i))) * self.w.grid().cell_measure()
    }

    pub fn cube_measure(&self, q: &Cube) -> f64 {
        compensated_sum(q.cells().map(|i| self.w.get(i))) * self.w.grid().cell_measure()
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("exponent p = {p} must exceed 1")))
    }
}

fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// Average of `ω^r` over `Q`.
fn avg_pow(w: &Weight, q: &Cube, r: f64) -> f64 {
    let s = if r == 1.0 {
        compensated_sum(q.cells().map(|i| w.get(i)))
    } else {
        compensated_sum(q.cells().map(|i| w.get(i).powf(r)))
    };
    s / q.cell_count() as f64
}

/// `(avg_Q ω)(avg_Q ω^{1-p'})^{p-1}` for each family cube.
pub fn ap_per_cube(w: &Weight, p: f64, fam: &CubeFamily) -> Result<Vec<f64>> {
    check_p(p)?;
    w.w.grid().check_same(&fam.grid())?;
    let e = 1.0 - conjugate(p);
    Ok(fam.cubes().par_iter().map(|q| avg_pow(w, q, 1.0) * avg_pow(w, q, e).powf(p - 1.0)).collect())
}

fn sup(v: Vec<f64>) -> f64 {
    v.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// `[ω]_{A_p}`; its `p`-th root is the normalisation with `[σ]^{1/p'}_{A_{p'}} = [ω]^{1/p}_{A_p}`.
pub fn ap_constant(w: &Weight, p: f64, fam: &CubeFamily) -> Result<f64> {
    Ok(sup(ap_per_cube(w, p, fam)?))
}

/// `[(avg ω^q)^{1/q}(avg ω^{-p'})^{1/p'}]^q` for each family cube.
pub fn apq_per_cube(w: &Weight, p: f64, q: f64, fam: &CubeFamily) -> Result<Vec<f64>> {
    check_p(p)?;
    if !(q > 1.0 && q.is_finite()) {
        return Err(invalid(format!("exponent q = {q} must lie in (1, ∞)")));
    }
    w.w.grid().check_same(&fam.grid())?;
    let pp = conjugate(p);
    Ok(fam
        .cubes()
        .par_iter()
        .map(|c| (avg_pow(w, c, q).powf(1.0 / q) * avg_pow(w, c, -pp).powf(1.0 / pp)).powf(q))
        .collect())
}

pub fn apq_constant(w: &Weight, p: f64, q: f64, fam: &CubeFamily) -> Result<f64> {
    Ok(sup(apq_per_cube(w, p, q, fam)?))
}

/// `(1/ω(Q)) ∫_Q M(χ_Q ω)` for each family cube.
pub fn ainf_per_cube(w: &Weight, fam: &CubeFamily) -> Result<Vec<f64>> {
    w.w.grid().check_same(&fam.grid())?;
    fam.cubes()
        .par_iter()
        .map(|q| {
            let local = w.w.restrict(&q.cell_set())?;
            let m = maximal_on(&local, 0.0, fam, q)?;
            Ok(compensated_sum(m) / compensated_sum(q.cells().map(|i| w.get(i))))
        })
        .collect()
}

pub fn ainf_constant(w: &Weight, fam: &CubeFamily) -> Result<f64> {
    Ok(sup(ainf_per_cube(w, fam)?))
}

/// `σ = ω^{1-p'}`, checked against `[σ]^{1/p'}_{A_{p'}} = [ω]^{1/p}_{A_p}` cube by cube.
pub fn dual_weight(w: &Weight, p: f64, fam: &CubeFamily) -> Result<Weight> {
    check_p(p)?;
    let pp = conjugate(p);
    let sigma = w.powf(1.0 - pp)?;
    let worst = dual_identity_defect(w, &sigma, p, fam)?;
    if worst > 1e-10 {
        return Err(Error::Numerical(format!("dual weight identity off by {worst:e}")));
    }
    Ok(sigma)
}

/// Largest relative gap between `[σ]^{1/p'}_{A_{p'}}` and `[ω]^{1/p}_{A_p}` over the family.
pub fn dual_identity_defect(w: &Weight, sigma: &Weight, p: f64, fam: &CubeFamily) -> Result<f64> {
    let pp = conjugate(p);
    let a = ap_per_cube(w, p, fam)?;
    let b = ap_per_cube(sigma, pp, fam)?;
    Ok(a.iter()
        .zip(&b)
        .map(|(x, y)| {
            let (l, r) = (y.powf(1.0 / pp), x.powf(1.0 / p));
            (l - r).abs() / r
        })
        .fold(0.0, f64::max))
}

/// Worst `(avg ω^{1+ε})^{1/(1+ε)} / avg ω` over the family.
pub fn reverse_holder_check(w: &Weight, eps: f64, fam: &CubeFamily) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(invalid(format!("ε = {eps} must be positive")));
    }
    w.w.grid().check_same(&fam.grid())?;
    Ok(sup(fam
        .cubes()
        .par_iter()
        .map(|q| avg_pow(w, q, 1.0 + eps).powf(1.0 / (1.0 + eps)) / avg_pow(w, q, 1.0))
        .collect()))
}

pub const REVERSE_HOLDER_BOUND: f64 = 2.0;
const EPS_CAP: f64 = 64.0;

/// Largest `ε ≤ 64` keeping the reverse Hölder ratio at most 2 (bisection, the ratio grows with `ε`).
pub fn reverse_holder_threshold(w: &Weight, fam: &CubeFamily) -> Result<f64> {
    let ok = |e: f64| reverse_holder_check(w, e, fam).map(|r| r <= REVERSE_HOLDER_BOUND);
    if ok(EPS_CAP)? {
        return Ok(EPS_CAP);
    }
    let mut err = None;
    let t = bisect_last_true(0.0, EPS_CAP, 60, |e| {
        e == 0.0
            || ok(e).unwrap_or_else(|x| {
                err = Some(x);
                false
            })
    });
    match err {
        Some(e) => Err(e),
        None => Ok(t),
    }
}

/// Smallest `r ∈ (1, p]` with `[ω]_{A_r} ≤ 10 [ω]_{A_p}` (`[ω]_{A_r}` decreases in `r`).
pub fn openness_exponent(w: &Weight, p: f64, fam: &CubeFamily) -> Result<f64> {
    let target = 10.0 * ap_constant(w, p, fam)?;
    let floor = 1.0 + 1e-6;
    let within = |r: f64| ap_constant(w, r, fam).map(|a| a <= target).unwrap_or(false);
    if within(floor) {
        return Ok(floor);
    }
    // Bisect on the reflected variable so the predicate holds on the low side.
    let t = bisect_last_true(0.0, p - floor, 60, |d| d == 0.0 || within(p - d));
    Ok(p - t)
}

/// `e^{Re Σ b_j z_j}` on the grid.
pub fn conjugation_multiplier(bs: &[RealFunction], zs: &[Complex64]) -> Result<RealFunction> {
    let first = bs.first().ok_or(Error::Empty("symbol list"))?;
    if bs.len() != zs.len() {
        return Err(Error::LengthMismatch { expected: bs.len(), got: zs.len() });
    }
    let g = first.grid();
    for b in bs {
        g.check_same(&b.grid())?;
    }
    let vals = (0..g.len())
        .map(|i| bs.iter().zip(zs).map(|(b, z)| b.get(i) * z.re).sum::<f64>().exp())
        .collect();
    RealFunction::new(g, vals)
}

fn conjugated(w: &Weight, bs: &[RealFunction], zs: &[Complex64]) -> Result<Weight> {
    let m = conjugation_multiplier(bs, zs)?;
    Weight::new(w.w.mul(&m)?)
}

/// `[e^{Re Σ b_j z_j} ω]_{A_p}`.
pub fn conjugate_constant(w: &Weight, p: f64, bs: &[RealFunction], zs: &[Complex64], fam: &CubeFamily) -> Result<f64> {
    if zs.iter().all(|z| z.re == 0.0) && !bs.is_empty() && bs.len() == zs.len() {
        return ap_constant(w, p, fam);
    }
    ap_constant(&conjugated(w, bs, zs)?, p, fam)
}

/// `[e^{Re Σ b_j z_j} ω]_{A_{p,q}}`.
pub fn conjugate_apq_constant(
    w: &Weight,
    p: f64,
    q: f64,
    bs: &[RealFunction],
    zs: &[Complex64],
    fam: &CubeFamily,
) -> Result<f64> {
    apq_constant(&conjugated(w, bs, zs)?, p, q, fam)
}

/// Probe radius `0.1 / (‖b‖_BMO (1 + (ω)_{A_∞}))`.
pub fn probe_radius(bmo: f64, pair_ainf: f64) -> Result<f64> {
    if !(bmo > 0.0) {
        return Err(invalid("probe radius needs a symbol with positive BMO norm"));
    }
    Ok(0.1 / (bmo * (1.0 + pair_ainf)))
}

/// Constants of one weight over one family.
#[derive(Clone, Debug, Serialize)]
pub struct WeightConstants {
    pub family: FamilyDescriptor,
    pub p: f64,
    pub ap: f64,
    pub ap_root: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub apq: Option<f64>,
    pub ainf: f64,
    pub dual_ap: f64,
    pub dual_ainf: f64,
    /// `max([ω]_{A_∞}, [σ]_{A_∞})`.
    pub pair_ainf: f64,
    pub reverse_holder_eps: f64,
    pub openness_exponent: f64,
}

pub fn weight_constants(w: &Weight, p: f64, q: Option<f64>, fam: &CubeFamily) -> Result<WeightConstants> {
    let ap = ap_constant(w, p, fam)?;
    let sigma = dual_weight(w, p, fam)?;
    let ainf = ainf_constant(w, fam)?;
    let dual_ainf = ainf_constant(&sigma, fam)?;
    let apq = q.map(|q| apq_constant(w, p, q, fam)).transpose()?;
    Ok(WeightConstants {
        family: fam.descriptor().clone(),
        p,
        ap,
        ap_root: ap.powf(1.0 / p),
        q,
        apq,
        ainf,
        dual_ap: ap_constant(&sigma, conjugate(p), fam)?,
        dual_ainf,
        pair_ainf: ainf.max(dual_ainf),
        reverse_holder_eps: reverse_holder_threshold(w, fam)?,
        openness_exponent: openness_exponent(w, p, fam)?,
    })
}

#[cfg(test)]
mod tests;
