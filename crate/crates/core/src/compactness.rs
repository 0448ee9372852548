//! Fréchet–Kolmogorov curves for families of commutator images, and a norm probe for
//! multilinear commutators.

use crate::error::{invalid, Error, Result};
use crate::grid::generators::Generator;
use crate::grid::{lq_norm, CellSet, Grid, RealFunction};
use crate::numeric::CompensatedSum;
use crate::operators::{commutator, KernelDescriptor, KernelSpec, SymbolPowerCommutator};
use crate::oscillation::{bmo_norm, CubeFamily, OscMethod};
use crate::weights::Weight;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const NORMALISATION_TOL: f64 = 1e-9;

/// Relative acceptance levels for the curves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FkThresholds {
    /// Largest admissible image norm.
    pub uniform: f64,
    /// Largest admissible `tail(N_max) / tail(N_min)`.
    pub tail_ratio: f64,
    /// Largest admissible `shift(z_min) / shift(z_max)`.
    pub equicontinuity_ratio: f64,
}

impl Default for FkThresholds {
    fn default() -> Self {
        Self { uniform: 100.0, tail_ratio: 0.1, equicontinuity_ratio: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Curve {
    pub at: Vec<f64>,
    pub value: Vec<f64>,
}

impl Curve {
    pub fn first(&self) -> Option<f64> {
        self.value.first().copied()
    }

    pub fn last(&self) -> Option<f64> {
        self.value.last().copied()
    }

    pub fn to_csv(&self, header: &str) -> String {
        let mut out = format!("{header},value\n");
        for (a, v) in self.at.iter().zip(&self.value) {
            out.push_str(&format!("{a:.16e},{v:.16e}\n"));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FkVerdict {
    pub uniform_ok: bool,
    pub tail_ok: bool,
    pub equicontinuity_ok: bool,
    pub passes: bool,
    pub label: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FkReport {
    pub kernel: KernelDescriptor,
    pub order: u32,
    pub p: f64,
    pub q: f64,
    pub samples: usize,
    /// `‖g_f‖_{L^q(ω^q)}` per sample.
    pub norms: Vec<f64>,
    pub uniform_bound: f64,
    /// `N ↦ max_f ‖g_f‖` outside `[-N, N]^n`, `N` ascending.
    pub tail: Curve,
    /// `|z| ↦ max_f ‖g_f(· + z) - g_f‖`, `|z|` ascending.
    pub equicontinuity: Curve,
    pub thresholds: FkThresholds,
    pub verdict: FkVerdict,
}

fn check_normalised(samples: &[RealFunction], w: &Weight, p: f64) -> Result<()> {
    for (i, f) in samples.iter().enumerate() {
        let norm = lq_norm(f, &CellSet::all(f.grid()), Some(w.function()), p)?;
        if (norm - 1.0).abs() > NORMALISATION_TOL {
            return Err(invalid(format!("sample {i} has norm {norm}, expected 1")));
        }
    }
    Ok(())
}

fn cell_radius(grid: Grid, i: usize) -> f64 {
    let x = grid.center(i);
    (0..grid.dim()).map(|d| x[d].abs()).fold(0.0, f64::max)
}

/// Tail norms for ascending radii, accumulated outward-in so the curve is non-increasing.
fn tail_norms(g: &RealFunction, w: &Weight, q: f64, radii: &[f64]) -> Vec<f64> {
    let grid = g.grid();
    let mut bins = vec![CompensatedSum::new(); radii.len()];
    for i in 0..grid.len() {
        let a = g.get(i).abs() * w.get(i);
        if a == 0.0 {
            continue;
        }
        let r = cell_radius(grid, i);
        if let Some(k) = radii.iter().rposition(|&n| r > n) {
            bins[k].add(a.powf(q));
        }
    }
    let mut acc = 0.0;
    let mut out = vec![0.0; radii.len()];
    for k in (0..radii.len()).rev() {
        acc += bins[k].value();
        out[k] = (acc * grid.cell_measure()).powf(1.0 / q);
    }
    out
}

/// Uniform bound, tail and translation curves of `{(T_b^m) f : f ∈ samples}`.
///
/// `shifts` are whole-cell offsets. The verdict is a desk-scale diagnostic.
#[allow(clippy::too_many_arguments)]
pub fn fk_report(
    b: &RealFunction,
    m: u32,
    k: &KernelSpec,
    w: &Weight,
    p: f64,
    q: f64,
    samples: &[RealFunction],
    radii: &[f64],
    shifts: &[[i64; 2]],
    thresholds: FkThresholds,
) -> Result<FkReport> {
    let grid = b.grid();
    check_normalised(samples, w, p)?;
    if radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(invalid("tail radii must be finite and non-negative"));
    }
    let n = grid.dim();
    if shifts.iter().any(|z| z[n..].iter().any(|&c| c != 0)) {
        return Err(invalid("shift has components beyond the grid dimension"));
    }
    let mut radii = radii.to_vec();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let length = |z: &[i64; 2]| grid.h() * (0..n).map(|d| (z[d] * z[d]) as f64).sum::<f64>().sqrt();
    let mut shifts = shifts.to_vec();
    shifts.sort_by(|a, b| length(a).total_cmp(&length(b)).then(a.cmp(b)));
    shifts.dedup();

    let op = SymbolPowerCommutator::new(k.clone(), b.clone(), m)?;
    let images: Vec<RealFunction> = samples.par_iter().map(|f| commutator(&op, f)).collect::<Result<_>>()?;
    let all = CellSet::all(grid);
    let norms: Vec<f64> =
        images.par_iter().map(|g| lq_norm(g, &all, Some(w.function()), q)).collect::<Result<_>>()?;
    let tails: Vec<Vec<f64>> = images.par_iter().map(|g| tail_norms(g, w, q, &radii)).collect();
    let moduli: Vec<Vec<f64>> = images
        .par_iter()
        .map(|g| {
            shifts
                .iter()
                .map(|z| lq_norm(&g.shifted(*z).sub(g)?, &all, Some(w.function()), q))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let column_max = |rows: &[Vec<f64>], len: usize| -> Vec<f64> {
        (0..len).map(|c| rows.iter().map(|r| r[c]).fold(0.0, f64::max)).collect()
    };
    let uniform_bound = norms.iter().copied().fold(0.0, f64::max);
    let tail = Curve { at: radii.clone(), value: column_max(&tails, radii.len()) };
    let equicontinuity =
        Curve { at: shifts.iter().map(length).collect(), value: column_max(&moduli, shifts.len()) };

    let ratio_ok = |num: Option<f64>, den: Option<f64>, limit: f64| match (num, den) {
        (Some(a), Some(b)) if b > 0.0 => a / b <= limit,
        (Some(a), Some(_)) => a == 0.0,
        _ => true,
    };
    let uniform_ok = uniform_bound <= thresholds.uniform;
    let tail_ok = ratio_ok(tail.last(), tail.first(), thresholds.tail_ratio);
    let equicontinuity_ok =
        ratio_ok(equicontinuity.first(), equicontinuity.last(), thresholds.equicontinuity_ratio);
    let verdict = FkVerdict {
        uniform_ok,
        tail_ok,
        equicontinuity_ok,
        passes: uniform_ok && tail_ok && equicontinuity_ok,
        label: "desk-scale diagnostic: finite-resolution evidence, not a compactness proof",
    };
    Ok(FkReport {
        kernel: k.descriptor(),
        order: m,
        p,
        q,
        samples: samples.len(),
        norms,
        uniform_bound,
        tail,
        equicontinuity,
        thresholds,
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundednessEstimate {
    /// `max_f ‖T_𝐛 f‖_{L^q(ω^q)} / ‖f‖_{L^p(ω^p)}`.
    pub estimate: f64,
    /// `Π_j ‖b_j‖_BMO` over the cube family.
    pub bmo_product: f64,
    pub ratio: Option<f64>,
    pub per_sample: Vec<f64>,
}

/// Largest observed norm ratio of the multilinear commutator over `samples`.
pub fn boundedness_probe(
    bs: &[RealFunction],
    k: &KernelSpec,
    w: &Weight,
    p: f64,
    q: f64,
    samples: &[RealFunction],
    fam: &CubeFamily,
) -> Result<BoundednessEstimate> {
    let n = k.dim() as f64;
    if !(p > 1.0 && q > 1.0) || ((1.0 / q) - (1.0 / p - k.alpha() / n)).abs() > 1e-12 {
        return Err(invalid(format!("exponents violate 1/q = 1/p - α/n (p = {p}, q = {q}, α = {})", k.alpha())));
    }
    let op = SymbolPowerCommutator::multilinear(k.clone(), bs.to_vec())?;
    let per_sample: Vec<f64> = samples
        .par_iter()
        .map(|f| {
            let all = CellSet::all(f.grid());
            let den = lq_norm(f, &all, Some(w.function()), p)?;
            if den == 0.0 {
                return Err(Error::Empty("sample support"));
            }
            Ok(lq_norm(&commutator(&op, f)?, &all, Some(w.function()), q)? / den)
        })
        .collect::<Result<_>>()?;
    let estimate = per_sample.iter().copied().fold(0.0, f64::max);
    let bmo_product = bs
        .iter()
        .map(|b| bmo_norm(b, fam, OscMethod::Mean).map(|e| e.value))
        .product::<Result<f64>>()?;
    Ok(BoundednessEstimate {
        estimate,
        bmo_product,
        ratio: (bmo_product > 0.0).then(|| estimate / bmo_product),
        per_sample,
    })
}

/// Seeded family of bumps and indicators inside `[-extent, extent]^n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub count: usize,
    pub seed: u64,
    pub extent: f64,
}

/// Generators of [`SampleSpec`] before normalisation: even indices are bumps, odd ones indicators.
pub fn sample_generators(grid: Grid, spec: &SampleSpec) -> Result<Vec<Generator>> {
    let h = grid.h();
    if !(spec.extent >= 4.0 * h && spec.extent <= grid.half_width()) {
        return Err(invalid(format!("sample extent {} must lie in [4h, 2^L]", spec.extent)));
    }
    let n = grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok((0..spec.count)
        .map(|i| {
            let width = rng.gen_range(2.0 * h..=spec.extent / 2.0);
            let center: Vec<f64> =
                (0..n).map(|_| rng.gen_range(-(spec.extent - width)..=spec.extent - width)).collect();
            if i % 2 == 0 {
                Generator::Bump { center, radius: width, height: 1.0 }
            } else {
                Generator::Indicator {
                    lower: center.iter().map(|c| c - width).collect(),
                    upper: center.iter().map(|c| c + width).collect(),
                    height: 1.0,
                }
            }
        })
        .collect())
}

/// Builds [`sample_generators`] and scales each to unit `L^p(ω^p)` norm.
pub fn unit_ball_samples(grid: Grid, w: &Weight, p: f64, spec: &SampleSpec) -> Result<Vec<RealFunction>> {
    let all = CellSet::all(grid);
    sample_generators(grid, spec)?
        .iter()
        .map(|g| {
            let f = g.build(grid)?;
            let norm = lq_norm(&f, &all, Some(w.function()), p)?;
            if norm == 0.0 {
                return Err(Error::Empty("sample support"));
            }
            f.scale(1.0 / norm)
        })
        .collect()
}
