use crate::bounds::{RatioPolicy, Scenario};
use crate::compactness::{FkThresholds, SampleSpec};
use crate::error::{invalid, Result};
use crate::grid::generators::{FunctionSpec, Generator};
use crate::grid::{Cube, Grid, RealFunction};
use crate::operators::{KernelDescriptor, KernelSpec};
use crate::oscillation::{CubeFamily, FamilyDescriptor, FamilySpec};
use crate::weights::Weight;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
}

/// Cube given by its lower corner and side length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubeSpec {
    pub lower: Vec<f64>,
    pub side: f64,
}

impl CubeSpec {
    pub fn build(&self, grid: Grid) -> Result<Cube> {
        if self.lower.len() != grid.dim() {
            return Err(invalid(format!("cube corner has {} coordinates, grid has {}", self.lower.len(), grid.dim())));
        }
        Cube::from_corner(grid, &self.lower, self.side)
    }
}

/// Parameters used by individual commands; each command reads only its own fields.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandParams {
    /// Operand of `apply` and `commutate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub epsilons: Vec<f64>,
    /// Small-scale, large-scale and far-field thresholds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cmo_thresholds: Option<[f64; 3]>,
    /// Truncation radii for the `commutate` error fit.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deltas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cube: Option<CubeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub removed: Option<CubeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_range: Option<[i32; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cubes: Vec<CubeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Scenario>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_policy: Option<RatioPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_d: Option<i32>,
    /// Sample count and extent; the seed comes from the top-level `seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<SampleSize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tail_radii: Vec<f64>,
    /// Whole-cell offsets.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub shifts: Vec<[i64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fk_thresholds: Option<FkThresholds>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSize {
    pub count: usize,
    pub extent: f64,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: Grid,
    /// `f` for oscillation commands, the symbol `b` for operator commands.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionSpec>,
    /// Symbols of a multilinear commutator.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub symbols: Vec<FunctionSpec>,
    /// Defaults to the unit weight.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelDescriptor>,
    #[serde(default)]
    pub exponents: ExponentSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    #[serde(default)]
    pub params: CommandParams,
    /// Where artifacts go; like `workers`, not part of the experiment.
    #[serde(default = "default_output", skip_serializing)]
    pub output: PathBuf,
    #[serde(default)]
    pub seed: u64,
    /// Thread count; results do not depend on it, so it is left out of artifacts.
    #[serde(default, skip_serializing)]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let e = &self.exponents;
        if let Some(l) = e.lambda {
            if !(l > 0.0 && l < 1.0) {
                return Err(invalid(format!("λ = {l} not in (0, 1)")));
            }
        }
        for (name, v) in [("p", e.p), ("q", e.q)] {
            if let Some(v) = v {
                if !(v > 1.0 && v.is_finite()) {
                    return Err(invalid(format!("{name} = {v} must exceed 1")));
                }
            }
        }
        if let (Some(p), Some(q), Some(a)) = (e.p, e.q, e.alpha) {
            let n = self.grid.dim() as f64;
            if ((1.0 / q) - (1.0 / p - a / n)).abs() > 1e-12 {
                return Err(invalid(format!("exponents violate 1/q = 1/p - α/n (p = {p}, q = {q}, α = {a})")));
            }
        }
        if self.workers == Some(0) {
            return Err(invalid("workers must be positive"));
        }
        Ok(())
    }

    /// Copy with every defaulted field written out, as embedded in artifacts.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        if c.kernel.is_none() {
            c.kernel = self.kernel().ok().map(|k| k.descriptor());
        }
        if c.family.is_none() {
            c.family = self.family().ok().and_then(|f| match f.descriptor() {
                FamilyDescriptor::Dyadic(spec) => Some(*spec),
                FamilyDescriptor::Custom(_) => None,
            });
        }
        c.weight.get_or_insert(Generator::Constant { value: 1.0 }.into());
        if self.exponents.p.is_some() {
            c.exponents.q = self.q().ok();
        }
        c.exponents.m.get_or_insert(self.order());
        c
    }

    fn need<T: Copy>(v: Option<T>, name: &str) -> Result<T> {
        v.ok_or_else(|| invalid(format!("config is missing `{name}`")))
    }

    pub fn p(&self) -> Result<f64> {
        Self::need(self.exponents.p, "exponents.p")
    }

    /// `q`, defaulting to the value forced by `p` and `α`.
    pub fn q(&self) -> Result<f64> {
        match (self.exponents.q, self.exponents.p) {
            (Some(q), _) => Ok(q),
            (None, Some(p)) => {
                let a = self.exponents.alpha.unwrap_or(0.0);
                let inv = 1.0 / p - a / self.grid.dim() as f64;
                if inv > 0.0 {
                    Ok(1.0 / inv)
                } else {
                    Err(invalid("1/p - α/n must be positive"))
                }
            }
            _ => Self::need(None, "exponents.q"),
        }
    }

    pub fn lambda(&self) -> Result<f64> {
        Self::need(self.exponents.lambda, "exponents.lambda")
    }

    pub fn order(&self) -> u32 {
        self.exponents.m.unwrap_or(1)
    }

    pub fn function(&self) -> Result<RealFunction> {
        self.function.as_ref().ok_or_else(|| invalid("config is missing `function`"))?.build(self.grid)
    }

    pub fn symbols(&self) -> Result<Vec<RealFunction>> {
        if self.symbols.is_empty() {
            return Err(invalid("config is missing `symbols`"));
        }
        self.symbols.iter().map(|s| s.build(self.grid)).collect()
    }

    pub fn weight(&self) -> Result<Weight> {
        let spec = self.weight.clone().unwrap_or(Generator::Constant { value: 1.0 }.into());
        Weight::new(spec.build(self.grid)?)
    }

    /// The configured kernel, or the Hilbert-type kernel of order `α` on the line.
    pub fn kernel(&self) -> Result<KernelSpec> {
        match &self.kernel {
            Some(d) => KernelSpec::from_descriptor(d, self.grid.dim()),
            None if self.grid.dim() == 1 => KernelSpec::hilbert_type(self.exponents.alpha.unwrap_or(0.0)),
            None => Err(invalid("config is missing `kernel`")),
        }
    }

    /// The configured family, or all dyadic levels from four cells up to half the box.
    pub fn family(&self) -> Result<CubeFamily> {
        let spec = self.family.unwrap_or(FamilySpec {
            k_min: 2 - self.grid.resolution(),
            k_max: self.grid.box_exponent() - 1,
            translates: true,
        });
        CubeFamily::dyadic(self.grid, spec)
    }

    pub fn cube(&self) -> Result<Cube> {
        self.params.cube.as_ref().ok_or_else(|| invalid("config is missing `params.cube`"))?.build(self.grid)
    }

    pub fn samples(&self) -> Result<SampleSpec> {
        let s = Self::need(self.params.samples, "params.samples")?;
        Ok(SampleSpec { count: s.count, seed: self.seed, extent: s.extent })
    }
}
