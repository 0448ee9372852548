//! Analytic generators for grid functions, described in JSON by a `kind` tag.

use super::{Grid, Point, RealFunction};
use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    Constant {
        value: f64,
    },
    /// `slope·x_axis + intercept`, optionally clamped to `[-clamp, clamp]`.
    Linear {
        slope: f64,
        #[serde(default)]
        intercept: f64,
        #[serde(default)]
        axis: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        clamp: Option<f64>,
    },
    /// `height` on the closed box `[lower, upper]`.
    Indicator {
        lower: Vec<f64>,
        upper: Vec<f64>,
        #[serde(default = "one")]
        height: f64,
    },
    /// `height·e^{1 - 1/(1 - r²)}` with `r = |x - center|/radius`; peak value `height`.
    Bump {
        #[serde(default)]
        center: Vec<f64>,
        radius: f64,
        #[serde(default = "one")]
        height: f64,
    },
    /// `scale·log max(|x - center|, floor)`; the floor defaults to one cell.
    LogAbs {
        #[serde(default)]
        center: Vec<f64>,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        floor: Option<f64>,
    },
    /// `max(|x - center|, floor)^exponent`; the floor defaults to half a cell.
    PowerWeight {
        exponent: f64,
        #[serde(default)]
        center: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        floor: Option<f64>,
    },
    /// `Σ_k a_k cos(2^k·frequency·x_1)`.
    LacunarySum {
        coefficients: Vec<f64>,
        #[serde(default = "one")]
        frequency: f64,
    },
}

fn coord(v: &[f64], d: usize) -> f64 {
    v.get(d).copied().or_else(|| v.first().copied()).unwrap_or(0.0)
}

fn dist(grid: Grid, x: Point, c: &[f64]) -> f64 {
    grid.norm([x[0] - coord(c, 0), x[1] - if grid.dim() == 2 { coord(c, 1) } else { 0.0 }])
}

impl Generator {
    fn validate(&self, grid: Grid) -> Result<()> {
        match self {
            Generator::Linear { axis, .. } if *axis >= grid.dim() => {
                Err(invalid(format!("linear axis {axis} exceeds dimension {}", grid.dim())))
            }
            Generator::Bump { radius, .. } if !(*radius > 0.0) => Err(invalid("bump radius must be positive")),
            Generator::LogAbs { floor: Some(f), .. } | Generator::PowerWeight { floor: Some(f), .. } if !(*f > 0.0) => {
                Err(invalid("floor must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Value at a point of `grid`.
    pub fn eval(&self, grid: Grid, x: Point) -> f64 {
        match self {
            Generator::Constant { value } => *value,
            Generator::Linear { slope, intercept, axis, clamp } => {
                let v = slope * x[*axis] + intercept;
                clamp.map_or(v, |c| v.clamp(-c, c))
            }
            Generator::Indicator { lower, upper, height } => {
                let inside = (0..grid.dim()).all(|d| x[d] >= coord(lower, d) && x[d] <= coord(upper, d));
                if inside {
                    *height
                } else {
                    0.0
                }
            }
            Generator::Bump { center, radius, height } => {
                let r = dist(grid, x, center) / radius;
                height * super::bump(r) * std::f64::consts::E
            }
            Generator::LogAbs { center, scale, floor } => {
                let f = floor.unwrap_or(grid.h());
                scale * dist(grid, x, center).max(f).ln()
            }
            Generator::PowerWeight { exponent, center, floor } => {
                let f = floor.unwrap_or(grid.h() / 2.0);
                dist(grid, x, center).max(f).powf(*exponent)
            }
            Generator::LacunarySum { coefficients, frequency } => coefficients
                .iter()
                .enumerate()
                .map(|(k, a)| a * (2f64.powi(k as i32) * frequency * x[0]).cos())
                .sum(),
        }
    }

    pub fn build(&self, grid: Grid) -> Result<RealFunction> {
        self.validate(grid)?;
        RealFunction::from_fn(grid, |x| self.eval(grid, x))
    }
}

/// One generator or a list whose values are summed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    One(Generator),
    Sum(Vec<Generator>),
}

impl FunctionSpec {
    pub fn terms(&self) -> &[Generator] {
        match self {
            FunctionSpec::One(g) => std::slice::from_ref(g),
            FunctionSpec::Sum(v) => v,
        }
    }

    pub fn build(&self, grid: Grid) -> Result<RealFunction> {
        for t in self.terms() {
            t.validate(grid)?;
        }
        RealFunction::from_fn(grid, |x| self.terms().iter().map(|t| t.eval(grid, x)).sum())
    }
}

impl From<Generator> for FunctionSpec {
    fn from(g: Generator) -> Self {
        FunctionSpec::One(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_build() {
        let g = Grid::new(1, 2, 4).unwrap();
        let spec: FunctionSpec = serde_json::from_str(
            r#"[{"kind":"bump","radius":1.0,"height":2.0},{"kind":"log_abs","scale":0.05}]"#,
        )
        .unwrap();
        let f = spec.build(g).unwrap();
        let i = g.cell_of(&[0.0]).unwrap();
        let expect = 2.0 * (1.0 - 1.0 / (1.0 - (g.h() / 2.0).powi(2))).exp() + 0.05 * g.h().ln();
        assert!((f.get(i) - expect).abs() < 1e-12);
    }

    #[test]
    fn every_kind_parses() {
        let g = Grid::new(2, 1, 2).unwrap();
        for js in [
            r#"{"kind":"constant","value":1.5}"#,
            r#"{"kind":"linear","slope":2.0,"axis":1,"clamp":1.0}"#,
            r#"{"kind":"indicator","lower":[0,0],"upper":[1,1]}"#,
            r#"{"kind":"bump","center":[0.5,0.5],"radius":0.5}"#,
            r#"{"kind":"log_abs"}"#,
            r#"{"kind":"power_weight","exponent":0.5}"#,
            r#"{"kind":"lacunary_sum","coefficients":[1.0,0.5,0.25]}"#,
        ] {
            let gen: Generator = serde_json::from_str(js).unwrap();
            assert!(gen.build(g).is_ok(), "{js}");
        }
        let bad: Generator = serde_json::from_str(r#"{"kind":"linear","slope":1.0,"axis":2}"#).unwrap();
        assert!(bad.build(g).is_err());
    }

    #[test]
    fn indicator_and_power_values() {
        let g = Grid::new(1, 1, 3).unwrap();
        let ind = Generator::Indicator { lower: vec![0.0], upper: vec![1.0], height: 1.0 }.build(g).unwrap();
        assert_eq!(ind.values().iter().sum::<f64>() * g.h(), 1.0);
        let w = Generator::PowerWeight { exponent: 2.0, center: vec![], floor: None }.build(g).unwrap();
        assert!(w.values().iter().all(|v| *v > 0.0));
    }
}
