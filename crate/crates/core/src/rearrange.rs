//! Non-increasing rearrangement `f*(t) = inf{α > 0 : |{|f| > α}| < t}` on cell sets.

use crate::error::{invalid, Error, Result};
use crate::grid::{CellSet, GridFunction, Scalar};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Breakpoint {
    /// A value of `|f|`.
    pub value: f64,
    /// Measure of `{|f| ≥ value}`.
    pub cumulative: f64,
}

/// Step profile of `(fχ_S)*`: strictly decreasing values with strictly increasing cumulative measure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RearrangementProfile {
    steps: Vec<Breakpoint>,
    total: f64,
}

impl RearrangementProfile {
    /// Profile of a list of moduli, each carrying `cell_measure`. Equal values merge.
    pub fn from_moduli(mut moduli: Vec<f64>, cell_measure: f64) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::Empty("cell set"));
        }
        moduli.sort_unstable_by(|a, b| b.total_cmp(a));
        let total = moduli.len() as f64 * cell_measure;
        let mut steps: Vec<Breakpoint> = Vec::new();
        for (k, v) in moduli.iter().enumerate() {
            let cumulative = (k + 1) as f64 * cell_measure;
            match steps.last_mut() {
                Some(last) if last.value == *v => last.cumulative = cumulative,
                _ => steps.push(Breakpoint { value: *v, cumulative }),
            }
        }
        Ok(Self { steps, total })
    }

    pub fn steps(&self) -> &[Breakpoint] {
        &self.steps
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Measure of `{|f| > 0}`.
    pub fn support_measure(&self) -> f64 {
        self.steps.iter().rev().find(|b| b.value > 0.0).map_or(0.0, |b| b.cumulative)
    }

    /// `f*(t)`: the first breakpoint value whose cumulative measure reaches `t`, or 0 past the end.
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(invalid(format!("rearrangement evaluated at t = {t}")));
        }
        let k = self.steps.partition_point(|b| b.cumulative < t);
        Ok(self.steps.get(k).map_or(0.0, |b| b.value))
    }
}

/// Profile of `(fχ_S)*`.
pub fn profile<T: Scalar>(f: &GridFunction<T>, s: &CellSet) -> Result<RearrangementProfile> {
    f.grid().check_same(&s.grid())?;
    RearrangementProfile::from_moduli(s.iter().map(|i| f.get(i).modulus()).collect(), s.grid().cell_measure())
}

/// `f*(t)` for moduli that each carry `cell_measure`, without building the profile.
/// Reorders `moduli`.
pub fn rearranged_value(moduli: &mut [f64], t: f64, cell_measure: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid(format!("rearrangement evaluated at t = {t}")));
    }
    if moduli.is_empty() {
        return Err(Error::Empty("cell set"));
    }
    let rank = (t / cell_measure).ceil() as usize;
    if rank > moduli.len() {
        return Ok(0.0);
    }
    let (_, v, _) = moduli.select_nth_unstable_by(rank - 1, |a, b| b.total_cmp(a));
    Ok(*v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, RealFunction};

    fn step_fn() -> (RealFunction, CellSet) {
        let g = Grid::new(1, 2, 5).unwrap();
        let f = RealFunction::from_fn(g, |x| {
            if (0.0..1.0).contains(&x[0]) {
                3.0
            } else if (1.0..3.0).contains(&x[0]) {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        (f, CellSet::all(g))
    }

    /// Threshold scan over a dense α grid straight from the definition.
    fn scan(f: &RealFunction, t: f64) -> f64 {
        let h = f.grid().cell_measure();
        let mut alphas: Vec<f64> = (0..=4000).map(|k| k as f64 * 1e-3).collect();
        alphas.retain(|a| *a > 0.0);
        for a in alphas {
            let m = f.values().iter().filter(|v| v.abs() > a).count() as f64 * h;
            if m < t {
                return a;
            }
        }
        f64::INFINITY
    }

    #[test]
    fn step_profile_breakpoints() {
        let (f, s) = step_fn();
        let p = profile(&f, &s).unwrap();
        assert_eq!(p.steps()[0], Breakpoint { value: 3.0, cumulative: 1.0 });
        assert_eq!(p.steps()[1], Breakpoint { value: 1.0, cumulative: 3.0 });
        assert_eq!(p.evaluate(0.5).unwrap(), 3.0);
        assert_eq!(p.evaluate(1.5).unwrap(), 1.0);
        assert!((scan(&f, 0.5) - 3.0).abs() <= 1e-3);
        assert!((scan(&f, 1.5) - 1.0).abs() <= 1e-3);
    }

    #[test]
    fn indicator_beyond_support() {
        let g = Grid::new(1, 1, 6).unwrap();
        let f = RealFunction::from_fn(g, |x| if (0.0..=1.0).contains(&x[0]) { 1.0 } else { 0.0 }).unwrap();
        let p = profile(&f, &CellSet::all(g)).unwrap();
        assert_eq!(p.support_measure(), 1.0);
        assert_eq!(p.evaluate(1.0).unwrap(), 1.0);
        assert_eq!(p.evaluate(1.5).unwrap(), 0.0);
        assert!(p.evaluate(0.0).is_err());
    }

    #[test]
    fn constant_profile() {
        let g = Grid::new(1, 1, 3).unwrap();
        let f = RealFunction::constant(g, -2.0);
        let p = profile(&f, &CellSet::all(g)).unwrap();
        assert_eq!(p.steps().len(), 1);
        assert_eq!(p.steps()[0].value, 2.0);
        assert_eq!(p.steps()[0].cumulative, 4.0);
        assert!(profile(&f, &CellSet::empty(g)).is_err());
    }

    #[test]
    fn fast_path_matches_profile() {
        let (f, s) = step_fn();
        let p = profile(&f, &s).unwrap();
        for t in [0.01, 0.5, 1.0, 1.01, 2.9, 3.0, 3.5, 8.0] {
            let mut m: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
            assert_eq!(rearranged_value(&mut m, t, f.grid().cell_measure()).unwrap(), p.evaluate(t).unwrap());
        }
    }
}
