use super::{
    argmax, inf_mean_oscillation, local_osc, local_osc_inf, mean_oscillation, median, Centers, CubeFamily,
    FamilyDescriptor, MedianInterval,
};
use crate::error::{Error, Result};
use crate::grid::{Cube, RealFunction};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CubeRecord {
    pub id: usize,
    pub cube: Cube,
    pub mean_osc: f64,
    pub inf_mean_osc: f64,
    pub local_osc: f64,
    pub local_osc_real: f64,
    pub local_osc_complex: f64,
    pub median: MedianInterval,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OscillationReport {
    pub family: FamilyDescriptor,
    pub lambda: f64,
    pub records: Vec<CubeRecord>,
    pub sup_mean_osc: f64,
    pub sup_inf_mean_osc: f64,
    pub sup_local_osc: f64,
    pub sup_local_osc_real: f64,
    pub sup_local_osc_complex: f64,
    /// `sup O / sup ā_λ`, recorded without any claimed bound; absent when the denominator vanishes.
    pub bmo_to_local_ratio: Option<f64>,
}

/// Every oscillation quantity on every family cube, with the family suprema.
pub fn oscillation_report(f: &RealFunction, fam: &CubeFamily, lambda: f64) -> Result<OscillationReport> {
    if fam.is_empty() {
        return Err(Error::Empty("cube family"));
    }
    let records: Vec<CubeRecord> = fam
        .cubes()
        .par_iter()
        .enumerate()
        .map(|(id, q)| {
            Ok(CubeRecord {
                id,
                cube: *q,
                mean_osc: mean_oscillation(f, q)?.oscillation,
                inf_mean_osc: inf_mean_oscillation(f, q)?.0,
                local_osc: local_osc(f, q, lambda)?,
                local_osc_real: local_osc_inf(f, q, lambda, Centers::Real)?,
                local_osc_complex: local_osc_inf(f, q, lambda, Centers::Complex)?,
                median: median(f, q)?,
            })
        })
        .collect::<Result<_>>()?;
    let sup = |g: fn(&CubeRecord) -> f64| argmax(&records.iter().map(g).collect::<Vec<_>>()).1;
    let sup_mean_osc = sup(|r| r.mean_osc);
    let sup_local_osc_complex = sup(|r| r.local_osc_complex);
    Ok(OscillationReport {
        family: fam.descriptor().clone(),
        lambda,
        sup_mean_osc,
        sup_inf_mean_osc: sup(|r| r.inf_mean_osc),
        sup_local_osc: sup(|r| r.local_osc),
        sup_local_osc_real: sup(|r| r.local_osc_real),
        sup_local_osc_complex,
        bmo_to_local_ratio: (sup_local_osc_complex > 0.0).then(|| sup_mean_osc / sup_local_osc_complex),
        records,
    })
}
