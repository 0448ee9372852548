//! Command surface: one JSON experiment config in, JSON and CSV artifacts out.

mod config;

pub use config::{CommandParams, CubeSpec, ExperimentConfig, ExponentSpec, SampleSize};

use crate::bounds::{
    construct_sets, lower_estimate, upper_profile, witness_sequence, RatioPolicy, Scenario, WitnessParams,
};
use crate::cmo::{build_approximant, cmo_check, limit_profile};
use crate::compactness::{boundedness_probe, fk_report, unit_ball_samples};
use crate::error::{invalid, Error, Result};
use crate::grid::io::real_to_csv;
use crate::grid::{CellSet, Cube, RealFunction};
use crate::numeric::sci;
use crate::operators::{apply, commutator, truncation_error_scaling, SymbolPowerCommutator};
use crate::oscillation::{oscillation_report, OscMethod};
use crate::weights::{ainf_per_cube, ap_per_cube, apq_per_cube, weight_constants};
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    OscReport,
    CmoCheck,
    CmoApprox,
    Weights,
    Apply,
    Commutate,
    BoundsLower,
    BoundsUpper,
    Witness,
    FkReport,
    ProbeBound,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::OscReport => "osc-report",
            Command::CmoCheck => "cmo-check",
            Command::CmoApprox => "cmo-approx",
            Command::Weights => "weights",
            Command::Apply => "apply",
            Command::Commutate => "commutate",
            Command::BoundsLower => "bounds-lower",
            Command::BoundsUpper => "bounds-upper",
            Command::Witness => "witness",
            Command::FkReport => "fk-report",
            Command::ProbeBound => "probe-bound",
        }
    }
}

/// Exit status for a failed run.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_INVALID
    }
}

/// File name and contents of one artifact.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

struct Outputs {
    command: Command,
    config_line: String,
    config: Value,
    artifacts: Vec<Artifact>,
}

impl Outputs {
    fn new(command: Command, config: &ExperimentConfig) -> Result<Self> {
        let config = config.resolved();
        Ok(Self {
            command,
            config_line: serde_json::to_string(&config)?,
            config: serde_json::to_value(&config)?,
            artifacts: Vec::new(),
        })
    }

    fn json(&mut self, result: impl Serialize) -> Result<()> {
        let doc = json!({
            "tool": TOOL,
            "version": VERSION,
            "command": self.command,
            "config": self.config,
            "result": serde_json::to_value(result)?,
        });
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        self.artifacts.push(Artifact { name: format!("{}.json", self.command.name()), contents: text });
        Ok(())
    }

    fn csv(&mut self, suffix: &str, body: String) {
        let contents = format!("# {TOOL} {VERSION} {}\n# config: {}\n{body}", self.command.name(), self.config_line);
        self.artifacts.push(Artifact { name: format!("{}_{suffix}.csv", self.command.name()), contents });
    }
}

fn cube_columns(q: &Cube, n: usize) -> String {
    let lo = q.lower();
    (0..n).map(|d| sci(lo[d])).chain(std::iter::once(sci(q.side()))).collect::<Vec<_>>().join(",")
}

fn corner_header(n: usize) -> &'static str {
    if n == 1 {
        "lower_x,side"
    } else {
        "lower_x,lower_y,side"
    }
}

fn rows<'a>(header: &str, lines: impl Iterator<Item = String> + 'a) -> String {
    let mut out = format!("{header}\n");
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out
}

fn operand(config: &ExperimentConfig) -> Result<RealFunction> {
    config.params.input.as_ref().ok_or_else(|| invalid("config is missing `params.input`"))?.build(config.grid)
}

/// Computes every artifact of `command` without touching the file system.
pub fn execute(command: Command, config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    config.validate()?;
    let mut out = Outputs::new(command, config)?;
    let grid = config.grid;
    let n = grid.dim();
    match command {
        Command::OscReport => {
            let fam = config.family()?;
            let r = oscillation_report(&config.function()?, &fam, config.lambda()?)?;
            let body = rows(
                &format!("id,{},mean_osc,inf_mean_osc,local_osc,local_osc_real,local_osc_complex,median_lower,median_upper", corner_header(n)),
                r.records.iter().map(|c| {
                    format!(
                        "{},{},{},{},{},{},{},{},{}",
                        c.id,
                        cube_columns(&c.cube, n),
                        sci(c.mean_osc),
                        sci(c.inf_mean_osc),
                        sci(c.local_osc),
                        sci(c.local_osc_real),
                        sci(c.local_osc_complex),
                        sci(c.median.lower),
                        sci(c.median.upper)
                    )
                }),
            );
            out.csv("cubes", body);
            out.json(r)?;
        }
        Command::CmoCheck => {
            let fam = config.family()?;
            let f = config.function()?;
            let thresholds =
                config.params.cmo_thresholds.ok_or_else(|| invalid("config is missing `params.cmo_thresholds`"))?;
            let mut body = String::from("method,curve,x,value,cubes\n");
            let mut results = Vec::new();
            for (label, method) in [("mean", OscMethod::Mean), ("local", OscMethod::Local { lambda: config.lambda()? })] {
                let profile = limit_profile(&f, &fam, method)?;
                for (curve, pts) in
                    [("small_scale", &profile.small_scale), ("large_scale", &profile.large_scale), ("far_field", &profile.far_field)]
                {
                    for p in pts {
                        let _ = writeln!(body, "{label},{curve},{},{},{}", sci(p.x), sci(p.value), p.cubes);
                    }
                }
                let verdict = cmo_check(&profile, thresholds);
                results.push(json!({ "profile": profile, "verdict": verdict }));
            }
            out.csv("curves", body);
            out.json(json!({ "thresholds": thresholds, "profiles": results }))?;
        }
        Command::CmoApprox => {
            let fam = config.family()?;
            let f = config.function()?;
            let lambda = config.lambda()?;
            if config.params.epsilons.is_empty() {
                return Err(invalid("config is missing `params.epsilons`"));
            }
            let results = config
                .params
                .epsilons
                .iter()
                .map(|&e| build_approximant(&f, e, lambda, &fam))
                .collect::<Result<Vec<_>>>()?;
            let body = rows(
                "epsilon,i_eps,j_eps,k_eps,d1,d2,d3,t,tiles,local_sup,bmo,constant,smoothing_constant",
                results.iter().map(|r| {
                    let (p, c) = (&r.params, &r.certificate);
                    format!(
                        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                        sci(r.epsilon),
                        p.i_eps,
                        p.j_eps,
                        p.k_eps,
                        p.d1,
                        p.d2,
                        p.d3,
                        sci(p.t),
                        r.tiles,
                        sci(c.local_sup),
                        sci(c.bmo),
                        sci(c.constant),
                        sci(c.smoothing_constant)
                    )
                }),
            );
            out.csv("certificates", body);
            for (i, r) in results.iter().enumerate() {
                out.csv(&format!("g_eps_t_{i}"), real_to_csv(&r.g_eps_t));
            }
            out.json(&results)?;
        }
        Command::Weights => {
            let fam = config.family()?;
            let w = config.weight()?;
            let p = config.p()?;
            let q = config.exponents.q;
            let c = weight_constants(&w, p, q, &fam)?;
            let ap = ap_per_cube(&w, p, &fam)?;
            let ainf = ainf_per_cube(&w, &fam)?;
            let apq = q.map(|q| apq_per_cube(&w, p, q, &fam)).transpose()?;
            let body = rows(
                &format!("id,{},ap,ainf,apq", corner_header(n)),
                fam.cubes().iter().enumerate().map(|(i, cube)| {
                    let apq = apq.as_ref().map_or(String::new(), |v| sci(v[i]));
                    format!("{i},{},{},{},{apq}", cube_columns(cube, n), sci(ap[i]), sci(ainf[i]))
                }),
            );
            out.csv("cubes", body);
            out.json(c)?;
        }
        Command::Apply => {
            let k = config.kernel()?;
            let g = apply(&k, &config.function()?)?;
            out.csv("image", real_to_csv(&g));
            out.json(json!({ "kernel": k.descriptor(), "sup_norm": g.sup_norm() }))?;
        }
        Command::Commutate => {
            let k = config.kernel()?;
            let c = SymbolPowerCommutator::new(k.clone(), config.function()?, config.order())?;
            let f = operand(config)?;
            let g = commutator(&c, &f)?;
            out.csv("image", real_to_csv(&g));
            let fit = if config.params.deltas.is_empty() {
                None
            } else {
                let fit = truncation_error_scaling(&c, &f, &config.params.deltas)?;
                out.csv(
                    "truncation",
                    rows("delta,error", fit.deltas.iter().zip(&fit.errors).map(|(d, e)| format!("{},{}", sci(*d), sci(*e)))),
                );
                Some(fit)
            };
            out.json(json!({
                "kernel": k.descriptor(),
                "order": config.order(),
                "sup_norm": g.sup_norm(),
                "truncation": fit,
            }))?;
        }
        Command::BoundsLower | Command::BoundsUpper => {
            let k = config.kernel()?;
            let b = config.function()?;
            let w = config.weight()?;
            let (p, q) = (config.p()?, config.q()?);
            let cons = construct_sets(&config.cube()?, &b, config.lambda()?, &k)?;
            if command == Command::BoundsLower {
                let removed = match &config.params.removed {
                    Some(r) => r.build(grid)?.cell_set(),
                    None => CellSet::empty(grid),
                };
                let est = lower_estimate(&cons, &b, config.order(), &k, &w, p, q, &removed)?;
                out.csv(
                    "estimate",
                    rows(
                        "lhs,a_lambda_m,ratio",
                        std::iter::once(format!(
                            "{},{},{}",
                            sci(est.lhs),
                            sci(est.a_lambda_m),
                            est.ratio.map_or(String::new(), sci)
                        )),
                    ),
                );
                out.json(json!({ "construction": cons, "estimate": est }))?;
            } else {
                let [lo, hi] = config.params.d_range.unwrap_or([3, 6]);
                let prof = upper_profile(&cons, &b, config.order(), &k, &w, p, q, lo..=hi)?;
                out.csv(
                    "profile",
                    rows(
                        "d,u,contains_p",
                        prof.d.iter().zip(&prof.u).zip(&prof.contains_p).map(|((d, u), c)| format!("{d},{},{c}", sci(*u))),
                    ),
                );
                out.json(json!({ "construction": cons, "profile": prof }))?;
            }
        }
        Command::Witness => {
            let k = config.kernel()?;
            let cubes = config.params.cubes.iter().map(|c| c.build(grid)).collect::<Result<Vec<_>>>()?;
            let params = WitnessParams {
                scenario: config.params.scenario.unwrap_or(Scenario::Shrinking),
                cubes,
                lambda: config.lambda()?,
                p: config.p()?,
                q: config.q()?,
                policy: config.params.ratio_policy.unwrap_or(RatioPolicy::Enforce),
                max_d: config.params.max_d.unwrap_or(10),
            };
            let r = witness_sequence(&config.function()?, config.order(), &k, &config.weight()?, &params)?;
            let body = rows(
                &(0..r.distances.len()).map(|j| format!("f_{}", j + 1)).collect::<Vec<_>>().join(","),
                r.distances.iter().map(|row| row.iter().map(|v| sci(*v)).collect::<Vec<_>>().join(",")),
            );
            out.csv("distances", body);
            out.json(r)?;
        }
        Command::FkReport => {
            let k = config.kernel()?;
            let w = config.weight()?;
            let (p, q) = (config.p()?, config.q()?);
            let samples = unit_ball_samples(grid, &w, p, &config.samples()?)?;
            let r = fk_report(
                &config.function()?,
                config.order(),
                &k,
                &w,
                p,
                q,
                &samples,
                &config.params.tail_radii,
                &config.params.shifts,
                config.params.fk_thresholds.unwrap_or_default(),
            )?;
            out.csv("tail", r.tail.to_csv("N"));
            out.csv("equicontinuity", r.equicontinuity.to_csv("z"));
            out.json(r)?;
        }
        Command::ProbeBound => {
            let k = config.kernel()?;
            let w = config.weight()?;
            let (p, q) = (config.p()?, config.q()?);
            let samples = unit_ball_samples(grid, &w, p, &config.samples()?)?;
            let r = boundedness_probe(&config.symbols()?, &k, &w, p, q, &samples, &config.family()?)?;
            out.csv("samples", rows("sample,ratio", r.per_sample.iter().enumerate().map(|(i, v)| format!("{i},{}", sci(*v)))));
            out.json(r)?;
        }
    }
    Ok(out.artifacts)
}

/// Runs `command` on a pool of `config.workers` threads and writes the artifacts under `dir`.
pub fn run(command: Command, config: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = config.workers {
        builder = builder.num_threads(k);
    }
    let pool = builder.build().map_err(|e| invalid(format!("thread pool: {e}")))?;
    let artifacts = pool.install(|| execute(command, config))?;
    std::fs::create_dir_all(dir)?;
    artifacts
        .into_iter()
        .map(|a| {
            let path = dir.join(&a.name);
            std::fs::write(&path, a.contents)?;
            Ok(path)
        })
        .collect()
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::from_json(&std::fs::read_to_string(path)?)
}
