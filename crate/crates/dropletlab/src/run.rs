//! Command execution and output rendering.

use serde::Serialize;
use serde_json::{json, Value};

use dropletlab_core::asymptotics::{
    exact_energy_balls, expansion_residual_sweep, ez_to_e0_sweep, predicted_energy,
    split_threshold, subadditivity_check, GeneralizedConfig,
};
use dropletlab_core::optimizer::{
    minimize_config, optimal_droplet_count, optimal_droplet_count_confined,
};
use dropletlab_core::{Error, MassVector, Model, OptimizerOptions, PointConfiguration, RngSeed};

use crate::spec::{Command, ExperimentSpec, SpecError, SpecInput};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Usage = 2,
    Computation = 3,
}

/// Rendered artifacts of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub status: Status,
    /// `{spec, results, errors}`, pretty-printed, newline-terminated.
    pub json: String,
    /// `Z,exact,predicted,residual` table for sweep-type commands.
    pub csv: Option<String>,
}

#[derive(Serialize)]
struct ErrorObject {
    kind: &'static str,
    message: String,
}

#[derive(Serialize)]
struct Document<'a, S: Serialize> {
    spec: &'a S,
    results: Value,
    errors: Vec<ErrorObject>,
}

fn render<S: Serialize>(spec: &S, results: Value, errors: Vec<ErrorObject>) -> String {
    let mut s = serde_json::to_string_pretty(&Document {
        spec,
        results,
        errors,
    })
    .expect("serializable document");
    s.push('\n');
    s
}

/// Resolve `input` and run it; usage problems become a status-2 outcome.
pub fn run_input(input: SpecInput, env_tol: Option<&str>) -> Outcome {
    match input.clone().resolve(env_tol) {
        Ok(spec) => run(&spec),
        Err(e) => usage_failure(&input, e),
    }
}

pub fn usage_failure<S: Serialize>(spec: &S, e: SpecError) -> Outcome {
    Outcome {
        status: Status::Usage,
        json: render(
            spec,
            Value::Null,
            vec![ErrorObject {
                kind: "usage",
                message: e.to_string(),
            }],
        ),
        csv: None,
    }
}

/// Row of a sweep CSV.
#[derive(Debug, Clone, Copy, Serialize)]
struct CsvRow {
    #[serde(rename = "Z")]
    z: f64,
    #[serde(rename = "exact")]
    exact: f64,
    #[serde(rename = "predicted")]
    predicted: f64,
    #[serde(rename = "residual")]
    residual: f64,
}

fn to_csv(rows: &[CsvRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

pub fn run(spec: &ExperimentSpec) -> Outcome {
    match execute(spec) {
        Ok((results, rows)) => Outcome {
            status: Status::Ok,
            json: render(spec, results, Vec::new()),
            csv: rows.map(|r| to_csv(&r)),
        },
        Err(e) => {
            let (status, kind) = match e {
                Error::InvalidParams(_) => (Status::Usage, "usage"),
                _ => (Status::Computation, "computation"),
            };
            Outcome {
                status,
                json: render(
                    spec,
                    Value::Null,
                    vec![ErrorObject {
                        kind,
                        message: e.to_string(),
                    }],
                ),
                csv: None,
            }
        }
    }
}

fn options(spec: &ExperimentSpec) -> OptimizerOptions {
    OptimizerOptions {
        starts: spec.starts,
        seed: RngSeed(spec.seed),
        ..OptimizerOptions::default()
    }
}

fn model(spec: &ExperimentSpec) -> dropletlab_core::Result<Model> {
    Model::with_constants(spec.params()?, crate::constants(spec.d, spec.s, spec.tol)?)
}

fn masses(spec: &ExperimentSpec) -> dropletlab_core::Result<MassVector> {
    MassVector::new(spec.masses.clone().unwrap_or_else(|| vec![spec.m]))
}

/// Given points, or the multistart minimizer of `F_{N,m}`.
fn configuration(
    spec: &ExperimentSpec,
    md: &Model,
    m: &MassVector,
) -> dropletlab_core::Result<(PointConfiguration, Option<f64>)> {
    if let Some(points) = &spec.points {
        return Ok((PointConfiguration::from_points(spec.d, points)?, None));
    }
    if m.n() == 0 {
        return Ok((PointConfiguration::new(spec.d, Vec::new())?, None));
    }
    let r = minimize_config(m, &md.params, spec.d, &options(spec))?;
    Ok((r.config, Some(r.value)))
}

type Executed = (Value, Option<Vec<CsvRow>>);

fn execute(spec: &ExperimentSpec) -> dropletlab_core::Result<Executed> {
    let opts = options(spec);
    match spec.command {
        Command::Constants => {
            let c = crate::constants(spec.d, spec.s, spec.tol)?;
            Ok((json!(c), None))
        }
        Command::Optimize => {
            let md = model(spec)?;
            let m = masses(spec)?;
            let r = minimize_config(&m, &md.params, spec.d, &opts)?;
            let norms = r.config.norms();
            Ok((json!({ "masses": m, "result": r, "norms": norms }), None))
        }
        Command::Energy => {
            let md = model(spec)?;
            let m = masses(spec)?;
            let (points, f_min) = configuration(spec, &md, &m)?;
            let gc = GeneralizedConfig::new(m, points, spec.z)?;
            let exact = exact_energy_balls(&gc, &md)?;
            let predicted = predicted_energy(&gc, &md)?;
            let single =
                exact_energy_balls(&GeneralizedConfig::single(spec.m, spec.d, spec.z)?, &md)?;
            Ok((
                json!({
                    "config": gc,
                    "interaction_minimum": f_min,
                    "exact": exact,
                    "predicted": predicted,
                    "single_ball": single,
                }),
                None,
            ))
        }
        Command::Partition => {
            let md = model(spec)?;
            let (count, best) = if spec.z > 0.0 {
                optimal_droplet_count_confined(&md, spec.m, spec.n_max, spec.z, &opts)?
            } else {
                optimal_droplet_count(&md, spec.m, spec.n_max, &opts)?
            };
            let spread = best.multiplier_spread();
            Ok((
                json!({
                    "droplets": count + 1,
                    "best": best,
                    "multiplier_spread": spread,
                    "m_tilde": md.constants.m_tilde(),
                }),
                None,
            ))
        }
        Command::Sweep => {
            let md = model(spec)?;
            let rows = ez_to_e0_sweep(&md, spec.m, &spec.zgrid, spec.n_max, &opts)?;
            let e0 = rows[0].value;
            let csv = rows
                .iter()
                .map(|r| CsvRow {
                    z: r.z,
                    exact: r.value,
                    predicted: e0,
                    residual: r.value - e0,
                })
                .collect();
            Ok((json!({ "rows": rows }), Some(csv)))
        }
        Command::Expansion => {
            let md = model(spec)?;
            let m = masses(spec)?;
            let (points, f_min) = configuration(spec, &md, &m)?;
            let sweep = expansion_residual_sweep(&m, &points, &md, &spec.zgrid)?;
            let csv = sweep
                .reports
                .iter()
                .map(|r| CsvRow {
                    z: r.z,
                    exact: r.exact,
                    predicted: r.predicted,
                    residual: r.residual,
                })
                .collect();
            let theory = (spec.s + 1.0) / (spec.s - spec.p);
            Ok((
                json!({
                    "masses": m,
                    "points": points,
                    "interaction_minimum": f_min,
                    "reports": sweep.reports,
                    "fit": sweep.fit,
                    "theory_slope": theory,
                }),
                Some(csv),
            ))
        }
        Command::Threshold => {
            let md = model(spec)?;
            let mt = md.constants.m_tilde();
            let thr = split_threshold(&md.constants, mt.inflection, 1e3 * mt.m_tilde)?;
            Ok((
                json!({
                    "m_tilde": mt.m_tilde,
                    "inflection": mt.inflection,
                    "split_threshold": thr,
                    "ratio_to_m_tilde": thr / mt.m_tilde,
                }),
                None,
            ))
        }
        Command::Subadd => {
            let md = model(spec)?;
            let mp = spec.mprime.unwrap_or(0.5 * spec.m);
            let v = subadditivity_check(&md, spec.m, mp, spec.n_max, &opts)?;
            Ok((json!(v), None))
        }
    }
}
