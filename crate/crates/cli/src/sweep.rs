//! Parameter sweeps over a base scenario file.

use std::path::Path;
use std::time::Instant;

use clap::ValueEnum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use fogcache::admm::{self, AdmmConfig};
use fogcache::baselines::{projected_gradient_solve, BaselineConfig};
use fogcache::heuristic::{echr_csl, heuristic_solve};
use fogcache::io::ScenarioFile;
use fogcache::objective::overall_adt;
use fogcache::{Placement, Scenario};

use crate::{read_text, write_csv, CliResult, Failure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
pub enum Parameter {
    #[serde(rename = "lambda")]
    Lambda,
    #[serde(rename = "mu_b")]
    MuB,
    #[serde(rename = "mu_e")]
    MuE,
    F,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: Parameter,
    pub values: Vec<f64>,
    /// Scenario file, relative to the sweep file.
    pub base: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum SweepSolver {
    #[serde(rename = "admm")]
    Admm,
    #[serde(rename = "pgd")]
    Pgd,
    #[serde(rename = "heuristic")]
    Heuristic,
    #[serde(rename = "csl-only")]
    #[value(name = "csl-only")]
    CslOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Status {
    Ok,
    NotConverged,
    Invalid,
    Failed,
}

#[derive(Debug, Serialize)]
struct Row {
    value: f64,
    solver: SweepSolver,
    echr: Option<f64>,
    adt: Option<f64>,
    iterations: Option<usize>,
    wall_time: Option<f64>,
    status: Status,
}

impl Row {
    fn empty(value: f64, solver: SweepSolver, status: Status) -> Self {
        Self {
            value,
            solver,
            echr: None,
            adt: None,
            iterations: None,
            wall_time: None,
            status,
        }
    }
}

/// Base scenario with the swept parameter replaced by `value`.
fn scenario_at(
    base: &ScenarioFile,
    parameter: Parameter,
    value: f64,
) -> fogcache::Result<Scenario> {
    let mut file = base.clone();
    let n = file.traffic.lambda.len();
    match parameter {
        Parameter::Lambda => file.traffic.lambda = vec![value; n],
        Parameter::MuB => file.traffic.mu_b = vec![value; n],
        Parameter::MuE => file.traffic.mu_e = vec![value; n],
        Parameter::F => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(fogcache::Error::InvalidArgument(format!(
                    "F must be a positive integer, got {value}"
                )));
            }
            let size = file.library.sizes.first().copied().unwrap_or(1.0);
            file.library.contents = value as usize;
            file.library.sizes = vec![size; value as usize];
        }
    }
    file.build()
}

fn run_solver(
    scenario: &Scenario,
    solver: SweepSolver,
    admm_cfg: &AdmmConfig,
    pgd_cfg: &BaselineConfig,
    value: f64,
) -> Row {
    let start = Instant::now();
    let outcome: fogcache::Result<(Placement, Option<usize>, bool)> = match solver {
        SweepSolver::Admm => {
            admm::solve(scenario, admm_cfg, None).map(|(p, s)| (p, Some(s.k), s.converged))
        }
        SweepSolver::Pgd => projected_gradient_solve(scenario, pgd_cfg)
            .map(|(p, s)| (p, Some(s.iterations), s.converged)),
        SweepSolver::Heuristic => Ok((heuristic_solve(scenario).placement, None, true)),
        SweepSolver::CslOnly => Ok((
            echr_csl(scenario.library(), scenario.cluster()).1,
            None,
            true,
        )),
    };
    let wall_time = start.elapsed().as_secs_f64();
    let report = outcome.and_then(|(p, iterations, converged)| {
        overall_adt(&p, scenario).map(|r| (r, iterations, converged))
    });
    match report {
        Ok((r, iterations, converged)) => Row {
            value,
            solver,
            echr: Some(r.h_e),
            adt: Some(r.overall),
            iterations,
            wall_time: Some(wall_time),
            status: if converged {
                Status::Ok
            } else {
                Status::NotConverged
            },
        },
        Err(e) => {
            eprintln!("warning: {solver:?} failed at value {value}: {e}");
            Row::empty(value, solver, Status::Failed)
        }
    }
}

pub fn cmd_sweep(
    path: &Path,
    solvers: &[SweepSolver],
    admm_cfg: &AdmmConfig,
    pgd_cfg: &BaselineConfig,
    out: Option<&Path>,
) -> CliResult<()> {
    let spec: SweepSpec = serde_json::from_str(&read_text(path)?)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    if spec.values.is_empty() {
        return Err(Failure::input("sweep lists no values"));
    }
    if solvers.is_empty() {
        return Err(Failure::input("no solvers selected"));
    }
    let base_path = path.parent().unwrap_or(Path::new(".")).join(&spec.base);
    let base = ScenarioFile::from_json(&read_text(&base_path)?)
        .map_err(|e| Failure::input(format!("{}: {e}", base_path.display())))?;
    if spec.parameter == Parameter::F && base.library.popularity.is_some() {
        return Err(Failure::input(
            "an F sweep needs a base library given by alpha",
        ));
    }

    let jobs: Vec<(f64, SweepSolver)> = spec
        .values
        .iter()
        .flat_map(|&v| solvers.iter().map(move |&s| (v, s)))
        .collect();
    // Indexed parallel collect keeps rows in input order.
    let rows: Vec<Row> = jobs
        .par_iter()
        .map(
            |&(value, solver)| match scenario_at(&base, spec.parameter, value) {
                Ok(scenario) => run_solver(&scenario, solver, admm_cfg, pgd_cfg, value),
                Err(e) => {
                    eprintln!("warning: value {value} skipped: {e}");
                    Row::empty(value, solver, Status::Invalid)
                }
            },
        )
        .collect();
    write_csv(&rows, out)?;
    if rows.iter().any(|r| r.status == Status::NotConverged) {
        return Err(Failure::numerical("some sweep points did not converge"));
    }
    Ok(())
}
