//! `fogcache` command-line runner.
//!
//! Exit status is 0 on success, 1 when a solver fails to converge or hits a
//! numerical error, and 2 for unreadable or invalid input.

mod sweep;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use fogcache::admm::{self, AdmmConfig, TraceRecord};
use fogcache::baselines::{projected_gradient_solve, BaselineConfig};
use fogcache::heuristic::heuristic_solve;
use fogcache::io::{placement_from_json, placement_to_json, scenario_from_json};
use fogcache::objective::{adt_of_echr, overall_adt, AdtReport};
use fogcache::queuesim::{simulate_station, SimConfig};
use fogcache::{Placement, Scenario};

#[derive(Parser)]
#[command(
    name = "fogcache",
    version,
    about = "Capacity-aware fog edge cache placement"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the optimal placement and write placement, report and trace.
    Solve {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = SolverName::Admm)]
        solver: SolverName,
        #[command(flatten)]
        tuning: Tuning,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the closed-form heuristic and print its summary.
    Heuristic {
        #[arg(long)]
        scenario: PathBuf,
        /// Also write placement.json and report.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one parameter and emit a CSV row per value and solver.
    Sweep {
        /// Sweep description: {"parameter", "values", "base"}.
        #[arg(long)]
        sweep: PathBuf,
        #[arg(
            long,
            value_enum,
            value_delimiter = ',',
            default_value = "admm,pgd,heuristic,csl-only"
        )]
        solvers: Vec<sweep::SweepSolver>,
        #[command(flatten)]
        tuning: Tuning,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate every station's queues under a placement.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        placement: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        arrivals: usize,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SolverName {
    Admm,
    Pgd,
}

#[derive(Args, Clone)]
struct Tuning {
    /// ADMM penalty parameter.
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    eps_abs: Option<f64>,
    #[arg(long)]
    eps_rel: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
}

impl Tuning {
    fn admm(&self) -> AdmmConfig {
        let d = AdmmConfig::default();
        AdmmConfig {
            rho: self.rho.unwrap_or(d.rho),
            eps_abs: self.eps_abs.unwrap_or(d.eps_abs),
            eps_rel: self.eps_rel.unwrap_or(d.eps_rel),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            ..d
        }
    }

    /// The gradient baseline stops on `eps_abs` alone.
    fn pgd(&self) -> BaselineConfig {
        let d = BaselineConfig::default();
        BaselineConfig {
            tol: self.eps_abs.unwrap_or(d.tol),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            ..d
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<fogcache::Error> for Failure {
    fn from(e: fogcache::Error) -> Self {
        match e {
            fogcache::Error::InvalidArgument(_) | fogcache::Error::Format(_) => {
                Self::input(e.to_string())
            }
            _ => Self::numerical(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text)
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn load_scenario(path: &Path) -> CliResult<Scenario> {
    scenario_from_json(&read_text(path)?)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes")
}

/// Writes CSV rows to `out`, or stdout when it is `None`.
pub fn write_csv<T: Serialize>(rows: &[T], out: Option<&Path>) -> CliResult<()> {
    let mut buf = csv::Writer::from_writer(Vec::new());
    for row in rows {
        buf.serialize(row)
            .map_err(|e| Failure::numerical(format!("csv: {e}")))?;
    }
    let bytes = buf
        .into_inner()
        .map_err(|e| Failure::numerical(format!("csv: {e}")))?;
    let text = String::from_utf8(bytes).expect("csv output is utf-8");
    match out {
        Some(path) => write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct SolveReport {
    solver: SolverName,
    converged: bool,
    iterations: usize,
    adt: AdtReport,
}

fn cmd_solve(scenario: &Path, solver: SolverName, tuning: &Tuning, out: &Path) -> CliResult<()> {
    let scenario = load_scenario(scenario)?;
    let (placement, converged, trace): (Placement, bool, Vec<TraceRecord>) = match solver {
        SolverName::Admm => {
            let (p, state) = admm::solve(&scenario, &tuning.admm(), None)?;
            (p, state.converged, state.trace)
        }
        SolverName::Pgd => {
            let (p, state) = projected_gradient_solve(&scenario, &tuning.pgd())?;
            (p, state.converged, state.trace)
        }
    };
    let report = SolveReport {
        solver,
        converged,
        iterations: trace.len(),
        adt: overall_adt(&placement, &scenario)?,
    };
    fs::create_dir_all(out)
        .map_err(|e| Failure::input(format!("cannot create {}: {e}", out.display())))?;
    write_text(&out.join("placement.json"), &placement_to_json(&placement))?;
    write_text(&out.join("report.json"), &to_json(&report))?;
    write_csv(&trace, Some(&out.join("trace.csv")))?;
    println!(
        "solver={} converged={} iterations={} echr={:.8} adt={:.8}",
        match solver {
            SolverName::Admm => "admm",
            SolverName::Pgd => "pgd",
        },
        converged,
        report.iterations,
        report.adt.h_e,
        report.adt.overall
    );
    if !converged {
        return Err(Failure::numerical(format!(
            "no convergence within {} iterations; best iterate written",
            report.iterations
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct HeuristicReport {
    h_csl: f64,
    h_cpl: f64,
    h_star: f64,
    lambda_star: Option<f64>,
    regime: fogcache::heuristic::Regime,
    adt: AdtReport,
}

fn cmd_heuristic(scenario: &Path, out: Option<&Path>) -> CliResult<()> {
    let scenario = load_scenario(scenario)?;
    let r = heuristic_solve(&scenario);
    let report = HeuristicReport {
        h_csl: r.h_csl,
        h_cpl: r.h_cpl,
        h_star: r.h_star,
        lambda_star: r.lambda_star,
        regime: r.regime,
        adt: overall_adt(&r.placement, &scenario)?,
    };
    println!("h_csl={:.8}", report.h_csl);
    println!("h_cpl={:.8}", report.h_cpl);
    match report.lambda_star {
        Some(l) => println!("lambda_star={l:.8}"),
        None => println!("lambda_star=undefined"),
    }
    println!("regime={}", report.regime);
    println!("h_star={:.8}", report.h_star);
    println!("adt={:.8}", report.adt.overall);
    if let Some(dir) = out {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::input(format!("cannot create {}: {e}", dir.display())))?;
        write_text(
            &dir.join("placement.json"),
            &placement_to_json(&r.placement),
        )?;
        write_text(&dir.join("report.json"), &to_json(&report))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SimRow {
    station: usize,
    h_e: f64,
    sim_t_e: Option<f64>,
    ci_t_e: Option<f64>,
    analytic_t_e: f64,
    sim_t_b: Option<f64>,
    ci_t_b: Option<f64>,
    analytic_t_b: f64,
    sim_adt: f64,
    analytic_adt: f64,
    rel_error: f64,
    samples: usize,
}

fn cmd_simulate(
    scenario: &Path,
    placement: &Path,
    seed: u64,
    arrivals: usize,
    out: Option<&Path>,
) -> CliResult<()> {
    let scenario = load_scenario(scenario)?;
    let placement = placement_from_json(&read_text(placement)?, &scenario)
        .map_err(|e| Failure::input(format!("{}: {e}", placement.display())))?;
    let config = SimConfig::new(seed, arrivals);
    config.validate()?;
    let report = overall_adt(&placement, &scenario)?;
    let rows: Vec<SimRow> = (0..scenario.nodes())
        .into_par_iter()
        .map(|i| -> CliResult<SimRow> {
            let r = simulate_station(&placement, &scenario, i, &config)?;
            let rates = scenario.traffic().station(i);
            let analytic = adt_of_echr(r.h_e, rates.lambda, rates.mu_e, rates.mu_b)?;
            Ok(SimRow {
                station: i + 1,
                h_e: r.h_e,
                sim_t_e: r.mean_sojourn_e(),
                ci_t_e: r.edge.map(|e| e.ci_halfwidth),
                analytic_t_e: report.t_e[i],
                sim_t_b: r.mean_sojourn_b(),
                ci_t_b: r.cloud.map(|e| e.ci_halfwidth),
                analytic_t_b: report.t_b[i],
                sim_adt: r.mean_adt,
                analytic_adt: analytic,
                rel_error: (r.mean_adt - analytic).abs() / analytic,
                samples: config.samples(),
            })
        })
        .collect::<CliResult<_>>()?;
    write_csv(&rows, out)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Solve {
            scenario,
            solver,
            tuning,
            out,
        } => cmd_solve(&scenario, solver, &tuning, &out),
        Command::Heuristic { scenario, out } => cmd_heuristic(&scenario, out.as_deref()),
        Command::Sweep {
            sweep,
            solvers,
            tuning,
            out,
        } => sweep::cmd_sweep(
            &sweep,
            &solvers,
            &tuning.admm(),
            &tuning.pgd(),
            out.as_deref(),
        ),
        Command::Simulate {
            scenario,
            placement,
            seed,
            arrivals,
            out,
        } => cmd_simulate(&scenario, &placement, seed, arrivals, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
