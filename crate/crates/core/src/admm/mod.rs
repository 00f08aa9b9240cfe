//! ADMM solver for the minimum download-time placement.
//!
//! The problem `min D(p) s.t. p ∈ C` is split as `D(p) + g(z)` with
//! `p = z`, where `g` is the indicator of the feasible set `C`. Each
//! iteration runs
//!
//! ```text
//! p ← argmin_p D(p) + ρ/2 ‖p − z + θ‖²
//! z ← Π_C(p + θ)
//! θ ← θ + p − z
//! ```
//!
//! `D` depends on `p` only through `h = c·p`, so the `p` step collapses to
//! a scalar root find (see [`p_update`]); the `z` step is the Dykstra
//! projection in [`projection`].

pub mod projection;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::model::{Placement, Scenario, FEASIBILITY_TOL};
use crate::objective::{dot, popularity_vector, require_equal_sizes, AdtCurve};

pub use projection::{project_feasible, ConstraintSystem};

#[derive(Debug, Clone, PartialEq)]
pub struct AdmmConfig {
    /// Augmented Lagrangian penalty.
    pub rho: f64,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub max_iter: usize,
    /// Dykstra stops once a full cycle moves less than this.
    pub projection_tol: f64,
    pub projection_max_iter: usize,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self {
            rho: 0.02,
            eps_abs: 1e-6,
            eps_rel: 1e-4,
            max_iter: 10_000,
            projection_tol: 1e-12,
            projection_max_iter: 1_000_000,
        }
    }
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return invalid(format!("rho must be positive, got {}", self.rho));
        }
        for (name, v) in [
            ("eps_abs", self.eps_abs),
            ("eps_rel", self.eps_rel),
            ("projection_tol", self.projection_tol),
        ] {
            if !(v > 0.0) {
                return invalid(format!("{name} must be positive, got {v}"));
            }
        }
        if self.max_iter == 0 || self.projection_max_iter == 0 {
            return invalid("iteration caps must be at least 1");
        }
        Ok(())
    }
}

/// One row of a convergence trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRecord {
    pub k: usize,
    pub objective: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

/// Final iterates of a run plus its per-iteration trace.
#[derive(Debug, Clone)]
pub struct AdmmState {
    pub p: Vec<f64>,
    pub z: Vec<f64>,
    pub theta: Vec<f64>,
    /// Iterations performed.
    pub k: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub converged: bool,
    /// `D(z^k)` and residuals for `k = 1..`.
    pub trace: Vec<TraceRecord>,
}

/// Scalar tolerance on `h` for the inner root find.
const ROOT_TOL: f64 = 1e-12;

/// Minimizer of `D(p) + ρ/2 ‖p − z + θ‖²`.
///
/// With `v = z − θ` the minimizer is `p = v − (D'(h*) / ρ) c` where `h*`
/// solves `h = c·v − (D'(h) / ρ) ‖c‖²`. The residual of that equation is
/// strictly increasing on the stability interval of `D` and diverges at
/// both ends, so a bracket always exists.
pub fn p_update(z: &[f64], theta: &[f64], scenario: &Scenario, rho: f64) -> Result<Vec<f64>> {
    if z.len() != scenario.dim() || theta.len() != scenario.dim() {
        return invalid(format!(
            "z and θ must have length {}, got {} and {}",
            scenario.dim(),
            z.len(),
            theta.len()
        ));
    }
    if !(rho > 0.0) {
        return invalid(format!("rho must be positive, got {rho}"));
    }
    require_equal_sizes(scenario.library())?;
    let c = popularity_vector(scenario.library(), scenario.nodes());
    let curve = AdtCurve::new(scenario.traffic());
    Ok(prox_step(z, theta, &c, &curve, rho)?.0)
}

fn prox_step(
    z: &[f64],
    theta: &[f64],
    c: &[f64],
    curve: &AdtCurve,
    rho: f64,
) -> Result<(Vec<f64>, f64)> {
    let v: Vec<f64> = z.iter().zip(theta).map(|(a, b)| a - b).collect();
    let cv = dot(c, &v);
    let cc = dot(c, c);
    let h = solve_scalar(cv, cc / rho, curve)?;
    let step = curve.slope(h) / rho;
    let p = v.iter().zip(c).map(|(vj, cj)| vj - step * cj).collect();
    Ok((p, h))
}

/// Root of `r(h) = h − target + gain · D'(h)` by Newton steps safeguarded
/// with bisection.
fn solve_scalar(target: f64, gain: f64, curve: &AdtCurve) -> Result<f64> {
    let residual = |h: f64| h - target + gain * curve.slope(h);
    let (lo, hi) = curve.domain();
    let mid = 0.5 * (lo.clamp(0.0, 1.0) + hi.clamp(0.0, 1.0));

    // Walk toward each end of the domain until the sign flips.
    let bracket_end = |edge: f64, want_negative: bool| -> Option<f64> {
        let mut gap = mid - edge;
        for _ in 0..2000 {
            gap *= 0.5;
            let h = edge + gap;
            if h == edge {
                break;
            }
            let r = residual(h);
            if (want_negative && r < 0.0) || (!want_negative && r > 0.0) {
                return Some(h);
            }
        }
        None
    };
    let r_mid = residual(mid);
    if r_mid == 0.0 {
        return Ok(mid);
    }
    let ends = if r_mid < 0.0 {
        (Some(mid), bracket_end(hi, false))
    } else {
        (bracket_end(lo, true), Some(mid))
    };
    let (mut a, mut b) = match ends {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::Numerical(format!(
                "p-update: no sign change of the scalar residual on ({lo}, {hi}); target {target}, gain {gain}"
            )))
        }
    };

    let mut h = 0.5 * (a + b);
    for _ in 0..200 {
        let r = residual(h);
        if r == 0.0 {
            return Ok(h);
        }
        if r < 0.0 {
            a = h;
        } else {
            b = h;
        }
        let newton = h - r / (1.0 + gain * curve.curvature(h));
        let next = if newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (next - h).abs() <= ROOT_TOL || b - a <= ROOT_TOL {
            return Ok(next);
        }
        h = next;
    }
    Err(Error::Numerical(format!(
        "p-update: root find did not reach {ROOT_TOL} on bracket [{a}, {b}]"
    )))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Runs the ADMM iteration from `p0` (zero when `None`).
///
/// Returns the feasible iterate `z` as the placement. When `max_iter` is
/// reached the iterate with the lowest objective is returned and the state
/// is flagged as not converged.
pub fn solve(
    scenario: &Scenario,
    config: &AdmmConfig,
    p0: Option<&[f64]>,
) -> Result<(Placement, AdmmState)> {
    config.validate()?;
    require_equal_sizes(scenario.library())?;
    let n = scenario.dim();
    let start = match p0 {
        Some(p) => {
            let placement =
                Placement::from_vector(scenario.nodes(), scenario.contents(), p.to_vec())?;
            placement.check_feasible(scenario.library(), scenario.cluster(), FEASIBILITY_TOL)?;
            p.to_vec()
        }
        None => vec![0.0; n],
    };

    let constraints = ConstraintSystem::from_scenario(scenario);
    let c = popularity_vector(scenario.library(), scenario.nodes());
    let curve = AdtCurve::new(scenario.traffic());
    let sqrt_n = (n as f64).sqrt();

    let mut p = start.clone();
    let mut z = start;
    let mut theta = vec![0.0; n];
    let mut trace = Vec::new();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let (mut r_norm, mut s_norm) = (f64::INFINITY, f64::INFINITY);

    for k in 1..=config.max_iter {
        p = prox_step(&z, &theta, &c, &curve, config.rho)?.0;
        let shifted: Vec<f64> = p.iter().zip(&theta).map(|(a, b)| a + b).collect();
        let z_next = project_feasible(
            &shifted,
            &constraints,
            config.projection_tol,
            config.projection_max_iter,
        )?;
        for ((t, pj), zj) in theta.iter_mut().zip(&p).zip(&z_next) {
            *t += pj - zj;
        }
        r_norm = norm(
            &p.iter()
                .zip(&z_next)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>(),
        );
        s_norm = config.rho
            * norm(
                &z_next
                    .iter()
                    .zip(&z)
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>(),
            );
        z = z_next;

        let objective = curve.value(dot(&c, &z).clamp(0.0, 1.0));
        trace.push(TraceRecord {
            k,
            objective,
            primal_residual: r_norm,
            dual_residual: s_norm,
        });
        if best.as_ref().is_none_or(|(d, _)| objective < *d) {
            best = Some((objective, z.clone()));
        }

        let eps_pri = sqrt_n * config.eps_abs + config.eps_rel * norm(&p).max(norm(&z));
        let eps_dual = sqrt_n * config.eps_abs + config.eps_rel * config.rho * norm(&theta);
        if r_norm <= eps_pri && s_norm <= eps_dual {
            let placement =
                Placement::from_vector(scenario.nodes(), scenario.contents(), z.clone())?;
            let state = AdmmState {
                p,
                z,
                theta,
                k,
                primal_residual: r_norm,
                dual_residual: s_norm,
                converged: true,
                trace,
            };
            return Ok((placement, state));
        }
    }

    let best_z = best.map(|(_, z)| z).unwrap_or_else(|| z.clone());
    let placement = Placement::from_vector(scenario.nodes(), scenario.contents(), best_z)?;
    let state = AdmmState {
        p,
        z,
        theta,
        k: config.max_iter,
        primal_residual: r_norm,
        dual_residual: s_norm,
        converged: false,
        trace,
    };
    Ok((placement, state))
}
