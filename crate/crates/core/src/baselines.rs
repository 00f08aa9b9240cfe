//! Reference solvers used to cross-check the ADMM solver and the projection.

use crate::admm::{project_feasible, ConstraintSystem, TraceRecord};
use crate::error::{invalid, Result};
use crate::heuristic::echr_csl;
use crate::model::{Placement, Scenario};
use crate::objective::{dot, popularity_vector, require_equal_sizes, AdtCurve};

/// Projected gradient descent with Armijo backtracking along the
/// projection arc.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    pub initial_step: f64,
    pub shrink: f64,
    pub sufficient_decrease: f64,
    /// Stop once the gradient mapping norm falls below this.
    pub tol: f64,
    pub max_iter: usize,
    pub projection_tol: f64,
    pub projection_max_iter: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            initial_step: 1.0,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            tol: 1e-9,
            max_iter: 100_000,
            projection_tol: 1e-12,
            projection_max_iter: 1_000_000,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !(self.initial_step > 0.0) || !(self.projection_tol > 0.0) {
            return invalid("tolerances and the initial step must be positive");
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return invalid(format!(
                "shrink factor must lie in (0, 1), got {}",
                self.shrink
            ));
        }
        if !(self.sufficient_decrease > 0.0 && self.sufficient_decrease < 1.0) {
            return invalid("sufficient-decrease constant must lie in (0, 1)");
        }
        if self.max_iter == 0 || self.projection_max_iter == 0 {
            return invalid("iteration caps must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BaselineState {
    pub iterations: usize,
    pub converged: bool,
    /// `primal_residual` holds the gradient mapping norm and
    /// `dual_residual` the length of the accepted step.
    pub trace: Vec<TraceRecord>,
}

/// Minimizes the download time by projected gradient descent from `p = 0`.
pub fn projected_gradient_solve(
    scenario: &Scenario,
    config: &BaselineConfig,
) -> Result<(Placement, BaselineState)> {
    config.validate()?;
    require_equal_sizes(scenario.library())?;
    let constraints = ConstraintSystem::from_scenario(scenario);
    let c = popularity_vector(scenario.library(), scenario.nodes());
    let curve = AdtCurve::new(scenario.traffic());
    let objective = |p: &[f64]| curve.value(dot(&c, p).clamp(0.0, 1.0));
    let project = |x: &[f64]| {
        project_feasible(
            x,
            &constraints,
            config.projection_tol,
            config.projection_max_iter,
        )
    };

    let mut p = vec![0.0; scenario.dim()];
    let mut value = objective(&p);
    let mut trace = Vec::new();
    let mut converged = false;

    for k in 1..=config.max_iter {
        let slope = curve.slope(dot(&c, &p).clamp(0.0, 1.0));
        let grad: Vec<f64> = c.iter().map(|cj| slope * cj).collect();
        let mut t = config.initial_step;
        let (candidate, cand_value) = loop {
            let trial: Vec<f64> = p.iter().zip(&grad).map(|(x, g)| x - t * g).collect();
            let cand = project(&trial)?;
            let cand_value = objective(&cand);
            let descent: f64 = grad
                .iter()
                .zip(cand.iter().zip(&p))
                .map(|(g, (a, b))| g * (a - b))
                .sum();
            if cand_value <= value + config.sufficient_decrease * descent || t < 1e-20 {
                break (cand, cand_value);
            }
            t *= config.shrink;
        };
        let step_len = candidate
            .iter()
            .zip(&p)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let mapping = step_len / t;
        p = candidate;
        value = cand_value;
        trace.push(TraceRecord {
            k,
            objective: value,
            primal_residual: mapping,
            dual_residual: step_len,
        });
        if mapping <= config.tol {
            converged = true;
            break;
        }
    }
    let iterations = trace.len();
    let placement = Placement::from_vector(scenario.nodes(), scenario.contents(), p)?;
    Ok((
        placement,
        BaselineState {
            iterations,
            converged,
            trace,
        },
    ))
}

/// Scans the download time over the achievable hit ratios
/// `{0, δ, 2δ, …} ∩ [0, min(1, H_csl)]`, appending the upper end `H_csl`
/// whenever `δ` resolves the range. Returns `(h_best, D_best)`.
pub fn grid_bruteforce(scenario: &Scenario, resolution: f64) -> Result<(f64, f64)> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return invalid(format!(
            "grid resolution must be positive, got {resolution}"
        ));
    }
    let (h_max, _) = echr_csl(scenario.library(), scenario.cluster());
    let h_max = h_max.min(1.0);
    let curve = AdtCurve::new(scenario.traffic());
    let mut best = (0.0, curve.value(0.0));
    let mut consider = |h: f64| {
        let d = curve.value(h);
        if d < best.1 {
            best = (h, d);
        }
    };
    let steps = (h_max / resolution).floor() as u64;
    for k in 1..=steps {
        consider(k as f64 * resolution);
    }
    if resolution <= h_max {
        consider(h_max);
    }
    Ok(best)
}

/// Largest `N·F` accepted by [`qp_projection_oracle`].
pub const QP_ORACLE_MAX_DIM: usize = 12;

/// Exact Euclidean projection onto the feasible set by active-set
/// enumeration.
///
/// Every coordinate is pinned at 0, pinned at 1 or left free, and any
/// subset of the content and node rows is made active. Each combination
/// fixes an equality-constrained least-squares problem whose solution is a
/// candidate; the feasible candidate closest to `x` is the projection.
pub fn qp_projection_oracle(x: &[f64], constraints: &ConstraintSystem) -> Result<Vec<f64>> {
    let n = constraints.dim();
    if n > QP_ORACLE_MAX_DIM {
        return invalid(format!(
            "QP oracle supports N·F <= {QP_ORACLE_MAX_DIM}, got {n}"
        ));
    }
    if x.len() != n {
        return invalid(format!(
            "vector has length {}, constraint system expects {n}",
            x.len()
        ));
    }
    let mut rows = constraints.a_matrix();
    rows.extend(constraints.b_matrix());
    let mut bounds = constraints.a_upper();
    bounds.extend_from_slice(constraints.b_upper());
    let m = rows.len();

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut pattern = vec![0u8; n]; // 0 free, 1 at lower, 2 at upper
    let total_patterns = 3usize.pow(n as u32);
    for code in 0..total_patterns {
        let mut rest = code;
        for slot in pattern.iter_mut() {
            *slot = (rest % 3) as u8;
            rest /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&j| pattern[j] == 0).collect();
        let mut base = x.to_vec();
        for j in 0..n {
            match pattern[j] {
                1 => base[j] = 0.0,
                2 => base[j] = 1.0,
                _ => {}
            }
        }
        for mask in 0u32..(1u32 << m) {
            if mask.count_ones() as usize > free.len() {
                continue;
            }
            let active: Vec<usize> = (0..m).filter(|r| mask & (1 << r) != 0).collect();
            let Some(z) = equality_projection(&base, &free, &active, &rows, &bounds) else {
                continue;
            };
            if constraints.max_violation(&z) > 1e-10 {
                continue;
            }
            let dist: f64 = z.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum();
            if best.as_ref().is_none_or(|(d, _)| dist < *d) {
                best = Some((dist, z));
            }
        }
    }
    // Pinning every coordinate at 0 is always a feasible candidate.
    Ok(best.map(|(_, z)| z).expect("zero vector is feasible"))
}

/// Minimizes `‖z_free − x_free‖²` subject to `a_r · z = b_r` for the active
/// rows, with the pinned coordinates already written into `base`.
fn equality_projection(
    base: &[f64],
    free: &[usize],
    active: &[usize],
    rows: &[Vec<f64>],
    bounds: &[f64],
) -> Option<Vec<f64>> {
    let k = active.len();
    if k == 0 {
        return Some(base.to_vec());
    }
    // Gram system (A_F A_Fᵀ) ν = A z_base − b.
    let mut gram = vec![vec![0.0; k + 1]; k];
    for (a, &ra) in active.iter().enumerate() {
        for (b, &rb) in active.iter().enumerate() {
            gram[a][b] = free.iter().map(|&j| rows[ra][j] * rows[rb][j]).sum();
        }
        gram[a][k] = dot(&rows[ra], base) - bounds[ra];
    }
    let nu = solve_dense(gram)?;
    let mut z = base.to_vec();
    for &j in free {
        z[j] -= active
            .iter()
            .zip(&nu)
            .map(|(&r, v)| rows[r][j] * v)
            .sum::<f64>();
    }
    Some(z)
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve_dense(mut aug: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let k = aug.len();
    for col in 0..k {
        let pivot = (col..k).max_by(|&a, &b| aug[a][col].abs().total_cmp(&aug[b][col].abs()))?;
        if aug[pivot][col].abs() < 1e-12 {
            return None;
        }
        aug.swap(col, pivot);
        let (top, below) = aug.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for row in below.iter_mut() {
            let factor = row[col] / pivot_row[col];
            for (a, b) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *a -= factor * b;
            }
        }
    }
    let mut x = vec![0.0; k];
    for r in (0..k).rev() {
        let tail: f64 = (r + 1..k).map(|c| aug[r][c] * x[c]).sum();
        x[r] = (aug[r][k] - tail) / aug[r][r];
    }
    Some(x)
}
