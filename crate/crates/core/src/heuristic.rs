//! Closed-form switching heuristic.
//!
//! Two limiting regimes bound the optimal hit ratio:
//!
//! - storage-limited (CSL): cache as much popularity mass as fits, giving
//!   the largest achievable hit ratio `h_csl`;
//! - provision-limited (CPL): ignore storage and take the stationary point
//!   `h_cpl` of the download-time curve.
//!
//! The heuristic picks `h* = min(h_csl, h_cpl)` and realizes it as a
//! concrete placement. For homogeneous stations the switch happens at the
//! arrival rate `λ*` where the two values coincide.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::model::{ContentLibrary, FogCluster, Placement, Scenario, TrafficProfile};
use crate::objective::AdtCurve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    #[serde(rename = "CSL")]
    Csl,
    #[serde(rename = "CPL")]
    Cpl,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Csl => "CSL",
            Regime::Cpl => "CPL",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicResult {
    pub h_csl: f64,
    pub h_cpl: f64,
    pub h_star: f64,
    /// Switching arrival rate; only defined for homogeneous traffic whose
    /// curves actually cross.
    pub lambda_star: Option<f64>,
    pub regime: Regime,
    pub placement: Placement,
}

/// Capacity left below which a node counts as full.
const CAPACITY_EPS: f64 = 1e-12;

/// Contents in decreasing popularity-per-unit-size order, ties by index.
fn density_order(library: &ContentLibrary) -> Vec<usize> {
    let mut order: Vec<usize> = (0..library.len()).collect();
    let density = |f: usize| library.popularity()[f] / library.sizes()[f];
    order.sort_by(|&a, &b| density(b).total_cmp(&density(a)).then(a.cmp(&b)));
    order
}

/// Greedy fractional fill in density order, spreading each content over
/// nodes first-fit. Stops when storage runs out or the accumulated hit
/// ratio reaches `target`.
fn greedy_fill(
    library: &ContentLibrary,
    cluster: &FogCluster,
    target: Option<f64>,
) -> (f64, Placement) {
    let mut placement = Placement::zeros(cluster.len(), library.len());
    let mut remaining: Vec<f64> = cluster.capacities().to_vec();
    let mut room: f64 = cluster.total_capacity();
    let mut h = 0.0;
    for f in density_order(library) {
        let size = library.sizes()[f];
        let pop = library.popularity()[f];
        let mut portion = (room / size).min(1.0);
        if let Some(t) = target {
            let need = t - h;
            if need <= 0.0 {
                break;
            }
            portion = portion.min(need / pop);
        }
        if portion <= 0.0 {
            break;
        }
        let mut to_store = portion * size;
        for (i, rem) in remaining.iter_mut().enumerate() {
            if to_store <= 0.0 {
                break;
            }
            if *rem <= CAPACITY_EPS {
                continue;
            }
            let take = rem.min(to_store);
            let cell = placement.get(i, f) + take / size;
            placement.set(i, f, cell);
            *rem -= take;
            to_store -= take;
        }
        room = (room - portion * size).max(0.0);
        h += pop * portion;
        if target.is_none() && room <= CAPACITY_EPS {
            break;
        }
    }
    (h, placement)
}

/// Largest achievable hit ratio and a placement attaining it.
///
/// The continuous knapsack `max Σ P_r(f) x_f s.t. Σ S_f x_f <= Σ M_i`,
/// `0 <= x_f <= 1` is solved exactly by the density-ordered greedy; the
/// fractions are then packed into nodes first-fit.
pub fn echr_csl(library: &ContentLibrary, cluster: &FogCluster) -> (f64, Placement) {
    let (h, placement) = greedy_fill(library, cluster, None);
    (h.min(1.0), placement)
}

/// Stationary point of the homogeneous download-time curve, unclamped.
pub fn cpl_closed_form(lambda: f64, mu_e: f64, mu_b: f64) -> f64 {
    let (se, sb) = (mu_e.sqrt(), mu_b.sqrt());
    ((mu_e - (mu_e * mu_b).sqrt()) * sb + lambda * se) / (lambda * sb + lambda * se)
}

/// Hit ratio minimizing the download time when storage is unlimited,
/// clamped to `[0, 1]`.
pub fn echr_cpl(traffic: &TrafficProfile) -> f64 {
    if let Some(st) = traffic.as_homogeneous() {
        return cpl_closed_form(st.lambda, st.mu_e, st.mu_b).clamp(0.0, 1.0);
    }
    let curve = AdtCurve::new(traffic);
    if curve.slope(0.0) >= 0.0 {
        return 0.0;
    }
    if curve.slope(1.0) <= 0.0 {
        return 1.0;
    }
    let (mut a, mut b) = (0.0, 1.0);
    while b - a > 1e-12 {
        let m = 0.5 * (a + b);
        if curve.slope(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Arrival rate at which the homogeneous provision-limited hit ratio equals
/// `h_csl`. `None` when the two curves never cross, in which case the
/// storage-limited rule always applies.
pub fn lambda_threshold(h_csl: f64, mu_e: f64, mu_b: f64) -> Option<f64> {
    let (se, sb) = (mu_e.sqrt(), mu_b.sqrt());
    let denom = h_csl * (se + sb) - se;
    if denom <= 0.0 {
        return None;
    }
    Some((mu_b * mu_e).sqrt() * (se - sb) / denom)
}

/// Runs the switching heuristic and realizes its hit ratio.
pub fn heuristic_solve(scenario: &Scenario) -> HeuristicResult {
    let (h_csl, csl_placement) = echr_csl(scenario.library(), scenario.cluster());
    let h_cpl = echr_cpl(scenario.traffic());
    let h_star = h_csl.min(h_cpl);
    let homogeneous = scenario.traffic().as_homogeneous();
    let lambda_star = homogeneous.and_then(|st| lambda_threshold(h_csl, st.mu_e, st.mu_b));
    let regime = match (homogeneous, lambda_star) {
        (Some(st), Some(ls)) => {
            if st.lambda < ls {
                Regime::Csl
            } else {
                Regime::Cpl
            }
        }
        _ => {
            if h_csl <= h_cpl {
                Regime::Csl
            } else {
                Regime::Cpl
            }
        }
    };
    let placement = if h_star >= h_csl {
        csl_placement
    } else {
        greedy_fill(scenario.library(), scenario.cluster(), Some(h_star)).1
    };
    HeuristicResult {
        h_csl,
        h_cpl,
        h_star,
        lambda_star,
        regime,
        placement,
    }
}

/// Canonical placement with hit ratio exactly `h_target`: contents are
/// cached whole in density order (popularity order for equal sizes) and
/// the last one fractionally.
pub fn placement_from_echr(
    h_target: f64,
    library: &ContentLibrary,
    cluster: &FogCluster,
) -> Result<Placement> {
    let (h_csl, csl) = echr_csl(library, cluster);
    if !(h_target >= 0.0) {
        return invalid(format!("target hit ratio {h_target} is negative"));
    }
    if h_target > h_csl + 1e-12 {
        return invalid(format!(
            "target hit ratio {h_target} exceeds the achievable maximum {h_csl}"
        ));
    }
    if h_target >= h_csl {
        return Ok(csl);
    }
    Ok(greedy_fill(library, cluster, Some(h_target)).1)
}
