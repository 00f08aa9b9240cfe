//! The analytic download-time model.
//!
//! A placement enters the model only through its edge-cache-hit ratio
//! `h = c·p`, where `c` repeats the popularity vector once per node. Every
//! station runs a fog queue with arrivals `λ_i h` and a cloud queue with
//! arrivals `λ_i (1 - h)`, so the overall download time is a scalar convex
//! function of `h`. [`AdtCurve`] evaluates that function and its
//! derivatives; the placement-level functions are thin wrappers around it.

use crate::error::{invalid, Result};
use crate::model::{
    ContentLibrary, Placement, Scenario, StationRates, TrafficProfile, FEASIBILITY_TOL,
};

/// Arrival rates of the fog and cloud queues at every station.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueSplit {
    pub lambda_e: Vec<f64>,
    pub lambda_b: Vec<f64>,
}

impl QueueSplit {
    pub fn new(h: f64, traffic: &TrafficProfile) -> Self {
        let lambda_e = traffic.lambda().iter().map(|l| l * h).collect();
        let lambda_b = traffic.lambda().iter().map(|l| l * (1.0 - h)).collect();
        Self { lambda_e, lambda_b }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AdtReport {
    /// Edge-cache-hit ratio.
    pub h_e: f64,
    /// Backhaul-traffic ratio, `1 - h_e`.
    pub h_b: f64,
    /// Mean sojourn in each station's fog queue.
    pub t_e: Vec<f64>,
    /// Mean sojourn in each station's cloud queue.
    pub t_b: Vec<f64>,
    pub per_station: Vec<f64>,
    /// Request-weighted average of `per_station`.
    pub overall: f64,
}

/// Popularity of the content stored at each flattened placement index.
pub fn popularity_vector(library: &ContentLibrary, nodes: usize) -> Vec<f64> {
    library.popularity().repeat(nodes)
}

/// Edge-cache-hit ratio `Σ_f P_r(f) Σ_i P(i, f)`.
pub fn echr(placement: &Placement, library: &ContentLibrary) -> Result<f64> {
    if placement.contents() != library.len() {
        return invalid(format!(
            "placement covers {} contents, library has {}",
            placement.contents(),
            library.len()
        ));
    }
    Ok(placement
        .content_totals()
        .iter()
        .zip(library.popularity())
        .map(|(t, p)| t * p)
        .sum())
}

/// Station download time for hit ratio `h`.
pub fn adt_of_echr(h: f64, lambda: f64, mu_e: f64, mu_b: f64) -> Result<f64> {
    check_echr(h)?;
    StationRates { lambda, mu_e, mu_b }.check()?;
    Ok(station_adt(h, lambda, mu_e, mu_b))
}

fn station_adt(h: f64, lambda: f64, mu_e: f64, mu_b: f64) -> f64 {
    h / (mu_e - lambda * h) + (1.0 - h) / (mu_b - lambda * (1.0 - h))
}

fn check_echr(h: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&h) {
        return invalid(format!("hit ratio {h} outside [0, 1]"));
    }
    Ok(())
}

pub(crate) fn require_equal_sizes(library: &ContentLibrary) -> Result<()> {
    if library.uniform_size().is_none() {
        return invalid("the download-time model requires all contents to have equal size");
    }
    Ok(())
}

/// Full report of the model at `placement`.
pub fn overall_adt(placement: &Placement, scenario: &Scenario) -> Result<AdtReport> {
    require_equal_sizes(scenario.library())?;
    if placement.nodes() != scenario.nodes() {
        return invalid(format!(
            "placement covers {} nodes, cluster has {}",
            placement.nodes(),
            scenario.nodes()
        ));
    }
    let h = echr(placement, scenario.library())?;
    // Rounding can push a boundary placement a hair outside [0, 1].
    let h = if h > 1.0 && h <= 1.0 + FEASIBILITY_TOL {
        1.0
    } else {
        h.max(0.0)
    };
    check_echr(h)?;
    let traffic = scenario.traffic();
    let mut t_e = Vec::with_capacity(traffic.len());
    let mut t_b = Vec::with_capacity(traffic.len());
    let mut per_station = Vec::with_capacity(traffic.len());
    for st in traffic.stations() {
        t_e.push(1.0 / (st.mu_e - st.lambda * h));
        t_b.push(1.0 / (st.mu_b - st.lambda * (1.0 - h)));
        per_station.push(station_adt(h, st.lambda, st.mu_e, st.mu_b));
    }
    let overall = traffic
        .weights()
        .iter()
        .zip(&per_station)
        .map(|(w, d)| w * d)
        .sum();
    Ok(AdtReport {
        h_e: h,
        h_b: 1.0 - h,
        t_e,
        t_b,
        per_station,
        overall,
    })
}

/// Gradient of the overall download time with respect to the flattened
/// placement vector: `(dD/dh) · c`.
pub fn grad_overall_adt(p: &[f64], scenario: &Scenario) -> Result<Vec<f64>> {
    require_equal_sizes(scenario.library())?;
    let placement = Placement::from_vector(scenario.nodes(), scenario.contents(), p.to_vec())?;
    placement.check_feasible(scenario.library(), scenario.cluster(), FEASIBILITY_TOL)?;
    let c = popularity_vector(scenario.library(), scenario.nodes());
    let h = dot(&c, p);
    let slope = AdtCurve::new(scenario.traffic()).slope(h);
    Ok(c.into_iter().map(|cj| slope * cj).collect())
}

/// `d²D/dh²`, strictly positive for stable traffic.
pub fn d2_adt_dh2(h: f64, scenario: &Scenario) -> Result<f64> {
    check_echr(h)?;
    Ok(AdtCurve::new(scenario.traffic()).curvature(h))
}

/// The overall download time as a function of the hit ratio.
///
/// Defined on the open interval where both queues of every station are
/// stable, which always contains `[0, 1]`.
#[derive(Debug, Clone)]
pub struct AdtCurve {
    stations: Vec<(f64, StationRates)>,
}

impl AdtCurve {
    pub fn new(traffic: &TrafficProfile) -> Self {
        let stations = traffic
            .weights()
            .into_iter()
            .zip(traffic.stations())
            .collect();
        Self { stations }
    }

    /// Open interval `(lo, hi)` of hit ratios keeping every queue stable.
    pub fn domain(&self) -> (f64, f64) {
        let lo = self
            .stations
            .iter()
            .map(|(_, s)| 1.0 - s.mu_b / s.lambda)
            .fold(f64::NEG_INFINITY, f64::max);
        let hi = self
            .stations
            .iter()
            .map(|(_, s)| s.mu_e / s.lambda)
            .fold(f64::INFINITY, f64::min);
        (lo, hi)
    }

    pub fn value(&self, h: f64) -> f64 {
        self.stations
            .iter()
            .map(|(w, s)| w * station_adt(h, s.lambda, s.mu_e, s.mu_b))
            .sum()
    }

    pub fn slope(&self, h: f64) -> f64 {
        self.stations
            .iter()
            .map(|(w, s)| {
                let de = s.mu_e - s.lambda * h;
                let db = s.mu_b - s.lambda * (1.0 - h);
                w * (s.mu_e / (de * de) - s.mu_b / (db * db))
            })
            .sum()
    }

    pub fn curvature(&self, h: f64) -> f64 {
        self.stations
            .iter()
            .map(|(w, s)| {
                let de = s.mu_e - s.lambda * h;
                let db = s.mu_b - s.lambda * (1.0 - h);
                w * (2.0 * s.mu_e * s.lambda / de.powi(3) + 2.0 * s.mu_b * s.lambda / db.powi(3))
            })
            .sum()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
