//! Seeded discrete-event simulation of the fog and cloud M/M/1 queues.
//!
//! Random numbers come from xoshiro256++ seeded through SplitMix64
//! (`Xoshiro256PlusPlus::seed_from_u64`). Uniforms take the top 53 bits of
//! each output, `u = (x >> 11) · 2⁻⁵³ ∈ [0, 1)`, and exponential variates
//! use the inverse CDF `−ln(1 − u) / rate`. Interarrival and service times
//! are drawn alternately from one stream per queue.
//!
//! A station's two queues use independent streams obtained with the
//! generator's `jump()` (2⁶⁴ steps apart): station `i` takes the seed's
//! stream jumped `2i` times for its fog queue and `2i + 1` times for its
//! cloud queue. Splitting the Poisson arrivals by the hit ratio yields two
//! independent Poisson streams, so the queues are simulated separately.

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::model::{Placement, Scenario};
use crate::objective::echr;

/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

/// Batches used for the batch-means confidence interval.
const BATCHES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub seed: u64,
    /// Customers simulated per queue.
    pub n_arrivals: usize,
    /// Leading sojourns discarded before averaging.
    pub warmup: usize,
}

impl SimConfig {
    /// Config with the default warmup of 1% of arrivals.
    pub fn new(seed: u64, n_arrivals: usize) -> Self {
        Self {
            seed,
            n_arrivals,
            warmup: n_arrivals / 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_arrivals <= self.warmup {
            return invalid(format!(
                "arrivals ({}) must exceed warmup ({})",
                self.n_arrivals, self.warmup
            ));
        }
        Ok(())
    }

    pub fn samples(&self) -> usize {
        self.n_arrivals - self.warmup
    }
}

/// Mean sojourn of one queue with a 95% batch-means half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueueEstimate {
    pub mean: f64,
    pub ci_halfwidth: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub station: usize,
    pub seed: u64,
    pub h_e: f64,
    /// `None` when the queue receives no traffic (`h_e = 0` or `h_e = 1`).
    pub edge: Option<QueueEstimate>,
    pub cloud: Option<QueueEstimate>,
    /// `h_e · mean_e + (1 − h_e) · mean_b`.
    pub mean_adt: f64,
}

impl SimResult {
    pub fn mean_sojourn_e(&self) -> Option<f64> {
        self.edge.map(|e| e.mean)
    }

    pub fn mean_sojourn_b(&self) -> Option<f64> {
        self.cloud.map(|e| e.mean)
    }
}

struct Exponential<'a> {
    rng: &'a mut Xoshiro256PlusPlus,
}

impl Exponential<'_> {
    fn sample(&mut self, rate: f64) -> f64 {
        let u = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        -(1.0 - u).ln() / rate
    }
}

fn run_fifo(
    lambda: f64,
    mu: f64,
    config: &SimConfig,
    rng: &mut Xoshiro256PlusPlus,
) -> QueueEstimate {
    let mut exp = Exponential { rng };
    let mut arrival = 0.0;
    let mut last_departure: f64 = 0.0;
    let samples = config.samples();
    let batch_len = samples / BATCHES;
    let mut batch_means = Vec::with_capacity(BATCHES);
    let mut batch_sum = 0.0;
    let mut batch_count = 0usize;
    let mut total = 0.0;
    let mut sum_sq = 0.0;
    for n in 0..config.n_arrivals {
        arrival += exp.sample(lambda);
        let service = exp.sample(mu);
        // FIFO: service starts when the customer arrives or the server frees up.
        let departure = arrival.max(last_departure) + service;
        last_departure = departure;
        if n < config.warmup {
            continue;
        }
        let sojourn = departure - arrival;
        total += sojourn;
        sum_sq += sojourn * sojourn;
        if batch_len > 0 && batch_means.len() < BATCHES {
            batch_sum += sojourn;
            batch_count += 1;
            if batch_count == batch_len {
                batch_means.push(batch_sum / batch_len as f64);
                batch_sum = 0.0;
                batch_count = 0;
            }
        }
    }
    let mean = total / samples as f64;
    let ci_halfwidth = if batch_means.len() == BATCHES {
        let bm = batch_means.iter().sum::<f64>() / BATCHES as f64;
        let var = batch_means.iter().map(|m| (m - bm).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
        Z_95 * (var / BATCHES as f64).sqrt()
    } else if samples > 1 {
        let var = (sum_sq - samples as f64 * mean * mean) / (samples - 1) as f64;
        Z_95 * (var.max(0.0) / samples as f64).sqrt()
    } else {
        f64::NAN
    };
    QueueEstimate {
        mean,
        ci_halfwidth,
        samples,
    }
}

fn check_rates(lambda: f64, mu: f64) -> Result<()> {
    if !(lambda > 0.0) || !(lambda < mu) || !mu.is_finite() {
        return invalid(format!("unstable or invalid queue: λ={lambda}, μ={mu}"));
    }
    Ok(())
}

/// Simulates a FIFO M/M/1 queue and returns its mean sojourn time.
pub fn simulate_mm1(lambda: f64, mu: f64, config: &SimConfig) -> Result<QueueEstimate> {
    check_rates(lambda, mu)?;
    config.validate()?;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(config.seed);
    Ok(run_fifo(lambda, mu, config, &mut rng))
}

/// Simulates station `station` (zero-based) serving `placement`.
pub fn simulate_station(
    placement: &Placement,
    scenario: &Scenario,
    station: usize,
    config: &SimConfig,
) -> Result<SimResult> {
    config.validate()?;
    if station >= scenario.nodes() {
        return invalid(format!(
            "station {station} out of range (cluster has {})",
            scenario.nodes()
        ));
    }
    if placement.nodes() != scenario.nodes() {
        return invalid(format!(
            "placement covers {} nodes, cluster has {}",
            placement.nodes(),
            scenario.nodes()
        ));
    }
    let h = echr(placement, scenario.library())?.clamp(0.0, 1.0);
    let rates = scenario.traffic().station(station);

    let mut stream = Xoshiro256PlusPlus::seed_from_u64(config.seed);
    for _ in 0..2 * station {
        stream.jump();
    }
    let mut edge_rng = stream.clone();
    stream.jump();
    let mut cloud_rng = stream;

    let lambda_e = rates.lambda * h;
    let lambda_b = rates.lambda * (1.0 - h);
    let edge = if lambda_e > 0.0 {
        check_rates(lambda_e, rates.mu_e)?;
        Some(run_fifo(lambda_e, rates.mu_e, config, &mut edge_rng))
    } else {
        None
    };
    let cloud = if lambda_b > 0.0 {
        check_rates(lambda_b, rates.mu_b)?;
        Some(run_fifo(lambda_b, rates.mu_b, config, &mut cloud_rng))
    } else {
        None
    };
    let mean_adt = edge.map_or(0.0, |e| h * e.mean) + cloud.map_or(0.0, |c| (1.0 - h) * c.mean);
    Ok(SimResult {
        station,
        seed: config.seed,
        h_e: h,
        edge,
        cloud,
        mean_adt,
    })
}
