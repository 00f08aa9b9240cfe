#![allow(dead_code)]

use fogcache::admm::{project_feasible, ConstraintSystem};
use fogcache::{Scenario, StationRates};
use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub const BASE_RATES: StationRates = StationRates {
    lambda: 4.0,
    mu_e: 8.0,
    mu_b: 6.0,
};

pub fn base_scenario() -> Scenario {
    Scenario::homogeneous_zipf(20, 0.6, vec![2.0, 3.0, 5.0], BASE_RATES).unwrap()
}

pub fn base_with(lambda: f64, mu_e: f64, mu_b: f64) -> Scenario {
    Scenario::homogeneous_zipf(
        20,
        0.6,
        vec![2.0, 3.0, 5.0],
        StationRates { lambda, mu_e, mu_b },
    )
    .unwrap()
}

pub struct TestRng(Xoshiro256PlusPlus);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn int(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        lo + (self.0.next_u64() % (hi_inclusive - lo + 1) as u64) as usize
    }
}

/// Stable rates with `mu_b < mu_e` and load `lambda / mu_b` in `(0.05, 0.95)`.
pub fn random_rates(rng: &mut TestRng) -> StationRates {
    let mu_e = rng.uniform(2.0, 12.0);
    let mu_b = mu_e * rng.uniform(0.3, 0.95);
    let lambda = mu_b * rng.uniform(0.05, 0.95);
    StationRates { lambda, mu_e, mu_b }
}

/// Random unit-size scenario; heterogeneous traffic when `homogeneous` is false.
pub fn random_scenario(
    rng: &mut TestRng,
    max_nodes: usize,
    max_contents: usize,
    homogeneous: bool,
) -> Scenario {
    let nodes = rng.int(1, max_nodes);
    let contents = rng.int(1, max_contents);
    let alpha = rng.uniform(0.4, 1.2);
    let capacities: Vec<f64> = (0..nodes)
        .map(|_| rng.uniform(0.0, contents as f64 / nodes as f64))
        .collect();
    let cluster = fogcache::FogCluster::new(capacities).unwrap();
    let traffic = if homogeneous {
        fogcache::TrafficProfile::homogeneous(nodes, random_rates(rng)).unwrap()
    } else {
        let rates: Vec<StationRates> = (0..nodes).map(|_| random_rates(rng)).collect();
        fogcache::TrafficProfile::new(
            rates.iter().map(|r| r.lambda).collect(),
            rates.iter().map(|r| r.mu_e).collect(),
            rates.iter().map(|r| r.mu_b).collect(),
        )
        .unwrap()
    };
    let library = fogcache::ContentLibrary::zipf(contents, alpha, 1.0).unwrap();
    Scenario::new(library, cluster, traffic).unwrap()
}

/// A random feasible placement vector: a random point projected onto the
/// feasible set, then scaled towards zero.
pub fn random_feasible(rng: &mut TestRng, scenario: &Scenario) -> Vec<f64> {
    let cs = ConstraintSystem::from_scenario(scenario);
    let x: Vec<f64> = (0..scenario.dim()).map(|_| rng.uniform(0.0, 1.0)).collect();
    let z = project_feasible(&x, &cs, 1e-13, 1_000_000).unwrap();
    let scale = rng.uniform(0.2, 1.0);
    z.into_iter().map(|v| (v * scale).clamp(0.0, 1.0)).collect()
}
