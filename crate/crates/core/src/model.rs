//! Problem instance types: content library, fog cluster, traffic, placements.

use crate::error::{invalid, Result};

/// Absolute tolerance used when checking placement constraints.
pub const FEASIBILITY_TOL: f64 = 1e-8;

const POPULARITY_SUM_TOL: f64 = 1e-12;

/// Zipf popularity `P(f) = f^-alpha / sum_j j^-alpha` for `f = 1..=contents`.
pub fn zipf_popularity(contents: usize, alpha: f64) -> Result<Vec<f64>> {
    if contents == 0 {
        return invalid("zipf popularity needs at least one content");
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return invalid(format!(
            "zipf exponent must be finite and nonnegative, got {alpha}"
        ));
    }
    let weights: Vec<f64> = (1..=contents).map(|f| (f as f64).powf(-alpha)).collect();
    let norm: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / norm).collect())
}

/// Service rates of the fog and cloud provision modes for contents of size
/// `size` delivered over an access link of rate `edge_rate` and fetched
/// over a backhaul of rate `backhaul_rate`.
///
/// Returns `(mu_e, mu_b)` with `mu_e = R_e / S` and
/// `mu_b = 1 / (S / R_e + S / R_b)`.
pub fn rates_from_link_speeds(size: f64, edge_rate: f64, backhaul_rate: f64) -> Result<(f64, f64)> {
    for (name, v) in [
        ("size", size),
        ("edge rate", edge_rate),
        ("backhaul rate", backhaul_rate),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return invalid(format!("{name} must be finite and positive, got {v}"));
        }
    }
    let mu_e = edge_rate / size;
    let mu_b = 1.0 / (size / edge_rate + size / backhaul_rate);
    Ok((mu_e, mu_b))
}

/// Contents sorted by non-increasing popularity, with their sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentLibrary {
    sizes: Vec<f64>,
    popularity: Vec<f64>,
}

impl ContentLibrary {
    pub fn new(sizes: Vec<f64>, popularity: Vec<f64>) -> Result<Self> {
        if sizes.is_empty() {
            return invalid("library must contain at least one content");
        }
        if sizes.len() != popularity.len() {
            return invalid(format!(
                "library has {} sizes but {} popularity entries",
                sizes.len(),
                popularity.len()
            ));
        }
        for (f, &s) in sizes.iter().enumerate() {
            if !(s > 0.0) || !s.is_finite() {
                return invalid(format!("content {}: size must be positive, got {s}", f + 1));
            }
        }
        for (f, &p) in popularity.iter().enumerate() {
            // A single content legitimately carries all the mass.
            if !(p > 0.0 && p <= 1.0) {
                return invalid(format!("content {}: popularity {p} outside (0, 1]", f + 1));
            }
            if f > 0 && p > popularity[f - 1] {
                return invalid(format!(
                    "content {}: not popularity-descending ({} < {p})",
                    f + 1,
                    popularity[f - 1]
                ));
            }
        }
        let total: f64 = popularity.iter().sum();
        if (total - 1.0).abs() > POPULARITY_SUM_TOL {
            return invalid(format!("popularity sums to {total}, expected 1"));
        }
        Ok(Self { sizes, popularity })
    }

    /// Library of `contents` items of equal `size` with Zipf(`alpha`) popularity.
    pub fn zipf(contents: usize, alpha: f64, size: f64) -> Result<Self> {
        Self::new(vec![size; contents], zipf_popularity(contents, alpha)?)
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn popularity(&self) -> &[f64] {
        &self.popularity
    }

    /// The common content size, if all contents have the same size.
    pub fn uniform_size(&self) -> Option<f64> {
        let s0 = self.sizes[0];
        self.sizes
            .iter()
            .all(|&s| (s - s0).abs() <= 1e-12 * s0)
            .then_some(s0)
    }
}

/// Cache capacities of the fog nodes, in the same unit as content sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct FogCluster {
    capacities: Vec<f64>,
}

impl FogCluster {
    pub fn new(capacities: Vec<f64>) -> Result<Self> {
        if capacities.is_empty() {
            return invalid("cluster must contain at least one fog node");
        }
        for (i, &m) in capacities.iter().enumerate() {
            if !(m >= 0.0) || !m.is_finite() {
                return invalid(format!(
                    "node {}: capacity must be finite and >= 0, got {m}",
                    i + 1
                ));
            }
        }
        Ok(Self { capacities })
    }

    pub fn len(&self) -> usize {
        self.capacities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.capacities.is_empty()
    }

    pub fn capacities(&self) -> &[f64] {
        &self.capacities
    }

    pub fn total_capacity(&self) -> f64 {
        self.capacities.iter().sum()
    }
}

/// Request and service rates at one base station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationRates {
    pub lambda: f64,
    pub mu_e: f64,
    pub mu_b: f64,
}

impl StationRates {
    /// Checks the stability chain `0 < lambda < mu_b < mu_e`.
    pub fn check(&self) -> Result<()> {
        let Self { lambda, mu_e, mu_b } = *self;
        if !(lambda > 0.0) || !lambda.is_finite() {
            return invalid(format!("λ={lambda} must be positive"));
        }
        if !(lambda < mu_b) {
            return invalid(format!("stability violated: λ={lambda} ≥ μ_b={mu_b}"));
        }
        if !(mu_b < mu_e) || !mu_e.is_finite() {
            return invalid(format!("stability violated: μ_b={mu_b} ≥ μ_e={mu_e}"));
        }
        Ok(())
    }
}

/// Per-station arrival rates and service rates of both provision modes.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficProfile {
    lambda: Vec<f64>,
    mu_e: Vec<f64>,
    mu_b: Vec<f64>,
}

impl TrafficProfile {
    pub fn new(lambda: Vec<f64>, mu_e: Vec<f64>, mu_b: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return invalid("traffic profile must cover at least one station");
        }
        if lambda.len() != mu_e.len() || lambda.len() != mu_b.len() {
            return invalid(format!(
                "traffic vectors differ in length (λ: {}, μ_e: {}, μ_b: {})",
                lambda.len(),
                mu_e.len(),
                mu_b.len()
            ));
        }
        let profile = Self { lambda, mu_e, mu_b };
        for (i, st) in profile.stations().enumerate() {
            if let Err(e) = st.check() {
                let msg = match e {
                    crate::Error::InvalidArgument(m) => m,
                    other => other.to_string(),
                };
                return invalid(format!("BS {}: {msg}", i + 1));
            }
        }
        Ok(profile)
    }

    /// Every station gets the same rates.
    pub fn homogeneous(stations: usize, rates: StationRates) -> Result<Self> {
        Self::new(
            vec![rates.lambda; stations],
            vec![rates.mu_e; stations],
            vec![rates.mu_b; stations],
        )
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn mu_e(&self) -> &[f64] {
        &self.mu_e
    }

    pub fn mu_b(&self) -> &[f64] {
        &self.mu_b
    }

    pub fn station(&self, i: usize) -> StationRates {
        StationRates {
            lambda: self.lambda[i],
            mu_e: self.mu_e[i],
            mu_b: self.mu_b[i],
        }
    }

    pub fn stations(&self) -> impl Iterator<Item = StationRates> + '_ {
        (0..self.len()).map(|i| self.station(i))
    }

    /// Request-share weights `λ_i / Σ_j λ_j`.
    pub fn weights(&self) -> Vec<f64> {
        let total: f64 = self.lambda.iter().sum();
        self.lambda.iter().map(|l| l / total).collect()
    }

    /// The shared rates when every station sees identical traffic.
    pub fn as_homogeneous(&self) -> Option<StationRates> {
        let first = self.station(0);
        self.stations().all(|s| s == first).then_some(first)
    }
}

/// A validated problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    library: ContentLibrary,
    cluster: FogCluster,
    traffic: TrafficProfile,
}

impl Scenario {
    /// Bundles the parts, checking that the traffic covers every fog node.
    pub fn new(
        library: ContentLibrary,
        cluster: FogCluster,
        traffic: TrafficProfile,
    ) -> Result<Self> {
        if traffic.len() != cluster.len() {
            return invalid(format!(
                "traffic covers {} stations but the cluster has {} nodes",
                traffic.len(),
                cluster.len()
            ));
        }
        Ok(Self {
            library,
            cluster,
            traffic,
        })
    }

    /// Homogeneous scenario with `contents` unit-size Zipf contents.
    pub fn homogeneous_zipf(
        contents: usize,
        alpha: f64,
        capacities: Vec<f64>,
        rates: StationRates,
    ) -> Result<Self> {
        let cluster = FogCluster::new(capacities)?;
        let traffic = TrafficProfile::homogeneous(cluster.len(), rates)?;
        Self::new(
            ContentLibrary::zipf(contents, alpha, 1.0)?,
            cluster,
            traffic,
        )
    }

    pub fn library(&self) -> &ContentLibrary {
        &self.library
    }

    pub fn cluster(&self) -> &FogCluster {
        &self.cluster
    }

    pub fn traffic(&self) -> &TrafficProfile {
        &self.traffic
    }

    pub fn nodes(&self) -> usize {
        self.cluster.len()
    }

    pub fn contents(&self) -> usize {
        self.library.len()
    }

    /// Length `N·F` of the flattened placement vector.
    pub fn dim(&self) -> usize {
        self.nodes() * self.contents()
    }
}

/// Portions `P(i, f)` of content `f` cached at node `i`.
///
/// Stored flattened in node-major order: entry `(i, f)` (zero-based) lives
/// at index `i * F + f`, so the vector is the concatenation of the node rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    nodes: usize,
    contents: usize,
    data: Vec<f64>,
}

impl Placement {
    pub fn zeros(nodes: usize, contents: usize) -> Self {
        Self {
            nodes,
            contents,
            data: vec![0.0; nodes * contents],
        }
    }

    /// Unflattens a node-major vector.
    pub fn from_vector(nodes: usize, contents: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != nodes * contents {
            return invalid(format!(
                "placement vector has length {}, expected {nodes}×{contents} = {}",
                data.len(),
                nodes * contents
            ));
        }
        Ok(Self {
            nodes,
            contents,
            data,
        })
    }

    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self> {
        let nodes = rows.len();
        let contents = rows.first().map_or(0, Vec::len);
        if nodes == 0 || contents == 0 {
            return invalid("placement matrix must be non-empty");
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != contents) {
            return invalid(format!(
                "placement row {} has {} entries, expected {contents}",
                i + 1,
                r.len()
            ));
        }
        Ok(Self {
            nodes,
            contents,
            data: rows.concat(),
        })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn contents(&self) -> usize {
        self.contents
    }

    pub fn index(&self, node: usize, content: usize) -> usize {
        node * self.contents + content
    }

    pub fn get(&self, node: usize, content: usize) -> f64 {
        self.data[self.index(node, content)]
    }

    pub fn set(&mut self, node: usize, content: usize, value: f64) {
        let j = self.index(node, content);
        self.data[j] = value;
    }

    /// The flattened node-major vector.
    pub fn as_vector(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vector(self) -> Vec<f64> {
        self.data
    }

    pub fn to_matrix(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.contents)
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn row(&self, node: usize) -> &[f64] {
        &self.data[node * self.contents..(node + 1) * self.contents]
    }

    /// `Σ_i P(i, f)` for every content.
    pub fn content_totals(&self) -> Vec<f64> {
        let mut totals = vec![0.0; self.contents];
        for row in self.data.chunks(self.contents) {
            for (t, v) in totals.iter_mut().zip(row) {
                *t += v;
            }
        }
        totals
    }

    /// `Σ_f P(i, f) S_f` for every node.
    pub fn node_usage(&self, sizes: &[f64]) -> Vec<f64> {
        self.data
            .chunks(self.contents)
            .map(|row| row.iter().zip(sizes).map(|(p, s)| p * s).sum())
            .collect()
    }

    /// Checks shape, box bounds, the per-content total and the per-node
    /// capacity constraints, each within `tol`.
    pub fn check_feasible(
        &self,
        library: &ContentLibrary,
        cluster: &FogCluster,
        tol: f64,
    ) -> Result<()> {
        if self.contents != library.len() || self.nodes != cluster.len() {
            return invalid(format!(
                "placement is {}×{}, scenario needs {}×{}",
                self.nodes,
                self.contents,
                cluster.len(),
                library.len()
            ));
        }
        for (j, &v) in self.data.iter().enumerate() {
            if !(v >= -tol && v <= 1.0 + tol) {
                return invalid(format!(
                    "P({}, {}) = {v} outside [0, 1]",
                    j / self.contents + 1,
                    j % self.contents + 1
                ));
            }
        }
        for (f, t) in self.content_totals().into_iter().enumerate() {
            if t > 1.0 + tol {
                return invalid(format!("content {}: cached portions sum to {t} > 1", f + 1));
            }
        }
        let usage = self.node_usage(library.sizes());
        for (i, (u, m)) in usage.into_iter().zip(cluster.capacities()).enumerate() {
            if u > m + tol {
                return invalid(format!("node {}: storage {u} exceeds capacity {m}", i + 1));
            }
        }
        Ok(())
    }
}
