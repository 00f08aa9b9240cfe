//! Feasible set of placement vectors and the Euclidean projection onto it.

use crate::error::{invalid, Error, Result};
use crate::model::Scenario;

/// Linear constraints on a node-major placement vector `p`:
/// `0 <= p <= 1`, `A p <= 1` (per-content totals) and `B p <= M`
/// (per-node storage).
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    nodes: usize,
    contents: usize,
    sizes: Vec<f64>,
    capacities: Vec<f64>,
    sizes_sq_norm: f64,
}

impl ConstraintSystem {
    pub fn new(sizes: Vec<f64>, capacities: Vec<f64>) -> Result<Self> {
        if sizes.is_empty() || capacities.is_empty() {
            return invalid("constraint system needs at least one content and one node");
        }
        let sizes_sq_norm = sizes.iter().map(|s| s * s).sum();
        Ok(Self {
            nodes: capacities.len(),
            contents: sizes.len(),
            sizes,
            capacities,
            sizes_sq_norm,
        })
    }

    pub fn from_scenario(scenario: &Scenario) -> Self {
        Self::new(
            scenario.library().sizes().to_vec(),
            scenario.cluster().capacities().to_vec(),
        )
        .expect("scenario parts are non-empty")
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn contents(&self) -> usize {
        self.contents
    }

    pub fn dim(&self) -> usize {
        self.nodes * self.contents
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    /// Upper bounds of the per-content rows, all ones.
    pub fn a_upper(&self) -> Vec<f64> {
        vec![1.0; self.contents]
    }

    /// Upper bounds of the per-node rows, the capacities.
    pub fn b_upper(&self) -> &[f64] {
        &self.capacities
    }

    /// `A p`: total cached portion of every content.
    pub fn content_sums(&self, p: &[f64]) -> Vec<f64> {
        let mut sums = vec![0.0; self.contents];
        for row in p.chunks(self.contents) {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }

    /// `B p`: storage used at every node.
    pub fn node_usage(&self, p: &[f64]) -> Vec<f64> {
        p.chunks(self.contents)
            .map(|row| row.iter().zip(&self.sizes).map(|(v, s)| v * s).sum())
            .collect()
    }

    /// Dense `A` (F rows of length N·F).
    pub fn a_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.contents)
            .map(|f| {
                let mut row = vec![0.0; self.dim()];
                for i in 0..self.nodes {
                    row[i * self.contents + f] = 1.0;
                }
                row
            })
            .collect()
    }

    /// Dense `B` (N rows of length N·F).
    pub fn b_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.nodes)
            .map(|i| {
                let mut row = vec![0.0; self.dim()];
                row[i * self.contents..(i + 1) * self.contents].copy_from_slice(&self.sizes);
                row
            })
            .collect()
    }

    /// Largest violation over all constraints, zero when `p` is feasible.
    pub fn max_violation(&self, p: &[f64]) -> f64 {
        let box_v = p.iter().map(|&v| (-v).max(v - 1.0)).fold(0.0, f64::max);
        let a_v = self
            .content_sums(p)
            .into_iter()
            .map(|s| s - 1.0)
            .fold(0.0, f64::max);
        let b_v = self
            .node_usage(p)
            .into_iter()
            .zip(&self.capacities)
            .map(|(u, m)| u - m)
            .fold(0.0, f64::max);
        box_v.max(a_v).max(b_v)
    }

    fn project_box(&self, x: &mut [f64]) {
        for v in x {
            *v = v.clamp(0.0, 1.0);
        }
    }

    // The per-content halfspaces touch disjoint coordinates, so projecting
    // onto their intersection is one halfspace projection per content.
    fn project_content_rows(&self, x: &mut [f64]) {
        let n = self.nodes as f64;
        for (f, s) in self.content_sums(x).into_iter().enumerate() {
            if s > 1.0 {
                let shift = (s - 1.0) / n;
                for i in 0..self.nodes {
                    x[i * self.contents + f] -= shift;
                }
            }
        }
    }

    fn project_node_rows(&self, x: &mut [f64]) {
        for (row, m) in x.chunks_mut(self.contents).zip(&self.capacities) {
            let used: f64 = row.iter().zip(&self.sizes).map(|(v, s)| v * s).sum();
            if used > *m {
                let scale = (used - m) / self.sizes_sq_norm;
                for (v, s) in row.iter_mut().zip(&self.sizes) {
                    *v -= scale * s;
                }
            }
        }
    }
}

/// Euclidean projection of `x` onto the feasible set by Dykstra's
/// alternating projections over the box, the per-content halfspaces and
/// the per-node halfspaces.
///
/// Stops once a full cycle changes the iterate and the correction
/// increments by less than `tol` in combined Euclidean norm. The iterate
/// alone can stall for a cycle while the increments are still moving.
pub fn project_feasible(
    x: &[f64],
    constraints: &ConstraintSystem,
    tol: f64,
    max_cycles: usize,
) -> Result<Vec<f64>> {
    let n = constraints.dim();
    if x.len() != n {
        return invalid(format!(
            "vector has length {}, constraint system expects {n}",
            x.len()
        ));
    }
    let mut z = x.to_vec();
    // One correction increment per set.
    let mut incr = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut y = vec![0.0; n];
    let mut prev = vec![0.0; n];
    let mut moved = f64::INFINITY;
    for _ in 0..max_cycles {
        prev.copy_from_slice(&z);
        let mut incr_change = 0.0;
        for (set, q) in incr.iter_mut().enumerate() {
            for ((yj, zj), qj) in y.iter_mut().zip(&z).zip(q.iter()) {
                *yj = zj + qj;
            }
            z.copy_from_slice(&y);
            match set {
                0 => constraints.project_box(&mut z),
                1 => constraints.project_content_rows(&mut z),
                _ => constraints.project_node_rows(&mut z),
            }
            for ((qj, yj), zj) in q.iter_mut().zip(&y).zip(&z) {
                let next = yj - zj;
                incr_change += (next - *qj) * (next - *qj);
                *qj = next;
            }
        }
        let z_change: f64 = z.iter().zip(&prev).map(|(a, b)| (a - b) * (a - b)).sum();
        moved = (z_change + incr_change).sqrt();
        if moved < tol {
            return Ok(z);
        }
    }
    Err(Error::ProjectionNotConverged {
        cycles: max_cycles,
        residual: moved,
        last: z,
    })
}
