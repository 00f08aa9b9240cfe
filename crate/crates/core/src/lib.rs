//! Cache content placement for a cooperative fog cluster.
//!
//! Each base station serves requests through two M/M/1 queues: a fog queue
//! for the portion of a content cached in the cluster and a cloud queue for
//! the remainder. The average download time then depends on the placement
//! only through the edge-cache-hit ratio (ECHR), and minimizing it over the
//! feasible placements is a convex problem.
//!
//! - [`model`]: scenario types, Zipf popularity, placements.
//! - [`objective`]: ECHR, per-station and overall download time, derivatives.
//! - [`admm`]: the ADMM placement solver and the Dykstra projection it uses.
//! - [`baselines`]: projected gradient, grid scan and QP projection oracles.
//! - [`heuristic`]: the storage-limited / provision-limited switching rule.
//! - [`queuesim`]: a seeded M/M/1 simulator validating the queueing formulas.
//! - [`io`]: JSON scenario and placement files.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admm;
pub mod baselines;
mod error;
pub mod heuristic;
pub mod io;
pub mod model;
pub mod objective;
pub mod queuesim;

pub use error::{Error, Result};
pub use model::{ContentLibrary, FogCluster, Placement, Scenario, StationRates, TrafficProfile};
