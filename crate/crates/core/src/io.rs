//! JSON scenario and placement files.
//!
//! Scenario file:
//!
//! ```json
//! {
//!   "library": { "F": 20, "alpha": 0.6, "sizes": [1.0, ...] },
//!   "cluster": { "capacities": [2.0, 3.0, 5.0] },
//!   "traffic": { "lambda": [4, 4, 4], "mu_e": [8, 8, 8], "mu_b": [6, 6, 6] }
//! }
//! ```
//!
//! The library gives either `alpha` (Zipf popularity is generated) or an
//! explicit `popularity` list, never both. Placement files hold the N×F
//! matrix as `{ "matrix": [[...], ...] }`, one row per fog node.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{
    zipf_popularity, ContentLibrary, FogCluster, Placement, Scenario, TrafficProfile,
    FEASIBILITY_TOL,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LibrarySection {
    #[serde(rename = "F")]
    pub contents: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub popularity: Option<Vec<f64>>,
    pub sizes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSection {
    pub capacities: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficSection {
    pub lambda: Vec<f64>,
    pub mu_e: Vec<f64>,
    pub mu_b: Vec<f64>,
}

/// Unvalidated contents of a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub library: LibrarySection,
    pub cluster: ClusterSection,
    pub traffic: TrafficSection,
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(format!("scenario file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario file serializes")
    }

    /// Validates the file and builds the scenario.
    pub fn build(&self) -> Result<Scenario> {
        let lib = &self.library;
        if lib.sizes.len() != lib.contents {
            return invalid(format!(
                "library declares F={} but lists {} sizes",
                lib.contents,
                lib.sizes.len()
            ));
        }
        let popularity = match (&lib.alpha, &lib.popularity) {
            (Some(alpha), None) => zipf_popularity(lib.contents, *alpha)?,
            (None, Some(p)) => {
                if p.len() != lib.contents {
                    return invalid(format!(
                        "library declares F={} but lists {} popularity values",
                        lib.contents,
                        p.len()
                    ));
                }
                p.clone()
            }
            (Some(_), Some(_)) => {
                return invalid("library must give either alpha or popularity, not both")
            }
            (None, None) => return invalid("library must give alpha or popularity"),
        };
        let library = ContentLibrary::new(lib.sizes.clone(), popularity)?;
        let cluster = FogCluster::new(self.cluster.capacities.clone())?;
        let traffic = TrafficProfile::new(
            self.traffic.lambda.clone(),
            self.traffic.mu_e.clone(),
            self.traffic.mu_b.clone(),
        )?;
        Scenario::new(library, cluster, traffic)
    }
}

/// Parses and validates a scenario document.
pub fn scenario_from_json(text: &str) -> Result<Scenario> {
    ScenarioFile::from_json(text)?.build()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementFile {
    pub matrix: Vec<Vec<f64>>,
}

pub fn placement_to_json(placement: &Placement) -> String {
    let file = PlacementFile {
        matrix: placement.to_matrix(),
    };
    serde_json::to_string_pretty(&file).expect("placement serializes")
}

/// Parses a placement and checks it is feasible for `scenario`.
pub fn placement_from_json(text: &str, scenario: &Scenario) -> Result<Placement> {
    let file: PlacementFile =
        serde_json::from_str(text).map_err(|e| Error::Format(format!("placement file: {e}")))?;
    let placement = Placement::from_matrix(&file.matrix)?;
    placement.check_feasible(scenario.library(), scenario.cluster(), FEASIBILITY_TOL)?;
    Ok(placement)
}
