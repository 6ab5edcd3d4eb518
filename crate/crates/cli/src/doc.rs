//! The JSON result document shared by all subcommands.

use std::collections::BTreeMap;

use balanced_core::embedding::{DistortionReport, HyperplaneReport, LipschitzReport, SeparationReport};
use balanced_core::exact::format_rational;
use balanced_core::graph::IsoperimetricReport;
use balanced_core::greedy::ConvergenceReport;
use balanced_core::measure::{BalanceReport, RefineFailure};
use balanced_core::pipeline::MeasureSource;
use balanced_core::VertexMeasure;
use serde::{Deserialize, Serialize};

/// Every section is optional; each subcommand fills the ones it computes.
/// Wall-clock timings live in `timing` and are the only nondeterministic
/// fields.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated: Option<GeneratedInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_estimate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement: Option<RefinementInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub balance: Option<BalanceReport>,
    /// Balance verdict of the uniform measure, for comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform_balance: Option<BalanceReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<EmbeddingDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Vec<OracleEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BoundaryDoc>,
    #[serde(default)]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub timing: BTreeMap<String, f64>,
}

impl ResultDocument {
    pub fn new(command: &str) -> Self {
        ResultDocument {
            command: command.to_string(),
            ..Default::default()
        }
    }

    /// Pretty JSON with object keys in sorted order.
    pub fn render(&self) -> String {
        let value = serde_json::to_value(self).expect("document serializes");
        let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
        text.push('\n');
        text
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphInfo {
    pub source: String,
    pub n: usize,
    pub edges: usize,
    pub diam: u32,
    pub max_degree: usize,
    pub boundary_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedInfo {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub metadata_columns: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hubs: Option<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub midpoints: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub centers: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementInfo {
    pub support_eps: f64,
    pub candidate_support: Vec<usize>,
    pub source: MeasureSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<RefineFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightEntry {
    pub vertex: usize,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureDoc {
    pub support: Vec<WeightEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_exact: Option<String>,
}

impl MeasureDoc {
    pub fn from_measure(mu: &VertexMeasure) -> Self {
        MeasureDoc {
            support: weight_entries(mu),
            energy: None,
            energy_exact: None,
        }
    }
}

pub fn weight_entries(mu: &VertexMeasure) -> Vec<WeightEntry> {
    mu.support()
        .into_iter()
        .map(|v| WeightEntry {
            vertex: v,
            weight: mu.weight(v),
            exact: mu.exact_weights().map(|e| format_rational(&e[v])),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingDoc {
    pub dim: usize,
    pub support: Vec<usize>,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_exact: Option<String>,
    pub lipschitz: LipschitzReport,
    pub hyperplane: HyperplaneReport,
    pub separation: SeparationReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced: Option<ReducedDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distortion: Option<DistortionReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pca_explained_variance: Option<Vec<f64>>,
    /// Columns of the exported coordinates.
    pub output_columns: Vec<String>,
    pub centered: bool,
    /// Spearman correlation of the first exported column with each
    /// point-cloud metadata column.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata_rank_correlation: BTreeMap<String, f64>,
}

/// The embedding after coordinates were dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedDoc {
    pub support: Vec<usize>,
    pub retained_mass: f64,
    pub alpha: f64,
    pub lipschitz: LipschitzReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleEntry {
    pub support: Vec<WeightEntry>,
    pub energy: f64,
    pub energy_exact: String,
    pub argmax_set: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDoc {
    pub members: Vec<usize>,
    pub witnesses: Vec<usize>,
    pub isoperimetric: IsoperimetricReport,
}
