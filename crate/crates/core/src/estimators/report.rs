use serde::{Deserialize, Serialize};

use super::quantile::QteCurve;
use crate::ot::{RoundingMode, TransportMap};
use crate::PointCloud;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Did,
    Cic,
    OtCic,
}

impl std::fmt::Display for Estimator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Estimator::Did => "did",
            Estimator::Cic => "cic",
            Estimator::OtCic => "ot_cic",
        })
    }
}

impl std::str::FromStr for Estimator {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "did" => Ok(Estimator::Did),
            "cic" => Ok(Estimator::Cic),
            "ot" | "ot_cic" | "ot-cic" => Ok(Estimator::OtCic),
            other => Err(crate::Error::InvalidArgument(format!(
                "unknown estimator `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub dim: usize,
    pub n_control_pre: usize,
    pub n_control_post: usize,
    pub n_treated_pre: usize,
    pub n_treated_post: usize,
    /// Cost of the control pre → post transport plan.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan_cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounding: Option<RoundingMode>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitEffect {
    pub unit_id: String,
    pub effect: Vec<f64>,
}

/// Effect estimates from one estimator run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectReport {
    pub estimator: Estimator,
    /// Per-coordinate average effect on the treated.
    pub ate: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qte: Option<Vec<QteCurve>>,
    /// Observed treated-post outcome minus counterfactual, per paired unit.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit_effects: Option<Vec<UnitEffect>>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitCounterfactual {
    pub unit_id: String,
    pub pre_outcome: Vec<f64>,
    /// Index of the nearest control-pre unit (within that cell).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matched_control: Option<usize>,
    pub counterfactual: Vec<f64>,
}

/// Estimated post-period outcomes of the treated absent treatment.
#[derive(Debug, Clone, Serialize)]
pub struct CounterfactualResult {
    #[serde(skip)]
    pub counterfactuals: PointCloud,
    pub per_unit: Vec<UnitCounterfactual>,
    /// Estimated drift map on the control-pre support.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drift_map: Option<TransportMap>,
    /// Optional coupling of treated-post outcomes to counterfactuals.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling_map: Option<TransportMap>,
}
