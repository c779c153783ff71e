use std::collections::HashMap;

use serde::Serialize;

use super::record::{field_index, CkRecord, Wave, COVARIATES};
use crate::estimators::{Group, PanelDataset, Period, Unit};
use crate::{Error, Result};

/// Unit keys: the sheet number, suffixed on repeats so keys stay unique.
fn unit_keys(records: &[&CkRecord]) -> Vec<String> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    records
        .iter()
        .map(|r| {
            let k = seen.entry(r.sheet_id.as_str()).or_insert(0);
            *k += 1;
            if *k == 1 {
                r.sheet_id.clone()
            } else {
                format!("{}#{}", r.sheet_id, k)
            }
        })
        .collect()
}

fn build_panel(
    records: &[&CkRecord],
    fields: &[usize],
    transform: Option<&Standardization>,
) -> Result<PanelDataset> {
    let keys = unit_keys(records);
    let mut units = Vec::with_capacity(2 * records.len());
    for (r, key) in records.iter().zip(keys) {
        let group = if r.state.is_treated() {
            Group::Treated
        } else {
            Group::Control
        };
        for (period, wave) in [(Period::Pre, Wave::First), (Period::Post, Wave::Second)] {
            let mut y = r.vector(fields, wave).expect("filtered for completeness");
            if let Some(t) = transform {
                y = t.standardize(&y);
            }
            units.push(Unit::new(key.clone(), group, period, y).with_pair(key.clone()));
        }
    }
    PanelDataset::new(units)
}

/// Units with both employment outcomes present in both waves, in ℝ².
pub fn bivariate_panel(records: &[CkRecord]) -> Result<PanelDataset> {
    let kept: Vec<&CkRecord> = records.iter().filter(|r| r.complete_on(&[0, 1])).collect();
    build_panel(&kept, &[0, 1], None)
}

/// Per-coordinate affine map to zero mean and unit population sd.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Standardization {
    pub fields: Vec<String>,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl Standardization {
    fn fit(rows: &[Vec<f64>], fields: Vec<String>) -> Result<Self> {
        let d = fields.len();
        let n = rows.len() as f64;
        let mut means = vec![0.0; d];
        for r in rows {
            for k in 0..d {
                means[k] += r[k];
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut sds = vec![0.0; d];
        for r in rows {
            for k in 0..d {
                sds[k] += (r[k] - means[k]).powi(2);
            }
        }
        for (k, s) in sds.iter_mut().enumerate() {
            *s = (*s / n).sqrt();
            if s.is_nan() || *s <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "{} is constant on the retained units",
                    fields[k]
                )));
            }
        }
        Ok(Self { fields, means, sds })
    }

    pub fn standardize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.means.iter().zip(&self.sds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn destandardize(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.means.iter().zip(&self.sds))
            .map(|(v, (m, s))| v * s + m)
            .collect()
    }

    /// Rescales a difference of standardized vectors to raw units.
    pub fn effect_to_raw(&self, effect: &[f64]) -> Vec<f64> {
        effect.iter().zip(&self.sds).map(|(e, s)| e * s).collect()
    }
}

/// Standardized panel of outcomes plus chosen covariates.
#[derive(Debug, Clone)]
pub struct CovariatePanel {
    pub data: PanelDataset,
    pub transform: Standardization,
    pub covariates: Vec<String>,
    pub n_control: usize,
    pub n_treated: usize,
}

impl CovariatePanel {
    /// Outcome coordinates (full-time, part-time) of a standardized effect,
    /// in employees.
    pub fn raw_outcome_effect(&self, effect: &[f64]) -> [f64; 2] {
        let raw = self.transform.effect_to_raw(&effect[..2]);
        [raw[0], raw[1]]
    }
}

fn resolve(covariates: &[&str]) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(covariates.len());
    for name in covariates {
        match field_index(name) {
            Some(i) if i >= 2 => {
                if out.contains(&i) {
                    return Err(Error::InvalidArgument(format!(
                        "covariate `{name}` listed twice"
                    )));
                }
                out.push(i)
            }
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown covariate `{name}`; expected one of {}",
                    COVARIATES.join(", ")
                )))
            }
        }
    }
    Ok(out)
}

/// Outcomes plus `covariates`, restricted to units complete on those
/// columns, standardized over retained units pooled across groups and waves.
pub fn covariate_panel(records: &[CkRecord], covariates: &[&str]) -> Result<CovariatePanel> {
    covariate_panel_filtered(records, covariates, covariates)
}

/// As [`covariate_panel`], but units must also be complete on
/// `filter_covariates` (used to hold the sample fixed across subsets).
pub fn covariate_panel_filtered(
    records: &[CkRecord],
    covariates: &[&str],
    filter_covariates: &[&str],
) -> Result<CovariatePanel> {
    let cov = resolve(covariates)?;
    let mut fields = vec![0, 1];
    fields.extend(&cov);
    let mut filter = fields.clone();
    filter.extend(resolve(filter_covariates)?);

    let kept: Vec<&CkRecord> = records.iter().filter(|r| r.complete_on(&filter)).collect();
    if kept.is_empty() {
        return Err(Error::EmptyCell("no complete units".into()));
    }
    let rows: Vec<Vec<f64>> = kept
        .iter()
        .flat_map(|r| {
            [Wave::First, Wave::Second]
                .into_iter()
                .map(|w| r.vector(&fields, w).expect("complete"))
        })
        .collect();
    let names = fields
        .iter()
        .map(|&f| super::record::FIELDS[f].to_string())
        .collect();
    let transform = Standardization::fit(&rows, names)?;
    let data = build_panel(&kept, &fields, Some(&transform))?;
    let n_treated = kept.iter().filter(|r| r.state.is_treated()).count();
    Ok(CovariatePanel {
        data,
        transform,
        covariates: covariates.iter().map(|s| s.to_ascii_uppercase()).collect(),
        n_control: kept.len() - n_treated,
        n_treated,
    })
}

/// Raw (unstandardized) outcome panel over units complete on all fields.
pub fn covariate_complete_bivariate(records: &[CkRecord]) -> Result<PanelDataset> {
    let all: Vec<usize> = (0..super::record::FIELDS.len()).collect();
    let kept: Vec<&CkRecord> = records.iter().filter(|r| r.complete_on(&all)).collect();
    build_panel(&kept, &[0, 1], None)
}
