//! Difference-in-differences, coordinatewise changes-in-changes, and the
//! transport-based multivariate changes-in-changes estimator.

mod panel;
pub mod quantile;
mod report;

use std::collections::HashMap;

use rayon::prelude::*;

pub use panel::{Group, PanelDataset, Period, Unit};
pub use quantile::{conditional_quantiles, default_quantile_grid, qte, qte_curves, Ecdf, QteCurve};
pub use report::{
    CounterfactualResult, Diagnostics, EffectReport, Estimator, UnitCounterfactual, UnitEffect,
};

use crate::ot::{self, squared_distance, RoundingMode, TransportMap};
use crate::{Error, PointCloud, Result};

const ALL_CELLS: [(Group, Period); 4] = [
    (Group::Control, Period::Pre),
    (Group::Control, Period::Post),
    (Group::Treated, Period::Pre),
    (Group::Treated, Period::Post),
];

fn diagnostics(data: &PanelDataset) -> Diagnostics {
    Diagnostics {
        dim: data.dim(),
        n_control_pre: data.cell_size(Group::Control, Period::Pre),
        n_control_post: data.cell_size(Group::Control, Period::Post),
        n_treated_pre: data.cell_size(Group::Treated, Period::Pre),
        n_treated_post: data.cell_size(Group::Treated, Period::Post),
        plan_cost: None,
        rounding: None,
    }
}

fn mean_of(units: &[&Unit], dim: usize) -> Vec<f64> {
    let mut m = vec![0.0; dim];
    for u in units {
        for (acc, x) in m.iter_mut().zip(&u.outcome) {
            *acc += x;
        }
    }
    let n = units.len() as f64;
    m.iter_mut().for_each(|x| *x /= n);
    m
}

/// Classical difference-in-differences on each coordinate.
pub fn did_estimate(data: &PanelDataset) -> Result<EffectReport> {
    data.require_cells(&ALL_CELLS)?;
    let d = data.dim();
    let m = |g, p| mean_of(&data.cell(g, p), d);
    let (cpre, cpost) = (
        m(Group::Control, Period::Pre),
        m(Group::Control, Period::Post),
    );
    let (tpre, tpost) = (
        m(Group::Treated, Period::Pre),
        m(Group::Treated, Period::Post),
    );
    let ate = (0..d)
        .map(|k| (tpost[k] - tpre[k]) - (cpost[k] - cpre[k]))
        .collect();
    Ok(EffectReport {
        estimator: Estimator::Did,
        ate,
        qte: None,
        unit_effects: None,
        diagnostics: diagnostics(data),
    })
}

/// Unit effects when every treated record is paired across periods.
fn paired_effects(data: &PanelDataset, per_unit: &[UnitCounterfactual]) -> Option<Vec<UnitEffect>> {
    let pre = data.cell(Group::Treated, Period::Pre);
    let post = data.cell(Group::Treated, Period::Post);
    if pre.len() != post.len() {
        return None;
    }
    let post_by_pair: HashMap<&str, &Unit> = post
        .iter()
        .filter_map(|u| u.pair_id.as_deref().map(|p| (p, *u)))
        .collect();
    if post_by_pair.len() != post.len() {
        return None;
    }
    pre.iter()
        .zip(per_unit)
        .map(|(u, cf)| {
            let observed = post_by_pair.get(u.pair_id.as_deref()?)?;
            let effect = observed
                .outcome
                .iter()
                .zip(&cf.counterfactual)
                .map(|(y, c)| y - c)
                .collect();
            Some(UnitEffect {
                unit_id: u.id.clone(),
                effect,
            })
        })
        .collect()
}

fn summarise(
    data: &PanelDataset,
    estimator: Estimator,
    per_unit: &[UnitCounterfactual],
    grid: &[f64],
    diagnostics: Diagnostics,
) -> Result<(PointCloud, EffectReport)> {
    let d = data.dim();
    let cf = PointCloud::uniform_flat(
        d,
        per_unit
            .iter()
            .flat_map(|u| u.counterfactual.iter().copied())
            .collect(),
    )?;
    let treated_post = data.cloud(Group::Treated, Period::Post)?;
    let ate = treated_post
        .mean()
        .iter()
        .zip(cf.mean())
        .map(|(a, b)| a - b)
        .collect();
    let report = EffectReport {
        estimator,
        ate,
        qte: Some(qte_curves(&treated_post, &cf, grid)?),
        unit_effects: paired_effects(data, per_unit),
        diagnostics,
    };
    Ok((cf, report))
}

/// Coordinatewise changes-in-changes with the default quantile grid.
pub fn cic_estimate(data: &PanelDataset) -> Result<(CounterfactualResult, EffectReport)> {
    cic_estimate_with_grid(data, &default_quantile_grid())
}

/// Each treated-pre outcome `y` gets `F̂₁⁻¹(F̂₀(y))` per coordinate, where
/// `F̂₀`, `F̂₁` are the control pre/post empirical CDFs.
pub fn cic_estimate_with_grid(
    data: &PanelDataset,
    grid: &[f64],
) -> Result<(CounterfactualResult, EffectReport)> {
    data.require_cells(&ALL_CELLS)?;
    let d = data.dim();
    let pre = data.cloud(Group::Control, Period::Pre)?;
    let post = data.cloud(Group::Control, Period::Post)?;
    let f0: Vec<Ecdf> = (0..d)
        .map(|k| Ecdf::from_cloud(&pre, k))
        .collect::<Result<_>>()?;
    let f1: Vec<Ecdf> = (0..d)
        .map(|k| Ecdf::from_cloud(&post, k))
        .collect::<Result<_>>()?;

    let per_unit: Vec<UnitCounterfactual> = data
        .cell(Group::Treated, Period::Pre)
        .into_iter()
        .map(|u| UnitCounterfactual {
            unit_id: u.id.clone(),
            pre_outcome: u.outcome.clone(),
            matched_control: None,
            counterfactual: (0..d)
                .map(|k| f1[k].quantile(f0[k].cdf(u.outcome[k])))
                .collect(),
        })
        .collect();

    let (counterfactuals, report) =
        summarise(data, Estimator::Cic, &per_unit, grid, diagnostics(data))?;
    Ok((
        CounterfactualResult {
            counterfactuals,
            per_unit,
            drift_map: None,
            coupling_map: None,
        },
        report,
    ))
}

/// Index of the nearest point of `cloud` to `x`; ties go to the lowest index.
pub fn nearest_neighbor(cloud: &PointCloud, x: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, p) in cloud.points().enumerate() {
        let d = squared_distance(x, p);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}

/// Multivariate changes-in-changes via optimal transport with the default
/// quantile grid.
pub fn ot_cic_estimate(
    data: &PanelDataset,
    rounding: RoundingMode,
) -> Result<(CounterfactualResult, EffectReport)> {
    ot_cic_estimate_with_grid(data, rounding, &default_quantile_grid())
}

/// The drift is estimated by the optimal plan from control-pre to
/// control-post outcomes, rounded to a map. Each treated-pre unit is matched
/// to its Euclidean nearest control-pre unit and pushed along that map.
pub fn ot_cic_estimate_with_grid(
    data: &PanelDataset,
    rounding: RoundingMode,
    grid: &[f64],
) -> Result<(CounterfactualResult, EffectReport)> {
    data.require_cells(&ALL_CELLS)?;
    let pre = data.cloud(Group::Control, Period::Pre)?;
    let post = data.cloud(Group::Control, Period::Post)?;
    let plan = ot::solve_ot(&pre, &post)?;
    let drift = ot::round_to_map(&plan, rounding)?;

    let treated_pre = data.cell(Group::Treated, Period::Pre);
    let per_unit: Vec<UnitCounterfactual> = treated_pre
        .par_iter()
        .map(|u| {
            let j = nearest_neighbor(&pre, &u.outcome);
            UnitCounterfactual {
                unit_id: u.id.clone(),
                pre_outcome: u.outcome.clone(),
                matched_control: Some(j),
                counterfactual: drift.image(j).to_vec(),
            }
        })
        .collect();

    let mut diag = diagnostics(data);
    diag.plan_cost = Some(plan.cost());
    diag.rounding = Some(rounding);
    let (counterfactuals, report) = summarise(data, Estimator::OtCic, &per_unit, grid, diag)?;
    Ok((
        CounterfactualResult {
            counterfactuals,
            per_unit,
            drift_map: Some(drift),
            coupling_map: None,
        },
        report,
    ))
}

/// Optimal map from treated-post outcomes onto the counterfactual cloud.
///
/// Only meaningful when the treated production function is itself
/// co-monotone with the pre-period one; callers opt in explicitly.
pub fn couple_counterfactuals(
    treated_post: &PointCloud,
    counterfactuals: &PointCloud,
) -> Result<TransportMap> {
    if treated_post.dim() != counterfactuals.dim() {
        return Err(Error::DimensionMismatch {
            expected: treated_post.dim(),
            found: counterfactuals.dim(),
        });
    }
    ot::round_to_map(
        &ot::solve_ot(treated_post, counterfactuals)?,
        RoundingMode::Mode,
    )
}

/// `Y⋆ − T̂(Y⋆)` for each treated-post point of a coupling map.
pub fn coupled_effects(map: &TransportMap) -> Vec<Vec<f64>> {
    (0..map.len())
        .map(|i| {
            map.source()
                .point(i)
                .iter()
                .zip(map.image(i))
                .map(|(y, t)| y - t)
                .collect()
        })
        .collect()
}
