use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::panel::{
    bivariate_panel, covariate_complete_bivariate, covariate_panel, covariate_panel_filtered,
};
use super::record::{fte, CkRecord, COVARIATES, FIELDS};
use crate::estimators::{
    cic_estimate, conditional_quantiles, default_quantile_grid, did_estimate, ot_cic_estimate,
    EffectReport, Group, PanelDataset, Period, QteCurve,
};
use crate::ot::RoundingMode;
use crate::{Error, Result};

/// Half-width, in employees, of the band used for conditional curves.
pub const CONDITIONAL_BAND: f64 = 2.0;
/// Quantile levels of the fixed coordinate at which conditional curves are drawn.
pub const CONDITIONAL_LEVELS: [f64; 3] = [0.25, 0.5, 0.75];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectRow {
    pub estimator: String,
    pub ate_ft: f64,
    pub ate_pt: f64,
    pub ate_fte: f64,
}

impl EffectRow {
    fn new(estimator: impl Into<String>, ate: &[f64]) -> Self {
        Self {
            estimator: estimator.into(),
            ate_ft: ate[0],
            ate_pt: ate[1],
            ate_fte: fte(ate[0], ate[1]),
        }
    }
}

/// Quantiles of one outcome among units whose other outcome lies near `value`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalCurve {
    pub fixed: String,
    pub value: f64,
    pub target: String,
    pub levels: Vec<f64>,
    pub treated: Option<Vec<f64>>,
    pub counterfactual: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitEffectPoint {
    pub unit_id: String,
    pub ft: f64,
    pub pt: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table2Report {
    pub n_control: usize,
    pub n_treated: usize,
    /// DiD, CiC, OT (mode rounding) and OT with barycentric rounding.
    pub rows: Vec<EffectRow>,
    pub quantile_curves: Vec<QteCurve>,
    pub conditional_curves: Vec<ConditionalCurve>,
    pub unit_effects: Vec<UnitEffectPoint>,
    #[serde(skip)]
    pub reports: Vec<EffectReport>,
}

impl Table2Report {
    pub fn row(&self, estimator: &str) -> Option<&EffectRow> {
        self.rows.iter().find(|r| r.estimator == estimator)
    }
}

fn conditional_curves(
    data: &PanelDataset,
    counterfactuals: &crate::PointCloud,
) -> Result<Vec<ConditionalCurve>> {
    let treated = data.cloud(Group::Treated, Period::Post)?;
    let grid = default_quantile_grid();
    let mut out = Vec::new();
    for (fixed, target) in [(0usize, 1usize), (1, 0)] {
        let anchor = crate::estimators::Ecdf::from_cloud(&treated, fixed)?;
        for &q in &CONDITIONAL_LEVELS {
            let value = anchor.quantile(q);
            out.push(ConditionalCurve {
                fixed: FIELDS[fixed].into(),
                value,
                target: FIELDS[target].into(),
                levels: grid.clone(),
                treated: conditional_quantiles(
                    &treated,
                    fixed,
                    value,
                    CONDITIONAL_BAND,
                    target,
                    &grid,
                )?,
                counterfactual: conditional_quantiles(
                    counterfactuals,
                    fixed,
                    value,
                    CONDITIONAL_BAND,
                    target,
                    &grid,
                )?,
            });
        }
    }
    Ok(out)
}

/// The three estimators on the full-time/part-time panel, with plot data
/// from the optimal-transport run.
pub fn run_table2(records: &[CkRecord]) -> Result<Table2Report> {
    let data = bivariate_panel(records)?;
    data.require_cells(&[
        (Group::Control, Period::Pre),
        (Group::Control, Period::Post),
        (Group::Treated, Period::Pre),
        (Group::Treated, Period::Post),
    ])?;
    let did = did_estimate(&data)?;
    let (_, cic) = cic_estimate(&data)?;
    let (ot_cf, ot) = ot_cic_estimate(&data, RoundingMode::Mode)?;
    let (_, bary) = ot_cic_estimate(&data, RoundingMode::Barycentric)?;

    let rows = vec![
        EffectRow::new("did", &did.ate),
        EffectRow::new("cic", &cic.ate),
        EffectRow::new("ot", &ot.ate),
        EffectRow::new("ot_barycentric", &bary.ate),
    ];
    let unit_effects = ot
        .unit_effects
        .as_deref()
        .unwrap_or_default()
        .iter()
        .map(|e| UnitEffectPoint {
            unit_id: e.unit_id.clone(),
            ft: e.effect[0],
            pt: e.effect[1],
        })
        .collect();
    Ok(Table2Report {
        n_control: data.cell_size(Group::Control, Period::Pre),
        n_treated: data.cell_size(Group::Treated, Period::Pre),
        rows,
        quantile_curves: ot.qte.clone().unwrap_or_default(),
        conditional_curves: conditional_curves(&data, &ot_cf.counterfactuals)?,
        unit_effects,
        reports: vec![did, cic, ot, bary],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    /// Sample statistics; `sd` uses the `n − 1` divisor and is 0 for one value.
    pub fn of(v: &[f64]) -> Self {
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sd = if v.len() > 1 {
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            sd,
            min: v.iter().copied().fold(f64::INFINITY, f64::min),
            max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectSummary {
    pub ft: Summary,
    pub pt: Summary,
}

impl EffectSummary {
    fn of(effects: impl Iterator<Item = [f64; 2]>) -> Self {
        let (ft, pt): (Vec<f64>, Vec<f64>) = effects.map(|e| (e[0], e[1])).unzip();
        Self {
            ft: Summary::of(&ft),
            pt: Summary::of(&pt),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepSample {
    /// Each subset keeps every unit complete on its own columns.
    #[default]
    PerSubset,
    /// Every subset uses the units complete on all ten columns.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetResult {
    pub covariates: Vec<String>,
    pub removed: Vec<String>,
    pub dim: usize,
    pub n_control: usize,
    pub n_treated: usize,
    pub te_ft: f64,
    pub te_pt: f64,
}

/// Bivariate estimators and the covariate mean on the covariate-complete units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompleteSampleRow {
    pub n_control: usize,
    pub n_treated: usize,
    pub mean_ot_covariates: [f64; 2],
    pub ot: [f64; 2],
    pub cic: [f64; 2],
    pub did: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    /// Human-readable description of which subsets were run.
    pub enumeration: String,
    pub sample: SweepSample,
    pub subset_sizes: Vec<usize>,
    pub subsets: Vec<SubsetResult>,
    pub summary: EffectSummary,
    /// Whether every subset gave a positive full-time and negative part-time effect.
    pub signs_consistent: bool,
    pub complete_sample: CompleteSampleRow,
}

/// Covariate subsets holding at least `min_size` of the eight covariates,
/// largest first, then in bitmask order.
pub fn covariate_subsets(min_size: usize) -> Vec<Vec<&'static str>> {
    let k = COVARIATES.len();
    let mut masks: Vec<u32> = (0u32..1 << k)
        .filter(|m| m.count_ones() as usize >= min_size)
        .collect();
    masks.sort_by_key(|m| (std::cmp::Reverse(m.count_ones()), *m));
    masks
        .into_iter()
        .map(|m| {
            (0..k)
                .filter(|i| m >> i & 1 == 1)
                .map(|i| COVARIATES[i])
                .collect()
        })
        .collect()
}

fn two(v: &[f64]) -> [f64; 2] {
    [v[0], v[1]]
}

/// Optimal-transport effect in ℝ^(2+|covariates|), reported in employees.
fn covariate_effect(
    records: &[CkRecord],
    covariates: &[&str],
    sample: SweepSample,
    rounding: RoundingMode,
) -> Result<SubsetResult> {
    let panel = match sample {
        SweepSample::PerSubset => covariate_panel(records, covariates)?,
        SweepSample::Fixed => covariate_panel_filtered(records, covariates, &COVARIATES)?,
    };
    let (_, rep) = ot_cic_estimate(&panel.data, rounding)?;
    let [te_ft, te_pt] = panel.raw_outcome_effect(&rep.ate);
    Ok(SubsetResult {
        covariates: panel.covariates.clone(),
        removed: COVARIATES
            .iter()
            .filter(|c| !covariates.contains(c))
            .map(|c| c.to_string())
            .collect(),
        dim: panel.data.dim(),
        n_control: panel.n_control,
        n_treated: panel.n_treated,
        te_ft,
        te_pt,
    })
}

/// Optimal-transport effects for every subset of six, seven or eight
/// covariates (dimensions 8 to 10), always including both outcomes.
pub fn run_covariate_sweep(
    records: &[CkRecord],
    sample: SweepSample,
    rounding: RoundingMode,
) -> Result<SweepReport> {
    let subsets = covariate_subsets(6);
    let results: Vec<SubsetResult> = subsets
        .par_iter()
        .map(|s| covariate_effect(records, s, sample, rounding))
        .collect::<Result<_>>()?;
    let summary = EffectSummary::of(results.iter().map(|r| [r.te_ft, r.te_pt]));
    let signs_consistent = results.iter().all(|r| r.te_ft > 0.0 && r.te_pt < 0.0);

    let complete = covariate_complete_bivariate(records)?;
    let complete_sample = CompleteSampleRow {
        n_control: complete.cell_size(Group::Control, Period::Pre),
        n_treated: complete.cell_size(Group::Treated, Period::Pre),
        mean_ot_covariates: [summary.ft.mean, summary.pt.mean],
        ot: two(&ot_cic_estimate(&complete, rounding)?.1.ate),
        cic: two(&cic_estimate(&complete)?.1.ate),
        did: two(&did_estimate(&complete)?.ate),
    };
    Ok(SweepReport {
        enumeration: format!(
            "both outcomes plus every subset of 6, 7 or 8 of the {} covariates ({} subsets)",
            COVARIATES.len(),
            results.len()
        ),
        sample,
        subset_sizes: subsets.iter().map(|s| s.len()).collect(),
        subsets: results,
        summary,
        signs_consistent,
        complete_sample,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Percentile {
    pub level: f64,
    pub ft: f64,
    pub pt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitDropReport {
    pub drop_frac: f64,
    pub reps: usize,
    pub seed: u64,
    pub n_control: usize,
    pub n_treated: usize,
    pub kept_control: usize,
    pub kept_treated: usize,
    pub summary: EffectSummary,
    /// Share of repetitions with a negative full-time effect.
    pub ft_negative_share: f64,
    /// Share of repetitions with a positive part-time effect.
    pub pt_positive_share: f64,
    pub percentiles: Vec<Percentile>,
    pub draws: Vec<[f64; 2]>,
}

pub const DROP_PERCENTILES: [f64; 9] = [0.01, 0.04, 0.05, 0.25, 0.5, 0.75, 0.95, 0.96, 0.99];

/// Nearest-rank percentile of sorted values.
fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let k = ((q * n as f64).ceil() as usize).clamp(1, n);
    sorted[k - 1]
}

/// Reruns the ten-dimensional estimate with a random share of each group's
/// covariate-complete units removed. Repetition `r` draws from stream `r` of
/// `seed`, and each repetition restandardizes on its retained units.
pub fn run_unit_drop(
    records: &[CkRecord],
    drop_frac: f64,
    reps: usize,
    seed: u64,
    rounding: RoundingMode,
) -> Result<UnitDropReport> {
    if !(0.0..1.0).contains(&drop_frac) {
        return Err(Error::InvalidArgument(format!(
            "drop fraction must lie in [0, 1), got {drop_frac}"
        )));
    }
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be at least 1".into()));
    }
    let all: Vec<usize> = (0..FIELDS.len()).collect();
    let complete: Vec<&CkRecord> = records.iter().filter(|r| r.complete_on(&all)).collect();
    let (treated, control): (Vec<&CkRecord>, Vec<&CkRecord>) =
        complete.iter().partition(|r| r.state.is_treated());
    let keep = |n: usize| n - (drop_frac * n as f64).round() as usize;
    let (kc, kt) = (keep(control.len()), keep(treated.len()));
    if kc == 0 || kt == 0 {
        return Err(Error::EmptyCell(format!(
            "dropping {drop_frac} of {} control / {} treated units leaves an empty group",
            control.len(),
            treated.len()
        )));
    }

    let draws: Vec<[f64; 2]> = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<[f64; 2]> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(rep as u64);
            let mut subset: Vec<CkRecord> = Vec::with_capacity(kc + kt);
            for (group, k) in [(&control, kc), (&treated, kt)] {
                let mut idx = index::sample(&mut rng, group.len(), k).into_vec();
                idx.sort_unstable();
                subset.extend(idx.into_iter().map(|i| group[i].clone()));
            }
            let panel = covariate_panel(&subset, &COVARIATES)?;
            let (_, rep) = ot_cic_estimate(&panel.data, rounding)?;
            Ok(panel.raw_outcome_effect(&rep.ate))
        })
        .collect::<Result<_>>()?;

    let mut ft: Vec<f64> = draws.iter().map(|d| d[0]).collect();
    let mut pt: Vec<f64> = draws.iter().map(|d| d[1]).collect();
    ft.sort_by(f64::total_cmp);
    pt.sort_by(f64::total_cmp);
    let n = reps as f64;
    Ok(UnitDropReport {
        drop_frac,
        reps,
        seed,
        n_control: control.len(),
        n_treated: treated.len(),
        kept_control: kc,
        kept_treated: kt,
        summary: EffectSummary::of(draws.iter().copied()),
        ft_negative_share: ft.iter().filter(|&&x| x < 0.0).count() as f64 / n,
        pt_positive_share: pt.iter().filter(|&&x| x > 0.0).count() as f64 / n,
        percentiles: DROP_PERCENTILES
            .iter()
            .map(|&q| Percentile {
                level: q,
                ft: nearest_rank(&ft, q),
                pt: nearest_rank(&pt, q),
            })
            .collect(),
        draws,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thirty_seven_subsets() {
        let s = covariate_subsets(6);
        assert_eq!(s.len(), 37);
        assert_eq!(s[0].len(), 8);
        assert_eq!(s.iter().filter(|x| x.len() == 7).count(), 8);
        assert_eq!(s.iter().filter(|x| x.len() == 6).count(), 28);
    }

    #[test]
    fn summary_statistics() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 6.0]);
        assert_eq!(s.mean, 3.0);
        assert!((s.sd - (14.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!((s.min, s.max), (1.0, 6.0));
        assert_eq!(Summary::of(&[4.0]).sd, 0.0);
    }

    #[test]
    fn nearest_rank_percentiles() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(nearest_rank(&v, 0.01), 1.0);
        assert_eq!(nearest_rank(&v, 0.96), 96.0);
        assert_eq!(nearest_rank(&v, 0.5), 50.0);
    }
}
