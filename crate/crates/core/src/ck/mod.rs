//! Fast-food employment survey: loading, panels and the reported analyses.

mod analysis;
mod panel;
mod record;

pub use analysis::{
    covariate_subsets, run_covariate_sweep, run_table2, run_unit_drop, CompleteSampleRow,
    ConditionalCurve, EffectRow, EffectSummary, Percentile, SubsetResult, Summary, SweepReport,
    SweepSample, Table2Report, UnitDropReport, UnitEffectPoint, CONDITIONAL_BAND,
    CONDITIONAL_LEVELS, DROP_PERCENTILES,
};
pub use panel::{
    bivariate_panel, covariate_complete_bivariate, covariate_panel, covariate_panel_filtered,
    CovariatePanel, Standardization,
};
pub use record::{
    field_index, fte, load_ck, read_ck, CkRecord, State, Wave, COVARIATES, FIELDS, OUTCOMES,
};
