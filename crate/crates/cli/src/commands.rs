use std::path::Path;

use serde::Serialize;

use otcic::ck::{self, SweepSample};
use otcic::estimators::{
    cic_estimate_with_grid, couple_counterfactuals, coupled_effects, default_quantile_grid,
    did_estimate, ot_cic_estimate_with_grid, Group, PanelDataset, Period,
};
use otcic::io::{self, Table};
use otcic::ot::{solve_ot, RoundingMode};
use otcic::synthetic::{run_experiment, SyntheticConfig};
use otcic::Error;

use crate::args::{Analysis, CkArgs, EstimateArgs, Method, Rounding, SimulateArgs};
use crate::manifest::{InputFile, OutputSet};

/// A failure with its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            kind: "usage",
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::Parse { .. } | Error::Csv(_) | Error::Json(_) => (2, "schema"),
            Error::InvalidArgument(_)
            | Error::DimensionMismatch { .. }
            | Error::InvalidWeights(_)
            | Error::Empty(_)
            | Error::EmptyCell(_)
            | Error::NotOneDimensional(_) => (2, "invalid_input"),
            Error::Io(_) => (1, "io"),
            Error::NonConvergence { .. } | Error::Infeasible { .. } | Error::Internal(_) => {
                (1, "estimator")
            }
        };
        Self {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Errors reading user-supplied files are usage errors.
fn read_input<T>(path: &Path, r: otcic::Result<T>) -> CliResult<T> {
    r.map_err(|e| match e {
        Error::Io(io) => CliError::usage(format!("{}: {io}", path.display())),
        other => other.into(),
    })
}

fn hash_input(path: &Path) -> CliResult<InputFile> {
    InputFile::hash(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

pub fn simulate(args: &SimulateArgs, threads: Option<usize>) -> CliResult<()> {
    let mut inputs = Vec::new();
    let mut cfg = match &args.config {
        Some(p) => {
            inputs.push(hash_input(p)?);
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?;
            serde_json::from_str::<SyntheticConfig>(&text)
                .map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?
        }
        None => SyntheticConfig::default(),
    };
    if let Some(v) = args.n {
        cfg.n = v;
    }
    if let Some(v) = args.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.runs {
        cfg.runs = v;
    }
    if let Some(v) = args.mesh {
        cfg.mesh_points = v;
    }
    if let Some(v) = args.mesh_kind {
        cfg.mesh = v.into();
    }
    if let Some(v) = args.bandwidth {
        cfg.kde_bandwidth = v;
    }
    if let Some(v) = args.rounding {
        cfg.rounding = v.into();
    }
    cfg.validate()?;

    log::info!("simulating {} runs with n = {}", cfg.runs, cfg.n);
    let report = run_experiment(&cfg)?;
    log::info!(
        "mean MAD: ot {:.5}, cic {:.5}",
        report.mad_ot,
        report.mad_cic
    );

    let mut out = OutputSet::create(&args.out_dir)?;
    out.json("report.json", &report)?;
    out.table("per_run.csv", &io::per_run_table(&report))?;
    if let Some(plots) = &report.plots {
        out.table("marginals.csv", &io::marginal_table(plots))?;
        out.table("kde.csv", &io::kde_table(plots))?;
        out.table("mesh.csv", &io::mesh_table(plots))?;
    }
    out.finish("simulate", threads, &cfg, &inputs)?;
    Ok(())
}

#[derive(Serialize)]
struct EstimateConfig<'a> {
    data: String,
    method: Method,
    rounding: Rounding,
    quantiles: &'a [f64],
    dump_plan: bool,
    couple: bool,
}

#[derive(Serialize)]
struct PlanDump<'a> {
    plan: &'a otcic::ot::TransportPlan,
    map: &'a otcic::ot::TransportMap,
}

pub fn estimate(args: &EstimateArgs, threads: Option<usize>) -> CliResult<()> {
    let input = hash_input(&args.data)?;
    let data = read_input(&args.data, PanelDataset::from_csv_path(&args.data))?;
    let grid = args.quantiles.clone().unwrap_or_else(default_quantile_grid);
    if grid.is_empty() || grid.iter().any(|q| !(*q > 0.0 && *q < 1.0)) {
        return Err(CliError::usage(
            "quantile levels must lie strictly between 0 and 1",
        ));
    }
    if args.method == Method::Did && (args.dump_plan || args.couple) {
        return Err(CliError::usage(
            "--dump-plan and --couple need --method cic or ot",
        ));
    }
    if args.method == Method::Cic && args.dump_plan {
        return Err(CliError::usage("--dump-plan needs --method ot"));
    }
    let rounding: RoundingMode = args.rounding.into();

    let mut out = OutputSet::create(&args.out_dir)?;
    let result = match args.method {
        Method::Did => {
            out.json("report.json", &did_estimate(&data)?)?;
            None
        }
        Method::Cic => Some(cic_estimate_with_grid(&data, &grid)?),
        Method::Ot => Some(ot_cic_estimate_with_grid(&data, rounding, &grid)?),
    };
    if let Some((cf, report)) = result {
        out.json("report.json", &report)?;
        out.table("counterfactuals.csv", &io::counterfactual_table(&cf))?;
        if let Some(curves) = &report.qte {
            out.table("qte.csv", &io::qte_table(curves))?;
        }
        if let Some(t) = io::unit_effect_table(&report) {
            out.table("unit_effects.csv", &t)?;
        }
        if args.dump_plan {
            let plan = solve_ot(
                &data.cloud(Group::Control, Period::Pre)?,
                &data.cloud(Group::Control, Period::Post)?,
            )?;
            let map = cf
                .drift_map
                .as_ref()
                .expect("transport estimator keeps its map");
            out.json("plan.json", &PlanDump { plan: &plan, map })?;
        }
        if args.couple {
            let treated = data.cell(Group::Treated, Period::Post);
            let map = couple_counterfactuals(
                &data.cloud(Group::Treated, Period::Post)?,
                &cf.counterfactuals,
            )?;
            let effects = coupled_effects(&map);
            let d = data.dim();
            let mut header = vec!["unit_id".to_string(), "counterfactual_index".to_string()];
            header.extend((1..=d).map(|k| format!("effect_y{k}")));
            let mut t = Table::new(header);
            let assign = map.assignment().expect("mode rounding yields indices");
            for (i, u) in treated.iter().enumerate() {
                let mut row = vec![u.id.clone(), assign[i].to_string()];
                row.extend(effects[i].iter().map(|x| format!("{x}")));
                t.push(row);
            }
            out.json("coupling.json", &map)?;
            out.table("coupled_effects.csv", &t)?;
        }
    }
    let cfg = EstimateConfig {
        data: args.data.display().to_string(),
        method: args.method,
        rounding: args.rounding,
        quantiles: &grid,
        dump_plan: args.dump_plan,
        couple: args.couple,
    };
    out.finish("estimate", threads, &cfg, &[input])?;
    Ok(())
}

#[derive(Serialize)]
struct CkConfig {
    data: String,
    analysis: Analysis,
    reps: usize,
    seed: u64,
    drop_frac: f64,
    fixed_sample: bool,
    rounding: Rounding,
}

pub fn survey(args: &CkArgs, threads: Option<usize>) -> CliResult<()> {
    let input = hash_input(&args.data)?;
    let records = read_input(&args.data, ck::load_ck(&args.data))?;
    let rounding: RoundingMode = args.rounding.into();
    let mut out = OutputSet::create(&args.out_dir)?;
    match args.analysis {
        Analysis::Table2 => {
            let rep = ck::run_table2(&records)?;
            out.json("table2.json", &rep)?;
            out.table("table2.csv", &io::table2_table(&rep))?;
            out.table("quantiles.csv", &io::qte_table(&rep.quantile_curves))?;
            out.table("conditional_quantiles.csv", &io::conditional_table(&rep))?;
            out.table("unit_effects.csv", &io::scatter_table(&rep))?;
        }
        Analysis::Sweep => {
            let sample = if args.fixed_sample {
                SweepSample::Fixed
            } else {
                SweepSample::PerSubset
            };
            let rep = ck::run_covariate_sweep(&records, sample, rounding)?;
            out.json("sweep.json", &rep)?;
            out.table("sweep.csv", &io::sweep_table(&rep))?;
        }
        Analysis::UnitDrop => {
            let rep = ck::run_unit_drop(&records, args.drop_frac, args.reps, args.seed, rounding)?;
            out.json("unit_drop.json", &rep)?;
            out.table("unit_drop.csv", &io::unit_drop_table(&rep))?;
        }
    }
    let cfg = CkConfig {
        data: args.data.display().to_string(),
        analysis: args.analysis,
        reps: args.reps,
        seed: args.seed,
        drop_frac: args.drop_frac,
        fixed_sample: args.fixed_sample,
        rounding: args.rounding,
    };
    out.finish("ck", threads, &cfg, &[input])?;
    Ok(())
}
