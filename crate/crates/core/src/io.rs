//! Output tables and atomic file writing.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::ck::{SweepReport, Table2Report, UnitDropReport};
use crate::estimators::{CounterfactualResult, EffectReport, QteCurve};
use crate::synthetic::{DensitySurface, ExperimentReport, PlotData};
use crate::Result;

/// A header plus rows of already formatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| crate::Error::Io(e.into_error()))
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn indexed(prefix: &str, d: usize) -> impl Iterator<Item = String> + '_ {
    (1..=d).map(move |k| format!("{prefix}{k}"))
}

/// Writes `bytes` to a temporary file beside `path`, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(std::fs::Permissions::from_mode(0o644))?;
    }
    tmp.persist(path).map_err(|e| crate::Error::Io(e.error))?;
    Ok(())
}

pub fn to_json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, &to_json_bytes(value)?)
}

pub fn write_table(path: &Path, table: &Table) -> Result<()> {
    write_atomic(path, &table.to_csv()?)
}

pub fn qte_table(curves: &[QteCurve]) -> Table {
    let mut t = Table::new(["coordinate", "level", "treated", "counterfactual", "effect"]);
    for c in curves {
        for i in 0..c.levels.len() {
            t.push(vec![
                (c.coordinate + 1).to_string(),
                num(c.levels[i]),
                num(c.treated[i]),
                num(c.counterfactual[i]),
                num(c.effect[i]),
            ]);
        }
    }
    t
}

pub fn counterfactual_table(result: &CounterfactualResult) -> Table {
    let d = result.counterfactuals.dim();
    let mut header = vec!["unit_id".to_string()];
    header.extend(indexed("pre_y", d));
    header.push("matched_control".into());
    header.extend(indexed("cf_y", d));
    let mut t = Table::new(header);
    for u in &result.per_unit {
        let mut row = vec![u.unit_id.clone()];
        row.extend(u.pre_outcome.iter().copied().map(num));
        row.push(u.matched_control.map(|j| j.to_string()).unwrap_or_default());
        row.extend(u.counterfactual.iter().copied().map(num));
        t.push(row);
    }
    t
}

pub fn unit_effect_table(report: &EffectReport) -> Option<Table> {
    let effects = report.unit_effects.as_ref()?;
    let d = report.ate.len();
    let mut header = vec!["unit_id".to_string()];
    header.extend(indexed("effect_y", d));
    let mut t = Table::new(header);
    for e in effects {
        let mut row = vec![e.unit_id.clone()];
        row.extend(e.effect.iter().copied().map(num));
        t.push(row);
    }
    Some(t)
}

pub fn per_run_table(report: &ExperimentReport) -> Table {
    let mut t = Table::new(["run", "mad_ot", "mad_cic"]);
    for r in &report.per_run {
        t.push(vec![r.run.to_string(), num(r.mad_ot), num(r.mad_cic)]);
    }
    t
}

pub fn marginal_table(plots: &PlotData) -> Table {
    let mut t = Table::new(["coordinate", "x", "truth", "ot", "cic"]);
    for m in &plots.marginals {
        for i in 0..m.x.len() {
            t.push(vec![
                (m.coordinate + 1).to_string(),
                num(m.x[i]),
                num(m.truth[i]),
                num(m.ot[i]),
                num(m.cic[i]),
            ]);
        }
    }
    t
}

pub fn kde_table(plots: &PlotData) -> Table {
    let mut t = Table::new(["method", "x", "y", "density"]);
    let surfaces: [(&str, &DensitySurface); 3] = [
        ("truth", &plots.kde.truth),
        ("ot", &plots.kde.ot),
        ("cic", &plots.kde.cic),
    ];
    for (name, s) in surfaces {
        for (iy, y) in s.grid.ys.iter().enumerate() {
            for (ix, x) in s.grid.xs.iter().enumerate() {
                t.push(vec![name.into(), num(*x), num(*y), num(s.at(ix, iy))]);
            }
        }
    }
    t
}

pub fn mesh_table(plots: &PlotData) -> Table {
    let m = &plots.mesh;
    let d = m.points.first().map_or(0, Vec::len);
    let mut header: Vec<String> = indexed("z", d).collect();
    header.extend(["truth", "ot", "cic"].map(String::from));
    let mut t = Table::new(header);
    for (i, p) in m.points.iter().enumerate() {
        let mut row: Vec<String> = p.iter().copied().map(num).collect();
        row.extend([num(m.truth[i]), num(m.ot[i]), num(m.cic[i])]);
        t.push(row);
    }
    t
}

pub fn table2_table(report: &Table2Report) -> Table {
    let mut t = Table::new(["estimator", "ate_ft", "ate_pt", "ate_fte"]);
    for r in &report.rows {
        t.push(vec![
            r.estimator.clone(),
            num(r.ate_ft),
            num(r.ate_pt),
            num(r.ate_fte),
        ]);
    }
    t
}

pub fn conditional_table(report: &Table2Report) -> Table {
    let mut t = Table::new([
        "fixed",
        "value",
        "target",
        "level",
        "treated",
        "counterfactual",
    ]);
    for c in &report.conditional_curves {
        for (i, q) in c.levels.iter().enumerate() {
            t.push(vec![
                c.fixed.clone(),
                num(c.value),
                c.target.clone(),
                num(*q),
                opt(c.treated.as_ref().map(|v| v[i])),
                opt(c.counterfactual.as_ref().map(|v| v[i])),
            ]);
        }
    }
    t
}

pub fn scatter_table(report: &Table2Report) -> Table {
    let mut t = Table::new(["unit_id", "effect_ft", "effect_pt"]);
    for e in &report.unit_effects {
        t.push(vec![e.unit_id.clone(), num(e.ft), num(e.pt)]);
    }
    t
}

pub fn sweep_table(report: &SweepReport) -> Table {
    let mut t = Table::new(["dim", "n_control", "n_treated", "removed", "te_ft", "te_pt"]);
    for s in &report.subsets {
        t.push(vec![
            s.dim.to_string(),
            s.n_control.to_string(),
            s.n_treated.to_string(),
            s.removed.join(" "),
            num(s.te_ft),
            num(s.te_pt),
        ]);
    }
    t
}

pub fn unit_drop_table(report: &UnitDropReport) -> Table {
    let mut t = Table::new(["rep", "te_ft", "te_pt"]);
    for (i, d) in report.draws.iter().enumerate() {
        t.push(vec![i.to_string(), num(d[0]), num(d[1])]);
    }
    t
}
