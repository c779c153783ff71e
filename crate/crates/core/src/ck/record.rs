use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Employment outcomes, always the first two coordinates.
pub const OUTCOMES: [&str; 2] = ["EMPFT", "EMPPT"];

/// Numerical covariates recorded in both survey waves.
pub const COVARIATES: [&str; 8] = [
    "PCTAFF", "NMGRS", "INCTIME", "PENTREE", "PSODA", "NREGS", "OPEN", "HRSOPEN",
];

/// Outcomes followed by covariates; the index into this list is a field id.
pub const FIELDS: [&str; 10] = [
    "EMPFT", "EMPPT", "PCTAFF", "NMGRS", "INCTIME", "PENTREE", "PSODA", "NREGS", "OPEN", "HRSOPEN",
];

pub fn field_index(name: &str) -> Option<usize> {
    FIELDS.iter().position(|f| f.eq_ignore_ascii_case(name))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum State {
    /// New Jersey, where the minimum wage rose.
    NJ,
    /// Eastern Pennsylvania, the comparison region.
    PA,
}

impl State {
    pub fn is_treated(self) -> bool {
        self == State::NJ
    }
}

impl std::str::FromStr for State {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "NJ" | "nj" | "1" => Ok(State::NJ),
            "PA" | "pa" | "0" => Ok(State::PA),
            other => Err(format!("STATE must be NJ/PA or 1/0, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wave {
    First,
    Second,
}

/// One restaurant; `None` marks a missing survey answer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CkRecord {
    pub sheet_id: String,
    pub state: State,
    pub wave1: [Option<f64>; 10],
    pub wave2: [Option<f64>; 10],
}

impl CkRecord {
    pub fn value(&self, field: usize, wave: Wave) -> Option<f64> {
        match wave {
            Wave::First => self.wave1[field],
            Wave::Second => self.wave2[field],
        }
    }

    pub fn is_missing(&self, field: usize, wave: Wave) -> bool {
        self.value(field, wave).is_none()
    }

    /// Whether every listed field is present in both waves.
    pub fn complete_on(&self, fields: &[usize]) -> bool {
        fields
            .iter()
            .all(|&f| self.wave1[f].is_some() && self.wave2[f].is_some())
    }

    pub fn vector(&self, fields: &[usize], wave: Wave) -> Option<Vec<f64>> {
        fields.iter().map(|&f| self.value(f, wave)).collect()
    }
}

/// Full-time-equivalent employment.
pub fn fte(full_time: f64, part_time: f64) -> f64 {
    full_time + 0.5 * part_time
}

fn expected_header() -> Vec<String> {
    let mut cols = vec!["SHEET".to_string(), "STATE".to_string()];
    cols.extend(FIELDS.iter().map(|f| f.to_string()));
    cols.extend(FIELDS.iter().map(|f| format!("{f}2")));
    cols
}

fn parse_value(raw: &str) -> std::result::Result<Option<f64>, String> {
    let s = raw.trim();
    if s.is_empty() || s == "." || s.eq_ignore_ascii_case("na") || s.eq_ignore_ascii_case("nan") {
        return Ok(None);
    }
    let v: f64 = s.parse().map_err(|_| format!("not a number: `{s}`"))?;
    if !v.is_finite() {
        return Err(format!("non-finite value `{s}`"));
    }
    Ok(Some(v))
}

/// Reads the survey CSV: `SHEET`, `STATE`, the ten fields and their
/// `2`-suffixed second-wave counterparts, in any column order.
pub fn read_ck<R: Read>(reader: R, origin: &Path) -> Result<Vec<CkRecord>> {
    let parse_err = |line: u64, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line: line as usize,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        log::warn!("{}: empty survey file", origin.display());
        return Ok(Vec::new());
    }

    let expected = expected_header();
    let mut pos: HashMap<String, usize> = HashMap::new();
    for (i, h) in header.iter().enumerate() {
        let key = h.to_ascii_uppercase();
        if !expected.contains(&key) {
            return Err(parse_err(1, format!("unexpected column `{h}`")));
        }
        if pos.insert(key, i).is_some() {
            return Err(parse_err(1, format!("duplicate column `{h}`")));
        }
    }
    if let Some(missing) = expected.iter().find(|c| !pos.contains_key(*c)) {
        return Err(parse_err(1, format!("missing column `{missing}`")));
    }

    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let sheet = row[pos["SHEET"]].to_string();
        if sheet.is_empty() {
            return Err(parse_err(line, "empty SHEET".into()));
        }
        let state: State = row[pos["STATE"]].parse().map_err(|m| parse_err(line, m))?;
        let mut wave1 = [None; 10];
        let mut wave2 = [None; 10];
        for (f, name) in FIELDS.iter().enumerate() {
            for (slot, col) in [
                (&mut wave1[f], name.to_string()),
                (&mut wave2[f], format!("{name}2")),
            ] {
                let v = parse_value(&row[pos[&col]])
                    .map_err(|m| parse_err(line, format!("{col}: {m}")))?;
                if f < 2 && v.is_some_and(|x| x < 0.0) {
                    return Err(parse_err(line, format!("{col}: negative employment count")));
                }
                *slot = v;
            }
        }
        out.push(CkRecord {
            sheet_id: sheet,
            state,
            wave1,
            wave2,
        });
    }
    if out.is_empty() {
        log::warn!("{}: survey file has no records", origin.display());
    }
    Ok(out)
}

pub fn load_ck(path: &Path) -> Result<Vec<CkRecord>> {
    read_ck(File::open(path)?, path)
}
