use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, PointCloud, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Control,
    Treated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Period {
    Pre,
    Post,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::Control => "control",
            Group::Treated => "treated",
        })
    }
}

impl fmt::Display for Period {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Period::Pre => "pre",
            Period::Post => "post",
        })
    }
}

impl std::str::FromStr for Group {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "control" | "c" | "0" => Ok(Group::Control),
            "treated" | "treatment" | "t" | "1" => Ok(Group::Treated),
            other => Err(Error::InvalidArgument(format!("unknown group `{other}`"))),
        }
    }
}

impl std::str::FromStr for Period {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pre" | "0" => Ok(Period::Pre),
            "post" | "1" => Ok(Period::Post),
            other => Err(Error::InvalidArgument(format!("unknown period `{other}`"))),
        }
    }
}

/// One observed record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unit {
    pub id: String,
    pub group: Group,
    pub period: Period,
    pub outcome: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariates: Option<Vec<f64>>,
    /// Links the pre and post records of the same unit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_id: Option<String>,
}

impl Unit {
    pub fn new(id: impl Into<String>, group: Group, period: Period, outcome: Vec<f64>) -> Self {
        Self {
            id: id.into(),
            group,
            period,
            outcome,
            covariates: None,
            pair_id: None,
        }
    }

    pub fn with_pair(mut self, pair_id: impl Into<String>) -> Self {
        self.pair_id = Some(pair_id.into());
        self
    }
}

/// Records from a two-group, two-period design.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PanelDataset {
    units: Vec<Unit>,
    dim: usize,
}

impl PanelDataset {
    /// Validates outcome dimensions and pairing.
    pub fn new(units: Vec<Unit>) -> Result<Self> {
        let dim = units.first().map(|u| u.outcome.len()).unwrap_or(0);
        if !units.is_empty() && dim == 0 {
            return Err(Error::InvalidArgument(
                "outcome vectors must be nonempty".into(),
            ));
        }
        let mut pairs: HashMap<&str, (Group, [usize; 2])> = HashMap::new();
        for u in &units {
            if u.outcome.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: u.outcome.len(),
                });
            }
            if u.outcome.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "unit `{}` has a non-finite outcome",
                    u.id
                )));
            }
            if let Some(p) = &u.pair_id {
                let entry = pairs.entry(p).or_insert((u.group, [0, 0]));
                if entry.0 != u.group {
                    return Err(Error::InvalidArgument(format!(
                        "pair `{p}` spans both groups"
                    )));
                }
                entry.1[u.period as usize] += 1;
            }
        }
        if let Some((p, _)) = pairs.iter().find(|(_, (_, c))| *c != [1, 1]) {
            return Err(Error::InvalidArgument(format!(
                "pair `{p}` must link exactly one pre and one post record"
            )));
        }
        Ok(Self { units, dim })
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Units of one cell, in dataset order.
    pub fn cell(&self, group: Group, period: Period) -> Vec<&Unit> {
        self.units
            .iter()
            .filter(|u| u.group == group && u.period == period)
            .collect()
    }

    pub fn cell_size(&self, group: Group, period: Period) -> usize {
        self.units
            .iter()
            .filter(|u| u.group == group && u.period == period)
            .count()
    }

    /// Outcomes of one cell as a uniformly weighted cloud.
    pub fn cloud(&self, group: Group, period: Period) -> Result<PointCloud> {
        let cell = self.cell(group, period);
        if cell.is_empty() {
            return Err(Error::EmptyCell(format!("{group}/{period}")));
        }
        let coords = cell
            .iter()
            .flat_map(|u| u.outcome.iter().copied())
            .collect();
        PointCloud::uniform_flat(self.dim, coords)
    }

    /// Checks that the named cells are nonempty.
    pub fn require_cells(&self, cells: &[(Group, Period)]) -> Result<()> {
        for &(g, p) in cells {
            if self.cell_size(g, p) == 0 {
                return Err(Error::EmptyCell(format!("{g}/{p}")));
            }
        }
        Ok(())
    }

    /// Applies `f` to every outcome vector.
    pub fn map_outcomes<F: FnMut(&[f64]) -> Vec<f64>>(&self, mut f: F) -> Result<Self> {
        let units = self
            .units
            .iter()
            .map(|u| Unit {
                outcome: f(&u.outcome),
                ..u.clone()
            })
            .collect();
        Self::new(units)
    }

    /// Reads the generic panel CSV: columns `id,group,period,y1..yd`.
    ///
    /// An `id` that occurs once in each period of the same group becomes a
    /// pair linking those two records.
    pub fn read_csv<R: Read>(reader: R, origin: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
        let parse_err = |line: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let (Some(ci), Some(cg), Some(cp)) = (col("id"), col("group"), col("period")) else {
            return Err(parse_err(1, "header must contain id, group, period".into()));
        };
        let mut ycols = Vec::new();
        for k in 1.. {
            match col(&format!("y{k}")) {
                Some(c) => ycols.push(c),
                None => break,
            }
        }
        if ycols.is_empty() {
            return Err(parse_err(
                1,
                "header must contain outcome columns y1..yd".into(),
            ));
        }

        let mut units = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let line = row + 2;
            let rec = rec?;
            let field = |c: usize| rec.get(c).unwrap_or("");
            let group = field(cg)
                .parse::<Group>()
                .map_err(|e| parse_err(line, e.to_string()))?;
            let period = field(cp)
                .parse::<Period>()
                .map_err(|e| parse_err(line, e.to_string()))?;
            let outcome = ycols
                .iter()
                .map(|&c| {
                    field(c)
                        .parse::<f64>()
                        .map_err(|_| parse_err(line, format!("bad number `{}`", field(c))))
                })
                .collect::<Result<Vec<f64>>>()?;
            units.push(Unit::new(field(ci), group, period, outcome));
        }

        let mut seen: HashMap<(String, Group), [usize; 2]> = HashMap::new();
        for u in &units {
            seen.entry((u.id.clone(), u.group)).or_insert([0, 0])[u.period as usize] += 1;
        }
        for u in &mut units {
            if seen[&(u.id.clone(), u.group)] == [1, 1] {
                u.pair_id = Some(u.id.clone());
            }
        }
        Self::new(units)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(file, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_and_clouds() {
        let ds = PanelDataset::new(vec![
            Unit::new("a", Group::Control, Period::Pre, vec![1.0]),
            Unit::new("b", Group::Control, Period::Post, vec![2.0]),
            Unit::new("c", Group::Treated, Period::Pre, vec![3.0]),
        ])
        .unwrap();
        assert_eq!(ds.cell_size(Group::Control, Period::Pre), 1);
        assert_eq!(
            ds.cloud(Group::Control, Period::Post).unwrap().point(0),
            &[2.0]
        );
        let err = ds.cloud(Group::Treated, Period::Post).unwrap_err();
        assert_eq!(err.to_string(), "empty cell: treated/post");
    }

    #[test]
    fn rejects_mixed_dimensions() {
        let err = PanelDataset::new(vec![
            Unit::new("a", Group::Control, Period::Pre, vec![1.0]),
            Unit::new("b", Group::Control, Period::Post, vec![2.0, 3.0]),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn pairs_must_link_pre_and_post() {
        let err = PanelDataset::new(vec![
            Unit::new("a", Group::Treated, Period::Pre, vec![1.0]).with_pair("x"),
            Unit::new("b", Group::Treated, Period::Pre, vec![2.0]).with_pair("x"),
        ])
        .unwrap_err();
        assert!(err.to_string().contains("exactly one pre and one post"));
    }

    #[test]
    fn csv_pairs_repeated_ids() {
        let csv = "id,group,period,y1,y2\n\
                   u1,treated,pre,1,2\n\
                   u1,treated,post,3,4\n\
                   u2,control,pre,0,0\n\
                   u3,control,post,1,1\n";
        let ds = PanelDataset::read_csv(csv.as_bytes(), Path::new("mem.csv")).unwrap();
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.units()[0].pair_id.as_deref(), Some("u1"));
        assert_eq!(ds.units()[2].pair_id, None);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let csv = "id,group,period,y1\nu1,treated,pre,1\nu2,treated,post,abc\n";
        let err = PanelDataset::read_csv(csv.as_bytes(), Path::new("p.csv")).unwrap_err();
        assert_eq!(err.to_string(), "p.csv: line 3: bad number `abc`");
        let csv = "id,arm,period,y1\n";
        assert!(PanelDataset::read_csv(csv.as_bytes(), Path::new("p.csv")).is_err());
    }
}
