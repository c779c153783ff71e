use std::sync::Arc;

use serde::{Deserialize, Serialize, Serializer};

use super::cost::{compensated_sum, squared_distance};
use crate::{Error, PointCloud, Result};

/// Tolerance for plan marginals against cloud weights.
pub const MARGINAL_TOL: f64 = 1e-8;

/// A coupling between two point clouds.
///
/// Stored sparsely: basic solutions of the transportation LP have at most
/// `n + m - 1` nonzero entries.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    source: Arc<PointCloud>,
    target: Arc<PointCloud>,
    entries: Vec<(usize, usize, f64)>,
    row_start: Vec<usize>,
    cost: f64,
}

impl TransportPlan {
    /// Builds a plan from `(i, j, mass)` triplets. Zero masses are dropped
    /// and the transport cost is recomputed from the clouds.
    pub fn from_entries(
        source: Arc<PointCloud>,
        target: Arc<PointCloud>,
        mut entries: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        if source.dim() != target.dim() {
            return Err(Error::DimensionMismatch {
                expected: source.dim(),
                found: target.dim(),
            });
        }
        let (n, m) = (source.len(), target.len());
        if let Some(&(i, j, _)) = entries.iter().find(|(i, j, _)| *i >= n || *j >= m) {
            return Err(Error::InvalidArgument(format!(
                "coupling entry ({i}, {j}) outside a {n}x{m} plan"
            )));
        }
        if let Some(&(_, _, w)) = entries.iter().find(|e| !(e.2 >= 0.0 && e.2.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "coupling mass {w} is negative"
            )));
        }
        entries.retain(|e| e.2 > 0.0);
        entries.sort_by_key(|e| (e.0, e.1));

        let mut row_start = vec![0usize; n + 1];
        for &(i, _, _) in &entries {
            row_start[i + 1] += 1;
        }
        for i in 0..n {
            row_start[i + 1] += row_start[i];
        }
        let cost = compensated_sum(
            entries
                .iter()
                .map(|&(i, j, w)| w * squared_distance(source.point(i), target.point(j))),
        );
        Ok(Self {
            source,
            target,
            entries,
            row_start,
            cost,
        })
    }

    pub fn source(&self) -> &PointCloud {
        &self.source
    }

    pub fn target(&self) -> &PointCloud {
        &self.target
    }

    pub(crate) fn source_arc(&self) -> &Arc<PointCloud> {
        &self.source
    }

    pub(crate) fn target_arc(&self) -> &Arc<PointCloud> {
        &self.target
    }

    /// Total squared-Euclidean transport cost `Σ γ_ij ‖x_i − y_j‖²`.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// Nonzero `(i, j, mass)` entries ordered by `(i, j)`.
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// Nonzero entries of source row `i`.
    pub fn row(&self, i: usize) -> &[(usize, usize, f64)] {
        &self.entries[self.row_start[i]..self.row_start[i + 1]]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i)
            .binary_search_by(|e| e.1.cmp(&j))
            .map(|k| self.row(i)[k].2)
            .unwrap_or(0.0)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.target.len()]; self.source.len()];
        for &(i, j, w) in &self.entries {
            dense[i][j] = w;
        }
        dense
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.source.len())
            .map(|i| compensated_sum(self.row(i).iter().map(|e| e.2)))
            .collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.target.len()];
        for &(_, j, w) in &self.entries {
            sums[j] += w;
        }
        sums
    }

    /// Largest absolute deviation of the marginals from the cloud weights.
    pub fn marginal_error(&self) -> f64 {
        let rows = self
            .row_sums()
            .into_iter()
            .zip(self.source.weights())
            .map(|(s, w)| (s - w).abs());
        let cols = self
            .col_sums()
            .into_iter()
            .zip(self.target.weights())
            .map(|(s, w)| (s - w).abs());
        rows.chain(cols).fold(0.0, f64::max)
    }

    /// True when the coupling is a scaled permutation matrix.
    pub fn is_permutation(&self) -> bool {
        let n = self.source.len();
        if n != self.target.len() || self.entries.len() != n {
            return false;
        }
        let mut seen = vec![false; n];
        for i in 0..n {
            let row = self.row(i);
            if row.len() != 1 || seen[row[0].1] {
                return false;
            }
            seen[row[0].1] = true;
        }
        true
    }
}

#[derive(Serialize)]
struct PlanRecord<'a> {
    rows: usize,
    cols: usize,
    cost: f64,
    coupling: &'a [(usize, usize, f64)],
}

impl Serialize for TransportPlan {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PlanRecord {
            rows: self.source.len(),
            cols: self.target.len(),
            cost: self.cost,
            coupling: &self.entries,
        }
        .serialize(s)
    }
}

/// How a coupling is collapsed into a deterministic map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RoundingMode {
    /// Each source goes to its maximum-mass target.
    #[default]
    Mode,
    /// Each source goes to the mass-weighted mean of its targets.
    Barycentric,
}

impl std::fmt::Display for RoundingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RoundingMode::Mode => "mode",
            RoundingMode::Barycentric => "barycentric",
        })
    }
}

impl std::str::FromStr for RoundingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mode" => Ok(RoundingMode::Mode),
            "barycentric" => Ok(RoundingMode::Barycentric),
            other => Err(Error::InvalidArgument(format!(
                "unknown rounding mode `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MapImages {
    /// Target index per source point.
    Indices(Vec<usize>),
    /// Row-major image vectors, one per source point.
    Vectors(Vec<f64>),
}

/// A deterministic source-to-target map.
#[derive(Debug, Clone)]
pub struct TransportMap {
    source: Arc<PointCloud>,
    target: Arc<PointCloud>,
    mode: RoundingMode,
    images: MapImages,
}

impl TransportMap {
    pub(crate) fn new(
        source: Arc<PointCloud>,
        target: Arc<PointCloud>,
        mode: RoundingMode,
        images: MapImages,
    ) -> Self {
        Self {
            source,
            target,
            mode,
            images,
        }
    }

    pub fn source(&self) -> &PointCloud {
        &self.source
    }

    pub fn target(&self) -> &PointCloud {
        &self.target
    }

    pub fn mode(&self) -> RoundingMode {
        self.mode
    }

    pub fn images(&self) -> &MapImages {
        &self.images
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    /// Target indices, available under mode rounding.
    pub fn assignment(&self) -> Option<&[usize]> {
        match &self.images {
            MapImages::Indices(idx) => Some(idx),
            MapImages::Vectors(_) => None,
        }
    }

    /// Image of source point `i`.
    pub fn image(&self, i: usize) -> &[f64] {
        match &self.images {
            MapImages::Indices(idx) => self.target.point(idx[i]),
            MapImages::Vectors(v) => {
                let d = self.target.dim();
                &v[i * d..(i + 1) * d]
            }
        }
    }

    /// `(u, T(u))` for every source point.
    pub fn pairs(&self) -> Vec<(Vec<f64>, Vec<f64>)> {
        (0..self.len())
            .map(|i| (self.source.point(i).to_vec(), self.image(i).to_vec()))
            .collect()
    }

    /// `Σ w_i ‖u_i − T(u_i)‖²`.
    pub fn cost(&self) -> f64 {
        compensated_sum((0..self.len()).map(|i| {
            self.source.weights()[i] * squared_distance(self.source.point(i), self.image(i))
        }))
    }
}

#[derive(Serialize)]
struct MapRecord<'a> {
    mode: RoundingMode,
    len: usize,
    dim: usize,
    #[serde(flatten)]
    images: &'a MapImages,
}

impl Serialize for TransportMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MapRecord {
            mode: self.mode,
            len: self.len(),
            dim: self.target.dim(),
            images: &self.images,
        }
        .serialize(s)
    }
}
