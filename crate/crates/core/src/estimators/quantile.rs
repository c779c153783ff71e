//! Empirical CDFs with the right-continuous convention and their
//! generalised inverse `F⁻¹(q) = inf{x : F(x) ≥ q}`.

use serde::Serialize;

use crate::{Error, PointCloud, Result};

/// Default quantile grid: `0.05, 0.10, …, 0.95`.
pub fn default_quantile_grid() -> Vec<f64> {
    (1..=19).map(|k| k as f64 / 20.0).collect()
}

/// Weighted empirical distribution of a scalar sample.
#[derive(Debug, Clone)]
pub struct Ecdf {
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Ecdf {
    /// Equal weight `1/n` per value.
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("empirical CDF of an empty sample".into()));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let cumulative = (1..=sorted.len()).map(|k| k as f64 / n).collect();
        Ok(Self {
            values: sorted,
            cumulative,
        })
    }

    pub fn weighted(values: &[f64], weights: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("empirical CDF of an empty sample".into()));
        }
        if values.len() != weights.len() {
            return Err(Error::InvalidWeights(format!(
                "{} weights for {} values",
                weights.len(),
                values.len()
            )));
        }
        let mut idx: Vec<usize> = (0..values.len()).collect();
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let total: f64 = weights.iter().sum();
        let mut acc = 0.0;
        let mut cumulative = Vec::with_capacity(idx.len());
        for &i in &idx {
            acc += weights[i] / total;
            cumulative.push(acc);
        }
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        Ok(Self {
            values: idx.iter().map(|&i| values[i]).collect(),
            cumulative,
        })
    }

    /// Marginal of coordinate `k` of a cloud.
    pub fn from_cloud(cloud: &PointCloud, k: usize) -> Result<Self> {
        if k >= cloud.dim() {
            return Err(Error::InvalidArgument(format!(
                "coordinate {k} out of range for dimension {}",
                cloud.dim()
            )));
        }
        if cloud.is_uniform() {
            Self::new(&cloud.coordinate(k))
        } else {
            Self::weighted(&cloud.coordinate(k), cloud.weights())
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `F(x) = P(X ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.values.partition_point(|&v| v <= x);
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    /// `inf{x : F(x) ≥ q}`; `q ≤ 0` gives the minimum, `q > 1` the maximum.
    pub fn quantile(&self, q: f64) -> f64 {
        let k = self.cumulative.partition_point(|&c| c < q);
        self.values[k.min(self.values.len() - 1)]
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.values
    }
}

fn check_level(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "quantile level {q} outside (0, 1)"
        )))
    }
}

/// Quantile treatment effect `F⋆⁻¹(q) − F†⁻¹(q)` between two scalar samples.
pub fn qte(sample_star: &PointCloud, sample_dagger: &PointCloud, q: f64) -> Result<f64> {
    check_level(q)?;
    for c in [sample_star, sample_dagger] {
        if c.dim() != 1 {
            return Err(Error::NotOneDimensional(c.dim()));
        }
    }
    let star = Ecdf::from_cloud(sample_star, 0)?;
    let dagger = Ecdf::from_cloud(sample_dagger, 0)?;
    Ok(star.quantile(q) - dagger.quantile(q))
}

/// One coordinate's quantile-effect curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QteCurve {
    pub coordinate: usize,
    pub levels: Vec<f64>,
    pub treated: Vec<f64>,
    pub counterfactual: Vec<f64>,
    pub effect: Vec<f64>,
}

/// Per-coordinate QTE curves of `star` against `dagger` on `grid`.
pub fn qte_curves(star: &PointCloud, dagger: &PointCloud, grid: &[f64]) -> Result<Vec<QteCurve>> {
    if star.dim() != dagger.dim() {
        return Err(Error::DimensionMismatch {
            expected: star.dim(),
            found: dagger.dim(),
        });
    }
    for &q in grid {
        check_level(q)?;
    }
    (0..star.dim())
        .map(|k| {
            let fs = Ecdf::from_cloud(star, k)?;
            let fd = Ecdf::from_cloud(dagger, k)?;
            let treated: Vec<f64> = grid.iter().map(|&q| fs.quantile(q)).collect();
            let counterfactual: Vec<f64> = grid.iter().map(|&q| fd.quantile(q)).collect();
            let effect = treated
                .iter()
                .zip(&counterfactual)
                .map(|(a, b)| a - b)
                .collect();
            Ok(QteCurve {
                coordinate: k,
                levels: grid.to_vec(),
                treated,
                counterfactual,
                effect,
            })
        })
        .collect()
}

/// Quantiles of coordinate `target` among points whose coordinate `fixed`
/// lies within `[value − half_width, value + half_width]`.
///
/// This is the banded conditional curve used for "fix one coordinate" plots.
/// Returns `None` when the band is empty.
pub fn conditional_quantiles(
    cloud: &PointCloud,
    fixed: usize,
    value: f64,
    half_width: f64,
    target: usize,
    grid: &[f64],
) -> Result<Option<Vec<f64>>> {
    if fixed >= cloud.dim() || target >= cloud.dim() {
        return Err(Error::InvalidArgument("coordinate out of range".into()));
    }
    let band: Vec<f64> = cloud
        .points()
        .filter(|p| (p[fixed] - value).abs() <= half_width)
        .map(|p| p[target])
        .collect();
    if band.is_empty() {
        return Ok(None);
    }
    let f = Ecdf::new(&band)?;
    Ok(Some(grid.iter().map(|&q| f.quantile(q)).collect()))
}
