use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::{Error, PointCloud, Result};

/// Axis-aligned evaluation lattice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid2 {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl Grid2 {
    /// `nx × ny` evenly spaced nodes covering `[x0, x1] × [y0, y1]`.
    pub fn linspace(x0: f64, x1: f64, nx: usize, y0: f64, y1: f64, ny: usize) -> Self {
        let lin = |a: f64, b: f64, k: usize| -> Vec<f64> {
            if k == 1 {
                return vec![(a + b) / 2.0];
            }
            (0..k)
                .map(|i| a + (b - a) * i as f64 / (k - 1) as f64)
                .collect()
        };
        Self {
            xs: lin(x0, x1, nx),
            ys: lin(y0, y1, ny),
        }
    }
}

/// Density values on a grid; `density[iy * xs.len() + ix]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensitySurface {
    pub grid: Grid2,
    pub density: Vec<f64>,
}

impl DensitySurface {
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.density[iy * self.grid.xs.len() + ix]
    }
}

/// Isotropic Gaussian kernel density estimate of a 2-D sample on `grid`.
pub fn kde_grid(sample: &PointCloud, bandwidth: f64, grid: &Grid2) -> Result<DensitySurface> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "bandwidth must be positive, got {bandwidth}"
        )));
    }
    if sample.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: sample.dim(),
        });
    }
    let norm = 1.0 / (2.0 * PI * bandwidth * bandwidth);
    let inv = 1.0 / (2.0 * bandwidth * bandwidth);
    let weights = sample.weights();
    let density = grid
        .ys
        .par_iter()
        .flat_map_iter(|&y| {
            grid.xs.iter().map(move |&x| {
                norm * sample
                    .points()
                    .zip(weights)
                    .map(|(p, w)| {
                        let r2 = (p[0] - x).powi(2) + (p[1] - y).powi(2);
                        w * (-r2 * inv).exp()
                    })
                    .sum::<f64>()
            })
        })
        .collect();
    Ok(DensitySurface {
        grid: grid.clone(),
        density,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single() -> PointCloud {
        PointCloud::uniform(vec![vec![1.0, -2.0]]).unwrap()
    }

    #[test]
    fn symmetric_about_single_point() {
        let g = Grid2::linspace(-1.0, 3.0, 41, -4.0, 0.0, 41);
        let s = kde_grid(&single(), 0.5, &g).unwrap();
        for iy in 0..41 {
            for ix in 0..41 {
                let a = s.at(ix, iy);
                assert!((a - s.at(40 - ix, iy)).abs() < 1e-15);
                assert!((a - s.at(ix, 40 - iy)).abs() < 1e-15);
                assert!(a >= 0.0);
                assert!(a <= s.at(20, 20));
            }
        }
    }

    #[test]
    fn integrates_to_one() {
        let sample =
            PointCloud::uniform(vec![vec![0.0, 0.0], vec![1.0, 0.5], vec![-0.5, 1.5]]).unwrap();
        let g = Grid2::linspace(-4.0, 5.0, 181, -4.0, 5.5, 191);
        let s = kde_grid(&sample, 0.5, &g).unwrap();
        let dx = g.xs[1] - g.xs[0];
        let dy = g.ys[1] - g.ys[0];
        let mass: f64 = s.density.iter().sum::<f64>() * dx * dy;
        assert!((mass - 1.0).abs() < 0.02, "mass {mass}");
    }

    #[test]
    fn rejects_bad_bandwidth() {
        let g = Grid2::linspace(0.0, 1.0, 2, 0.0, 1.0, 2);
        assert!(kde_grid(&single(), 0.0, &g).is_err());
        assert!(kde_grid(&single(), f64::NAN, &g).is_err());
    }
}
