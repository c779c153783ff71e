//! Simulation study with Beta latents and linear production functions.
//!
//! Controls draw fresh latents in each period and the treated keep theirs,
//! so the true counterfactual `h1(U*)` is known and estimated
//! counterfactual distributions can be scored against it.

mod ecdf;
mod kde;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::estimators::{cic_estimate, ot_cic_estimate, Ecdf, Group, PanelDataset, Period, Unit};
use crate::ot::RoundingMode;
use crate::{Error, PointCloud, Result};

pub use ecdf::{ecdf_mad, joint_ecdf};
pub use kde::{kde_grid, DensitySurface, Grid2};

/// Nodes per axis of the KDE plot grids.
pub const KDE_GRID_SIDE: usize = 100;
/// Evaluation points per coordinate of the marginal eCDF curves.
pub const MARGINAL_POINTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeshKind {
    /// Seeded uniform draws over the bounding box.
    #[default]
    Random,
    /// Cell centres of a square lattice with at least `mesh_points` nodes.
    Lattice,
}

impl std::fmt::Display for MeshKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MeshKind::Random => "random",
            MeshKind::Lattice => "lattice",
        })
    }
}

impl std::str::FromStr for MeshKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(MeshKind::Random),
            "lattice" => Ok(MeshKind::Lattice),
            other => Err(Error::InvalidArgument(format!(
                "unknown mesh kind `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub n: usize,
    pub alpha: f64,
    pub seed: u64,
    pub mesh_points: usize,
    pub mesh: MeshKind,
    pub kde_bandwidth: f64,
    pub runs: usize,
    pub rounding: RoundingMode,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            n: 3000,
            alpha: 0.5,
            seed: 42,
            mesh_points: 10_000,
            mesh: MeshKind::Random,
            kde_bandwidth: 0.5,
            runs: 20,
            rounding: RoundingMode::Mode,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!(
                "n must be at least 2, got {}",
                self.n
            )));
        }
        if self.mesh_points == 0 {
            return Err(Error::InvalidArgument(
                "mesh_points must be positive".into(),
            ));
        }
        if self.runs == 0 {
            return Err(Error::InvalidArgument("runs must be positive".into()));
        }
        if !(self.kde_bandwidth > 0.0 && self.kde_bandwidth.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "kde_bandwidth must be positive, got {}",
                self.kde_bandwidth
            )));
        }
        Ok(())
    }

    /// Random stream for run `run`.
    pub fn run_rng(&self, run: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(run as u64);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arm {
    Control,
    Treated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Production {
    H0,
    H1,
}

/// Latent draws for one arm; for the treated `post` repeats `pre`.
#[derive(Debug, Clone)]
pub struct Latents {
    pub pre: PointCloud,
    pub post: PointCloud,
}

fn beta_cloud<R: Rng + ?Sized>(rng: &mut R, n: usize, a: (f64, f64), b: (f64, f64)) -> PointCloud {
    let first = Beta::new(a.0, a.1).expect("valid Beta parameters");
    let second = Beta::new(b.0, b.1).expect("valid Beta parameters");
    let mut coords = Vec::with_capacity(2 * n);
    for _ in 0..n {
        coords.push(first.sample(rng));
        coords.push(second.sample(rng));
    }
    PointCloud::uniform_flat(2, coords).expect("finite Beta draws")
}

/// Controls: Beta(3,2) × Beta(2,3), independent in each period.
/// Treated: Beta(2,3) × Beta(3,2), drawn once.
pub fn sample_latents<R: Rng + ?Sized>(
    config: &SyntheticConfig,
    arm: Arm,
    rng: &mut R,
) -> Result<Latents> {
    config.validate()?;
    Ok(match arm {
        Arm::Control => {
            let pre = beta_cloud(rng, config.n, (3.0, 2.0), (2.0, 3.0));
            let post = beta_cloud(rng, config.n, (3.0, 2.0), (2.0, 3.0));
            Latents { pre, post }
        }
        Arm::Treated => {
            let pre = beta_cloud(rng, config.n, (2.0, 3.0), (3.0, 2.0));
            Latents {
                post: pre.clone(),
                pre,
            }
        }
    })
}

pub fn apply_production(u: &[f64], which: Production, alpha: f64) -> Result<Vec<f64>> {
    if u.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: u.len(),
        });
    }
    Ok(match which {
        Production::H0 => vec![u[0] + alpha * u[1], alpha * u[0] + u[1]],
        Production::H1 => vec![u[0] - alpha * u[1], -alpha * u[0] + u[1]],
    })
}

fn produce(cloud: &PointCloud, which: Production, alpha: f64) -> Result<PointCloud> {
    cloud.map_points(|u| apply_production(u, which, alpha).expect("2-D latents"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunResult {
    pub run: usize,
    pub mad_ot: f64,
    pub mad_cic: f64,
}

/// Marginal eCDFs of one coordinate on an evaluation grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalCurve {
    pub coordinate: usize,
    pub x: Vec<f64>,
    pub truth: Vec<f64>,
    pub ot: Vec<f64>,
    pub cic: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KdeSet {
    pub truth: DensitySurface,
    pub ot: DensitySurface,
    pub cic: DensitySurface,
}

/// Joint eCDF values on the mesh of the first run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshValues {
    pub points: Vec<Vec<f64>>,
    pub truth: Vec<f64>,
    pub ot: Vec<f64>,
    pub cic: Vec<f64>,
}

/// Plot data taken from the first run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotData {
    pub marginals: Vec<MarginalCurve>,
    pub kde: KdeSet,
    pub mesh: MeshValues,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: SyntheticConfig,
    pub mad_ot: f64,
    pub mad_cic: f64,
    pub sd_ot: f64,
    pub sd_cic: f64,
    pub per_run: Vec<RunResult>,
    #[serde(skip)]
    pub plots: Option<PlotData>,
}

/// True and estimated counterfactual samples from one run.
#[derive(Debug, Clone)]
pub struct RunSamples {
    pub truth: PointCloud,
    pub ot: PointCloud,
    pub cic: PointCloud,
}

/// Simulates the four cells of one run and estimates the counterfactuals.
pub fn simulate_run(config: &SyntheticConfig, rng: &mut ChaCha8Rng) -> Result<RunSamples> {
    let control = sample_latents(config, Arm::Control, rng)?;
    let treated = sample_latents(config, Arm::Treated, rng)?;
    let a = config.alpha;
    let mu0 = produce(&control.pre, Production::H0, a)?;
    let mu1 = produce(&control.post, Production::H1, a)?;
    let mu0_star = produce(&treated.pre, Production::H0, a)?;
    let truth = produce(&treated.post, Production::H1, a)?;

    // Treated-post outcomes equal the counterfactual (no effect); only the
    // counterfactual estimates are scored.
    let mut units = Vec::with_capacity(4 * config.n);
    let cells = [
        (Group::Control, Period::Pre, &mu0),
        (Group::Control, Period::Post, &mu1),
        (Group::Treated, Period::Pre, &mu0_star),
        (Group::Treated, Period::Post, &truth),
    ];
    for (g, p, cloud) in cells {
        for (i, y) in cloud.points().enumerate() {
            let mut u = Unit::new(format!("{g}-{i}"), g, p, y.to_vec());
            if g == Group::Treated {
                u = u.with_pair(format!("t{i}"));
            }
            units.push(u);
        }
    }
    let data = PanelDataset::new(units)?;
    let (ot, _) = ot_cic_estimate(&data, config.rounding)?;
    let (cic, _) = cic_estimate(&data)?;
    Ok(RunSamples {
        truth,
        ot: ot.counterfactuals,
        cic: cic.counterfactuals,
    })
}

/// Bounding box `[lo, hi]` of the clouds, padded by `pad` on every side.
pub fn bounding_box(clouds: &[&PointCloud], pad: f64) -> (Vec<f64>, Vec<f64>) {
    let d = clouds[0].dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for c in clouds {
        for p in c.points() {
            for k in 0..d {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
    }
    (
        lo.iter().map(|v| v - pad).collect(),
        hi.iter().map(|v| v + pad).collect(),
    )
}

pub fn build_mesh<R: Rng + ?Sized>(
    kind: MeshKind,
    points: usize,
    lo: &[f64],
    hi: &[f64],
    rng: &mut R,
) -> Vec<Vec<f64>> {
    match kind {
        MeshKind::Random => (0..points)
            .map(|_| {
                lo.iter()
                    .zip(hi)
                    .map(|(a, b)| a + (b - a) * rng.random::<f64>())
                    .collect()
            })
            .collect(),
        MeshKind::Lattice => {
            let d = lo.len() as i32;
            let mut side = (points as f64).powf(1.0 / d as f64).round() as usize;
            while side.pow(d as u32) < points {
                side += 1;
            }
            let total = side.pow(d as u32);
            (0..total)
                .map(|mut idx| {
                    (0..lo.len())
                        .map(|k| {
                            let c = idx % side;
                            idx /= side;
                            lo[k] + (hi[k] - lo[k]) * (c as f64 + 0.5) / side as f64
                        })
                        .collect()
                })
                .collect()
        }
    }
}

fn plot_data(
    config: &SyntheticConfig,
    s: &RunSamples,
    lo: &[f64],
    hi: &[f64],
    mesh: Vec<Vec<f64>>,
) -> Result<PlotData> {
    let mut marginals = Vec::with_capacity(2);
    for k in 0..2 {
        let x: Vec<f64> = (0..MARGINAL_POINTS)
            .map(|i| lo[k] + (hi[k] - lo[k]) * i as f64 / (MARGINAL_POINTS - 1) as f64)
            .collect();
        let curve = |c: &PointCloud| -> Result<Vec<f64>> {
            let e = Ecdf::from_cloud(c, k)?;
            Ok(x.iter().map(|&v| e.cdf(v)).collect())
        };
        marginals.push(MarginalCurve {
            coordinate: k,
            truth: curve(&s.truth)?,
            ot: curve(&s.ot)?,
            cic: curve(&s.cic)?,
            x,
        });
    }
    let grid = Grid2::linspace(lo[0], hi[0], KDE_GRID_SIDE, lo[1], hi[1], KDE_GRID_SIDE);
    let h = config.kde_bandwidth;
    let kde = KdeSet {
        truth: kde_grid(&s.truth, h, &grid)?,
        ot: kde_grid(&s.ot, h, &grid)?,
        cic: kde_grid(&s.cic, h, &grid)?,
    };
    let mesh = MeshValues {
        truth: joint_ecdf(&s.truth, &mesh)?,
        ot: joint_ecdf(&s.ot, &mesh)?,
        cic: joint_ecdf(&s.cic, &mesh)?,
        points: mesh,
    };
    Ok(PlotData {
        marginals,
        kde,
        mesh,
    })
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs the full experiment; runs execute in parallel and are aggregated in
/// run order.
pub fn run_experiment(config: &SyntheticConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let outcomes: Vec<(RunResult, Option<PlotData>)> = (0..config.runs)
        .into_par_iter()
        .map(|run| -> Result<_> {
            let mut rng = config.run_rng(run);
            let s = simulate_run(config, &mut rng)?;
            let (lo, hi) = bounding_box(&[&s.truth, &s.ot, &s.cic], config.kde_bandwidth);
            let mesh = build_mesh(config.mesh, config.mesh_points, &lo, &hi, &mut rng);
            let result = RunResult {
                run,
                mad_ot: ecdf_mad(&s.truth, &s.ot, &mesh)?,
                mad_cic: ecdf_mad(&s.truth, &s.cic, &mesh)?,
            };
            log::debug!(
                "run {run}: mad_ot {:.5} mad_cic {:.5}",
                result.mad_ot,
                result.mad_cic
            );
            let plots = if run == 0 {
                Some(plot_data(config, &s, &lo, &hi, mesh)?)
            } else {
                None
            };
            Ok((result, plots))
        })
        .collect::<Result<_>>()?;

    let mut per_run = Vec::with_capacity(outcomes.len());
    let mut plots = None;
    for (r, p) in outcomes {
        per_run.push(r);
        if p.is_some() {
            plots = p;
        }
    }
    let (mad_ot, sd_ot) = mean_sd(&per_run.iter().map(|r| r.mad_ot).collect::<Vec<_>>());
    let (mad_cic, sd_cic) = mean_sd(&per_run.iter().map(|r| r.mad_cic).collect::<Vec<_>>());
    Ok(ExperimentReport {
        config: config.clone(),
        mad_ot,
        mad_cic,
        sd_ot,
        sd_cic,
        per_run,
        plots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn production_examples() {
        for w in [Production::H0, Production::H1] {
            assert_eq!(
                apply_production(&[0.0, 0.0], w, 0.5).unwrap(),
                vec![0.0, 0.0]
            );
        }
        assert_eq!(
            apply_production(&[1.0, 1.0], Production::H0, 0.5).unwrap(),
            vec![1.5, 1.5]
        );
        assert_eq!(
            apply_production(&[1.0, 1.0], Production::H1, 0.5).unwrap(),
            vec![0.5, 0.5]
        );
        assert!(apply_production(&[1.0], Production::H0, 0.5).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SyntheticConfig::default().validate().is_ok());
        for bad in [
            SyntheticConfig {
                alpha: 1.0,
                ..Default::default()
            },
            SyntheticConfig {
                alpha: 0.0,
                ..Default::default()
            },
            SyntheticConfig {
                n: 1,
                ..Default::default()
            },
            SyntheticConfig {
                mesh_points: 0,
                ..Default::default()
            },
            SyntheticConfig {
                runs: 0,
                ..Default::default()
            },
            SyntheticConfig {
                kde_bandwidth: -1.0,
                ..Default::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn lattice_mesh_covers_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = build_mesh(MeshKind::Lattice, 10, &[0.0, 0.0], &[1.0, 2.0], &mut rng);
        assert_eq!(m.len(), 16);
        assert!(m
            .iter()
            .all(|p| p[0] > 0.0 && p[0] < 1.0 && p[1] > 0.0 && p[1] < 2.0));
    }

    #[test]
    fn mesh_kind_round_trip() {
        for k in [MeshKind::Random, MeshKind::Lattice] {
            assert_eq!(k.to_string().parse::<MeshKind>().unwrap(), k);
        }
    }
}
