//! Counterfactual estimation for treatment/control, pre/post designs.
//!
//! The crate is organised around four layers:
//!
//! - [`ot`]: exact discrete optimal transport under squared-Euclidean cost
//!   (network simplex on the transportation polytope, a sorted 1-D path,
//!   plan-to-map rounding, and monotonicity checkers).
//! - [`estimators`]: difference-in-differences, coordinatewise
//!   changes-in-changes, and the transport-based multivariate
//!   changes-in-changes estimator, together with effect summaries.
//! - [`synthetic`]: the two-dimensional Beta-latent experiment with linear
//!   co-monotone production functions and its eCDF recovery metric.
//! - [`ck`]: loading and analysing the Card & Krueger fast-food survey.
//!
//! ```
//! use otcic::{PointCloud, ot};
//!
//! let a = PointCloud::uniform(vec![vec![0.0], vec![1.0]]).unwrap();
//! let b = PointCloud::uniform(vec![vec![10.0], vec![11.0]]).unwrap();
//! let plan = ot::solve_ot(&a, &b).unwrap();
//! assert!((plan.cost() - 100.0).abs() < 1e-9);
//! ```

pub mod ck;
mod error;
pub mod estimators;
pub mod io;
pub mod ot;
mod points;
pub mod synthetic;

pub use error::{Error, Result};
pub use points::PointCloud;
