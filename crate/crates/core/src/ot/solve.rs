use std::cmp::Ordering;
use std::sync::Arc;

use super::cost::squared_distance;
use super::network_simplex::{Flow, NetworkSimplex};
use super::plan::TransportPlan;
use crate::points::WEIGHT_SUM_TOL;
use crate::{Error, PointCloud, Result};

fn check_weights(c: &PointCloud) -> Result<()> {
    let total: f64 = c.weights().iter().sum();
    if (total - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::InvalidWeights(format!(
            "weights sum to {total}, not 1"
        )));
    }
    Ok(())
}

/// Indices with positive weight.
fn support(c: &PointCloud) -> Vec<usize> {
    (0..c.len()).filter(|&i| c.weights()[i] > 0.0).collect()
}

fn all_equal(c: &PointCloud, idx: &[usize]) -> bool {
    let w0 = c.weights()[idx[0]];
    idx.iter()
        .all(|&i| (c.weights()[i] - w0).abs() <= 1e-12 * w0)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Exact optimal coupling between two clouds under squared-Euclidean cost.
///
/// Solves the transportation LP with the network simplex method and returns
/// a vertex of the polytope; for uniform weights and equal sizes the coupling
/// is a scaled permutation. Zero-weight points are removed before solving and
/// come back as empty rows or columns.
pub fn solve_ot(a: &PointCloud, b: &PointCloud) -> Result<TransportPlan> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    check_weights(a)?;
    check_weights(b)?;

    let rows = support(a);
    let cols = support(b);
    let m = cols.len();
    let mut costs = vec![0.0; rows.len() * m];
    for (r, &i) in rows.iter().enumerate() {
        let x = a.point(i);
        for (c, &j) in cols.iter().enumerate() {
            costs[r * m + c] = squared_distance(x, b.point(j));
        }
    }

    let entries: Vec<(usize, usize, f64)> = if all_equal(a, &rows) && all_equal(b, &cols) {
        // Uniform marginals: integer supplies make every pivot exact.
        let (n1, m1) = (rows.len() as u64, cols.len() as u64);
        let g = gcd(n1, m1);
        let supply = vec![(m1 / g) as i64; rows.len()];
        let demand = vec![(n1 / g) as i64; cols.len()];
        let total = (n1 / g * m1) as f64;
        let sol = NetworkSimplex::new(&supply, &demand, &costs).run(0.0)?;
        sol.flows
            .into_iter()
            .map(|(r, c, f)| (rows[r], cols[c], f.to_f64() / total))
            .collect()
    } else {
        let sa: f64 = rows.iter().map(|&i| a.weights()[i]).sum();
        let sb: f64 = cols.iter().map(|&j| b.weights()[j]).sum();
        let supply: Vec<f64> = rows.iter().map(|&i| a.weights()[i] / sa).collect();
        let demand: Vec<f64> = cols.iter().map(|&j| b.weights()[j] / sb).collect();
        let sol = NetworkSimplex::new(&supply, &demand, &costs).run(1e-9)?;
        sol.flows
            .into_iter()
            .map(|(r, c, f)| (rows[r], cols[c], f))
            .collect()
    };

    TransportPlan::from_entries(Arc::new(a.clone()), Arc::new(b.clone()), entries)
}

fn sorted_order(c: &PointCloud) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..c.len()).collect();
    idx.sort_by(|&i, &j| {
        c.point(i)[0]
            .partial_cmp(&c.point(j)[0])
            .unwrap_or(Ordering::Equal)
            .then(i.cmp(&j))
    });
    idx
}

/// North-west corner rule on two mass sequences.
fn northwest<F: Flow>(sa: &[F], sb: &[F]) -> Vec<(usize, usize, F)> {
    let mut out = Vec::with_capacity(sa.len() + sb.len());
    let (mut i, mut j) = (0, 0);
    let (mut ra, mut rb) = (sa[0], sb[0]);
    while i < sa.len() && j < sb.len() {
        let mass = if ra < rb { ra } else { rb };
        if mass > F::ZERO {
            out.push((i, j, mass));
        }
        ra = ra - mass;
        rb = rb - mass;
        if ra.partial_cmp(&F::ZERO) != Some(Ordering::Greater) {
            i += 1;
            if i < sa.len() {
                ra = sa[i];
            }
        }
        if rb.partial_cmp(&F::ZERO) != Some(Ordering::Greater) {
            j += 1;
            if j < sb.len() {
                rb = sb[j];
            }
        }
    }
    out
}

/// Optimal coupling of two one-dimensional clouds by the quantile coupling:
/// both supports are sorted and matched with the north-west corner rule.
pub fn solve_ot_1d(a: &PointCloud, b: &PointCloud) -> Result<TransportPlan> {
    if a.dim() != 1 {
        return Err(Error::NotOneDimensional(a.dim()));
    }
    if b.dim() != 1 {
        return Err(Error::NotOneDimensional(b.dim()));
    }
    check_weights(a)?;
    check_weights(b)?;

    let oa = sorted_order(a);
    let ob = sorted_order(b);
    let rows: Vec<usize> = oa.into_iter().filter(|&i| a.weights()[i] > 0.0).collect();
    let cols: Vec<usize> = ob.into_iter().filter(|&j| b.weights()[j] > 0.0).collect();

    let entries: Vec<(usize, usize, f64)> = if all_equal(a, &rows) && all_equal(b, &cols) {
        let (n1, m1) = (rows.len() as u64, cols.len() as u64);
        let g = gcd(n1, m1);
        let total = (n1 / g * m1) as f64;
        let sa = vec![(m1 / g) as i64; rows.len()];
        let sb = vec![(n1 / g) as i64; cols.len()];
        northwest(&sa, &sb)
            .into_iter()
            .map(|(r, c, f)| (rows[r], cols[c], f as f64 / total))
            .collect()
    } else {
        let sa: Vec<f64> = rows.iter().map(|&i| a.weights()[i]).collect();
        let sb: Vec<f64> = cols.iter().map(|&j| b.weights()[j]).collect();
        northwest(&sa, &sb)
            .into_iter()
            .map(|(r, c, f)| (rows[r], cols[c], f))
            .collect()
    };

    TransportPlan::from_entries(Arc::new(a.clone()), Arc::new(b.clone()), entries)
}
