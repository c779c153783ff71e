use std::sync::Arc;

use super::cost::{compensated_sum, cost_matrix};
use super::plan::TransportPlan;
use crate::{Error, PointCloud, Result};

const MAX_BRUTE_FORCE: usize = 8;

/// Exhaustive optimal matching for small uniform equal-size clouds.
///
/// Enumerates all `n!` permutations; used as a test oracle for [`super::solve_ot`].
pub fn brute_force_ot(a: &PointCloud, b: &PointCloud) -> Result<TransportPlan> {
    let n = a.len();
    if n != b.len() {
        return Err(Error::InvalidArgument(format!(
            "brute force needs equal sizes, got {n} and {}",
            b.len()
        )));
    }
    if n > MAX_BRUTE_FORCE {
        return Err(Error::InvalidArgument(format!(
            "brute force limited to {MAX_BRUTE_FORCE} points, got {n}"
        )));
    }
    if !a.is_uniform() || !b.is_uniform() {
        return Err(Error::InvalidWeights(
            "brute force needs uniform weights".into(),
        ));
    }
    let costs = cost_matrix(a, b)?;

    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_cost = f64::INFINITY;
    permute(&mut perm, 0, &mut |p| {
        let c = compensated_sum(p.iter().enumerate().map(|(i, &j)| costs.get(i, j)));
        if c < best_cost {
            best_cost = c;
            best.copy_from_slice(p);
        }
    });

    let w = 1.0 / n as f64;
    let entries = best.iter().enumerate().map(|(i, &j)| (i, j, w)).collect();
    TransportPlan::from_entries(Arc::new(a.clone()), Arc::new(b.clone()), entries)
}

fn permute<F: FnMut(&[usize])>(p: &mut [usize], k: usize, visit: &mut F) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, visit);
        p.swap(k, i);
    }
}
