use super::cost::squared_distance;
use super::plan::{MapImages, RoundingMode, TransportMap, TransportPlan};
use crate::{Error, Result};

/// Relative tolerance under which two row masses count as tied.
const MASS_TIE_TOL: f64 = 1e-12;

/// Collapses a coupling into a map.
///
/// Mode rounding sends source `i` to `argmax_j γ_ij`, breaking ties by lower
/// cost and then lower index, so images stay in the target support.
/// Barycentric rounding sends it to `Σ_j γ_ij y_j / Σ_j γ_ij`.
///
/// Zero-weight sources carry no mass; they are sent to their nearest target.
pub fn round_to_map(plan: &TransportPlan, mode: RoundingMode) -> Result<TransportMap> {
    let source = plan.source();
    let target = plan.target();
    let n = source.len();
    let d = target.dim();

    let nearest = |i: usize| -> usize {
        let x = source.point(i);
        let mut best = 0;
        let mut best_c = f64::INFINITY;
        for j in 0..target.len() {
            let c = squared_distance(x, target.point(j));
            if c < best_c {
                best_c = c;
                best = j;
            }
        }
        best
    };

    let mut assignment = Vec::with_capacity(n);
    for i in 0..n {
        let row = plan.row(i);
        if row.is_empty() {
            if source.weights()[i] > 0.0 {
                return Err(Error::Internal(format!(
                    "source {i} has weight {} but an empty coupling row",
                    source.weights()[i]
                )));
            }
            assignment.push(nearest(i));
            continue;
        }
        let x = source.point(i);
        let mut best = row[0].1;
        let mut best_mass = row[0].2;
        let mut best_cost = squared_distance(x, target.point(best));
        for &(_, j, w) in &row[1..] {
            let c = squared_distance(x, target.point(j));
            let tol = MASS_TIE_TOL * w.max(best_mass);
            if w > best_mass + tol || ((w - best_mass).abs() <= tol && c < best_cost) {
                best = j;
                best_mass = w;
                best_cost = c;
            }
        }
        assignment.push(best);
    }

    let images = match mode {
        RoundingMode::Mode => MapImages::Indices(assignment),
        RoundingMode::Barycentric => {
            let mut v = Vec::with_capacity(n * d);
            for (i, &fallback) in assignment.iter().enumerate() {
                let row = plan.row(i);
                if row.is_empty() {
                    v.extend_from_slice(target.point(fallback));
                    continue;
                }
                let mass: f64 = row.iter().map(|e| e.2).sum();
                let mut acc = vec![0.0; d];
                for &(_, j, w) in row {
                    for (a, y) in acc.iter_mut().zip(target.point(j)) {
                        *a += w * y;
                    }
                }
                v.extend(acc.into_iter().map(|a| a / mass));
            }
            MapImages::Vectors(v)
        }
    };

    Ok(TransportMap::new(
        plan.source_arc().clone(),
        plan.target_arc().clone(),
        mode,
        images,
    ))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::PointCloud;

    #[test]
    fn split_row_mode_and_barycentre() {
        let a = Arc::new(PointCloud::uniform(vec![vec![4.0]]).unwrap());
        let b = Arc::new(PointCloud::new(vec![vec![0.0], vec![10.0]], vec![0.3, 0.7]).unwrap());
        let plan = TransportPlan::from_entries(a, b, vec![(0, 0, 0.3), (0, 1, 0.7)]).unwrap();
        let mode = round_to_map(&plan, RoundingMode::Mode).unwrap();
        assert_eq!(mode.assignment(), Some(&[1usize][..]));
        assert_eq!(mode.image(0), &[10.0]);
        let bary = round_to_map(&plan, RoundingMode::Barycentric).unwrap();
        assert!((bary.image(0)[0] - 7.0).abs() < 1e-12);
        assert_eq!(bary.assignment(), None);
    }

    #[test]
    fn permutation_plan_both_modes_agree() {
        let a = Arc::new(PointCloud::uniform(vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap());
        let b = Arc::new(PointCloud::uniform(vec![vec![5.0, 5.0], vec![-5.0, 2.0]]).unwrap());
        let plan = TransportPlan::from_entries(a, b, vec![(0, 1, 0.5), (1, 0, 0.5)]).unwrap();
        let mode = round_to_map(&plan, RoundingMode::Mode).unwrap();
        let bary = round_to_map(&plan, RoundingMode::Barycentric).unwrap();
        assert_eq!(mode.assignment(), Some(&[1usize, 0][..]));
        for i in 0..2 {
            assert_eq!(mode.image(i), bary.image(i));
        }
    }

    #[test]
    fn equal_masses_prefer_cheaper_then_lower_index() {
        let a = Arc::new(PointCloud::uniform(vec![vec![0.0]]).unwrap());
        let b = Arc::new(
            PointCloud::uniform(vec![vec![3.0], vec![1.0], vec![-1.0], vec![-3.0]]).unwrap(),
        );
        let plan =
            TransportPlan::from_entries(a, b, (0..4).map(|j| (0, j, 0.25)).collect()).unwrap();
        let map = round_to_map(&plan, RoundingMode::Mode).unwrap();
        // targets 1 and 2 are equally close; lower index wins
        assert_eq!(map.assignment(), Some(&[1usize][..]));
    }

    #[test]
    fn empty_row_with_mass_is_inconsistent() {
        let a = Arc::new(PointCloud::uniform(vec![vec![0.0], vec![1.0]]).unwrap());
        let b = Arc::new(PointCloud::uniform(vec![vec![0.0]]).unwrap());
        let plan = TransportPlan::from_entries(a, b, vec![(0, 0, 1.0)]).unwrap();
        assert!(matches!(
            round_to_map(&plan, RoundingMode::Mode),
            Err(Error::Internal(_))
        ));
    }
}
