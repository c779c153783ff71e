use crate::{Error, PointCloud, Result};

/// Fraction of `sample` dominated coordinatewise by each mesh point.
///
/// Two-dimensional inputs use a sweep over the first coordinate with a
/// Fenwick tree on second-coordinate ranks; other dimensions fall back to a
/// direct scan.
pub fn joint_ecdf(sample: &PointCloud, mesh: &[Vec<f64>]) -> Result<Vec<f64>> {
    let d = sample.dim();
    if let Some(z) = mesh.iter().find(|z| z.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: z.len(),
        });
    }
    let n = sample.len() as f64;
    if d != 2 {
        return Ok(mesh
            .iter()
            .map(|z| {
                sample
                    .points()
                    .filter(|p| p.iter().zip(z).all(|(a, b)| a <= b))
                    .count() as f64
                    / n
            })
            .collect());
    }

    let mut ys: Vec<f64> = sample.points().map(|p| p[1]).collect();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let rank = |y: f64| ys.partition_point(|&v| v < y);

    let mut pts: Vec<(f64, usize)> = sample.points().map(|p| (p[0], rank(p[1]))).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut order: Vec<usize> = (0..mesh.len()).collect();
    order.sort_by(|&i, &j| mesh[i][0].total_cmp(&mesh[j][0]));

    let mut tree = vec![0u32; ys.len() + 1];
    let mut out = vec![0.0; mesh.len()];
    let mut next = 0;
    for &m in &order {
        let z = &mesh[m];
        while next < pts.len() && pts[next].0 <= z[0] {
            let mut k = pts[next].1 + 1;
            while k < tree.len() {
                tree[k] += 1;
                k += k & k.wrapping_neg();
            }
            next += 1;
        }
        // number of inserted points with y <= z[1]
        let mut k = ys.partition_point(|&v| v <= z[1]);
        let mut count = 0u32;
        while k > 0 {
            count += tree[k];
            k &= k - 1;
        }
        out[m] = count as f64 / n;
    }
    Ok(out)
}

/// Mean over the mesh of `|F̂_a(z) − F̂_b(z)|` for joint empirical CDFs.
pub fn ecdf_mad(a: &PointCloud, b: &PointCloud, mesh: &[Vec<f64>]) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if mesh.is_empty() {
        return Err(Error::Empty("eCDF mesh has no points".into()));
    }
    let fa = joint_ecdf(a, mesh)?;
    let fb = joint_ecdf(b, mesh)?;
    Ok(fa.iter().zip(&fb).map(|(x, y)| (x - y).abs()).sum::<f64>() / mesh.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_have_zero_mad() {
        let a = PointCloud::uniform(vec![vec![0.0, 1.0], vec![0.5, 0.2]]).unwrap();
        let mesh = vec![vec![0.3, 0.3], vec![1.0, 1.0], vec![-1.0, 0.0]];
        assert_eq!(ecdf_mad(&a, &a, &mesh).unwrap(), 0.0);
    }

    #[test]
    fn separated_points() {
        let a = PointCloud::uniform(vec![vec![0.0, 0.0]]).unwrap();
        let b = PointCloud::uniform(vec![vec![1.0, 1.0]]).unwrap();
        assert_eq!(ecdf_mad(&a, &b, &[vec![0.5, 0.5]]).unwrap(), 1.0);
    }

    #[test]
    fn boundary_points_are_included() {
        let a = PointCloud::uniform(vec![vec![1.0, 1.0], vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        let f = joint_ecdf(&a, &[vec![1.0, 1.0], vec![1.0, 2.0], vec![2.0, 2.0]]).unwrap();
        assert_eq!(f, vec![1.0 / 3.0, 2.0 / 3.0, 1.0]);
    }

    #[test]
    fn rejects_empty_mesh() {
        let a = PointCloud::uniform(vec![vec![0.0, 0.0]]).unwrap();
        assert!(ecdf_mad(&a, &a, &[]).is_err());
    }
}
