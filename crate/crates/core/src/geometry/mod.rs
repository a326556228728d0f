//! Point clouds, exact nearest-neighbor queries, and the fill and separation
//! distances of a site set.

mod io;
mod kdtree;

pub use io::{parse_points, read_point_file, write_points, PointData};

use crate::error::{check_dim, check_finite, Error, Result};
use kdtree::KdTree;

/// An immutable set of sites in ℝᵈ with a spatial index.
///
/// Duplicates are kept as given.
#[derive(Debug, Clone)]
pub struct PointCloud {
    coords: Vec<f64>,
    dim: usize,
    tree: KdTree,
}

impl PointCloud {
    /// Builds a cloud from a flat row-major coordinate buffer.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("point dimension must be >= 1".into()));
        }
        if coords.is_empty() {
            return Err(Error::InvalidArgument("point cloud must contain at least one point".into()));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidArgument(format!(
                "coordinate buffer of length {} is not a multiple of dimension {dim}",
                coords.len()
            )));
        }
        check_finite(&coords, "point cloud")?;
        let tree = KdTree::build(&coords, dim);
        Ok(Self { coords, dim, tree })
    }

    pub fn from_points<P: AsRef<[f64]>>(points: &[P]) -> Result<Self> {
        let dim = points
            .first()
            .map(|p| p.as_ref().len())
            .ok_or_else(|| Error::InvalidArgument("point cloud must contain at least one point".into()))?;
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            check_dim(dim, p.as_ref().len())?;
            coords.extend_from_slice(p.as_ref());
        }
        Self::from_flat(dim, coords)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    /// Always false; a cloud holds at least one point.
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// The cloud formed by the first `n` points.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.len() {
            return Err(Error::InvalidArgument(format!("prefix length {n} outside 1..={}", self.len())));
        }
        Self::from_flat(self.dim, self.coords[..n * self.dim].to_vec())
    }

    /// The `k` nearest sites to `z` as (index, distance), ascending by
    /// distance with ties going to the lower index.
    pub fn knn(&self, z: &[f64], k: usize) -> Result<Vec<(usize, f64)>> {
        check_dim(self.dim, z.len())?;
        check_finite(z, "query point")?;
        if k == 0 || k > self.len() {
            return Err(Error::InvalidArgument(format!("neighbor count {k} outside 1..={}", self.len())));
        }
        Ok(self.tree.knn(&self.coords, self.dim, z, k).into_iter().map(|(i, d2)| (i, d2.sqrt())).collect())
    }

    /// Distance from `z` to its nearest site.
    pub fn nearest_distance(&self, z: &[f64]) -> Result<f64> {
        Ok(self.knn(z, 1)?[0].1)
    }
}

/// Separation distance: half the smallest pairwise distance between sites.
pub fn separation_distance(cloud: &PointCloud) -> Result<f64> {
    if cloud.len() < 2 {
        return Err(Error::InvalidArgument("separation distance needs at least two points".into()));
    }
    let mut min = f64::INFINITY;
    for p in cloud.iter() {
        // the second neighbor is the closest other site (or a duplicate at 0)
        let nn = cloud.knn(p, 2)?;
        min = min.min(nn[1].1);
    }
    Ok(0.5 * min)
}

/// Fill distance of `cloud` measured on a finite probe set: the largest
/// distance from a probe point to its nearest site.
///
/// This is a lower bound for the supremum over the continuous domain and
/// converges to it as the probe set is refined.
pub fn fill_distance<P: AsRef<[f64]>>(cloud: &PointCloud, probe: &[P]) -> Result<f64> {
    if probe.is_empty() {
        return Err(Error::InvalidArgument("fill distance probe set is empty".into()));
    }
    probe.iter().try_fold(0.0f64, |acc, z| Ok(acc.max(cloud.nearest_distance(z.as_ref())?)))
}

/// Regular tensor grid in the plane, x varying fastest.
pub fn grid_2d(nx: usize, ny: usize, x: (f64, f64), y: (f64, f64)) -> Result<Vec<[f64; 2]>> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument("grid needs at least one point per axis".into()));
    }
    if !(x.0.is_finite() && x.1.is_finite() && y.0.is_finite() && y.1.is_finite()) {
        return Err(Error::NonFinite("grid bounds"));
    }
    let axis = |n: usize, (lo, hi): (f64, f64)| -> Vec<f64> {
        if n == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        }
    };
    let xs = axis(nx, x);
    let ys = axis(ny, y);
    Ok(ys.iter().flat_map(|&yv| xs.iter().map(move |&xv| [xv, yv])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid_3x3() -> PointCloud {
        let pts: Vec<[f64; 2]> = grid_2d(3, 3, (0.0, 2.0), (0.0, 2.0)).unwrap();
        PointCloud::from_points(&pts).unwrap()
    }

    #[test]
    fn knn_single_point() {
        let cloud = PointCloud::from_points(&[[0.0, 0.0]]).unwrap();
        let r = cloud.knn(&[1.0, 1.0], 1).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].0, 0);
        assert!((r[0].1 - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn knn_self_is_nearest() {
        let cloud = unit_grid_3x3();
        let r = cloud.knn(&[0.0, 0.0], 1).unwrap();
        assert_eq!(r, vec![(0, 0.0)]);
    }

    #[test]
    fn knn_ties_prefer_lower_index() {
        let cloud = unit_grid_3x3();
        // center (1,1) is index 4; its four axis neighbors are at distance 1
        let r = cloud.knn(&[1.0, 1.0], 5).unwrap();
        let idx: Vec<usize> = r.iter().map(|h| h.0).collect();
        assert_eq!(idx, vec![4, 1, 3, 5, 7]);
    }

    #[test]
    fn knn_errors() {
        let cloud = unit_grid_3x3();
        assert!(cloud.knn(&[0.0, 0.0], 10).is_err());
        assert!(cloud.knn(&[0.0, 0.0], 0).is_err());
        assert!(matches!(cloud.knn(&[0.0], 1), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn separation_examples() {
        let c = PointCloud::from_points(&[[0.0, 0.0], [0.2, 0.0]]).unwrap();
        assert!((separation_distance(&c).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(separation_distance(&unit_grid_3x3()).unwrap(), 0.5);
        let single = PointCloud::from_points(&[[0.0, 0.0]]).unwrap();
        assert!(separation_distance(&single).is_err());
    }

    #[test]
    fn separation_with_duplicates_is_zero() {
        let c = PointCloud::from_points(&[[0.0, 0.0], [0.5, 0.5], [0.0, 0.0]]).unwrap();
        assert_eq!(separation_distance(&c).unwrap(), 0.0);
    }

    #[test]
    fn fill_examples() {
        let c = PointCloud::from_points(&[[0.0, 0.0]]).unwrap();
        let corners = [[-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0], [1.0, 1.0]];
        assert!((fill_distance(&c, &corners).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let g = grid_2d(5, 4, (-1.0, 1.0), (0.0, 1.0)).unwrap();
        let same = PointCloud::from_points(&g).unwrap();
        assert_eq!(fill_distance(&same, &g).unwrap(), 0.0);
        let empty: Vec<[f64; 2]> = Vec::new();
        assert!(fill_distance(&same, &empty).is_err());
    }

    #[test]
    fn grid_layout() {
        let g = grid_2d(3, 2, (-1.0, 1.0), (0.0, 1.0)).unwrap();
        assert_eq!(g, vec![[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0], [-1.0, 1.0], [0.0, 1.0], [1.0, 1.0]]);
    }

    #[test]
    fn rejects_bad_clouds() {
        assert!(PointCloud::from_flat(2, vec![]).is_err());
        assert!(PointCloud::from_flat(2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(PointCloud::from_flat(2, vec![1.0, f64::NAN]).is_err());
        assert!(PointCloud::from_points(&[vec![0.0, 0.0], vec![1.0]]).is_err());
    }
}
