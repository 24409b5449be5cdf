use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::partition::Partition;
use crate::rng::{rng_from_seed, split, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub n_init: usize,
    pub max_iter: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            n_init: 10,
            max_iter: 300,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub partition: Partition,
    pub centroids: DenseMatrix,
    /// Within-cluster sum of squared distances.
    pub wcss: f64,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn plus_plus_init(points: &DenseMatrix, k: usize, rng: &mut Rng) -> DenseMatrix {
    let (n, d) = points.shape();
    let mut centroids = DenseMatrix::zeros(k, d);
    let first = rng.random_range(0..n);
    centroids.row_mut(0).copy_from_slice(points.row(first));
    let mut closest: Vec<f64> = (0..n).map(|i| sq_dist(points.row(i), centroids.row(0))).collect();
    for c in 1..k {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in closest.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.row_mut(c).copy_from_slice(points.row(pick));
        for (i, cl) in closest.iter_mut().enumerate() {
            *cl = cl.min(sq_dist(points.row(i), centroids.row(c)));
        }
    }
    centroids
}

fn nearest(point: &[f64], centroids: &DenseMatrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centroids.rows() {
        let d = sq_dist(point, centroids.row(c));
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn update_centroids(points: &DenseMatrix, labels: &[usize], k: usize) -> DenseMatrix {
    let d = points.cols();
    let mut centroids = DenseMatrix::zeros(k, d);
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (c, &x) in centroids.row_mut(l).iter_mut().zip(points.row(i)) {
            *c += x;
        }
    }
    for (c, &count) in counts.iter().enumerate() {
        if count > 0 {
            centroids.row_mut(c).iter_mut().for_each(|x| *x /= count as f64);
        }
    }
    centroids
}

/// Move the point farthest from its centroid (among clusters with more than
/// one member) into each empty cluster.
fn repair_empty(points: &DenseMatrix, labels: &mut [usize], centroids: &mut DenseMatrix, dist: &mut [f64]) {
    let k = centroids.rows();
    let mut counts = vec![0usize; k];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    for empty in 0..k {
        if counts[empty] > 0 {
            continue;
        }
        let victim = (0..labels.len())
            .filter(|&i| counts[labels[i]] > 1)
            .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)));
        let Some(i) = victim else { break };
        counts[labels[i]] -= 1;
        counts[empty] = 1;
        labels[i] = empty;
        dist[i] = 0.0;
        centroids.row_mut(empty).copy_from_slice(points.row(i));
    }
}

fn lloyd(points: &DenseMatrix, k: usize, max_iter: usize, rng: &mut Rng) -> (Vec<usize>, DenseMatrix, f64, usize) {
    let n = points.rows();
    let mut centroids = plus_plus_init(points, k, rng);
    let mut labels = vec![usize::MAX; n];
    let mut dist = vec![0.0; n];
    let mut iterations = 0;
    for it in 0..max_iter.max(1) {
        iterations = it + 1;
        let mut changed = false;
        for i in 0..n {
            let (c, d) = nearest(points.row(i), &centroids);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
            dist[i] = d;
        }
        repair_empty(points, &mut labels, &mut centroids, &mut dist);
        centroids = update_centroids(points, &labels, k);
        if !changed {
            break;
        }
    }
    let wcss = (0..n).map(|i| sq_dist(points.row(i), centroids.row(labels[i]))).sum();
    (labels, centroids, wcss, iterations)
}

/// k-means++ seeded Lloyd iterations, best of `n_init` restarts by WCSS.
/// Restart `t` draws from the stream `split(seed, t)`.
pub fn kmeans(points: &DenseMatrix, k: usize, seed: u64, cfg: KMeansConfig) -> Result<KMeansResult> {
    let n = points.rows();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "cannot form {k} clusters from {n} points"
        )));
    }
    if points.cols() == 0 {
        return Err(Error::InvalidArgument("points have no coordinates".into()));
    }
    if !points.is_finite() {
        return Err(Error::NonFinite("k-means input".into()));
    }
    let mut best: Option<(Vec<usize>, DenseMatrix, f64, usize)> = None;
    for t in 0..cfg.n_init.max(1) {
        let mut rng = rng_from_seed(split(seed, t as u64));
        let run = lloyd(points, k, cfg.max_iter, &mut rng);
        if best.as_ref().is_none_or(|b| run.2 < b.2) {
            best = Some(run);
        }
    }
    let (labels, centroids, wcss, iterations) = best.expect("at least one restart");
    Ok(KMeansResult {
        partition: Partition::new(labels)?,
        centroids,
        wcss,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(values: &[f64]) -> DenseMatrix {
        DenseMatrix::from_vec(values.len(), 1, values.to_vec()).unwrap()
    }

    #[test]
    fn separated_pairs() {
        let pts = DenseMatrix::from_rows(&[
            vec![0.0, 0.0],
            vec![10.0, 10.0],
            vec![0.1, 0.0],
            vec![10.0, 10.1],
        ])
        .unwrap();
        let r = kmeans(&pts, 2, 1, KMeansConfig::default()).unwrap();
        let l = r.partition.labels();
        assert_eq!(l[0], l[2]);
        assert_eq!(l[1], l[3]);
        assert_ne!(l[0], l[1]);
    }

    #[test]
    fn identical_points() {
        let pts = column(&[3.0; 5]);
        let r = kmeans(&pts, 1, 0, KMeansConfig::default()).unwrap();
        assert_eq!(r.wcss, 0.0);
        assert_eq!(r.partition.k(), 1);
        // more clusters than distinct points still yields non-empty clusters
        let r = kmeans(&pts, 3, 0, KMeansConfig::default()).unwrap();
        assert_eq!(r.partition.k(), 3);
        assert!(r.partition.sizes().iter().all(|&s| s > 0));
    }

    #[test]
    fn matches_optimal_two_partition() {
        let xs = [0.0, 0.1, 10.0, 10.1];
        let r = kmeans(&column(&xs), 2, 4, KMeansConfig::default()).unwrap();
        // enumerate all non-trivial 2-partitions for the optimum
        let mut best = f64::INFINITY;
        for mask in 1u32..(1 << 4) - 1 {
            let mut cost = 0.0;
            for side in [true, false] {
                let part: Vec<f64> = (0..4).filter(|&i| (mask & (1 << i) != 0) == side).map(|i| xs[i]).collect();
                let mean = part.iter().sum::<f64>() / part.len() as f64;
                cost += part.iter().map(|x| (x - mean).powi(2)).sum::<f64>();
            }
            best = best.min(cost);
        }
        assert!((r.wcss - best).abs() < 1e-12);
        let l = r.partition.labels();
        assert!(l[0] == l[1] && l[2] == l[3] && l[0] != l[2]);
    }

    #[test]
    fn rejects_too_many_clusters() {
        assert!(kmeans(&column(&[1.0, 2.0]), 3, 0, KMeansConfig::default()).is_err());
    }

    #[test]
    fn deterministic() {
        let pts = DenseMatrix::from_vec(40, 2, (0..80).map(|i| ((i * 37) % 11) as f64).collect()).unwrap();
        let a = kmeans(&pts, 4, 9, KMeansConfig::default()).unwrap();
        let b = kmeans(&pts, 4, 9, KMeansConfig::default()).unwrap();
        assert_eq!(a.partition, b.partition);
        assert_eq!(a.wcss, b.wcss);
    }
}
