//! Seeded Lloyd's k-means with k-means++ initialization.

use rand::distr::{Distribution, weighted::WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::PixelFeatureMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Convergence bound on the largest centroid shift (L2).
    pub tol: f64,
    /// Independent k-means++ restarts; the lowest final inertia wins.
    pub n_init: usize,
}

impl KMeansParams {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            ..Self::default()
        }
    }
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            k: 3,
            seed: 0,
            max_iter: 100,
            tol: 1e-4,
            n_init: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub k: usize,
    pub dim: usize,
    pub labels: Vec<usize>,
    /// Row-major `k x dim`.
    pub centroids: Vec<f64>,
    pub inertia: f64,
    pub iterations: usize,
    /// Objective after every assignment step of the winning restart.
    pub inertia_trace: Vec<f64>,
}

impl KMeansResult {
    pub fn centroid(&self, c: usize) -> &[f64] {
        &self.centroids[c * self.dim..(c + 1) * self.dim]
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index and squared distance of the nearest centroid; ties go to the lowest index.
#[inline]
pub(crate) fn nearest(point: &[f64], centroids: &[f64], dim: usize) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.chunks_exact(dim).enumerate() {
        let d = sq_dist(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn init_plus_plus(data: &PixelFeatureMatrix, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (n, dim) = (data.n(), data.dim());
    let mut centroids = Vec::with_capacity(k * dim);
    centroids.extend_from_slice(data.row(rng.random_range(0..n)));
    let mut d2: Vec<f64> = data.rows().map(|p| sq_dist(p, &centroids[..dim])).collect();

    for _ in 1..k {
        let next = match WeightedIndex::new(&d2) {
            Ok(dist) => dist.sample(rng),
            // every point coincides with a chosen centroid
            Err(_) => rng.random_range(0..n),
        };
        let start = centroids.len();
        centroids.extend_from_slice(data.row(next));
        let fresh = &centroids[start..start + dim];
        for (d, p) in d2.iter_mut().zip(data.rows()) {
            *d = d.min(sq_dist(p, fresh));
        }
    }
    centroids
}

fn assign(data: &PixelFeatureMatrix, centroids: &[f64], labels: &mut [usize], dists: &mut [f64]) {
    let dim = data.dim();
    for ((p, l), d) in data.rows().zip(labels.iter_mut()).zip(dists.iter_mut()) {
        let (c, dd) = nearest(p, centroids, dim);
        *l = c;
        *d = dd;
    }
}

/// Moves each empty cluster onto the point farthest from its current centroid.
fn reseed_empty(
    data: &PixelFeatureMatrix,
    k: usize,
    centroids: &mut [f64],
    labels: &mut [usize],
    dists: &mut [f64],
) {
    let dim = data.dim();
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    for c in 0..k {
        if sizes[c] > 0 {
            continue;
        }
        let donor = (0..labels.len())
            .filter(|&i| sizes[labels[i]] > 1)
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if dists[b] >= dists[i] => Some(b),
                _ => Some(i),
            });
        let Some(i) = donor else { break };
        sizes[labels[i]] -= 1;
        sizes[c] = 1;
        labels[i] = c;
        dists[i] = 0.0;
        centroids[c * dim..(c + 1) * dim].copy_from_slice(data.row(i));
    }
}

/// Means of the assigned points in a fixed (point-index) order; empty clusters keep their centroid.
fn update_centroids(data: &PixelFeatureMatrix, k: usize, labels: &[usize], old: &[f64]) -> Vec<f64> {
    let dim = data.dim();
    let mut sums = vec![0.0; k * dim];
    let mut counts = vec![0usize; k];
    for (p, &l) in data.rows().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l * dim..(l + 1) * dim].iter_mut().zip(p) {
            *s += v;
        }
    }
    for c in 0..k {
        let slot = &mut sums[c * dim..(c + 1) * dim];
        if counts[c] == 0 {
            slot.copy_from_slice(&old[c * dim..(c + 1) * dim]);
        } else {
            slot.iter_mut().for_each(|s| *s /= counts[c] as f64);
        }
    }
    sums
}

/// Single-point transfers (Hartigan): moves a point whenever that lowers the
/// objective once both affected means are updated. Lloyd fixed points can
/// still admit such moves; the result of this pass cannot. Returns whether
/// anything moved; `centroids` are left as exact means of `labels`.
fn hartigan_refine(
    data: &PixelFeatureMatrix,
    k: usize,
    labels: &mut [usize],
    centroids: &mut Vec<f64>,
    max_passes: usize,
) -> bool {
    let dim = data.dim();
    let mut counts = vec![0usize; k];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    *centroids = update_centroids(data, k, labels, centroids);
    let mut any = false;
    for _ in 0..max_passes {
        let mut moved = false;
        for (i, p) in data.rows().enumerate() {
            let from = labels[i];
            let nf = counts[from] as f64;
            if counts[from] < 2 {
                continue;
            }
            let removal = nf / (nf - 1.0) * sq_dist(p, &centroids[from * dim..(from + 1) * dim]);
            let mut best = (from, removal);
            for to in (0..k).filter(|&c| c != from) {
                let nt = counts[to] as f64;
                let addition = nt / (nt + 1.0) * sq_dist(p, &centroids[to * dim..(to + 1) * dim]);
                if addition < best.1 {
                    best = (to, addition);
                }
            }
            let (to, addition) = best;
            // require a clear gain so rounding cannot cause cycling
            if to == from || addition >= removal * (1.0 - 1e-12) {
                continue;
            }
            let nt = counts[to] as f64;
            for d in 0..dim {
                let cf = &mut centroids[from * dim + d];
                *cf = (*cf * nf - p[d]) / (nf - 1.0);
                let ct = &mut centroids[to * dim + d];
                *ct = (*ct * nt + p[d]) / (nt + 1.0);
            }
            counts[from] -= 1;
            counts[to] += 1;
            labels[i] = to;
            moved = true;
        }
        if !moved {
            break;
        }
        any = true;
        *centroids = update_centroids(data, k, labels, centroids);
    }
    any
}

fn lloyd(data: &PixelFeatureMatrix, params: &KMeansParams, rng: &mut ChaCha8Rng) -> KMeansResult {
    let (n, dim, k) = (data.n(), data.dim(), params.k);
    let mut centroids = init_plus_plus(data, k, rng);
    let mut labels = vec![0usize; n];
    let mut dists = vec![0.0; n];
    let mut trace = Vec::new();
    let mut iterations = 0;

    for _ in 0..params.max_iter {
        iterations += 1;
        assign(data, &centroids, &mut labels, &mut dists);
        reseed_empty(data, k, &mut centroids, &mut labels, &mut dists);
        trace.push(dists.iter().sum());
        let next = update_centroids(data, k, &labels, &centroids);
        let shift = next
            .chunks_exact(dim)
            .zip(centroids.chunks_exact(dim))
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = next;
        if shift <= params.tol {
            break;
        }
    }

    if hartigan_refine(data, k, &mut labels, &mut centroids, params.max_iter) {
        assign(data, &centroids, &mut labels, &mut dists);
        trace.push(dists.iter().sum());
    }

    // Final labels always agree with the returned centroids.
    assign(data, &centroids, &mut labels, &mut dists);
    reseed_empty(data, k, &mut centroids, &mut labels, &mut dists);
    let inertia: f64 = dists.iter().sum();
    trace.push(inertia);

    KMeansResult {
        k,
        dim,
        labels,
        centroids,
        inertia,
        iterations,
        inertia_trace: trace,
    }
}

/// Clusters the rows of `data` into `params.k` groups.
///
/// Each restart seeds with k-means++, runs Lloyd iterations until the largest
/// centroid shift is at most `tol`, then applies single-point transfer moves.
/// The restart with the lowest inertia is returned.
///
/// Deterministic for a fixed `params.seed`.
pub fn kmeans(data: &PixelFeatureMatrix, params: &KMeansParams) -> Result<KMeansResult> {
    if params.k == 0 {
        return Err(Error::InvalidK(0));
    }
    if data.n() < params.k {
        return Err(Error::TooFewPoints {
            points: data.n(),
            k: params.k,
        });
    }
    if params.max_iter == 0 || params.n_init == 0 || !(params.tol >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "max_iter = {}, n_init = {}, tol = {}",
            params.max_iter, params.n_init, params.tol
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<KMeansResult> = None;
    for _ in 0..params.n_init {
        let run = lloyd(data, params, &mut rng);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("n_init >= 1"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn matrix(points: &[[f64; 2]]) -> PixelFeatureMatrix {
        PixelFeatureMatrix::new(2, points.iter().flatten().copied().collect()).unwrap()
    }

    fn random_points(seed: u64, n: usize, dim: usize) -> PixelFeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PixelFeatureMatrix::new(dim, (0..n * dim).map(|_| rng.random()).collect()).unwrap()
    }

    #[test]
    fn separated_duplicates() {
        let mut pts = vec![[0.0, 0.0]; 5];
        pts.extend(vec![[1.0, 1.0]; 5]);
        let r = kmeans(&matrix(&pts), &KMeansParams::new(2, 9)).unwrap();
        assert_eq!(r.inertia, 0.0);
        let mut cs: Vec<Vec<f64>> = (0..2).map(|c| r.centroid(c).to_vec()).collect();
        cs.sort_by(|a, b| a[0].total_cmp(&b[0]));
        assert_eq!(cs, vec![vec![0.0, 0.0], vec![1.0, 1.0]]);
        assert_eq!(&r.labels[..5], &[r.labels[0]; 5]);
        assert_ne!(r.labels[0], r.labels[5]);
    }

    #[test]
    fn single_cluster_is_the_mean() {
        let data = random_points(1, 50, 3);
        let r = kmeans(&data, &KMeansParams::new(1, 0)).unwrap();
        let mut mean = [0.0; 3];
        for p in data.rows() {
            for j in 0..3 {
                mean[j] += p[j] / 50.0;
            }
        }
        let total_var: f64 = (0..3)
            .map(|j| data.rows().map(|p| (p[j] - mean[j]).powi(2)).sum::<f64>() / 50.0)
            .sum();
        for j in 0..3 {
            assert!((r.centroid(0)[j] - mean[j]).abs() < 1e-12);
        }
        assert!((r.inertia - total_var * 50.0).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        let data = random_points(2, 3, 2);
        assert!(matches!(kmeans(&data, &KMeansParams::new(0, 0)), Err(Error::InvalidK(0))));
        assert!(matches!(
            kmeans(&data, &KMeansParams::new(4, 0)),
            Err(Error::TooFewPoints { points: 3, k: 4 })
        ));
        let bad = KMeansParams {
            max_iter: 0,
            ..KMeansParams::new(2, 0)
        };
        assert!(kmeans(&data, &bad).is_err());
    }

    #[test]
    fn deterministic_per_seed() {
        let data = random_points(3, 400, 4);
        let a = kmeans(&data, &KMeansParams::new(3, 17)).unwrap();
        let b = kmeans(&data, &KMeansParams::new(3, 17)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn n_equals_k_gives_zero_inertia() {
        let data = random_points(4, 4, 2);
        let r = kmeans(&data, &KMeansParams::new(4, 1)).unwrap();
        assert_eq!(r.inertia, 0.0);
        assert_eq!(r.cluster_sizes(), vec![1; 4]);
    }

    #[test]
    fn identical_points_more_clusters_than_values() {
        let data = matrix(&[[0.5, 0.5]; 6]);
        let r = kmeans(&data, &KMeansParams::new(3, 0)).unwrap();
        assert_eq!(r.inertia, 0.0);
        assert!(r.labels.iter().all(|&l| l < 3));
    }

    fn canonical_partition(labels: &[usize]) -> Vec<usize> {
        let mut map = std::collections::HashMap::new();
        labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect()
    }

    #[test]
    fn partition_survives_reordering_of_well_separated_data() {
        let mut pts = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for c in 0..3 {
            for _ in 0..20 {
                pts.push([c as f64 * 10.0 + rng.random::<f64>(), rng.random::<f64>()]);
            }
        }
        let a = kmeans(&matrix(&pts), &KMeansParams::new(3, 1)).unwrap();
        let rev: Vec<_> = pts.iter().rev().copied().collect();
        let b = kmeans(&matrix(&rev), &KMeansParams::new(3, 1)).unwrap();
        let mut b_labels = b.labels.clone();
        b_labels.reverse();
        assert_eq!(canonical_partition(&a.labels), canonical_partition(&b_labels));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn trace_monotone_and_final_fixed_point(seed in 0u64..10_000, k in 2usize..5) {
            let data = random_points(seed, 120, 3);
            let r = kmeans(&data, &KMeansParams::new(k, seed)).unwrap();
            for w in r.inertia_trace.windows(2) {
                prop_assert!(w[1] <= w[0], "trace rose: {:?}", r.inertia_trace);
            }
            prop_assert!(r.labels.iter().all(|&l| l < k));
            for (i, p) in data.rows().enumerate() {
                prop_assert_eq!(nearest(p, &r.centroids, r.dim).0, r.labels[i]);
            }
        }
    }
}
