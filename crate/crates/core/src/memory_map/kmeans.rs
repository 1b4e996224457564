//! Lloyd's k-means with seeded k-means++ initialization, plus silhouette-based
//! selection of k when the caller does not fix it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PlacedObject;
use crate::geometry::{self, Vec3};

pub const MAX_ITERATIONS: usize = 100;
/// Upper end of the k range searched by silhouette selection.
pub const MAX_AUTO_K: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub cluster_id: usize,
    pub members: Vec<PlacedObject>,
    pub centroid: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSet {
    pub clusters: Vec<Cluster>,
    pub k: usize,
    pub seed: u64,
}

impl ClusterSet {
    pub fn empty(seed: u64) -> Self {
        ClusterSet { clusters: Vec::new(), k: 0, seed }
    }
}

/// Result of one k-means run over raw points.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    /// Cluster index per point; always in `0..centroids.len()`.
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec3>,
    /// Inertia after the initial assignment and after every Lloyd iteration.
    pub inertia_trace: Vec<f64>,
    pub iterations: usize,
}

impl KMeansFit {
    pub fn inertia(&self) -> f64 {
        *self.inertia_trace.last().unwrap_or(&0.0)
    }
}

/// Index of the nearest centroid; ties go to the lowest index.
pub fn nearest(point: &Vec3, centroids: &[Vec3]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = geometry::squared_distance(point, c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

fn inertia(points: &[Vec3], assignments: &[usize], centroids: &[Vec3]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| geometry::squared_distance(p, &centroids[a]))
        .sum()
}

fn init_plus_plus(points: &[Vec3], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec3> {
    let mut centroids = vec![points[rng.random_range(0..points.len())]];
    let mut weights = vec![0.0; points.len()];
    while centroids.len() < k {
        let mut sum = 0.0;
        for (p, w) in points.iter().zip(weights.iter_mut()) {
            *w = centroids
                .iter()
                .map(|c| geometry::squared_distance(p, c))
                .fold(f64::INFINITY, f64::min);
            sum += *w;
        }
        // Every point coincides with a chosen centroid.
        if sum <= 0.0 || !sum.is_finite() {
            break;
        }
        let mut target = rng.random::<f64>() * sum;
        let mut chosen = points.len() - 1;
        for (i, w) in weights.iter().enumerate() {
            if *w > 0.0 && target < *w {
                chosen = i;
                break;
            }
            target -= *w;
        }
        if weights[chosen] <= 0.0 {
            chosen = weights.iter().rposition(|w| *w > 0.0).expect("sum > 0");
        }
        centroids.push(points[chosen]);
    }
    centroids
}

fn assign_all(points: &[Vec3], centroids: &[Vec3]) -> Vec<usize> {
    points.iter().map(|p| nearest(p, centroids)).collect()
}

/// Runs k-means on `points` with `k` clamped to `1..=points.len()`.
/// Clusters left empty at convergence are dropped and the rest renumbered,
/// so coincident points may yield fewer than `k` clusters.
pub fn kmeans(points: &[Vec3], k: usize, seed: u64) -> KMeansFit {
    assert!(!points.is_empty(), "kmeans needs at least one point");
    let k = k.clamp(1, points.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = init_plus_plus(points, k, &mut rng);
    let mut assignments = assign_all(points, &centroids);
    let mut trace = vec![inertia(points, &assignments, &centroids)];
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut sums = vec![[0.0; 3]; centroids.len()];
        let mut counts = vec![0usize; centroids.len()];
        for (p, &a) in points.iter().zip(&assignments) {
            for d in 0..3 {
                sums[a][d] += p[d];
            }
            counts[a] += 1;
        }
        for (j, c) in centroids.iter_mut().enumerate() {
            if counts[j] > 0 {
                let n = counts[j] as f64;
                *c = [sums[j][0] / n, sums[j][1] / n, sums[j][2] / n];
            }
        }
        // Reseed empty clusters at the point farthest from its centroid.
        for j in 0..centroids.len() {
            if counts[j] == 0 {
                let far = points
                    .iter()
                    .zip(&assignments)
                    .map(|(p, &a)| geometry::squared_distance(p, &centroids[a]))
                    .enumerate()
                    .fold((0, 0.0), |best, (i, d)| if d > best.1 { (i, d) } else { best });
                if far.1 > 0.0 {
                    centroids[j] = points[far.0];
                }
            }
        }
        let next = assign_all(points, &centroids);
        trace.push(inertia(points, &next, &centroids));
        if next == assignments {
            break;
        }
        assignments = next;
    }

    // Drop empty clusters, keeping relative order.
    let mut remap = vec![usize::MAX; centroids.len()];
    let mut kept = Vec::new();
    for (j, c) in centroids.iter().enumerate() {
        if assignments.contains(&j) {
            remap[j] = kept.len();
            kept.push(*c);
        }
    }
    let assignments = assignments.into_iter().map(|a| remap[a]).collect();
    KMeansFit { assignments, centroids: kept, inertia_trace: trace, iterations }
}

/// Mean silhouette coefficient. A single cluster scores 0, as does any point
/// alone in its cluster.
pub fn silhouette(points: &[Vec3], assignments: &[usize]) -> f64 {
    let k = assignments.iter().copied().max().map_or(0, |m| m + 1);
    if k < 2 || points.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for (i, p) in points.iter().enumerate() {
        let mut sum = vec![0.0; k];
        let mut count = vec![0usize; k];
        for (j, q) in points.iter().enumerate() {
            if i != j {
                sum[assignments[j]] += geometry::euclidean(p, q);
                count[assignments[j]] += 1;
            }
        }
        let own = assignments[i];
        if count[own] == 0 {
            continue;
        }
        let a = sum[own] / count[own] as f64;
        let b = (0..k)
            .filter(|&c| c != own && count[c] > 0)
            .map(|c| sum[c] / count[c] as f64)
            .fold(f64::INFINITY, f64::min);
        if !b.is_finite() {
            continue;
        }
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    total / points.len() as f64
}

/// Picks k in `1..=min(MAX_AUTO_K, n)` maximizing mean silhouette; the
/// smallest k wins ties.
pub fn select_k(points: &[Vec3], seed: u64) -> usize {
    let upper = MAX_AUTO_K.min(points.len());
    let mut best_k = 1;
    let mut best_score = 0.0;
    for k in 2..=upper {
        let fit = kmeans(points, k, seed);
        let score = silhouette(points, &fit.assignments);
        if score > best_score + 1e-12 {
            best_score = score;
            best_k = k;
        }
    }
    best_k
}

pub fn cluster_objects(objects: &[PlacedObject], k: Option<usize>, seed: u64) -> ClusterSet {
    if objects.is_empty() {
        return ClusterSet::empty(seed);
    }
    let points: Vec<Vec3> = objects.iter().map(|o| o.position).collect();
    let k = k.unwrap_or_else(|| select_k(&points, seed));
    let fit = kmeans(&points, k, seed);
    let mut clusters: Vec<Cluster> = fit
        .centroids
        .iter()
        .enumerate()
        .map(|(id, _)| Cluster { cluster_id: id, members: Vec::new(), centroid: [0.0; 3] })
        .collect();
    for (obj, &a) in objects.iter().zip(&fit.assignments) {
        clusters[a].members.push(obj.clone());
    }
    for c in &mut clusters {
        c.centroid = geometry::centroid(c.members.iter().map(|m| &m.position))
            .expect("empty clusters are dropped");
    }
    ClusterSet { k: clusters.len(), clusters, seed }
}
