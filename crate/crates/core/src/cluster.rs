//! k-means (k-means++ seeding, Lloyd iterations) and COP-KMeans with
//! must-link / cannot-link constraints.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::data::Sign;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Debug, PartialEq)]
pub struct Clustering {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Inertia after each assignment step.
    pub inertia_trace: Vec<f64>,
    pub iterations: usize,
}

impl Clustering {
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.centroids.len()];
        for &a in &self.assignments {
            s[a] += 1;
        }
        s
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Constraints {
    pub must_links: Vec<(usize, usize)>,
    pub cannot_links: Vec<(usize, usize)>,
}

impl Constraints {
    fn validate(&self, n: usize) -> Result<()> {
        for &(a, b) in self.must_links.iter().chain(&self.cannot_links) {
            if a >= n || b >= n {
                return Err(Error::invalid("constraints", "point index out of range"));
            }
        }
        let norm = |&(a, b): &(usize, usize)| (a.min(b), a.max(b));
        let mut ml: Vec<(usize, usize)> = self.must_links.iter().map(norm).collect();
        ml.sort_unstable();
        if self.cannot_links.iter().map(norm).any(|p| ml.binary_search(&p).is_ok()) {
            return Err(Error::invalid("constraints", "a pair is both must-link and cannot-link"));
        }
        Ok(())
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_points(points: &[Vec<f64>], k: usize) -> Result<usize> {
    if k == 0 {
        return Err(Error::invalid("k", "must be at least 1"));
    }
    let d = points.first().ok_or(Error::EmptyInput("points"))?.len();
    if let Some(p) = points.iter().find(|p| p.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: p.len() });
    }
    let mut distinct: Vec<&Vec<f64>> = Vec::with_capacity(k);
    for p in points {
        if !distinct.contains(&p) {
            distinct.push(p);
            if distinct.len() == k {
                return Ok(d);
            }
        }
    }
    Err(Error::TooFewPoints { needed: k, got: distinct.len() })
}

fn seed_centroids(points: &[Vec<f64>], k: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng::from_seed(seed);
    let mut centroids = vec![points[r.random_range(0..points.len())].clone()];
    let mut dist: Vec<f64> = points.iter().map(|p| sq_dist(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = dist.iter().sum();
        let mut u = r.random::<f64>() * total;
        let mut pick = dist.iter().rposition(|&v| v > 0.0).unwrap_or(0);
        for (i, &v) in dist.iter().enumerate() {
            if v > 0.0 && u < v {
                pick = i;
                break;
            }
            u -= v;
        }
        let c = points[pick].clone();
        for (dv, p) in dist.iter_mut().zip(points) {
            *dv = dv.min(sq_dist(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, c) in centroids.iter().enumerate() {
        let dd = sq_dist(p, c);
        if dd < best_d {
            best_d = dd;
            best = j;
        }
    }
    best
}

fn inertia(points: &[Vec<f64>], assign: &[usize], centroids: &[Vec<f64>]) -> f64 {
    points.iter().zip(assign).map(|(p, &a)| sq_dist(p, &centroids[a])).sum()
}

/// Means of assigned points; an empty cluster keeps its previous centroid.
fn update_centroids(points: &[Vec<f64>], assign: &[usize], centroids: &mut [Vec<f64>]) {
    let d = points[0].len();
    let k = centroids.len();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assign) {
        counts[a] += 1;
        for (s, v) in sums[a].iter_mut().zip(p) {
            *s += v;
        }
    }
    for j in 0..k {
        if counts[j] > 0 {
            let n = counts[j] as f64;
            centroids[j] = sums[j].iter().map(|s| s / n).collect();
        }
    }
}

fn lloyd(
    points: &[Vec<f64>],
    mut centroids: Vec<Vec<f64>>,
    max_iters: usize,
    mut assign_step: impl FnMut(&[Vec<f64>]) -> Result<Vec<usize>>,
) -> Result<Clustering> {
    let mut assignments: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut iterations = 0;
    while iterations < max_iters.max(1) {
        iterations += 1;
        let next = assign_step(&centroids)?;
        trace.push(inertia(points, &next, &centroids));
        let stable = next == assignments;
        assignments = next;
        if stable {
            break;
        }
        update_centroids(points, &assignments, &mut centroids);
    }
    let inertia = inertia(points, &assignments, &centroids);
    Ok(Clustering { assignments, centroids, inertia, inertia_trace: trace, iterations })
}

pub fn kmeans(points: &[Vec<f64>], k: usize, max_iters: usize, seed: u64) -> Result<Clustering> {
    check_points(points, k)?;
    let centroids = seed_centroids(points, k, seed);
    lloyd(points, centroids, max_iters, |c| Ok(points.iter().map(|p| nearest(p, c)).collect()))
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// COP-KMeans with two clusters.
///
/// Must-links are closed transitively. In each assignment step points are
/// visited in input order and take the nearest centroid that keeps every
/// constraint with the points already placed in that step.
pub fn constrained_kmeans(
    points: &[Vec<f64>],
    constraints: &Constraints,
    max_iters: usize,
    seed: u64,
) -> Result<Clustering> {
    const K: usize = 2;
    check_points(points, K)?;
    let n = points.len();
    constraints.validate(n)?;

    let mut uf = UnionFind((0..n).collect());
    for &(a, b) in &constraints.must_links {
        uf.union(a, b);
    }
    let group: Vec<usize> = (0..n).map(|i| uf.find(i)).collect();
    let mut cannot: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in &constraints.cannot_links {
        let (ga, gb) = (group[a], group[b]);
        if ga == gb {
            return Err(Error::InfeasibleConstraints { point: a.max(b) });
        }
        cannot[ga].push(gb);
        cannot[gb].push(ga);
    }

    let centroids = seed_centroids(points, K, seed);
    lloyd(points, centroids, max_iters, |c| {
        let mut group_cluster: Vec<Option<usize>> = vec![None; n];
        let mut assign = vec![0; n];
        for (i, p) in points.iter().enumerate() {
            let g = group[i];
            let chosen = match group_cluster[g] {
                Some(j) => j,
                None => {
                    let mut order: Vec<usize> = (0..K).collect();
                    order.sort_by(|&a, &b| sq_dist(p, &c[a]).total_cmp(&sq_dist(p, &c[b])));
                    let feasible = |j: usize| cannot[g].iter().all(|&h| group_cluster[h] != Some(j));
                    let j =
                        order.into_iter().find(|&j| feasible(j)).ok_or(Error::InfeasibleConstraints { point: i })?;
                    group_cluster[g] = Some(j);
                    j
                }
            };
            assign[i] = chosen;
        }
        Ok(assign)
    })
}

/// Maps two clusters to classes by size and a prior hint, and classifies new
/// points by nearest centroid.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterClassifier {
    pub centroids: Vec<Vec<f64>>,
    pub labels: [Sign; 2],
}

impl ClusterClassifier {
    pub fn classify(&self, x: &[f64]) -> Sign {
        self.labels[nearest(x, &self.centroids)]
    }
}

/// The larger cluster takes the class the hint says is more frequent
/// (`hint >= 1/2` means positive). Equal sizes give the first centroid `+1`.
pub fn clusters_to_classes(clustering: &Clustering, prior_hint: f64) -> Result<ClusterClassifier> {
    if clustering.centroids.len() != 2 {
        return Err(Error::invalid("clustering", "need exactly two clusters"));
    }
    if !(prior_hint > 0.0 && prior_hint < 1.0) {
        return Err(Error::invalid("prior_hint", "must lie in (0, 1)"));
    }
    let sizes = clustering.sizes();
    let labels = if sizes[0] == sizes[1] {
        [Sign::Plus, Sign::Minus]
    } else {
        let larger = if sizes[0] > sizes[1] { 0 } else { 1 };
        let big = Sign::from_bool(prior_hint >= 0.5);
        let mut l = [big.flipped(); 2];
        l[larger] = big;
        l
    };
    Ok(ClusterClassifier { centroids: clustering.centroids.clone(), labels })
}
