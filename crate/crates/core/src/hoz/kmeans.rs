//! Lloyd's k-means with k-means++ seeding.
//!
//! Deterministic given the generator: nearest-center ties go to the lowest
//! zone index, and an empty cluster takes the sample farthest from its own
//! center (lowest sample index on ties) from a cluster that can spare one.

use ndarray::Array2;

use crate::error::{HozError, Result};
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub max_iter: usize,
    /// Independent seedings; the lowest-cost run is kept (first on ties).
    pub restarts: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            max_iter: 300,
            restarts: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    /// Zone index for each sample.
    pub assignment: Vec<usize>,
    /// `K x D` member means.
    pub centers: Array2<f64>,
    /// Sum of squared distances to assigned centers.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl ClusterAssignment {
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.centers.nrows()];
        for &a in &self.assignment {
            sizes[a] += 1;
        }
        sizes
    }

    pub fn members(&self, zone: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter(move |(_, &a)| a == zone)
            .map(|(i, _)| i)
    }
}

fn sq_dist(a: &[f64], b: impl IntoIterator<Item = f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn center_dist(points: &[Vec<f64>], i: usize, centers: &Array2<f64>, c: usize) -> f64 {
    sq_dist(&points[i], centers.row(c).iter().copied())
}

/// k-means with the default configuration.
pub fn kmeans(points: &[Vec<f64>], k: usize, rng: &mut SeededRng) -> Result<ClusterAssignment> {
    kmeans_with(points, k, rng, &KMeansConfig::default())
}

pub fn kmeans_with(
    points: &[Vec<f64>],
    k: usize,
    rng: &mut SeededRng,
    cfg: &KMeansConfig,
) -> Result<ClusterAssignment> {
    if k == 0 {
        return Err(HozError::InvalidInput("k must be at least 1".into()));
    }
    if points.len() < k {
        return Err(HozError::TooFewSamples {
            needed: k,
            got: points.len(),
        });
    }
    let dim = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(HozError::DimensionMismatch {
            expected: dim,
            actual: p.len(),
        });
    }
    let mut best: Option<ClusterAssignment> = None;
    for _ in 0..cfg.restarts.max(1) {
        let run = lloyd(points, k, rng, cfg.max_iter);
        if best.as_ref().is_none_or(|b| run.cost < b.cost) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one run"))
}

fn seed_centers(points: &[Vec<f64>], k: usize, rng: &mut SeededRng) -> Array2<f64> {
    let dim = points[0].len();
    let mut centers = Array2::zeros((k, dim));
    let mut chosen = vec![rng.index(points.len())];
    let mut nearest: Vec<f64> = points
        .iter()
        .map(|p| sq_dist(p, points[chosen[0]].iter().copied()))
        .collect();
    while chosen.len() < k {
        let next = match rng.weighted_index(&nearest) {
            Some(i) => i,
            // All remaining mass is zero: fall back to an unchosen sample.
            None => {
                let free: Vec<usize> = (0..points.len()).filter(|i| !chosen.contains(i)).collect();
                free[rng.index(free.len())]
            }
        };
        chosen.push(next);
        for (d, p) in nearest.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, points[next].iter().copied()));
        }
    }
    for (c, &i) in chosen.iter().enumerate() {
        centers.row_mut(c).assign(&ndarray::ArrayView1::from(&points[i]));
    }
    centers
}

fn assign(points: &[Vec<f64>], centers: &Array2<f64>) -> Vec<usize> {
    (0..points.len())
        .map(|i| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for c in 0..centers.nrows() {
                let d = center_dist(points, i, centers, c);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            best
        })
        .collect()
}

/// Give every empty cluster one member.
fn repair(points: &[Vec<f64>], centers: &mut Array2<f64>, assignment: &mut [usize]) {
    let k = centers.nrows();
    let mut sizes = vec![0usize; k];
    for &a in assignment.iter() {
        sizes[a] += 1;
    }
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let mut far = None;
        let mut far_d = -1.0;
        for (i, &a) in assignment.iter().enumerate() {
            if sizes[a] < 2 {
                continue;
            }
            let d = center_dist(points, i, centers, a);
            if d > far_d {
                far = Some(i);
                far_d = d;
            }
        }
        let i = far.expect("some cluster has two members when n >= k");
        sizes[assignment[i]] -= 1;
        assignment[i] = empty;
        sizes[empty] = 1;
        centers
            .row_mut(empty)
            .assign(&ndarray::ArrayView1::from(&points[i]));
    }
}

fn recompute(points: &[Vec<f64>], k: usize, assignment: &[usize]) -> Array2<f64> {
    let dim = points[0].len();
    let mut sums = Array2::<f64>::zeros((k, dim));
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignment) {
        counts[a] += 1;
        for (s, v) in sums.row_mut(a).iter_mut().zip(p) {
            *s += v;
        }
    }
    for (c, &n) in counts.iter().enumerate() {
        if n > 0 {
            sums.row_mut(c).mapv_inplace(|v| v / n as f64);
        }
    }
    sums
}

fn lloyd(points: &[Vec<f64>], k: usize, rng: &mut SeededRng, max_iter: usize) -> ClusterAssignment {
    let mut centers = seed_centers(points, k, rng);
    let mut assignment: Vec<usize> = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let mut next = assign(points, &centers);
        repair(points, &mut centers, &mut next);
        centers = recompute(points, k, &next);
        if next == assignment {
            converged = true;
            break;
        }
        assignment = next;
    }
    let cost = (0..points.len())
        .map(|i| center_dist(points, i, &centers, assignment[i]))
        .sum();
    ClusterAssignment {
        assignment,
        centers,
        cost,
        iterations,
        converged,
    }
}

/// Sum of squared distances from each point to the mean of its cluster.
pub fn assignment_cost(points: &[Vec<f64>], k: usize, assignment: &[usize]) -> f64 {
    let centers = recompute(points, k, assignment);
    (0..points.len())
        .map(|i| center_dist(points, i, &centers, assignment[i]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(raw: &[&[f64]]) -> Vec<Vec<f64>> {
        raw.iter().map(|r| r.to_vec()).collect()
    }

    #[test]
    fn separated_pairs() {
        let p = pts(&[&[1.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[0.0, 1.0]]);
        let res = kmeans(&p, 2, &mut SeededRng::new(5)).unwrap();
        assert_eq!(res.sizes(), vec![2, 2]);
        let mut centers: Vec<Vec<f64>> = res.centers.rows().into_iter().map(|r| r.to_vec()).collect();
        centers.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(centers, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(res.cost, 0.0);
    }

    #[test]
    fn k_equals_n_is_zero_cost() {
        let p = pts(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0], &[0.5, 0.5]]);
        let res = kmeans(&p, 5, &mut SeededRng::new(1)).unwrap();
        assert_eq!(res.sizes(), vec![1; 5]);
        assert_eq!(res.cost, 0.0);
    }

    #[test]
    fn duplicates_still_fill_every_cluster() {
        let p = vec![vec![1.0, 0.0]; 6];
        let res = kmeans(&p, 3, &mut SeededRng::new(2)).unwrap();
        assert!(res.sizes().iter().all(|&s| s >= 1));
        assert_eq!(res.cost, 0.0);
    }

    #[test]
    fn too_few_samples() {
        let p = pts(&[&[1.0], &[2.0]]);
        assert!(matches!(
            kmeans(&p, 3, &mut SeededRng::new(0)),
            Err(HozError::TooFewSamples { needed: 3, got: 2 })
        ));
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn centers_are_member_means() {
        let mut rng = SeededRng::new(11);
        let p: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..3).map(|_| rng.range(0..2) as f64).collect())
            .collect();
        let res = kmeans(&p, 4, &mut rng).unwrap();
        for c in 0..4 {
            let members: Vec<usize> = res.members(c).collect();
            assert!(!members.is_empty());
            for d in 0..3 {
                let mean = members.iter().map(|&i| p[i][d]).sum::<f64>() / members.len() as f64;
                assert!((res.centers[[c, d]] - mean).abs() < 1e-12);
            }
        }
        assert!((assignment_cost(&p, 4, &res.assignment) - res.cost).abs() < 1e-9);
    }
}
