//! Maximum-weight perfect bipartite matching (Kuhn-Munkres).

use ndarray::Array2;

use crate::error::{HozError, Result};

/// A bijection from left zones to right zones.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// `permutation[k]` is the right-hand node matched to left node `k`.
    pub permutation: Vec<usize>,
    pub total_weight: f64,
}

impl Matching {
    pub fn identity(k: usize) -> Self {
        Self {
            permutation: (0..k).collect(),
            total_weight: f64::NAN,
        }
    }

    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.permutation.len()];
        for (k, &j) in self.permutation.iter().enumerate() {
            inv[j] = k;
        }
        inv
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.permutation.len()];
        self.permutation.iter().all(|&j| {
            j < seen.len() && !std::mem::replace(&mut seen[j], true)
        })
    }
}

/// Total weight of a permutation, summed in row order.
pub(crate) fn permutation_weight(weights: &Array2<f64>, perm: &[usize]) -> f64 {
    perm.iter().enumerate().map(|(k, &j)| weights[[k, j]]).sum()
}

/// Minimum-cost assignment on a dense square cost matrix using the
/// shortest-augmenting-path Hungarian method with row/column potentials.
/// Returns `assignment[row] = column`.
fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // 1-based arrays; index 0 is the virtual source column.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[row_of[j] - 1] = j - 1;
    }
    assignment
}

/// Best completion for rows `from..n` over the columns not in `taken`.
fn complete(weights: &Array2<f64>, from: usize, taken: &[bool]) -> Vec<usize> {
    let n = weights.nrows();
    let cols: Vec<usize> = (0..n).filter(|&c| !taken[c]).collect();
    if cols.is_empty() {
        return Vec::new();
    }
    let cost: Vec<Vec<f64>> = (from..n)
        .map(|r| cols.iter().map(|&c| -weights[[r, c]]).collect())
        .collect();
    min_cost_assignment(&cost)
        .into_iter()
        .map(|i| cols[i])
        .collect()
}

/// Perfect matching of maximum total weight.
///
/// Among maximizers (totals within a relative `1e-12` of the optimum) the
/// lexicographically smallest permutation is returned.
pub fn kuhn_munkres(weights: &Array2<f64>) -> Result<Matching> {
    let (n, m) = weights.dim();
    if n != m {
        return Err(HozError::ShapeMismatch(format!(
            "weight matrix must be square, got {n}x{m}"
        )));
    }
    if n == 0 {
        return Err(HozError::Empty("weight matrix"));
    }
    if let Some(((r, c), _)) = weights.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(HozError::NonFinite { row: r, col: c });
    }
    let mut best = permutation_weight(weights, &complete(weights, 0, &vec![false; n]));
    let tol = 1e-12 * best.abs().max(1.0);
    let mut perm = Vec::with_capacity(n);
    let mut taken = vec![false; n];
    for row in 0..n {
        let mut chosen = None;
        for c in 0..n {
            if taken[c] {
                continue;
            }
            taken[c] = true;
            let mut candidate = perm.clone();
            candidate.push(c);
            candidate.extend(complete(weights, row + 1, &taken));
            taken[c] = false;
            let total = permutation_weight(weights, &candidate);
            if total >= best - tol {
                best = best.max(total);
                chosen = Some(c);
                break;
            }
        }
        let c = chosen.expect("some column extends to an optimal matching");
        taken[c] = true;
        perm.push(c);
    }
    Ok(Matching {
        total_weight: permutation_weight(weights, &perm),
        permutation: perm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn diagonal_preference() {
        let m = kuhn_munkres(&array![[2.0, 1.0], [1.0, 2.0]]).unwrap();
        assert_eq!(m.permutation, vec![0, 1]);
        assert_eq!(m.total_weight, 4.0);
    }

    #[test]
    fn anti_diagonal_preference() {
        let m = kuhn_munkres(&array![[1.0, 2.0], [2.0, 1.0]]).unwrap();
        assert_eq!(m.permutation, vec![1, 0]);
        assert_eq!(m.total_weight, 4.0);
    }

    #[test]
    fn ties_pick_smallest_permutation() {
        let m = kuhn_munkres(&Array2::from_elem((4, 4), 1.0)).unwrap();
        assert_eq!(m.permutation, vec![0, 1, 2, 3]);
        let w = array![[0.0, 5.0, 5.0], [5.0, 0.0, 5.0], [5.0, 5.0, 0.0]];
        let m = kuhn_munkres(&w).unwrap();
        // Both derangements reach 15; [1, 2, 0] precedes [2, 0, 1].
        assert_eq!(m.permutation, vec![1, 2, 0]);
        assert_eq!(m.total_weight, 15.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(kuhn_munkres(&Array2::zeros((2, 3))).is_err());
        assert!(kuhn_munkres(&array![[1.0, f64::NAN], [0.0, 1.0]]).is_err());
    }

    #[test]
    fn negative_weights() {
        let m = kuhn_munkres(&array![[-1.0, -3.0], [-2.0, -9.0]]).unwrap();
        assert_eq!(m.permutation, vec![1, 0]);
        assert_eq!(m.total_weight, -5.0);
        assert!(m.is_bijection());
    }
}
