//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashMap;

use hoz_core::sim::EpisodeRecord;
use hoz_core::Action;
use ndarray::Array2;

/// Every permutation of `0..k`, by Heap's algorithm.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn heap(n: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..n - 1 {
            heap(n - 1, a, out);
            let j = if n.is_multiple_of(2) { i } else { 0 };
            a.swap(j, n - 1);
        }
        heap(n - 1, a, out);
    }
    let mut out = Vec::new();
    heap(k, &mut (0..k).collect(), &mut out);
    out
}

/// Exhaustive maximum of Σ_k w[k, p(k)] over all permutations, summed in row order.
pub fn brute_force_matching(w: &Array2<f64>, perms: &[Vec<usize>]) -> f64 {
    perms
        .iter()
        .map(|p| p.iter().enumerate().map(|(k, &j)| w[[k, j]]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Maximum edge-probability product over all simple paths from `s` to `t`
/// by depth-first enumeration; 0 when no positive path exists.
pub fn brute_force_path(e: &Array2<f64>, s: usize, t: usize) -> f64 {
    fn dfs(e: &Array2<f64>, u: usize, t: usize, seen: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if u == t {
            *best = best.max(acc);
            return;
        }
        for v in 0..e.nrows() {
            if !seen[v] && e[[u, v]] > 0.0 {
                seen[v] = true;
                dfs(e, v, t, seen, acc * e[[u, v]], best);
                seen[v] = false;
            }
        }
    }
    if s == t {
        return 1.0;
    }
    let mut seen = vec![false; e.nrows()];
    seen[s] = true;
    let mut best = 0.0;
    dfs(e, s, t, &mut seen, 1.0, &mut best);
    best
}

/// Adjusted Rand index from the contingency table (Hubert & Arabie).
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len());
    let choose2 = |n: f64| n * (n - 1.0) / 2.0;
    let mut table: HashMap<(usize, usize), f64> = HashMap::new();
    let mut rows: HashMap<usize, f64> = HashMap::new();
    let mut cols: HashMap<usize, f64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1.0;
        *rows.entry(x).or_default() += 1.0;
        *cols.entry(y).or_default() += 1.0;
    }
    let index: f64 = table.values().map(|&n| choose2(n)).sum();
    let sum_rows: f64 = rows.values().map(|&n| choose2(n)).sum();
    let sum_cols: f64 = cols.values().map(|&n| choose2(n)).sum();
    let expected = sum_rows * sum_cols / choose2(a.len() as f64);
    let max = (sum_rows + sum_cols) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

/// SR, SPL and SAE recomputed cell by cell, the way a spreadsheet would.
pub fn spreadsheet_metrics(records: &[EpisodeRecord]) -> (f64, f64, f64) {
    let n = records.len() as f64;
    let mut sr = 0.0;
    let mut spl = 0.0;
    let mut sae = 0.0;
    for r in records {
        let s = if r.success { 1.0 } else { 0.0 };
        let l = r.actual_length as f64;
        let l_star = r.optimal_length.expect("fixture L*") as f64;
        let denom = l.max(l_star);
        let spl_term = if denom == 0.0 { 1.0 } else { l_star / denom };
        let forward = r.actions.iter().filter(|a| **a == Action::MoveAhead).count() as f64;
        let sae_term = if r.actions.is_empty() { 0.0 } else { forward / r.actions.len() as f64 };
        sr += s;
        spl += s * spl_term;
        sae += s * sae_term;
    }
    (sr / n, spl / n, sae / n)
}
