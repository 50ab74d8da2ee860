//! External clustering quality measures: accuracy under optimal cluster
//! to class matching, the Larsen cluster F-measure, the adjusted Rand
//! index, and coverage. Points labeled [`NOISE_LABEL`] are excluded from
//! the first three and reported through coverage instead.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::topology::NOISE_LABEL;

/// Joint count matrix between predicted clusters and true classes over the
/// covered (non-noise) points.
#[derive(Debug, Clone)]
pub struct Contingency {
    /// counts[p][t] over covered points.
    pub counts: Vec<Vec<usize>>,
    pub row_sums: Vec<usize>,
    pub col_sums: Vec<usize>,
    pub n_covered: usize,
}

impl Contingency {
    /// Builds the matrix, dropping every position where `pred` is noise.
    /// Cluster and class ids keep their order of first appearance.
    pub fn from_labels(pred: &[i64], truth: &[i64]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::Inconsistent(format!(
                "{} predictions vs {} truth labels",
                pred.len(),
                truth.len()
            )));
        }
        let mut pred_ids: HashMap<i64, usize> = HashMap::new();
        let mut truth_ids: HashMap<i64, usize> = HashMap::new();
        let mut cells: Vec<(usize, usize)> = Vec::new();
        for (&p, &t) in pred.iter().zip(truth.iter()) {
            if p == NOISE_LABEL {
                continue;
            }
            let next_p = pred_ids.len();
            let pi = *pred_ids.entry(p).or_insert(next_p);
            let next_t = truth_ids.len();
            let ti = *truth_ids.entry(t).or_insert(next_t);
            cells.push((pi, ti));
        }
        if cells.is_empty() {
            return Err(Error::EmptyEvaluation);
        }
        let mut counts = vec![vec![0usize; truth_ids.len()]; pred_ids.len()];
        for (pi, ti) in cells {
            counts[pi][ti] += 1;
        }
        let row_sums: Vec<usize> = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums: Vec<usize> = (0..truth_ids.len())
            .map(|t| counts.iter().map(|r| r[t]).sum())
            .collect();
        let n_covered = row_sums.iter().sum();
        Ok(Self {
            counts,
            row_sums,
            col_sums,
            n_covered,
        })
    }
}

/// Fraction of covered points explained by the best one-to-one matching of
/// predicted clusters onto true classes.
pub fn accuracy(pred: &[i64], truth: &[i64]) -> Result<f64> {
    let c = Contingency::from_labels(pred, truth)?;
    let matched = optimal_assignment_total(&c.counts);
    Ok(matched as f64 / c.n_covered as f64)
}

/// Larsen cluster F-measure: for each true class take the best F1 over
/// predicted clusters, then weight by class size.
pub fn fscore(pred: &[i64], truth: &[i64]) -> Result<f64> {
    let c = Contingency::from_labels(pred, truth)?;
    let mut total = 0.0;
    for t in 0..c.col_sums.len() {
        let class_size = c.col_sums[t];
        let mut best = 0.0f64;
        for p in 0..c.row_sums.len() {
            let overlap = c.counts[p][t];
            if overlap == 0 {
                continue;
            }
            let precision = overlap as f64 / c.row_sums[p] as f64;
            let recall = overlap as f64 / class_size as f64;
            let f1 = 2.0 * precision * recall / (precision + recall);
            best = best.max(f1);
        }
        total += class_size as f64 / c.n_covered as f64 * best;
    }
    Ok(total)
}

/// Hubert-Arabie adjusted Rand index over covered points. When the
/// chance-correction denominator vanishes the result is 1 for identical
/// partitions and 0 otherwise.
pub fn ari(pred: &[i64], truth: &[i64]) -> Result<f64> {
    let c = Contingency::from_labels(pred, truth)?;
    let comb2 = |x: usize| -> f64 {
        let x = x as f64;
        x * (x - 1.0) / 2.0
    };
    let sum_ij: f64 = c
        .counts
        .iter()
        .flat_map(|r| r.iter())
        .map(|&v| comb2(v))
        .sum();
    let sum_a: f64 = c.row_sums.iter().map(|&v| comb2(v)).sum();
    let sum_b: f64 = c.col_sums.iter().map(|&v| comb2(v)).sum();
    let total = comb2(c.n_covered);
    if total == 0.0 {
        // a single covered point: partitions trivially identical
        return Ok(1.0);
    }
    let expected = sum_a * sum_b / total;
    let max_index = 0.5 * (sum_a + sum_b);
    let denom = max_index - expected;
    if denom.abs() < 1e-12 {
        return Ok(if partitions_identical(&c) { 1.0 } else { 0.0 });
    }
    Ok((sum_ij - expected) / denom)
}

fn partitions_identical(c: &Contingency) -> bool {
    let one_per_row = c
        .counts
        .iter()
        .all(|r| r.iter().filter(|&&v| v > 0).count() == 1);
    let one_per_col = (0..c.col_sums.len())
        .all(|t| c.counts.iter().filter(|r| r[t] > 0).count() == 1);
    one_per_row && one_per_col
}

/// Fraction of points carrying a non-noise label.
pub fn coverage(pred: &[i64]) -> Result<f64> {
    if pred.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let covered = pred.iter().filter(|&&p| p != NOISE_LABEL).count();
    Ok(covered as f64 / pred.len() as f64)
}

/// Maximum total overlap achievable by a one-to-one matching of rows to
/// columns (Kuhn-Munkres with potentials on the negated counts).
fn optimal_assignment_total(counts: &[Vec<usize>]) -> usize {
    let rows = counts.len();
    let cols = counts[0].len();
    // the classic formulation needs rows <= cols; the matched total is
    // orientation free, so transpose when necessary
    let view: Vec<Vec<i64>> = if rows <= cols {
        counts
            .iter()
            .map(|r| r.iter().map(|&v| -(v as i64)).collect())
            .collect()
    } else {
        (0..cols)
            .map(|t| (0..rows).map(|p| -(counts[p][t] as i64)).collect())
            .collect()
    };
    let n = view.len();
    let m = view[0].len();
    let inf = i64::MAX / 4;

    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; m + 1];
    let mut matched_row = vec![0usize; m + 1]; // column j -> row (1-based, 0 = free)
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = view[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut total = 0usize;
    for j in 1..=m {
        let i = matched_row[j];
        if i != 0 {
            total += (-view[i - 1][j - 1]) as usize;
        }
    }
    total
}
