//! Flat row-major point matrix shared by the whole pipeline.

use crate::error::{Error, Result};

/// An n×d matrix of sample coordinates, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Points {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl Points {
    /// Builds from a flat row-major buffer. `data.len()` must equal `n * d`.
    pub fn from_flat(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * d {
            return Err(Error::Inconsistent(format!(
                "flat buffer of len {} does not match {}x{}",
                data.len(),
                n,
                d
            )));
        }
        Ok(Self { data, n, d })
    }

    /// Builds from per-point rows; all rows must share one dimension.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptySampleSet);
        }
        let d = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Inconsistent(format!(
                    "row {} has dimension {}, expected {}",
                    i,
                    row.len(),
                    d
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            data,
            n: rows.len(),
            d,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    /// Returns the first non-finite entry as (row, col), if any.
    pub fn find_non_finite(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(|v| !v.is_finite())
            .map(|pos| (pos / self.d, pos % self.d))
    }

    /// Largest per-dimension coordinate range (max - min over any dimension).
    pub fn max_range(&self) -> f64 {
        let mut widest = 0.0f64;
        for l in 0..self.d {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for i in 0..self.n {
                let v = self.data[i * self.d + l];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            widest = widest.max(hi - lo);
        }
        widest
    }

    /// Z-scores every column in place (columns with zero spread are left as-is).
    pub fn standardize(&mut self) {
        for l in 0..self.d {
            let mut mean = 0.0;
            for i in 0..self.n {
                mean += self.data[i * self.d + l];
            }
            mean /= self.n as f64;
            let mut var = 0.0;
            for i in 0..self.n {
                let dv = self.data[i * self.d + l] - mean;
                var += dv * dv;
            }
            let sd = if self.n > 1 {
                (var / (self.n as f64 - 1.0)).sqrt()
            } else {
                0.0
            };
            if sd > 0.0 {
                for i in 0..self.n {
                    let v = &mut self.data[i * self.d + l];
                    *v = (*v - mean) / sd;
                }
            }
        }
    }
}

/// Euclidean distance between two coordinate slices.
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_euclidean(a, b).sqrt()
}

/// Squared Euclidean distance, accumulated in dimension order.
pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let diff = x - y;
        acc += diff * diff;
    }
    acc
}
