//! Local kernel density estimation.
//!
//! Raw densities sum a Gaussian product kernel over each point's `k_d`
//! nearest neighbors (the point itself included), then get max-min
//! normalized to `[0, 1]`. The stored normalization constants also let the
//! field evaluate a density at arbitrary query points, which the topology
//! stage needs for boundary midpoints.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::neighbors::KnnIndex;
use crate::points::Points;

/// Parameters for local kernel density estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityConfig {
    /// Neighborhood size used for the kernel sum (self included).
    pub k_d: usize,
    /// Per-dimension Gaussian bandwidths.
    pub bandwidths: Vec<f64>,
    /// Lower clamp applied to bandwidths; must stay positive.
    pub bandwidth_floor: f64,
}

impl DensityConfig {
    /// Builds a config with Silverman rule-of-thumb bandwidths.
    pub fn silverman(points: &Points, k_d: usize) -> Result<Self> {
        Ok(Self {
            k_d,
            bandwidths: silverman_bandwidths(points)?,
            bandwidth_floor: default_bandwidth_floor(points),
        })
    }
}

/// Per-point densities plus everything needed to evaluate the density at
/// new query points with the same normalization.
#[derive(Debug)]
pub struct DensityField {
    raw: Vec<f64>,
    normalized: Vec<f64>,
    p_min: f64,
    p_max: f64,
    config: DensityConfig,
    index: Arc<KnnIndex>,
}

/// Floor for degenerate (zero-spread) dimensions: a billionth of the widest
/// coordinate range, or of 1 when the data is a single repeated point.
pub fn default_bandwidth_floor(points: &Points) -> f64 {
    let range = points.max_range();
    1e-9 * if range > 0.0 { range } else { 1.0 }
}

/// Per-dimension Silverman bandwidths `(4 sigma^5 / (3 n))^0.2`, computed
/// from the unbiased (n-1) sample standard deviation and clamped to the
/// default floor.
pub fn silverman_bandwidths(points: &Points) -> Result<Vec<f64>> {
    let n = points.len();
    if n < 2 {
        return Err(Error::InvalidParam(
            "need >=2 samples for bandwidth".into(),
        ));
    }
    let d = points.dim();
    let floor = default_bandwidth_floor(points);
    let nf = n as f64;
    let mut out = Vec::with_capacity(d);
    for l in 0..d {
        let mut mean = 0.0;
        for i in 0..n {
            mean += points.row(i)[l];
        }
        mean /= nf;
        let mut var = 0.0;
        for i in 0..n {
            let dv = points.row(i)[l] - mean;
            var += dv * dv;
        }
        let sigma = (var / (nf - 1.0)).sqrt();
        let h = (4.0 * sigma.powi(5) / (3.0 * nf)).powf(0.2);
        out.push(h.max(floor));
    }
    Ok(out)
}

/// Estimates the field over the index's own points.
pub fn estimate_density(index: &Arc<KnnIndex>, config: &DensityConfig) -> Result<DensityField> {
    let n = index.len();
    if config.k_d == 0 {
        return Err(Error::InvalidParam("k_d must be >= 1".into()));
    }
    if config.k_d > n {
        return Err(Error::InvalidParam(format!(
            "k_d = {} exceeds sample count {}",
            config.k_d, n
        )));
    }
    validate_bandwidths(config, index.dim())?;

    let points = index.points();
    let raw: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| raw_density_at(index, config, points.row(i)))
        .collect::<Result<Vec<_>>>()?;

    DensityField::from_raw(raw, config.clone(), Arc::clone(index))
}

fn validate_bandwidths(config: &DensityConfig, dim: usize) -> Result<()> {
    if config.bandwidths.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: config.bandwidths.len(),
        });
    }
    if config.bandwidth_floor <= 0.0 {
        return Err(Error::InvalidParam("bandwidth floor must be > 0".into()));
    }
    if let Some(h) = config.bandwidths.iter().find(|h| **h <= 0.0 || !h.is_finite()) {
        return Err(Error::InvalidParam(format!("non-positive bandwidth {h}")));
    }
    Ok(())
}

/// Raw kernel sum at `q` over its `k_d` nearest sample points.
fn raw_density_at(index: &KnnIndex, config: &DensityConfig, q: &[f64]) -> Result<f64> {
    let neighbors = index.query_knn(q, config.k_d)?;
    let points = index.points();
    let mut sum = 0.0;
    for (id, _) in neighbors {
        let row = points.row(id);
        let mut expo = 0.0;
        for l in 0..q.len() {
            let diff = q[l] - row[l];
            let h = config.bandwidths[l];
            expo += diff * diff / (2.0 * h * h);
        }
        sum += (-expo).exp();
    }
    Ok(sum)
}

impl DensityField {
    /// Normalizes raw densities with max-min scaling. When all raw values
    /// coincide the normalized field is identically 1.
    pub fn from_raw(raw: Vec<f64>, config: DensityConfig, index: Arc<KnnIndex>) -> Result<Self> {
        if raw.len() != index.len() {
            return Err(Error::Inconsistent(format!(
                "{} raw densities for an index of {} points",
                raw.len(),
                index.len()
            )));
        }
        validate_bandwidths(&config, index.dim())?;
        let p_min = raw.iter().copied().fold(f64::INFINITY, f64::min);
        let p_max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let normalized = if p_max > p_min {
            raw.iter().map(|p| (p - p_min) / (p_max - p_min)).collect()
        } else {
            vec![1.0; raw.len()]
        };
        Ok(Self {
            raw,
            normalized,
            p_min,
            p_max,
            config,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    pub fn normalized(&self) -> &[f64] {
        &self.normalized
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn config(&self) -> &DensityConfig {
        &self.config
    }

    pub fn index(&self) -> &Arc<KnnIndex> {
        &self.index
    }

    /// Normalized density at an arbitrary query point, using the stored
    /// normalization constants and clamped to `[0, 1]`.
    pub fn density_at(&self, q: &[f64]) -> Result<f64> {
        let raw = raw_density_at(&self.index, &self.config, q)?;
        if self.p_max > self.p_min {
            let f = (raw - self.p_min) / (self.p_max - self.p_min);
            Ok(f.clamp(0.0, 1.0))
        } else {
            Ok(1.0)
        }
    }
}
