//! End-to-end run: index, density field, growth, graph, pruning, labels.

use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::density::{estimate_density, DensityConfig, DensityField};
use crate::error::Result;
use crate::growing::{grow, GrowthConfig, GrowthResult};
use crate::neighbors::KnnIndex;
use crate::points::Points;
use crate::topology::{
    assign_labels, build_topograph, prune_edges, Labeling, PruneConfig, TopoGraph,
};

/// Hyper-parameters of one pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub k_d: usize,
    pub k_s: usize,
    pub alpha: f64,
    pub epsilon: f64,
    /// Overrides the default bandwidth floor when set.
    pub bandwidth_floor: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            k_d: 15,
            k_s: 15,
            alpha: 0.2,
            epsilon: 0.0,
            bandwidth_floor: None,
        }
    }
}

/// Wall time spent in each stage.
#[derive(Debug, Clone, Copy, Default)]
pub struct StageTimings {
    pub index: Duration,
    pub density: Duration,
    pub grow: Duration,
    pub graph: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.index + self.density + self.grow + self.graph
    }
}

/// Everything a run produces, stage by stage.
#[derive(Debug)]
pub struct PipelineOutput {
    pub index: Arc<KnnIndex>,
    pub field: DensityField,
    pub growth: GrowthResult,
    /// Graph before pruning (all edges kept).
    pub graph: TopoGraph,
    /// Same graph with kept flags set by the alpha cut.
    pub pruned: TopoGraph,
    pub labeling: Labeling,
    pub timings: StageTimings,
}

/// Runs the full pipeline over a point matrix.
pub fn run_pipeline(points: &Points, config: &PipelineConfig) -> Result<PipelineOutput> {
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let index = Arc::new(KnnIndex::build(points)?);
    timings.index = t.elapsed();

    let t = Instant::now();
    let mut density_config = DensityConfig::silverman(points, config.k_d)?;
    if let Some(floor) = config.bandwidth_floor {
        density_config.bandwidth_floor = floor;
        for h in &mut density_config.bandwidths {
            *h = h.max(floor);
        }
    }
    let field = estimate_density(&index, &density_config)?;
    timings.density = t.elapsed();

    let t = Instant::now();
    let growth = grow(
        &field,
        &GrowthConfig {
            k_s: config.k_s,
            epsilon: config.epsilon,
        },
    )?;
    timings.grow = t.elapsed();

    let t = Instant::now();
    let graph = build_topograph(&growth, &field)?;
    let pruned = prune_edges(
        &graph,
        &PruneConfig {
            alpha: config.alpha,
        },
    )?;
    let labeling = assign_labels(&growth, &pruned);
    timings.graph = t.elapsed();

    Ok(PipelineOutput {
        index,
        field,
        growth,
        graph,
        pruned,
        labeling,
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_blobs;

    #[test]
    fn blobs_end_to_end() {
        let set = gen_blobs(300, 3, 0.3, 5.0, 21);
        let out = run_pipeline(&set.points, &PipelineConfig::default()).unwrap();
        assert_eq!(out.labeling.labels.len(), 300);
        assert_eq!(out.labeling.coverage, 1.0);
        assert_eq!(out.labeling.num_labels, 3);
        // each blob maps onto exactly one label
        let truth = set.truth.unwrap();
        for c in 0..3 {
            let labels: std::collections::HashSet<i64> = (0..300)
                .filter(|&i| truth[i] == c)
                .map(|i| out.labeling.labels[i])
                .collect();
            assert_eq!(labels.len(), 1, "blob {c} split into {labels:?}");
        }
    }

    #[test]
    fn deterministic_across_runs() {
        let set = gen_blobs(200, 2, 0.4, 2.0, 8);
        let a = run_pipeline(&set.points, &PipelineConfig::default()).unwrap();
        let b = run_pipeline(&set.points, &PipelineConfig::default()).unwrap();
        assert_eq!(a.labeling, b.labeling);
        assert_eq!(a.pruned.to_json_string(), b.pruned.to_json_string());
    }

    #[test]
    fn invalid_parameters_surface() {
        let set = gen_blobs(50, 1, 0.1, 0.0, 1);
        let config = PipelineConfig {
            k_d: 100,
            ..Default::default()
        };
        assert!(run_pipeline(&set.points, &config).is_err());
    }
}
