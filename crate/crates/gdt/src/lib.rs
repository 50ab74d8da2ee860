//! Density-topology clustering.
//!
//! The pipeline estimates a local kernel density over the samples, grows
//! local clusters by walking discrete density gradients, connects clusters
//! through the density of their shared boundaries, prunes relatively weak
//! edges, and labels points by the surviving connected components. It
//! handles uneven densities and heavy noise while keeping the whole run at
//! `O(n log n)`.
//!
//! ```
//! use gdt::data::gen_blobs;
//! use gdt::pipeline::{run_pipeline, PipelineConfig};
//!
//! let set = gen_blobs(300, 3, 0.3, 5.0, 7);
//! let out = run_pipeline(&set.points, &PipelineConfig::default()).unwrap();
//! assert_eq!(out.labeling.num_labels, 3);
//! ```

pub mod cli;
pub mod data;
pub mod density;
pub mod error;
pub mod growing;
pub mod metrics;
pub mod neighbors;
pub mod pipeline;
pub mod points;
pub mod topology;

pub use data::SampleSet;
pub use density::{estimate_density, silverman_bandwidths, DensityConfig, DensityField};
pub use error::{Error, Result};
pub use growing::{grow, GrowthConfig, GrowthResult};
pub use neighbors::{build_index, KnnIndex};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineOutput};
pub use points::Points;
pub use topology::{
    alpha_from_beta, assign_labels, build_topograph, prune_edges, Labeling, PruneConfig,
    TopoGraph, NOISE_LABEL,
};
