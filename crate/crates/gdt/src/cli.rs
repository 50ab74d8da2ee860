//! Command implementations behind the `gdt` binary: cluster a CSV,
//! segment an image, or benchmark pipeline scaling. Each command writes
//! its artifacts into an output directory and prints a short summary.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::data::{
    gen_blobs, image_to_samples, labels_to_image, load_csv, read_png, write_png, ColumnSpec,
};
use crate::error::{Error, Result};
use crate::metrics;
use crate::pipeline::{run_pipeline, PipelineConfig, PipelineOutput};
use crate::topology::Labeling;

/// Refuse images beyond this many pixels; the pipeline is n log n but a
/// poster-sized scan is still minutes of work.
pub const MAX_PIXELS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Cluster,
    Segment,
    Bench,
}

/// Everything one invocation needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub input: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub k_d: usize,
    pub k_s: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub label_column: Option<ColumnSpec>,
    pub standardize: bool,
}

impl RunConfig {
    fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            k_d: self.k_d,
            k_s: self.k_s,
            alpha: self.alpha,
            epsilon: self.epsilon,
            bandwidth_floor: None,
        }
    }

    fn input(&self) -> Result<&Path> {
        self.input
            .as_deref()
            .ok_or_else(|| Error::InvalidParam("--input is required for this mode".into()))
    }
}

#[derive(Debug, Serialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub fscore: f64,
    pub ari: f64,
    pub coverage: f64,
}

#[derive(Debug)]
pub struct ClusterSummary {
    pub n: usize,
    pub d: usize,
    pub num_local_clusters: usize,
    pub num_labels: usize,
    pub coverage: f64,
    pub metrics: Option<MetricsReport>,
}

/// Serializes labels as `id,label` rows with noise encoded as -1.
pub fn labels_csv_string(labeling: &Labeling) -> String {
    let mut out = String::with_capacity(8 * labeling.labels.len() + 16);
    out.push_str("id,label\n");
    for (i, label) in labeling.labels.iter().enumerate() {
        out.push_str(&format!("{i},{label}\n"));
    }
    out
}

/// True when the first record contains anything that is neither numeric
/// nor empty; such a file is read with its first row as header.
pub fn sniff_header(path: &Path) -> Result<bool> {
    let mut text = String::new();
    fs::File::open(path)?.read_to_string(&mut text)?;
    let first = match text.lines().next() {
        Some(line) => line,
        None => return Err(Error::EmptySampleSet),
    };
    let mut record = csv::StringRecord::new();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(first.as_bytes());
    if !reader.read_record(&mut record)? {
        return Err(Error::EmptySampleSet);
    }
    Ok(record
        .iter()
        .any(|cell| !cell.trim().is_empty() && cell.trim().parse::<f64>().is_err()))
}

fn run_on_points(points: &crate::points::Points, config: &RunConfig) -> Result<PipelineOutput> {
    run_pipeline(points, &config.pipeline_config())
}

/// Clusters a CSV file. Writes `labels.csv` and `graph.json`, plus
/// `metrics.json` when a label column provides ground truth. Metric
/// failures are reported on stderr without discarding the labels.
pub fn cmd_cluster(config: &RunConfig) -> Result<ClusterSummary> {
    let input = config.input()?;
    let has_header = sniff_header(input)?;
    let mut set = load_csv(input, has_header, config.label_column.as_ref())?;
    if config.standardize {
        set.points.standardize();
    }

    let out = run_on_points(&set.points, config)?;

    fs::create_dir_all(&config.output_dir)?;
    fs::write(
        config.output_dir.join("labels.csv"),
        labels_csv_string(&out.labeling),
    )?;
    fs::write(
        config.output_dir.join("graph.json"),
        out.pruned.to_json_string(),
    )?;

    let metrics = match &set.truth {
        None => None,
        Some(truth) => {
            let computed = (|| -> Result<MetricsReport> {
                Ok(MetricsReport {
                    accuracy: metrics::accuracy(&out.labeling.labels, truth)?,
                    fscore: metrics::fscore(&out.labeling.labels, truth)?,
                    ari: metrics::ari(&out.labeling.labels, truth)?,
                    coverage: metrics::coverage(&out.labeling.labels)?,
                })
            })();
            match computed {
                Ok(report) => {
                    fs::write(
                        config.output_dir.join("metrics.json"),
                        serde_json::to_string_pretty(&report).expect("report serializes"),
                    )?;
                    Some(report)
                }
                Err(e) => {
                    eprintln!("warning: metrics not computed: {e}");
                    None
                }
            }
        }
    };

    let summary = ClusterSummary {
        n: set.points.len(),
        d: set.points.dim(),
        num_local_clusters: out.growth.clusters.len(),
        num_labels: out.labeling.num_labels,
        coverage: out.labeling.coverage,
        metrics,
    };
    println!(
        "clustered {} points ({} dims): {} local clusters -> {} labels, coverage {:.4}",
        summary.n, summary.d, summary.num_local_clusters, summary.num_labels, summary.coverage
    );
    if let Some(m) = &summary.metrics {
        println!(
            "metrics: acc {:.4}, fscore {:.4}, ari {:.4}, coverage {:.4}",
            m.accuracy, m.fscore, m.ari, m.coverage
        );
    }
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct SegmentSummary {
    pub width: usize,
    pub height: usize,
    pub regions: usize,
    pub coverage: f64,
}

/// Segments a PNG: every pixel becomes an `(r, g, b, x, y)` sample, the
/// pipeline runs, and the label map is rendered next to a region-count
/// summary.
pub fn cmd_segment(config: &RunConfig) -> Result<SegmentSummary> {
    let input = config.input()?;
    let img = read_png(input)?;
    if img.pixels() > MAX_PIXELS {
        return Err(Error::InvalidParam(format!(
            "image has {} pixels, the limit is {MAX_PIXELS}",
            img.pixels()
        )));
    }
    if img.pixels() == 0 {
        return Err(Error::EmptySampleSet);
    }

    let set = image_to_samples(&img);
    let out = run_on_points(&set.points, config)?;

    fs::create_dir_all(&config.output_dir)?;
    let rendered = labels_to_image(&out.labeling.labels, img.width, img.height)?;
    write_png(config.output_dir.join("segments.png"), &rendered)?;
    fs::write(
        config.output_dir.join("graph.json"),
        out.pruned.to_json_string(),
    )?;

    let summary = SegmentSummary {
        width: img.width,
        height: img.height,
        regions: out.labeling.num_labels,
        coverage: out.labeling.coverage,
    };
    fs::write(
        config.output_dir.join("segments.json"),
        serde_json::to_string_pretty(&summary).expect("summary serializes"),
    )?;
    println!(
        "segmented {}x{} image into {} regions, coverage {:.4}",
        summary.width, summary.height, summary.regions, summary.coverage
    );
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct BenchRun {
    pub n: usize,
    pub index_ms: f64,
    pub density_ms: f64,
    pub grow_ms: f64,
    pub graph_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct BenchReport {
    pub runs: Vec<BenchRun>,
    /// total time ratios t(2n)/t(n) between consecutive sizes
    pub doubling_ratios: Vec<f64>,
}

/// Times the pipeline stages on generated 2-d blobs at doubling sizes
/// with fixed `k_d = k_s = 15`.
pub fn cmd_bench(config: &RunConfig) -> Result<BenchReport> {
    let sizes = [10_000usize, 20_000, 40_000, 80_000];
    let pipeline_config = PipelineConfig {
        k_d: 15,
        k_s: 15,
        alpha: config.alpha,
        epsilon: config.epsilon,
        bandwidth_floor: None,
    };

    // warm up allocators and thread pools outside the timed runs
    let warmup = gen_blobs(2_000, 5, 0.6, 5.0, config.seed);
    run_pipeline(&warmup.points, &pipeline_config)?;

    let mut runs = Vec::new();
    println!(
        "{:>8} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "n", "index ms", "density ms", "grow ms", "graph ms", "total ms"
    );
    for &n in &sizes {
        let set = gen_blobs(n, 5, 0.6, 5.0, config.seed);
        let out = run_pipeline(&set.points, &pipeline_config)?;
        let t = out.timings;
        let run = BenchRun {
            n,
            index_ms: t.index.as_secs_f64() * 1e3,
            density_ms: t.density.as_secs_f64() * 1e3,
            grow_ms: t.grow.as_secs_f64() * 1e3,
            graph_ms: t.graph.as_secs_f64() * 1e3,
            total_ms: t.total().as_secs_f64() * 1e3,
        };
        println!(
            "{:>8} {:>10.1} {:>10.1} {:>10.1} {:>10.1} {:>10.1}",
            run.n, run.index_ms, run.density_ms, run.grow_ms, run.graph_ms, run.total_ms
        );
        runs.push(run);
    }

    let doubling_ratios: Vec<f64> = runs
        .windows(2)
        .map(|w| w[1].total_ms / w[0].total_ms)
        .collect();
    for (i, r) in doubling_ratios.iter().enumerate() {
        println!(
            "t({}) / t({}) = {:.2}",
            runs[i + 1].n,
            runs[i].n,
            r
        );
    }

    let report = BenchReport {
        runs,
        doubling_ratios,
    };
    fs::create_dir_all(&config.output_dir)?;
    fs::write(
        config.output_dir.join("bench.json"),
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn base_config(dir: &Path) -> RunConfig {
        RunConfig {
            mode: Mode::Cluster,
            input: None,
            output_dir: dir.to_path_buf(),
            k_d: 10,
            k_s: 8,
            alpha: 0.2,
            epsilon: 0.0,
            seed: 0,
            label_column: None,
            standardize: false,
        }
    }

    fn write_blob_csv(path: &Path, with_labels: bool) {
        let set = gen_blobs(120, 2, 0.2, 3.0, 9);
        let mut file = fs::File::create(path).unwrap();
        if with_labels {
            writeln!(file, "x,y,target").unwrap();
        }
        let truth = set.truth.as_ref().unwrap();
        for (i, row) in set.points.rows().enumerate() {
            if with_labels {
                writeln!(file, "{},{},c{}", row[0], row[1], truth[i]).unwrap();
            } else {
                writeln!(file, "{},{}", row[0], row[1]).unwrap();
            }
        }
    }

    #[test]
    fn sniff_detects_headers() {
        let dir = tempfile::tempdir().unwrap();
        let with = dir.path().join("with.csv");
        let without = dir.path().join("without.csv");
        write_blob_csv(&with, true);
        write_blob_csv(&without, false);
        assert!(sniff_header(&with).unwrap());
        assert!(!sniff_header(&without).unwrap());
    }

    #[test]
    fn cluster_writes_all_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("blobs.csv");
        write_blob_csv(&input, true);
        let mut config = base_config(&dir.path().join("out"));
        config.input = Some(input);
        config.label_column = Some(ColumnSpec::Name("target".into()));

        let summary = cmd_cluster(&config).unwrap();
        assert_eq!(summary.n, 120);
        assert_eq!(summary.d, 2);
        assert_eq!(summary.num_labels, 2);
        let m = summary.metrics.expect("truth supplied");
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.coverage, 1.0);

        for artifact in ["labels.csv", "graph.json", "metrics.json"] {
            assert!(config.output_dir.join(artifact).exists(), "{artifact}");
        }
        let labels = fs::read_to_string(config.output_dir.join("labels.csv")).unwrap();
        assert!(labels.starts_with("id,label\n0,"));
        assert_eq!(labels.lines().count(), 121);
    }

    #[test]
    fn cluster_without_truth_skips_metrics() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("plain.csv");
        write_blob_csv(&input, false);
        let mut config = base_config(&dir.path().join("out"));
        config.input = Some(input);

        let summary = cmd_cluster(&config).unwrap();
        assert!(summary.metrics.is_none());
        assert!(config.output_dir.join("labels.csv").exists());
        assert!(!config.output_dir.join("metrics.json").exists());
    }

    #[test]
    fn cluster_requires_input() {
        let dir = tempfile::tempdir().unwrap();
        let config = base_config(dir.path());
        assert!(cmd_cluster(&config).is_err());
    }

    #[test]
    fn segment_two_tone_image() {
        // left half black, right half white
        let mut img = crate::data::ImageFrame::new(10, 10);
        for y in 0..10 {
            for x in 0..10 {
                let p = y * 10 + x;
                let v = if x < 5 { 0.0 } else { 255.0 };
                img.r[p] = v;
                img.g[p] = v;
                img.b[p] = v;
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("twotone.png");
        write_png(&input, &img).unwrap();

        let mut config = base_config(&dir.path().join("out"));
        config.mode = Mode::Segment;
        config.input = Some(input);
        config.k_d = 8;
        config.k_s = 6;
        config.alpha = 0.3;

        let summary = cmd_segment(&config).unwrap();
        assert_eq!((summary.width, summary.height), (10, 10));
        assert_eq!(summary.regions, 2);
        assert_eq!(summary.coverage, 1.0);
        assert!(config.output_dir.join("segments.png").exists());
        assert!(config.output_dir.join("segments.json").exists());

        // the rendered map splits exactly at the color boundary
        let rendered = read_png(config.output_dir.join("segments.png")).unwrap();
        let left = (rendered.r[0], rendered.g[0], rendered.b[0]);
        let right = (rendered.r[9], rendered.g[9], rendered.b[9]);
        assert_ne!(left, right);
        for y in 0..10 {
            for x in 0..10 {
                let p = y * 10 + x;
                let want = if x < 5 { left } else { right };
                assert_eq!((rendered.r[p], rendered.g[p], rendered.b[p]), want);
            }
        }
    }

    #[test]
    fn segment_rejects_uniform_requires_input() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = base_config(dir.path());
        config.mode = Mode::Segment;
        assert!(cmd_segment(&config).is_err());
    }
}
