//! Dataset tooling: seeded toy generators, a CSV loader with mean
//! imputation, and pixel/sample conversion for segmentation.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::points::Points;
use crate::topology::NOISE_LABEL;

/// A point matrix with optional ground truth and column names.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub points: Points,
    pub truth: Option<Vec<i64>>,
    pub names: Option<Vec<String>>,
}

/// An 8-bit RGB image held as three real-valued planes in `[0, 255]`,
/// raster row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageFrame {
    pub width: usize,
    pub height: usize,
    pub r: Vec<f64>,
    pub g: Vec<f64>,
    pub b: Vec<f64>,
}

impl ImageFrame {
    pub fn new(width: usize, height: usize) -> Self {
        let n = width * height;
        Self {
            width,
            height,
            r: vec![0.0; n],
            g: vec![0.0; n],
            b: vec![0.0; n],
        }
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }
}

fn noise_draws(rng: &mut ChaCha8Rng, n: usize, sigma: f64) -> Vec<(f64, f64)> {
    if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma).expect("finite sigma");
        (0..n)
            .map(|_| (normal.sample(rng), normal.sample(rng)))
            .collect()
    } else {
        vec![(0.0, 0.0); n]
    }
}

/// Two concentric circles (radii 1.0 and 0.5) with isotropic Gaussian
/// noise. Class 0 is the outer circle. Angles are drawn before noise, so
/// `gen_circles(n, 0.0, seed)` is the exact noiseless skeleton of
/// `gen_circles(n, sigma, seed)`.
pub fn gen_circles(n: usize, sigma: f64, seed: u64) -> Result<SampleSet> {
    if n < 4 {
        return Err(Error::InvalidParam(format!(
            "need at least 4 points, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angles: Vec<f64> = (0..n)
        .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
        .collect();
    let noise = noise_draws(&mut rng, n, sigma);

    let n_outer = n - n / 2;
    let mut data = Vec::with_capacity(2 * n);
    let mut truth = Vec::with_capacity(n);
    for i in 0..n {
        let (radius, class) = if i < n_outer { (1.0, 0) } else { (0.5, 1) };
        data.push(radius * angles[i].cos() + noise[i].0);
        data.push(radius * angles[i].sin() + noise[i].1);
        truth.push(class);
    }
    Ok(SampleSet {
        points: Points::from_flat(n, 2, data)?,
        truth: Some(truth),
        names: None,
    })
}

/// Two interleaved half-circles with isotropic Gaussian noise. Class 0 is
/// the upper arc around the origin; class 1 is its reflection shifted to
/// center (1, 0.5). Same skeleton/noise split as [`gen_circles`].
pub fn gen_moons(n: usize, sigma: f64, seed: u64) -> Result<SampleSet> {
    if n < 4 {
        return Err(Error::InvalidParam(format!(
            "need at least 4 points, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angles: Vec<f64> = (0..n)
        .map(|_| rng.gen_range(0.0..std::f64::consts::PI))
        .collect();
    let noise = noise_draws(&mut rng, n, sigma);

    let n_upper = n - n / 2;
    let mut data = Vec::with_capacity(2 * n);
    let mut truth = Vec::with_capacity(n);
    for i in 0..n {
        let (x, y, class) = if i < n_upper {
            (angles[i].cos(), angles[i].sin(), 0)
        } else {
            (1.0 - angles[i].cos(), 0.5 - angles[i].sin(), 1)
        };
        data.push(x + noise[i].0);
        data.push(y + noise[i].1);
        truth.push(class);
    }
    Ok(SampleSet {
        points: Points::from_flat(n, 2, data)?,
        truth: Some(truth),
        names: None,
    })
}

/// `centers` isotropic Gaussian blobs with their means equally spaced on a
/// circle of the given radius (a single center sits at the origin only
/// when `radius` is 0). Point `i` belongs to blob `i % centers`.
pub fn gen_blobs(n: usize, centers: usize, sigma: f64, radius: f64, seed: u64) -> SampleSet {
    assert!(centers >= 1, "need at least one center");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean: Vec<(f64, f64)> = (0..centers)
        .map(|j| {
            let theta = std::f64::consts::TAU * j as f64 / centers as f64;
            (radius * theta.cos(), radius * theta.sin())
        })
        .collect();
    let noise = noise_draws(&mut rng, n, sigma);
    let mut data = Vec::with_capacity(2 * n);
    let mut truth = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % centers;
        data.push(mean[c].0 + noise[i].0);
        data.push(mean[c].1 + noise[i].1);
        truth.push(c as i64);
    }
    SampleSet {
        points: Points::from_flat(n, 2, data).expect("sized buffer"),
        truth: Some(truth),
        names: None,
    }
}

/// Hermetic smiley-face toy: a face ring (class 0), two eye blobs
/// (classes 1 and 2) and a mouth arc (class 3). `sigma` jitters the ring
/// and mouth; the eyes always scatter with a fixed 0.05 spread.
pub fn gen_smile(n: usize, sigma: f64, seed: u64) -> Result<SampleSet> {
    if n < 8 {
        return Err(Error::InvalidParam(format!(
            "need at least 8 points, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ring_n = n * 2 / 5;
    let eye_n = n * 3 / 20;
    let mouth_n = n - ring_n - 2 * eye_n;

    let eye_scatter = Normal::new(0.0, 0.05).expect("fixed sigma");
    let mut data = Vec::with_capacity(2 * n);
    let mut truth = Vec::with_capacity(n);
    let mut jitter = |rng: &mut ChaCha8Rng| -> (f64, f64) {
        if sigma > 0.0 {
            let normal = Normal::new(0.0, sigma).expect("finite sigma");
            (normal.sample(rng), normal.sample(rng))
        } else {
            (0.0, 0.0)
        }
    };

    for _ in 0..ring_n {
        let theta = rng.gen_range(0.0..std::f64::consts::TAU);
        let (jx, jy) = jitter(&mut rng);
        data.push(theta.cos() + jx);
        data.push(theta.sin() + jy);
        truth.push(0);
    }
    for (class, cx) in [(1i64, -0.35), (2, 0.35)] {
        for _ in 0..eye_n {
            data.push(cx + eye_scatter.sample(&mut rng));
            data.push(0.35 + eye_scatter.sample(&mut rng));
            truth.push(class);
        }
    }
    let lo = std::f64::consts::PI + 0.4;
    let hi = std::f64::consts::TAU - 0.4;
    for _ in 0..mouth_n {
        let theta = rng.gen_range(lo..hi);
        let (jx, jy) = jitter(&mut rng);
        data.push(0.55 * theta.cos() + jx);
        data.push(0.2 + 0.55 * theta.sin() + jy);
        truth.push(3);
    }

    Ok(SampleSet {
        points: Points::from_flat(n, 2, data)?,
        truth: Some(truth),
        names: None,
    })
}

/// Selects the label column of a CSV by header name or 0-based index.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnSpec {
    Name(String),
    Index(usize),
}

impl FromStr for ColumnSpec {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnSpec::Index(i),
            Err(_) => ColumnSpec::Name(s.to_string()),
        })
    }
}

impl std::fmt::Display for ColumnSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ColumnSpec::Name(n) => write!(f, "{n}"),
            ColumnSpec::Index(i) => write!(f, "{i}"),
        }
    }
}

/// Loads a comma-delimited file. Empty cells count as missing and are
/// imputed with the column mean over present values; the label column, if
/// named, is mapped to integer codes in order of first appearance.
pub fn load_csv(
    path: impl AsRef<Path>,
    has_header: bool,
    label_column: Option<&ColumnSpec>,
) -> Result<SampleSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;

    let mut records: Vec<csv::StringRecord> = Vec::new();
    for record in reader.records() {
        records.push(record?);
    }
    let header: Option<Vec<String>> = if has_header {
        if records.is_empty() {
            return Err(Error::EmptySampleSet);
        }
        Some(records.remove(0).iter().map(|s| s.to_string()).collect())
    } else {
        None
    };
    if records.is_empty() {
        return Err(Error::EmptySampleSet);
    }
    let width = records[0].len();

    let label_idx: Option<usize> = match label_column {
        None => None,
        Some(ColumnSpec::Index(i)) => {
            if *i >= width {
                return Err(Error::InvalidParam(format!(
                    "label column index {i} out of range for {width} columns"
                )));
            }
            Some(*i)
        }
        Some(ColumnSpec::Name(name)) => {
            let header = header.as_ref().ok_or_else(|| {
                Error::InvalidParam(format!(
                    "label column '{name}' given by name but the file has no header"
                ))
            })?;
            Some(header.iter().position(|h| h == name).ok_or_else(|| {
                Error::InvalidParam(format!("label column '{name}' not found in header"))
            })?)
        }
    };

    let feature_cols: Vec<usize> = (0..width).filter(|c| Some(*c) != label_idx).collect();
    let n = records.len();
    let d = feature_cols.len();
    if d == 0 {
        return Err(Error::InvalidParam("no feature columns".into()));
    }

    let mut data = vec![f64::NAN; n * d];
    let mut truth: Option<Vec<i64>> = label_idx.map(|_| Vec::with_capacity(n));
    let mut label_codes: HashMap<String, i64> = HashMap::new();

    for (row, record) in records.iter().enumerate() {
        for (k, &col) in feature_cols.iter().enumerate() {
            let cell = record.get(col).unwrap_or("");
            if cell.is_empty() {
                continue; // missing, imputed below
            }
            let value: f64 = cell.parse().map_err(|_| Error::BadCell {
                row,
                col,
                reason: format!("'{cell}' is not numeric"),
            })?;
            data[row * d + k] = value;
        }
        if let (Some(col), Some(truth)) = (label_idx, truth.as_mut()) {
            let cell = record.get(col).unwrap_or("");
            if cell.is_empty() {
                return Err(Error::BadCell {
                    row,
                    col,
                    reason: "missing label".into(),
                });
            }
            let next = label_codes.len() as i64;
            truth.push(*label_codes.entry(cell.to_string()).or_insert(next));
        }
    }

    // mean imputation per feature column
    for k in 0..d {
        let mut sum = 0.0;
        let mut present = 0usize;
        for row in 0..n {
            let v = data[row * d + k];
            if !v.is_nan() {
                sum += v;
                present += 1;
            }
        }
        if present == 0 {
            let name = header
                .as_ref()
                .map(|h| h[feature_cols[k]].clone())
                .unwrap_or_else(|| feature_cols[k].to_string());
            return Err(Error::EmptyColumn(name));
        }
        if present < n {
            let mean = sum / present as f64;
            for row in 0..n {
                let v = &mut data[row * d + k];
                if v.is_nan() {
                    *v = mean;
                }
            }
        }
    }

    let names = header.map(|h| {
        feature_cols
            .iter()
            .map(|&c| h[c].clone())
            .collect::<Vec<_>>()
    });
    Ok(SampleSet {
        points: Points::from_flat(n, d, data)?,
        truth,
        names,
    })
}

/// Converts an image into `(r, g, b, x, y)` samples in raster order, raw
/// units; per-dimension bandwidths absorb the scale difference between
/// color and position.
pub fn image_to_samples(img: &ImageFrame) -> SampleSet {
    let n = img.pixels();
    let mut data = Vec::with_capacity(5 * n);
    for y in 0..img.height {
        for x in 0..img.width {
            let p = y * img.width + x;
            data.push(img.r[p]);
            data.push(img.g[p]);
            data.push(img.b[p]);
            data.push(x as f64);
            data.push(y as f64);
        }
    }
    SampleSet {
        points: Points::from_flat(n, 5, data).expect("sized buffer"),
        truth: None,
        names: Some(
            ["r", "g", "b", "x", "y"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        ),
    }
}

const NOISE_COLOR: [u8; 3] = [211, 211, 211];

const PALETTE: [[u8; 3]; 20] = [
    [31, 119, 180],
    [255, 127, 14],
    [44, 160, 44],
    [214, 39, 40],
    [148, 103, 189],
    [140, 86, 75],
    [227, 119, 194],
    [127, 127, 127],
    [188, 189, 34],
    [23, 190, 207],
    [174, 199, 232],
    [255, 187, 120],
    [152, 223, 138],
    [255, 152, 150],
    [197, 176, 213],
    [196, 156, 148],
    [247, 182, 210],
    [199, 199, 199],
    [219, 219, 141],
    [158, 218, 229],
];

/// Deterministic distinct color for a label. Noise is light gray, the
/// first twenty labels use a curated palette, and larger ids map through
/// an invertible 24-bit scramble (re-salted away from reserved colors).
pub fn label_color(label: i64) -> [u8; 3] {
    if label < 0 {
        return NOISE_COLOR;
    }
    let id = label as usize;
    if id < PALETTE.len() {
        return PALETTE[id];
    }
    let mut salt: u32 = 0;
    loop {
        let h = (label as u32)
            .wrapping_add(salt.wrapping_mul(0x85EB_CA6B))
            .wrapping_mul(0x9E37_79B1)
            & 0x00FF_FFFF;
        let c = [(h >> 16) as u8, (h >> 8) as u8, h as u8];
        if c != NOISE_COLOR && !PALETTE.contains(&c) {
            return c;
        }
        salt += 1;
    }
}

/// Renders per-pixel labels into a color image.
pub fn labels_to_image(labels: &[i64], width: usize, height: usize) -> Result<ImageFrame> {
    if labels.len() != width * height {
        return Err(Error::Inconsistent(format!(
            "{} labels for a {}x{} image",
            labels.len(),
            width,
            height
        )));
    }
    let mut img = ImageFrame::new(width, height);
    for (p, &label) in labels.iter().enumerate() {
        let [r, g, b] = label_color(label);
        img.r[p] = r as f64;
        img.g[p] = g as f64;
        img.b[p] = b as f64;
    }
    Ok(img)
}

/// Reads a PNG (or any format the `image` crate sniffs) as RGB.
pub fn read_png(path: impl AsRef<Path>) -> Result<ImageFrame> {
    let rgb = image::open(path.as_ref())?.to_rgb8();
    let (width, height) = (rgb.width() as usize, rgb.height() as usize);
    let mut img = ImageFrame::new(width, height);
    for (p, px) in rgb.pixels().enumerate() {
        img.r[p] = px.0[0] as f64;
        img.g[p] = px.0[1] as f64;
        img.b[p] = px.0[2] as f64;
    }
    Ok(img)
}

/// Writes an [`ImageFrame`] as an 8-bit RGB PNG.
pub fn write_png(path: impl AsRef<Path>, img: &ImageFrame) -> Result<()> {
    let mut out = image::RgbImage::new(img.width as u32, img.height as u32);
    for (p, px) in out.pixels_mut().enumerate() {
        px.0 = [
            img.r[p].round().clamp(0.0, 255.0) as u8,
            img.g[p].round().clamp(0.0, 255.0) as u8,
            img.b[p].round().clamp(0.0, 255.0) as u8,
        ];
    }
    out.save(path.as_ref())?;
    Ok(())
}
