//! Datasets, synthetic generators and seeded sample streams.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{OdaError, Result};

/// Class identifier. Human-readable names live in [`Dataset::class_names`].
pub type ClassId = u32;

/// Geometry of one feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureShape {
    Vector(usize),
    Image { rows: usize, cols: usize },
}

impl FeatureShape {
    pub fn len(&self) -> usize {
        match *self {
            Self::Vector(n) => n,
            Self::Image { rows, cols } => rows * cols,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_image(&self) -> bool {
        matches!(self, Self::Image { .. })
    }
}

impl fmt::Display for FeatureShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Vector(n) => write!(f, "[{n}]"),
            Self::Image { rows, cols } => write!(f, "[{rows}x{cols}]"),
        }
    }
}

/// Labeled (or unlabeled) feature vectors sharing one shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Vec<f64>>,
    pub labels: Option<Vec<ClassId>>,
    pub shape: FeatureShape,
    /// `class_names[id]` is the external name of class `id`.
    pub class_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        samples: Vec<Vec<f64>>,
        labels: Option<Vec<ClassId>>,
        shape: FeatureShape,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if samples.iter().any(|s| s.len() != shape.len()) {
            return Err(OdaError::usage(format!("all samples must have shape {shape}")));
        }
        if let Some(l) = &labels {
            if l.len() != samples.len() {
                return Err(OdaError::usage(format!(
                    "{} labels for {} samples",
                    l.len(),
                    samples.len()
                )));
            }
            if l.iter().any(|&c| c as usize >= class_names.len()) {
                return Err(OdaError::usage("label id without a class name"));
            }
        }
        Ok(Self {
            samples,
            labels,
            shape,
            class_names,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn is_labeled(&self) -> bool {
        self.labels.is_some()
    }

    pub fn label(&self, i: usize) -> Option<ClassId> {
        self.labels.as_ref().map(|l| l[i])
    }

    /// Distinct class ids that actually occur, ascending.
    pub fn class_set(&self) -> Vec<ClassId> {
        let Some(labels) = &self.labels else {
            return Vec::new();
        };
        let mut seen = vec![false; self.class_names.len()];
        labels.iter().for_each(|&c| seen[c as usize] = true);
        (0..seen.len() as ClassId).filter(|&c| seen[c as usize]).collect()
    }

    /// First `n` samples (or all, if fewer).
    pub fn head(&self, n: usize) -> Self {
        let n = n.min(self.len());
        Self {
            samples: self.samples[..n].to_vec(),
            labels: self.labels.as_ref().map(|l| l[..n].to_vec()),
            shape: self.shape,
            class_names: self.class_names.clone(),
        }
    }

    /// Re-expresses labels against another class-name table (e.g. a model's).
    ///
    /// Classes unknown to `names` are appended so that no sample is dropped;
    /// they can never be predicted correctly.
    pub fn relabel_to(&self, names: &[String]) -> Self {
        let mut table = names.to_vec();
        let labels = self.labels.as_ref().map(|labels| {
            let map: Vec<ClassId> = self
                .class_names
                .iter()
                .map(|n| match table.iter().position(|t| t == n) {
                    Some(i) => i as ClassId,
                    None => {
                        table.push(n.clone());
                        (table.len() - 1) as ClassId
                    }
                })
                .collect();
            labels.iter().map(|&c| map[c as usize]).collect()
        });
        Self {
            samples: self.samples.clone(),
            labels,
            shape: self.shape,
            class_names: table,
        }
    }

    /// Per-coordinate mean and population variance.
    pub fn moments(&self) -> (Vec<f64>, Vec<f64>) {
        let mut stats = RunningStats::new(self.dim());
        self.samples.iter().for_each(|s| stats.push(s));
        (stats.mean().to_vec(), stats.variance())
    }
}

/// Welford per-coordinate running mean and variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunningStats {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RunningStats {
    pub fn new(dim: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    pub fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let d = v - *m;
            *m += d / n;
            *s += d * (v - *m);
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn variance(&self) -> Vec<f64> {
        if self.count < 2 {
            return vec![0.0; self.mean.len()];
        }
        let n = self.count as f64;
        self.m2.iter().map(|s| s / n).collect()
    }

    pub fn std(&self) -> Vec<f64> {
        self.variance().into_iter().map(f64::sqrt).collect()
    }

    pub fn total_variance(&self) -> f64 {
        self.variance().iter().sum()
    }
}

fn numeric_names(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// Isotropic Gaussian clusters, `n_per_class` samples per center, label = center index.
pub fn gen_gaussians(seed: u64, n_per_class: usize, centers: &[Vec<f64>], std: f64) -> Result<Dataset> {
    if centers.is_empty() {
        return Err(OdaError::usage("at least one center is required"));
    }
    let dim = centers[0].len();
    if dim == 0 || centers.iter().any(|c| c.len() != dim) {
        return Err(OdaError::usage("centers must share a non-zero dimension"));
    }
    if !(std >= 0.0) || !std.is_finite() {
        return Err(OdaError::usage("std must be finite and non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, std).expect("validated std");
    let mut samples = Vec::with_capacity(n_per_class * centers.len());
    let mut labels = Vec::with_capacity(samples.capacity());
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..n_per_class {
            samples.push(center.iter().map(|m| m + normal.sample(&mut rng)).collect());
            labels.push(c as ClassId);
        }
    }
    Dataset::new(samples, Some(labels), FeatureShape::Vector(dim), numeric_names(centers.len()))
}

/// Concentric noisy circles in the plane, one class per radius.
pub fn gen_circles(seed: u64, n_per_class: usize, radii: &[f64], noise_std: f64) -> Result<Dataset> {
    if radii.is_empty() {
        return Err(OdaError::usage("at least one radius is required"));
    }
    if radii.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(OdaError::usage("radii must be strictly increasing"));
    }
    if !(noise_std >= 0.0) || !noise_std.is_finite() {
        return Err(OdaError::usage("noise_std must be finite and non-negative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, noise_std).expect("validated std");
    let mut samples = Vec::with_capacity(n_per_class * radii.len());
    let mut labels = Vec::with_capacity(samples.capacity());
    for (c, &r0) in radii.iter().enumerate() {
        for _ in 0..n_per_class {
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            let r = r0 + normal.sample(&mut rng);
            samples.push(vec![r * theta.cos(), r * theta.sin()]);
            labels.push(c as ClassId);
        }
    }
    Dataset::new(samples, Some(labels), FeatureShape::Vector(2), numeric_names(radii.len()))
}

/// Which column of a CSV file holds the label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl LabelColumn {
    /// Parses a column selector: a bare integer is an index, anything else a header name.
    pub fn parse(s: &str) -> Self {
        s.parse().map(Self::Index).unwrap_or_else(|_| Self::Name(s.to_string()))
    }
}

fn sort_class_names(names: &mut [String]) {
    let all_int = names.iter().all(|n| n.parse::<i64>().is_ok());
    if all_int {
        names.sort_by_key(|n| n.parse::<i64>().unwrap());
    } else {
        names.sort();
    }
}

/// Reads comma-separated numeric rows with an optional header line.
///
/// A first line containing any non-numeric feature field is treated as a
/// header. Label values are categorical; ids follow numeric order when every
/// label is an integer and lexicographic order otherwise.
pub fn load_csv(path: &Path, label_column: Option<&LabelColumn>) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| OdaError::load(path, e.to_string()))?;
    parse_csv(&text, label_column).map_err(|msg| OdaError::load(path, msg))
}

fn parse_csv(text: &str, label_column: Option<&LabelColumn>) -> std::result::Result<Dataset, String> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .peekable();
    let header: Option<Vec<String>> = match lines.peek() {
        Some((_, first)) => {
            let fields: Vec<&str> = first.split(',').map(str::trim).collect();
            let label_idx = match label_column {
                Some(LabelColumn::Index(i)) => Some(*i),
                _ => None,
            };
            let numeric = fields
                .iter()
                .enumerate()
                .filter(|(i, _)| Some(*i) != label_idx)
                .all(|(_, f)| f.parse::<f64>().is_ok());
            let by_name = matches!(label_column, Some(LabelColumn::Name(n)) if fields.contains(&n.as_str()));
            if !numeric || by_name {
                let h = fields.iter().map(|s| s.to_string()).collect();
                lines.next();
                Some(h)
            } else {
                None
            }
        }
        None => None,
    };
    let label_idx = match label_column {
        None => None,
        Some(LabelColumn::Index(i)) => Some(*i),
        Some(LabelColumn::Name(name)) => {
            let h = header
                .as_ref()
                .ok_or_else(|| format!("label column '{name}' requested but file has no header"))?;
            Some(
                h.iter()
                    .position(|c| c == name)
                    .ok_or_else(|| format!("missing label column '{name}'"))?,
            )
        }
    };
    let mut arity = header.as_ref().map(Vec::len);
    let mut samples = Vec::new();
    let mut raw_labels = Vec::new();
    for (lineno, line) in lines {
        let row = lineno + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        match arity {
            Some(a) if a != fields.len() => {
                return Err(format!("row {row}: expected {a} fields, found {}", fields.len()))
            }
            None => arity = Some(fields.len()),
            _ => {}
        }
        if let Some(li) = label_idx {
            if li >= fields.len() {
                return Err(format!("row {row}: missing label column {li}"));
            }
        }
        let mut x = Vec::with_capacity(fields.len());
        for (i, f) in fields.iter().enumerate() {
            if Some(i) == label_idx {
                raw_labels.push(f.to_string());
                continue;
            }
            let v: f64 = f
                .parse()
                .map_err(|_| format!("row {row}: non-numeric feature '{f}' in column {i}"))?;
            if !v.is_finite() {
                return Err(format!("row {row}: non-finite feature in column {i}"));
            }
            x.push(v);
        }
        samples.push(x);
    }
    let dim = match (arity, label_idx) {
        (Some(a), Some(_)) => a - 1,
        (Some(a), None) => a,
        (None, _) => 0,
    };
    let (labels, class_names) = if label_idx.is_some() {
        let mut names: Vec<String> = raw_labels.clone();
        names.sort();
        names.dedup();
        sort_class_names(&mut names);
        let ids = raw_labels
            .iter()
            .map(|l| names.iter().position(|n| n == l).unwrap() as ClassId)
            .collect();
        (Some(ids), names)
    } else {
        (None, Vec::new())
    };
    Dataset::new(samples, labels, FeatureShape::Vector(dim), class_names).map_err(|e| e.to_string())
}

/// Writes a dataset as CSV with header `x0,...,x{d-1}[,label]`.
///
/// Floats use the shortest representation that parses back to the same value,
/// so [`load_csv`] recovers the data exactly.
pub fn save_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    write_csv(dataset, &mut out)?;
    fs::write(path, out)?;
    Ok(())
}

pub fn write_csv(dataset: &Dataset, out: &mut impl Write) -> Result<()> {
    let mut header: Vec<String> = (0..dataset.dim()).map(|j| format!("x{j}")).collect();
    if dataset.is_labeled() {
        header.push("label".into());
    }
    writeln!(out, "{}", header.join(","))?;
    for (i, s) in dataset.samples.iter().enumerate() {
        let mut fields: Vec<String> = s.iter().map(|v| format!("{v:?}")).collect();
        if let Some(c) = dataset.label(i) {
            fields.push(dataset.class_names[c as usize].clone());
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

const IDX_IMAGES_MAGIC: u32 = 2051;
const IDX_LABELS_MAGIC: u32 = 2049;

fn be_u32(bytes: &[u8], at: usize) -> Option<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
}

/// Loads an IDX image/label file pair; pixels are scaled by `1/255`.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let images = fs::read(images_path).map_err(|e| OdaError::load(images_path, e.to_string()))?;
    let labels = fs::read(labels_path).map_err(|e| OdaError::load(labels_path, e.to_string()))?;
    parse_idx(&images, &labels).map_err(|(which, msg)| {
        OdaError::load(if which == 0 { images_path } else { labels_path }, msg)
    })
}

fn parse_idx(images: &[u8], labels: &[u8]) -> std::result::Result<Dataset, (u8, String)> {
    let magic = be_u32(images, 0).ok_or((0, "truncated header".to_string()))?;
    if magic != IDX_IMAGES_MAGIC {
        return Err((0, format!("bad magic {magic}, expected {IDX_IMAGES_MAGIC}")));
    }
    let (count, rows, cols) = match (be_u32(images, 4), be_u32(images, 8), be_u32(images, 12)) {
        (Some(n), Some(r), Some(c)) => (n as usize, r as usize, c as usize),
        _ => return Err((0, "truncated header".to_string())),
    };
    let magic = be_u32(labels, 0).ok_or((1, "truncated header".to_string()))?;
    if magic != IDX_LABELS_MAGIC {
        return Err((1, format!("bad magic {magic}, expected {IDX_LABELS_MAGIC}")));
    }
    let label_count = be_u32(labels, 4).ok_or((1, "truncated header".to_string()))? as usize;
    if label_count != count {
        return Err((1, format!("{label_count} labels for {count} images")));
    }
    let pixels = rows * cols;
    if images.len() < 16 + count * pixels {
        return Err((0, format!("truncated: expected {} bytes, found {}", 16 + count * pixels, images.len())));
    }
    if labels.len() < 8 + count {
        return Err((1, format!("truncated: expected {} bytes, found {}", 8 + count, labels.len())));
    }
    let samples = images[16..16 + count * pixels]
        .chunks_exact(pixels)
        .map(|img| img.iter().map(|&p| p as f64 / 255.0).collect())
        .collect();
    let ids: Vec<ClassId> = labels[8..8 + count].iter().map(|&l| l as ClassId).collect();
    let n_classes = ids.iter().copied().max().map_or(0, |m| m as usize + 1);
    Dataset::new(samples, Some(ids), FeatureShape::Image { rows, cols }, numeric_names(n_classes))
        .map_err(|e| (0, e.to_string()))
}

/// Order in which a [`SampleStream`] visits the dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderPolicy {
    /// i.i.d. uniform indices, unbounded.
    #[default]
    WithReplacement,
    /// A fresh permutation every epoch, unbounded.
    EpochShuffle,
    /// Dataset order, one pass.
    AsIs,
}

impl std::str::FromStr for OrderPolicy {
    type Err = OdaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "replacement" | "with_replacement" => Ok(Self::WithReplacement),
            "epoch" | "epoch_shuffle" => Ok(Self::EpochShuffle),
            "as_is" | "as-is" => Ok(Self::AsIs),
            _ => Err(OdaError::usage(format!("unknown stream policy '{s}'"))),
        }
    }
}

/// One observation drawn from a stream.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    pub index: usize,
    pub x: &'a [f64],
    pub label: Option<ClassId>,
}

/// Seeded, replayable one-at-a-time view over a dataset.
#[derive(Debug, Clone)]
pub struct SampleStream<'a> {
    dataset: &'a Dataset,
    policy: OrderPolicy,
    rng: ChaCha8Rng,
    order: Vec<usize>,
    cursor: usize,
    done: bool,
}

impl<'a> SampleStream<'a> {
    pub fn new(dataset: &'a Dataset, seed: u64, policy: OrderPolicy) -> Result<Self> {
        if dataset.is_empty() {
            return Err(OdaError::usage("cannot stream an empty dataset"));
        }
        let order = match policy {
            OrderPolicy::WithReplacement => Vec::new(),
            _ => (0..dataset.len()).collect(),
        };
        let mut s = Self {
            dataset,
            policy,
            rng: ChaCha8Rng::seed_from_u64(seed),
            order,
            cursor: 0,
            done: false,
        };
        if policy == OrderPolicy::EpochShuffle {
            s.order.shuffle(&mut s.rng);
        }
        Ok(s)
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.dataset
    }

    fn next_index(&mut self) -> Option<usize> {
        if self.done {
            return None;
        }
        match self.policy {
            OrderPolicy::WithReplacement => Some(self.rng.random_range(0..self.dataset.len())),
            OrderPolicy::EpochShuffle => {
                if self.cursor == self.order.len() {
                    self.order.shuffle(&mut self.rng);
                    self.cursor = 0;
                }
                self.cursor += 1;
                Some(self.order[self.cursor - 1])
            }
            OrderPolicy::AsIs => {
                if self.cursor == self.order.len() {
                    self.done = true;
                    return None;
                }
                self.cursor += 1;
                Some(self.cursor - 1)
            }
        }
    }
}

impl<'a> Iterator for SampleStream<'a> {
    type Item = Observation<'a>;

    fn next(&mut self) -> Option<Self::Item> {
        let index = self.next_index()?;
        Some(Observation {
            index,
            x: &self.dataset.samples[index],
            label: self.dataset.label(index),
        })
    }
}

/// Shorthand for [`SampleStream::new`].
pub fn stream(dataset: &Dataset, seed: u64, policy: OrderPolicy) -> Result<SampleStream<'_>> {
    SampleStream::new(dataset, seed, policy)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs(seed: u64) -> Dataset {
        gen_gaussians(seed, 750, &[vec![-3.0, 0.0], vec![3.0, 0.0]], 1.0).unwrap()
    }

    #[test]
    fn gaussians_zero_std_sit_on_centers() {
        let d = gen_gaussians(1, 5, &[vec![1.0, 2.0], vec![-1.0, 0.5]], 0.0).unwrap();
        for (i, s) in d.samples.iter().enumerate() {
            let c = d.label(i).unwrap();
            let center = if c == 0 { [1.0, 2.0] } else { [-1.0, 0.5] };
            assert_eq!(s.as_slice(), &center);
        }
    }

    #[test]
    fn gaussians_midpoint_oracle() {
        let d = blobs(11);
        let correct = d
            .samples
            .iter()
            .enumerate()
            .filter(|(i, s)| (s[0] > 0.0) as ClassId == d.label(*i).unwrap())
            .count();
        assert!(correct as f64 / d.len() as f64 >= 0.97);
        assert_eq!(d, blobs(11));
        assert_ne!(d, blobs(12));
    }

    #[test]
    fn circles_properties() {
        let d = gen_circles(7, 100, &[1.0, 2.0], 0.0).unwrap();
        for (i, s) in d.samples.iter().enumerate() {
            if d.label(i) == Some(0) {
                assert!((s[0].hypot(s[1]) - 1.0).abs() < 1e-12);
            }
        }
        let d = gen_circles(7, 750, &[1.0, 2.0], 0.1).unwrap();
        assert_eq!(d.len(), 1500);
        let correct = d
            .samples
            .iter()
            .enumerate()
            .filter(|(i, s)| (s[0].hypot(s[1]) > 1.5) as ClassId == d.label(*i).unwrap())
            .count();
        assert!(correct as f64 / 1500.0 >= 0.99);
        assert!(gen_circles(7, 10, &[2.0, 1.0], 0.1).is_err());
    }

    #[test]
    fn csv_with_header_and_labels() {
        let text = "x,y,label\n1,2,a\n3,4,b\n5,6,a\n";
        let d = parse_csv(text, Some(&LabelColumn::Name("label".into()))).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.class_set().len(), 2);
        assert_eq!(d.samples[1], vec![3.0, 4.0]);
        assert_eq!(d.class_names, vec!["a", "b"]);
        let u = parse_csv(text.replace(",a", "").replace(",b", "").replace(",label", "").as_str(), None).unwrap();
        assert!(!u.is_labeled());
        assert_eq!(u.dim(), 2);
    }

    #[test]
    fn csv_errors_carry_row_numbers() {
        let e = parse_csv("x,y\n1,2\n3\n", None).unwrap_err();
        assert!(e.contains("row 3"), "{e}");
        let e = parse_csv("x,y\n1,2\n3,zz\n", None).unwrap_err();
        assert!(e.contains("row 3"), "{e}");
        let e = parse_csv("x,y\n1,2\n", Some(&LabelColumn::Name("label".into()))).unwrap_err();
        assert!(e.contains("missing label column"), "{e}");
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let d = gen_circles(7, 750, &[1.0, 2.0], 0.1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        save_csv(&d, &p).unwrap();
        let back = load_csv(&p, Some(&LabelColumn::Name("label".into()))).unwrap();
        assert_eq!(back, d);
    }

    fn idx_pair(n: u32, rows: u32, cols: u32) -> (Vec<u8>, Vec<u8>) {
        let mut img = Vec::new();
        for v in [IDX_IMAGES_MAGIC, n, rows, cols] {
            img.extend(v.to_be_bytes());
        }
        img.extend((0..n * rows * cols).map(|i| (i % 256) as u8));
        let mut lab = Vec::new();
        for v in [IDX_LABELS_MAGIC, n] {
            lab.extend(v.to_be_bytes());
        }
        lab.extend((0..n).map(|i| (i % 10) as u8));
        (img, lab)
    }

    #[test]
    fn idx_parsing() {
        let (img, lab) = idx_pair(12, 4, 4);
        let d = parse_idx(&img, &lab).unwrap();
        assert_eq!(d.len(), 12);
        assert_eq!(d.shape, FeatureShape::Image { rows: 4, cols: 4 });
        assert_eq!(d.samples[0][255 % 16], 15.0 / 255.0);
        assert_eq!(d.class_set().len(), 10);
        assert!(d.samples.iter().flatten().all(|&p| (0.0..=1.0).contains(&p)));
    }

    #[test]
    fn idx_errors() {
        let (img, lab) = idx_pair(3, 2, 2);
        assert!(parse_idx(&img[..img.len() - 1], &lab).is_err());
        assert!(parse_idx(&img, &lab[..lab.len() - 1]).is_err());
        let mut bad = img.clone();
        bad[3] = 0;
        assert!(parse_idx(&bad, &lab).unwrap_err().1.contains("magic"));
        let (_, lab4) = idx_pair(4, 2, 2);
        assert!(parse_idx(&img, &lab4).is_err());
    }

    #[test]
    fn streams_are_deterministic() {
        let d = blobs(1);
        let a: Vec<usize> = stream(&d, 5, OrderPolicy::WithReplacement).unwrap().take(50).map(|o| o.index).collect();
        let b: Vec<usize> = stream(&d, 5, OrderPolicy::WithReplacement).unwrap().take(50).map(|o| o.index).collect();
        assert_eq!(a, b);
        let as_is: Vec<usize> = stream(&d, 5, OrderPolicy::AsIs).unwrap().map(|o| o.index).collect();
        assert_eq!(as_is, (0..d.len()).collect::<Vec<_>>());
        let mut epoch: Vec<usize> = stream(&d, 5, OrderPolicy::EpochShuffle).unwrap().take(d.len()).map(|o| o.index).collect();
        epoch.sort_unstable();
        assert_eq!(epoch, (0..d.len()).collect::<Vec<_>>());
    }

    #[test]
    fn replacement_frequencies_are_uniform() {
        let d = gen_circles(7, 750, &[1.0, 2.0], 0.1).unwrap();
        let mut counts = vec![0u32; d.len()];
        for o in stream(&d, 99, OrderPolicy::WithReplacement).unwrap().take(100_000) {
            counts[o.index] += 1;
        }
        let p: f64 = 1.0 / 1500.0;
        let mean = 100_000.0 * p;
        let sigma = (100_000.0 * p * (1.0 - p)).sqrt();
        assert!(counts.iter().all(|&c| (c as f64 - mean).abs() <= 5.0 * sigma));
    }

    #[test]
    fn empty_stream_is_usage_error() {
        let d = Dataset::new(vec![], None, FeatureShape::Vector(2), vec![]).unwrap();
        assert!(matches!(stream(&d, 0, OrderPolicy::AsIs), Err(OdaError::Usage(_))));
    }

    #[test]
    fn relabel_maps_by_name() {
        let d = Dataset::new(
            vec![vec![0.0], vec![1.0]],
            Some(vec![0, 1]),
            FeatureShape::Vector(1),
            vec!["b".into(), "z".into()],
        )
        .unwrap();
        let r = d.relabel_to(&["a".into(), "b".into()]);
        assert_eq!(r.labels, Some(vec![1, 2]));
        assert_eq!(r.class_names, vec!["a", "b", "z"]);
    }
}
