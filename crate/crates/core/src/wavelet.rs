//! Orthonormal Haar multi-resolution analysis.
//!
//! The transform is the two-tap quadrature mirror filter pair
//! `h = [1, 1] / sqrt(2)` (low-pass) and `g = [1, -1] / sqrt(2)` (high-pass)
//! applied with stride two. Inputs are zero-padded to a multiple of
//! `2^levels`; the transform is orthonormal on the padded domain, so energy
//! is conserved and reconstruction is exact up to rounding.
//!
//! Images use the separable construction: one 1D step along every row, then
//! along every column of the two row subbands.

use serde::{Deserialize, Serialize};

use crate::data::FeatureShape;
use crate::error::{OdaError, Result};

const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Largest number of levels accepted for a signal of length `n`.
///
/// Past this point the coarsest approximation already has length one and
/// extra levels would only transform zero padding.
pub fn max_levels(n: usize) -> usize {
    let n = n.max(1);
    (usize::BITS - (n - 1).leading_zeros()) as usize + 1
}

fn padded_len(n: usize, levels: usize) -> usize {
    let block = 1usize << levels;
    n.div_ceil(block) * block
}

fn check_levels(n: usize, levels: usize) -> Result<()> {
    if levels == 0 {
        return Err(OdaError::usage("wavelet transform needs at least one level"));
    }
    if levels > max_levels(n) {
        return Err(OdaError::usage(format!(
            "{levels} levels would reduce a length-{n} approximation below length 1"
        )));
    }
    Ok(())
}

/// One analysis step: returns (approximation, detail), each half the length.
fn analyze(signal: &[f64]) -> (Vec<f64>, Vec<f64>) {
    debug_assert!(signal.len().is_multiple_of(2));
    signal
        .chunks_exact(2)
        .map(|p| ((p[0] + p[1]) * INV_SQRT2, (p[0] - p[1]) * INV_SQRT2))
        .unzip()
}

/// One synthesis step, inverse of [`analyze`].
fn synthesize(approx: &[f64], detail: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(approx.len() * 2);
    for (a, d) in approx.iter().zip(detail) {
        out.push((a + d) * INV_SQRT2);
        out.push((a - d) * INV_SQRT2);
    }
    out
}

/// Multi-level 1D decomposition.
///
/// `approximations[0]` is the padded input and `approximations[l]` the level-`l`
/// approximation; `details[l - 1]` holds the level-`l` detail coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletPyramid1D {
    pub original_length: usize,
    pub approximations: Vec<Vec<f64>>,
    pub details: Vec<Vec<f64>>,
}

impl WaveletPyramid1D {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    pub fn coarsest(&self) -> &[f64] {
        self.approximations.last().expect("pyramid has level 0")
    }

    /// Rebuilds the padded signal from the coarsest approximation and the details.
    pub fn reconstruct_padded(&self) -> Result<Vec<f64>> {
        let levels = self.levels();
        if levels == 0 || self.approximations.len() != levels + 1 {
            return Err(OdaError::usage("inconsistent wavelet pyramid"));
        }
        let mut current = self.coarsest().to_vec();
        for detail in self.details.iter().rev() {
            if detail.len() != current.len() {
                return Err(OdaError::usage(format!(
                    "inconsistent level lengths: approximation {} vs detail {}",
                    current.len(),
                    detail.len()
                )));
            }
            current = synthesize(&current, detail);
        }
        if current.len() < self.original_length {
            return Err(OdaError::usage("pyramid shorter than its original length"));
        }
        Ok(current)
    }
}

/// Forward Haar transform of `signal` over `levels` levels.
pub fn haar_dwt_1d(signal: &[f64], levels: usize) -> Result<WaveletPyramid1D> {
    if signal.is_empty() {
        return Err(OdaError::usage("cannot transform an empty signal"));
    }
    if signal.iter().any(|v| !v.is_finite()) {
        return Err(OdaError::usage("signal contains non-finite values"));
    }
    check_levels(signal.len(), levels)?;
    let mut padded = signal.to_vec();
    padded.resize(padded_len(signal.len(), levels), 0.0);

    let mut approximations = Vec::with_capacity(levels + 1);
    let mut details = Vec::with_capacity(levels);
    approximations.push(padded);
    for _ in 0..levels {
        let (a, d) = analyze(approximations.last().unwrap());
        approximations.push(a);
        details.push(d);
    }
    Ok(WaveletPyramid1D {
        original_length: signal.len(),
        approximations,
        details,
    })
}

/// Inverse transform, truncated back to the original signal length.
pub fn haar_idwt_1d(pyramid: &WaveletPyramid1D) -> Result<Vec<f64>> {
    let mut out = pyramid.reconstruct_padded()?;
    out.truncate(pyramid.original_length);
    Ok(out)
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Grid {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(OdaError::usage(format!(
                "{rows}x{cols} grid needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    fn padded(&self, rows: usize, cols: usize) -> Self {
        let mut out = Self::zeros(rows, cols);
        for r in 0..self.rows {
            out.data[r * cols..r * cols + self.cols]
                .copy_from_slice(&self.data[r * self.cols..(r + 1) * self.cols]);
        }
        out
    }
}

/// Detail subbands of one 2D level: low/high along rows then columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetailBands {
    /// row low-pass, column high-pass
    pub lh: Grid,
    /// row high-pass, column low-pass
    pub hl: Grid,
    pub hh: Grid,
}

/// Multi-level separable 2D decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletPyramid2D {
    pub original_rows: usize,
    pub original_cols: usize,
    pub approximations: Vec<Grid>,
    pub details: Vec<DetailBands>,
}

impl WaveletPyramid2D {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    pub fn coarsest(&self) -> &Grid {
        self.approximations.last().expect("pyramid has level 0")
    }

    pub fn reconstruct_padded(&self) -> Result<Grid> {
        if self.details.is_empty() || self.approximations.len() != self.details.len() + 1 {
            return Err(OdaError::usage("inconsistent 2D wavelet pyramid"));
        }
        let mut current = self.coarsest().clone();
        for bands in self.details.iter().rev() {
            for b in [&bands.lh, &bands.hl, &bands.hh] {
                if b.rows != current.rows || b.cols != current.cols {
                    return Err(OdaError::usage("inconsistent 2D subband dimensions"));
                }
            }
            current = synthesize_2d(&current, bands);
        }
        Ok(current)
    }
}

fn analyze_2d(image: &Grid) -> (Grid, DetailBands) {
    let (h, w) = (image.rows / 2, image.cols / 2);
    // rows first
    let mut low = Grid::zeros(image.rows, w);
    let mut high = Grid::zeros(image.rows, w);
    for r in 0..image.rows {
        let (a, d) = analyze(&image.data[r * image.cols..(r + 1) * image.cols]);
        low.data[r * w..(r + 1) * w].copy_from_slice(&a);
        high.data[r * w..(r + 1) * w].copy_from_slice(&d);
    }
    let columns = |band: &Grid| {
        let mut lo = Grid::zeros(h, w);
        let mut hi = Grid::zeros(h, w);
        let mut col = vec![0.0; band.rows];
        for c in 0..w {
            for (r, v) in col.iter_mut().enumerate() {
                *v = band.get(r, c);
            }
            let (a, d) = analyze(&col);
            for r in 0..h {
                lo.set(r, c, a[r]);
                hi.set(r, c, d[r]);
            }
        }
        (lo, hi)
    };
    let (ll, lh) = columns(&low);
    let (hl, hh) = columns(&high);
    (ll, DetailBands { lh, hl, hh })
}

fn synthesize_2d(approx: &Grid, bands: &DetailBands) -> Grid {
    let (h, w) = (approx.rows, approx.cols);
    let columns = |lo: &Grid, hi: &Grid| {
        let mut out = Grid::zeros(2 * h, w);
        let mut a = vec![0.0; h];
        let mut d = vec![0.0; h];
        for c in 0..w {
            for r in 0..h {
                a[r] = lo.get(r, c);
                d[r] = hi.get(r, c);
            }
            for (r, v) in synthesize(&a, &d).into_iter().enumerate() {
                out.set(r, c, v);
            }
        }
        out
    };
    let low = columns(approx, &bands.lh);
    let high = columns(&bands.hl, &bands.hh);
    let mut out = Grid::zeros(2 * h, 2 * w);
    for r in 0..2 * h {
        let row = synthesize(&low.data[r * w..(r + 1) * w], &high.data[r * w..(r + 1) * w]);
        out.data[r * 2 * w..(r + 1) * 2 * w].copy_from_slice(&row);
    }
    out
}

/// Forward separable Haar transform of `image` over `levels` levels.
pub fn haar_dwt_2d(image: &Grid, levels: usize) -> Result<WaveletPyramid2D> {
    if image.data.is_empty() {
        return Err(OdaError::usage("cannot transform an empty image"));
    }
    if image.data.iter().any(|v| !v.is_finite()) {
        return Err(OdaError::usage("image contains non-finite values"));
    }
    check_levels(image.rows.max(image.cols), levels)?;
    let padded = image.padded(padded_len(image.rows, levels), padded_len(image.cols, levels));
    let mut approximations = vec![padded];
    let mut details = Vec::with_capacity(levels);
    for _ in 0..levels {
        let (a, d) = analyze_2d(approximations.last().unwrap());
        approximations.push(a);
        details.push(d);
    }
    Ok(WaveletPyramid2D {
        original_rows: image.rows,
        original_cols: image.cols,
        approximations,
        details,
    })
}

/// Inverse 2D transform, cropped back to the original dimensions.
pub fn haar_idwt_2d(pyramid: &WaveletPyramid2D) -> Result<Grid> {
    let full = pyramid.reconstruct_padded()?;
    let (rows, cols) = (pyramid.original_rows, pyramid.original_cols);
    let mut out = Grid::zeros(rows, cols);
    for r in 0..rows {
        out.data[r * cols..(r + 1) * cols]
            .copy_from_slice(&full.data[r * full.cols..r * full.cols + cols]);
    }
    Ok(out)
}

/// Per-sample list of approximations `[X_L, ..., X_1, X_0]`, coarse to fine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolutionPyramid {
    /// Flattened approximations, index 0 is the coarsest.
    pub levels: Vec<Vec<f64>>,
    pub shapes: Vec<FeatureShape>,
}

impl ResolutionPyramid {
    /// Deepest approximation level `L` (the pyramid holds `L + 1` entries).
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// Representation at approximation level `l` (0 = finest).
    pub fn at_level(&self, l: usize) -> &[f64] {
        &self.levels[self.depth() - l]
    }

    pub fn shape_at_level(&self, l: usize) -> FeatureShape {
        self.shapes[self.depth() - l]
    }
}

/// Builds the approximation stack of `sample` down to level `depth`.
///
/// Details are discarded; every level is flattened for the learner. With
/// `depth == 0` the stack is just the raw sample.
pub fn resolution_stack(sample: &[f64], shape: FeatureShape, depth: usize) -> Result<ResolutionPyramid> {
    if sample.len() != shape.len() {
        return Err(OdaError::usage(format!(
            "sample of length {} does not match shape {shape}",
            sample.len()
        )));
    }
    if depth == 0 {
        return Ok(ResolutionPyramid {
            levels: vec![sample.to_vec()],
            shapes: vec![shape],
        });
    }
    let (mut levels, mut shapes) = match shape {
        FeatureShape::Vector(_) => {
            let p = haar_dwt_1d(sample, depth)?;
            let shapes = p
                .approximations
                .iter()
                .map(|a| FeatureShape::Vector(a.len()))
                .collect::<Vec<_>>();
            (p.approximations, shapes)
        }
        FeatureShape::Image { rows, cols } => {
            let p = haar_dwt_2d(&Grid::new(rows, cols, sample.to_vec())?, depth)?;
            let shapes = p
                .approximations
                .iter()
                .map(|g| FeatureShape::Image {
                    rows: g.rows,
                    cols: g.cols,
                })
                .collect::<Vec<_>>();
            (p.approximations.into_iter().map(|g| g.data).collect(), shapes)
        }
    };
    levels.reverse();
    shapes.reverse();
    Ok(ResolutionPyramid { levels, shapes })
}

/// Embeds a coarse approximation one level finer with zero details.
///
/// `coarse` has shape `shape` (a level-`l` approximation); the result lives
/// at level `l - 1` and represents the same function.
pub fn upsample_once(coarse: &[f64], shape: FeatureShape) -> (Vec<f64>, FeatureShape) {
    match shape {
        FeatureShape::Vector(n) => {
            let out = coarse
                .iter()
                .flat_map(|v| [v * INV_SQRT2, v * INV_SQRT2])
                .collect();
            (out, FeatureShape::Vector(2 * n))
        }
        FeatureShape::Image { rows, cols } => {
            let w = 2 * cols;
            let mut out = vec![0.0; 4 * rows * cols];
            for r in 0..rows {
                for c in 0..cols {
                    let v = coarse[r * cols + c] * 0.5;
                    for (dr, dc) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                        out[(2 * r + dr) * w + 2 * c + dc] = v;
                    }
                }
            }
            (
                out,
                FeatureShape::Image {
                    rows: 2 * rows,
                    cols: w,
                },
            )
        }
    }
}

/// Pointwise modulus followed by non-overlapping window averaging.
///
/// The signal is zero-padded to a multiple of `window`. The output is
/// invariant to circular shifts of the padded signal by multiples of the
/// window, up to the matching shift of the output.
pub fn rectified_average(signal: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 {
        return Err(OdaError::usage("window must be at least 1"));
    }
    if window > signal.len() {
        return Err(OdaError::usage(format!(
            "window {window} larger than signal length {}",
            signal.len()
        )));
    }
    let mut padded = signal.to_vec();
    padded.resize(signal.len().div_ceil(window) * window, 0.0);
    Ok(padded
        .chunks_exact(window)
        .map(|w| w.iter().map(|v| v.abs()).sum::<f64>() / window as f64)
        .collect())
}
