//! Binary PGM (P5) images of codevector weights.

use std::fs;
use std::path::Path;

/// Min-max scales `values` to `0..=255`; a constant vector becomes mid gray.
pub fn to_gray(values: &[f64]) -> Vec<u8> {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    if !(span > 0.0) || !span.is_finite() {
        return vec![128; values.len()];
    }
    values
        .iter()
        .map(|v| ((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect()
}

/// Encodes a row-major gray image as P5 with maxval 255.
pub fn encode(rows: usize, cols: usize, pixels: &[u8]) -> Vec<u8> {
    debug_assert_eq!(rows * cols, pixels.len());
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

pub fn write(path: &Path, rows: usize, cols: usize, values: &[f64]) -> std::io::Result<()> {
    fs::write(path, encode(rows, cols, &to_gray(values)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling() {
        assert_eq!(to_gray(&[0.0, 0.5, 1.0]), vec![0, 128, 255]);
        assert_eq!(to_gray(&[-2.0, 2.0]), vec![0, 255]);
        assert_eq!(to_gray(&[3.0; 4]), vec![128; 4]);
    }

    #[test]
    fn header_and_payload() {
        let bytes = encode(2, 3, &[0, 1, 2, 3, 4, 5]);
        assert_eq!(&bytes[..11], b"P5\n3 2\n255\n");
        assert_eq!(&bytes[11..], &[0, 1, 2, 3, 4, 5]);
    }
}
