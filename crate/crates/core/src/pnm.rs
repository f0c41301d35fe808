//! Binary PGM/PPM writers.

use std::io::Write;
use std::path::Path;

use crate::error::Result;

pub fn pgm_bytes(width: usize, height: usize, gray: &[u8]) -> Vec<u8> {
    assert_eq!(gray.len(), width * height);
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(gray);
    out
}

pub fn ppm_bytes(width: usize, height: usize, rgb: &[u8]) -> Vec<u8> {
    assert_eq!(rgb.len(), width * height * 3);
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(rgb);
    out
}

pub fn write_pgm(path: &Path, width: usize, height: usize, gray: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&pgm_bytes(width, height, gray))?;
    Ok(())
}

/// Reverses row order so that row 0 of the grid ends up at the bottom of the image.
pub fn flip_rows(data: &[u8], row_len: usize) -> Vec<u8> {
    data.chunks(row_len).rev().flatten().copied().collect()
}
