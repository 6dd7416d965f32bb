//! Amplitude-magnitude images.
//!
//! An even-N state is split into two halves; qubits `0..N/2` index the
//! column and qubits `N/2..N` the row, so pixel (x, y) shows
//! `|⟨x ⊗ y|ψ⟩| = |amp[x + (y << N/2)]|` and (0, 0) is `|0…0⟩`. Images are
//! binary PGM (P5, maxval 255), rows top to bottom.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::statevector::StateVector;
use crate::{Error, Result};

/// Floor used by the log scale: a magnitude `m` maps to `ln(1 + m / LOG_FLOOR)`
/// before normalisation by the largest cell.
pub const LOG_FLOOR: f64 = 1e-6;

/// Fraction of pixels pinned at 0 above which an image is flagged as
/// saturated.
pub const SATURATION_FRACTION: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeGrid {
    side: usize,
    cells: Vec<f64>,
}

impl AmplitudeGrid {
    /// Builds a grid from row-major magnitudes.
    pub fn from_cells(side: usize, cells: Vec<f64>) -> Result<Self> {
        if side == 0 || cells.len() != side * side {
            return Err(Error::Usage(format!("{} cells do not form a {side}x{side} grid", cells.len())));
        }
        if cells.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::Usage("grid cells must be finite and non-negative".into()));
        }
        Ok(AmplitudeGrid { side, cells })
    }

    pub fn width(&self) -> usize {
        self.side
    }

    pub fn height(&self) -> usize {
        self.side
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.cells[y * self.side + x]
    }

    /// Row-major cells, row y = 0 first.
    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn total_weight(&self) -> f64 {
        self.cells.iter().map(|c| c * c).sum()
    }
}

pub fn amplitude_grid(state: &StateVector) -> Result<AmplitudeGrid> {
    let n = state.n_qubits();
    if !n.is_multiple_of(2) {
        return Err(Error::Usage(format!("amplitude grid needs an even qubit count, got {n}")));
    }
    // With the column index in the low bits, row-major order is basis order.
    let cells = state.amplitudes().iter().map(|a| a.norm()).collect();
    Ok(AmplitudeGrid { side: 1 << (n / 2), cells })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

impl Scale {
    pub fn name(self) -> &'static str {
        match self {
            Scale::Linear => "linear",
            Scale::Log => "log",
        }
    }
}

impl std::str::FromStr for Scale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Scale::Linear),
            "log" => Ok(Scale::Log),
            other => Err(Error::Usage(format!("unknown scale '{other}' (expected linear or log)"))),
        }
    }
}

/// 8-bit pixel values, row-major.
pub fn pixels(grid: &AmplitudeGrid, scale: Scale) -> Vec<u8> {
    let mapped: Vec<f64> = match scale {
        Scale::Linear => grid.cells.clone(),
        Scale::Log => grid.cells.iter().map(|m| (m / LOG_FLOOR).ln_1p()).collect(),
    };
    let max = mapped.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return vec![0; mapped.len()];
    }
    mapped.iter().map(|v| (255.0 * v / max).round().clamp(0.0, 255.0) as u8).collect()
}

pub fn encode_pgm(grid: &AmplitudeGrid, scale: Scale, comment: &str) -> Vec<u8> {
    let header = format!(
        "P5\n# {}\n{} {}\n255\n",
        comment.replace(['\n', '\r'], " "),
        grid.width(),
        grid.height()
    );
    let mut out = header.into_bytes();
    out.extend(pixels(grid, scale));
    out
}

pub fn write_image(grid: &AmplitudeGrid, path: &Path, scale: Scale, comment: &str) -> Result<()> {
    fs::write(path, encode_pgm(grid, scale, comment)).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Pixel-value histogram of an encoded image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PixelStats {
    pub histogram: [u64; 256],
    pub total: u64,
}

impl PixelStats {
    pub fn from_pixels(pixels: &[u8]) -> Self {
        let mut histogram = [0u64; 256];
        for &p in pixels {
            histogram[p as usize] += 1;
        }
        PixelStats { histogram, total: pixels.len() as u64 }
    }

    /// True when more than [`SATURATION_FRACTION`] of pixels are black, or
    /// more than that fraction (and more than one pixel) are white.
    pub fn saturated(&self) -> bool {
        let limit = SATURATION_FRACTION * self.total as f64;
        let black = self.histogram[0] as f64;
        let white = self.histogram[255];
        black > limit || (white > 1 && white as f64 > limit)
    }

    pub fn distinct_levels(&self) -> usize {
        self.histogram.iter().filter(|&&c| c > 0).count()
    }
}
