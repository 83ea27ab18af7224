//! Donoho-Johnstone test functions used as log-intensities.
//!
//! Parameter tables (breakpoints `t_j`, heights `h_j`, widths `w_j`):
//!
//! ```text
//! t_j : 0.10  0.13  0.15  0.23  0.25  0.40  0.44  0.65  0.76  0.78  0.81
//! blocks h_j : 4  -5   3  -4   5  -4.2  2.1  4.3  -3.1  2.1  -4.2
//! bumps  h_j : 4   5   3   4   5   4.2  2.1  4.3   3.1  5.1   4.2
//! bumps  w_j : 0.005 0.005 0.006 0.01 0.01 0.03 0.01 0.01 0.005 0.008 0.005
//! ```
//!
//! * blocks(t) = sum_j h_j (1 + sgn(t - t_j)) / 2
//! * bumps(t) = sum_j h_j (1 + |t - t_j| / w_j)^-4
//! * heavisine(t) = 4 sin(4 pi t) - sgn(t - 0.3) - sgn(0.72 - t)
//! * doppler(t) = sqrt(t (1 - t)) sin(2 pi 1.05 / (t + 0.05))
//!
//! `sgn(0) = 0`. The functions are used unscaled; doppler is finite on all
//! of `[0, 1]`, so no offset is applied.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dictionary::DesignGrid;
use crate::error::{Error, Result};

pub const BREAKPOINTS: [f64; 11] = [
    0.10, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81,
];
pub const BLOCKS_HEIGHTS: [f64; 11] = [4.0, -5.0, 3.0, -4.0, 5.0, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2];
pub const BUMPS_HEIGHTS: [f64; 11] = [4.0, 5.0, 3.0, 4.0, 5.0, 4.2, 2.1, 4.3, 3.1, 5.1, 4.2];
pub const BUMPS_WIDTHS: [f64; 11] = [
    0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01, 0.005, 0.008, 0.005,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Blocks,
    Bumps,
    Doppler,
    Heavisine,
    /// `g0 = 0`, a flat control.
    Zero,
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl Shape {
    pub const ALL: [Shape; 5] = [
        Shape::Blocks,
        Shape::Bumps,
        Shape::Doppler,
        Shape::Heavisine,
        Shape::Zero,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Shape::Blocks => "blocks",
            Shape::Bumps => "bumps",
            Shape::Doppler => "doppler",
            Shape::Heavisine => "heavisine",
            Shape::Zero => "zero",
        }
    }

    /// `g0(t)`.
    pub fn log_intensity(self, t: f64) -> f64 {
        match self {
            Shape::Blocks => BREAKPOINTS
                .iter()
                .zip(BLOCKS_HEIGHTS)
                .map(|(p, h)| h * (1.0 + sgn(t - p)) / 2.0)
                .sum(),
            Shape::Bumps => BREAKPOINTS
                .iter()
                .zip(BUMPS_HEIGHTS)
                .zip(BUMPS_WIDTHS)
                .map(|((p, h), w)| h * (1.0 + (t - p).abs() / w).powi(-4))
                .sum(),
            Shape::Doppler => {
                let eps = 0.05;
                (t * (1.0 - t)).sqrt()
                    * (2.0 * std::f64::consts::PI * (1.0 + eps) / (t + eps)).sin()
            }
            Shape::Heavisine => {
                4.0 * (4.0 * std::f64::consts::PI * t).sin() - sgn(t - 0.3) - sgn(0.72 - t)
            }
            Shape::Zero => 0.0,
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Shape::ALL
            .into_iter()
            .find(|shape| shape.as_str() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown shape `{s}`")))
    }
}

/// `f0 = alpha exp(g0)` on the grid.
pub fn dj_intensity(shape: Shape, grid: &DesignGrid, alpha_signal: f64) -> Vec<f64> {
    grid.points()
        .iter()
        .map(|&t| alpha_signal * shape.log_intensity(t).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_shape_is_flat() {
        let grid = DesignGrid::midpoints(16).unwrap();
        assert!(dj_intensity(Shape::Zero, &grid, 1.0)
            .iter()
            .all(|v| *v == 1.0));
    }

    #[test]
    fn alpha_is_multiplicative() {
        let grid = DesignGrid::midpoints(32).unwrap();
        for shape in Shape::ALL {
            let one = dj_intensity(shape, &grid, 3.0);
            let two = dj_intensity(shape, &grid, 6.0);
            for (a, b) in one.iter().zip(&two) {
                assert_eq!(2.0 * a, *b);
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for shape in Shape::ALL {
            assert_eq!(shape.to_string().parse::<Shape>().unwrap(), shape);
        }
        assert!("sine".parse::<Shape>().is_err());
    }
}
