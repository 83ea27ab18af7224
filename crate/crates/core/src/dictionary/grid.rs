use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Placement of the `n` points of a regular design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GridConvention {
    /// `x_i = (i - 1/2) / n`, never on a dyadic breakpoint.
    #[default]
    Midpoint,
    /// `x_i = i / n`.
    Endpoint,
}

/// Design points `x_1, ..., x_n` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignGrid {
    points: Vec<f64>,
    regular: bool,
}

impl DesignGrid {
    pub fn regular(n: usize, convention: GridConvention) -> Result<Self> {
        if n == 0 {
            return Err(Error::Shape(
                "a design grid needs at least one point".into(),
            ));
        }
        let nf = n as f64;
        let points = (1..=n)
            .map(|i| match convention {
                GridConvention::Midpoint => (i as f64 - 0.5) / nf,
                GridConvention::Endpoint => i as f64 / nf,
            })
            .collect();
        Ok(Self {
            points,
            regular: true,
        })
    }

    pub fn midpoints(n: usize) -> Result<Self> {
        Self::regular(n, GridConvention::Midpoint)
    }

    /// Arbitrary design points; they must be finite and lie in `[0, 1]`.
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Shape(
                "a design grid needs at least one point".into(),
            ));
        }
        if let Some(bad) = points.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::Domain(format!(
                "design point {bad} lies outside [0, 1]"
            )));
        }
        Ok(Self {
            points,
            regular: false,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_regular(&self) -> bool {
        self.regular
    }

    /// Even-indexed (0-based) half of the grid, used by half-fold schemes.
    pub fn even_half(&self) -> Self {
        Self {
            points: self.points.iter().copied().step_by(2).collect(),
            regular: false,
        }
    }

    pub fn odd_half(&self) -> Self {
        Self {
            points: self.points.iter().copied().skip(1).step_by(2).collect(),
            regular: false,
        }
    }
}
