//! Haar-Fisz variance stabilization followed by universal soft thresholding.
//!
//! Level `m` of the pyramid has blocks of length `L = 2^m` (m = 1 finest).
//! For sibling smooths `a, b`: `s = (a + b) / 2`, `d = (a - b) / 2` and the
//! transformed detail is `F = d / sqrt(s)` (0 when `s = 0`). Under a locally
//! constant intensity `sqrt(L) F` has unit variance, so it is the quantity
//! thresholded.

use crate::error::{Error, Result};
use crate::solver::soft_threshold;

/// Normal-consistency constant of the median absolute deviation.
pub const MAD_SCALE: f64 = 0.6745;

/// Output of the forward pyramid.
#[derive(Debug, Clone, PartialEq)]
pub struct FiszCoefficients {
    /// Mean of all counts.
    pub coarse: f64,
    /// `details[m - 1]` holds the `n / 2^m` transformed details of level `m`.
    pub details: Vec<Vec<f64>>,
}

fn check_length(n: usize) -> Result<u32> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::Shape(format!(
            "Haar-Fisz needs a power-of-two length >= 2, got {n}"
        )));
    }
    Ok(n.trailing_zeros())
}

pub fn haar_fisz_forward(y: &[f64]) -> Result<FiszCoefficients> {
    let levels = check_length(y.len())?;
    let mut smooth = y.to_vec();
    let mut details = Vec::with_capacity(levels as usize);
    for _ in 0..levels {
        let (s, f): (Vec<f64>, Vec<f64>) = smooth
            .chunks_exact(2)
            .map(|pair| {
                let s = 0.5 * (pair[0] + pair[1]);
                let d = 0.5 * (pair[0] - pair[1]);
                (s, if s > 0.0 { d / s.sqrt() } else { 0.0 })
            })
            .unzip();
        details.push(f);
        smooth = s;
    }
    Ok(FiszCoefficients {
        coarse: smooth[0],
        details,
    })
}

/// Inverse pyramid; smooths are clipped at 0 before taking square roots.
pub fn haar_fisz_inverse(coefs: &FiszCoefficients) -> Vec<f64> {
    let mut smooth = vec![coefs.coarse.max(0.0)];
    for f in coefs.details.iter().rev() {
        smooth = smooth
            .iter()
            .zip(f)
            .flat_map(|(&s, &f)| {
                let d = f * s.sqrt();
                [(s + d).max(0.0), (s - d).max(0.0)]
            })
            .collect();
    }
    smooth
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HaarFiszEstimate {
    pub intensity: Vec<f64>,
    pub sigma: f64,
    pub threshold: f64,
    /// Transformed details surviving the threshold, plus the coarse mean.
    pub nonzero: usize,
}

/// Forward transform, soft-threshold `sqrt(L) F` at `sigma sqrt(2 log n)`
/// with `sigma` the MAD of the finest level, then invert.
pub fn haar_fisz_denoise(y: &[f64]) -> Result<HaarFiszEstimate> {
    if let Some(bad) = y.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(Error::Domain(format!(
            "counts must be finite and nonnegative, got {bad}"
        )));
    }
    let mut coefs = haar_fisz_forward(y)?;
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut finest: Vec<f64> = coefs.details[0].iter().map(|f| (sqrt2 * f).abs()).collect();
    let sigma = median(&mut finest) / MAD_SCALE;
    let threshold = sigma * (2.0 * (y.len() as f64).ln()).sqrt();
    let mut nonzero = usize::from(coefs.coarse != 0.0);
    for (m, level) in coefs.details.iter_mut().enumerate() {
        let root_len = f64::from(1u32 << (m + 1)).sqrt();
        for f in level.iter_mut() {
            *f = soft_threshold(root_len * *f, threshold) / root_len;
            nonzero += usize::from(*f != 0.0);
        }
    }
    Ok(HaarFiszEstimate {
        intensity: haar_fisz_inverse(&coefs),
        sigma,
        threshold,
        nonzero,
    })
}
