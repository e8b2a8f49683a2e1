//! Inverting the interpolation curve into the meaningfulness metric.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interpolate::InterpolationCurve;
use crate::reconstruct::DistanceKind;

/// Whether the noise count had to be clamped to the ends of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Clamp {
    None,
    /// The distance is at or below the zero-noise intercept.
    Floor,
    /// The distance exceeds the fitted curve at the largest noise count.
    Ceiling,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationResult {
    pub kind: DistanceKind,
    pub g_star: f64,
    pub gamma: f64,
    pub clamped: Clamp,
}

/// Least-squares nondecreasing fit (pool adjacent violators, unit weights).
pub fn isotonic_fit(values: &[f64]) -> Vec<f64> {
    // Blocks of (sum, count); each block's fitted value is its mean.
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (s1, c1) = blocks[blocks.len() - 1];
            let (s0, c0) = blocks[blocks.len() - 2];
            if s0 / c0 as f64 > s1 / c1 as f64 {
                blocks.pop();
                *blocks.last_mut().unwrap() = (s0 + s1, c0 + c1);
            } else {
                break;
            }
        }
    }
    blocks
        .into_iter()
        .flat_map(|(s, c)| std::iter::repeat_n(s / c as f64, c))
        .collect()
}

/// Smallest noise count at which the isotonic fit of the curve reaches
/// `delta_d`, interpolating linearly between grid points.
pub fn solve_gstar(curve: &InterpolationCurve, delta_d: f64) -> Result<(f64, Clamp)> {
    if curve.is_empty() {
        return Err(Error::EmptyCurve);
    }
    let fitted = isotonic_fit(&curve.mean_distance);
    Ok(invert(&curve.grid, &fitted, delta_d))
}

pub(crate) fn invert(grid: &[usize], fitted: &[f64], delta_d: f64) -> (f64, Clamp) {
    if delta_d <= fitted[0] {
        return (0.0, Clamp::Floor);
    }
    let last = fitted.len() - 1;
    if delta_d > fitted[last] {
        return (grid[last] as f64, Clamp::Ceiling);
    }
    // fitted[i] < delta_d <= fitted[i + 1] for the first such i.
    let i = (0..last)
        .find(|&i| fitted[i + 1] >= delta_d)
        .expect("delta_d lies within the fitted range");
    let (x0, x1) = (grid[i] as f64, grid[i + 1] as f64);
    let (y0, y1) = (fitted[i], fitted[i + 1]);
    (x0 + (delta_d - y0) / (y1 - y0) * (x1 - x0), Clamp::None)
}

/// `(1 − g*/(|S2| + g*)) × 100`.
pub fn gamma(g_star: f64, s2_size: usize) -> f64 {
    let m = s2_size as f64;
    (1.0 - g_star / (m + g_star)) * 100.0
}

/// Equal-weight combination `½γ_cvx + ½γ_jp`.
pub fn gamma_combined(gamma_cvx: f64, gamma_jp: f64) -> Result<f64> {
    gamma_weighted(gamma_cvx, gamma_jp, 0.5)
}

/// `w·γ_cvx + (1 − w)·γ_jp`.
pub fn gamma_weighted(gamma_cvx: f64, gamma_jp: f64, weight_cvx: f64) -> Result<f64> {
    for (value, lo, hi) in [(gamma_cvx, 0.0, 100.0), (gamma_jp, 0.0, 100.0), (weight_cvx, 0.0, 1.0)] {
        if !(lo..=hi).contains(&value) {
            return Err(Error::OutOfRange { value, lo, hi });
        }
    }
    Ok(weight_cvx * gamma_cvx + (1.0 - weight_cvx) * gamma_jp)
}

/// Solves for `g*` on `curve` and converts it into `γ`.
pub fn calibrate(curve: &InterpolationCurve, delta_d: f64) -> Result<CalibrationResult> {
    if curve.s2_size == 0 {
        return Err(Error::InvalidConfig("curve built from an empty S2".into()));
    }
    let (g_star, clamped) = solve_gstar(curve, delta_d)?;
    Ok(CalibrationResult {
        kind: curve.kind,
        g_star,
        gamma: gamma(g_star, curve.s2_size),
        clamped,
    })
}
