//! Reconstruction-error distances between a discovered attribute set `B` and
//! a meaningful set `A`.
//!
//! Two regularisations are provided:
//!
//! * [`DistanceKind::ConvexHull`]: each discovered attribute is reconstructed
//!   by a point of the convex hull of `A`'s columns.
//! * [`DistanceKind::JointL0`]: discovered and meaningful attributes are paired
//!   one-to-one by greedy maximum agreement; a paired attribute is
//!   reconstructed by its partner, an unpaired one by the zero vector.
//!
//! Both report the average per-column squared error, `(1/K)‖AR − B‖²_F`.

mod matching;
mod simplex;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{check_same_exemplars, AttributeMatrix, AttributeVector};

pub use matching::{correlation, greedy_match, MatchPair, MatchSet};
pub use simplex::{simplex_project, HullSolution, HullSolver, KKT_TOLERANCE, MAX_ITERATIONS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DistanceKind {
    #[serde(rename = "cvx")]
    ConvexHull,
    #[serde(rename = "jp")]
    JointL0,
}

impl DistanceKind {
    pub const ALL: [DistanceKind; 2] = [DistanceKind::ConvexHull, DistanceKind::JointL0];

    pub fn as_str(self) -> &'static str {
        match self {
            DistanceKind::ConvexHull => "cvx",
            DistanceKind::JointL0 => "jp",
        }
    }
}

impl fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cvx" | "convex-hull" => Ok(DistanceKind::ConvexHull),
            "jp" | "joint-l0" => Ok(DistanceKind::JointL0),
            other => Err(Error::InvalidConfig(format!("unknown distance kind `{other}`"))),
        }
    }
}

/// Dense `J × K` coefficient matrix, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CoefficientMatrix {
    fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.data[k * self.rows + j]
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.data[k * self.rows..(k + 1) * self.rows]
    }

    fn column_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.data[k * self.rows..(k + 1) * self.rows]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub kind: DistanceKind,
    /// Mean of `per_column_errors`.
    pub distance: f64,
    pub per_column_errors: Vec<f64>,
    pub coefficients: CoefficientMatrix,
    /// False when some hull solve hit the iteration cap before meeting the
    /// KKT tolerance. The result is still the best iterate found.
    pub converged: bool,
    /// Largest KKT residual over all columns (zero for the matching path).
    pub max_kkt_residual: f64,
}

fn check_nonempty(a: &AttributeMatrix, b: &AttributeMatrix) -> Result<()> {
    check_same_exemplars(a, b)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::ShapeMismatch(format!(
            "distance needs nonempty sets, got J={}, K={}",
            a.n_columns(),
            b.n_columns()
        )));
    }
    Ok(())
}

/// Sequential left-to-right mean, so partial sums can be extended
/// bit-identically.
pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |acc, v| acc + v) / values.len() as f64
}

/// Convex-hull distance: average squared error of reconstructing each column
/// of `b` by a convex combination of the columns of `a`.
pub fn delta_cvx(a: &AttributeMatrix, b: &AttributeMatrix) -> Result<ReconstructionResult> {
    check_nonempty(a, b)?;
    let solver = HullSolver::new(a)?;
    Ok(delta_cvx_with(&solver, b))
}

pub(crate) fn delta_cvx_with(solver: &HullSolver<'_>, b: &AttributeMatrix) -> ReconstructionResult {
    let solutions: Vec<HullSolution> = (0..b.n_columns())
        .into_par_iter()
        .with_min_len(8)
        .map(|k| solver.solve_column(b, k))
        .collect();
    let j = solver.atoms().n_columns();
    let mut coefficients = CoefficientMatrix::zeros(j, b.n_columns());
    let mut errors = Vec::with_capacity(solutions.len());
    let mut converged = true;
    let mut max_kkt: f64 = 0.0;
    for (k, sol) in solutions.into_iter().enumerate() {
        coefficients.column_mut(k).copy_from_slice(&sol.coefficients);
        errors.push(sol.error);
        converged &= sol.converged;
        max_kkt = max_kkt.max(sol.kkt_residual);
    }
    ReconstructionResult {
        kind: DistanceKind::ConvexHull,
        distance: mean(&errors),
        per_column_errors: errors,
        coefficients,
        converged,
        max_kkt_residual: max_kkt,
    }
}

/// Joint ℓ0 distance: greedy one-to-one matching, then `R*` has a 1 at every
/// matched `(j, k)` and zeros elsewhere.
///
/// A matched column costs `‖h_j − z_k‖² = 4·mismatches`; an unmatched one is
/// reconstructed by the zero vector and costs `‖z_k‖² = N`.
pub fn delta_jp(a: &AttributeMatrix, b: &AttributeMatrix) -> Result<ReconstructionResult> {
    check_nonempty(a, b)?;
    let matches = greedy_match(a, b)?;
    let n = a.n_exemplars() as f64;
    let mut errors = vec![n; b.n_columns()];
    let mut coefficients = CoefficientMatrix::zeros(a.n_columns(), b.n_columns());
    for p in &matches.pairs {
        let mismatches = a.n_exemplars() as u32 - p.agreements;
        errors[p.discovered] = 4.0 * f64::from(mismatches);
        coefficients.column_mut(p.discovered)[p.meaningful] = 1.0;
    }
    Ok(ReconstructionResult {
        kind: DistanceKind::JointL0,
        distance: mean(&errors),
        per_column_errors: errors,
        coefficients,
        converged: true,
        max_kkt_residual: 0.0,
    })
}

pub fn delta(kind: DistanceKind, a: &AttributeMatrix, b: &AttributeMatrix) -> Result<ReconstructionResult> {
    match kind {
        DistanceKind::ConvexHull => delta_cvx(a, b),
        DistanceKind::JointL0 => delta_jp(a, b),
    }
}

/// Distance from a single attribute to the meaningful set.
pub fn attribute_distance(z: &AttributeVector, a: &AttributeMatrix, kind: DistanceKind) -> Result<f64> {
    if z.len() != a.n_exemplars() {
        return Err(Error::ShapeMismatch(format!(
            "attribute has {} entries, meaningful set covers {} exemplars",
            z.len(),
            a.n_exemplars()
        )));
    }
    let b = AttributeMatrix::from_columns(z.len(), &[z.values().to_vec()], None)?;
    Ok(delta(kind, a, &b)?.distance)
}
