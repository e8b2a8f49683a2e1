//! Choosing the representation `S1` of the meaningful subspace.
//!
//! Attributes that cannot be reconstructed from the rest of the labelled set
//! are treated as independent and always placed in `S1`, together with any
//! attributes named explicitly. The remaining slots of `S1` are filled
//! uniformly at random; everything else forms the holdout `S2`.

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{AttributeMatrix, SubspaceSplit};
use crate::reconstruct::{DistanceKind, HullSolver};
use crate::rng::{stream, Purpose};

/// Default absolute independence threshold.
pub const DEFAULT_ALPHA: f64 = 18.89;

/// Leave-one-out reconstruction errors, aligned with the columns of `S`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceScores {
    pub kind: DistanceKind,
    pub scores: Vec<f64>,
}

/// Which leave-one-out scores mark an attribute as independent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    /// Scores strictly above `alpha`.
    Absolute(f64),
    /// The `p` percent highest scores (rounded down), ties to lower index.
    TopPercent(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionConfig {
    pub threshold: Threshold,
    pub forced_names: Vec<String>,
    pub s1_fraction: f64,
    pub seed: u64,
    pub kind: DistanceKind,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            threshold: Threshold::Absolute(DEFAULT_ALPHA),
            forced_names: Vec::new(),
            s1_fraction: 0.5,
            seed: 0,
            kind: DistanceKind::ConvexHull,
        }
    }
}

impl SelectionConfig {
    pub(crate) fn check(&self) -> Result<()> {
        if !(self.s1_fraction > 0.0 && self.s1_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "S1 fraction must lie in (0, 1), got {}",
                self.s1_fraction
            )));
        }
        match self.threshold {
            Threshold::Absolute(alpha) if alpha.is_nan() || alpha < 0.0 => {
                Err(Error::InvalidConfig(format!("alpha must be nonnegative, got {alpha}")))
            }
            Threshold::TopPercent(p) if !(0.0..=100.0).contains(&p) => Err(Error::InvalidConfig(format!(
                "percentile must lie in [0, 100], got {p}"
            ))),
            _ => Ok(()),
        }
    }

    /// Number of attributes that go to `S1` out of `total`.
    pub fn capacity(&self, total: usize) -> usize {
        // The epsilon keeps e.g. 2/3 · 24 from rounding up to 17.
        (self.s1_fraction * total as f64 - 1e-9).ceil().max(0.0) as usize
    }
}

/// Error of reconstructing each attribute of `s` from all the others.
pub fn leave_one_out_errors(s: &AttributeMatrix, kind: DistanceKind) -> Result<IndependenceScores> {
    let m = s.n_columns();
    if m < 2 {
        return Err(Error::TooFewAttributes { needed: 2, found: m });
    }
    let n = s.n_exemplars() as u32;
    let scores = (0..m)
        .map(|j| {
            let rest = s.without_column(j);
            match kind {
                DistanceKind::ConvexHull => Ok(HullSolver::new(&rest)?.solve_column(s, j).error),
                DistanceKind::JointL0 => {
                    let best = (0..rest.n_columns())
                        .map(|i| rest.agreements_with(i, s, j))
                        .max()
                        .unwrap_or(0);
                    Ok(4.0 * f64::from(n - best))
                }
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(IndependenceScores { kind, scores })
}

/// Indices whose scores trip the threshold, ascending.
pub fn independent_indices(scores: &[f64], threshold: Threshold) -> Vec<usize> {
    match threshold {
        Threshold::Absolute(alpha) => (0..scores.len()).filter(|&j| scores[j] > alpha).collect(),
        Threshold::TopPercent(p) => {
            let count = ((p / 100.0) * scores.len() as f64 + 1e-9).floor() as usize;
            let mut order: Vec<usize> = (0..scores.len()).collect();
            order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
            let mut top: Vec<usize> = order.into_iter().take(count).collect();
            top.sort_unstable();
            top
        }
    }
}

/// Computes leave-one-out scores, then splits.
pub fn select_representation(s: &AttributeMatrix, cfg: &SelectionConfig) -> Result<SubspaceSplit> {
    cfg.check()?;
    let scores = leave_one_out_errors(s, cfg.kind)?;
    select_with_scores(s, &scores.scores, cfg)
}

/// Splits `s` given precomputed independence scores.
pub fn select_with_scores(s: &AttributeMatrix, scores: &[f64], cfg: &SelectionConfig) -> Result<SubspaceSplit> {
    cfg.check()?;
    let total = s.n_columns();
    if scores.len() != total {
        return Err(Error::ShapeMismatch(format!(
            "{} scores for {} attributes",
            scores.len(),
            total
        )));
    }
    let capacity = cfg.capacity(total);
    if capacity == 0 || capacity >= total {
        return Err(Error::InvalidConfig(format!(
            "S1 fraction {} leaves S1 with {capacity} of {total} attributes",
            cfg.s1_fraction
        )));
    }

    let mut in_s1 = vec![false; total];
    for name in &cfg.forced_names {
        let j = s
            .names()
            .and_then(|names| names.iter().position(|n| n == name))
            .ok_or_else(|| Error::UnknownForcedName(name.clone()))?;
        in_s1[j] = true;
    }
    for j in independent_indices(scores, cfg.threshold) {
        in_s1[j] = true;
    }
    let forced: Vec<usize> = (0..total).filter(|&j| in_s1[j]).collect();
    if forced.len() > capacity {
        return Err(Error::ForcedSetTooLarge {
            required: forced.len(),
            capacity,
        });
    }

    let mut pool: Vec<usize> = (0..total).filter(|&j| !in_s1[j]).collect();
    let mut rng = stream(cfg.seed, Purpose::Split, &[]);
    let (chosen, _) = pool.partial_shuffle(&mut rng, capacity - forced.len());
    for &j in chosen.iter() {
        in_s1[j] = true;
    }

    let s1_indices: Vec<usize> = (0..total).filter(|&j| in_s1[j]).collect();
    let s2_indices: Vec<usize> = (0..total).filter(|&j| !in_s1[j]).collect();
    Ok(SubspaceSplit {
        s1: s.select_columns(&s1_indices),
        s2: s.select_columns(&s2_indices),
        s1_indices,
        s2_indices,
        forced_indices: forced,
        seed: cfg.seed,
    })
}
