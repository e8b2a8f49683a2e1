//! Co-occurrence matrices and the end-to-end meaningfulness evaluation.

use rayon::prelude::*;
use serde::Serialize;

use crate::calibrate::{calibrate, gamma_weighted, isotonic_fit, CalibrationResult, Clamp};
use crate::error::{Error, Result};
use crate::interpolate::{default_grid, mean_std, CurveTracer, InterpolationCurve};
use crate::matrix::{check_same_exemplars, AttributeMatrix, SubspaceSplit};
use crate::reconstruct::{delta_cvx, delta_jp, DistanceKind};
use crate::rng::{derive_seed, Purpose};
use crate::select::{leave_one_out_errors, select_with_scores, SelectionConfig, Threshold, DEFAULT_ALPHA};

/// Contiguous index range of one attribute set inside a co-occurrence matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Block {
    pub name: String,
    pub start: usize,
    pub end: usize,
}

/// Joint positive rates over the concatenated attribute list `[A | B]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CooccurrenceMatrix {
    pub size: usize,
    /// Row-major `size × size`.
    pub values: Vec<f64>,
    pub labels: Vec<String>,
    pub blocks: Vec<Block>,
}

impl CooccurrenceMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }
}

/// Entry `(i, j)` is the fraction of exemplars on which attributes `i` and `j`
/// are both `+1`; the diagonal is each attribute's positive rate.
pub fn cooccurrence(a: &AttributeMatrix, b: &AttributeMatrix) -> Result<CooccurrenceMatrix> {
    check_same_exemplars(a, b)?;
    if a.n_exemplars() == 0 {
        return Err(Error::ShapeMismatch("attributes over zero exemplars".into()));
    }
    let joined: Vec<(&AttributeMatrix, usize)> = (0..a.n_columns())
        .map(|k| (a, k))
        .chain((0..b.n_columns()).map(|k| (b, k)))
        .collect();
    let size = joined.len();
    let n = a.n_exemplars() as f64;
    let mut values = vec![0.0; size * size];
    for i in 0..size {
        for j in i..size {
            let (mi, ki) = joined[i];
            let (mj, kj) = joined[j];
            let p = f64::from(mi.joint_positives(ki, mj, kj)) / n;
            values[i * size + j] = p;
            values[j * size + i] = p;
        }
    }
    let labels = (0..a.n_columns())
        .map(|k| a.label(k))
        .chain((0..b.n_columns()).map(|k| b.label(k)))
        .collect();
    Ok(CooccurrenceMatrix {
        size,
        values,
        labels,
        blocks: vec![
            Block {
                name: "a".into(),
                start: 0,
                end: a.n_columns(),
            },
            Block {
                name: "b".into(),
                start: a.n_columns(),
                end: size,
            },
        ],
    })
}

/// Settings of a full evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricConfig {
    /// Random `S1`/`S2` divisions averaged over.
    pub splits: usize,
    /// Noise draws per interpolation grid point.
    pub trials: usize,
    /// Noise grid; `None` uses [`default_grid`] for `|S2|`.
    pub grid: Option<Vec<usize>>,
    pub seed: u64,
    pub threshold: Threshold,
    pub forced_names: Vec<String>,
    pub s1_fraction: f64,
    /// Distance used for the leave-one-out independence scores.
    pub score_kind: DistanceKind,
    /// Weight of `γ_cvx` in the combined metric.
    pub weight_cvx: f64,
    /// How many times the largest grid point may be doubled when the
    /// discovered set is farther than the largest noise level. Extended
    /// points are kept for later evaluations.
    pub max_extensions: usize,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            splits: 100,
            trials: 100,
            grid: None,
            seed: 0,
            threshold: Threshold::Absolute(DEFAULT_ALPHA),
            forced_names: Vec::new(),
            s1_fraction: 0.5,
            score_kind: DistanceKind::ConvexHull,
            weight_cvx: 0.5,
            max_extensions: 2,
        }
    }
}

impl MetricConfig {
    fn selection(&self, split: usize) -> SelectionConfig {
        SelectionConfig {
            threshold: self.threshold,
            forced_names: self.forced_names.clone(),
            s1_fraction: self.s1_fraction,
            seed: derive_seed(self.seed, &[Purpose::Split as u64, split as u64]),
            kind: self.score_kind,
        }
    }

    fn curve_seed(&self, split: usize) -> u64 {
        derive_seed(self.seed, &[Purpose::Curve as u64, split as u64])
    }
}

/// Curve averaged over splits, with its isotonic fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveSummary {
    pub grid: Vec<usize>,
    /// Mean over splits of each split's trial-averaged distance.
    pub mean_distance: Vec<f64>,
    /// Standard deviation over splits of the same quantity.
    pub std_distance: Vec<f64>,
    pub fitted: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KindSummary {
    pub kind: DistanceKind,
    /// Split-averaged `δ(D, S1)`.
    pub delta_mean: f64,
    pub delta_std: f64,
    /// Calibration of `delta_mean` against the split-averaged curve.
    pub calibration: CalibrationResult,
    pub curve: CurveSummary,
    pub split_gamma_mean: f64,
    pub split_gamma_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitRecord {
    pub index: usize,
    pub seed: u64,
    pub s1: Vec<String>,
    pub delta_cvx: f64,
    pub delta_jp: f64,
    pub gamma_cvx: f64,
    pub gamma_jp: f64,
    pub clamp_cvx: Clamp,
    pub clamp_jp: Clamp,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub seed: u64,
    pub splits: usize,
    pub trials: usize,
    pub base_grid: Vec<usize>,
    pub threshold: Threshold,
    pub forced_names: Vec<String>,
    pub s1_fraction: f64,
    pub s1_size: usize,
    pub s2_size: usize,
    pub score_kind: DistanceKind,
    pub weight_cvx: f64,
    pub max_extensions: usize,
    pub n_exemplars: usize,
    pub n_meaningful: usize,
    pub n_discovered: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeaningfulnessReport {
    pub gamma_tilde: f64,
    pub cvx: KindSummary,
    pub jp: KindSummary,
    pub splits: Vec<SplitRecord>,
    pub config: ConfigEcho,
    /// False if any hull solve missed the KKT tolerance.
    pub converged: bool,
}

/// Splits of the labelled set and their interpolation curves, reusable for
/// any number of discovered sets.
pub struct Calibrator {
    meaningful: AttributeMatrix,
    cfg: MetricConfig,
    base_grid: Vec<usize>,
    splits: Vec<SubspaceSplit>,
    curves_cvx: Vec<InterpolationCurve>,
    curves_jp: Vec<InterpolationCurve>,
}

impl Calibrator {
    pub fn new(s: &AttributeMatrix, cfg: MetricConfig) -> Result<Self> {
        if cfg.splits == 0 || cfg.trials == 0 {
            return Err(Error::InvalidConfig("splits and trials must be positive".into()));
        }
        if !(0.0..=1.0).contains(&cfg.weight_cvx) {
            return Err(Error::InvalidConfig(format!(
                "cvx weight {} outside [0, 1]",
                cfg.weight_cvx
            )));
        }
        let scores = leave_one_out_errors(s, cfg.score_kind)?;
        let splits = (0..cfg.splits)
            .map(|i| select_with_scores(s, &scores.scores, &cfg.selection(i)))
            .collect::<Result<Vec<_>>>()?;
        let s2_size = splits[0].s2.n_columns();
        let base_grid = match &cfg.grid {
            Some(g) => {
                crate::interpolate::check_grid(g)?;
                g.clone()
            }
            None => default_grid(s2_size),
        };
        let trace = |kind: DistanceKind| -> Result<Vec<InterpolationCurve>> {
            splits
                .par_iter()
                .enumerate()
                .map(|(i, sp)| CurveTracer::new(&sp.s1, &sp.s2, kind)?.trace(&base_grid, cfg.trials, cfg.curve_seed(i)))
                .collect()
        };
        let curves_cvx = trace(DistanceKind::ConvexHull)?;
        let curves_jp = trace(DistanceKind::JointL0)?;
        Ok(Self {
            meaningful: s.clone(),
            cfg,
            base_grid,
            splits,
            curves_cvx,
            curves_jp,
        })
    }

    pub fn splits(&self) -> &[SubspaceSplit] {
        &self.splits
    }

    pub fn curves(&self, kind: DistanceKind) -> &[InterpolationCurve] {
        match kind {
            DistanceKind::ConvexHull => &self.curves_cvx,
            DistanceKind::JointL0 => &self.curves_jp,
        }
    }

    fn extend(&mut self, kind: DistanceKind) -> Result<()> {
        let cfg = &self.cfg;
        let splits = &self.splits;
        let curves = match kind {
            DistanceKind::ConvexHull => &mut self.curves_cvx,
            DistanceKind::JointL0 => &mut self.curves_jp,
        };
        curves
            .par_iter_mut()
            .enumerate()
            .map(|(i, curve)| {
                let next = curve.max_noise().unwrap_or(0).max(1) * 2;
                CurveTracer::new(&splits[i].s1, &splits[i].s2, kind)?.extend(curve, next, cfg.curve_seed(i))
            })
            .collect::<Result<Vec<()>>>()?;
        Ok(())
    }

    /// Split-averaged curve over the first `points` grid points.
    fn average_curve(&self, kind: DistanceKind, points: usize) -> InterpolationCurve {
        let curves = self.curves(kind);
        let first = &curves[0];
        let mut mean = Vec::with_capacity(points);
        let mut std = Vec::with_capacity(points);
        for p in 0..points {
            let values: Vec<f64> = curves.iter().map(|c| c.mean_distance[p]).collect();
            let (m, s) = mean_std(&values);
            mean.push(m);
            std.push(s);
        }
        InterpolationCurve {
            kind,
            grid: first.grid[..points].to_vec(),
            mean_distance: mean,
            std_distance: std,
            trials: first.trials,
            s2_size: first.s2_size,
            converged: curves.iter().all(|c| c.converged),
        }
    }

    /// Calibrates the split-averaged distance on the base grid, then on the
    /// grid with one more doubled point at a time while the result sits at
    /// the ceiling. Extra points are traced once and reused, but a call only
    /// ever sees the prefix it needs, so results do not depend on what was
    /// evaluated before.
    fn calibrate_kind(
        &mut self,
        kind: DistanceKind,
        delta_mean: f64,
    ) -> Result<(CalibrationResult, InterpolationCurve)> {
        let mut points = self.base_grid.len();
        loop {
            let avg = self.average_curve(kind, points);
            let cal = calibrate(&avg, delta_mean)?;
            if cal.clamped != Clamp::Ceiling || points >= self.base_grid.len() + self.cfg.max_extensions {
                return Ok((cal, avg));
            }
            points += 1;
            if self.curves(kind)[0].len() < points {
                self.extend(kind)?;
            }
        }
    }

    pub fn evaluate(&mut self, d: &AttributeMatrix) -> Result<MeaningfulnessReport> {
        check_same_exemplars(&self.meaningful, d)?;
        if d.is_empty() {
            return Err(Error::ShapeMismatch("discovered set is empty".into()));
        }
        let per_split: Vec<(f64, f64, bool)> = self
            .splits
            .par_iter()
            .map(|sp| {
                let cvx = delta_cvx(&sp.s1, d)?;
                let jp = delta_jp(&sp.s1, d)?;
                Ok((cvx.distance, jp.distance, cvx.converged))
            })
            .collect::<Result<Vec<_>>>()?;
        let deltas_cvx: Vec<f64> = per_split.iter().map(|p| p.0).collect();
        let deltas_jp: Vec<f64> = per_split.iter().map(|p| p.1).collect();
        let mut converged = per_split.iter().all(|p| p.2);

        let mut summarize = |kind: DistanceKind, deltas: &[f64]| -> Result<(KindSummary, Vec<CalibrationResult>)> {
            let (delta_mean, delta_std) = mean_std(deltas);
            let (calibration, avg) = self.calibrate_kind(kind, delta_mean)?;
            let points = avg.len();
            let split_cals = self
                .curves(kind)
                .iter()
                .zip(deltas)
                .map(|(c, &dd)| calibrate(&c.prefix(points), dd))
                .collect::<Result<Vec<_>>>()?;
            let gammas: Vec<f64> = split_cals.iter().map(|c| c.gamma).collect();
            let (split_gamma_mean, split_gamma_std) = mean_std(&gammas);
            converged &= avg.converged;
            let fitted = isotonic_fit(&avg.mean_distance);
            Ok((
                KindSummary {
                    kind,
                    delta_mean,
                    delta_std,
                    calibration,
                    curve: CurveSummary {
                        grid: avg.grid,
                        mean_distance: avg.mean_distance,
                        std_distance: avg.std_distance,
                        fitted,
                    },
                    split_gamma_mean,
                    split_gamma_std,
                },
                split_cals,
            ))
        };
        let (cvx, cals_cvx) = summarize(DistanceKind::ConvexHull, &deltas_cvx)?;
        let (jp, cals_jp) = summarize(DistanceKind::JointL0, &deltas_jp)?;
        let gamma_tilde = gamma_weighted(cvx.calibration.gamma, jp.calibration.gamma, self.cfg.weight_cvx)?;

        let splits = self
            .splits
            .iter()
            .enumerate()
            .map(|(i, sp)| SplitRecord {
                index: i,
                seed: sp.seed,
                s1: sp.s1_indices.iter().map(|&k| self.meaningful.label(k)).collect(),
                delta_cvx: deltas_cvx[i],
                delta_jp: deltas_jp[i],
                gamma_cvx: cals_cvx[i].gamma,
                gamma_jp: cals_jp[i].gamma,
                clamp_cvx: cals_cvx[i].clamped,
                clamp_jp: cals_jp[i].clamped,
            })
            .collect();
        let config = ConfigEcho {
            seed: self.cfg.seed,
            splits: self.cfg.splits,
            trials: self.cfg.trials,
            base_grid: self.base_grid.clone(),
            threshold: self.cfg.threshold,
            forced_names: self.cfg.forced_names.clone(),
            s1_fraction: self.cfg.s1_fraction,
            s1_size: self.splits[0].s1.n_columns(),
            s2_size: self.splits[0].s2.n_columns(),
            score_kind: self.cfg.score_kind,
            weight_cvx: self.cfg.weight_cvx,
            max_extensions: self.cfg.max_extensions,
            n_exemplars: d.n_exemplars(),
            n_meaningful: self.meaningful.n_columns(),
            n_discovered: d.n_columns(),
        };
        Ok(MeaningfulnessReport {
            gamma_tilde,
            cvx,
            jp,
            splits,
            config,
            converged,
        })
    }
}

/// Full evaluation of discovered set `d` against the labelled set `s`.
pub fn evaluate_method(d: &AttributeMatrix, s: &AttributeMatrix, cfg: &MetricConfig) -> Result<MeaningfulnessReport> {
    check_same_exemplars(s, d)?;
    Calibrator::new(s, cfg.clone())?.evaluate(d)
}
