//! Noise attributes and the interpolation curve between the meaningful
//! subspace and noise.
//!
//! Uniform random ±1 attributes stand in for the non-meaningful subspace.
//! Appending `n` of them to the holdout `S2` and measuring the distance of the
//! union to `S1` traces a curve that starts at `δ(S2, S1)` and approaches the
//! pure-noise distance as `n` grows.

use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{check_same_exemplars, tail_mask, words_for, AttributeMatrix};
use crate::reconstruct::{delta_jp, DistanceKind, HullSolver};
use crate::rng::{derive_seed, stream, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseSpec {
    pub n_exemplars: usize,
    pub count: usize,
    pub seed: u64,
}

/// Draws `count` attributes whose entries are independent fair ±1 coins.
///
/// Bits come straight from a ChaCha8 stream keyed by `seed`: bit `i % 64` of
/// the `i / 64`-th word of a column is exemplar `i` (set ⇔ `+1`).
pub fn gen_noise(spec: &NoiseSpec) -> AttributeMatrix {
    let words = words_for(spec.n_exemplars);
    if words == 0 {
        return AttributeMatrix::empty(0);
    }
    let mask = tail_mask(spec.n_exemplars);
    let mut rng = stream(spec.seed, Purpose::Noise, &[]);
    let mut bits = Vec::with_capacity(words * spec.count);
    for _ in 0..spec.count {
        for w in 0..words {
            let word = rng.next_u64();
            bits.push(if w + 1 == words { word & mask } else { word });
        }
    }
    AttributeMatrix::from_bits(spec.n_exemplars, bits)
}

/// Seed of the noise drawn for `count` added attributes in `trial`.
pub fn trial_noise_seed(seed: u64, count: usize, trial: usize) -> u64 {
    derive_seed(seed, &[count as u64, trial as u64])
}

/// Average distance as a function of the number of injected noise attributes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpolationCurve {
    pub kind: DistanceKind,
    pub grid: Vec<usize>,
    pub mean_distance: Vec<f64>,
    pub std_distance: Vec<f64>,
    pub trials: usize,
    /// `|S2|`, needed to turn a noise count into a metric value.
    pub s2_size: usize,
    /// False if any hull solve behind the curve missed the KKT tolerance.
    pub converged: bool,
}

impl InterpolationCurve {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn max_noise(&self) -> Option<usize> {
        self.grid.last().copied()
    }

    /// The first `points` grid points.
    pub fn prefix(&self, points: usize) -> InterpolationCurve {
        let points = points.min(self.len());
        InterpolationCurve {
            kind: self.kind,
            grid: self.grid[..points].to_vec(),
            mean_distance: self.mean_distance[..points].to_vec(),
            std_distance: self.std_distance[..points].to_vec(),
            trials: self.trials,
            s2_size: self.s2_size,
            converged: self.converged,
        }
    }
}

/// Default grid `{0, ⌈m/4⌉, ⌈m/2⌉, m, 2m, 4m, 8m, 16m}` for `m = |S2|`,
/// with duplicates removed.
pub fn default_grid(s2_size: usize) -> Vec<usize> {
    let m = s2_size.max(1);
    let mut grid = vec![0, m.div_ceil(4), m.div_ceil(2), m, 2 * m, 4 * m, 8 * m, 16 * m];
    grid.dedup();
    grid
}

pub(crate) fn check_grid(grid: &[usize]) -> Result<()> {
    if grid.first() != Some(&0) {
        return Err(Error::InvalidConfig("noise grid must start at 0".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("noise grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Population-free summary: sequential mean and sample standard deviation
/// (zero for a single value).
pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let mean = crate::reconstruct::mean(values);
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = values.iter().fold(0.0, |acc, v| acc + (v - mean) * (v - mean));
    (mean, (ss / (values.len() - 1) as f64).sqrt())
}

/// Evaluates `δ(S2 ∪ Ñ, S1)` for freshly drawn noise sets.
///
/// For the hull distance the per-column errors of `S2` are computed once and
/// reused; noise errors are accumulated after them in column order, giving the
/// same floating-point result as a full solve of the concatenated set.
pub struct CurveTracer<'a> {
    kind: DistanceKind,
    s1: &'a AttributeMatrix,
    s2: &'a AttributeMatrix,
    solver: Option<HullSolver<'a>>,
    s2_error_sum: f64,
    s2_converged: bool,
}

impl<'a> CurveTracer<'a> {
    pub fn new(s1: &'a AttributeMatrix, s2: &'a AttributeMatrix, kind: DistanceKind) -> Result<Self> {
        check_same_exemplars(s1, s2)?;
        if s1.is_empty() || s2.is_empty() {
            return Err(Error::ShapeMismatch(format!(
                "interpolation needs nonempty S1 and S2, got {} and {}",
                s1.n_columns(),
                s2.n_columns()
            )));
        }
        let (solver, s2_error_sum, s2_converged) = match kind {
            DistanceKind::ConvexHull => {
                let solver = HullSolver::new(s1)?;
                let mut sum = 0.0;
                let mut converged = true;
                for k in 0..s2.n_columns() {
                    let sol = solver.solve_column(s2, k);
                    sum += sol.error;
                    converged &= sol.converged;
                }
                (Some(solver), sum, converged)
            }
            DistanceKind::JointL0 => (None, 0.0, true),
        };
        Ok(Self {
            kind,
            s1,
            s2,
            solver,
            s2_error_sum,
            s2_converged,
        })
    }

    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    pub fn s2_size(&self) -> usize {
        self.s2.n_columns()
    }

    /// Distance with `count` noise attributes drawn for `trial`, plus whether
    /// every solve converged.
    pub fn point(&self, count: usize, trial: usize, seed: u64) -> (f64, bool) {
        let noise = gen_noise(&NoiseSpec {
            n_exemplars: self.s1.n_exemplars(),
            count,
            seed: trial_noise_seed(seed, count, trial),
        });
        let total = (self.s2.n_columns() + count) as f64;
        match &self.solver {
            Some(solver) => {
                let mut sum = self.s2_error_sum;
                let mut converged = self.s2_converged;
                for k in 0..count {
                    let sol = solver.solve_column(&noise, k);
                    sum += sol.error;
                    converged &= sol.converged;
                }
                (sum / total, converged)
            }
            None => {
                let tilde = self.s2.hstack(&noise).expect("noise shares N with S2");
                let r = delta_jp(self.s1, &tilde).expect("nonempty sets with shared N");
                (r.distance, true)
            }
        }
    }

    /// Mean and standard deviation over `trials` draws at one noise count.
    pub fn summarize(&self, count: usize, trials: usize, seed: u64) -> (f64, f64, bool) {
        if count == 0 {
            // Without noise every trial is the same set.
            let (d, ok) = self.point(0, 0, seed);
            return (d, 0.0, ok);
        }
        let points: Vec<(f64, bool)> = (0..trials)
            .into_par_iter()
            .map(|t| self.point(count, t, seed))
            .collect();
        let values: Vec<f64> = points.iter().map(|p| p.0).collect();
        let (mean, std) = mean_std(&values);
        (mean, std, points.iter().all(|p| p.1))
    }

    pub fn trace(&self, grid: &[usize], trials: usize, seed: u64) -> Result<InterpolationCurve> {
        check_grid(grid)?;
        if trials == 0 {
            return Err(Error::InvalidConfig("need at least one trial".into()));
        }
        let mut curve = InterpolationCurve {
            kind: self.kind,
            grid: Vec::with_capacity(grid.len()),
            mean_distance: Vec::with_capacity(grid.len()),
            std_distance: Vec::with_capacity(grid.len()),
            trials,
            s2_size: self.s2.n_columns(),
            converged: true,
        };
        for &count in grid {
            self.extend(&mut curve, count, seed)?;
        }
        Ok(curve)
    }

    /// Appends the point for `count` noise attributes to `curve`.
    pub fn extend(&self, curve: &mut InterpolationCurve, count: usize, seed: u64) -> Result<()> {
        if let Some(&last) = curve.grid.last() {
            if count <= last {
                return Err(Error::InvalidConfig("noise grid must be strictly increasing".into()));
            }
        }
        let (mean, std, ok) = self.summarize(count, curve.trials, seed);
        curve.grid.push(count);
        curve.mean_distance.push(mean);
        curve.std_distance.push(std);
        curve.converged &= ok;
        Ok(())
    }
}

/// Traces `δ_kind(S2 ∪ Ñ, S1)` over `grid`, averaging `trials` independent
/// noise draws per point.
pub fn trace_curve(
    s1: &AttributeMatrix,
    s2: &AttributeMatrix,
    grid: &[usize],
    trials: usize,
    kind: DistanceKind,
    seed: u64,
) -> Result<InterpolationCurve> {
    CurveTracer::new(s1, s2, kind)?.trace(grid, trials, seed)
}
