//! Euclidean projection onto the probability simplex and the convex-hull
//! least-squares solver built on it.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::matrix::AttributeMatrix;

/// Gradient-mapping norm below which a hull solve counts as converged.
pub const KKT_TOLERANCE: f64 = 1e-9;

/// Iteration cap for a single hull solve.
pub const MAX_ITERATIONS: usize = 10_000;

/// Projects `v` onto `{r : r_i >= 0, sum r_i = 1}`.
pub fn simplex_project(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::EmptyVector);
    }
    let mut out = v.to_vec();
    let mut scratch = Vec::with_capacity(v.len());
    project_in_place(&mut out, &mut scratch);
    Ok(out)
}

/// Sort-based projection. `scratch` is reused between calls.
pub(crate) fn project_in_place(v: &mut [f64], scratch: &mut Vec<f64>) {
    scratch.clear();
    scratch.extend_from_slice(v);
    scratch.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &u) in scratch.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (i + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// Outcome of one convex-hull solve.
#[derive(Debug, Clone, PartialEq)]
pub struct HullSolution {
    /// Optimal point on the simplex (one weight per hull vertex).
    pub coefficients: Vec<f64>,
    /// `‖A r − z‖²` at the returned point.
    pub error: f64,
    /// Gradient-mapping norm at the returned point.
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimises `‖A r − z‖²` over the simplex for a fixed `A`.
///
/// The objective is kept in Gram form, `rᵀGr − 2cᵀr + N` with `G = AᵀA` and
/// `c = Aᵀz`. For ±1 data every entry of `G` and `c` is an exact integer
/// obtained from popcounts, so only the iterate itself carries rounding.
///
/// Iterations are accelerated projected gradient steps with step `1/L`,
/// `L = 2·λ̄` where `λ̄` bounds the spectral norm of `G`, and gradient-based
/// momentum restarts. Whenever the support of the iterate settles, the
/// equality-constrained problem on that support is solved directly; the
/// candidate is accepted only if it is feasible and passes the KKT check.
#[derive(Debug, Clone)]
pub struct HullSolver<'a> {
    atoms: &'a AttributeMatrix,
    gram: Vec<f64>,
    lipschitz: f64,
}

impl<'a> HullSolver<'a> {
    pub fn new(atoms: &'a AttributeMatrix) -> Result<Self> {
        let j = atoms.n_columns();
        if j == 0 {
            return Err(Error::ShapeMismatch("hull of an empty attribute set".into()));
        }
        let n = atoms.n_exemplars() as f64;
        let mut gram = vec![0.0; j * j];
        for a in 0..j {
            for b in a..j {
                let agree = f64::from(atoms.agreements_with(a, atoms, b));
                let g = 2.0 * agree - n;
                gram[a * j + b] = g;
                gram[b * j + a] = g;
            }
        }
        // Both the Gershgorin and Frobenius bounds dominate the spectral norm.
        let gershgorin = (0..j)
            .map(|a| gram[a * j..(a + 1) * j].iter().map(|g| g.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let frobenius = gram.iter().map(|g| g * g).sum::<f64>().sqrt();
        let bound = gershgorin.min(frobenius).max(f64::MIN_POSITIVE);
        Ok(Self {
            atoms,
            gram,
            lipschitz: 2.0 * bound,
        })
    }

    pub fn atoms(&self) -> &AttributeMatrix {
        self.atoms
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Solves for column `k` of `targets`, which must share `N` with the atoms.
    pub fn solve_column(&self, targets: &AttributeMatrix, k: usize) -> HullSolution {
        debug_assert_eq!(targets.n_exemplars(), self.atoms.n_exemplars());
        let n = self.atoms.n_exemplars() as f64;
        let linear: Vec<f64> = (0..self.atoms.n_columns())
            .map(|j| 2.0 * f64::from(self.atoms.agreements_with(j, targets, k)) - n)
            .collect();
        self.solve_gram(&linear, n)
    }

    /// Solves with an explicit `c = Aᵀz` and `‖z‖²`.
    pub(crate) fn solve_gram(&self, linear: &[f64], target_norm_sq: f64) -> HullSolution {
        Problem {
            gram: &self.gram,
            linear,
            constant: target_norm_sq,
            lipschitz: self.lipschitz,
        }
        .solve()
    }
}

struct Problem<'p> {
    gram: &'p [f64],
    linear: &'p [f64],
    constant: f64,
    lipschitz: f64,
}

impl Problem<'_> {
    fn dim(&self) -> usize {
        self.linear.len()
    }

    fn gradient(&self, r: &[f64], out: &mut [f64]) {
        let j = self.dim();
        for (a, g) in out.iter_mut().enumerate() {
            let row = &self.gram[a * j..(a + 1) * j];
            let dot: f64 = row.iter().zip(r).map(|(x, y)| x * y).sum();
            *g = 2.0 * (dot - self.linear[a]);
        }
    }

    fn objective(&self, r: &[f64]) -> f64 {
        let j = self.dim();
        let mut quad = 0.0;
        for a in 0..j {
            if r[a] == 0.0 {
                continue;
            }
            let row = &self.gram[a * j..(a + 1) * j];
            let dot: f64 = row.iter().zip(r).map(|(x, y)| x * y).sum();
            quad += r[a] * dot;
        }
        let lin: f64 = self.linear.iter().zip(r).map(|(c, x)| c * x).sum();
        (quad - 2.0 * lin + self.constant).max(0.0)
    }

    /// `L·‖r − P(r − ∇f(r)/L)‖`.
    fn residual(&self, r: &[f64], grad: &mut [f64], step: &mut [f64], scratch: &mut Vec<f64>) -> f64 {
        self.gradient(r, grad);
        for ((s, x), g) in step.iter_mut().zip(r).zip(grad.iter()) {
            *s = x - g / self.lipschitz;
        }
        project_in_place(step, scratch);
        let sq: f64 = step.iter().zip(r).map(|(a, b)| (a - b) * (a - b)).sum();
        self.lipschitz * sq.sqrt()
    }

    /// Minimiser of the objective over the affine hull of `support`, if it is
    /// uniquely determined and lies in the simplex.
    fn solve_on_support(&self, support: &[usize]) -> Option<Vec<f64>> {
        let s = support.len();
        let j = self.dim();
        let mut kkt = DMatrix::<f64>::zeros(s + 1, s + 1);
        let mut rhs = DVector::<f64>::zeros(s + 1);
        for (p, &a) in support.iter().enumerate() {
            for (q, &b) in support.iter().enumerate() {
                kkt[(p, q)] = self.gram[a * j + b];
            }
            kkt[(p, s)] = 1.0;
            kkt[(s, p)] = 1.0;
            rhs[p] = self.linear[a];
        }
        rhs[s] = 1.0;
        let sol = kkt.full_piv_lu().solve(&rhs)?;
        let mut r = vec![0.0; j];
        for (p, &a) in support.iter().enumerate() {
            if !sol[p].is_finite() || sol[p] < 0.0 {
                return None;
            }
            r[a] = sol[p];
        }
        let total: f64 = r.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return None;
        }
        r.iter_mut().for_each(|x| *x /= total);
        Some(r)
    }

    fn solve(&self) -> HullSolution {
        let j = self.dim();
        let mut grad = vec![0.0; j];
        let mut step = vec![0.0; j];
        let mut scratch = Vec::with_capacity(j);

        // Start from the best single vertex: error of vertex a is G_aa − 2c_a + N.
        let best = (0..j)
            .min_by(|&a, &b| {
                let fa = self.gram[a * j + a] - 2.0 * self.linear[a];
                let fb = self.gram[b * j + b] - 2.0 * self.linear[b];
                fa.total_cmp(&fb)
            })
            .unwrap_or(0);
        let mut x = vec![0.0; j];
        x[best] = 1.0;

        let finish = |r: Vec<f64>, kkt_residual: f64, iterations: usize, converged: bool| HullSolution {
            error: self.objective(&r),
            coefficients: r,
            kkt_residual,
            iterations,
            converged,
        };

        let res = self.residual(&x, &mut grad, &mut step, &mut scratch);
        if res <= KKT_TOLERANCE {
            return finish(x, res, 0, true);
        }

        let mut y = x.clone();
        let mut x_next = vec![0.0; j];
        let mut t = 1.0_f64;
        let mut support: Vec<usize> = Vec::with_capacity(j);
        let mut stable_for = 0usize;
        let mut polished: Option<Vec<usize>> = None;
        let mut last_residual = res;

        for it in 1..=MAX_ITERATIONS {
            self.gradient(&y, &mut grad);
            for ((s, yv), g) in x_next.iter_mut().zip(&y).zip(&grad) {
                *s = yv - g / self.lipschitz;
            }
            project_in_place(&mut x_next, &mut scratch);

            // Restart momentum when the step opposes the previous direction.
            let opposing: f64 = y
                .iter()
                .zip(&x_next)
                .zip(&x)
                .map(|((yv, xn), xo)| (yv - xn) * (xn - xo))
                .sum();
            let t_next = if opposing > 0.0 {
                1.0
            } else {
                (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0
            };
            let beta = if opposing > 0.0 { 0.0 } else { (t - 1.0) / t_next };
            for a in 0..j {
                y[a] = x_next[a] + beta * (x_next[a] - x[a]);
            }
            std::mem::swap(&mut x, &mut x_next);
            t = t_next;

            let new_support: Vec<usize> = (0..j).filter(|&a| x[a] > 0.0).collect();
            if new_support == support {
                stable_for += 1;
            } else {
                support = new_support;
                stable_for = 0;
            }

            if stable_for >= 2 && polished.as_ref() != Some(&support) {
                polished = Some(support.clone());
                if let Some(candidate) = self.solve_on_support(&support) {
                    let res = self.residual(&candidate, &mut grad, &mut step, &mut scratch);
                    if res <= KKT_TOLERANCE {
                        return finish(candidate, res, it, true);
                    }
                }
            }

            if it % 8 == 0 || it == MAX_ITERATIONS {
                last_residual = self.residual(&x, &mut grad, &mut step, &mut scratch);
                if last_residual <= KKT_TOLERANCE {
                    return finish(x, last_residual, it, true);
                }
            }
        }
        finish(x, last_residual, MAX_ITERATIONS, false)
    }
}
