//! Deterministic grid-plus-refinement searches for the two maximal
//! selection probabilities.
//!
//! The search evaluates a `grid^d` lattice of cell centers over the box,
//! keeps the best point (ties broken toward the lexicographically smallest
//! parameters), then shrinks the box to one cell either side of it and
//! repeats until every side is shorter than the refinement tolerance.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use thiserror::Error;

use crate::constructions::{family_delta_signed_overlap, hardy_selection_probability};

pub const MIN_GRID: usize = 16;
pub const DEFAULT_MAX_ITERATIONS: usize = 60;
pub const DEFAULT_EXCLUSIVITY_TOL: f64 = 1e-9;

// Search interval for the β mixing coefficient.
const P_LO: f64 = 1e-6;
const P_HI: f64 = 1.0 - 1e-9;
const FD_STEP: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizerError {
    #[error("grid resolution {0} is below the minimum of {MIN_GRID}")]
    GridTooSmall(usize),
    #[error("refinement tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("refinement did not converge in {iterations} iterations (box width {width:e})")]
    NotConverged { iterations: usize, width: f64 },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

pub type Result<T> = std::result::Result<T, OptimizerError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub grid: usize,
    pub refine_tol: f64,
    pub max_iterations: usize,
    /// Worker threads for grid evaluation; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl SearchOptions {
    pub fn new(grid: usize, refine_tol: f64) -> Self {
        Self {
            grid,
            refine_tol,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub parameters: Vec<(String, f64)>,
    pub objective: f64,
    pub evaluations: u64,
    pub grid_resolution: usize,
    pub refine_tolerance: f64,
    pub iterations: usize,
    /// Exclusivity tolerance used for feasibility, when the search has one.
    pub exclusivity_tol: Option<f64>,
    /// Best objective after each iteration.
    pub history: Vec<f64>,
}

impl OptimizationResult {
    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOutcome {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: u64,
    pub iterations: usize,
    pub history: Vec<f64>,
}

fn lattice_point(bounds: &[(f64, f64)], n: usize, mut index: usize) -> Vec<f64> {
    let mut point = vec![0.0; bounds.len()];
    for (d, &(lo, hi)) in bounds.iter().enumerate().rev() {
        let i = index % n;
        index /= n;
        point[d] = lo + (i as f64 + 0.5) * (hi - lo) / n as f64;
    }
    point
}

/// Maximizes `f` over the box `bounds` by iterated shrinking grid search.
pub fn grid_refine<F>(bounds: &[(f64, f64)], opts: &SearchOptions, f: F) -> Result<GridOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if opts.grid < MIN_GRID {
        return Err(OptimizerError::GridTooSmall(opts.grid));
    }
    if opts.refine_tol.is_nan() || opts.refine_tol <= 0.0 {
        return Err(OptimizerError::BadTolerance(opts.refine_tol));
    }
    let run = || search(bounds, opts, &f);
    match opts.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| OptimizerError::ThreadPool(e.to_string()))?
            .install(run),
        None => run(),
    }
}

fn search<F>(bounds: &[(f64, f64)], opts: &SearchOptions, f: &F) -> Result<GridOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = opts.grid;
    let count = n.pow(bounds.len() as u32);
    let mut region = bounds.to_vec();
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut evaluations = 0u64;
    let mut history = Vec::new();

    for iteration in 1..=opts.max_iterations {
        let values: Vec<f64> = (0..count)
            .into_par_iter()
            .map(|i| {
                let v = f(&lattice_point(&region, n, i));
                if v.is_nan() {
                    f64::NEG_INFINITY
                } else {
                    v
                }
            })
            .collect();
        evaluations += count as u64;

        // First maximum in lattice order is the lexicographically smallest.
        let (arg, &value) =
            values.iter().enumerate().fold(
                (0, &f64::NEG_INFINITY),
                |acc, cur| if *cur.1 > *acc.1 { cur } else { acc },
            );
        if best.as_ref().is_none_or(|(_, b)| value > *b) {
            best = Some((lattice_point(&region, n, arg), value));
        }
        let (point, value) = best.clone().expect("set above");
        history.push(value);

        region = region
            .iter()
            .zip(bounds)
            .zip(&point)
            .map(|((&(lo, hi), &(blo, bhi)), &x)| {
                let h = (hi - lo) / n as f64;
                ((x - h).max(blo), (x + h).min(bhi))
            })
            .collect();
        let width = region.iter().map(|(lo, hi)| hi - lo).fold(0.0, f64::max);
        if width < opts.refine_tol {
            return Ok(GridOutcome {
                point,
                value,
                evaluations,
                iterations: iteration,
                history,
            });
        }
    }
    let width = region.iter().map(|(lo, hi)| hi - lo).fold(0.0, f64::max);
    Err(OptimizerError::NotConverged {
        iterations: opts.max_iterations,
        width,
    })
}

/// Maximizes Hardy's selection probability over `(θa, θb) ∈ (0, π/2)²`.
/// Degenerate angle pairs score 0.
pub fn maximize_hardy(opts: &SearchOptions) -> Result<OptimizationResult> {
    let bounds = [(0.0, FRAC_PI_2), (0.0, FRAC_PI_2)];
    let out = grid_refine(&bounds, opts, |x| {
        hardy_selection_probability(x[0], x[1]).unwrap_or(0.0)
    })?;
    Ok(OptimizationResult {
        parameters: vec![("theta_a".into(), out.point[0]), ("theta_b".into(), out.point[1])],
        objective: out.value,
        evaluations: out.evaluations,
        grid_resolution: opts.grid,
        refine_tolerance: opts.refine_tol,
        iterations: out.iterations,
        exclusivity_tol: None,
        history: out.history,
    })
}

fn signed_overlap(c: f64, p: f64) -> f64 {
    family_delta_signed_overlap(c, p).unwrap_or(f64::INFINITY)
}

/// The β mixing coefficient minimizing the signed δ overlap at `c`, found by
/// bisection on the sign of a central-difference derivative. The signed
/// overlap is unimodal in `p` on `(0, 1)`.
pub fn family_min_overlap_p(c: f64) -> f64 {
    let (mut lo, mut hi) = (P_LO, P_HI);
    for _ in 0..200 {
        if hi - lo < 1e-14 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let h = FD_STEP.min(mid - P_LO * 0.5).min((1.0 - mid) * 0.5);
        let slope = signed_overlap(c, mid + h) - signed_overlap(c, mid - h);
        if slope > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// A β mixing coefficient at which the family member `c` has its δ pair
/// exclusive to within `tol`, or `None` when no such `p` exists.
pub fn family_feasible_p(c: f64, tol: f64) -> Option<f64> {
    if !(c > 0.0 && c < 1.0) {
        return None;
    }
    let p_min = family_min_overlap_p(c);
    let g_min = signed_overlap(c, p_min);
    if g_min.abs() < tol {
        return Some(p_min);
    }
    if g_min > 0.0 {
        return None;
    }
    // Sign change between the minimum and p → 1, where the overlap tends to 1.
    let (mut lo, mut hi) = (p_min, P_HI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g = signed_overlap(c, mid);
        if g.abs() < tol {
            return Some(mid);
        }
        if g < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let mid = 0.5 * (lo + hi);
    (signed_overlap(c, mid).abs() < tol).then_some(mid)
}

/// Maximizes the selection probability `c²` over the real two-parameter
/// family, restricted to members whose δ pair is exclusive within
/// `exclusivity_tol`. `p` is eliminated by a per-`c` root solve, so the grid
/// runs over `c ∈ (0, 1)`.
pub fn maximize_cabello_family(opts: &SearchOptions, exclusivity_tol: f64) -> Result<OptimizationResult> {
    let out = grid_refine(&[(0.0, 1.0)], opts, |x| {
        let c = x[0];
        family_feasible_p(c, exclusivity_tol).map_or(0.0, |_| c * c)
    })?;
    let c = out.point[0];
    let p = family_feasible_p(c, exclusivity_tol).unwrap_or(f64::NAN);
    Ok(OptimizationResult {
        parameters: vec![("c".into(), c), ("p".into(), p)],
        objective: out.value,
        evaluations: out.evaluations,
        grid_resolution: opts.grid,
        refine_tolerance: opts.refine_tol,
        iterations: out.iterations,
        exclusivity_tol: Some(exclusivity_tol),
        history: out.history,
    })
}
