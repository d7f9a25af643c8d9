//! Critical points of `prod (x - x_i)` and of weighted Cauchy sums, one
//! sweep at a time, and the repeated-differentiation driver.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cauchy::{build_plan, eval_pair, SourceSet, SumPlan};
use crate::error::{Error, Result};
use crate::poly::RootSet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    /// Accuracy requested from the fast Cauchy sum.
    pub epsilon: f64,
    /// Newton stops once a step is below `newton_tol` times the interval width.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Keep every `snapshot_stride`-th state in a [`Trajectory`].
    pub snapshot_stride: usize,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        EvolveConfig {
            epsilon: 1e-12,
            newton_tol: 1e-14,
            max_newton_iters: 60,
            snapshot_stride: 1,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.newton_tol > 0.0) {
            return Err(Error::InvalidArgument("newton_tol must be positive".into()));
        }
        if self.max_newton_iters == 0 {
            return Err(Error::InvalidArgument("max_newton_iters must be at least 1".into()));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidArgument("snapshot_stride must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon {} outside (0, 1)", self.epsilon)));
        }
        Ok(())
    }
}

/// Outcome of one sweep over all gaps.
#[derive(Clone, Debug)]
pub struct Sweep {
    pub roots: RootSet,
    /// Gaps too narrow to solve in; their midpoint was returned.
    pub degenerate: Vec<usize>,
    /// Total sum evaluations over all gaps.
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// `(derivatives taken, roots)`, starting with the input at 0.
    pub snapshots: Vec<(usize, RootSet)>,
    #[serde(rename = "final")]
    pub final_roots: RootSet,
}

// gaps per sweep above which the solves are spread over the rayon pool
const PARALLEL_GAPS: usize = 4096;

// relative Newton step below which a stalled |S| counts as converged
const NOISE_STEP: f64 = 1e-8;

/// The `n - 1` zeros of `S(r) = sum w_i / (r - x_i)`, one per gap.
pub fn weighted_critical_points(sources: &SourceSet, cfg: &EvolveConfig) -> Result<RootSet> {
    Ok(solve_sweep(sources, cfg)?.roots)
}

pub fn solve_sweep(sources: &SourceSet, cfg: &EvolveConfig) -> Result<Sweep> {
    cfg.validate()?;
    let n = sources.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 sources, got {n}")));
    }
    let plan = build_plan(sources, cfg.epsilon)?;
    let x = sources.positions().as_slice();
    let sep = sources.positions().min_separation();

    let solve = |i: usize| solve_gap(&plan, sources, cfg, i, x[i], x[i + 1], sep);
    let solved: Vec<Result<GapRoot>> = if n - 1 >= PARALLEL_GAPS {
        (0..n - 1).into_par_iter().map(solve).collect()
    } else {
        (0..n - 1).map(solve).collect()
    };

    let mut roots = Vec::with_capacity(n - 1);
    let mut degenerate = Vec::new();
    let mut evaluations = 0;
    for (i, g) in solved.into_iter().enumerate() {
        let g = g?;
        if g.degenerate {
            log::warn!("gap {i} narrower than 10 x minimum separation; using its midpoint");
            degenerate.push(i);
        }
        evaluations += g.evaluations;
        roots.push(g.root);
    }
    let roots = RootSet::new(roots).map_err(|e| {
        Error::Degenerate(format!("critical points violate root-set invariants: {e}"))
    })?;
    Ok(Sweep {
        roots,
        degenerate,
        evaluations,
    })
}

struct GapRoot {
    root: f64,
    degenerate: bool,
    evaluations: usize,
}

/// Newton on `S` from the midpoint, with the bracket `S(lo) > 0 > S(hi)`
/// maintained; a step that leaves the bracket or fails to shrink `|S|` is
/// replaced by bisection.
fn solve_gap(
    plan: &SumPlan,
    sources: &SourceSet,
    cfg: &EvolveConfig,
    interval: usize,
    a: f64,
    b: f64,
    sep: f64,
) -> Result<GapRoot> {
    let width = b - a;
    if width < sep {
        return Err(Error::DegenerateGap { interval, width });
    }
    let mid = 0.5 * (a + b);
    if width < 10.0 * sep {
        return Ok(GapRoot {
            root: mid,
            degenerate: true,
            evaluations: 0,
        });
    }
    let (mut lo, mut hi) = (a, b);
    let mut r = mid;
    let mut last_abs = f64::INFINITY;
    let mut last_step = f64::INFINITY;
    let (mut best, mut best_abs) = (mid, f64::INFINITY);
    for it in 0..cfg.max_newton_iters {
        let done = |root| GapRoot {
            root,
            degenerate: false,
            evaluations: it + 1,
        };
        let (s, ds) = eval_pair(plan, sources, r)?;
        if s == 0.0 {
            return Ok(done(r));
        }
        let abs = s.abs();
        // a tiny Newton step that no longer shrinks |S| means the sum is at
        // its rounding floor
        if abs >= last_abs && last_step <= NOISE_STEP * width {
            return Ok(done(best));
        }
        if abs < best_abs {
            best = r;
            best_abs = abs;
        }
        if s > 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        let newton = r - s / ds;
        let newton_step = (newton - r).abs();
        if newton_step <= cfg.newton_tol * width || newton_step <= 2.0 * f64::EPSILON * r.abs() {
            let root = if newton > a && newton < b { newton } else { r };
            return Ok(done(root));
        }
        let accept = abs < last_abs && newton > lo && newton < hi;
        let next = if accept { newton } else { 0.5 * (lo + hi) };
        let step = (next - r).abs();
        (last_abs, last_step) = if accept { (abs, step) } else { (f64::INFINITY, f64::INFINITY) };
        if step <= cfg.newton_tol * width
            || step <= 2.0 * f64::EPSILON * r.abs()
            || hi - lo <= 2.0 * f64::EPSILON * r.abs()
        {
            return Ok(done(next));
        }
        r = next;
    }
    Err(Error::NoConvergence {
        interval,
        iterations: cfg.max_newton_iters,
    })
}

/// Roots of `p'` given the roots of `p`.
pub fn differentiate_once(roots: &RootSet, cfg: &EvolveConfig) -> Result<RootSet> {
    weighted_critical_points(&SourceSet::unit(roots.clone()), cfg)
}

/// Differentiates `k` times, keeping the input, every `snapshot_stride`-th
/// state, and the final state.
pub fn differentiate_many(roots: &RootSet, k: usize, cfg: &EvolveConfig) -> Result<Trajectory> {
    let stride = cfg.snapshot_stride.max(1);
    let mut snapshots = vec![(0, roots.clone())];
    let final_roots = differentiate_many_with(roots, k, cfg, |step, state| {
        if step % stride == 0 || step == k {
            snapshots.push((step, state.clone()));
        }
    })?;
    Ok(Trajectory {
        snapshots,
        final_roots,
    })
}

/// Differentiates `k` times, handing every intermediate state to `observe`.
pub fn differentiate_many_with<F>(
    roots: &RootSet,
    k: usize,
    cfg: &EvolveConfig,
    mut observe: F,
) -> Result<RootSet>
where
    F: FnMut(usize, &RootSet),
{
    let n = roots.len();
    if k == 0 || k >= n.max(1) {
        return Err(Error::InvalidArgument(format!(
            "derivative count {k} outside 1..={}",
            n.saturating_sub(1)
        )));
    }
    cfg.validate()?;
    let mut state = roots.clone();
    for step in 1..=k {
        state = differentiate_once(&state, cfg).map_err(|e| e.at_step(step))?;
        observe(step, &state);
    }
    Ok(state)
}
