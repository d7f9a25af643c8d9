//! Fast evaluation of weighted Cauchy sums `S(r) = sum_i w_i / (r - x_i)`
//! and `S'(r)`.
//!
//! The source span is cut into `2^L` equal panels. A query sums its own panel
//! and the two neighbouring panels directly; everything farther away is read
//! off a Chebyshev interpolant stored per panel. Those interpolants are filled
//! by a one-dimensional interpolation-based multipole pass over a binary tree
//! of panels, so building a plan costs `O(n k)` for `k` nodes per panel.

mod cheb;

use cheb::ChebBasis;

use crate::error::{Error, Result};
use crate::poly::RootSet;

/// Positions with positive weights. `weights == None` means unit weights.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceSet {
    positions: RootSet,
    weights: Option<Vec<f64>>,
}

impl SourceSet {
    pub fn unit(positions: RootSet) -> Self {
        SourceSet {
            positions,
            weights: None,
        }
    }

    /// Weights must be finite and strictly positive. A constant weight vector
    /// is stored as unit weights: a common factor does not move the zeros of
    /// `S`, and this keeps the solve bitwise identical to the unweighted one.
    pub fn weighted(positions: RootSet, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != positions.len() {
            return Err(Error::InvalidArgument(format!(
                "{} weights for {} sources",
                weights.len(),
                positions.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "weight {} at index {i} is not positive",
                weights[i]
            )));
        }
        let constant = weights.windows(2).all(|w| w[0] == w[1]);
        Ok(SourceSet {
            positions,
            weights: if constant { None } else { Some(weights) },
        })
    }

    pub fn positions(&self) -> &RootSet {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn is_unit(&self) -> bool {
        self.weights.is_none()
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    pub fn total_weight(&self) -> f64 {
        self.weights
            .as_ref()
            .map_or(self.len() as f64, |w| w.iter().sum())
    }
}

/// Near/far decomposition of one [`SourceSet`], reusable for any number of
/// queries.
#[derive(Clone, Debug)]
pub struct SumPlan {
    epsilon: f64,
    n: usize,
    lo: f64,
    hi: f64,
    panel_width: f64,
    /// `starts[b]..starts[b+1]` are the sources in panel `b`.
    starts: Vec<usize>,
    /// Far-field values at the Chebyshev nodes of each panel, panel-major.
    far: Vec<f64>,
    basis: ChebBasis,
}

/// Neighbouring panels on each side summed directly.
pub const NEAR_RADIUS: usize = 1;

/// Nodes per panel for a target accuracy: `ceil(ln(1/eps)/ln 4) + 2`.
pub fn cheb_order_for(epsilon: f64) -> usize {
    ((1.0 / epsilon).ln() / 4f64.ln()).ceil() as usize + 2
}

impl SumPlan {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn cheb_order(&self) -> usize {
        self.basis.order()
    }

    pub fn near_radius(&self) -> usize {
        NEAR_RADIUS
    }

    pub fn panel_count(&self) -> usize {
        self.starts.len() - 1
    }

    pub fn panel_width(&self) -> f64 {
        self.panel_width
    }

    /// True when every query is summed directly (no far field).
    pub fn is_direct(&self) -> bool {
        self.far.is_empty()
    }

    /// Source index range of panel `b`.
    pub fn panel_sources(&self, b: usize) -> std::ops::Range<usize> {
        self.starts[b]..self.starts[b + 1]
    }

    fn panel_of(&self, r: f64) -> usize {
        let p = self.panel_count();
        let b = ((r - self.lo) / self.panel_width).floor();
        if b <= 0.0 {
            0
        } else {
            (b as usize).min(p - 1)
        }
    }
}

pub fn build_plan(sources: &SourceSet, epsilon: f64) -> Result<SumPlan> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon {epsilon} outside (0, 1)"
        )));
    }
    let n = sources.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty source set".into()));
    }
    let k = cheb_order_for(epsilon);
    let basis = ChebBasis::new(k);
    let x = sources.positions().as_slice();
    let lo = x[0];
    let hi = x[n - 1];
    let span = hi - lo;

    if n <= 4 * k || span <= 0.0 {
        return Ok(SumPlan {
            epsilon,
            n,
            lo,
            hi,
            panel_width: span.max(f64::MIN_POSITIVE),
            starts: vec![0, n],
            far: Vec::new(),
            basis,
        });
    }

    let levels = ((n as f64 / k as f64).log2().ceil() as u32).max(2);
    let panels = 1usize << levels;
    let panel_width = span / panels as f64;

    let mut starts = Vec::with_capacity(panels + 1);
    starts.push(0);
    let mut i = 0;
    for b in 1..panels {
        let edge = lo + b as f64 * panel_width;
        while i < n && x[i] < edge {
            i += 1;
        }
        starts.push(i);
    }
    starts.push(n);

    let mut plan = SumPlan {
        epsilon,
        n,
        lo,
        hi,
        panel_width,
        starts,
        far: Vec::new(),
        basis,
    };
    plan.far = far_field(&plan, sources, levels);
    Ok(plan)
}

/// Upward pass (anterpolate sources onto panel nodes, merge to parents),
/// interaction-list transfers at every level, downward pass to the leaves.
fn far_field(plan: &SumPlan, sources: &SourceSet, levels: u32) -> Vec<f64> {
    let basis = &plan.basis;
    let k = basis.order();
    let x = sources.positions().as_slice();
    let leaves = 1usize << levels;

    // child-to-parent interpolation: child_to_parent[c][j * k + m] = L_m(u_j^c)
    let mut child_to_parent = [vec![0.0; k * k], vec![0.0; k * k]];
    let mut row = vec![0.0; k];
    for (c, mat) in child_to_parent.iter_mut().enumerate() {
        let shift = if c == 0 { -1.0 } else { 1.0 };
        for j in 0..k {
            basis.lagrange(0.5 * (basis.nodes[j] + shift), &mut row);
            mat[j * k..(j + 1) * k].copy_from_slice(&row);
        }
    }
    // transfer kernels for box offsets -3, -2, 2, 3 (in half-widths: 2d)
    let offsets: [isize; 4] = [-3, -2, 2, 3];
    let transfer: Vec<Vec<f64>> = offsets
        .iter()
        .map(|&d| {
            let mut m = vec![0.0; k * k];
            for a in 0..k {
                for b in 0..k {
                    m[a * k + b] = 1.0 / (basis.nodes[a] - basis.nodes[b] - 2.0 * d as f64);
                }
            }
            m
        })
        .collect();

    // multipole[l][box * k + j]
    let mut multipole: Vec<Vec<f64>> = (0..=levels).map(|l| vec![0.0; (1 << l) * k]).collect();
    {
        let leaf = &mut multipole[levels as usize];
        let half = 0.5 * plan.panel_width;
        for b in 0..leaves {
            let centre = plan.lo + (b as f64 + 0.5) * plan.panel_width;
            let dst = &mut leaf[b * k..(b + 1) * k];
            for i in plan.panel_sources(b) {
                let w = sources.weight(i);
                basis.lagrange((x[i] - centre) / half, &mut row);
                for (d, l) in dst.iter_mut().zip(&row) {
                    *d += w * l;
                }
            }
        }
    }
    for l in (0..levels as usize).rev() {
        let (upper, lower) = multipole.split_at_mut(l + 1);
        let parent = &mut upper[l];
        let child = &lower[0];
        for b in 0..(1usize << l) {
            for (c, mat) in child_to_parent.iter().enumerate() {
                let src = &child[(2 * b + c) * k..(2 * b + c + 1) * k];
                let dst = &mut parent[b * k..(b + 1) * k];
                for j in 0..k {
                    let wj = src[j];
                    if wj == 0.0 {
                        continue;
                    }
                    for (d, t) in dst.iter_mut().zip(&mat[j * k..(j + 1) * k]) {
                        *d += wj * t;
                    }
                }
            }
        }
    }

    let mut local: Vec<Vec<f64>> = (0..=levels).map(|l| vec![0.0; (1 << l) * k]).collect();
    let span = plan.panel_width * leaves as f64;
    for l in 2..=levels as usize {
        let boxes = 1isize << l;
        let scale = 2.0 / (span / boxes as f64);
        if l > 2 {
            let (upper, lower) = local.split_at_mut(l);
            let parent = &upper[l - 1];
            let child = &mut lower[0];
            for b in 0..(boxes as usize / 2) {
                let src = &parent[b * k..(b + 1) * k];
                for (c, mat) in child_to_parent.iter().enumerate() {
                    let dst = &mut child[(2 * b + c) * k..(2 * b + c + 1) * k];
                    for (j, d) in dst.iter_mut().enumerate() {
                        *d += mat[j * k..(j + 1) * k]
                            .iter()
                            .zip(src)
                            .map(|(t, v)| t * v)
                            .sum::<f64>();
                    }
                }
            }
        }
        let mp = &multipole[l];
        let loc = &mut local[l];
        for b in 0..boxes {
            for (oi, &d) in offsets.iter().enumerate() {
                let s = b + d;
                if s < 0 || s >= boxes || (s >> 1) - (b >> 1) > 1 || (b >> 1) - (s >> 1) > 1 {
                    continue;
                }
                let src = &mp[s as usize * k..(s as usize + 1) * k];
                if src.iter().all(|&v| v == 0.0) {
                    continue;
                }
                let m = &transfer[oi];
                let dst = &mut loc[b as usize * k..(b as usize + 1) * k];
                for (a, out) in dst.iter_mut().enumerate() {
                    let acc: f64 = m[a * k..(a + 1) * k]
                        .iter()
                        .zip(src)
                        .map(|(t, v)| t * v)
                        .sum();
                    *out += scale * acc;
                }
            }
        }
    }
    local.pop().unwrap()
}

/// `(S(r), S'(r))` for one query.
pub fn eval_pair(plan: &SumPlan, sources: &SourceSet, r: f64) -> Result<(f64, f64)> {
    if sources.len() != plan.n {
        return Err(Error::InvalidArgument(format!(
            "plan built for {} sources, given {}",
            plan.n,
            sources.len()
        )));
    }
    if !r.is_finite() {
        return Err(Error::InvalidArgument(format!("query {r} is not finite")));
    }
    let x = sources.positions().as_slice();
    if plan.is_direct() || r < plan.lo || r > plan.hi {
        return direct_range(sources, x, 0..plan.n, r);
    }
    let b = plan.panel_of(r);
    let p = plan.panel_count();
    let first = b.saturating_sub(NEAR_RADIUS);
    let last = (b + NEAR_RADIUS).min(p - 1);
    let (near_s, near_ds) = direct_range(sources, x, plan.starts[first]..plan.starts[last + 1], r)?;

    let k = plan.cheb_order();
    let half = 0.5 * plan.panel_width;
    let centre = plan.lo + (b as f64 + 0.5) * plan.panel_width;
    let u = ((r - centre) / half).clamp(-1.0, 1.0);
    let (fs, fds) = plan
        .basis
        .eval_with_derivative(&plan.far[b * k..(b + 1) * k], u);
    Ok((near_s + fs, near_ds + fds / half))
}

fn direct_range(
    sources: &SourceSet,
    x: &[f64],
    range: std::ops::Range<usize>,
    r: f64,
) -> Result<(f64, f64)> {
    let mut s = 0.0;
    let mut ds = 0.0;
    match &sources.weights {
        None => {
            for i in range {
                let d = r - x[i];
                if d == 0.0 {
                    return Err(Error::Collision { query: r, index: i });
                }
                let t = 1.0 / d;
                s += t;
                ds -= t * t;
            }
        }
        Some(w) => {
            for i in range {
                let d = r - x[i];
                if d == 0.0 {
                    return Err(Error::Collision { query: r, index: i });
                }
                let t = 1.0 / d;
                s += w[i] * t;
                ds -= w[i] * t * t;
            }
        }
    }
    Ok((s, ds))
}

/// Maps [`eval_pair`] over the queries; the first failing index is reported.
pub fn eval_batch(plan: &SumPlan, sources: &SourceSet, queries: &[f64]) -> Result<Vec<(f64, f64)>> {
    queries
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            eval_pair(plan, sources, r).map_err(|e| match e {
                Error::Collision { query, index } => Error::InvalidArgument(format!(
                    "query #{i} ({query}) coincides with source {index}"
                )),
                other => other,
            })
        })
        .collect()
}
