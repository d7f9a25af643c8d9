//! Checks of the limit theorems and identities, each producing a
//! serializable report.

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{differentiate_many, differentiate_many_with, EvolveConfig, Trajectory};
use crate::poly::{
    elementary_symmetric_all, hermite_eval, hermite_roots, scaled_derivative_coeffs, HermiteKind,
    RootSet,
};
use crate::sampling::{sample_roots, DistributionSpec, RngStream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermiteFitReport {
    pub gamma: f64,
    pub rms_error: f64,
    pub ell: usize,
    pub n: usize,
}

/// Aligns `sqrt(n) r_i + gamma` with the roots `y_i` of `He_ell`.
///
/// `gamma = mean(y_i - sqrt(n) r_i)` is the least-squares shift and
/// `rms_error = (1/ell) * sqrt(sum (sqrt(n) r_i + gamma - y_i)^2)`.
pub fn hermite_fit(final_roots: &RootSet, n: usize) -> Result<HermiteFitReport> {
    let ell = final_roots.len();
    if ell == 0 || n < ell {
        return Err(Error::InvalidArgument(format!(
            "hermite fit needs 1 <= ell <= n, got ell={ell}, n={n}"
        )));
    }
    let y = hermite_roots(ell);
    hermite_fit_against(final_roots, &y, n)
}

fn hermite_fit_against(r: &RootSet, y: &RootSet, n: usize) -> Result<HermiteFitReport> {
    let ell = r.len();
    if y.len() != ell {
        return Err(Error::InvalidArgument(format!(
            "{} roots against {} Hermite roots",
            ell,
            y.len()
        )));
    }
    let sn = (n as f64).sqrt();
    let gamma = y.iter().zip(r).map(|(yi, ri)| yi - sn * ri).sum::<f64>() / ell as f64;
    let ss: f64 = y
        .iter()
        .zip(r)
        .map(|(yi, ri)| (sn * ri + gamma - yi).powi(2))
        .sum();
    Ok(HermiteFitReport {
        gamma,
        rms_error: ss.sqrt() / ell as f64,
        ell,
        n,
    })
}

/// `sum_k (-1)^k e1^(m-2k) n^k / (k! (m-2k)! 2^k)`.
pub fn lemma_predicted(e1: f64, n: usize, m: usize) -> f64 {
    let nf = n as f64;
    let mut total = 0.0;
    for k in 0..=m / 2 {
        let mut term = e1.powi((m - 2 * k) as i32) * nf.powi(k as i32);
        for j in 1..=k {
            term /= 2.0 * j as f64;
        }
        for j in 1..=(m - 2 * k) {
            term /= j as f64;
        }
        total += if k % 2 == 0 { term } else { -term };
    }
    total
}

/// `e_m` minus its leading-order polynomial in `e_1` and `n`.
pub fn lemma_residual(roots: &RootSet, m: usize) -> Result<f64> {
    let n = roots.len();
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!("m={m} outside 1..={n}")));
    }
    let e = elementary_symmetric_all(roots, m).e;
    Ok(residual_from(&e, n, m))
}

fn residual_from(e: &[f64], n: usize, m: usize) -> f64 {
    if m == 1 {
        return 0.0;
    }
    e[m] - lemma_predicted(e[1], n, m)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub m: usize,
    pub n: usize,
    pub trials: usize,
    pub mean_abs_residual: f64,
    /// `mean_abs_residual / n^((m-1)/2)`.
    pub normalized_ratio: f64,
}

pub fn lemma_sweep(
    spec: &DistributionSpec,
    m: usize,
    n_grid: &[usize],
    trials: usize,
    rng: RngStream,
) -> Result<Vec<LemmaReport>> {
    lemma_sweep_multi(spec, &[m], n_grid, trials, rng)
}

/// Like [`lemma_sweep`] for several `m` at once; each sample is shared by
/// every `m`, so results for one `m` do not depend on which others are asked
/// for. Reports are ordered by `n`, then `m`.
pub fn lemma_sweep_multi(
    spec: &DistributionSpec,
    ms: &[usize],
    n_grid: &[usize],
    trials: usize,
    rng: RngStream,
) -> Result<Vec<LemmaReport>> {
    if trials < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 trials, got {trials}")));
    }
    let m_max = ms.iter().copied().max().unwrap_or(0);
    if ms.iter().any(|&m| m == 0) {
        return Err(Error::InvalidArgument("m must be at least 1".into()));
    }
    let mut out = Vec::new();
    for &n in n_grid {
        if n < m_max {
            return Err(Error::InvalidArgument(format!("n={n} smaller than m={m_max}")));
        }
        let cell = rng.substream(n as u64);
        let sums: Vec<Vec<f64>> = (0..trials)
            .into_par_iter()
            .map(|t| -> Result<Vec<f64>> {
                let roots = sample_roots(spec, n, cell.substream(t as u64))?;
                let e = elementary_symmetric_all(&roots, m_max).e;
                Ok(ms.iter().map(|&m| residual_from(&e, n, m).abs()).collect())
            })
            .collect::<Result<_>>()?;
        for (j, &m) in ms.iter().enumerate() {
            let mean_abs = sums.iter().map(|s| s[j]).sum::<f64>() / trials as f64;
            out.push(LemmaReport {
                m,
                n,
                trials,
                mean_abs_residual: mean_abs,
                normalized_ratio: mean_abs / (n as f64).powf((m as f64 - 1.0) / 2.0),
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    /// Largest `|mean(after) - mean(before)|` over consecutive states.
    pub mean_drift: f64,
    /// Largest drift divided by `1 + spread` of the earlier state.
    pub mean_drift_scaled: f64,
    /// Largest relative mismatch of `sum_{i<j}(x_i-x_j)^2 / (n^2 (n-1))`.
    pub pairwise_identity_rel_err: f64,
    pub steps_checked: usize,
    /// Pairs where the later state has a single root and the identity is
    /// undefined.
    pub identity_skipped: usize,
}

/// Folds consecutive states into a [`ConservationReport`].
#[derive(Clone, Debug, Default)]
pub struct ConservationTracker {
    report: ConservationReport,
    last: Option<(f64, f64, f64)>,
}

impl ConservationTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, roots: &RootSet) {
        let n = roots.len();
        let mean = roots.mean();
        let spread = roots.spread();
        let invariant = if n >= 2 {
            let nf = n as f64;
            roots.pairwise_square_sum() / (nf * nf * (nf - 1.0))
        } else {
            f64::NAN
        };
        if let Some((m0, s0, inv0)) = self.last {
            let r = &mut self.report;
            let drift = (mean - m0).abs();
            r.mean_drift = r.mean_drift.max(drift);
            r.mean_drift_scaled = r.mean_drift_scaled.max(drift / (1.0 + s0));
            if invariant.is_nan() || inv0.is_nan() {
                r.identity_skipped += 1;
            } else {
                let rel = (invariant - inv0).abs() / inv0.abs();
                r.pairwise_identity_rel_err = r.pairwise_identity_rel_err.max(rel);
            }
            r.steps_checked += 1;
        }
        self.last = Some((mean, spread, invariant));
    }

    pub fn report(&self) -> ConservationReport {
        self.report.clone()
    }
}

pub fn conservation_report(trajectory: &Trajectory) -> Result<ConservationReport> {
    if trajectory.snapshots.len() < 2 {
        return Err(Error::InvalidArgument("trajectory needs at least 2 snapshots".into()));
    }
    if trajectory.snapshots[0].1.len() < 2 {
        return Err(Error::InvalidArgument("initial state needs at least 2 roots".into()));
    }
    let mut t = ConservationTracker::new();
    for (_, s) in &trajectory.snapshots {
        t.push(s);
    }
    Ok(t.report())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropositionReport {
    pub n: usize,
    pub ell: usize,
    pub max_deviation: f64,
}

/// Max over the grid of `|d^ell/dy^ell (1 - y^2/n)^n - (-1)^ell H_ell(y) e^{-y^2}|`,
/// with the left side differentiated exactly on its expanded coefficients.
pub fn proposition_check(n: usize, ell: usize, y_grid: &[f64]) -> Result<PropositionReport> {
    if n < ell || n == 0 {
        return Err(Error::InvalidArgument(format!("need n >= ell, n >= 1; got n={n}, ell={ell}")));
    }
    let bound = (n as f64).sqrt();
    if let Some(y) = y_grid.iter().find(|y| !(y.abs() < bound)) {
        return Err(Error::InvalidArgument(format!("grid point {y} outside (-sqrt n, sqrt n)")));
    }
    // (1 - y^2/n)^n = sum_k c_k y^(2k),  c_k = (-1)^k C(n,k) / n^k
    let nf = n as f64;
    let mut poly = vec![0.0; 2 * n + 1];
    let mut c = 1.0;
    for k in 0..=n {
        if k > 0 {
            c *= -((n - k + 1) as f64) / (k as f64 * nf);
        }
        poly[2 * k] = c;
    }
    for _ in 0..ell {
        poly = poly
            .iter()
            .enumerate()
            .skip(1)
            .map(|(p, &a)| a * p as f64)
            .collect();
    }
    let sign = if ell % 2 == 0 { 1.0 } else { -1.0 };
    let max_deviation = y_grid
        .iter()
        .map(|&y| {
            let lhs = poly.iter().rev().fold(0.0, |acc, &a| acc * y + a);
            let rhs = sign * hermite_eval(HermiteKind::Physicists, ell, y) * (-y * y).exp();
            (lhs - rhs).abs()
        })
        .fold(0.0, f64::max);
    Ok(PropositionReport {
        n,
        ell,
        max_deviation,
    })
}

/// How the final `ell` roots of the `(n-ell)`-th derivative are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Repeated differentiation through the Cauchy-sum engine.
    Evolve,
    /// Scaled derivative coefficients and a dense real-root solve.
    Coeffs,
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "evolve" => Ok(Route::Evolve),
            "coeffs" => Ok(Route::Coeffs),
            other => Err(Error::Parse(format!("unknown route {other:?} (expected evolve or coeffs)"))),
        }
    }
}

/// Roots of `p^(n-ell)` for `p` with the given roots.
pub fn final_roots(roots: &RootSet, ell: usize, route: Route, cfg: &EvolveConfig) -> Result<RootSet> {
    let n = roots.len();
    if ell == 0 || ell > n {
        return Err(Error::InvalidArgument(format!("ell={ell} outside 1..={n}")));
    }
    if ell == n {
        return Ok(roots.clone());
    }
    match route {
        Route::Evolve => differentiate_many_with(roots, n - ell, cfg, |_, _| {}),
        Route::Coeffs => scaled_derivative_coeffs(roots, ell)?.real_roots(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub law: String,
    pub n: usize,
    pub ell: usize,
    pub route: Route,
    pub trials: Vec<HermiteFitReport>,
    pub gamma_mean: f64,
    /// Sample variance (divides by `trials - 1`).
    pub gamma_variance: f64,
    pub median_rms_error: f64,
}

/// Hermite fit of the final `ell` roots for `trials` independent samples.
pub fn theorem_sweep(
    spec: &DistributionSpec,
    n: usize,
    ell: usize,
    trials: usize,
    rng: RngStream,
    route: Route,
    cfg: &EvolveConfig,
) -> Result<TheoremReport> {
    if trials < 2 {
        return Err(Error::InvalidArgument("need at least 2 trials".into()));
    }
    let y = hermite_roots(ell);
    let fits: Vec<HermiteFitReport> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let roots = sample_roots(spec, n, rng.substream(t as u64))?;
            let r = final_roots(&roots, ell, route, cfg)?;
            hermite_fit_against(&r, &y, n)
        })
        .collect::<Result<_>>()?;
    let tf = trials as f64;
    let gamma_mean = fits.iter().map(|f| f.gamma).sum::<f64>() / tf;
    let gamma_variance = fits.iter().map(|f| (f.gamma - gamma_mean).powi(2)).sum::<f64>() / (tf - 1.0);
    let mut rms: Vec<f64> = fits.iter().map(|f| f.rms_error).collect();
    rms.sort_by(f64::total_cmp);
    let median_rms_error = if trials % 2 == 1 {
        rms[trials / 2]
    } else {
        0.5 * (rms[trials / 2 - 1] + rms[trials / 2])
    };
    Ok(TheoremReport {
        law: spec.law.to_string(),
        n,
        ell,
        route,
        trials: fits,
        gamma_mean,
        gamma_variance,
        median_rms_error,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermiteChainReport {
    pub n: usize,
    pub ell: usize,
    pub max_root_error: f64,
}

/// Differentiates the roots of `He_n` down to degree `n/2` and compares with
/// the roots of `He_(n/2)`.
pub fn hermite_chain(n: usize, cfg: &EvolveConfig) -> Result<HermiteChainReport> {
    if n < 2 {
        return Err(Error::InvalidArgument("hermite chain needs n >= 2".into()));
    }
    let ell = n / 2;
    let got = differentiate_many_with(&hermite_roots(n), n - ell, cfg, |_, _| {})?;
    let want = hermite_roots(ell);
    Ok(HermiteChainReport {
        n,
        ell,
        max_root_error: max_abs_diff(&got, &want),
    })
}

/// Largest `|a_i - b_i|` over sorted pairs.
pub fn max_abs_diff(a: &RootSet, b: &RootSet) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchorReport {
    pub n: usize,
    pub sample_mean: f64,
    pub final_root: f64,
    /// `|final_root - sample_mean| / max(1, spread)`.
    pub scaled_error: f64,
}

/// After `n - 1` derivatives the single remaining root is the sample mean.
pub fn mean_anchor(roots: &RootSet, cfg: &EvolveConfig) -> Result<AnchorReport> {
    let n = roots.len();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least 2 roots".into()));
    }
    let last = differentiate_many_with(roots, n - 1, cfg, |_, _| {})?;
    let sample_mean = roots.mean();
    let final_root = last.as_slice()[0];
    Ok(AnchorReport {
        n,
        sample_mean,
        final_root,
        scaled_error: (final_root - sample_mean).abs() / roots.spread().max(1.0),
    })
}

/// Conservation report for a `steps`-step run from `roots`.
pub fn conservation_run(roots: &RootSet, steps: usize, cfg: &EvolveConfig) -> Result<ConservationReport> {
    let mut t = ConservationTracker::new();
    t.push(roots);
    differentiate_many_with(roots, steps, cfg, |_, s| t.push(s))?;
    Ok(t.report())
}

/// Convenience for callers that want the snapshots as well.
pub fn trajectory_with_report(
    roots: &RootSet,
    steps: usize,
    cfg: &EvolveConfig,
) -> Result<(Trajectory, ConservationReport)> {
    let traj = differentiate_many(roots, steps, cfg)?;
    let rep = conservation_report(&traj)?;
    Ok((traj, rep))
}
