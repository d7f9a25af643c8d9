//! Spectra of repeated codimension-one compressions `(I - P) A (I - P)`.
//!
//! With `P = vv^T` the surviving eigenvalues solve the secular equation
//! `sum_i w_i^2 / (z - lambda_i) = 0`, `w` the coordinates of `v` in the
//! eigenbasis. The all-ones direction gives equal weights, which is the
//! derivative of the characteristic polynomial; a uniformly random unit `v`
//! gives weights `g_i^2 / sum g_j^2` for standard Gaussians `g`.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cauchy::SourceSet;
use crate::error::{Error, Result};
use crate::evolve::{differentiate_once, weighted_critical_points, EvolveConfig};
use crate::poly::RootSet;
use crate::sampling::{Generator, RngStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMode {
    Deterministic,
    Random,
}

impl FromStr for ProjectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deterministic" => Ok(ProjectionMode::Deterministic),
            "random" => Ok(ProjectionMode::Random),
            other => Err(Error::Parse(format!(
                "unknown projection mode {other:?} (expected deterministic or random)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTrajectory {
    pub mode: ProjectionMode,
    pub snapshots: Vec<(usize, RootSet)>,
    pub seed: RngStream,
}

impl SpectrumTrajectory {
    pub fn final_spectrum(&self) -> &RootSet {
        &self.snapshots.last().expect("at least the initial spectrum").1
    }
}

// squared weights below this are redrawn
const MIN_WEIGHT: f64 = 1e-300;

/// Squared coordinates of a uniform random unit vector in `R^n`.
pub fn sphere_weights(n: usize, rng: &mut Generator) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..n).map(|_| rng.gaussian().powi(2)).collect();
        let total: f64 = g.iter().sum();
        let w: Vec<f64> = g.iter().map(|v| v / total).collect();
        if w.iter().all(|&v| v >= MIN_WEIGHT) {
            return w;
        }
        log::debug!("redrawing sphere weights with an underflowing coordinate");
    }
}

/// Eigenvalues after compressing away the direction with squared weights
/// `weights_sq`.
pub fn project_with_weights(eigs: &RootSet, weights_sq: Vec<f64>, cfg: &EvolveConfig) -> Result<RootSet> {
    let sources = SourceSet::weighted(eigs.clone(), weights_sq)?;
    weighted_critical_points(&sources, cfg)
}

pub fn project_once(
    eigs: &RootSet,
    mode: ProjectionMode,
    rng: &mut Generator,
    cfg: &EvolveConfig,
) -> Result<RootSet> {
    if eigs.len() < 2 {
        return Err(Error::InvalidArgument("projection needs at least 2 eigenvalues".into()));
    }
    match mode {
        ProjectionMode::Deterministic => differentiate_once(eigs, cfg),
        ProjectionMode::Random => {
            let w = sphere_weights(eigs.len(), rng);
            project_with_weights(eigs, w, cfg)
        }
    }
}

/// Applies `steps` projections, one fresh weight vector per random step,
/// keeping every `cfg.snapshot_stride`-th spectrum plus the first and last.
pub fn iterate_projections(
    eigs: &RootSet,
    steps: usize,
    mode: ProjectionMode,
    rng: RngStream,
    cfg: &EvolveConfig,
) -> Result<SpectrumTrajectory> {
    let n = eigs.len();
    if steps == 0 || steps >= n.max(1) {
        return Err(Error::InvalidArgument(format!(
            "step count {steps} outside 1..={}",
            n.saturating_sub(1)
        )));
    }
    cfg.validate()?;
    let stride = cfg.snapshot_stride;
    let mut g = rng.generator();
    let mut snapshots = vec![(0, eigs.clone())];
    let mut state = eigs.clone();
    for step in 1..=steps {
        state = project_once(&state, mode, &mut g, cfg).map_err(|e| e.at_step(step))?;
        if step % stride == 0 || step == steps {
            snapshots.push((step, state.clone()));
        }
    }
    Ok(SpectrumTrajectory {
        mode,
        snapshots,
        seed: rng,
    })
}

/// `outer_i < inner_i < outer_(i+1)` for every `i`.
pub fn strictly_interlaces(outer: &RootSet, inner: &RootSet) -> bool {
    let (x, r) = (outer.as_slice(), inner.as_slice());
    r.len() + 1 == x.len() && r.iter().enumerate().all(|(i, &v)| x[i] < v && v < x[i + 1])
}
