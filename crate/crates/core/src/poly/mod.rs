//! Polynomial primitives on real root sets: elementary symmetric polynomials,
//! power sums, the scaled coefficients of high derivatives, and Hermite
//! polynomials of both normalizations.

mod dense;
mod esym;
mod hermite;
mod tridiag;
pub(crate) mod xsum;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use esym::{
    elementary_symmetric_all, power_sum, power_sums_from_esym, scaled_derivative_coeffs,
};
pub use hermite::{hermite_addition_eval, hermite_eval, hermite_roots, hermite_step_ratio};
pub use tridiag::symmetric_tridiagonal_eigenvalues;

/// Relative minimum gap between consecutive roots, measured against the spread.
pub const SEPARATION_FACTOR: f64 = 1e-13;

/// Sorted, strictly increasing, finite real roots of a monic polynomial.
///
/// Consecutive roots are at least `SEPARATION_FACTOR * spread` apart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RootSet {
    roots: Vec<f64>,
}

impl RootSet {
    pub fn new(roots: Vec<f64>) -> Result<Self> {
        if let Some(i) = roots.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidRoots(format!(
                "non-finite value {} at index {i}",
                roots[i]
            )));
        }
        if let Some(i) = roots.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::InvalidRoots(format!(
                "not strictly increasing at index {i}: {} >= {}",
                roots[i],
                roots[i + 1]
            )));
        }
        let set = RootSet { roots };
        let sep = set.min_separation();
        if let Some(i) = set.roots.windows(2).position(|w| w[1] - w[0] < sep) {
            return Err(Error::InvalidRoots(format!(
                "gap {:e} at index {i} below minimum separation {sep:e}",
                set.roots[i + 1] - set.roots[i]
            )));
        }
        Ok(set)
    }

    /// Sorts the values first; duplicates are still rejected.
    pub fn from_unsorted(mut roots: Vec<f64>) -> Result<Self> {
        if roots.iter().any(|x| x.is_nan()) {
            return Err(Error::InvalidRoots("NaN value".into()));
        }
        roots.sort_by(f64::total_cmp);
        Self::new(roots)
    }

    pub fn empty() -> Self {
        RootSet { roots: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.roots
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.roots
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.roots.iter()
    }

    pub fn min(&self) -> Option<f64> {
        self.roots.first().copied()
    }

    pub fn max(&self) -> Option<f64> {
        self.roots.last().copied()
    }

    /// `max - min`, zero for fewer than two roots.
    pub fn spread(&self) -> f64 {
        match (self.min(), self.max()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    pub fn min_separation(&self) -> f64 {
        SEPARATION_FACTOR * self.spread()
    }

    pub fn mean(&self) -> f64 {
        self.mean_dd().to_f64()
    }

    fn mean_dd(&self) -> xsum::Dd {
        if self.roots.is_empty() {
            return xsum::Dd::ZERO;
        }
        self.roots
            .iter()
            .fold(xsum::Dd::ZERO, |acc, &x| acc.add_f64(x))
            .div_f64(self.roots.len() as f64)
    }

    /// `x_i - mean`, with the mean carried in double-double so the result
    /// sums to zero up to rounding of the outputs.
    pub fn deviations(&self) -> Vec<f64> {
        let m = self.mean_dd();
        self.roots.iter().map(|&x| (x - m.hi) - m.lo).collect()
    }

    /// Population variance (divides by n).
    pub fn variance(&self) -> f64 {
        if self.roots.is_empty() {
            return 0.0;
        }
        xsum::sum(self.deviations().into_iter().map(|d| d * d)) / self.roots.len() as f64
    }

    /// `sum_{i<j} (x_i - x_j)^2`, computed as `n * sum (x_i - mean)^2`.
    pub fn pairwise_square_sum(&self) -> f64 {
        self.variance() * (self.roots.len() as f64).powi(2)
    }
}

impl TryFrom<Vec<f64>> for RootSet {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        RootSet::new(v)
    }
}

impl From<RootSet> for Vec<f64> {
    fn from(r: RootSet) -> Self {
        r.roots
    }
}

impl<'a> IntoIterator for &'a RootSet {
    type Item = &'a f64;
    type IntoIter = std::slice::Iter<'a, f64>;

    fn into_iter(self) -> Self::IntoIter {
        self.roots.iter()
    }
}

/// Elementary symmetric polynomials `e_0..=e_k_max` of `n` values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EsymTable {
    pub e: Vec<f64>,
    pub k_max: usize,
    pub n: usize,
}

impl EsymTable {
    /// `e_k`, zero beyond `n`. Panics if `k > k_max`.
    pub fn get(&self, k: usize) -> f64 {
        self.e[k]
    }
}

/// The monic degree-`degree` polynomial `sum_k (-1)^k f_k x^(degree-k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonicPoly {
    pub f: Vec<f64>,
}

impl MonicPoly {
    pub fn new(f: Vec<f64>) -> Result<Self> {
        if f.first() != Some(&1.0) {
            return Err(Error::InvalidArgument(
                "monic polynomial needs f_0 = 1".into(),
            ));
        }
        Ok(MonicPoly { f })
    }

    /// Expands `prod (x - r_i)`.
    pub fn from_roots(roots: &RootSet) -> Self {
        let t = elementary_symmetric_all(roots, roots.len());
        MonicPoly { f: t.e }
    }

    pub fn degree(&self) -> usize {
        self.f.len() - 1
    }

    /// Coefficients in descending powers of x, leading 1 first.
    pub fn descending_coeffs(&self) -> Vec<f64> {
        self.f
            .iter()
            .enumerate()
            .map(|(k, &fk)| if k % 2 == 0 { fk } else { -fk })
            .collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        dense::horner(&self.descending_coeffs(), x)
    }

    /// All real roots, assuming they are real and simple.
    ///
    /// Works down the derivative chain: the roots of each derivative bracket
    /// the roots of the one before it, and each bracket is solved by
    /// safeguarded Newton on the coefficients.
    pub fn real_roots(&self) -> Result<RootSet> {
        dense::real_roots_by_derivative_chain(&self.descending_coeffs())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HermiteKind {
    /// `He`, orthogonal for `exp(-x^2/2)`; `He_2 = x^2 - 1`.
    Probabilists,
    /// `H`, orthogonal for `exp(-x^2)`; `H_2 = 4x^2 - 2`.
    Physicists,
}
