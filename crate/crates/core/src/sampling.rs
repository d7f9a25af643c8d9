//! I.i.d. root samples from the initial laws, and affine normalization.
//!
//! Random bits come from ChaCha8 keyed by a 64-bit seed, with the stream id
//! selecting one of 2^64 independent streams. Uniforms on (0, 1) take the top
//! 53 bits of each 64-bit word: `((w >> 11) + 0.5) / 2^53`. Gaussians use the
//! Marsaglia polar method; every other law is drawn by inverting its CDF.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::RootSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    /// Uniform on `[-sqrt 3, sqrt 3]`.
    UniformSym,
    GaussianStd,
    /// Density `(9 sqrt 3 / (10 sqrt 5)) x^2` on `[-sqrt(5/3), sqrt(5/3)]`.
    Parabolic,
    /// Mass 1/3 uniform on `[-2, -1]`, 2/3 uniform on `[1, 2]`; mean 1/2.
    Gap,
    /// Wigner semicircle of radius 2 (variance 1).
    SemicircleRef,
}

impl Law {
    pub const ALL: [Law; 5] = [
        Law::UniformSym,
        Law::GaussianStd,
        Law::Parabolic,
        Law::Gap,
        Law::SemicircleRef,
    ];

    pub fn mean(self) -> f64 {
        match self {
            Law::Gap => 0.5,
            _ => 0.0,
        }
    }

    pub fn variance(self) -> f64 {
        match self {
            // E x^2 = (1/3)(7/3) + (2/3)(7/3) = 7/3
            Law::Gap => 7.0 / 3.0 - 0.25,
            _ => 1.0,
        }
    }

    pub fn cdf(self, x: f64) -> f64 {
        match self {
            Law::UniformSym => {
                let a = 3f64.sqrt();
                ((x + a) / (2.0 * a)).clamp(0.0, 1.0)
            }
            Law::GaussianStd => normal_cdf(x),
            Law::Parabolic => {
                let a = (5.0f64 / 3.0).sqrt();
                let xc = x.clamp(-a, a);
                0.5 + PARABOLIC_CUBE * xc.powi(3)
            }
            Law::Gap => {
                if x <= -2.0 {
                    0.0
                } else if x <= -1.0 {
                    (x + 2.0) / 3.0
                } else if x <= 1.0 {
                    1.0 / 3.0
                } else if x <= 2.0 {
                    1.0 / 3.0 + 2.0 * (x - 1.0) / 3.0
                } else {
                    1.0
                }
            }
            Law::SemicircleRef => semicircle_cdf(x, 2.0),
        }
    }

    /// `F^{-1}(u)` for `u` in (0, 1). The Gaussian quantile is solved
    /// numerically; sampling uses the polar method instead.
    pub fn quantile(self, u: f64) -> f64 {
        match self {
            Law::UniformSym => 3f64.sqrt() * (2.0 * u - 1.0),
            Law::GaussianStd => normal_quantile(u),
            Law::Parabolic => ((u - 0.5) / PARABOLIC_CUBE).cbrt(),
            Law::Gap => {
                if u < 1.0 / 3.0 {
                    -2.0 + 3.0 * u
                } else {
                    1.0 + 1.5 * (u - 1.0 / 3.0)
                }
            }
            Law::SemicircleRef => semicircle_quantile(u, 2.0),
        }
    }
}

// F(x) = 1/2 + (3 sqrt 3 / (10 sqrt 5)) x^3 for the parabolic law
const PARABOLIC_CUBE: f64 = 0.232_379_000_772_445;

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Law::UniformSym => "uniform",
            Law::GaussianStd => "gaussian",
            Law::Parabolic => "parabolic",
            Law::Gap => "gap",
            Law::SemicircleRef => "semicircle",
        })
    }
}

impl FromStr for Law {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Law::UniformSym),
            "gaussian" => Ok(Law::GaussianStd),
            "parabolic" => Ok(Law::Parabolic),
            "gap" => Ok(Law::Gap),
            "semicircle" => Ok(Law::SemicircleRef),
            other => Err(Error::Parse(format!(
                "unknown distribution {other:?} (expected uniform, gaussian, parabolic, gap or semicircle)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub law: Law,
    /// Relative size (times the spread) of the nudge applied to values that
    /// land closer than the minimum separation. Zero means the smallest
    /// admissible nudge.
    pub jitter: f64,
}

impl DistributionSpec {
    pub fn new(law: Law) -> Self {
        DistributionSpec { law, jitter: 0.0 }
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse().map(DistributionSpec::new)
    }
}

/// Identifies one reproducible random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    /// A sibling stream for a sub-task, e.g. trial `i` of a sweep.
    pub fn substream(self, index: u64) -> Self {
        RngStream {
            seed: self.seed,
            stream: self
                .stream
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add(index.wrapping_add(1)),
        }
    }

    pub fn generator(self) -> Generator {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        Generator { rng, spare: None }
    }
}

/// Draws uniforms and Gaussians from one stream.
pub struct Generator {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Generator {
    /// Uniform on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal by the Marsaglia polar method.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let m = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * m);
                return u * m;
            }
        }
    }

    pub fn draw(&mut self, law: Law) -> f64 {
        match law {
            Law::GaussianStd => self.gaussian(),
            other => other.quantile(self.uniform()),
        }
    }
}

/// `n` i.i.d. draws, sorted.
pub fn sample_roots(spec: &DistributionSpec, n: usize, rng: RngStream) -> Result<RootSet> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    let mut g = rng.generator();
    let mut v: Vec<f64> = (0..n).map(|_| g.draw(spec.law)).collect();
    v.sort_by(f64::total_cmp);
    separate(&mut v, spec.jitter);
    RootSet::new(v)
}

/// Pushes apart values closer than the minimum separation, left to right.
fn separate(v: &mut [f64], jitter: f64) {
    if v.len() < 2 {
        return;
    }
    let spread = v[v.len() - 1] - v[0];
    let sep = crate::poly::SEPARATION_FACTOR * spread;
    let nudge = (jitter * spread).max(2.0 * sep);
    let mut moved = 0usize;
    for i in 1..v.len() {
        if v[i] - v[i - 1] < sep {
            v[i] = v[i - 1] + nudge;
            moved += 1;
        }
    }
    if moved > 0 {
        log::warn!("separated {moved} colliding sample values");
    }
}

/// Maps roots to `(x - shift) / scale` with population mean 0 and variance 1.
pub fn normalize_affine(roots: &RootSet) -> Result<(RootSet, f64, f64)> {
    if roots.len() < 2 {
        return Err(Error::InvalidArgument("normalization needs at least 2 roots".into()));
    }
    let shift = roots.mean();
    let scale = roots.variance().sqrt();
    if !(scale > 0.0) {
        return Err(Error::Degenerate("zero sample variance".into()));
    }
    let v: Vec<f64> = roots.deviations().into_iter().map(|d| d / scale).collect();
    Ok((RootSet::new(v)?, shift, scale))
}

pub fn semicircle_cdf(x: f64, radius: f64) -> f64 {
    if x <= -radius {
        return 0.0;
    }
    if x >= radius {
        return 1.0;
    }
    let t = x / radius;
    0.5 + (t * (1.0 - t * t).sqrt() + t.asin()) / PI
}

fn semicircle_quantile(u: f64, radius: f64) -> f64 {
    // x = R sin(phi/2) with phi + sin(phi) = 2 pi (u - 1/2), phi in [-pi, pi]
    let c = 2.0 * PI * (u - 0.5);
    let (mut lo, mut hi) = (-PI, PI);
    let mut phi = c / 2.0;
    for _ in 0..100 {
        let f = phi + phi.sin() - c;
        if f > 0.0 {
            hi = phi;
        } else {
            lo = phi;
        }
        let d = 1.0 + phi.cos();
        let next = phi - f / d;
        let next = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if (next - phi).abs() <= 1e-16 * PI || hi - lo <= 1e-15 {
            phi = next;
            break;
        }
        phi = next;
    }
    radius * (0.5 * phi).sin()
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Complementary error function: Taylor series of erf below 2, Lentz
/// continued fraction above. Absolute error below 1e-15.
fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 2.0 {
        // erf series: 2/sqrt(pi) * sum (-1)^k x^(2k+1) / (k! (2k+1))
        let mut term = x;
        let mut sum = x;
        let x2 = x * x;
        for k in 1..200 {
            term *= -x2 / k as f64;
            let add = term / (2 * k + 1) as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        return 1.0 - 2.0 / PI.sqrt() * sum;
    }
    // Lentz continued fraction for erfc
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64 / 2.0;
        d = x + a * d;
        d = if d.abs() < tiny { tiny } else { d };
        c = x + a / c;
        c = if c.abs() < tiny { tiny } else { c };
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (f * PI.sqrt())
}

fn normal_quantile(u: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    let mut x = 0.0;
    for _ in 0..200 {
        let f = normal_cdf(x) - u;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let pdf = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        let next = x - f / pdf;
        let next = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 1e-15 * x.abs().max(1.0) {
            return next;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(r: &RootSet) -> (f64, f64) {
        (r.mean(), r.variance())
    }

    #[test]
    fn parse_names() {
        for law in Law::ALL {
            assert_eq!(law.to_string().parse::<Law>().unwrap(), law);
        }
        assert!("cauchy".parse::<Law>().is_err());
    }

    #[test]
    fn uniform_moments() {
        let r = sample_roots(&DistributionSpec::new(Law::UniformSym), 100_000, RngStream::new(1, 0)).unwrap();
        let (m, v) = moments(&r);
        assert!(m.abs() < 0.02 && (v - 1.0).abs() < 0.02, "{m} {v}");
    }

    #[test]
    fn gap_mean() {
        let r = sample_roots(&DistributionSpec::new(Law::Gap), 100_000, RngStream::new(2, 0)).unwrap();
        assert!((r.mean() - 0.5).abs() < 0.02);
        assert!(r.iter().all(|&x| (1.0..=2.0).contains(&x.abs())));
    }

    #[test]
    fn parabolic_variance() {
        let r = sample_roots(&DistributionSpec::new(Law::Parabolic), 100_000, RngStream::new(3, 0)).unwrap();
        assert!((r.variance() - 1.0).abs() < 0.02);
    }

    #[test]
    fn deterministic_per_stream() {
        let spec = DistributionSpec::new(Law::GaussianStd);
        let a = sample_roots(&spec, 1000, RngStream::new(9, 4)).unwrap();
        let b = sample_roots(&spec, 1000, RngStream::new(9, 4)).unwrap();
        let c = sample_roots(&spec, 1000, RngStream::new(9, 5)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn quantile_round_trip() {
        for law in [Law::UniformSym, Law::Parabolic, Law::Gap, Law::SemicircleRef, Law::GaussianStd] {
            for i in 1..1000 {
                let u = i as f64 / 1000.0;
                let back = law.cdf(law.quantile(u));
                assert!((back - u).abs() < 1e-12, "{law}: u={u} back={back}");
            }
        }
    }

    #[test]
    fn parabolic_constant() {
        let want = 3.0 * 3f64.sqrt() / (10.0 * 5f64.sqrt());
        assert!((PARABOLIC_CUBE - want).abs() < 1e-16);
        let a = (5.0f64 / 3.0).sqrt();
        assert!((Law::Parabolic.cdf(a) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn normal_cdf_reference_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((normal_cdf(-3.0) - 0.001_349_898_031_630_094_6).abs() < 1e-17);
        assert!((normal_cdf(2.5) - 0.993_790_334_674_223_7).abs() < 1e-15);
    }

    #[test]
    fn normalize_examples() {
        let (r, shift, scale) = normalize_affine(&RootSet::new(vec![-1.0, 1.0]).unwrap()).unwrap();
        assert_eq!((r.as_slice(), shift, scale), (&[-1.0, 1.0][..], 0.0, 1.0));
        let (r, shift, scale) = normalize_affine(&RootSet::new(vec![0.0, 2.0]).unwrap()).unwrap();
        assert_eq!((r.as_slice(), shift, scale), (&[-1.0, 1.0][..], 1.0, 1.0));
        let (r, shift, scale) = normalize_affine(&RootSet::new(vec![1.0, 2.0, 3.0]).unwrap()).unwrap();
        let c = 1.5f64.sqrt();
        assert_eq!(shift, 2.0);
        assert!((scale - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((r.as_slice()[0] + c).abs() < 1e-15 && r.as_slice()[1] == 0.0);
        assert!(normalize_affine(&RootSet::new(vec![1.0]).unwrap()).is_err());
    }

    #[test]
    fn separation_nudges_collisions() {
        let mut v = vec![0.0, 0.0, 1.0];
        separate(&mut v, 0.0);
        assert!(RootSet::new(v).is_ok());
    }
}
