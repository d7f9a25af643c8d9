//! Real roots of a real-rooted polynomial from its coefficients.

use super::xsum::Dd;
use super::RootSet;
use crate::error::{Error, Result};

pub(crate) fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc.mul_add(x, c))
}

/// Horner in double-double; the result is accurate to about working
/// precision even near clustered roots.
fn horner_compensated(coeffs: &[f64], x: f64) -> f64 {
    coeffs
        .iter()
        .fold(Dd::ZERO, |acc, &c| acc.mul_f64(x).add_f64(c))
        .to_f64()
}

fn derivative(coeffs: &[f64]) -> Vec<f64> {
    let d = coeffs.len() - 1;
    coeffs[..d]
        .iter()
        .enumerate()
        .map(|(k, &c)| c * (d - k) as f64)
        .collect()
}

fn bisect_newton(p: &[f64], dp: &[f64], mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = horner_compensated(p, lo);
    if flo == 0.0 {
        return lo;
    }
    let fhi = horner_compensated(p, hi);
    if fhi == 0.0 {
        return hi;
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..400 {
        let fx = horner_compensated(p, x);
        if fx == 0.0 {
            return x;
        }
        if (fx > 0.0) == (flo > 0.0) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        let slope = horner(dp, x);
        let cand = x - fx / slope;
        let next = if cand > lo && cand < hi { cand } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 2.0 * f64::EPSILON * x.abs() || hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            return next;
        }
        x = next;
    }
    x
}

/// `coeffs` are descending with a nonzero leading coefficient.
pub(crate) fn real_roots_by_derivative_chain(coeffs: &[f64]) -> Result<RootSet> {
    let d = coeffs.len().saturating_sub(1);
    if d == 0 {
        return Ok(RootSet::empty());
    }
    if coeffs[0] == 0.0 {
        return Err(Error::InvalidArgument("leading coefficient is zero".into()));
    }
    let mut chain = vec![coeffs.to_vec()];
    for _ in 1..d {
        let next = derivative(chain.last().unwrap());
        chain.push(next);
    }
    // chain[j] is the j-th derivative; chain[d-1] is linear
    let lin = &chain[d - 1];
    let mut roots = vec![-lin[1] / lin[0]];
    for j in (0..d - 1).rev() {
        let p = &chain[j];
        let dp = &chain[j + 1];
        let bound = 1.0 + p[1..].iter().map(|c| (c / p[0]).abs()).fold(0.0, f64::max);
        let mut edges = Vec::with_capacity(roots.len() + 2);
        edges.push(-bound);
        edges.extend_from_slice(&roots);
        edges.push(bound);
        roots = edges
            .windows(2)
            .map(|w| bisect_newton(p, dp, w[0], w[1]))
            .collect();
    }
    RootSet::new(roots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_with_known_roots() {
        // (x+2)(x-0.5)(x-3) = x^3 - 1.5x^2 - 5.5x + 3
        let r = real_roots_by_derivative_chain(&[1.0, -1.5, -5.5, 3.0]).unwrap();
        let want = [-2.0, 0.5, 3.0];
        for (a, b) in r.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn wilkinson_like_degree_ten() {
        let want: Vec<f64> = (1..=10).map(|k| k as f64 * 0.3 - 1.0).collect();
        let set = RootSet::new(want.clone()).unwrap();
        let coeffs = crate::poly::MonicPoly::from_roots(&set).descending_coeffs();
        let got = real_roots_by_derivative_chain(&coeffs).unwrap();
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn linear_and_constant() {
        assert_eq!(real_roots_by_derivative_chain(&[2.0, -1.0]).unwrap().as_slice(), &[0.5]);
        assert!(real_roots_by_derivative_chain(&[1.0]).unwrap().is_empty());
    }
}
