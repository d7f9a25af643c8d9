use super::xsum::{self, Dd};
use super::{EsymTable, MonicPoly, RootSet};
use crate::error::{Error, Result};

/// `e_0..=e_k_max` of the roots.
///
/// Roots are folded in one at a time with `e_k <- e_k + x e_{k-1}`, carried in
/// double-double so that the heavy cancellation of centred samples (where
/// `e_k` is far smaller than the sum of its terms) does not eat the result.
pub fn elementary_symmetric_all(roots: &RootSet, k_max: usize) -> EsymTable {
    let n = roots.len();
    let top = k_max.min(n);
    let mut acc = vec![Dd::ZERO; top + 1];
    acc[0] = Dd::ONE;
    for (j, &x) in roots.iter().enumerate() {
        let hi = (j + 1).min(top);
        for k in (1..=hi).rev() {
            acc[k] = acc[k].add(acc[k - 1].mul_f64(x));
        }
    }
    let mut e: Vec<f64> = acc.into_iter().map(Dd::to_f64).collect();
    e.resize(k_max + 1, 0.0);
    EsymTable { e, k_max, n }
}

/// `x_1^k + ... + x_n^k` with compensated summation.
pub fn power_sum(roots: &RootSet, k: u32) -> f64 {
    xsum::sum(roots.iter().map(|&x| x.powi(k as i32)))
}

/// Power sums `q_1..=q_m_max` of the roots of `poly`, by Newton's identities
/// `q_m = sum_{i<m} (-1)^(i-1) f_i q_(m-i) + (-1)^(m-1) m f_m`.
pub fn power_sums_from_esym(poly: &MonicPoly, m_max: usize) -> Vec<f64> {
    let deg = poly.degree();
    let f = |i: usize| if i <= deg { poly.f[i] } else { 0.0 };
    let mut q: Vec<Dd> = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        let mut acc = Dd::ZERO;
        for i in 1..m {
            let t = q[m - i - 1].mul_f64(if i % 2 == 1 { f(i) } else { -f(i) });
            acc = acc.add(t);
        }
        let last = m as f64 * f(m);
        acc = if m % 2 == 1 { acc.add_f64(last) } else { acc.add_f64(-last) };
        q.push(acc);
    }
    q.into_iter().map(Dd::to_f64).collect()
}

/// Monic normalization `(l!/n!) p^(n-l)` of the `(n-l)`-th derivative of the
/// polynomial with the given roots: `f_k = e_k * prod_{j<k} (l-j)/(n-j)`.
pub fn scaled_derivative_coeffs(roots: &RootSet, ell: usize) -> Result<MonicPoly> {
    let n = roots.len();
    if ell == 0 || ell > n {
        return Err(Error::InvalidArgument(format!(
            "derivative degree {ell} outside 1..={n}"
        )));
    }
    let table = elementary_symmetric_all(roots, ell);
    let mut f = Vec::with_capacity(ell + 1);
    let mut ratio = 1.0;
    for k in 0..=ell {
        if k > 0 {
            ratio *= (ell - k + 1) as f64 / (n - k + 1) as f64;
        }
        f.push(table.e[k] * ratio);
    }
    Ok(MonicPoly { f })
}
