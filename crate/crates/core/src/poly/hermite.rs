use super::{tridiag, HermiteKind, RootSet};

/// `He_ell(x)` or `H_ell(x)` by three-term recurrence.
///
/// Overflows to infinity for large `ell` and `|x|`; use
/// [`hermite_step_ratio`] when only the Newton ratio is needed.
pub fn hermite_eval(kind: HermiteKind, ell: usize, x: f64) -> f64 {
    let (scale, k_factor) = match kind {
        HermiteKind::Probabilists => (1.0, 1.0),
        HermiteKind::Physicists => (2.0, 2.0),
    };
    let mut prev = 1.0;
    if ell == 0 {
        return prev;
    }
    let mut cur = scale * x;
    for k in 1..ell {
        let next = scale * x * cur - k_factor * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Newton step `He_ell(x) / He_ell'(x)` for `ell >= 1`, computed through the
/// orthonormal recurrence with rescaling so that it never overflows.
pub fn hermite_step_ratio(ell: usize, x: f64) -> f64 {
    assert!(ell >= 1);
    // psi_k = He_k / sqrt(k!)
    let mut prev = 1.0_f64;
    let mut cur = x;
    for k in 1..ell {
        let kf = k as f64;
        let next = (x * cur - kf.sqrt() * prev) / (kf + 1.0).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > 1e150 {
            prev *= 1e-150;
            cur *= 1e-150;
        }
    }
    // He_ell' = ell He_(ell-1)  =>  ratio = psi_ell / (sqrt(ell) psi_(ell-1))
    cur / ((ell as f64).sqrt() * prev)
}

/// The `ell` roots of `He_ell`, ascending.
///
/// Eigenvalues of the Jacobi matrix (zero diagonal, off-diagonal `sqrt(k)`),
/// then Newton-polished and symmetrized about zero.
pub fn hermite_roots(ell: usize) -> RootSet {
    if ell == 0 {
        return RootSet::empty();
    }
    let mut diag = vec![0.0; ell];
    let off: Vec<f64> = (1..ell).map(|k| (k as f64).sqrt()).collect();
    tridiag::ql_implicit(&mut diag, &off).expect("Jacobi matrix QL iteration");
    diag.sort_by(f64::total_cmp);

    for x in diag.iter_mut() {
        for _ in 0..8 {
            let step = hermite_step_ratio(ell, *x);
            if !step.is_finite() {
                break;
            }
            *x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
    }

    let mut roots = vec![0.0; ell];
    for i in 0..ell / 2 {
        let j = ell - 1 - i;
        let m = 0.5 * (diag[j] - diag[i]);
        roots[i] = -m;
        roots[j] = m;
    }
    RootSet::new(roots).expect("Hermite roots are simple")
}

/// `sum_k C(ell,k) a^(ell-k) He_k(b)`, which equals `He_ell(a + b)`.
pub fn hermite_addition_eval(ell: usize, a: f64, b: f64) -> f64 {
    let mut binom = 1.0;
    let mut total = 0.0;
    for k in 0..=ell {
        if k > 0 {
            binom *= (ell - k + 1) as f64 / k as f64;
        }
        let apow = if ell - k == 0 { 1.0 } else { a.powi((ell - k) as i32) };
        total += binom * apow * hermite_eval(HermiteKind::Probabilists, k, b);
    }
    total
}
