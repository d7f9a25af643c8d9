use proptest::prelude::*;

use rootflow::cauchy::{build_plan, eval_pair, SourceSet};
use rootflow::evolve::{differentiate_once, weighted_critical_points, EvolveConfig};
use rootflow::poly::{
    elementary_symmetric_all, hermite_roots, power_sum, power_sums_from_esym, scaled_derivative_coeffs,
};
use rootflow::projections::{iterate_projections, project_once, strictly_interlaces, ProjectionMode};
use rootflow::report::histogram;
use rootflow::sampling::{normalize_affine, sample_roots, DistributionSpec, Law, RngStream};
use rootflow::verify::{final_roots, hermite_fit, lemma_residual, max_abs_diff, Route};
use rootflow::RootSet;

/// Roots with gaps in `[min_gap, 1]`, starting somewhere in `[-3, 3]`.
fn roots(n: std::ops::RangeInclusive<usize>, min_gap: f64) -> impl Strategy<Value = RootSet> {
    (-3.0..3.0f64, prop::collection::vec(min_gap..1.0f64, n)).prop_map(|(start, gaps)| {
        let mut x = start;
        let v: Vec<f64> = gaps
            .iter()
            .map(|g| {
                x += g;
                x
            })
            .collect();
        RootSet::new(v).unwrap()
    })
}

/// Roots on the dyadic grid `k / 1024`, so integer shifts are exact.
fn dyadic_roots(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = RootSet> {
    prop::collection::btree_set(-4096i32..4096, n)
        .prop_map(|s| RootSet::new(s.into_iter().map(|k| k as f64 / 1024.0).collect()).unwrap())
}

/// Distinct roots on a `1e-3` grid inside `[-3, 3]`.
fn bounded_roots(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = RootSet> {
    prop::collection::btree_set(-3000i32..=3000, n)
        .prop_map(|s| RootSet::new(s.into_iter().map(|k| k as f64 * 1e-3).collect()).unwrap())
}

fn esym_by_subsets(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut e = vec![0.0; n + 1];
    for mask in 0u32..(1 << n) {
        let p: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| x[i]).product();
        e[mask.count_ones() as usize] += p;
    }
    e
}

/// Ascending coefficients of `prod (x - r_i)` by plain expansion.
fn expand(r: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for &ri in r {
        let mut next = vec![0.0; c.len() + 1];
        for (k, &ck) in c.iter().enumerate() {
            next[k + 1] += ck;
            next[k] -= ri * ck;
        }
        c = next;
    }
    c
}

fn eval_ascending(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn newton_identities(r in roots(1..=12, 0.05)) {
        let n = r.len();
        let e = elementary_symmetric_all(&r, n).e;
        let p: Vec<f64> = (0..=n).map(|k| power_sum(&r, k as u32)).collect();
        for m in 1..=n {
            let rhs: f64 = (1..=m)
                .map(|i| if i % 2 == 1 { 1.0 } else { -1.0 } * e[m - i] * p[i])
                .sum();
            let scale: f64 = (1..=m).map(|i| (e[m - i] * p[i]).abs()).sum::<f64>().max(1.0);
            prop_assert!((m as f64 * e[m] - rhs).abs() <= 1e-10 * scale, "m={m}");
        }
    }

    #[test]
    fn e2_identity(r in roots(2..=40, 0.01)) {
        let e = elementary_symmetric_all(&r, 2).e;
        let p2 = power_sum(&r, 2);
        let want = 0.5 * (e[1] * e[1] - p2);
        prop_assert!((e[2] - want).abs() <= 1e-12 * (e[1] * e[1] + p2).max(1.0));
    }

    #[test]
    fn esym_matches_subsets(r in roots(1..=10, 0.05)) {
        let want = esym_by_subsets(r.as_slice());
        let got = elementary_symmetric_all(&r, r.len()).e;
        let x: Vec<f64> = r.iter().map(|v| v.abs()).collect();
        let scale = esym_by_subsets(&x);
        for k in 0..=r.len() {
            prop_assert!((got[k] - want[k]).abs() <= 1e-12 * scale[k].max(1e-300), "k={k}");
        }
    }

    #[test]
    fn power_sums_through_coefficients(raw in bounded_roots(2..=20)) {
        let r = normalize_affine(&raw).unwrap().0;
        let n = r.len();
        let poly = scaled_derivative_coeffs(&r, n).unwrap();
        let got = power_sums_from_esym(&poly, n);
        for m in 1..=n {
            let want = power_sum(&r, m as u32);
            let scale: f64 = r.iter().map(|v| v.abs().powi(m as i32)).sum::<f64>().max(1.0);
            prop_assert!((got[m - 1] - want).abs() <= 1e-10 * scale, "m={m}: {} vs {want}", got[m - 1]);
        }
    }

    #[test]
    fn interlacing_and_conservation(r in roots(3..=300, 1e-3)) {
        let cfg = EvolveConfig::default();
        let d = differentiate_once(&r, &cfg).unwrap();
        prop_assert!(strictly_interlaces(&r, &d));
        let tol = 1e-12 * (1.0 + r.mean().abs() + r.spread());
        prop_assert!((d.mean() - r.mean()).abs() <= tol);
        let (n, l) = (r.len() as f64, d.len() as f64);
        let a = r.pairwise_square_sum() / (n * n * (n - 1.0));
        let b = d.pairwise_square_sum() / (l * l * (l - 1.0));
        prop_assert!((a - b).abs() <= 1e-10 * a);
        // averages over pairs: ell/n shrinkage
        let avg_r = r.pairwise_square_sum() / (n * (n - 1.0) / 2.0);
        let avg_d = d.pairwise_square_sum() / (l * (l - 1.0) / 2.0);
        prop_assert!(rel_close(avg_d, l / n * avg_r, 1e-10));
    }

    #[test]
    fn small_n_matches_dense_oracle(r in roots(2..=6, 0.05)) {
        let d = differentiate_once(&r, &EvolveConfig::default()).unwrap();
        let c = expand(r.as_slice());
        let dc: Vec<f64> = c.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect();
        let x = r.as_slice();
        for (i, got) in d.iter().enumerate() {
            let want = bisect(|t| eval_ascending(&dc, t), x[i], x[i + 1]);
            prop_assert!((got - want).abs() <= 1e-9, "i={i}: {got} vs {want}");
        }
    }

    #[test]
    fn derivative_of_cauchy_sum_is_negative(r in roots(2..=400, 1e-3), t in 0.01..0.99f64) {
        let s = SourceSet::unit(r.clone());
        let plan = build_plan(&s, 1e-12).unwrap();
        let x = r.as_slice();
        for i in 0..x.len() - 1 {
            let q = x[i] + t * (x[i + 1] - x[i]);
            let (_, ds) = eval_pair(&plan, &s, q).unwrap();
            prop_assert!(ds < 0.0);
        }
    }

    #[test]
    fn translation_equivariance(r in dyadic_roots(2..=300), c in -64i32..64, t in 0.05..0.95f64) {
        let shifted = RootSet::new(r.iter().map(|v| v + c as f64).collect()).unwrap();
        let (a, b) = (SourceSet::unit(r.clone()), SourceSet::unit(shifted));
        let (pa, pb) = (build_plan(&a, 1e-12).unwrap(), build_plan(&b, 1e-12).unwrap());
        let x = r.as_slice();
        for i in 0..x.len() - 1 {
            let q = x[i] + t * (x[i + 1] - x[i]);
            let qs = q + c as f64;
            if qs - c as f64 != q {
                continue;
            }
            let (s1, d1) = eval_pair(&pa, &a, q).unwrap();
            let (s2, d2) = eval_pair(&pb, &b, qs).unwrap();
            let scale: f64 = x.iter().map(|v| 1.0 / (q - v).abs()).sum();
            prop_assert!((s1 - s2).abs() <= 1e-12 * scale, "S at {q}: {s1} vs {s2}");
            prop_assert!((d1 - d2).abs() <= 1e-12 * d1.abs(), "dS at {q}: {d1} vs {d2}");
        }
    }

    #[test]
    fn normalize_is_idempotent(r in roots(2..=200, 1e-3), shift in -50.0..50.0f64, scale in 0.01..100.0f64) {
        let moved = RootSet::new(r.iter().map(|v| shift + scale * v).collect()).unwrap();
        let (once, _, _) = normalize_affine(&moved).unwrap();
        let (twice, _, _) = normalize_affine(&once).unwrap();
        prop_assert!(max_abs_diff(&once, &twice) <= 1e-14, "{} max {}", max_abs_diff(&once, &twice), once.max().unwrap());
        prop_assert!(once.mean().abs() <= 1e-14);
        prop_assert!((once.variance() - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn histogram_counts_everything(v in prop::collection::vec(-1e6..1e6f64, 1..500), bins in 1usize..100) {
        let h = histogram(&v, bins).unwrap();
        prop_assert_eq!(h.counts.iter().sum::<u64>(), v.len() as u64);
        prop_assert_eq!(h.total, v.len() as u64);
        prop_assert_eq!(h.bin_edges.len(), bins + 1);
        prop_assert!(h.bin_edges.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn hermite_fit_recovers_shift(ell in 1usize..=60, extra in 0usize..200, c in -3.0..3.0f64) {
        let n = ell + extra;
        let y = hermite_roots(ell);
        let r = RootSet::new(y.iter().map(|v| (v - c) / (n as f64).sqrt()).collect()).unwrap();
        let fit = hermite_fit(&r, n).unwrap();
        prop_assert!((fit.gamma - c).abs() <= 1e-12 * (1.0 + c.abs()) * 10.0);
        prop_assert!(fit.rms_error <= 1e-12);
    }

    #[test]
    fn lemma_residual_m2_closed_form(r in roots(2..=300, 1e-3)) {
        let n = r.len() as f64;
        let p2 = power_sum(&r, 2);
        let want = 0.5 * (n - p2);
        let got = lemma_residual(&r, 2).unwrap();
        prop_assert!((got - want).abs() <= 1e-10 * (n + p2));
    }

    #[test]
    fn projections_interlace_in_both_modes(r in roots(3..=120, 1e-3), seed in any::<u64>()) {
        let cfg = EvolveConfig::default();
        for mode in [ProjectionMode::Deterministic, ProjectionMode::Random] {
            let steps = (r.len() - 1).min(5);
            let t = iterate_projections(&r, steps, mode, RngStream::new(seed, 0), &cfg).unwrap();
            for w in t.snapshots.windows(2) {
                prop_assert!(strictly_interlaces(&w[0].1, &w[1].1));
            }
        }
        let mut g = RngStream::new(seed, 0).generator();
        let det = project_once(&r, ProjectionMode::Deterministic, &mut g, &cfg).unwrap();
        prop_assert_eq!(det, differentiate_once(&r, &cfg).unwrap());
    }

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>(), stream in 0u64..1000, law_idx in 0usize..5, n in 1usize..300) {
        let spec = DistributionSpec::new(Law::ALL[law_idx]);
        let a = sample_roots(&spec, n, RngStream::new(seed, stream)).unwrap();
        let b = sample_roots(&spec, n, RngStream::new(seed, stream)).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn routes_agree(seed in any::<u64>(), n in 20usize..=200, ell in 1usize..=10, law_idx in 0usize..3) {
        let spec = DistributionSpec::new([Law::UniformSym, Law::GaussianStd, Law::Parabolic][law_idx]);
        let r = sample_roots(&spec, n, RngStream::new(seed, 0)).unwrap();
        let cfg = EvolveConfig::default();
        let a = final_roots(&r, ell, Route::Evolve, &cfg).unwrap();
        let b = final_roots(&r, ell, Route::Coeffs, &cfg).unwrap();
        prop_assert!(max_abs_diff(&a, &b) <= 1e-8, "{}", max_abs_diff(&a, &b));
    }

    /// Sum of secular roots equals `sum lambda - sum w^2 lambda`, read off the
    /// expanded secular polynomial `sum_i w_i^2 prod_{j != i} (z - lambda_j)`.
    #[test]
    fn secular_trace_identity(r in roots(2..=50, 0.01), seed in any::<u64>()) {
        let mut g = RngStream::new(seed, 0).generator();
        let w = rootflow::projections::sphere_weights(r.len(), &mut g);
        let z = weighted_critical_points(&SourceSet::weighted(r.clone(), w.clone()).unwrap(), &EvolveConfig::default()).unwrap();
        let x = r.as_slice();
        let n = x.len();
        let mut q = vec![0.0; n];
        for i in 0..n {
            let others: Vec<f64> = x.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).collect();
            for (k, c) in expand(&others).iter().enumerate() {
                q[k] += w[i] * c;
            }
        }
        let oracle = -q[n - 2] / q[n - 1];
        let got: f64 = z.iter().sum();
        let trace: f64 = x.iter().sum::<f64>() - x.iter().zip(&w).map(|(l, w)| l * w).sum::<f64>();
        let scale: f64 = x.iter().map(|v| v.abs()).sum();
        prop_assert!((got - oracle).abs() <= 1e-10 * scale, "{got} vs {oracle}");
        prop_assert!((got - trace).abs() <= 1e-10 * scale, "{got} vs {trace}");
    }
}
