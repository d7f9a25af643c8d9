use std::time::Instant;

use rootflow::cauchy::{build_plan, eval_batch, SourceSet};
use rootflow::report::ks_against;
use rootflow::sampling::{sample_roots, DistributionSpec, Law, RngStream};
use rootflow::RootSet;

fn direct(x: &[f64], w: &[f64], r: f64) -> (f64, f64) {
    x.iter().zip(w).fold((0.0, 0.0), |(s, d), (&xi, &wi)| {
        let t = 1.0 / (r - xi);
        (s + wi * t, d - wi * t * t)
    })
}

fn random_sources(n: usize, seed: u64) -> RootSet {
    sample_roots(&DistributionSpec::new(Law::UniformSym), n, RngStream::new(seed, 0)).unwrap()
}

#[test]
fn fast_sum_error_bound_per_query() {
    let eps = 1e-12;
    for (weighted, seed) in [(false, 1u64), (true, 2)] {
        let r = random_sources(10_000, seed);
        let n = r.len();
        let mut g = RngStream::new(seed, 7).generator();
        let w: Vec<f64> = if weighted { (0..n).map(|_| 0.1 + g.uniform()).collect() } else { vec![1.0; n] };
        let s = if weighted { SourceSet::weighted(r.clone(), w.clone()).unwrap() } else { SourceSet::unit(r.clone()) };
        let plan = build_plan(&s, eps).unwrap();
        assert!(!plan.is_direct());
        let x = r.as_slice();
        let lo = x[0];
        let width = plan.panel_width();
        let total: f64 = w.iter().sum();
        let queries: Vec<f64> = (0..1000)
            .map(|_| {
                let i = (g.uniform() * (n - 1) as f64) as usize;
                x[i] + (0.05 + 0.9 * g.uniform()) * (x[i + 1] - x[i])
            })
            .collect();
        let got = eval_batch(&plan, &s, &queries).unwrap();
        for (&q, &(fs, fd)) in queries.iter().zip(&got) {
            let b = ((q - lo) / width).floor();
            // nearest panel outside the near field on either side
            let d_min = (q - (lo + (b - 1.0) * width)).min(lo + (b + 2.0) * width - q);
            let (ds, dd) = direct(x, &w, q);
            let bound = 10.0 * eps * total / d_min;
            assert!((fs - ds).abs() <= bound, "S at {q}: {fs} vs {ds}, bound {bound}");
            assert!((fd - dd).abs() <= bound / d_min + 1e-14 * dd.abs(), "dS at {q}: {fd} vs {dd}");
        }
    }
}

#[test]
fn sampled_laws_pass_ks() {
    let n = 100_000;
    for (i, law) in Law::ALL.into_iter().enumerate() {
        let r = sample_roots(&DistributionSpec::new(law), n, RngStream::new(2024, i as u64)).unwrap();
        let d = ks_against(r.as_slice(), |x| law.cdf(x));
        assert!(d <= 2.0 / (n as f64).sqrt(), "{law}: KS {d}");
    }
}

fn time_fast(n: usize) -> f64 {
    let s = SourceSet::unit(random_sources(n, n as u64));
    let x = s.positions().as_slice().to_vec();
    let queries: Vec<f64> = x.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    (0..3)
        .map(|_| {
            let t = Instant::now();
            let plan = build_plan(&s, 1e-12).unwrap();
            std::hint::black_box(eval_batch(&plan, &s, &queries).unwrap());
            t.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn cost_grows_like_n_log_n() {
    let times: Vec<f64> = (13..=17).map(|k| time_fast(1 << k)).collect();
    for (k, w) in (13..).zip(times.windows(2)) {
        let ratio = w[1] / w[0];
        println!("n=2^{k} -> 2^{}: {:.4}s -> {:.4}s (x{ratio:.2})", k + 1, w[0], w[1]);
        assert!(ratio < 3.0, "doubling n from 2^{k} multiplied time by {ratio:.2}");
    }
}
