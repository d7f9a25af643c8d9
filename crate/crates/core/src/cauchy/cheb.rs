//! Chebyshev points of the second kind on [-1, 1] and barycentric
//! interpolation through them.

use std::f64::consts::PI;

#[derive(Clone, Debug)]
pub(crate) struct ChebBasis {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Row-major `k x k` differentiation matrix at the nodes.
    pub diff: Vec<f64>,
}

impl ChebBasis {
    pub fn new(k: usize) -> Self {
        assert!(k >= 2);
        let nodes: Vec<f64> = (0..k)
            .map(|j| (PI * j as f64 / (k - 1) as f64).cos())
            .collect();
        let weights: Vec<f64> = (0..k)
            .map(|j| {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == k - 1 {
                    0.5 * s
                } else {
                    s
                }
            })
            .collect();
        let mut diff = vec![0.0; k * k];
        for i in 0..k {
            let mut row_sum = 0.0;
            for j in 0..k {
                if i != j {
                    let v = weights[j] / weights[i] / (nodes[i] - nodes[j]);
                    diff[i * k + j] = v;
                    row_sum += v;
                }
            }
            // negative-sum trick keeps rows exact on constants
            diff[i * k + i] = -row_sum;
        }
        ChebBasis {
            nodes,
            weights,
            diff,
        }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Lagrange basis values `L_j(u)` written into `out`.
    pub fn lagrange(&self, u: f64, out: &mut [f64]) {
        if let Some(j) = self.nodes.iter().position(|&t| t == u) {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[j] = 1.0;
            return;
        }
        let mut denom = 0.0;
        for ((o, &t), &w) in out.iter_mut().zip(&self.nodes).zip(&self.weights) {
            let c = w / (u - t);
            *o = c;
            denom += c;
        }
        let inv = 1.0 / denom;
        out.iter_mut().for_each(|v| *v *= inv);
    }

    /// Interpolant and its derivative (in reference units) at `u`.
    pub fn eval_with_derivative(&self, values: &[f64], u: f64) -> (f64, f64) {
        let k = self.order();
        if let Some(j) = self.nodes.iter().position(|&t| t == u) {
            let row = &self.diff[j * k..(j + 1) * k];
            let d: f64 = row.iter().zip(values).map(|(a, b)| a * b).sum();
            return (values[j], d);
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&t, &w), &f) in self.nodes.iter().zip(&self.weights).zip(values) {
            let c = w / (u - t);
            num += c * f;
            den += c;
        }
        let p = num / den;
        let mut dnum = 0.0;
        for ((&t, &w), &f) in self.nodes.iter().zip(&self.weights).zip(values) {
            let inv = 1.0 / (u - t);
            dnum += w * (p - f) * inv * inv;
        }
        (p, dnum / den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_polynomials_and_derivatives() {
        let b = ChebBasis::new(8);
        let f = |x: f64| 3.0 * x.powi(5) - x * x + 0.5;
        let df = |x: f64| 15.0 * x.powi(4) - 2.0 * x;
        let vals: Vec<f64> = b.nodes.iter().map(|&t| f(t)).collect();
        for &u in &[-1.0, -0.73, 0.0, 0.41, 0.999, b.nodes[3]] {
            let (p, dp) = b.eval_with_derivative(&vals, u);
            assert!((p - f(u)).abs() < 1e-13, "u={u}");
            assert!((dp - df(u)).abs() < 1e-11, "u={u}: {dp} vs {}", df(u));
        }
    }

    #[test]
    fn lagrange_partition_of_unity() {
        let b = ChebBasis::new(12);
        let mut l = vec![0.0; 12];
        for &u in &[-0.9, 0.1, b.nodes[5]] {
            b.lagrange(u, &mut l);
            assert!((l.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn geometric_convergence_for_cauchy_kernel() {
        // pole at distance 3 from the centre, as for a well-separated panel
        let k = 22;
        let b = ChebBasis::new(k);
        let f = |x: f64| 1.0 / (x - 3.0);
        let vals: Vec<f64> = b.nodes.iter().map(|&t| f(t)).collect();
        let worst = (0..=200)
            .map(|i| -1.0 + i as f64 / 100.0)
            .map(|u| (b.eval_with_derivative(&vals, u).0 - f(u)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-15, "{worst}");
    }
}
