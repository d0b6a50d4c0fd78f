//! Small moment accumulators with fixed summation order.

use serde::{Deserialize, Serialize};

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n_effective: usize,
    /// Bound on the bias from truncating paths at the horizon.
    pub tail_bound: f64,
}

impl McEstimate {
    pub fn exact(v: f64) -> McEstimate {
        McEstimate { mean: v, std_err: 0.0, n_effective: 0, tail_bound: 0.0 }
    }

    pub fn from_samples(xs: &[f64]) -> McEstimate {
        let n = xs.len();
        if n == 0 {
            return McEstimate { mean: f64::NAN, std_err: f64::NAN, n_effective: 0, tail_bound: 0.0 };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        McEstimate { mean, std_err: (var / n as f64).sqrt(), n_effective: n, tail_bound: 0.0 }
    }

    pub fn with_tail(mut self, tail: f64) -> McEstimate {
        self.tail_bound = tail;
        self
    }

    /// |self − other| ≤ k·sqrt(se₁² + se₂²), ignoring correlation.
    pub fn agrees_with(&self, other: &McEstimate, k: f64) -> bool {
        (self.mean - other.mean).abs() <= k * combined_se(self.std_err, other.std_err)
    }
}

pub fn combined_se(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}

/// Means and covariance of a fixed-size vector of per-sample statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments<const K: usize> {
    pub n: usize,
    pub sum: [f64; K],
    pub cross: [[f64; K]; K],
}

impl<const K: usize> Default for Moments<K> {
    fn default() -> Self {
        Moments { n: 0, sum: [0.0; K], cross: [[0.0; K]; K] }
    }
}

impl<const K: usize> Moments<K> {
    pub fn push(&mut self, x: &[f64; K]) {
        self.n += 1;
        self.add(x, 1.0);
    }

    /// Adds `sign·x` to the sums and `sign·x xᵀ` to the cross moments without
    /// touching the count; used to swap one sample's contribution for another.
    pub fn add(&mut self, x: &[f64; K], sign: f64) {
        for i in 0..K {
            self.sum[i] += sign * x[i];
            for j in i..K {
                self.cross[i][j] += sign * x[i] * x[j];
            }
        }
    }

    pub fn mean(&self) -> [f64; K] {
        let n = self.n as f64;
        std::array::from_fn(|i| self.sum[i] / n)
    }

    /// Covariance of the sample mean vector.
    pub fn mean_cov(&self) -> [[f64; K]; K] {
        let n = self.n as f64;
        let m = self.mean();
        let mut c = [[0.0; K]; K];
        if self.n < 2 {
            return c;
        }
        for i in 0..K {
            for j in i..K {
                let v = (self.cross[i][j] - n * m[i] * m[j]) / (n - 1.0) / n;
                c[i][j] = v;
                c[j][i] = v;
            }
        }
        c
    }

    /// Delta-method standard error of a smooth function with gradient `g` at the mean.
    pub fn delta_se(&self, g: &[f64; K]) -> f64 {
        let c = self.mean_cov();
        let mut v = 0.0;
        for i in 0..K {
            for j in 0..K {
                v += g[i] * c[i][j] * g[j];
            }
        }
        v.max(0.0).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_match_direct() {
        let xs = [[1.0, 2.0], [3.0, -1.0], [0.5, 0.5], [2.0, 4.0]];
        let mut m = Moments::<2>::default();
        for x in &xs {
            m.push(x);
        }
        let first: Vec<f64> = xs.iter().map(|x| x[0]).collect();
        let e = McEstimate::from_samples(&first);
        assert!((m.mean()[0] - e.mean).abs() < 1e-15);
        assert!((m.delta_se(&[1.0, 0.0]) - e.std_err).abs() < 1e-12);
    }

    #[test]
    fn swap_contribution() {
        let mut a = Moments::<1>::default();
        a.push(&[1.0]);
        a.push(&[5.0]);
        a.add(&[5.0], -1.0);
        a.add(&[2.0], 1.0);
        let mut b = Moments::<1>::default();
        b.push(&[1.0]);
        b.push(&[2.0]);
        assert_eq!(a.sum, b.sum);
        assert_eq!(a.cross, b.cross);
    }
}
