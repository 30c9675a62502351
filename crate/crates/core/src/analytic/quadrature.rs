//! Composite Gauss–Legendre rules with node doubling.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::stats::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Starting nodes per panel and dimension.
    pub nodes: usize,
    /// Stop once two successive estimates differ by less than this.
    pub tolerance: f64,
    /// Give up after exceeding this many nodes per panel.
    pub max_nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes: 16,
            tolerance: 1e-4,
            max_nodes: 256,
        }
    }
}

impl QuadratureSpec {
    pub fn new(nodes: usize, tolerance: f64) -> Result<Self> {
        let spec = Self {
            nodes,
            tolerance,
            ..Self::default()
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes < 8 {
            return Err(Error::invalid("quad_nodes", format!("{} is below 8", self.nodes)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("quad_tolerance", "must be > 0"));
        }
        if self.max_nodes < self.nodes {
            return Err(Error::invalid("quad_max_nodes", "must be >= quad_nodes"));
        }
        Ok(())
    }
}

/// A converged integral and the difference between its last two estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub nodes: usize,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// three-term recurrence from Chebyshev starting points.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Nodes and weights of an `n`-point rule on every panel between sorted,
/// deduplicated breakpoints.
pub fn composite_rule(breakpoints: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut cuts: Vec<f64> = breakpoints.to_vec();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let (x, w) = gauss_legendre(n);
    let mut nodes = Vec::with_capacity(n * cuts.len());
    let mut weights = Vec::with_capacity(n * cuts.len());
    for pair in cuts.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        for (xk, wk) in x.iter().zip(&w) {
            nodes.push(mid + half * xk);
            weights.push(half * wk);
        }
    }
    (nodes, weights)
}

pub fn integrate(f: impl Fn(f64) -> f64, breakpoints: &[f64], n: usize) -> f64 {
    let (x, w) = composite_rule(breakpoints, n);
    x.iter().zip(&w).map(|(x, w)| w * f(*x)).collect::<CompensatedSum>().value()
}

/// Tensor-product rule over a box described by breakpoints per axis.
pub fn integrate_2d(
    f: impl Fn(f64, f64) -> f64,
    x_breaks: &[f64],
    y_breaks: &[f64],
    n: usize,
) -> f64 {
    let (x, wx) = composite_rule(x_breaks, n);
    let (y, wy) = composite_rule(y_breaks, n);
    let mut total = CompensatedSum::new();
    for (xi, wi) in x.iter().zip(&wx) {
        let mut row = CompensatedSum::new();
        for (yj, wj) in y.iter().zip(&wy) {
            row.add(wj * f(*xi, *yj));
        }
        total.add(wi * row.value());
    }
    total.value()
}

/// Runs `estimate(n)` for `n = nodes, 2·nodes, …` until two successive values
/// agree to within the tolerance.
pub fn doubling(spec: &QuadratureSpec, mut estimate: impl FnMut(usize) -> f64) -> Result<Integral> {
    spec.validate()?;
    let mut n = spec.nodes;
    let mut previous = estimate(n);
    let mut last_error = f64::INFINITY;
    while 2 * n <= spec.max_nodes {
        n *= 2;
        let current = estimate(n);
        last_error = (current - previous).abs();
        if last_error < spec.tolerance {
            return Ok(Integral {
                value: current,
                error: last_error,
                nodes: n,
            });
        }
        previous = current;
    }
    Err(Error::NonConvergence {
        estimate: last_error,
        tolerance: spec.tolerance,
        nodes: n,
    })
}
