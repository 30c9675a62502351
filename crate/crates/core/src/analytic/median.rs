//! Probability that the three-group median of one project falls below that
//! of another.
//!
//! With `v_kℓ ~ N(center_k, σ_kℓ²)` for `ℓ = 1, 2, 3`, the median of project
//! `k` has density `Σ_ℓ f_kℓ(y) h_kℓ(y)`, where `f_kℓ` is the normal density
//! of group `ℓ` and `h_kℓ(y) = F_m(y)(1 − F_n(y)) + F_n(y)(1 − F_m(y))` over
//! the other two groups `m, n`. This is the sum over the six orderings of the
//! three evaluations. The probability is the double integral of the product
//! of the two densities over `y₁ < y₂`.
//!
//! Each density term is integrated in its own standardized variable
//! `y = center + σ·z`, `z ∈ [−Z_MAX, Z_MAX]`, with breakpoints where the other
//! factors change on a much smaller scale.

use super::normal;
use super::quadrature::composite_rule;
use crate::stats::CompensatedSum;

/// Smallest σ used inside the integral; exact groups become very narrow normals.
pub const MIN_SIGMA: f64 = 1e-6;

const Z_MAX: f64 = 9.0;
const FEATURE_OFFSETS: [f64; 4] = [-4.0, -1.0, 1.0, 4.0];
const NARROW: f64 = 0.25;
/// Fixed panel edges in every standardized variable.
const STANDARD_CUTS: [f64; 4] = [-4.5, -2.0, 2.0, 4.5];

/// Evaluations of one project by three groups.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triple {
    pub center: f64,
    pub sigmas: [f64; 3],
}

impl Triple {
    pub fn new(center: f64, sigmas: [f64; 3]) -> Self {
        Self {
            center,
            sigmas: sigmas.map(|s| s.max(MIN_SIGMA)),
        }
    }

    fn cdfs(&self, y: f64) -> [f64; 3] {
        self.sigmas.map(|s| normal::cdf((y - self.center) / s))
    }

    /// `h_ℓ(y)`: one of the other two groups below `y` and one above.
    fn straddle(&self, l: usize, y: f64) -> f64 {
        let f = self.cdfs(y);
        let (m, n) = match l {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        f[m] * (1.0 - f[n]) + f[n] * (1.0 - f[m])
    }

    /// Distribution function of the median, `F₁F₂ + F₁F₃ + F₂F₃ − 2F₁F₂F₃`.
    pub fn median_cdf(&self, y: f64) -> f64 {
        let [a, b, c] = self.cdfs(y);
        a * b + a * c + b * c - 2.0 * a * b * c
    }

    /// Density of the median.
    pub fn median_pdf(&self, y: f64) -> f64 {
        (0..3)
            .map(|l| {
                let s = self.sigmas[l];
                normal::pdf((y - self.center) / s) / s * self.straddle(l, y)
            })
            .sum()
    }

    /// Standardized breakpoints for term `l` where `y` crosses `target`, and
    /// a few widths either side of it for every scale much narrower than σ_ℓ.
    fn cuts(&self, l: usize, target: f64, scales: &[f64; 3], lo: f64, hi: f64) -> Vec<f64> {
        let s = self.sigmas[l];
        let base = (target - self.center) / s;
        let mut cuts = vec![lo, hi, base];
        cuts.extend(STANDARD_CUTS);
        for scale in scales.iter().filter(|w| **w < NARROW * s) {
            for c in FEATURE_OFFSETS {
                cuts.push(base + c * scale / s);
            }
        }
        cuts.retain(|z| *z >= lo && *z <= hi);
        cuts
    }

    /// `∫_{−∞}^{upper} Σ_ℓ f_ℓ h_ℓ`, integrated term by term.
    fn integral_below(&self, upper: f64, n: usize) -> f64 {
        let mut total = CompensatedSum::new();
        for l in 0..3 {
            let s = self.sigmas[l];
            let hi = ((upper - self.center) / s).min(Z_MAX);
            if hi <= -Z_MAX {
                continue;
            }
            let cuts = self.cuts(l, self.center, &self.sigmas, -Z_MAX, hi);
            let (z, w) = composite_rule(&cuts, n);
            for (zk, wk) in z.iter().zip(&w) {
                total.add(wk * normal::pdf(*zk) * self.straddle(l, self.center + s * zk));
            }
        }
        total.value()
    }
}

/// `Pr(median₁ < median₂)` as the double integral of the two median densities
/// over `y₁ < y₂`, with `n` nodes per panel in both variables.
pub fn median_below_probability(lower: &Triple, upper: &Triple, n: usize) -> f64 {
    let mut total = CompensatedSum::new();
    for s_idx in 0..3 {
        let s = upper.sigmas[s_idx];
        let mut cuts = upper.cuts(s_idx, lower.center, &lower.sigmas, -Z_MAX, Z_MAX);
        cuts.extend(upper.cuts(s_idx, upper.center, &upper.sigmas, -Z_MAX, Z_MAX));
        let (z, w) = composite_rule(&cuts, n);
        for (zk, wk) in z.iter().zip(&w) {
            let y2 = upper.center + s * zk;
            let weight = wk * normal::pdf(*zk) * upper.straddle(s_idx, y2);
            if weight != 0.0 {
                total.add(weight * lower.integral_below(y2, n));
            }
        }
    }
    total.value().clamp(0.0, 1.0)
}

/// Same probability with the inner `y₁` integral replaced by its closed form,
/// the median distribution function of `lower`.
pub fn median_below_probability_reduced(lower: &Triple, upper: &Triple, n: usize) -> f64 {
    let mut total = CompensatedSum::new();
    for s_idx in 0..3 {
        let s = upper.sigmas[s_idx];
        let mut cuts = upper.cuts(s_idx, lower.center, &lower.sigmas, -Z_MAX, Z_MAX);
        cuts.extend(upper.cuts(s_idx, upper.center, &upper.sigmas, -Z_MAX, Z_MAX));
        let (z, w) = composite_rule(&cuts, n);
        for (zk, wk) in z.iter().zip(&w) {
            let y2 = upper.center + s * zk;
            total.add(wk * normal::pdf(*zk) * upper.straddle(s_idx, y2) * lower.median_cdf(y2));
        }
    }
    total.value().clamp(0.0, 1.0)
}
