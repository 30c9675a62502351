//! Two unit-cost projects worth `a < b` competing for a budget of one.
//!
//! The better-valued project is funded with probability
//! `Φ((b − a)/√(g(t₁)² + g(t₂)²))`, where `g` is the spread of the aggregated
//! estimate for a project of type `t`. Averaging the expected value over
//! uniformly distributed types gives the performance `E₂(β, N_s)`.

pub mod median;
pub mod normal;
pub mod quadrature;

use crate::aggregation::{pick_delegate, pick_individual, AggregationMethod};
use crate::error::{Error, Result};
use crate::model::{build_panel, ExpertisePanel};
use median::{median_below_probability, median_below_probability_reduced, Triple};
pub use quadrature::{Integral, QuadratureSpec};

/// Nodes per panel for the median's `y` integral inside `E₂`.
const MEDIAN_INNER_NODES: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoProjectScenario {
    pub a: f64,
    pub b: f64,
    pub panel: ExpertisePanel,
    pub t_min: f64,
    pub t_max: f64,
}

impl TwoProjectScenario {
    pub fn new(a: f64, b: f64, panel: ExpertisePanel, t_min: f64, t_max: f64) -> Result<Self> {
        if !(a > 0.0 && a < b) || !b.is_finite() {
            return Err(Error::invalid("values", format!("need 0 < a < b, got a = {a}, b = {b}")));
        }
        if !(t_min < t_max) || !t_min.is_finite() || !t_max.is_finite() {
            return Err(Error::invalid("t_min", format!("need t_min < t_max, got [{t_min}, {t_max}]")));
        }
        Ok(Self {
            a,
            b,
            panel,
            t_min,
            t_max,
        })
    }

    /// Scenario with a panel of `n_groups` levels around `center`.
    pub fn with_panel(
        a: f64,
        b: f64,
        center: f64,
        breadth: f64,
        n_groups: usize,
        (t_min, t_max): (f64, f64),
    ) -> Result<Self> {
        Self::new(a, b, build_panel(center, breadth, n_groups)?, t_min, t_max)
    }

    /// Baseline scenario: `a = 1`, `b = 2`, types on `[0, 10]`, centre 5.
    pub fn baseline(breadth: f64, n_groups: usize) -> Result<Self> {
        Self::with_panel(1.0, 2.0, 5.0, breadth, n_groups, (0.0, 10.0))
    }

    /// Edges of the smooth pieces of `g`: the type range, the levels inside it
    /// and the midpoints between consecutive levels.
    fn breakpoints(&self) -> Vec<f64> {
        let levels = self.panel.levels();
        let mut cuts = vec![self.t_min, self.t_max];
        cuts.extend(levels.iter().copied());
        cuts.extend(levels.windows(2).map(|p| 0.5 * (p[0] + p[1])));
        cuts.retain(|t| *t >= self.t_min && *t <= self.t_max);
        cuts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TwoProjectMethod {
    Mean,
    Individual,
    Delegation,
    Median,
}

impl TwoProjectMethod {
    pub fn from_aggregation(method: &AggregationMethod) -> Option<Self> {
        match method {
            AggregationMethod::ArithmeticMean => Some(Self::Mean),
            AggregationMethod::Individual => Some(Self::Individual),
            AggregationMethod::Delegation => Some(Self::Delegation),
            AggregationMethod::Median => Some(Self::Median),
            _ => None,
        }
    }
}

/// Spread of the aggregated estimate for a project of type `t`.
///
/// Mean: `√(Σ σ_j²)/N_s`. Individual: `|t − e_k*|` with `k*` the level nearest
/// the middle of `type_range`. Delegation: `min_j |t − e_j|`. Median: the
/// middle of the sorted `σ_j`; the exact median distribution is handled by
/// [`value_two_median`].
pub fn g_agg(method: TwoProjectMethod, t: f64, panel: &ExpertisePanel, type_range: (f64, f64)) -> f64 {
    let levels = panel.levels();
    match method {
        TwoProjectMethod::Mean => {
            let ss: f64 = levels.iter().map(|e| (t - e) * (t - e)).sum();
            ss.sqrt() / levels.len() as f64
        }
        TwoProjectMethod::Individual => {
            (t - levels[pick_individual(panel, type_range.0, type_range.1)]).abs()
        }
        TwoProjectMethod::Delegation => (t - levels[pick_delegate(t, panel)]).abs(),
        TwoProjectMethod::Median => {
            let mut s: Vec<f64> = levels.iter().map(|e| (t - e).abs()).collect();
            s.sort_by(f64::total_cmp);
            s[s.len() / 2]
        }
    }
}

/// `a + (b − a)·Φ((b − a)/√(g₁² + g₂²))`, or `b` when both spreads vanish.
pub fn value_from_spreads(a: f64, b: f64, g1: f64, g2: f64) -> f64 {
    let spread = g1.hypot(g2);
    if spread == 0.0 {
        return b;
    }
    a + (b - a) * normal::cdf((b - a) / spread)
}

/// Expected value of the funded project for fixed types.
pub fn value_two(t1: f64, t2: f64, scenario: &TwoProjectScenario, method: TwoProjectMethod) -> Result<f64> {
    if method == TwoProjectMethod::Median {
        return Ok(value_two_median(t1, t2, scenario, &QuadratureSpec::default())?.value);
    }
    let range = (scenario.t_min, scenario.t_max);
    let g1 = g_agg(method, t1, &scenario.panel, range);
    let g2 = g_agg(method, t2, &scenario.panel, range);
    Ok(value_from_spreads(scenario.a, scenario.b, g1, g2))
}

fn median_triples(t1: f64, t2: f64, scenario: &TwoProjectScenario) -> Result<(Triple, Triple)> {
    let levels = scenario.panel.levels();
    if levels.len() != 3 {
        return Err(Error::Unsupported(format!(
            "median quadrature needs exactly 3 groups, got {}",
            levels.len()
        )));
    }
    let sigmas = |t: f64| [0, 1, 2].map(|j| (t - levels[j]).abs());
    Ok((
        Triple::new(scenario.a, sigmas(t1)),
        Triple::new(scenario.b, sigmas(t2)),
    ))
}

/// Expected value under the median of three groups, by node doubling on the
/// double integral.
pub fn value_two_median(
    t1: f64,
    t2: f64,
    scenario: &TwoProjectScenario,
    spec: &QuadratureSpec,
) -> Result<Integral> {
    let (low, high) = median_triples(t1, t2, scenario)?;
    let gap = scenario.b - scenario.a;
    let p = quadrature::doubling(spec, |n| median_below_probability(&low, &high, n))?;
    Ok(Integral {
        value: scenario.a + gap * p.value,
        error: gap * p.error,
        nodes: p.nodes,
    })
}

/// `E₂`: the average of the expected value over both types, with its
/// node-doubling error estimate.
pub fn performance_two(
    scenario: &TwoProjectScenario,
    method: TwoProjectMethod,
    spec: &QuadratureSpec,
) -> Result<Integral> {
    let cuts = scenario.breakpoints();
    let area = (scenario.t_max - scenario.t_min).powi(2);
    let (a, b) = (scenario.a, scenario.b);
    let range = (scenario.t_min, scenario.t_max);
    if method == TwoProjectMethod::Median {
        median_triples(scenario.t_min, scenario.t_min, scenario)?;
        return quadrature::doubling(spec, |n| {
            let (t, w) = quadrature::composite_rule(&cuts, n);
            let mut total = crate::stats::CompensatedSum::new();
            for i in 0..t.len() {
                for j in 0..t.len() {
                    let (lo, hi) = median_triples(t[i], t[j], scenario).expect("three groups");
                    let p = median_below_probability_reduced(&lo, &hi, MEDIAN_INNER_NODES);
                    total.add(w[i] * w[j] * (a + (b - a) * p));
                }
            }
            total.value() / area
        });
    }
    quadrature::doubling(spec, |n| {
        let (t, w) = quadrature::composite_rule(&cuts, n);
        let g: Vec<f64> = t.iter().map(|t| g_agg(method, *t, &scenario.panel, range)).collect();
        let mut total = crate::stats::CompensatedSum::new();
        for (gi, wi) in g.iter().zip(&w) {
            let mut row = crate::stats::CompensatedSum::new();
            for (gj, wj) in g.iter().zip(&w) {
                row.add(wj * value_from_spreads(a, b, *gi, *gj));
            }
            total.add(wi * row.value());
        }
        total.value() / area
    })
}

/// Breadth at which delegation performs best: `e_M − t_min − Δ/(2N_s)`.
pub fn beta_opt(n_groups: usize, e_m: f64, t_min: f64, t_max: f64) -> Result<f64> {
    if n_groups == 0 {
        return Err(Error::invalid("n_groups", "must be >= 1"));
    }
    Ok(e_m - t_min - (t_max - t_min) / (2.0 * n_groups as f64))
}

/// Breadth beyond which delegation and individual coincide: `e_M(N_s − 1)`.
pub fn beta_equiv(n_groups: usize, e_m: f64) -> Result<f64> {
    if n_groups < 2 {
        return Err(Error::invalid("n_groups", "must be >= 2"));
    }
    Ok(e_m * (n_groups - 1) as f64)
}
